#pragma once

#include <cstdint>
#include <limits>
#include <map>
#include <string>
#include <vector>

#include "rdforge/dataio.hpp"
#include "rdforge/encoder.hpp"

namespace rdforge {

struct TrainOptions {
  double lr = 1e-3;
  int batch_size = 64;
  int epochs = 50;
  int patience = 5;        // dev epochs without a new best; < 1 disables
  double clip_norm = 5.0;  // global gradient norm ceiling; <= 0 disables
  double weight_decay = 0.0;
  bool dwa = true;
  double dwa_temperature = 2.0;
  uint64_t seed = 0;
};

struct EpochStats {
  int epoch = 0;                             // 1-based
  std::map<std::string, double> task_loss;   // epoch means, unweighted
  std::map<std::string, double> dwa_weight;  // weights used this epoch
  double dev_loss = std::numeric_limits<double>::quiet_NaN();
};

struct TrainResult {
  Model model;
  std::vector<EpochStats> log;
  int best_epoch = 0;  // 1-based; 0 when no dev set was given
  double best_dev_loss = std::numeric_limits<double>::quiet_NaN();

  // "epoch,task,mean_loss,dwa_weight" rows, one per epoch and task.
  std::string log_csv() const;
};

// Minibatch AdamW training of every model task at once, with DWA loss
// weights updated per epoch. The dev set drives early stopping: when given,
// the returned model carries the parameters of its best epoch. Batch order,
// dropout and initialization all derive from opts.seed, so equal inputs
// reproduce equal results bit for bit.
TrainResult train_model(Model model, const std::vector<GlossEntry>& train_set,
                        const std::vector<GlossEntry>& dev_set,
                        const TrainOptions& opts);

}  // namespace rdforge
