#pragma once

#include <map>
#include <string>
#include <vector>

#include "rdforge/encoder.hpp"
#include "rdforge/tensor.hpp"

namespace rdforge {

// Dynamic weight averaging over per-epoch mean losses. Each task's weight
// for the next epoch follows its loss ratio r_i = L_i(t-1)/L_i(t-2):
//   w_i = N * exp(r_i / T) / sum_n exp(r_n / T)
// so tasks whose loss stalls get pushed harder. Until two epochs of history
// exist, every weight is 1. Weights always sum to N.
class DwaState {
 public:
  explicit DwaState(int num_tasks, double temperature = 2.0);

  // Records one epoch's per-task mean losses (all finite and positive) and
  // returns the weights to use for the next epoch.
  const std::vector<double>& update(const std::vector<double>& epoch_losses);

  const std::vector<double>& weights() const { return weights_; }
  int num_tasks() const { return n_; }
  double temperature() const { return temp_; }
  int epochs_recorded() const { return epochs_recorded_; }

 private:
  int n_;
  double temp_;
  std::vector<double> prev_;   // L(t-1)
  std::vector<double> prev2_;  // L(t-2)
  int epochs_recorded_ = 0;
  std::vector<double> weights_;
};

struct MultitaskLoss {
  ad::Tensor total;                        // weighted scalar, on the tape
  std::map<std::string, double> task_mse;  // unweighted values, bookkeeping
};

// Weighted sum of per-task MSE over the tasks whose target is present.
// Heads without a target are never touched, so their gradient is exactly
// zero. Throws when no target is present, a target names a task the model
// has no head for, or a task is missing its weight.
MultitaskLoss multitask_loss(const Model& model, const ad::Tensor& gloss_vec,
                             const std::map<std::string, ad::Tensor>& targets,
                             const std::map<std::string, double>& weights);

}  // namespace rdforge
