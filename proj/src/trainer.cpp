#include "rdforge/trainer.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <stdexcept>

#include "rdforge/multitask.hpp"
#include "rdforge/optim.hpp"

namespace rdforge {

namespace {

std::string shortest(double v) {
  char buf[32];
  const auto res = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, res.ptr);
}

int task_index(const std::string& name) {
  for (int t = 0; t < kNumTasks; ++t) {
    if (name == kTaskNames[t]) return t;
  }
  return -1;
}

// Mean unweighted MSE per task over a dataset, eval mode; the dev criterion
// is the sum of the per-task means.
double dev_criterion(const Model& model, const std::vector<GlossEntry>& dev) {
  std::map<std::string, double> sum;
  std::map<std::string, int64_t> count;
  for (const GlossEntry& e : dev) {
    const std::vector<int> ids = model.tokenizer.encode(
        e.gloss, model.config.alt ? e.language : "", true);
    const ad::Tensor v = model.encode_gloss(ids);
    for (const TaskHead& head : model.tasks) {
      const int ti = task_index(head.name);
      if (ti < 0 || !e.task(ti)) continue;
      const ad::Tensor target({1, head.dim}, *e.task(ti));
      const double l = ad::mse(model.head_output(head.name, v), target).item();
      sum[head.name] += l;
      ++count[head.name];
    }
  }
  double total = 0.0;
  for (const auto& [task, s] : sum) {
    total += s / static_cast<double>(count.at(task));
  }
  return total;
}

}  // namespace

std::string TrainResult::log_csv() const {
  std::string out = "epoch,task,mean_loss,dwa_weight\n";
  for (const EpochStats& row : log) {
    for (const auto& [task, loss] : row.task_loss) {
      out += std::to_string(row.epoch) + "," + task + "," + shortest(loss) +
             "," + shortest(row.dwa_weight.at(task)) + "\n";
    }
  }
  return out;
}

TrainResult train_model(Model model, const std::vector<GlossEntry>& train_set,
                        const std::vector<GlossEntry>& dev_set,
                        const TrainOptions& opts) {
  if (train_set.empty()) {
    throw std::runtime_error("train: empty training set");
  }
  if (model.tasks.empty()) {
    throw std::runtime_error("train: model has no task heads");
  }
  if (opts.batch_size < 1) {
    throw std::runtime_error("train: batch_size must be >= 1");
  }
  if (opts.epochs < 1) {
    throw std::runtime_error("train: epochs must be >= 1");
  }
  if (!(opts.lr > 0.0) || !std::isfinite(opts.lr)) {
    throw std::runtime_error("train: lr must be positive");
  }

  // Every configured task must be trainable at all.
  for (const TaskHead& head : model.tasks) {
    const int ti = task_index(head.name);
    bool seen = false;
    if (ti >= 0) {
      for (const GlossEntry& e : train_set) {
        if (e.task(ti)) {
          seen = true;
          break;
        }
      }
    }
    if (!seen) {
      throw std::runtime_error("train: task \"" + head.name +
                               "\" has no targets in the training set");
    }
  }

  ad::AdamWConfig acfg;
  acfg.lr = opts.lr;
  acfg.weight_decay = opts.weight_decay;
  std::vector<ad::Tensor> params = model.parameters();
  ad::AdamW optimizer(params, acfg);

  DwaState dwa(static_cast<int>(model.tasks.size()), opts.dwa_temperature);
  Rng dropout_rng(Rng::derive(opts.seed, "dropout"));

  TrainResult result;
  double best = std::numeric_limits<double>::infinity();
  std::map<std::string, std::vector<double>> best_params;
  int stale = 0;

  for (int epoch = 1; epoch <= opts.epochs; ++epoch) {
    std::map<std::string, double> weights;
    for (size_t i = 0; i < model.tasks.size(); ++i) {
      weights[model.tasks[i].name] = opts.dwa ? dwa.weights()[i] : 1.0;
    }

    const auto batches =
        make_batches(train_set, model.tokenizer, opts.batch_size,
                     model.config.alt,
                     Rng::derive(opts.seed, "epoch:" + std::to_string(epoch)));

    std::map<std::string, double> task_sum;
    std::map<std::string, int64_t> task_count;
    for (const Batch& batch : batches) {
      ad::Tape tape;
      ad::TapeScope scope(tape);
      ad::Tensor total;
      bool any = false;
      for (int r = 0; r < batch.size(); ++r) {
        std::map<std::string, ad::Tensor> targets;
        for (const TaskHead& head : model.tasks) {
          const int ti = task_index(head.name);
          if (ti < 0 || !batch.present[ti][r]) continue;
          targets.emplace(head.name,
                          ad::Tensor({1, head.dim}, batch.targets[ti][r]));
        }
        if (targets.empty()) continue;  // nothing this model can learn from
        const ad::Tensor v =
            model.encode_gloss(batch.ids[r], true, &dropout_rng);
        MultitaskLoss ml = multitask_loss(model, v, targets, weights);
        for (const auto& [task, value] : ml.task_mse) {
          task_sum[task] += value;
          ++task_count[task];
        }
        total = any ? ad::add(total, ml.total) : ml.total;
        any = true;
      }
      if (!any) continue;
      const ad::Tensor loss =
          ad::scale(total, 1.0 / static_cast<double>(batch.size()));
      if (!std::isfinite(loss.item())) {
        throw std::runtime_error("train: non-finite loss at epoch " +
                                 std::to_string(epoch));
      }
      ad::backward(loss, tape);
      if (opts.clip_norm > 0.0) {
        clip_global_norm(params, opts.clip_norm);
      }
      optimizer.step();
      optimizer.zero_grad();
    }

    EpochStats stats;
    stats.epoch = epoch;
    stats.dwa_weight = weights;
    std::vector<double> means;
    for (const TaskHead& head : model.tasks) {
      const double mean = task_sum[head.name] /
                          static_cast<double>(task_count[head.name]);
      stats.task_loss[head.name] = mean;
      // DWA history must stay positive; a perfectly converged task would
      // otherwise poison the ratio.
      means.push_back(std::max(mean, 1e-300));
    }
    if (opts.dwa) {
      dwa.update(means);
    }

    if (!dev_set.empty()) {
      stats.dev_loss = dev_criterion(model, dev_set);
      if (stats.dev_loss < best) {
        best = stats.dev_loss;
        result.best_epoch = epoch;
        stale = 0;
        best_params.clear();
        for (const auto& [name, t] : model.params) best_params[name] = t.data();
      } else {
        ++stale;
      }
      result.log.push_back(std::move(stats));
      if (opts.patience >= 1 && stale >= opts.patience) {
        break;
      }
    } else {
      result.log.push_back(std::move(stats));
    }
  }

  if (!best_params.empty()) {
    for (auto& [name, t] : model.params) t.data() = best_params.at(name);
    result.best_dev_loss = best;
  }
  result.model = std::move(model);
  return result;
}

}  // namespace rdforge
