#include "rdforge/multitask.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

namespace rdforge {

DwaState::DwaState(int num_tasks, double temperature)
    : n_(num_tasks), temp_(temperature) {
  if (num_tasks < 1) {
    throw std::runtime_error("dwa: need at least one task");
  }
  if (!(temperature > 0.0) || !std::isfinite(temperature)) {
    throw std::runtime_error("dwa: temperature must be positive and finite");
  }
  weights_.assign(n_, 1.0);
}

const std::vector<double>& DwaState::update(
    const std::vector<double>& epoch_losses) {
  if (static_cast<int>(epoch_losses.size()) != n_) {
    throw std::runtime_error("dwa: expected " + std::to_string(n_) +
                             " losses, got " +
                             std::to_string(epoch_losses.size()));
  }
  for (double l : epoch_losses) {
    if (!std::isfinite(l) || l <= 0.0) {
      throw std::runtime_error(
          "dwa: epoch losses must be finite and positive");
    }
  }
  prev2_ = prev_;
  prev_ = epoch_losses;
  ++epochs_recorded_;
  if (epochs_recorded_ < 2) {
    return weights_;  // still the all-ones bootstrap
  }
  std::vector<double> scaled(n_);
  for (int i = 0; i < n_; ++i) {
    scaled[i] = prev_[i] / prev2_[i] / temp_;
  }
  const double m = *std::max_element(scaled.begin(), scaled.end());
  double denom = 0.0;
  for (int i = 0; i < n_; ++i) denom += std::exp(scaled[i] - m);
  for (int i = 0; i < n_; ++i) {
    weights_[i] = static_cast<double>(n_) * std::exp(scaled[i] - m) / denom;
    // A saturated softmax can underflow to exactly zero; weights stay
    // positive by contract, and this floor cannot disturb the sum.
    weights_[i] = std::max(weights_[i], std::numeric_limits<double>::min());
  }
  return weights_;
}

MultitaskLoss multitask_loss(const Model& model, const ad::Tensor& gloss_vec,
                             const std::map<std::string, ad::Tensor>& targets,
                             const std::map<std::string, double>& weights) {
  if (targets.empty()) {
    throw std::runtime_error("multitask_loss: no targets present");
  }
  MultitaskLoss out;
  bool first = true;
  for (const auto& [task, target] : targets) {
    if (model.params.find("head." + task + ".w") == model.params.end()) {
      throw std::runtime_error("multitask_loss: model has no head for task \"" +
                               task + "\"");
    }
    const auto wit = weights.find(task);
    if (wit == weights.end()) {
      throw std::runtime_error("multitask_loss: no weight for task \"" + task +
                               "\"");
    }
    ad::Tensor l = ad::mse(model.head_output(task, gloss_vec), target);
    out.task_mse[task] = l.item();
    ad::Tensor term = ad::scale(l, wit->second);
    out.total = first ? term : ad::add(out.total, term);
    first = false;
  }
  return out;
}

}  // namespace rdforge
