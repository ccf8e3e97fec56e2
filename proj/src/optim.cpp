#include "rdforge/optim.hpp"

#include <cmath>
#include <stdexcept>

namespace rdforge::ad {

AdamW::AdamW(std::vector<Tensor> params, AdamWConfig config)
    : params_(std::move(params)), config_(config) {
  m_.reserve(params_.size());
  v_.reserve(params_.size());
  for (const Tensor& p : params_) {
    m_.emplace_back(p.data().size(), 0.0);
    v_.emplace_back(p.data().size(), 0.0);
  }
}

void AdamW::step() {
  for (const Tensor& p : params_) {
    if (!p.has_grad()) {
      throw std::runtime_error("adamw: parameter missing gradient");
    }
  }
  ++t_;
  const double bc1 = 1.0 - std::pow(config_.beta1, static_cast<double>(t_));
  const double bc2 = 1.0 - std::pow(config_.beta2, static_cast<double>(t_));
  for (size_t k = 0; k < params_.size(); ++k) {
    auto& data = params_[k].data();
    const auto& grad = params_[k].grad();
    auto& m = m_[k];
    auto& v = v_[k];
    for (size_t i = 0; i < data.size(); ++i) {
      const double g = grad[i];
      m[i] = config_.beta1 * m[i] + (1.0 - config_.beta1) * g;
      v[i] = config_.beta2 * v[i] + (1.0 - config_.beta2) * g * g;
      const double m_hat = m[i] / bc1;
      const double v_hat = v[i] / bc2;
      // Decoupled decay: applied to the parameter directly, not the gradient.
      data[i] -= config_.lr * (m_hat / (std::sqrt(v_hat) + config_.eps) +
                               config_.weight_decay * data[i]);
    }
  }
}

void AdamW::zero_grad() {
  for (Tensor& p : params_) p.zero_grad();
}

double clip_global_norm(std::vector<Tensor>& params, double max_norm) {
  double sq = 0.0;
  for (const Tensor& p : params) {
    if (!p.has_grad()) continue;
    for (const double g : p.grad()) sq += g * g;
  }
  const double norm = std::sqrt(sq);
  if (norm > max_norm && norm > 0.0) {
    const double s = max_norm / norm;
    for (Tensor& p : params) {
      if (!p.has_grad()) continue;
      for (double& g : p.grad()) g *= s;
    }
  }
  return norm;
}

}  // namespace rdforge::ad
