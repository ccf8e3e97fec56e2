#pragma once

#include <cstdint>
#include <vector>

#include "rdforge/tensor.hpp"

namespace rdforge::ad {

struct AdamWConfig {
  double lr = 1e-3;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps = 1e-8;
  double weight_decay = 0.0;
};

// Adam with decoupled weight decay. Moments are kept per parameter in the
// order the parameters are registered; grads are left untouched by step().
class AdamW {
 public:
  AdamW(std::vector<Tensor> params, AdamWConfig config);

  // One update over all registered parameters. Every parameter must carry a
  // populated gradient.
  void step();

  void zero_grad();

  int64_t step_count() const { return t_; }
  const AdamWConfig& config() const { return config_; }
  const std::vector<Tensor>& params() const { return params_; }

 private:
  std::vector<Tensor> params_;
  AdamWConfig config_;
  std::vector<std::vector<double>> m_;
  std::vector<std::vector<double>> v_;
  int64_t t_ = 0;
};

// Scales all grads so their global L2 norm is at most max_norm.
// Returns the pre-clip norm.
double clip_global_norm(std::vector<Tensor>& params, double max_norm);

}  // namespace rdforge::ad
