#pragma once

#include <cstdint>
#include <functional>
#include <memory>
#include <span>
#include <string>
#include <vector>

#include "rdforge/rng.hpp"

namespace rdforge::ad {

using Shape = std::vector<int64_t>;

int64_t shape_numel(const Shape& shape);
std::string shape_str(const Shape& shape);

struct TensorImpl {
  Shape shape;
  std::vector<double> data;
  std::vector<double> grad;  // empty until backward touches this tensor
  bool requires_grad = false;
  uint64_t tape_id = 0;  // 0: not recorded on any tape
  int64_t node_id = -1;
};

// Dense 64-bit tensor handle. Copies share the underlying storage, so a
// parameter handed to several ops is one accumulation target in backward.
class Tensor {
 public:
  Tensor() = default;
  Tensor(Shape shape, std::vector<double> data, bool requires_grad = false);

  static Tensor zeros(Shape shape, bool requires_grad = false);
  static Tensor full(Shape shape, double value, bool requires_grad = false);
  static Tensor scalar(double value, bool requires_grad = false);
  static Tensor row(std::vector<double> values, bool requires_grad = false);

  bool defined() const { return impl_ != nullptr; }
  const Shape& shape() const { return impl_->shape; }
  int64_t numel() const { return static_cast<int64_t>(impl_->data.size()); }
  int64_t rank() const { return static_cast<int64_t>(impl_->shape.size()); }

  // Rank-2 view helpers; rank-1 tensors count as a single row.
  int64_t rows() const;
  int64_t cols() const;

  std::vector<double>& data() { return impl_->data; }
  const std::vector<double>& data() const { return impl_->data; }
  double item() const;  // numel() == 1
  double at(int64_t r, int64_t c) const;

  bool requires_grad() const { return impl_->requires_grad; }
  void set_requires_grad(bool v) { impl_->requires_grad = v; }

  std::vector<double>& grad();              // allocates zeros on first use
  const std::vector<double>& grad() const;  // throws if absent
  bool has_grad() const { return !impl_->grad.empty(); }
  void zero_grad();

  bool all_finite() const;

  TensorImpl* impl() const { return impl_.get(); }
  const std::shared_ptr<TensorImpl>& handle() const { return impl_; }

 private:
  std::shared_ptr<TensorImpl> impl_;
};

// Records every differentiable op in execution order; backward replays the
// list in exact reverse. A tape and its tensors belong to one thread.
class Tape {
 public:
  Tape();

  uint64_t id() const { return id_; }
  size_t size() const { return entries_.size(); }

  // The innermost active tape on this thread, or nullptr.
  static Tape* active();

  void record(const char* op, std::vector<Tensor> inputs, Tensor& output,
              std::function<void()> backward_fn);

  void run_backward(const Tensor& loss);

 private:
  struct Entry {
    const char* op;
    std::vector<Tensor> inputs;
    Tensor output;
    std::function<void()> backward_fn;
  };

  uint64_t id_;
  std::vector<Entry> entries_;
};

// RAII activation of a tape for the current thread.
class TapeScope {
 public:
  explicit TapeScope(Tape& tape);
  ~TapeScope();
  TapeScope(const TapeScope&) = delete;
  TapeScope& operator=(const TapeScope&) = delete;

 private:
  Tape* previous_;
};

// ---------------------------------------------------------------------------
// Ops. Shapes are rank 1 or 2; elementwise ops accept equal shapes, a
// trailing-dim row vector broadcast over a leading batch dim, or a scalar.
// Each op records a backward rule when a tape is active and any input
// requires grad.

Tensor matmul(const Tensor& a, const Tensor& b);
Tensor transpose(const Tensor& a);
Tensor add(const Tensor& a, const Tensor& b);
Tensor mul(const Tensor& a, const Tensor& b);
Tensor scale(const Tensor& a, double c);
Tensor concat(const std::vector<Tensor>& parts);  // along the last dim
Tensor slice_cols(const Tensor& a, int64_t start, int64_t len);
Tensor slice_rows(const Tensor& a, int64_t start, int64_t len);
Tensor tanh(const Tensor& a);
Tensor sigmoid(const Tensor& a);
Tensor relu(const Tensor& a);
Tensor softmax(const Tensor& a);  // rows of the last dim
Tensor layer_norm(const Tensor& a, double eps = 1e-5);  // normalize only, no affine
Tensor embedding_lookup(const Tensor& table, std::span<const int> ids);
Tensor dropout(const Tensor& a, double keep_prob, bool train, Rng& rng);
Tensor mean(const Tensor& a);
Tensor mse(const Tensor& pred, const Tensor& target);

// Populates grads of every requires_grad ancestor of a scalar loss.
// Repeated calls accumulate; callers zero grads between steps.
void backward(const Tensor& loss, Tape& tape);

// ---------------------------------------------------------------------------
// Uniform dispatch surface over the op set, used by generic test drivers.

enum class OpKind {
  kMatmul,
  kAdd,
  kMul,
  kConcat,
  kTanh,
  kSigmoid,
  kRelu,
  kSoftmax,
  kLayerNorm,
  kEmbeddingLookup,
  kDropout,
  kMean,
  kMse,
};

struct OpOptions {
  double keep_prob = 1.0;           // dropout
  bool train = false;               // dropout
  Rng* rng = nullptr;               // dropout
  double eps = 1e-5;                // layer_norm
  const std::vector<int>* ids = nullptr;  // embedding_lookup
};

Tensor forward_op(OpKind kind, const std::vector<Tensor>& inputs,
                  const OpOptions& opts = {});

const char* op_name(OpKind kind);

}  // namespace rdforge::ad
