#include "rdforge/tensor.hpp"

#include <atomic>
#include <cmath>
#include <stdexcept>

namespace rdforge::ad {

namespace {

thread_local Tape* g_active_tape = nullptr;
std::atomic<uint64_t> g_next_tape_id{1};

[[noreturn]] void fail(const std::string& msg) { throw std::runtime_error(msg); }

void check_defined(const Tensor& t, const char* op) {
  if (!t.defined()) fail(std::string(op) + ": undefined tensor");
}

bool tape_on(std::initializer_list<const Tensor*> inputs) {
  if (Tape::active() == nullptr) return false;
  for (const Tensor* t : inputs) {
    if (t->requires_grad()) return true;
  }
  return false;
}

// Broadcast classes accepted by elementwise binary ops.
enum class Bcast { kSame, kRow, kScalarB };

Bcast classify_bcast(const Tensor& a, const Tensor& b, const char* op) {
  if (a.shape() == b.shape()) return Bcast::kSame;
  if (b.numel() == 1) return Bcast::kScalarB;
  if (a.rank() == 2 && b.rank() == 1 && a.cols() == b.numel()) return Bcast::kRow;
  fail(std::string(op) + ": shape mismatch " + shape_str(a.shape()) + " vs " +
       shape_str(b.shape()));
}

}  // namespace

int64_t shape_numel(const Shape& shape) {
  int64_t n = 1;
  for (const int64_t d : shape) n *= d;
  return n;
}

std::string shape_str(const Shape& shape) {
  std::string s = "[";
  for (size_t i = 0; i < shape.size(); ++i) {
    if (i > 0) s += ",";
    s += std::to_string(shape[i]);
  }
  return s + "]";
}

Tensor::Tensor(Shape shape, std::vector<double> data, bool requires_grad) {
  if (shape_numel(shape) != static_cast<int64_t>(data.size())) {
    fail("tensor: shape " + shape_str(shape) + " does not match data length " +
         std::to_string(data.size()));
  }
  impl_ = std::make_shared<TensorImpl>();
  impl_->shape = std::move(shape);
  impl_->data = std::move(data);
  impl_->requires_grad = requires_grad;
}

Tensor Tensor::zeros(Shape shape, bool requires_grad) {
  const auto n = static_cast<size_t>(shape_numel(shape));
  return Tensor(std::move(shape), std::vector<double>(n, 0.0), requires_grad);
}

Tensor Tensor::full(Shape shape, double value, bool requires_grad) {
  const auto n = static_cast<size_t>(shape_numel(shape));
  return Tensor(std::move(shape), std::vector<double>(n, value), requires_grad);
}

Tensor Tensor::scalar(double value, bool requires_grad) {
  return Tensor({1}, {value}, requires_grad);
}

Tensor Tensor::row(std::vector<double> values, bool requires_grad) {
  const auto n = static_cast<int64_t>(values.size());
  return Tensor({n}, std::move(values), requires_grad);
}

int64_t Tensor::rows() const { return rank() == 2 ? shape()[0] : 1; }

int64_t Tensor::cols() const {
  return rank() == 0 ? 1 : shape()[rank() - 1];
}

double Tensor::item() const {
  if (numel() != 1) fail("item: tensor has " + std::to_string(numel()) + " elements");
  return impl_->data[0];
}

double Tensor::at(int64_t r, int64_t c) const {
  return impl_->data[static_cast<size_t>(r * cols() + c)];
}

std::vector<double>& Tensor::grad() {
  if (impl_->grad.empty()) impl_->grad.assign(impl_->data.size(), 0.0);
  return impl_->grad;
}

const std::vector<double>& Tensor::grad() const {
  if (impl_->grad.empty()) fail("grad: no gradient populated");
  return impl_->grad;
}

void Tensor::zero_grad() {
  if (!impl_->grad.empty()) impl_->grad.assign(impl_->data.size(), 0.0);
}

bool Tensor::all_finite() const {
  for (const double v : impl_->data) {
    if (!std::isfinite(v)) return false;
  }
  return true;
}

Tape::Tape() : id_(g_next_tape_id.fetch_add(1)) {}

Tape* Tape::active() { return g_active_tape; }

void Tape::record(const char* op, std::vector<Tensor> inputs, Tensor& output,
                  std::function<void()> backward_fn) {
  for (Tensor& in : inputs) {
    if (in.impl()->tape_id != id_) {
      in.impl()->tape_id = id_;
      in.impl()->node_id = static_cast<int64_t>(entries_.size());
    }
  }
  output.set_requires_grad(true);
  output.impl()->tape_id = id_;
  output.impl()->node_id = static_cast<int64_t>(entries_.size());
  entries_.push_back(Entry{op, std::move(inputs), output, std::move(backward_fn)});
}

void Tape::run_backward(const Tensor& loss) {
  if (loss.numel() != 1) {
    fail("backward: loss must be scalar, got shape " + shape_str(loss.shape()));
  }
  if (loss.impl()->tape_id != id_) {
    fail("backward: loss is not recorded on this tape");
  }
  loss.impl()->grad.assign(1, 1.0);
  for (auto it = entries_.rbegin(); it != entries_.rend(); ++it) {
    if (it->output.impl()->grad.empty()) continue;  // not on the loss path
    it->backward_fn();
  }
}

TapeScope::TapeScope(Tape& tape) : previous_(g_active_tape) {
  g_active_tape = &tape;
}

TapeScope::~TapeScope() { g_active_tape = previous_; }

void backward(const Tensor& loss, Tape& tape) { tape.run_backward(loss); }

// ---------------------------------------------------------------------------
// Ops

Tensor matmul(const Tensor& a, const Tensor& b) {
  check_defined(a, "matmul");
  check_defined(b, "matmul");
  if (a.rank() > 2 || b.rank() != 2) {
    fail("matmul: expects rank-2 operands, got " + shape_str(a.shape()) +
         " x " + shape_str(b.shape()));
  }
  const int64_t m = a.rows(), k = a.cols(), k2 = b.shape()[0], n = b.shape()[1];
  if (k != k2) {
    fail("matmul: inner dimensions differ: " + shape_str(a.shape()) + " x " +
         shape_str(b.shape()));
  }
  Shape out_shape = a.rank() == 1 ? Shape{n} : Shape{m, n};
  Tensor out = Tensor::zeros(std::move(out_shape));
  const double* pa = a.data().data();
  const double* pb = b.data().data();
  double* pc = out.data().data();
  for (int64_t i = 0; i < m; ++i) {
    for (int64_t p = 0; p < k; ++p) {
      const double av = pa[i * k + p];
      if (av == 0.0) continue;
      const double* brow = pb + p * n;
      double* crow = pc + i * n;
      for (int64_t j = 0; j < n; ++j) crow[j] += av * brow[j];
    }
  }
  if (tape_on({&a, &b})) {
    Tape::active()->record("matmul", {a, b}, out, [a, b, out, m, k, n]() {
      const auto& go = out.impl()->grad;
      if (a.requires_grad()) {
        auto& ga = Tensor(a).grad();
        const double* pb2 = b.data().data();
        for (int64_t i = 0; i < m; ++i) {
          for (int64_t j = 0; j < n; ++j) {
            const double g = go[i * n + j];
            if (g == 0.0) continue;
            for (int64_t p = 0; p < k; ++p) ga[i * k + p] += g * pb2[p * n + j];
          }
        }
      }
      if (b.requires_grad()) {
        auto& gb = Tensor(b).grad();
        const double* pa2 = a.data().data();
        for (int64_t i = 0; i < m; ++i) {
          for (int64_t p = 0; p < k; ++p) {
            const double av = pa2[i * k + p];
            if (av == 0.0) continue;
            for (int64_t j = 0; j < n; ++j) gb[p * n + j] += av * go[i * n + j];
          }
        }
      }
    });
  }
  return out;
}

Tensor transpose(const Tensor& a) {
  check_defined(a, "transpose");
  if (a.rank() != 2) fail("transpose: expects rank-2, got " + shape_str(a.shape()));
  const int64_t m = a.rows(), n = a.cols();
  Tensor out = Tensor::zeros({n, m});
  for (int64_t i = 0; i < m; ++i) {
    for (int64_t j = 0; j < n; ++j) out.data()[j * m + i] = a.at(i, j);
  }
  if (tape_on({&a})) {
    Tape::active()->record("transpose", {a}, out, [a, out, m, n]() {
      if (!a.requires_grad()) return;
      auto& ga = Tensor(a).grad();
      const auto& go = out.impl()->grad;
      for (int64_t i = 0; i < m; ++i) {
        for (int64_t j = 0; j < n; ++j) ga[i * n + j] += go[j * m + i];
      }
    });
  }
  return out;
}

namespace {

template <class Fwd>
Tensor elementwise_binary(const char* name, const Tensor& a, const Tensor& b,
                          Fwd fwd, bool is_add) {
  check_defined(a, name);
  check_defined(b, name);
  const Bcast bc = classify_bcast(a, b, name);
  Tensor out = Tensor::zeros(a.shape());
  const int64_t n = a.numel();
  const int64_t c = a.cols();
  const auto& da = a.data();
  const auto& db = b.data();
  auto& dc = out.data();
  for (int64_t i = 0; i < n; ++i) {
    const double bv = bc == Bcast::kSame ? db[i]
                      : bc == Bcast::kScalarB ? db[0]
                                              : db[i % c];
    dc[i] = fwd(da[i], bv);
  }
  if (tape_on({&a, &b})) {
    Tape::active()->record(name, {a, b}, out, [a, b, out, bc, n, c, is_add]() {
      const auto& go = out.impl()->grad;
      if (a.requires_grad()) {
        auto& ga = Tensor(a).grad();
        if (is_add) {
          for (int64_t i = 0; i < n; ++i) ga[i] += go[i];
        } else {
          const auto& db2 = b.data();
          for (int64_t i = 0; i < n; ++i) {
            const double bv = bc == Bcast::kSame ? db2[i]
                              : bc == Bcast::kScalarB ? db2[0]
                                                      : db2[i % c];
            ga[i] += go[i] * bv;
          }
        }
      }
      if (b.requires_grad()) {
        auto& gb = Tensor(b).grad();
        const auto& da2 = a.data();
        for (int64_t i = 0; i < n; ++i) {
          const double w = is_add ? 1.0 : da2[i];
          const int64_t j = bc == Bcast::kSame ? i
                            : bc == Bcast::kScalarB ? 0
                                                    : i % c;
          gb[j] += go[i] * w;
        }
      }
    });
  }
  return out;
}

}  // namespace

Tensor add(const Tensor& a, const Tensor& b) {
  return elementwise_binary("add", a, b, [](double x, double y) { return x + y; }, true);
}

Tensor mul(const Tensor& a, const Tensor& b) {
  return elementwise_binary("mul", a, b, [](double x, double y) { return x * y; }, false);
}

Tensor scale(const Tensor& a, double c) {
  check_defined(a, "scale");
  Tensor out = Tensor::zeros(a.shape());
  const int64_t n = a.numel();
  for (int64_t i = 0; i < n; ++i) out.data()[i] = a.data()[i] * c;
  if (tape_on({&a})) {
    Tape::active()->record("scale", {a}, out, [a, out, c, n]() {
      if (!a.requires_grad()) return;
      auto& ga = Tensor(a).grad();
      const auto& go = out.impl()->grad;
      for (int64_t i = 0; i < n; ++i) ga[i] += go[i] * c;
    });
  }
  return out;
}

Tensor concat(const std::vector<Tensor>& parts) {
  if (parts.empty()) fail("concat: no inputs");
  for (const Tensor& p : parts) check_defined(p, "concat");
  const int64_t rank = parts[0].rank();
  const int64_t rows = parts[0].rows();
  int64_t total_cols = 0;
  for (const Tensor& p : parts) {
    if (p.rank() != rank || p.rows() != rows) {
      fail("concat: incompatible shapes " + shape_str(parts[0].shape()) +
           " vs " + shape_str(p.shape()));
    }
    total_cols += p.cols();
  }
  Shape out_shape = rank == 1 ? Shape{total_cols} : Shape{rows, total_cols};
  Tensor out = Tensor::zeros(std::move(out_shape));
  int64_t offset = 0;
  for (const Tensor& p : parts) {
    const int64_t c = p.cols();
    for (int64_t i = 0; i < rows; ++i) {
      for (int64_t j = 0; j < c; ++j) {
        out.data()[i * total_cols + offset + j] = p.at(i, j);
      }
    }
    offset += c;
  }
  bool want = Tape::active() != nullptr;
  bool any_grad = false;
  for (const Tensor& p : parts) any_grad = any_grad || p.requires_grad();
  if (want && any_grad) {
    Tape::active()->record("concat", parts, out, [parts, out, rows, total_cols]() {
      const auto& go = out.impl()->grad;
      int64_t off = 0;
      for (const Tensor& p : parts) {
        const int64_t c = p.cols();
        if (p.requires_grad()) {
          auto& gp = Tensor(p).grad();
          for (int64_t i = 0; i < rows; ++i) {
            for (int64_t j = 0; j < c; ++j) {
              gp[i * c + j] += go[i * total_cols + off + j];
            }
          }
        }
        off += c;
      }
    });
  }
  return out;
}

namespace {

Tensor slice_impl(const char* name, const Tensor& a, int64_t start, int64_t len,
                  bool rows_axis) {
  check_defined(a, name);
  const int64_t extent = rows_axis ? a.rows() : a.cols();
  if (len <= 0 || start < 0 || start + len > extent) {
    fail(std::string(name) + ": range [" + std::to_string(start) + "," +
         std::to_string(start + len) + ") out of bounds for " + shape_str(a.shape()));
  }
  if (rows_axis && a.rank() != 2) fail("slice_rows: expects rank-2");
  const int64_t r = a.rows(), c = a.cols();
  Shape out_shape;
  if (rows_axis) {
    out_shape = {len, c};
  } else {
    out_shape = a.rank() == 1 ? Shape{len} : Shape{r, len};
  }
  Tensor out = Tensor::zeros(std::move(out_shape));
  if (rows_axis) {
    for (int64_t i = 0; i < len; ++i) {
      for (int64_t j = 0; j < c; ++j) out.data()[i * c + j] = a.at(start + i, j);
    }
  } else {
    for (int64_t i = 0; i < r; ++i) {
      for (int64_t j = 0; j < len; ++j) out.data()[i * len + j] = a.at(i, start + j);
    }
  }
  if (tape_on({&a})) {
    Tape::active()->record(name, {a}, out, [a, out, start, len, rows_axis, r, c]() {
      if (!a.requires_grad()) return;
      auto& ga = Tensor(a).grad();
      const auto& go = out.impl()->grad;
      if (rows_axis) {
        for (int64_t i = 0; i < len; ++i) {
          for (int64_t j = 0; j < c; ++j) ga[(start + i) * c + j] += go[i * c + j];
        }
      } else {
        for (int64_t i = 0; i < r; ++i) {
          for (int64_t j = 0; j < len; ++j) ga[i * c + start + j] += go[i * len + j];
        }
      }
    });
  }
  return out;
}

template <class F, class DF>
Tensor elementwise_unary(const char* name, const Tensor& a, F f, DF df_from_y) {
  check_defined(a, name);
  Tensor out = Tensor::zeros(a.shape());
  const int64_t n = a.numel();
  for (int64_t i = 0; i < n; ++i) out.data()[i] = f(a.data()[i]);
  if (tape_on({&a})) {
    Tape::active()->record(name, {a}, out, [a, out, n, df_from_y]() {
      if (!a.requires_grad()) return;
      auto& ga = Tensor(a).grad();
      const auto& go = out.impl()->grad;
      const auto& y = out.data();
      const auto& x = a.data();
      for (int64_t i = 0; i < n; ++i) ga[i] += go[i] * df_from_y(x[i], y[i]);
    });
  }
  return out;
}

}  // namespace

Tensor slice_cols(const Tensor& a, int64_t start, int64_t len) {
  return slice_impl("slice_cols", a, start, len, false);
}

Tensor slice_rows(const Tensor& a, int64_t start, int64_t len) {
  return slice_impl("slice_rows", a, start, len, true);
}

Tensor tanh(const Tensor& a) {
  return elementwise_unary(
      "tanh", a, [](double x) { return std::tanh(x); },
      [](double, double y) { return 1.0 - y * y; });
}

Tensor sigmoid(const Tensor& a) {
  return elementwise_unary(
      "sigmoid", a, [](double x) { return 1.0 / (1.0 + std::exp(-x)); },
      [](double, double y) { return y * (1.0 - y); });
}

Tensor relu(const Tensor& a) {
  return elementwise_unary(
      "relu", a, [](double x) { return x > 0.0 ? x : 0.0; },
      [](double x, double) { return x > 0.0 ? 1.0 : 0.0; });
}

Tensor softmax(const Tensor& a) {
  check_defined(a, "softmax");
  if (a.cols() == 0) fail("softmax: empty axis");
  const int64_t r = a.rows(), c = a.cols();
  Tensor out = Tensor::zeros(a.shape());
  for (int64_t i = 0; i < r; ++i) {
    double mx = a.at(i, 0);
    for (int64_t j = 1; j < c; ++j) mx = std::max(mx, a.at(i, j));
    double sum = 0.0;
    for (int64_t j = 0; j < c; ++j) {
      const double e = std::exp(a.at(i, j) - mx);
      out.data()[i * c + j] = e;
      sum += e;
    }
    for (int64_t j = 0; j < c; ++j) out.data()[i * c + j] /= sum;
  }
  if (tape_on({&a})) {
    Tape::active()->record("softmax", {a}, out, [a, out, r, c]() {
      if (!a.requires_grad()) return;
      auto& ga = Tensor(a).grad();
      const auto& go = out.impl()->grad;
      const auto& y = out.data();
      for (int64_t i = 0; i < r; ++i) {
        double dot = 0.0;
        for (int64_t j = 0; j < c; ++j) dot += go[i * c + j] * y[i * c + j];
        for (int64_t j = 0; j < c; ++j) {
          ga[i * c + j] += y[i * c + j] * (go[i * c + j] - dot);
        }
      }
    });
  }
  return out;
}

Tensor layer_norm(const Tensor& a, double eps) {
  check_defined(a, "layer_norm");
  if (a.cols() == 0) fail("layer_norm: empty axis");
  const int64_t r = a.rows(), c = a.cols();
  Tensor out = Tensor::zeros(a.shape());
  std::vector<double> inv_std(static_cast<size_t>(r));
  for (int64_t i = 0; i < r; ++i) {
    double mu = 0.0;
    for (int64_t j = 0; j < c; ++j) mu += a.at(i, j);
    mu /= static_cast<double>(c);
    double var = 0.0;
    for (int64_t j = 0; j < c; ++j) {
      const double d = a.at(i, j) - mu;
      var += d * d;
    }
    var /= static_cast<double>(c);
    const double is = 1.0 / std::sqrt(var + eps);
    inv_std[static_cast<size_t>(i)] = is;
    for (int64_t j = 0; j < c; ++j) out.data()[i * c + j] = (a.at(i, j) - mu) * is;
  }
  if (tape_on({&a})) {
    Tape::active()->record("layer_norm", {a}, out, [a, out, r, c, inv_std]() {
      if (!a.requires_grad()) return;
      auto& ga = Tensor(a).grad();
      const auto& go = out.impl()->grad;
      const auto& y = out.data();
      for (int64_t i = 0; i < r; ++i) {
        double mean_g = 0.0, mean_gy = 0.0;
        for (int64_t j = 0; j < c; ++j) {
          mean_g += go[i * c + j];
          mean_gy += go[i * c + j] * y[i * c + j];
        }
        mean_g /= static_cast<double>(c);
        mean_gy /= static_cast<double>(c);
        const double is = inv_std[static_cast<size_t>(i)];
        for (int64_t j = 0; j < c; ++j) {
          ga[i * c + j] += is * (go[i * c + j] - mean_g - y[i * c + j] * mean_gy);
        }
      }
    });
  }
  return out;
}

Tensor embedding_lookup(const Tensor& table, std::span<const int> ids) {
  check_defined(table, "embedding_lookup");
  if (table.rank() != 2) fail("embedding_lookup: table must be rank-2");
  const int64_t v = table.rows(), d = table.cols();
  const auto t = static_cast<int64_t>(ids.size());
  for (const int id : ids) {
    if (id < 0 || id >= v) {
      fail("embedding_lookup: id " + std::to_string(id) + " out of range [0," +
           std::to_string(v) + ")");
    }
  }
  Tensor out = Tensor::zeros({t, d});
  for (int64_t i = 0; i < t; ++i) {
    const int64_t row = ids[static_cast<size_t>(i)];
    for (int64_t j = 0; j < d; ++j) out.data()[i * d + j] = table.at(row, j);
  }
  if (tape_on({&table})) {
    std::vector<int> ids_copy(ids.begin(), ids.end());
    Tape::active()->record("embedding_lookup", {table}, out,
                           [table, out, ids_copy, d]() {
                             if (!table.requires_grad()) return;
                             auto& gt = Tensor(table).grad();
                             const auto& go = out.impl()->grad;
                             for (size_t i = 0; i < ids_copy.size(); ++i) {
                               const int64_t row = ids_copy[i];
                               for (int64_t j = 0; j < d; ++j) {
                                 gt[row * d + j] += go[static_cast<int64_t>(i) * d + j];
                               }
                             }
                           });
  }
  return out;
}

Tensor dropout(const Tensor& a, double keep_prob, bool train, Rng& rng) {
  check_defined(a, "dropout");
  if (keep_prob <= 0.0 || keep_prob > 1.0) {
    fail("dropout: keep probability must be in (0,1], got " + std::to_string(keep_prob));
  }
  if (!train || keep_prob == 1.0) {
    // Inverted dropout: eval mode is the identity.
    Tensor out = Tensor(a.shape(), a.data());
    if (tape_on({&a})) {
      const int64_t n = a.numel();
      Tape::active()->record("dropout", {a}, out, [a, out, n]() {
        if (!a.requires_grad()) return;
        auto& ga = Tensor(a).grad();
        const auto& go = out.impl()->grad;
        for (int64_t i = 0; i < n; ++i) ga[i] += go[i];
      });
    }
    return out;
  }
  const int64_t n = a.numel();
  auto mask = std::make_shared<std::vector<double>>(static_cast<size_t>(n));
  const double inv_keep = 1.0 / keep_prob;
  for (int64_t i = 0; i < n; ++i) {
    (*mask)[i] = rng.uniform() < keep_prob ? inv_keep : 0.0;
  }
  Tensor out = Tensor::zeros(a.shape());
  for (int64_t i = 0; i < n; ++i) out.data()[i] = a.data()[i] * (*mask)[i];
  if (tape_on({&a})) {
    Tape::active()->record("dropout", {a}, out, [a, out, mask, n]() {
      if (!a.requires_grad()) return;
      auto& ga = Tensor(a).grad();
      const auto& go = out.impl()->grad;
      for (int64_t i = 0; i < n; ++i) ga[i] += go[i] * (*mask)[i];
    });
  }
  return out;
}

Tensor mean(const Tensor& a) {
  check_defined(a, "mean");
  const int64_t n = a.numel();
  if (n == 0) fail("mean: empty tensor");
  double s = 0.0;
  for (const double v : a.data()) s += v;
  Tensor out = Tensor::scalar(s / static_cast<double>(n));
  if (tape_on({&a})) {
    Tape::active()->record("mean", {a}, out, [a, out, n]() {
      if (!a.requires_grad()) return;
      auto& ga = Tensor(a).grad();
      const double g = out.impl()->grad[0] / static_cast<double>(n);
      for (int64_t i = 0; i < n; ++i) ga[i] += g;
    });
  }
  return out;
}

Tensor mse(const Tensor& pred, const Tensor& target) {
  check_defined(pred, "mse");
  check_defined(target, "mse");
  if (pred.shape() != target.shape()) {
    fail("mse: shape mismatch " + shape_str(pred.shape()) + " vs " +
         shape_str(target.shape()));
  }
  const int64_t n = pred.numel();
  double s = 0.0;
  for (int64_t i = 0; i < n; ++i) {
    const double d = pred.data()[i] - target.data()[i];
    s += d * d;
  }
  Tensor out = Tensor::scalar(s / static_cast<double>(n));
  if (tape_on({&pred, &target})) {
    Tape::active()->record("mse", {pred, target}, out, [pred, target, out, n]() {
      const double g = 2.0 * out.impl()->grad[0] / static_cast<double>(n);
      if (pred.requires_grad()) {
        auto& gp = Tensor(pred).grad();
        for (int64_t i = 0; i < n; ++i) {
          gp[i] += g * (pred.data()[i] - target.data()[i]);
        }
      }
      if (target.requires_grad()) {
        auto& gt = Tensor(target).grad();
        for (int64_t i = 0; i < n; ++i) {
          gt[i] -= g * (pred.data()[i] - target.data()[i]);
        }
      }
    });
  }
  return out;
}

const char* op_name(OpKind kind) {
  switch (kind) {
    case OpKind::kMatmul: return "matmul";
    case OpKind::kAdd: return "add";
    case OpKind::kMul: return "mul";
    case OpKind::kConcat: return "concat";
    case OpKind::kTanh: return "tanh";
    case OpKind::kSigmoid: return "sigmoid";
    case OpKind::kRelu: return "relu";
    case OpKind::kSoftmax: return "softmax";
    case OpKind::kLayerNorm: return "layer_norm";
    case OpKind::kEmbeddingLookup: return "embedding_lookup";
    case OpKind::kDropout: return "dropout";
    case OpKind::kMean: return "mean";
    case OpKind::kMse: return "mse";
  }
  return "?";
}

Tensor forward_op(OpKind kind, const std::vector<Tensor>& inputs,
                  const OpOptions& opts) {
  auto need = [&](size_t n) {
    if (inputs.size() != n) {
      fail(std::string(op_name(kind)) + ": expects " + std::to_string(n) +
           " inputs, got " + std::to_string(inputs.size()));
    }
  };
  switch (kind) {
    case OpKind::kMatmul:
      need(2);
      return matmul(inputs[0], inputs[1]);
    case OpKind::kAdd:
      need(2);
      return add(inputs[0], inputs[1]);
    case OpKind::kMul:
      need(2);
      return mul(inputs[0], inputs[1]);
    case OpKind::kConcat:
      return concat(inputs);
    case OpKind::kTanh:
      need(1);
      return tanh(inputs[0]);
    case OpKind::kSigmoid:
      need(1);
      return sigmoid(inputs[0]);
    case OpKind::kRelu:
      need(1);
      return relu(inputs[0]);
    case OpKind::kSoftmax:
      need(1);
      return softmax(inputs[0]);
    case OpKind::kLayerNorm:
      need(1);
      return layer_norm(inputs[0], opts.eps);
    case OpKind::kEmbeddingLookup: {
      need(1);
      if (opts.ids == nullptr) fail("embedding_lookup: ids required");
      return embedding_lookup(inputs[0], *opts.ids);
    }
    case OpKind::kDropout: {
      need(1);
      if (opts.rng == nullptr) fail("dropout: rng required");
      return dropout(inputs[0], opts.keep_prob, opts.train, *opts.rng);
    }
    case OpKind::kMean:
      need(1);
      return mean(inputs[0]);
    case OpKind::kMse:
      need(2);
      return mse(inputs[0], inputs[1]);
  }
  fail("forward_op: unknown kind");
}

}  // namespace rdforge::ad
