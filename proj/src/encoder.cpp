#include "rdforge/encoder.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>
#include <stdexcept>

namespace rdforge {

using ad::Tensor;

const char* encoder_kind_name(EncoderKind kind) {
  switch (kind) {
    case EncoderKind::kRnn: return "rnn";
    case EncoderKind::kLstm: return "lstm";
    case EncoderKind::kBiRnn: return "birnn";
    case EncoderKind::kElmo: return "elmo";
    case EncoderKind::kTransformer: return "transformer";
  }
  return "?";
}

EncoderKind encoder_kind_from_name(const std::string& name) {
  if (name == "rnn") return EncoderKind::kRnn;
  if (name == "lstm") return EncoderKind::kLstm;
  if (name == "birnn") return EncoderKind::kBiRnn;
  if (name == "elmo") return EncoderKind::kElmo;
  if (name == "transformer") return EncoderKind::kTransformer;
  throw std::runtime_error("encoder: unknown kind \"" + name + "\"");
}

std::vector<std::string> EncoderConfig::problems() const {
  std::vector<std::string> out;
  if (num_layers < 1) out.push_back("num_layers must be >= 1");
  if (hidden_size < 1) out.push_back("hidden_size must be >= 1");
  if (input_size < 1) out.push_back("input_size must be >= 1");
  if (!(dropout >= 0.0 && dropout < 1.0)) {
    out.push_back("dropout must be in [0,1)");
  }
  if (vocab_size < 5) {
    out.push_back("vocab_size must cover the reserved ids and an alphabet");
  }
  if (max_len < 1) out.push_back("max_len must be >= 1");

  const bool bidirectional =
      kind == EncoderKind::kBiRnn || kind == EncoderKind::kElmo;
  if (bidirectional && hidden_size % 2 != 0) {
    out.push_back("hidden_size must be even for bidirectional kinds");
  }
  if (kind == EncoderKind::kElmo && input_size != hidden_size) {
    out.push_back(
        "elmo needs input_size == hidden_size (the scalar mix includes the "
        "embedding layer)");
  }
  if (kind == EncoderKind::kTransformer) {
    if (num_heads < 1) {
      out.push_back("num_heads must be >= 1");
    } else if (hidden_size % num_heads != 0) {
      out.push_back("hidden_size " + std::to_string(hidden_size) +
                    " is not divisible by num_heads " +
                    std::to_string(num_heads));
    }
    if (input_size != hidden_size) {
      out.push_back("transformer needs input_size == hidden_size");
    }
  }
  if (residual_cut_layer) {
    if (kind != EncoderKind::kTransformer) {
      out.push_back("residual_cut_layer applies only to the transformer");
    } else if (*residual_cut_layer < 0 ||
               *residual_cut_layer >= num_layers) {
      out.push_back("residual_cut_layer " +
                    std::to_string(*residual_cut_layer) +
                    " outside [0," + std::to_string(num_layers) + ")");
    }
  }
  return out;
}

void EncoderConfig::validate() const {
  const auto out = problems();
  if (out.empty()) return;
  std::string msg = "encoder config:";
  for (const auto& p : out) msg += " " + p + ";";
  msg.pop_back();
  throw std::runtime_error(msg);
}

// ---------------------------------------------------------------------------
// Recurrent layers.

std::vector<Tensor> rnn_layer(const std::vector<Tensor>& inputs,
                              const Tensor& w_ih, const Tensor& w_hh,
                              const Tensor& b, Direction dir) {
  const int64_t hidden = w_hh.rows();
  Tensor h = Tensor::zeros({1, hidden});
  std::vector<Tensor> out(inputs.size());
  const int64_t n = static_cast<int64_t>(inputs.size());
  for (int64_t step = 0; step < n; ++step) {
    const int64_t t = dir == Direction::kFwd ? step : n - 1 - step;
    h = ad::tanh(ad::add(
        ad::add(ad::matmul(inputs[t], w_ih), ad::matmul(h, w_hh)), b));
    out[t] = h;
  }
  return out;
}

std::vector<Tensor> lstm_layer(const std::vector<Tensor>& inputs,
                               const Tensor& w_ih, const Tensor& w_hh,
                               const Tensor& b, Direction dir) {
  const int64_t hidden = w_hh.rows();
  Tensor h = Tensor::zeros({1, hidden});
  Tensor c = Tensor::zeros({1, hidden});
  std::vector<Tensor> out(inputs.size());
  const int64_t n = static_cast<int64_t>(inputs.size());
  for (int64_t step = 0; step < n; ++step) {
    const int64_t t = dir == Direction::kFwd ? step : n - 1 - step;
    Tensor z = ad::add(
        ad::add(ad::matmul(inputs[t], w_ih), ad::matmul(h, w_hh)), b);
    Tensor i = ad::sigmoid(ad::slice_cols(z, 0, hidden));
    Tensor f = ad::sigmoid(ad::slice_cols(z, hidden, hidden));
    Tensor g = ad::tanh(ad::slice_cols(z, 2 * hidden, hidden));
    Tensor o = ad::sigmoid(ad::slice_cols(z, 3 * hidden, hidden));
    c = ad::add(ad::mul(f, c), ad::mul(i, g));
    h = ad::mul(o, ad::tanh(c));
    out[t] = h;
  }
  return out;
}

// ---------------------------------------------------------------------------
// Model construction.

namespace {

Tensor init_uniform(const std::string& name, ad::Shape shape, uint64_t seed) {
  Tensor t = Tensor::zeros(std::move(shape), true);
  const double bound = std::sqrt(1.0 / static_cast<double>(t.shape()[0]));
  Rng rng(Rng::derive(seed, "init:" + name));
  for (double& v : t.data()) v = rng.uniform(-bound, bound);
  return t;
}

Tensor init_normal(const std::string& name, ad::Shape shape, double stddev,
                   uint64_t seed) {
  Tensor t = Tensor::zeros(std::move(shape), true);
  Rng rng(Rng::derive(seed, "init:" + name));
  for (double& v : t.data()) v = rng.normal(0.0, stddev);
  return t;
}

std::string dir_name(Direction d) {
  return d == Direction::kFwd ? "fwd" : "bwd";
}

}  // namespace

Model::Model(EncoderConfig config_in, std::vector<TaskHead> tasks_in,
             TokenizerModel tokenizer_in, uint64_t init_seed)
    : config(std::move(config_in)),
      tasks(std::move(tasks_in)),
      tokenizer(std::move(tokenizer_in)) {
  config.validate();
  for (const TaskHead& t : tasks) {
    if (t.name.empty() || t.dim < 1) {
      throw std::runtime_error("model: task heads need a name and a dim");
    }
  }

  auto uniform = [&](const std::string& name, ad::Shape shape) {
    params.emplace(name, init_uniform(name, std::move(shape), init_seed));
  };
  auto zeros = [&](const std::string& name, ad::Shape shape) {
    params.emplace(name, Tensor::zeros(std::move(shape), true));
  };

  const int H = config.hidden_size;
  const int L = config.num_layers;
  params.emplace("embed.tok",
                 init_normal("embed.tok",
                             {config.vocab_size, config.input_size}, 0.02,
                             init_seed));

  auto lstm_bias = [&](const std::string& name, int h) {
    Tensor b = Tensor::zeros({4 * h}, true);
    for (int k = h; k < 2 * h; ++k) b.data()[k] = 1.0;  // forget gate opens
    params.emplace(name, std::move(b));
  };

  switch (config.kind) {
    case EncoderKind::kRnn:
      for (int l = 0; l < L; ++l) {
        const int in = l == 0 ? config.input_size : H;
        const std::string p = "rnn.l" + std::to_string(l) + ".";
        uniform(p + "w_ih", {in, H});
        uniform(p + "w_hh", {H, H});
        zeros(p + "b", {H});
      }
      break;
    case EncoderKind::kLstm:
      for (int l = 0; l < L; ++l) {
        const int in = l == 0 ? config.input_size : H;
        const std::string p = "lstm.l" + std::to_string(l) + ".";
        uniform(p + "w_ih", {in, 4 * H});
        uniform(p + "w_hh", {H, 4 * H});
        lstm_bias(p + "b", H);
      }
      break;
    case EncoderKind::kBiRnn:
      for (const Direction d : {Direction::kFwd, Direction::kBwd}) {
        for (int l = 0; l < L; ++l) {
          const int h2 = H / 2;
          const int in = l == 0 ? config.input_size : h2;
          const std::string p =
              "rnn.l" + std::to_string(l) + "." + dir_name(d) + ".";
          uniform(p + "w_ih", {in, h2});
          uniform(p + "w_hh", {h2, h2});
          zeros(p + "b", {h2});
        }
      }
      break;
    case EncoderKind::kElmo:
      for (const Direction d : {Direction::kFwd, Direction::kBwd}) {
        for (int l = 0; l < L; ++l) {
          const int h2 = H / 2;
          const int in = l == 0 ? config.input_size : h2;
          const std::string p =
              "lstm.l" + std::to_string(l) + "." + dir_name(d) + ".";
          uniform(p + "w_ih", {in, 4 * h2});
          uniform(p + "w_hh", {h2, 4 * h2});
          lstm_bias(p + "b", h2);
        }
      }
      zeros("elmo.mix.s", {L + 1});
      params.emplace("elmo.mix.gamma", Tensor::full({1}, 1.0, true));
      break;
    case EncoderKind::kTransformer:
      params.emplace("embed.pos",
                     init_normal("embed.pos", {config.max_len, H}, 0.02,
                                 init_seed));
      for (int l = 0; l < L; ++l) {
        const std::string p = "tf.l" + std::to_string(l) + ".";
        for (const char* w : {"wq", "wk", "wv", "wo"}) uniform(p + w, {H, H});
        for (const char* bn : {"bq", "bk", "bv", "bo"}) zeros(p + bn, {H});
        uniform(p + "ff1.w", {H, 4 * H});
        zeros(p + "ff1.b", {4 * H});
        uniform(p + "ff2.w", {4 * H, H});
        zeros(p + "ff2.b", {H});
      }
      break;
  }

  for (const TaskHead& t : tasks) {
    uniform("head." + t.name + ".w", {H, t.dim});
    zeros("head." + t.name + ".b", {t.dim});
  }
}

const Tensor& Model::param(const std::string& name) const {
  auto it = params.find(name);
  if (it == params.end()) {
    throw std::runtime_error("model: unknown parameter \"" + name + "\"");
  }
  return it->second;
}

std::vector<Tensor> Model::parameters() const {
  std::vector<Tensor> out;
  out.reserve(params.size());
  for (const auto& [name, t] : params) out.push_back(t);
  return out;
}

int64_t Model::param_count() const {
  int64_t n = 0;
  for (const auto& [name, t] : params) n += t.numel();
  return n;
}

bool Model::all_finite() const {
  for (const auto& [name, t] : params) {
    if (!t.all_finite()) return false;
  }
  return true;
}

// ---------------------------------------------------------------------------
// Forward pass.

namespace {

std::vector<Tensor> split_rows(const Tensor& m) {
  std::vector<Tensor> rows;
  rows.reserve(m.rows());
  for (int64_t t = 0; t < m.rows(); ++t) rows.push_back(ad::slice_rows(m, t, 1));
  return rows;
}

}  // namespace

ad::Tensor Model::encode_gloss(std::span<const int> ids, bool train,
                               Rng* rng) const {
  size_t n = ids.size();
  while (n > 0 && ids[n - 1] == Vocabulary::kPad) --n;  // trailing padding
  if (n == 0) {
    throw std::runtime_error("encode_gloss: empty token sequence");
  }
  if (n > static_cast<size_t>(config.max_len)) {
    n = static_cast<size_t>(config.max_len);  // keep the front, position 0
  }
  const std::span<const int> seq = ids.subspan(0, n);

  const bool dropping = train && config.dropout > 0.0;
  if (dropping && rng == nullptr) {
    throw std::runtime_error(
        "encode_gloss: train mode with dropout needs an rng");
  }
  const double keep = 1.0 - config.dropout;
  auto drop = [&](Tensor x) {
    return dropping ? ad::dropout(x, keep, true, *rng) : x;
  };
  auto drop_rows = [&](std::vector<Tensor>& rows) {
    if (!dropping) return;
    for (Tensor& r : rows) r = ad::dropout(r, keep, true, *rng);
  };

  Tensor emb = ad::embedding_lookup(param("embed.tok"), seq);

  switch (config.kind) {
    case EncoderKind::kRnn: {
      // Scans right-to-left: the pooled position-0 state covers the gloss.
      auto rows = split_rows(emb);
      for (int l = 0; l < config.num_layers; ++l) {
        drop_rows(rows);
        const std::string p = "rnn.l" + std::to_string(l) + ".";
        rows = rnn_layer(rows, param(p + "w_ih"), param(p + "w_hh"),
                         param(p + "b"), Direction::kBwd);
      }
      return rows[0];
    }
    case EncoderKind::kLstm: {
      auto rows = split_rows(emb);
      for (int l = 0; l < config.num_layers; ++l) {
        drop_rows(rows);
        const std::string p = "lstm.l" + std::to_string(l) + ".";
        rows = lstm_layer(rows, param(p + "w_ih"), param(p + "w_hh"),
                          param(p + "b"), Direction::kBwd);
      }
      return rows[0];
    }
    case EncoderKind::kBiRnn: {
      auto base = split_rows(emb);
      drop_rows(base);  // the shared layer-1 input
      std::vector<Tensor> pooled_halves;
      for (const Direction d : {Direction::kFwd, Direction::kBwd}) {
        auto rows = base;
        for (int l = 0; l < config.num_layers; ++l) {
          if (l > 0) drop_rows(rows);
          const std::string p =
              "rnn.l" + std::to_string(l) + "." + dir_name(d) + ".";
          rows = rnn_layer(rows, param(p + "w_ih"), param(p + "w_hh"),
                           param(p + "b"), d);
        }
        pooled_halves.push_back(rows[0]);
      }
      return ad::concat(pooled_halves);
    }
    case EncoderKind::kElmo: {
      auto base = split_rows(emb);
      drop_rows(base);
      // Position-0 state of every layer, embedding first.
      std::vector<Tensor> at0 = {base[0]};
      std::vector<std::vector<Tensor>> halves_at0(config.num_layers);
      for (const Direction d : {Direction::kFwd, Direction::kBwd}) {
        auto rows = base;
        for (int l = 0; l < config.num_layers; ++l) {
          if (l > 0) drop_rows(rows);
          const std::string p =
              "lstm.l" + std::to_string(l) + "." + dir_name(d) + ".";
          rows = lstm_layer(rows, param(p + "w_ih"), param(p + "w_hh"),
                            param(p + "b"), d);
          halves_at0[l].push_back(rows[0]);
        }
      }
      for (int l = 0; l < config.num_layers; ++l) {
        at0.push_back(ad::concat(halves_at0[l]));
      }
      const Tensor w = ad::softmax(param("elmo.mix.s"));
      Tensor mixed;
      for (size_t l = 0; l < at0.size(); ++l) {
        Tensor part =
            ad::mul(at0[l], ad::slice_cols(w, static_cast<int64_t>(l), 1));
        mixed = l == 0 ? part : ad::add(mixed, part);
      }
      return ad::mul(mixed, param("elmo.mix.gamma"));
    }
    case EncoderKind::kTransformer: {
      const int64_t T = static_cast<int64_t>(seq.size());
      const int H = config.hidden_size;
      const int dh = H / config.num_heads;
      Tensor x = ad::add(emb, ad::slice_rows(param("embed.pos"), 0, T));
      x = drop(x);
      for (int l = 0; l < config.num_layers; ++l) {
        const bool cut =
            config.residual_cut_layer && *config.residual_cut_layer == l;
        const std::string p = "tf.l" + std::to_string(l) + ".";

        Tensor norm = ad::layer_norm(x);
        Tensor q = ad::add(ad::matmul(norm, param(p + "wq")), param(p + "bq"));
        Tensor k = ad::add(ad::matmul(norm, param(p + "wk")), param(p + "bk"));
        Tensor v = ad::add(ad::matmul(norm, param(p + "wv")), param(p + "bv"));
        std::vector<Tensor> heads;
        for (int h = 0; h < config.num_heads; ++h) {
          Tensor qh = ad::slice_cols(q, h * dh, dh);
          Tensor kh = ad::slice_cols(k, h * dh, dh);
          Tensor vh = ad::slice_cols(v, h * dh, dh);
          Tensor scores = ad::scale(ad::matmul(qh, ad::transpose(kh)),
                                    1.0 / std::sqrt(static_cast<double>(dh)));
          heads.push_back(ad::matmul(ad::softmax(scores), vh));
        }
        Tensor attn = ad::add(ad::matmul(ad::concat(heads), param(p + "wo")),
                              param(p + "bo"));
        attn = drop(attn);
        x = cut ? attn : ad::add(x, attn);

        Tensor norm2 = ad::layer_norm(x);
        Tensor ff = ad::add(
            ad::matmul(
                ad::relu(ad::add(ad::matmul(norm2, param(p + "ff1.w")),
                                 param(p + "ff1.b"))),
                param(p + "ff2.w")),
            param(p + "ff2.b"));
        ff = drop(ff);
        x = cut ? ff : ad::add(x, ff);
      }
      x = ad::layer_norm(x);
      return ad::slice_rows(x, 0, 1);
    }
  }
  throw std::logic_error("encode_gloss: unhandled kind");
}

ad::Tensor Model::head_output(const std::string& task,
                              const ad::Tensor& gloss_vec) const {
  return ad::add(ad::matmul(gloss_vec, param("head." + task + ".w")),
                 param("head." + task + ".b"));
}

// ---------------------------------------------------------------------------
// Parameter parity.

int64_t recurrent_core_params(int hidden, int num_layers, bool bidirectional) {
  if (bidirectional) {
    const int64_t h2 = hidden / 2;
    return 2 * num_layers * (2 * h2 * h2 + h2);
  }
  const int64_t h = hidden;
  return num_layers * (2 * h * h + h);
}

int parity_rnn_hidden(int birnn_hidden, int num_layers) {
  const auto core = recurrent_core_params(birnn_hidden, num_layers, true);
  const double per_layer =
      static_cast<double>(core) / static_cast<double>(num_layers);
  // Solve 2H^2 + H = per_layer for H.
  const double h = (-1.0 + std::sqrt(1.0 + 8.0 * per_layer)) / 4.0;
  return static_cast<int>(std::lround(h));
}

}  // namespace rdforge
