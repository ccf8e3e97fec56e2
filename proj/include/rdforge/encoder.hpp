#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "rdforge/rng.hpp"
#include "rdforge/tensor.hpp"
#include "rdforge/tokenizer.hpp"

namespace rdforge {

enum class EncoderKind { kRnn, kLstm, kBiRnn, kElmo, kTransformer };

const char* encoder_kind_name(EncoderKind kind);
EncoderKind encoder_kind_from_name(const std::string& name);

struct EncoderConfig {
  EncoderKind kind = EncoderKind::kElmo;
  int num_layers = 4;
  int hidden_size = 256;
  int input_size = 256;
  double dropout = 0.3;  // drop probability, applied only in train mode
  int num_heads = 4;     // transformer
  std::optional<int> residual_cut_layer;  // transformer block with no skips
  bool alt = false;  // language token prepended in front of [CLS]
  int vocab_size = 0;
  int max_len = 64;

  // Human-readable constraint violations; empty when the config is sound.
  std::vector<std::string> problems() const;
  void validate() const;  // throws listing every violation
};

struct TaskHead {
  std::string name;  // one of sgns/char/electra in practice
  int dim = 0;
  friend bool operator==(const TaskHead&, const TaskHead&) = default;
};

enum class Direction { kFwd, kBwd };

// One recurrent layer over a sequence of 1 x in rows. h_t = tanh(x_t W_ih +
// h_{t-1} W_hh + b); kBwd processes the reversed sequence and re-reverses
// its output, so output[t] still lines up with inputs[t].
std::vector<ad::Tensor> rnn_layer(const std::vector<ad::Tensor>& inputs,
                                  const ad::Tensor& w_ih,
                                  const ad::Tensor& w_hh, const ad::Tensor& b,
                                  Direction dir);

// Standard 4-gate LSTM layer; gate order in the width-4H projections is
// input, forget, cell, output.
std::vector<ad::Tensor> lstm_layer(const std::vector<ad::Tensor>& inputs,
                                   const ad::Tensor& w_ih,
                                   const ad::Tensor& w_hh, const ad::Tensor& b,
                                   Direction dir);

// A gloss encoder plus its task heads and the tokenizer it was trained with.
// Parameters live in a name-sorted map; Tensor handles share storage, so the
// optimizer and the graph see one accumulation target per parameter.
//
// Architecture notes, fixed across the zoo:
//  - The pooled gloss vector is always the final representation at position 0
//    (the [CLS] slot, or the [LANG] slot when language tags are in front).
//  - Unidirectional RNN/LSTM stacks scan right-to-left so that the pooled
//    position-0 state has consumed the whole gloss.
//  - BiRNN and the ELMo-style encoder run two independent per-direction
//    stacks of hidden_size/2 each; positions are joined by concatenation.
//  - The ELMo-style mix is gamma * sum_l softmax(s)_l * h_l over all layers
//    including the embedding layer.
//  - The transformer is pre-norm with learned positional embeddings; the
//    residual-cut block omits both of its skip connections.
//  - Dropout: recurrent kinds drop each layer's input rows; the transformer
//    drops the embedded input and each sublayer output before its join.
class Model {
 public:
  Model() = default;
  Model(EncoderConfig config, std::vector<TaskHead> tasks,
        TokenizerModel tokenizer, uint64_t init_seed);

  // Pooled gloss representation (1 x hidden). Trailing [PAD] ids are
  // trimmed first, so padded and unpadded inputs encode identically;
  // sequences beyond max_len are truncated keeping the front. An rng is
  // required only when train is set and dropout > 0.
  ad::Tensor encode_gloss(std::span<const int> ids, bool train = false,
                          Rng* rng = nullptr) const;

  // Task head output (1 x head dim) for a pooled gloss vector.
  ad::Tensor head_output(const std::string& task,
                         const ad::Tensor& gloss_vec) const;

  const ad::Tensor& param(const std::string& name) const;
  std::vector<ad::Tensor> parameters() const;  // name-sorted
  int64_t param_count() const;
  bool all_finite() const;

  EncoderConfig config;
  std::vector<TaskHead> tasks;
  TokenizerModel tokenizer;
  std::map<std::string, ad::Tensor> params;
};

// Parameter count of the recurrent core alone: num_layers blocks of
// 2H^2 + H per direction, input width taken equal to the hidden width.
// Embeddings, input projections and heads are excluded — this is the
// quantity a BiRNN and a plain RNN can actually be matched on.
int64_t recurrent_core_params(int hidden, int num_layers, bool bidirectional);

// Unidirectional hidden size whose core count best matches a BiRNN of the
// given hidden size; at practical widths the two counts agree within 1%.
int parity_rnn_hidden(int birnn_hidden, int num_layers);

}  // namespace rdforge
