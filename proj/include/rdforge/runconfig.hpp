#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "rdforge/encoder.hpp"
#include "rdforge/tokenizer.hpp"
#include "rdforge/trainer.hpp"

namespace rdforge {

// One JSON file drives a whole run. Parsing is strict (unknown keys and
// wrong types are errors) and validation reports every violation at once,
// so an operator fixes a config in one round trip.
//
//   {
//     "encoder":   {"kind": "elmo", "num_layers": 4, ...},
//     "tokenizer": {"kind": "wordpiece", "path": "tok.json"},
//     "tasks":     [{"name": "sgns", "dim": 300}, ...],
//     "dwa":       {"enabled": true, "temperature": 2.0},
//     "tricks":    {"alt": false, "rc": false, "rc_layer": 0},
//     "optimizer": {"lr": 1e-3, "batch_size": 64, "epochs": 50,
//                   "patience": 5, "clip_norm": 5.0, "weight_decay": 0.0},
//     "seed": 0,
//     "paths":     {"train": "...", "dev": "...", "out_dir": "..."}
//   }
//
// The modelling tricks live under "tricks", not inside "encoder": the
// encoder section describes the architecture, the tricks section what is
// layered on top, and the two are folded together after parsing. An
// encoder vocab_size of 0 means "take it from the tokenizer".

struct DwaConfig {
  bool enabled = true;
  double temperature = 2.0;
};

struct TricksConfig {
  bool alt = false;
  bool rc = false;
  std::optional<int> rc_layer;  // required with rc, rejected without
};

struct OptimizerConfig {
  double lr = 1e-3;
  int batch_size = 64;
  int epochs = 50;
  int patience = 5;
  double clip_norm = 5.0;
  double weight_decay = 0.0;
};

struct PathsConfig {
  std::string train;
  std::string dev;
  std::string out_dir;
};

struct RunConfig {
  EncoderConfig encoder;  // carries the folded-in tricks after parsing
  TokenizerKind tokenizer_kind = TokenizerKind::kWordPiece;
  std::string tokenizer_path;
  std::vector<TaskHead> tasks = {};
  DwaConfig dwa;
  TricksConfig tricks;
  OptimizerConfig optimizer;
  uint64_t seed = 0;
  PathsConfig paths;

  // Everything wrong with the config, one message per violation; empty when
  // the config is usable. Path presence is checked per command, not here.
  std::vector<std::string> problems() const;

  // problems() joined into one error, or no-op when valid.
  void validate() const;

  TrainOptions train_options() const;

  // The resolved form: every field explicit, defaults filled in. Feeding it
  // back through from_json reproduces this config exactly.
  nlohmann::json to_json() const;

  // Strict parse; throws listing every violation it can see.
  static RunConfig from_json(const nlohmann::json& j);
  static RunConfig load(const std::string& path);
};

}  // namespace rdforge
