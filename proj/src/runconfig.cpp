#include "rdforge/config_json.hpp"

#include <cmath>
#include <fstream>
#include <sstream>
#include <stdexcept>

#include "rdforge/runconfig.hpp"

namespace rdforge {

namespace {

void reject_unknown_keys(const nlohmann::json& j,
                         std::initializer_list<const char*> allowed,
                         const char* where) {
  for (const auto& [key, value] : j.items()) {
    bool ok = false;
    for (const char* a : allowed) {
      if (key == a) {
        ok = true;
        break;
      }
    }
    if (!ok) {
      throw std::runtime_error(std::string(where) + ": unknown key \"" + key +
                               "\"");
    }
  }
}

int require_int(const nlohmann::json& j, const char* key, int fallback,
                const char* where) {
  if (!j.contains(key)) return fallback;
  const auto& v = j.at(key);
  if (!v.is_number_integer()) {
    throw std::runtime_error(std::string(where) + ": " + key +
                             " must be an integer");
  }
  return v.get<int>();
}

}  // namespace

nlohmann::json encoder_config_to_json(const EncoderConfig& c) {
  nlohmann::json j;
  j["kind"] = encoder_kind_name(c.kind);
  j["num_layers"] = c.num_layers;
  j["hidden_size"] = c.hidden_size;
  j["input_size"] = c.input_size;
  j["dropout"] = c.dropout;
  j["num_heads"] = c.num_heads;
  if (c.residual_cut_layer) {
    j["residual_cut_layer"] = *c.residual_cut_layer;
  } else {
    j["residual_cut_layer"] = nullptr;
  }
  j["alt"] = c.alt;
  j["vocab_size"] = c.vocab_size;
  j["max_len"] = c.max_len;
  return j;
}

EncoderConfig encoder_config_from_json(const nlohmann::json& j) {
  const char* where = "encoder config";
  if (!j.is_object()) {
    throw std::runtime_error(std::string(where) + ": expected an object");
  }
  reject_unknown_keys(j,
                      {"kind", "num_layers", "hidden_size", "input_size",
                       "dropout", "num_heads", "residual_cut_layer", "alt",
                       "vocab_size", "max_len"},
                      where);
  if (!j.contains("kind") || !j.at("kind").is_string()) {
    throw std::runtime_error(std::string(where) +
                             ": kind must be a string naming the encoder");
  }
  EncoderConfig c;
  c.kind = encoder_kind_from_name(j.at("kind").get<std::string>());
  c.num_layers = require_int(j, "num_layers", c.num_layers, where);
  c.hidden_size = require_int(j, "hidden_size", c.hidden_size, where);
  c.input_size = require_int(j, "input_size", c.input_size, where);
  c.num_heads = require_int(j, "num_heads", c.num_heads, where);
  c.vocab_size = require_int(j, "vocab_size", c.vocab_size, where);
  c.max_len = require_int(j, "max_len", c.max_len, where);
  if (j.contains("dropout")) {
    if (!j.at("dropout").is_number()) {
      throw std::runtime_error(std::string(where) +
                               ": dropout must be a number");
    }
    c.dropout = j.at("dropout").get<double>();
  }
  if (j.contains("residual_cut_layer") &&
      !j.at("residual_cut_layer").is_null()) {
    const auto& v = j.at("residual_cut_layer");
    if (!v.is_number_integer()) {
      throw std::runtime_error(
          std::string(where) +
          ": residual_cut_layer must be an integer or null");
    }
    c.residual_cut_layer = v.get<int>();
  }
  if (j.contains("alt")) {
    if (!j.at("alt").is_boolean()) {
      throw std::runtime_error(std::string(where) + ": alt must be a boolean");
    }
    c.alt = j.at("alt").get<bool>();
  }
  return c;
}

nlohmann::json task_heads_to_json(const std::vector<TaskHead>& tasks) {
  nlohmann::json arr = nlohmann::json::array();
  for (const TaskHead& t : tasks) {
    arr.push_back({{"dim", t.dim}, {"name", t.name}});
  }
  return arr;
}

std::vector<TaskHead> task_heads_from_json(const nlohmann::json& j) {
  const char* where = "task heads";
  if (!j.is_array()) {
    throw std::runtime_error(std::string(where) + ": expected an array");
  }
  std::vector<TaskHead> out;
  for (const auto& item : j) {
    if (!item.is_object()) {
      throw std::runtime_error(std::string(where) +
                               ": each entry must be an object");
    }
    reject_unknown_keys(item, {"dim", "name"}, where);
    if (!item.contains("name") || !item.at("name").is_string() ||
        item.at("name").get<std::string>().empty()) {
      throw std::runtime_error(std::string(where) +
                               ": each entry needs a nonempty name");
    }
    TaskHead t;
    t.name = item.at("name").get<std::string>();
    t.dim = require_int(item, "dim", 0, where);
    if (t.dim < 1) {
      throw std::runtime_error(std::string(where) + ": " + t.name +
                               " needs a positive dim");
    }
    for (const TaskHead& seen : out) {
      if (seen.name == t.name) {
        throw std::runtime_error(std::string(where) + ": duplicate task \"" +
                                 t.name + "\"");
      }
    }
    out.push_back(std::move(t));
  }
  return out;
}

// ---------------------------------------------------------------------------
// Run config.

namespace {

double require_double(const nlohmann::json& j, const char* key,
                      double fallback, const char* where) {
  if (!j.contains(key)) return fallback;
  const auto& v = j.at(key);
  if (!v.is_number()) {
    throw std::runtime_error(std::string(where) + ": " + key +
                             " must be a number");
  }
  return v.get<double>();
}

bool require_bool(const nlohmann::json& j, const char* key, bool fallback,
                  const char* where) {
  if (!j.contains(key)) return fallback;
  const auto& v = j.at(key);
  if (!v.is_boolean()) {
    throw std::runtime_error(std::string(where) + ": " + key +
                             " must be a boolean");
  }
  return v.get<bool>();
}

std::string require_string(const nlohmann::json& j, const char* key,
                           std::string fallback, const char* where) {
  if (!j.contains(key)) return fallback;
  const auto& v = j.at(key);
  if (!v.is_string()) {
    throw std::runtime_error(std::string(where) + ": " + key +
                             " must be a string");
  }
  return v.get<std::string>();
}

}  // namespace

std::vector<std::string> RunConfig::problems() const {
  std::vector<std::string> out;

  // vocab_size 0 means "from the tokenizer", so probe with a stand-in.
  EncoderConfig probe = encoder;
  if (probe.vocab_size == 0) probe.vocab_size = 5;
  for (std::string& p : probe.problems()) {
    out.push_back("encoder: " + std::move(p));
  }

  if (tasks.empty()) {
    out.push_back("tasks: at least one task is required");
  }
  for (const TaskHead& t : tasks) {
    bool known = false;
    for (const char* name : kTaskNames) known = known || t.name == name;
    if (!known) {
      out.push_back("tasks: unknown task \"" + t.name +
                    "\" (expected sgns, char or electra)");
    }
  }

  if (!(dwa.temperature > 0.0) || !std::isfinite(dwa.temperature)) {
    out.push_back("dwa: temperature must be positive and finite");
  }

  if (tricks.rc && !tricks.rc_layer) {
    out.push_back("tricks: rc is on but rc_layer is missing");
  }
  if (!tricks.rc && tricks.rc_layer) {
    out.push_back("tricks: rc_layer is set but rc is off");
  }

  if (!(optimizer.lr > 0.0) || !std::isfinite(optimizer.lr)) {
    out.push_back("optimizer: lr must be positive and finite");
  }
  if (optimizer.batch_size < 1) {
    out.push_back("optimizer: batch_size must be >= 1");
  }
  if (optimizer.epochs < 1) {
    out.push_back("optimizer: epochs must be >= 1");
  }
  if (optimizer.patience < 0) {
    out.push_back("optimizer: patience must be >= 0");
  }
  if (std::isnan(optimizer.clip_norm) || std::isinf(optimizer.clip_norm)) {
    out.push_back("optimizer: clip_norm must be finite");
  }
  if (!(optimizer.weight_decay >= 0.0) ||
      !std::isfinite(optimizer.weight_decay)) {
    out.push_back("optimizer: weight_decay must be >= 0 and finite");
  }
  return out;
}

void RunConfig::validate() const {
  const std::vector<std::string> errs = problems();
  if (errs.empty()) return;
  std::string msg = "config invalid:";
  for (const std::string& e : errs) msg += "\n  - " + e;
  throw std::runtime_error(msg);
}

TrainOptions RunConfig::train_options() const {
  TrainOptions o;
  o.lr = optimizer.lr;
  o.batch_size = optimizer.batch_size;
  o.epochs = optimizer.epochs;
  o.patience = optimizer.patience;
  o.clip_norm = optimizer.clip_norm;
  o.weight_decay = optimizer.weight_decay;
  o.dwa = dwa.enabled;
  o.dwa_temperature = dwa.temperature;
  o.seed = seed;
  return o;
}

nlohmann::json RunConfig::to_json() const {
  nlohmann::json enc = encoder_config_to_json(encoder);
  enc.erase("alt");                 // lives under tricks
  enc.erase("residual_cut_layer");  // same

  nlohmann::json j;
  j["encoder"] = std::move(enc);
  j["tokenizer"] = {{"kind", tokenizer_kind_name(tokenizer_kind)},
                    {"path", tokenizer_path}};
  j["tasks"] = task_heads_to_json(tasks);
  j["dwa"] = {{"enabled", dwa.enabled}, {"temperature", dwa.temperature}};
  j["tricks"] = {{"alt", tricks.alt},
                 {"rc", tricks.rc},
                 {"rc_layer", tricks.rc_layer
                                  ? nlohmann::json(*tricks.rc_layer)
                                  : nlohmann::json(nullptr)}};
  j["optimizer"] = {{"lr", optimizer.lr},
                    {"batch_size", optimizer.batch_size},
                    {"epochs", optimizer.epochs},
                    {"patience", optimizer.patience},
                    {"clip_norm", optimizer.clip_norm},
                    {"weight_decay", optimizer.weight_decay}};
  j["seed"] = seed;
  j["paths"] = {{"train", paths.train},
                {"dev", paths.dev},
                {"out_dir", paths.out_dir}};
  return j;
}

RunConfig RunConfig::from_json(const nlohmann::json& j) {
  if (!j.is_object()) {
    throw std::runtime_error("config: expected a JSON object");
  }
  std::vector<std::string> errs;
  const auto trap = [&errs](auto&& fn) {
    try {
      fn();
    } catch (const std::exception& e) {
      errs.emplace_back(e.what());
    }
  };

  RunConfig c;
  trap([&] {
    reject_unknown_keys(j,
                        {"encoder", "tokenizer", "tasks", "dwa", "tricks",
                         "optimizer", "seed", "paths"},
                        "config");
  });

  trap([&] {
    if (!j.contains("encoder")) {
      throw std::runtime_error("config: encoder section is required");
    }
    const auto& enc = j.at("encoder");
    if (enc.is_object()) {
      if (enc.contains("alt")) {
        throw std::runtime_error(
            "encoder config: alt belongs under tricks, not encoder");
      }
      if (enc.contains("residual_cut_layer")) {
        throw std::runtime_error(
            "encoder config: residual_cut_layer belongs under tricks "
            "(rc, rc_layer), not encoder");
      }
    }
    c.encoder = encoder_config_from_json(enc);
  });

  if (j.contains("tokenizer")) {
    trap([&] {
      const auto& t = j.at("tokenizer");
      if (!t.is_object()) {
        throw std::runtime_error("tokenizer config: expected an object");
      }
      reject_unknown_keys(t, {"kind", "path"}, "tokenizer config");
      c.tokenizer_kind = tokenizer_kind_from_name(require_string(
          t, "kind", tokenizer_kind_name(c.tokenizer_kind), "tokenizer config"));
      c.tokenizer_path = require_string(t, "path", "", "tokenizer config");
    });
  }

  if (j.contains("tasks")) {
    trap([&] { c.tasks = task_heads_from_json(j.at("tasks")); });
  }

  if (j.contains("dwa")) {
    trap([&] {
      const auto& d = j.at("dwa");
      if (!d.is_object()) {
        throw std::runtime_error("dwa config: expected an object");
      }
      reject_unknown_keys(d, {"enabled", "temperature"}, "dwa config");
      c.dwa.enabled = require_bool(d, "enabled", c.dwa.enabled, "dwa config");
      c.dwa.temperature =
          require_double(d, "temperature", c.dwa.temperature, "dwa config");
    });
  }

  if (j.contains("tricks")) {
    trap([&] {
      const auto& t = j.at("tricks");
      if (!t.is_object()) {
        throw std::runtime_error("tricks config: expected an object");
      }
      reject_unknown_keys(t, {"alt", "rc", "rc_layer"}, "tricks config");
      c.tricks.alt = require_bool(t, "alt", false, "tricks config");
      c.tricks.rc = require_bool(t, "rc", false, "tricks config");
      if (t.contains("rc_layer") && !t.at("rc_layer").is_null()) {
        if (!t.at("rc_layer").is_number_integer()) {
          throw std::runtime_error(
              "tricks config: rc_layer must be an integer or null");
        }
        c.tricks.rc_layer = t.at("rc_layer").get<int>();
      }
    });
  }

  if (j.contains("optimizer")) {
    trap([&] {
      const auto& o = j.at("optimizer");
      if (!o.is_object()) {
        throw std::runtime_error("optimizer config: expected an object");
      }
      reject_unknown_keys(o,
                          {"lr", "batch_size", "epochs", "patience",
                           "clip_norm", "weight_decay"},
                          "optimizer config");
      c.optimizer.lr =
          require_double(o, "lr", c.optimizer.lr, "optimizer config");
      c.optimizer.batch_size = require_int(
          o, "batch_size", c.optimizer.batch_size, "optimizer config");
      c.optimizer.epochs =
          require_int(o, "epochs", c.optimizer.epochs, "optimizer config");
      c.optimizer.patience =
          require_int(o, "patience", c.optimizer.patience, "optimizer config");
      c.optimizer.clip_norm = require_double(
          o, "clip_norm", c.optimizer.clip_norm, "optimizer config");
      c.optimizer.weight_decay = require_double(
          o, "weight_decay", c.optimizer.weight_decay, "optimizer config");
    });
  }

  if (j.contains("seed")) {
    trap([&] {
      const auto& s = j.at("seed");
      if (!s.is_number_integer() ||
          (s.is_number_integer() && !s.is_number_unsigned() &&
           s.get<int64_t>() < 0)) {
        throw std::runtime_error("config: seed must be a non-negative integer");
      }
      c.seed = s.get<uint64_t>();
    });
  }

  if (j.contains("paths")) {
    trap([&] {
      const auto& p = j.at("paths");
      if (!p.is_object()) {
        throw std::runtime_error("paths config: expected an object");
      }
      reject_unknown_keys(p, {"train", "dev", "out_dir"}, "paths config");
      c.paths.train = require_string(p, "train", "", "paths config");
      c.paths.dev = require_string(p, "dev", "", "paths config");
      c.paths.out_dir = require_string(p, "out_dir", "", "paths config");
    });
  }

  if (!errs.empty()) {
    std::string msg = "config invalid:";
    for (const std::string& e : errs) msg += "\n  - " + e;
    throw std::runtime_error(msg);
  }

  // The architecture plus whatever tricks ride on top.
  c.encoder.alt = c.tricks.alt;
  if (c.tricks.rc && c.tricks.rc_layer) {
    c.encoder.residual_cut_layer = *c.tricks.rc_layer;
  }
  return c;
}

RunConfig RunConfig::load(const std::string& path) {
  std::ifstream in(path);
  if (!in) {
    throw std::runtime_error("config: cannot read " + path);
  }
  std::stringstream buf;
  buf << in.rdbuf();
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(buf.str());
  } catch (const nlohmann::json::parse_error& e) {
    throw std::runtime_error("config: " + path +
                             " is not valid JSON: " + e.what());
  }
  return from_json(j);
}

}  // namespace rdforge
