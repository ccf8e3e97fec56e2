// Command-line front end: tokenizer training, model training, evaluation,
// prediction, synthetic data and corpus statistics. Every run writes a
// resolved record of what it did next to its artifacts, refuses to
// overwrite existing outputs unless forced, and reports failures as a
// single "error: ..." line with a nonzero exit code.

#include <cstdint>
#include <exception>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include "rdforge/checkpoint.hpp"
#include "rdforge/dataio.hpp"
#include "rdforge/log.hpp"
#include "rdforge/metrics.hpp"
#include "rdforge/multilingual.hpp"
#include "rdforge/runconfig.hpp"
#include "rdforge/synth.hpp"
#include "rdforge/tokenizer.hpp"
#include "rdforge/trainer.hpp"

namespace fs = std::filesystem;
using nlohmann::json;
using namespace rdforge;

namespace {

struct Invocation {
  std::string config_path;
  std::optional<uint64_t> seed;  // --seed, overrides the config
  std::string out_dir;           // --out, overrides paths.out_dir
  bool force = false;
};

// All violations at once, joined for the one-line error contract.
void fail_all(const std::vector<std::string>& problems) {
  std::string msg;
  for (const std::string& p : problems) {
    if (!msg.empty()) msg += "; ";
    msg += p;
  }
  throw std::runtime_error(msg);
}

RunConfig load_config(const Invocation& inv) {
  if (inv.config_path.empty()) {
    throw std::runtime_error("a --config file is required for this command");
  }
  RunConfig cfg = RunConfig::load(inv.config_path);
  if (inv.seed) cfg.seed = *inv.seed;
  if (!inv.out_dir.empty()) cfg.paths.out_dir = inv.out_dir;
  return cfg;
}

// Output discipline: everything lands under out_dir, nothing is replaced
// without --force, and the directory is created on demand.
struct OutDir {
  fs::path dir;
  bool force = false;

  OutDir(const std::string& path, bool force_flag) : force(force_flag) {
    if (path.empty()) {
      throw std::runtime_error(
          "an output directory is required (--out or paths.out_dir)");
    }
    dir = path;
  }

  void reserve(const std::vector<std::string>& names) const {
    std::vector<std::string> clashes;
    for (const std::string& n : names) {
      if (fs::exists(dir / n)) clashes.push_back((dir / n).string());
    }
    if (!clashes.empty() && !force) {
      std::string msg = "refusing to overwrite";
      for (const std::string& c : clashes) msg += " " + c;
      msg += " (use --force)";
      throw std::runtime_error(msg);
    }
    fs::create_directories(dir);
  }

  std::string write(const std::string& name, const std::string& bytes) const {
    const fs::path p = dir / name;
    std::ofstream out(p, std::ios::binary);
    if (!out || !(out << bytes)) {
      throw std::runtime_error("cannot write " + p.string());
    }
    out.close();
    log_debug("wrote " + p.string());
    return p.string();
  }
};

// The reproducibility record beside every artifact: the command, its
// effective inputs, and (when one drove the run) the resolved run config.
void write_record(const OutDir& out, const std::string& command,
                  json params, const RunConfig* cfg) {
  json j;
  j["command"] = command;
  j["params"] = std::move(params);
  j["run_config"] = cfg ? cfg->to_json() : json(nullptr);
  out.write("config.json", j.dump(2) + "\n");
}

std::map<std::string, int> task_dims(const RunConfig& cfg) {
  std::map<std::string, int> dims;
  for (const TaskHead& t : cfg.tasks) dims[t.name] = t.dim;
  return dims;
}

// Tokenizer training corpus: all glosses; languages become reserved tokens
// when the corpus spans more than one.
TokenizerModel train_tokenizer(const RunConfig& cfg,
                               const std::vector<GlossEntry>& entries) {
  if (cfg.encoder.vocab_size < 1) {
    throw std::runtime_error(
        "encoder.vocab_size must be set: it is the tokenizer's target size");
  }
  std::set<std::string> langs;
  for (const GlossEntry& e : entries) {
    if (!e.language.empty()) langs.insert(e.language);
  }
  if (langs.size() >= 2) {
    return build_shared_vocab(entries, cfg.tokenizer_kind,
                              cfg.encoder.vocab_size);
  }
  std::vector<std::string> texts;
  for (const GlossEntry& e : entries) texts.push_back(e.gloss);
  const WordCounts counts = build_word_counts(texts);
  switch (cfg.tokenizer_kind) {
    case TokenizerKind::kBpe:
      return train_bpe(counts, cfg.encoder.vocab_size);
    case TokenizerKind::kWordPiece:
      return train_wordpiece(counts, cfg.encoder.vocab_size);
    case TokenizerKind::kUlm:
      return train_ulm(counts, cfg.encoder.vocab_size);
  }
  throw std::runtime_error("unreachable tokenizer kind");
}

int cmd_tokenizer_train(const Invocation& inv) {
  RunConfig cfg = load_config(inv);
  std::vector<std::string> problems = cfg.problems();
  if (cfg.paths.train.empty()) {
    problems.push_back("paths: train corpus is required");
  }
  if (!problems.empty()) fail_all(problems);

  const auto entries = load_dataset(cfg.paths.train, LoadMode::kPredict);
  log_info("training " +
           std::string(tokenizer_kind_name(cfg.tokenizer_kind)) +
           " tokenizer on " + std::to_string(entries.size()) + " glosses");

  const OutDir out(cfg.paths.out_dir, inv.force);
  out.reserve({"tokenizer.json", "config.json"});

  const TokenizerModel tok = train_tokenizer(cfg, entries);
  out.write("tokenizer.json", tok.to_json());
  write_record(out, "tokenizer-train", {{"train", cfg.paths.train}}, &cfg);
  log_info("tokenizer has " + std::to_string(tok.vocab.size()) + " tokens");
  return 0;
}

int cmd_train(const Invocation& inv) {
  RunConfig cfg = load_config(inv);
  std::vector<std::string> problems = cfg.problems();
  if (cfg.paths.train.empty()) {
    problems.push_back("paths: train dataset is required");
  }
  if (cfg.tokenizer_path.empty()) {
    problems.push_back("tokenizer: path is required to train a model");
  }
  if (!problems.empty()) fail_all(problems);

  // The tokenizer file is the authority on vocabulary size; the config's
  // vocab_size was only a training target for it.
  const TokenizerModel tok = TokenizerModel::load(cfg.tokenizer_path);
  if (cfg.encoder.vocab_size != 0 &&
      cfg.encoder.vocab_size != tok.vocab.size()) {
    log_info("tokenizer has " + std::to_string(tok.vocab.size()) +
             " tokens (config asked for " +
             std::to_string(cfg.encoder.vocab_size) + "); using " +
             std::to_string(tok.vocab.size()));
  }
  cfg.encoder.vocab_size = tok.vocab.size();

  const auto train_set = load_dataset(cfg.paths.train, LoadMode::kTrain);
  std::vector<GlossEntry> dev_set;
  if (!cfg.paths.dev.empty()) {
    dev_set = load_dataset(cfg.paths.dev, LoadMode::kTrain);
  }
  log_info("training on " + std::to_string(train_set.size()) + " entries, " +
           std::to_string(dev_set.size()) + " dev");

  const OutDir out(cfg.paths.out_dir, inv.force);
  out.reserve({"model.ckpt", "training_log.csv", "config.json",
               "manifest.json"});

  Model model(cfg.encoder, cfg.tasks, tok, cfg.seed);
  TrainResult result = cfg.tricks.alt
      ? train_multilingual(std::move(model), train_set, dev_set, {},
                           cfg.train_options())
            .result
      : train_model(std::move(model), train_set, dev_set,
                    cfg.train_options());

  save_checkpoint(result.model, (out.dir / "model.ckpt").string());
  out.write("training_log.csv", result.log_csv());
  write_record(out, "train",
               {{"train", cfg.paths.train}, {"dev", cfg.paths.dev}}, &cfg);

  json manifest;
  manifest["model"] = "model.ckpt";
  manifest["log"] = "training_log.csv";
  manifest["tokenizer"] = cfg.tokenizer_path;
  manifest["epochs_run"] = result.log.size();
  manifest["best_epoch"] = result.best_epoch;
  std::set<std::string> langs;
  for (const GlossEntry& e : train_set) {
    if (!e.language.empty()) langs.insert(e.language);
  }
  manifest["languages"] = langs;
  manifest["tricks"] = {
      {"alt", cfg.tricks.alt},
      {"rc", cfg.tricks.rc},
      {"rc_layer", cfg.tricks.rc_layer ? json(*cfg.tricks.rc_layer)
                                       : json(nullptr)}};
  out.write("manifest.json", manifest.dump(2) + "\n");

  const EpochStats& final_epoch = result.log.back();
  std::string losses;
  for (const auto& [task, loss] : final_epoch.task_loss) {
    losses += " " + task + "=" + std::to_string(loss);
  }
  log_info("finished after " + std::to_string(result.log.size()) +
           " epochs; final mean loss:" + losses);
  return 0;
}

int cmd_eval(const Invocation& inv, const std::string& model_path,
             const std::string& data_path) {
  const Model model = load_checkpoint(model_path);
  const auto testset = load_dataset(data_path, LoadMode::kTrain);
  log_info("evaluating " + std::to_string(testset.size()) + " entries");

  const OutDir out(inv.out_dir, inv.force);
  out.reserve({"report.json", "report.txt", "report.csv", "config.json"});

  const metrics::EvalReport report = metrics::evaluate(model, testset);
  out.write("report.json", report.to_json());
  out.write("report.txt", report.to_text());
  out.write("report.csv", report.to_csv());
  write_record(out, "eval", {{"model", model_path}, {"data", data_path}},
               nullptr);
  std::cout << report.to_text();
  return 0;
}

int cmd_predict(const Invocation& inv, const std::string& model_path,
                const std::string& data_path) {
  const Model model = load_checkpoint(model_path);
  auto entries = load_dataset(data_path, LoadMode::kPredict);
  log_info("predicting " + std::to_string(entries.size()) + " entries");

  const OutDir out(inv.out_dir, inv.force);
  out.reserve({"predictions.json", "config.json"});

  for (GlossEntry& e : entries) {
    const std::vector<int> ids = model.tokenizer.encode(
        e.gloss, model.config.alt ? e.language : "", true);
    const ad::Tensor v = model.encode_gloss(ids);
    for (const TaskHead& head : model.tasks) {
      const ad::Tensor pred = model.head_output(head.name, v);
      for (int t = 0; t < kNumTasks; ++t) {
        if (head.name == kTaskNames[t]) e.task(t) = pred.data();
      }
    }
  }
  out.write("predictions.json", dataset_to_json(entries));
  write_record(out, "predict", {{"model", model_path}, {"data", data_path}},
               nullptr);
  return 0;
}

int cmd_synth(const Invocation& inv, const std::vector<std::string>& languages,
              int entries_per_language, double dev_fraction) {
  RunConfig cfg = load_config(inv);
  std::vector<std::string> problems = cfg.problems();
  if (dev_fraction < 0.0 || dev_fraction >= 1.0) {
    problems.push_back("synth: --dev-fraction must be in [0, 1)");
  }
  if (!problems.empty()) fail_all(problems);

  SynthOptions opts;
  if (!languages.empty()) opts.languages = languages;
  opts.entries_per_language = entries_per_language;
  opts.dims = task_dims(cfg);
  opts.seed = cfg.seed;

  const auto data = synth_dataset(opts);
  log_info("generated " + std::to_string(data.size()) + " entries");

  const OutDir out(cfg.paths.out_dir, inv.force);
  const json params = {{"languages", opts.languages},
                       {"entries_per_language", opts.entries_per_language},
                       {"dev_fraction", dev_fraction}};
  if (dev_fraction > 0.0) {
    out.reserve({"train.json", "dev.json", "config.json"});
    const auto [train_part, dev_part] = split(data, dev_fraction, cfg.seed);
    out.write("train.json", dataset_to_json(train_part));
    out.write("dev.json", dataset_to_json(dev_part));
  } else {
    out.reserve({"synth.json", "config.json"});
    out.write("synth.json", dataset_to_json(data));
  }
  write_record(out, "synth", params, &cfg);
  return 0;
}

int cmd_stats(const Invocation& inv, const std::string& data_path,
              const std::string& tokenizer_path) {
  const auto entries = load_dataset(data_path, LoadMode::kPredict);
  std::optional<TokenizerModel> tok;
  if (!tokenizer_path.empty()) tok = TokenizerModel::load(tokenizer_path);

  // One row per language plus a total, in the familiar survey-table shape.
  std::map<std::string, std::vector<GlossEntry>> by_lang;
  for (const GlossEntry& e : entries) {
    by_lang[e.language.empty() ? "-" : e.language].push_back(e);
  }

  json rows = json::array();
  std::string text = "language  glosses  dict_size  avg_gloss_len\n";
  auto add_row = [&](const std::string& name, const CorpusStats& s) {
    char buf[160];
    std::snprintf(buf, sizeof buf, "%-8s  %7lld  %9lld  %13.2f\n",
                  name.c_str(), static_cast<long long>(s.gloss_num),
                  static_cast<long long>(s.dict_size), s.avg_gloss_len);
    text += buf;
    rows.push_back({{"language", name},
                    {"glosses", s.gloss_num},
                    {"dict_size", s.dict_size},
                    {"avg_gloss_len", s.avg_gloss_len}});
  };
  if (by_lang.size() > 1) {
    for (const auto& [lang, group] : by_lang) {
      add_row(lang, corpus_stats(group, tok ? &*tok : nullptr));
    }
  }
  add_row("all", corpus_stats(entries, tok ? &*tok : nullptr));

  std::cout << text;
  if (!inv.out_dir.empty()) {
    const OutDir out(inv.out_dir, inv.force);
    out.reserve({"stats.json", "config.json"});
    out.write("stats.json", rows.dump(2) + "\n");
    write_record(out, "stats",
                 {{"data", data_path}, {"tokenizer", tokenizer_path}},
                 nullptr);
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"reverse-dictionary toolkit: gloss in, embedding out"};
  app.require_subcommand(1);
  app.fallthrough();

  Invocation inv;
  uint64_t seed_flag = 0;
  app.add_option("--config", inv.config_path, "run config JSON file");
  auto* seed_opt =
      app.add_option("--seed", seed_flag, "seed override for this run");
  app.add_option("--out", inv.out_dir, "output directory override");
  app.add_flag("--force", inv.force, "allow overwriting existing outputs");

  auto* tok_cmd = app.add_subcommand(
      "tokenizer-train", "train a subword tokenizer from the config corpus");

  auto* train_cmd =
      app.add_subcommand("train", "train a model end to end from a config");

  std::string model_path, data_path, tokenizer_path;
  auto* eval_cmd =
      app.add_subcommand("eval", "score a model on a labelled dataset");
  eval_cmd->add_option("--model", model_path, "model checkpoint")->required();
  eval_cmd->add_option("--data", data_path, "dataset JSON")->required();

  auto* predict_cmd =
      app.add_subcommand("predict", "fill a dataset with predicted vectors");
  predict_cmd->add_option("--model", model_path, "model checkpoint")
      ->required();
  predict_cmd->add_option("--data", data_path, "dataset JSON")->required();

  std::vector<std::string> languages;
  int entries_per_language = 64;
  double dev_fraction = 0.0;
  auto* synth_cmd = app.add_subcommand(
      "synth", "generate a synthetic dataset from the config's tasks");
  synth_cmd->add_option("--languages", languages,
                        "language codes (default: en)")
      ->delimiter(',');
  synth_cmd->add_option("--entries", entries_per_language,
                        "entries per language");
  synth_cmd->add_option("--dev-fraction", dev_fraction,
                        "emit train/dev files instead of one dataset");

  auto* stats_cmd =
      app.add_subcommand("stats", "corpus statistics for a dataset");
  stats_cmd->add_option("--data", data_path, "dataset JSON")->required();
  stats_cmd->add_option("--tokenizer", tokenizer_path,
                        "tokenizer for subword statistics");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  if (seed_opt->count() > 0) inv.seed = seed_flag;

  try {
    if (tok_cmd->parsed()) return cmd_tokenizer_train(inv);
    if (train_cmd->parsed()) return cmd_train(inv);
    if (eval_cmd->parsed()) return cmd_eval(inv, model_path, data_path);
    if (predict_cmd->parsed()) return cmd_predict(inv, model_path, data_path);
    if (synth_cmd->parsed()) {
      return cmd_synth(inv, languages, entries_per_language, dev_fraction);
    }
    if (stats_cmd->parsed()) {
      return cmd_stats(inv, data_path, tokenizer_path);
    }
    std::cerr << "error: no command given\n";
    return 1;
  } catch (const std::exception& e) {
    // One line, machine-parsable, no matter how detailed the failure.
    std::string msg = e.what();
    for (char& c : msg) {
      if (c == '\n') c = ' ';
    }
    std::cerr << "error: " << msg << "\n";
    return 1;
  }
}
