// End-to-end checks of the command-line binary, driven as a subprocess.
// The binary's path arrives as the first program argument.

#define DOCTEST_CONFIG_IMPLEMENT
#include <doctest.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "rdforge/dataio.hpp"

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

std::string g_binary;
fs::path g_scratch;

struct RunResult {
  int exit_code = -1;
  std::string out;
  std::string err;
};

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::stringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

RunResult run(const std::string& args) {
  const fs::path out = g_scratch / "stdout.txt";
  const fs::path err = g_scratch / "stderr.txt";
  const std::string cmd =
      g_binary + " " + args + " > " + out.string() + " 2> " + err.string();
  const int status = std::system(cmd.c_str());
  RunResult r;
  r.exit_code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
  r.out = slurp(out);
  r.err = slurp(err);
  return r;
}

void write_file(const fs::path& p, const std::string& text) {
  fs::create_directories(p.parent_path());
  std::ofstream out(p);
  out << text;
}

// A config that trains in seconds: small encoder, synthetic data.
json base_config(const fs::path& root) {
  return json{
      {"encoder",
       {{"kind", "elmo"},
        {"num_layers", 2},
        {"hidden_size", 16},
        {"input_size", 16},
        {"dropout", 0.0},
        {"vocab_size", 120},
        {"max_len", 24}}},
      {"tokenizer",
       {{"kind", "wordpiece"}, {"path", (root / "tok/tokenizer.json").string()}}},
      {"tasks", json::array({{{"name", "sgns"}, {"dim", 6}},
                             {{"name", "char"}, {"dim", 4}}})},
      {"optimizer",
       {{"lr", 0.005}, {"batch_size", 8}, {"epochs", 3}, {"patience", 0}}},
      {"seed", 11},
      {"paths",
       {{"train", (root / "data/synth.json").string()},
        {"dev", ""},
        {"out_dir", (root / "data").string()}}}};
}

}  // namespace

TEST_CASE("pipeline: synth, tokenizer, train, eval, predict") {
  const fs::path root = g_scratch / "pipeline";
  fs::remove_all(root);
  write_file(root / "run.json", base_config(root).dump(2));
  const std::string cfg = " --config " + (root / "run.json").string();

  auto r = run("synth" + cfg + " --entries 16");
  CAPTURE(r.err);
  REQUIRE(r.exit_code == 0);
  CHECK(fs::exists(root / "data/synth.json"));
  CHECK(fs::exists(root / "data/config.json"));

  r = run("tokenizer-train" + cfg + " --out " + (root / "tok").string());
  CAPTURE(r.err);
  REQUIRE(r.exit_code == 0);
  CHECK(fs::exists(root / "tok/tokenizer.json"));
  CHECK(fs::exists(root / "tok/config.json"));

  r = run("train" + cfg + " --out " + (root / "model").string());
  CAPTURE(r.err);
  REQUIRE(r.exit_code == 0);
  CHECK(fs::exists(root / "model/model.ckpt"));
  CHECK(fs::exists(root / "model/training_log.csv"));
  CHECK(fs::exists(root / "model/manifest.json"));
  const std::string log_csv = slurp(root / "model/training_log.csv");
  CHECK(log_csv.rfind("epoch,task,mean_loss,dwa_weight", 0) == 0);

  // The archived config is the resolved one and reusable as-is.
  const json record = json::parse(slurp(root / "model/config.json"));
  CHECK(record.at("command") == "train");
  CHECK(record.at("run_config").at("seed") == 11);
  CHECK(record.at("run_config").at("optimizer").at("weight_decay") == 0.0);

  r = run("eval --model " + (root / "model/model.ckpt").string() +
          " --data " + (root / "data/synth.json").string() + " --out " +
          (root / "report").string());
  CAPTURE(r.err);
  REQUIRE(r.exit_code == 0);
  for (const char* name : {"report.json", "report.txt", "report.csv",
                           "config.json"}) {
    CHECK(fs::exists(root / "report" / name));
  }
  CHECK(r.out.find("language") != std::string::npos);
  CHECK(r.out.find("sgns") != std::string::npos);
  const json report = json::parse(slurp(root / "report/report.json"));
  REQUIRE(report.at("rows").size() == 2);
  CHECK(report.at("rows").at(0).at("count") == 16);

  r = run("predict --model " + (root / "model/model.ckpt").string() +
          " --data " + (root / "data/synth.json").string() + " --out " +
          (root / "pred").string());
  CAPTURE(r.err);
  REQUIRE(r.exit_code == 0);
  const auto preds = rdforge::parse_dataset(
      slurp(root / "pred/predictions.json"), rdforge::LoadMode::kTrain);
  REQUIRE(preds.size() == 16);
  for (const auto& e : preds) {
    REQUIRE(e.sgns.has_value());
    CHECK(e.sgns->size() == 6);
  }
}

TEST_CASE("outputs are write-once without --force") {
  const fs::path root = g_scratch / "force";
  fs::remove_all(root);
  write_file(root / "run.json", base_config(root).dump(2));
  const std::string cfg = " --config " + (root / "run.json").string();

  REQUIRE(run("synth" + cfg + " --entries 4").exit_code == 0);
  auto r = run("synth" + cfg + " --entries 4");
  CHECK(r.exit_code != 0);
  CHECK(r.err.find("refusing to overwrite") != std::string::npos);
  CHECK(r.err.find("--force") != std::string::npos);

  r = run("synth" + cfg + " --entries 4 --force");
  CHECK(r.exit_code == 0);
}

TEST_CASE("a broken config reports every violation on one line") {
  const fs::path root = g_scratch / "badcfg";
  fs::remove_all(root);
  json cfg = base_config(root);
  cfg["optimizer"]["lr"] = 0.0;
  cfg["dwa"] = {{"temperature", -2.0}};
  cfg.erase("tasks");
  write_file(root / "bad.json", cfg.dump(2));

  const auto r = run("train --config " + (root / "bad.json").string());
  CHECK(r.exit_code != 0);
  REQUIRE(r.err.rfind("error: ", 0) == 0);
  CHECK(r.err.find("lr must be positive") != std::string::npos);
  CHECK(r.err.find("temperature") != std::string::npos);
  CHECK(r.err.find("tasks") != std::string::npos);
  // One line: a single trailing newline and no other.
  CHECK(std::count(r.err.begin(), r.err.end(), '\n') == 1);
}

TEST_CASE("eval rejects a dataset whose dims do not match the model") {
  const fs::path root = g_scratch / "dimclash";
  fs::remove_all(root);
  write_file(root / "run.json", base_config(root).dump(2));
  const std::string cfg = " --config " + (root / "run.json").string();

  REQUIRE(run("synth" + cfg + " --entries 8").exit_code == 0);
  REQUIRE(run("tokenizer-train" + cfg + " --out " + (root / "tok").string())
              .exit_code == 0);
  REQUIRE(run("train" + cfg + " --out " + (root / "model").string())
              .exit_code == 0);

  // Same generator, different target widths.
  json other = base_config(root);
  other["tasks"] = json::array({{{"name", "sgns"}, {"dim", 9}}});
  other["paths"]["out_dir"] = (root / "other").string();
  write_file(root / "other.json", other.dump(2));
  REQUIRE(run("synth --config " + (root / "other.json").string() +
              " --entries 8")
              .exit_code == 0);

  const auto r = run("eval --model " + (root / "model/model.ckpt").string() +
                     " --data " + (root / "other/synth.json").string() +
                     " --out " + (root / "report").string());
  CHECK(r.exit_code != 0);
  // Info logging may precede it, but the failure itself is one error line.
  const size_t at = r.err.rfind("error: ");
  REQUIRE(at != std::string::npos);
  CHECK((at == 0 || r.err[at - 1] == '\n'));
  CHECK(r.err.find("dim") != std::string::npos);
}

TEST_CASE("stats prints the corpus summary table") {
  const fs::path root = g_scratch / "stats";
  fs::remove_all(root);
  const json data = json::array({{{"id", "1"},
                                  {"gloss", "a b"},
                                  {"language", "en"},
                                  {"sgns", {0.0, 1.0}}},
                                 {{"id", "2"},
                                  {"gloss", "b c"},
                                  {"language", "en"},
                                  {"sgns", {1.0, 0.0}}}});
  write_file(root / "two.json", data.dump(2));

  const auto r = run("stats --data " + (root / "two.json").string());
  REQUIRE(r.exit_code == 0);

  // Matches the library's own numbers: 2 glosses, 3 types, 2.0 average.
  const auto entries =
      rdforge::load_dataset((root / "two.json").string(),
                            rdforge::LoadMode::kTrain);
  const auto s = rdforge::corpus_stats(entries);
  CHECK(s.gloss_num == 2);
  CHECK(s.dict_size == 3);
  std::stringstream want;
  want << "all  ";  // language column, then the numbers in order
  CHECK(r.out.find("glosses") != std::string::npos);
  CHECK(r.out.find("2") != std::string::npos);
  CHECK(r.out.find("3") != std::string::npos);
  CHECK(r.out.find("2.00") != std::string::npos);

  const auto with_out =
      run("stats --data " + (root / "two.json").string() + " --out " +
          (root / "statsout").string());
  REQUIRE(with_out.exit_code == 0);
  const json rows = json::parse(slurp(root / "statsout/stats.json"));
  REQUIRE(rows.size() == 1);
  CHECK(rows.at(0).at("glosses") == s.gloss_num);
  CHECK(rows.at(0).at("dict_size") == s.dict_size);
  CHECK(rows.at(0).at("avg_gloss_len") == doctest::Approx(s.avg_gloss_len));
}

TEST_CASE("bad invocations fail with a one-line error") {
  auto r = run("flarp");
  CHECK(r.exit_code != 0);
  CHECK(r.err.rfind("error: ", 0) == 0);

  r = run("train");  // no config anywhere
  CHECK(r.exit_code != 0);
  CHECK(r.err.find("--config") != std::string::npos);

  r = run("eval --model nowhere.ckpt");
  CHECK(r.exit_code != 0);
  CHECK(r.err.rfind("error: ", 0) == 0);

  r = run("train --config does_not_exist.json");
  CHECK(r.exit_code != 0);
  CHECK(r.err.find("cannot read") != std::string::npos);
}

TEST_CASE("the seed flag overrides the config seed") {
  const fs::path root = g_scratch / "seedflag";
  fs::remove_all(root);
  json cfg = base_config(root);
  write_file(root / "run.json", cfg.dump(2));
  cfg["seed"] = 5;
  cfg["paths"]["out_dir"] = (root / "five").string();
  write_file(root / "five.json", cfg.dump(2));

  REQUIRE(run("synth --config " + (root / "run.json").string() +
              " --entries 6 --seed 5 --out " + (root / "flag").string())
              .exit_code == 0);
  REQUIRE(run("synth --config " + (root / "five.json").string() +
              " --entries 6")
              .exit_code == 0);

  CHECK(slurp(root / "flag/synth.json") == slurp(root / "five/synth.json"));
  const json record = json::parse(slurp(root / "flag/config.json"));
  CHECK(record.at("run_config").at("seed") == 5);
}

int main(int argc, char** argv) {
  std::vector<const char*> doctest_args = {argv[0]};
  for (int i = 1; i < argc; ++i) {
    if (g_binary.empty() && argv[i][0] != '-') {
      g_binary = argv[i];
    } else {
      doctest_args.push_back(argv[i]);
    }
  }
  if (g_binary.empty()) {
    std::fprintf(stderr, "usage: cli_tests <path-to-rdforge> [doctest args]\n");
    return 2;
  }
  g_scratch = fs::temp_directory_path() / "rdforge_cli_tests";
  fs::create_directories(g_scratch);

  doctest::Context ctx(int(doctest_args.size()),
                       const_cast<char**>(doctest_args.data()));
  return ctx.run();
}
