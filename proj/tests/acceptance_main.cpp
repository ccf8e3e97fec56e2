// Acceptance gate: nine go/no-go checks over the whole toolkit, each
// printed as one PASS/FAIL line. Thresholds are pinned here, in code.
// Usage: acceptance <path-to-rdforge-binary> — the binary drives the
// end-to-end pipeline checks; everything else runs in-process.

#include <sys/wait.h>

#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <map>
#include <set>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "gradcheck.hpp"
#include "rdforge/dataio.hpp"
#include "rdforge/encoder.hpp"
#include "rdforge/metrics.hpp"
#include "rdforge/multilingual.hpp"
#include "rdforge/multitask.hpp"
#include "rdforge/rng.hpp"
#include "rdforge/synth.hpp"
#include "rdforge/tensor.hpp"
#include "rdforge/tokenizer.hpp"
#include "rdforge/trainer.hpp"
#include "tokenizer_oracles.hpp"

namespace fs = std::filesystem;
using nlohmann::json;
using namespace rdforge;

namespace {

std::string g_binary;
fs::path g_scratch;

void require(bool ok, const std::string& why) {
  if (!ok) throw std::runtime_error(why);
}

std::string fmt(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.3g", v);
  return buf;
}

double seconds_since(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0)
      .count();
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  require(bool(in), "cannot read " + p.string());
  std::stringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

int run_cli(const std::string& args) {
  const std::string cmd = g_binary + " " + args + " > " +
                          (g_scratch / "cli_out.txt").string() + " 2> " +
                          (g_scratch / "cli_err.txt").string();
  const int status = std::system(cmd.c_str());
  return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

std::string last_cli_error() {
  std::ifstream in(g_scratch / "cli_err.txt", std::ios::binary);
  if (!in) return "(no stderr captured)";
  std::stringstream buf;
  buf << in.rdbuf();
  const std::string err = buf.str();
  const size_t at = err.rfind("error: ");
  return at == std::string::npos ? err : err.substr(at);
}

// Sequenced on purpose: the command must finish before the error message
// is assembled from its captured stderr.
void run_step(const std::string& name, const std::string& args) {
  if (run_cli(args) != 0) {
    throw std::runtime_error(name + " failed: " + last_cli_error());
  }
}

// --------------------------------------------------------------------------
// 1. Gradient suite: every tensor op at rel. tol 1e-4, every encoder kind
//    end to end at 1e-3, all inside 60 seconds.

std::string criterion_gradients() {
  const auto t0 = std::chrono::steady_clock::now();
  Rng rng(77);
  const auto randv = [&rng](size_t n, double lo, double hi) {
    std::vector<double> v(n);
    for (double& x : v) x = rng.uniform(lo, hi);
    return v;
  };
  const auto grad_t = [&](ad::Shape s) {
    const size_t n = size_t(ad::shape_numel(s));
    return ad::Tensor(std::move(s), randv(n, -1.0, 1.0), true);
  };
  const auto const_t = [&](ad::Shape s) {
    const size_t n = size_t(ad::shape_numel(s));
    return ad::Tensor(std::move(s), randv(n, -1.0, 1.0), false);
  };

  double worst_op = 0.0;
  const auto check_op = [&worst_op](const char* name,
                                    std::vector<ad::Tensor> params,
                                    const std::function<ad::Tensor()>& loss) {
    const double e = gradcheck::max_grad_rel_err(std::move(params), loss);
    worst_op = std::max(worst_op, e);
    require(e <= 1e-4, std::string("op ") + name + ": rel err " + fmt(e));
  };

  {
    auto a = grad_t({3, 4}), b = grad_t({4, 2}), t = const_t({3, 2});
    check_op("matmul", {a, b},
             [=] { return ad::mse(ad::matmul(a, b), t); });
  }
  {
    auto a = grad_t({3, 4}), t = const_t({4, 3});
    check_op("transpose", {a},
             [=] { return ad::mse(ad::transpose(a), t); });
  }
  {
    auto a = grad_t({3, 4}), b = grad_t({3, 4}), t = const_t({3, 4});
    check_op("add", {a, b}, [=] { return ad::mse(ad::add(a, b), t); });
    check_op("mul", {a, b}, [=] { return ad::mse(ad::mul(a, b), t); });
  }
  {
    auto a = grad_t({3, 4}), row = grad_t({4}), t = const_t({3, 4});
    check_op("add row-broadcast", {a, row},
             [=] { return ad::mse(ad::add(a, row), t); });
    check_op("mul row-broadcast", {a, row},
             [=] { return ad::mse(ad::mul(a, row), t); });
  }
  {
    auto a = grad_t({3, 4}), s = grad_t({1}), t = const_t({3, 4});
    check_op("add scalar-broadcast", {a, s},
             [=] { return ad::mse(ad::add(a, s), t); });
    check_op("mul scalar-broadcast", {a, s},
             [=] { return ad::mse(ad::mul(a, s), t); });
  }
  {
    auto a = grad_t({3, 4}), t = const_t({3, 4});
    check_op("scale", {a}, [=] { return ad::mse(ad::scale(a, 1.7), t); });
  }
  {
    auto a = grad_t({3, 4}), b = grad_t({3, 2}), t = const_t({3, 6});
    check_op("concat", {a, b},
             [=] { return ad::mse(ad::concat({a, b}), t); });
  }
  {
    auto a = grad_t({3, 6}), t = const_t({3, 2});
    check_op("slice_cols", {a},
             [=] { return ad::mse(ad::slice_cols(a, 1, 2), t); });
  }
  {
    auto a = grad_t({4, 5}), t = const_t({2, 5});
    check_op("slice_rows", {a},
             [=] { return ad::mse(ad::slice_rows(a, 1, 2), t); });
  }
  {
    auto a = grad_t({3, 5}), t = const_t({3, 5});
    check_op("tanh", {a}, [=] { return ad::mse(ad::tanh(a), t); });
    check_op("sigmoid", {a}, [=] { return ad::mse(ad::sigmoid(a), t); });
    check_op("softmax", {a}, [=] { return ad::mse(ad::softmax(a), t); });
    check_op("layer_norm", {a},
             [=] { return ad::mse(ad::layer_norm(a), t); });
  }
  {
    // Keep relu inputs away from its kink at zero.
    std::vector<double> v = randv(12, 0.2, 1.0);
    for (size_t i = 0; i < v.size(); i += 2) v[i] = -v[i];
    auto a = ad::Tensor({3, 4}, v, true);
    auto t = const_t({3, 4});
    check_op("relu", {a}, [=] { return ad::mse(ad::relu(a), t); });
  }
  {
    auto table = grad_t({7, 4});
    const std::vector<int> ids = {1, 3, 2, 3};  // a repeat: grads accumulate
    auto t = const_t({4, 4});
    check_op("embedding_lookup", {table}, [table, ids, t] {
      return ad::mse(ad::embedding_lookup(table, ids), t);
    });
  }
  {
    auto a = grad_t({4, 5}), t = const_t({4, 5});
    check_op("dropout", {a}, [=] {
      Rng mask_rng(5);  // fresh identical stream per call: a fixed mask
      return ad::mse(ad::dropout(a, 0.7, true, mask_rng), t);
    });
  }
  {
    auto a = grad_t({3, 4}), b = grad_t({3, 4});
    check_op("mean", {a, b}, [=] { return ad::mean(ad::mul(a, b)); });
    check_op("mse", {a, b}, [=] { return ad::mse(a, b); });
  }

  // End to end: every encoder kind on the toy configuration.
  double worst_model = 0.0;
  const std::vector<int> ids = {2, 7, 11, 4, 9};  // length 5, vocab 20
  for (EncoderKind kind :
       {EncoderKind::kRnn, EncoderKind::kLstm, EncoderKind::kBiRnn,
        EncoderKind::kElmo, EncoderKind::kTransformer}) {
    EncoderConfig c;
    c.kind = kind;
    c.num_layers = 2;
    c.hidden_size = 8;
    c.input_size = 8;
    c.dropout = 0.0;
    c.num_heads = 2;
    c.vocab_size = 20;
    c.max_len = 8;
    Model m(c, {{"sgns", 4}}, TokenizerModel{}, 17);
    const ad::Tensor target({1, 4}, randv(4, -1.0, 1.0), false);
    const double e =
        gradcheck::max_grad_rel_err(m.parameters(), [&m, &ids, &target] {
          return ad::mse(m.head_output("sgns", m.encode_gloss(ids)), target);
        });
    worst_model = std::max(worst_model, e);
    require(e <= 1e-3, std::string(encoder_kind_name(kind)) + ": rel err " +
                           fmt(e));
  }

  const double secs = seconds_since(t0);
  require(secs < 60.0, "took " + fmt(secs) + "s (limit 60)");
  return "ops <= " + fmt(worst_op) + ", encoders <= " + fmt(worst_model) +
         ", " + fmt(secs) + "s";
}

// --------------------------------------------------------------------------
// 2. Loss-weighting oracle: the update matches the closed form to 1e-12 on
//    100 random cases, weights sum to the task count, epochs 1-2 are ones.

std::string criterion_dwa() {
  Rng rng(12);
  double worst = 0.0, worst_sum = 0.0;
  for (int case_i = 0; case_i < 100; ++case_i) {
    const int n = 2 + int(rng.below(2));
    const double temp = rng.below(2) == 0 ? 0.5 : 2.0;
    DwaState dwa(n, temp);
    for (double w : dwa.weights()) require(w == 1.0, "initial weights");

    const auto losses = [&] {
      std::vector<double> v(static_cast<size_t>(n));
      for (double& x : v) x = rng.uniform(0.5, 2.0);
      return v;
    };

    auto prev = losses();
    for (double w : dwa.update(prev)) {
      require(w == 1.0, "weights after one epoch must stay 1");
    }

    for (int epoch = 0; epoch < 3; ++epoch) {
      const auto cur = losses();
      const auto& got = dwa.update(cur);
      double denom = 0.0;
      std::vector<double> want(static_cast<size_t>(n));
      for (int i = 0; i < n; ++i) {
        want[size_t(i)] = std::exp(cur[size_t(i)] / prev[size_t(i)] / temp);
        denom += want[size_t(i)];
      }
      double sum = 0.0;
      for (int i = 0; i < n; ++i) {
        const double w = double(n) * want[size_t(i)] / denom;
        worst = std::max(worst, std::abs(got[size_t(i)] - w));
        require(std::abs(got[size_t(i)] - w) <= 1e-12,
                "weight off closed form by " +
                    fmt(std::abs(got[size_t(i)] - w)));
        sum += got[size_t(i)];
      }
      worst_sum = std::max(worst_sum, std::abs(sum - double(n)));
      require(std::abs(sum - double(n)) <= 1e-9,
              "weights sum to " + fmt(sum) + " not " + std::to_string(n));
      prev = cur;
    }
  }
  return "closed-form gap <= " + fmt(worst) + ", sum gap <= " +
         fmt(worst_sum);
}

// --------------------------------------------------------------------------
// 3. Tokenizer oracles: trained models equal brute-force recount references;
//    Viterbi equals exhaustive enumeration; decode(encode(w)) == w.

std::string criterion_tokenizers() {
  const WordCounts hug = {{"hug", 10}, {"pug", 5},  {"pun", 12},
                          {"bun", 4},  {"hugs", 5}};
  int words_checked = 0;

  const auto identity = [&words_checked](const TokenizerModel& m,
                                         const WordCounts& corpus) {
    for (const auto& [w, f] : corpus) {
      require(m.decode(m.encode(w, "", false)) == w,
              "decode(encode(" + w + ")) != " + w);
      ++words_checked;
    }
  };

  // BPE: merge sequences and segmentations on five corpora.
  const std::vector<std::pair<WordCounts, int>> bpe_cases = {
      {hug, 30},
      {hug, 13},
      {{{"aaa", 7}, {"aab", 3}, {"baa", 2}}, 12},
      {{{"héllo", 4}, {"héllos", 2}, {"hélp", 5}}, 16},
      {{{"ababab", 3}, {"abab", 2}, {"bab", 6}}, 14},
  };
  for (const auto& [corpus, target] : bpe_cases) {
    const auto naive = oracles::naive_bpe(corpus, target);
    const auto m = train_bpe(corpus, target);
    require(m.merges == naive.merges, "bpe merge sequence mismatch at target " +
                                          std::to_string(target));
    for (const auto& [w, pieces] : naive.segs) {
      std::vector<int> want;
      for (const auto& p : pieces) want.push_back(m.vocab.id(p));
      require(m.encode(w, "", false) == want,
              "bpe segmentation mismatch for " + w);
    }
    identity(m, corpus);
  }

  // WordPiece: the hand-computed score table picks (a, ##b), then full
  // vocabulary equality with the recount reference.
  {
    const WordCounts corpus = {{"ab", 4}, {"cd", 6}, {"cx", 4}, {"yd", 4}};
    // freq(a,##b)=4, freq(a)=4, freq(##b)=4 -> 4/16 = 0.25
    // freq(c,##d)=6, freq(c)=10, freq(##d)=10 -> 6/100 = 0.06
    // freq(c,##x)=4 -> 4/40 = 0.1; freq(y,##d)=4 -> 4/40 = 0.1
    const auto naive = oracles::naive_wordpiece(corpus, 11);
    require(!naive.merges.empty() &&
                naive.merges[0] ==
                    std::pair<std::string, std::string>{"a", "##b"},
            "wordpiece first merge is not (a, ##b)");
    const auto m = train_wordpiece(corpus, 11);
    require(m.vocab.contains("ab") && !m.vocab.contains("cd"),
            "wordpiece hand-table winner missing from the vocab");
  }
  const std::vector<std::pair<WordCounts, int>> wp_cases = {
      {hug, 20},
      {{{"hug", 10}}, 20},
      {{{"ababab", 3}, {"abab", 2}, {"bab", 6}}, 18},
  };
  for (const auto& [corpus, target] : wp_cases) {
    const auto naive = oracles::naive_wordpiece(corpus, target);
    const auto m = train_wordpiece(corpus, target);
    std::set<std::string> got;
    for (int id = m.vocab.num_reserved(); id < m.vocab.size(); ++id) {
      got.insert(m.vocab.token(id));
    }
    require(got == naive.vocab, "wordpiece vocabulary mismatch at target " +
                                    std::to_string(target));
    identity(m, corpus);
  }

  // ULM: Viterbi equals trying every cut pattern, word by word.
  {
    const WordCounts corpus = {{"hugging", 6}, {"hug", 10},  {"pug", 5},
                               {"puns", 12},   {"bun", 4},   {"hugs", 5},
                               {"gussets", 2}, {"sunhug", 3}};
    const auto m = train_ulm(corpus, 30);
    const auto scorer = oracles::ulm_scorer(m);
    for (const auto& [w, f] : corpus) {
      const auto best = oracles::exhaustive_best(w, scorer);
      const auto ids = m.encode(w, "", false);
      double lp = 0.0;
      std::vector<std::string> pieces;
      for (int id : ids) {
        require(!m.vocab.is_reserved(id), "reserved id in ulm segmentation");
        lp += m.scores[size_t(id)];
        pieces.push_back(m.vocab.token(id));
      }
      require(std::abs(lp - best.logprob) <=
                  1e-12 * std::max(1.0, std::abs(best.logprob)),
              "ulm viterbi log-prob off for " + w);
      if (best.num_best == 1) {
        require(pieces == best.pieces, "ulm segmentation mismatch for " + w);
      }
    }
    identity(m, corpus);
  }

  return std::to_string(words_checked) + " decode-identity words, " +
         std::to_string(bpe_cases.size()) + " bpe corpora";
}

// --------------------------------------------------------------------------
// 4. RANK oracle: exact equality with the O(N^2) double loop.

std::string criterion_rank() {
  for (uint64_t seed = 1; seed <= 20; ++seed) {
    Rng rng(seed);
    const int n = 50, dim = 16;
    std::vector<std::vector<double>> preds(n), refs(n);
    for (int i = 0; i < n; ++i) {
      for (int d = 0; d < dim; ++d) {
        preds[size_t(i)].push_back(rng.normal(0.0, 1.0));
        refs[size_t(i)].push_back(rng.normal(0.0, 1.0));
      }
    }
    const auto got = metrics::rank_scores(preds, refs);
    for (int i = 0; i < n; ++i) {
      const double own = metrics::cos(preds[size_t(i)], refs[size_t(i)]);
      int beaten = 0;
      for (int j = 0; j < n; ++j) {
        if (j != i && metrics::cos(preds[size_t(i)], refs[size_t(j)]) > own) {
          ++beaten;
        }
      }
      const double want = double(beaten) / double(n - 1);
      require(got[size_t(i)] == want,
              "rank mismatch at seed " + std::to_string(seed) + " item " +
                  std::to_string(i));
    }
  }
  return "20 seeds x 50 items, exact";
}

// --------------------------------------------------------------------------
// 5 & 9. The pipeline: synthetic data, tokenizer, training, report. Run
// twice; the first run must overfit inside the budget, the second must
// reproduce it bit for bit.

json pipeline_config(const fs::path& root) {
  return json{
      {"encoder",
       {{"kind", "elmo"},
        {"num_layers", 2},
        {"hidden_size", 32},
        {"input_size", 32},
        {"dropout", 0.0},
        {"vocab_size", 200},
        {"max_len", 64}}},
      {"tokenizer",
       {{"kind", "wordpiece"},
        {"path", (root / "tok/tokenizer.json").string()}}},
      {"tasks", json::array({{{"name", "sgns"}, {"dim", 32}},
                             {{"name", "char"}, {"dim", 32}},
                             {{"name", "electra"}, {"dim", 32}}})},
      {"dwa", {{"enabled", true}, {"temperature", 2.0}}},
      {"optimizer",
       {{"lr", 0.001},
        {"batch_size", 4},
        {"epochs", 200},
        {"patience", 0},
        {"clip_norm", 5.0},
        {"weight_decay", 0.0}}},
      {"seed", 31},
      {"paths",
       {{"train", (root / "data/synth.json").string()},
        {"dev", ""},
        {"out_dir", (root / "data").string()}}}};
}

void run_pipeline(const fs::path& root) {
  fs::remove_all(root);
  fs::create_directories(root);
  std::ofstream(root / "run.json") << pipeline_config(root).dump(2);
  const std::string cfg = " --config " + (root / "run.json").string();
  run_step("synth", "synth" + cfg + " --entries 64");
  run_step("tokenizer-train",
           "tokenizer-train" + cfg + " --out " + (root / "tok").string());
  run_step("train", "train" + cfg + " --out " + (root / "model").string());
  run_step("eval", "eval --model " + (root / "model/model.ckpt").string() +
                       " --data " + (root / "data/synth.json").string() +
                       " --out " + (root / "report").string());
}

std::string criterion_overfit() {
  const auto t0 = std::chrono::steady_clock::now();
  run_pipeline(g_scratch / "run1");
  const double secs = seconds_since(t0);
  require(secs < 300.0, "pipeline took " + fmt(secs) + "s (limit 300)");

  const json report =
      json::parse(slurp(g_scratch / "run1/report/report.json"));
  const auto& rows = report.at("rows");
  require(rows.size() == 3, "expected 3 task rows, got " +
                                std::to_string(rows.size()));
  double worst_mse = 0.0, worst_cos = 1.0;
  for (const auto& row : rows) {
    const double mse = row.at("mse").get<double>();
    const double cos = row.at("cos").get<double>();
    const std::string task = row.at("task").get<std::string>();
    require(mse <= 1e-2, task + ": train MSE " + fmt(mse) + " > 1e-2");
    require(cos >= 0.99, task + ": train COS " + fmt(cos) + " < 0.99");
    worst_mse = std::max(worst_mse, mse);
    worst_cos = std::min(worst_cos, cos);
  }
  return "MSE <= " + fmt(worst_mse) + ", COS >= " + fmt(worst_cos) + ", " +
         fmt(secs) + "s";
}

std::string criterion_reproducibility() {
  require(fs::exists(g_scratch / "run1/model/model.ckpt"),
          "first pipeline run left no checkpoint");
  run_pipeline(g_scratch / "run2");
  for (const char* rel :
       {"model/model.ckpt", "report/report.json", "report/report.txt",
        "report/report.csv", "model/training_log.csv"}) {
    require(slurp(g_scratch / "run1" / rel) == slurp(g_scratch / "run2" / rel),
            std::string(rel) + " differs between identical runs");
  }
  return "checkpoint + 3 reports + log identical";
}

// --------------------------------------------------------------------------
// 6. Parameter parity between the bidirectional and reference stacks.

std::string criterion_parity() {
  require(recurrent_core_params(256, 4, true) == 263168,
          "bidirectional core count changed");
  require(recurrent_core_params(181, 4, false) == 262812,
          "reference core count changed");
  require(parity_rnn_hidden(256, 4) == 181, "parity width is not 181");
  double worst = 0.0;
  for (int width : {128, 256, 512}) {
    const int h = parity_rnn_hidden(width, 4);
    const double bi = double(recurrent_core_params(width, 4, true));
    const double uni = double(recurrent_core_params(h, 4, false));
    const double gap = std::abs(uni - bi) / bi;
    worst = std::max(worst, gap);
    require(gap < 0.01, "parity gap " + fmt(gap) + " at width " +
                            std::to_string(width));
  }
  return "256 -> 181, max gap " + fmt(worst);
}

// --------------------------------------------------------------------------
// 7. Multilingual plumbing: per-language rows partition the testset, and
//    the wrapper with everything off equals the plain trainer.

std::string criterion_multilingual() {
  SynthOptions so;
  so.languages = {"en", "ru"};
  so.entries_per_language = 16;
  so.dims = {{"sgns", 8}};
  so.seed = 21;
  const auto all = synth_dataset(so);
  const TokenizerModel tok = build_shared_vocab(all, TokenizerKind::kBpe, 60);

  EncoderConfig c;
  c.kind = EncoderKind::kRnn;
  c.num_layers = 1;
  c.hidden_size = 16;
  c.input_size = 16;
  c.dropout = 0.0;
  c.vocab_size = tok.vocab.size();
  c.max_len = 48;
  c.alt = true;

  TrainOptions to;
  to.lr = 0.02;
  to.batch_size = 8;
  to.epochs = 4;
  to.patience = 0;
  to.seed = 4;

  Model m(c, {{"sgns", 8}}, tok, 4);
  const MultilingualRun run =
      train_multilingual(std::move(m), all, all, {}, to);
  require(run.report.rows.size() == 2,
          "expected one row per language, got " +
              std::to_string(run.report.rows.size()));
  int64_t total = 0;
  for (const auto& row : run.report.rows) total += row.count;
  require(total == int64_t(all.size()),
          "row counts sum to " + std::to_string(total) + ", testset has " +
              std::to_string(all.size()));
  require(run.report.rows[0].language == "en" &&
              run.report.rows[1].language == "ru",
          "rows are not per-language");

  // One language, ALT off: the multilingual wrapper must add nothing.
  std::vector<GlossEntry> en_only;
  for (const GlossEntry& e : all) {
    if (e.language == "en") en_only.push_back(e);
  }
  EncoderConfig plain = c;
  plain.alt = false;
  const TrainResult mono =
      train_model(Model(plain, {{"sgns", 8}}, tok, 4), en_only, {}, to);
  const TrainResult wrapped =
      train_multilingual(Model(plain, {{"sgns", 8}}, tok, 4), en_only,
                         en_only, {}, to)
          .result;
  const double a = mono.log.back().task_loss.at("sgns");
  const double b = wrapped.log.back().task_loss.at("sgns");
  require(std::abs(a - b) <= 1e-9,
          "monolingual final loss " + fmt(a) + " vs wrapper " + fmt(b));
  return "2x16 entries partitioned, mono gap " + fmt(std::abs(a - b));
}

// --------------------------------------------------------------------------
// 8. Residual-cutting: changes the Transformer, rejected elsewhere.

std::string criterion_residual_cut() {
  EncoderConfig c;
  c.kind = EncoderKind::kTransformer;
  c.num_layers = 2;
  c.hidden_size = 8;
  c.input_size = 8;
  c.dropout = 0.0;
  c.num_heads = 2;
  c.vocab_size = 20;
  c.max_len = 8;

  EncoderConfig cut = c;
  cut.residual_cut_layer = 0;

  const std::vector<int> ids = {2, 7, 11, 4, 9};
  const Model base(c, {{"sgns", 4}}, TokenizerModel{}, 9);
  const Model carved(cut, {{"sgns", 4}}, TokenizerModel{}, 9);
  const std::vector<double> a = base.encode_gloss(ids).data();
  const std::vector<double> b = carved.encode_gloss(ids).data();
  require(a != b, "cutting the residuals changed nothing");

  EncoderConfig bad;
  bad.kind = EncoderKind::kLstm;
  bad.vocab_size = 20;
  bad.residual_cut_layer = 0;
  bool rejected = false;
  try {
    bad.validate();
  } catch (const std::exception& e) {
    rejected = std::string(e.what()).find("transformer") != std::string::npos;
  }
  require(rejected, "residual cut on a recurrent stack was not rejected");
  return "forward differs, non-transformer rejected";
}

}  // namespace

int main(int argc, char** argv) {
  if (argc < 2) {
    std::fprintf(stderr, "usage: acceptance <path-to-rdforge-binary>\n");
    return 2;
  }
  g_binary = argv[1];
  g_scratch = fs::temp_directory_path() / "rdforge_acceptance";
  fs::create_directories(g_scratch);

  struct Criterion {
    int id;
    const char* title;
    std::function<std::string()> run;
  };
  const std::vector<Criterion> criteria = {
      {1, "gradient suite (ops 1e-4, encoders 1e-3, < 60s)",
       criterion_gradients},
      {2, "loss-weight oracle (closed form 1e-12, sum 1e-9)", criterion_dwa},
      {3, "tokenizer oracles (recount, hand table, exhaustive viterbi)",
       criterion_tokenizers},
      {4, "rank oracle (exact vs O(N^2) loop)", criterion_rank},
      {5, "pipeline overfit (COS >= 0.99, MSE <= 1e-2, < 5 min)",
       criterion_overfit},
      {6, "parameter parity (bidirectional within 1% of reference)",
       criterion_parity},
      {7, "multilingual plumbing (per-language rows, wrapper neutrality)",
       criterion_multilingual},
      {8, "residual cutting (changes transformer, rejected elsewhere)",
       criterion_residual_cut},
      {9, "reproducibility (rerun is bitwise identical)",
       criterion_reproducibility},
  };

  int failures = 0;
  for (const Criterion& c : criteria) {
    std::string detail;
    bool ok = true;
    try {
      detail = c.run();
    } catch (const std::exception& e) {
      ok = false;
      detail = e.what();
    }
    if (!ok) ++failures;
    std::cout << (ok ? "PASS" : "FAIL") << " " << c.id << ": " << c.title
              << (detail.empty() ? "" : " -- ") << detail << "\n";
    std::cout.flush();
  }
  if (failures == 0) {
    std::cout << "all 9 criteria passed\n";
  } else {
    std::cout << failures << " criteria failed\n";
  }
  return failures == 0 ? 0 : 1;
}
