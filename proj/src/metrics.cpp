#include "rdforge/metrics.hpp"

#include <charconv>
#include <cmath>
#include <cstdio>
#include <map>
#include <stdexcept>

#include <nlohmann/json.hpp>

namespace rdforge::metrics {

namespace {

void check_dims(size_t a, size_t b, const char* op) {
  if (a != b) {
    throw std::runtime_error(std::string(op) + ": dim mismatch " +
                             std::to_string(a) + " vs " + std::to_string(b));
  }
}

std::string shortest(double v) {
  char buf[32];
  const auto res = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, res.ptr);
}

std::string fixed6(double v) {
  char buf[48];
  std::snprintf(buf, sizeof buf, "%.6f", v);
  return buf;
}

}  // namespace

double mse(std::span<const double> pred, std::span<const double> ref) {
  check_dims(pred.size(), ref.size(), "mse");
  if (pred.empty()) throw std::runtime_error("mse: empty vectors");
  double s = 0.0;
  for (size_t i = 0; i < pred.size(); ++i) {
    const double d = pred[i] - ref[i];
    s += d * d;
  }
  return s / static_cast<double>(pred.size());
}

double cos(std::span<const double> pred, std::span<const double> ref,
           int64_t* zero_warnings) {
  check_dims(pred.size(), ref.size(), "cos");
  if (pred.empty()) throw std::runtime_error("cos: empty vectors");
  double dot = 0.0, sp = 0.0, sr = 0.0;
  for (size_t i = 0; i < pred.size(); ++i) {
    dot += pred[i] * ref[i];
    sp += pred[i] * pred[i];
    sr += ref[i] * ref[i];
  }
  if (sp == 0.0 || sr == 0.0) {
    if (zero_warnings) ++*zero_warnings;
    return 0.0;
  }
  return dot / (std::sqrt(sp) * std::sqrt(sr));
}

std::vector<double> rank_scores(const std::vector<std::vector<double>>& preds,
                                const std::vector<std::vector<double>>& refs) {
  if (preds.size() != refs.size()) {
    throw std::runtime_error("rank_scores: got " +
                             std::to_string(preds.size()) + " predictions vs " +
                             std::to_string(refs.size()) + " references");
  }
  const size_t n = preds.size();
  if (n < 2) {
    throw std::runtime_error("rank_scores: needs at least 2 items");
  }
  std::vector<double> out(n);
  for (size_t i = 0; i < n; ++i) {
    const double own = cos(preds[i], refs[i]);
    int64_t beaten = 0;
    for (size_t j = 0; j < n; ++j) {
      if (j == i) continue;
      if (cos(preds[i], refs[j]) > own) ++beaten;
    }
    out[i] = static_cast<double>(beaten) / static_cast<double>(n - 1);
  }
  return out;
}

std::string EvalReport::to_json() const {
  nlohmann::json j;
  j["zero_cos_warnings"] = zero_cos_warnings;
  j["rows"] = nlohmann::json::array();
  for (const EvalRow& r : rows) {
    j["rows"].push_back({{"language", r.language},
                         {"task", r.task},
                         {"count", r.count},
                         {"mse", r.mse},
                         {"cos", r.cos},
                         {"rank", r.rank}});
  }
  return j.dump(2) + "\n";
}

std::string EvalReport::to_text() const {
  std::vector<std::vector<std::string>> cells = {
      {"language", "task", "count", "mse", "cos", "rank"}};
  for (const EvalRow& r : rows) {
    cells.push_back({r.language, r.task, std::to_string(r.count),
                     fixed6(r.mse), fixed6(r.cos), fixed6(r.rank)});
  }
  std::vector<size_t> width(6, 0);
  for (const auto& row : cells) {
    for (size_t c = 0; c < 6; ++c) width[c] = std::max(width[c], row[c].size());
  }
  std::string out;
  for (const auto& row : cells) {
    for (size_t c = 0; c < 6; ++c) {
      out += row[c];
      if (c + 1 < 6) out += std::string(width[c] - row[c].size() + 2, ' ');
    }
    out += "\n";
  }
  if (zero_cos_warnings > 0) {
    out += "warning: " + std::to_string(zero_cos_warnings) +
           " zero-vector cosine(s) counted as 0\n";
  }
  return out;
}

std::string EvalReport::to_csv() const {
  std::string out = "language,task,metric,value\n";
  for (const EvalRow& r : rows) {
    const std::string head = r.language + "," + r.task + ",";
    out += head + "count," + std::to_string(r.count) + "\n";
    out += head + "mse," + shortest(r.mse) + "\n";
    out += head + "cos," + shortest(r.cos) + "\n";
    out += head + "rank," + shortest(r.rank) + "\n";
  }
  return out;
}

EvalReport evaluate(const Model& model,
                    const std::vector<GlossEntry>& testset) {
  if (testset.empty()) {
    throw std::runtime_error("evaluate: empty testset");
  }
  struct Group {
    std::vector<std::vector<double>> preds, refs;
  };
  std::map<std::pair<std::string, std::string>, Group> groups;

  EvalReport report;
  for (const GlossEntry& e : testset) {
    const std::vector<int> ids = model.tokenizer.encode(
        e.gloss, model.config.alt ? e.language : "", true);
    const ad::Tensor v = model.encode_gloss(ids);
    for (const TaskHead& head : model.tasks) {
      int ti = -1;
      for (int t = 0; t < kNumTasks; ++t) {
        if (head.name == kTaskNames[t]) ti = t;
      }
      if (ti < 0) continue;  // datasets only ever carry the three known tasks
      const auto& target = e.task(ti);
      if (!target) continue;
      if (static_cast<int>(target->size()) != head.dim) {
        throw std::runtime_error(
            "evaluate: entry \"" + e.id + "\": " + head.name +
            " target dim " + std::to_string(target->size()) +
            ", model head expects " + std::to_string(head.dim));
      }
      Group& g = groups[{e.language, head.name}];
      g.preds.push_back(model.head_output(head.name, v).data());
      g.refs.push_back(*target);
    }
  }
  if (groups.empty()) {
    throw std::runtime_error("evaluate: no targets to evaluate");
  }

  for (const auto& [key, g] : groups) {
    EvalRow row;
    row.language = key.first;
    row.task = key.second;
    row.count = static_cast<int64_t>(g.preds.size());
    double mse_sum = 0.0, cos_sum = 0.0;
    for (size_t i = 0; i < g.preds.size(); ++i) {
      mse_sum += mse(g.preds[i], g.refs[i]);
      cos_sum += cos(g.preds[i], g.refs[i], &report.zero_cos_warnings);
    }
    row.mse = mse_sum / static_cast<double>(row.count);
    row.cos = cos_sum / static_cast<double>(row.count);
    if (row.count >= 2) {
      double rank_sum = 0.0;
      for (double r : rank_scores(g.preds, g.refs)) rank_sum += r;
      row.rank = rank_sum / static_cast<double>(row.count);
    } else {
      row.rank = 0.0;  // a single item has no competitors
    }
    report.rows.push_back(std::move(row));
  }
  return report;
}

}  // namespace rdforge::metrics
