#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "rdforge/dataio.hpp"
#include "rdforge/encoder.hpp"

namespace rdforge::metrics {

// Mean of squared componentwise differences.
double mse(std::span<const double> pred, std::span<const double> ref);

// dot / (|pred| * |ref|). A zero-magnitude side yields 0 instead of an
// error — degenerate predictions early in training must not abort an
// evaluation — and bumps *zero_warnings when given.
double cos(std::span<const double> pred, std::span<const double> ref,
           int64_t* zero_warnings = nullptr);

// Normalized cosine rank per item: the fraction of other references that
// match pred_i more closely than its own reference does,
//   r_i = |{ j != i : cos(pred_i, ref_j) > cos(pred_i, ref_i) }| / (N - 1).
// Strict comparison: ties do not count against the reference. Needs N >= 2.
std::vector<double> rank_scores(const std::vector<std::vector<double>>& preds,
                                const std::vector<std::vector<double>>& refs);

struct EvalRow {
  std::string language;
  std::string task;
  int64_t count = 0;
  double mse = 0.0;
  double cos = 0.0;
  double rank = 0.0;
};

struct EvalReport {
  std::vector<EvalRow> rows;  // sorted by (language, task)
  int64_t zero_cos_warnings = 0;

  std::string to_json() const;  // stable bytes for a given report
  std::string to_text() const;  // aligned columns
  std::string to_csv() const;   // one row per (language, task, metric)
};

// Runs the model over the testset and aggregates the three metrics per
// (language, task). Tasks with no targets in a group are omitted, never
// zero-filled; a group with a single item reports rank 0 (no competitors).
EvalReport evaluate(const Model& model, const std::vector<GlossEntry>& testset);

}  // namespace rdforge::metrics
