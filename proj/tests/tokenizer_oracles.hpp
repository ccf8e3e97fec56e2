// Brute-force references for the subword trainers. These recount everything
// from scratch each round and enumerate segmentations exhaustively, trading
// all efficiency for obviousness.
#pragma once

#include <cmath>
#include <cstdint>
#include <functional>
#include <limits>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <utility>
#include <vector>

#include "rdforge/text.hpp"
#include "rdforge/tokenizer.hpp"

namespace oracles {

using Pair = std::pair<std::string, std::string>;

inline std::vector<std::string> merge_once(const std::vector<std::string>& syms,
                                           const Pair& p,
                                           const std::string& merged) {
  std::vector<std::string> out;
  size_t i = 0;
  while (i < syms.size()) {
    if (i + 1 < syms.size() && syms[i] == p.first && syms[i + 1] == p.second) {
      out.push_back(merged);
      i += 2;
    } else {
      out.push_back(syms[i]);
      ++i;
    }
  }
  return out;
}

struct NaiveMergeResult {
  std::vector<Pair> merges;
  std::map<std::string, std::vector<std::string>> segs;  // word -> final pieces
  std::set<std::string> vocab;                           // non-reserved tokens
};

// Plain BPE: recount all adjacent pairs every round, merge the most frequent
// (ties: smaller merged string, then smaller left symbol), stop below
// frequency 2 or at the target size.
inline NaiveMergeResult naive_bpe(const rdforge::WordCounts& corpus, int target,
                                  int num_reserved = 4) {
  NaiveMergeResult r;
  for (const auto& [w, f] : corpus) {
    r.segs[w] = rdforge::text::utf8_chars(w);
    for (const auto& c : r.segs[w]) r.vocab.insert(c);
  }
  while (static_cast<int>(r.vocab.size()) + num_reserved < target) {
    std::map<Pair, int64_t> pf;
    for (const auto& [w, syms] : r.segs) {
      for (size_t i = 0; i + 1 < syms.size(); ++i) {
        pf[{syms[i], syms[i + 1]}] += corpus.at(w);
      }
    }
    std::optional<Pair> best;
    int64_t best_f = 0;
    for (const auto& [p, f] : pf) {
      const std::string m = p.first + p.second;
      const std::string bm = best ? best->first + best->second : "";
      if (!best || f > best_f ||
          (f == best_f && (m < bm || (m == bm && p.first < best->first)))) {
        best = p;
        best_f = f;
      }
    }
    if (!best || best_f < 2) break;
    const std::string merged = best->first + best->second;
    r.merges.push_back(*best);
    r.vocab.insert(merged);
    for (auto& [w, syms] : r.segs) syms = merge_once(syms, *best, merged);
  }
  return r;
}

// Plain WordPiece: same structure, choosing the pair that maximizes
// freq(ab)/(freq(a)*freq(b)), compared exactly via cross-multiplication.
inline NaiveMergeResult naive_wordpiece(const rdforge::WordCounts& corpus,
                                        int target, int num_reserved = 4) {
  NaiveMergeResult r;
  for (const auto& [w, f] : corpus) {
    auto chars = rdforge::text::utf8_chars(w);
    for (size_t i = 1; i < chars.size(); ++i) chars[i] = "##" + chars[i];
    r.segs[w] = chars;
    for (const auto& c : chars) r.vocab.insert(c);
  }
  auto strip = [](const std::string& s) {
    return s.rfind("##", 0) == 0 ? s.substr(2) : s;
  };
  while (static_cast<int>(r.vocab.size()) + num_reserved < target) {
    std::map<Pair, int64_t> pf;
    std::map<std::string, int64_t> sf;
    for (const auto& [w, syms] : r.segs) {
      for (size_t i = 0; i < syms.size(); ++i) {
        sf[syms[i]] += corpus.at(w);
        if (i + 1 < syms.size()) pf[{syms[i], syms[i + 1]}] += corpus.at(w);
      }
    }
    std::optional<Pair> best;
    int64_t bn = 0, bd = 1;
    std::string bm;
    for (const auto& [p, f] : pf) {
      if (f < 2) continue;
      const int64_t d = sf[p.first] * sf[p.second];
      const std::string m = p.first + strip(p.second);
      const auto lhs = static_cast<__int128>(f) * bd;
      const auto rhs = static_cast<__int128>(bn) * d;
      if (!best || lhs > rhs ||
          (lhs == rhs && (m < bm || (m == bm && p.first < best->first)))) {
        best = p;
        bn = f;
        bd = d;
        bm = m;
      }
    }
    if (!best) break;
    r.merges.push_back(*best);
    r.vocab.insert(bm);
    for (auto& [w, syms] : r.segs) syms = merge_once(syms, *best, bm);
  }
  return r;
}

struct ExhaustiveBest {
  double logprob = -std::numeric_limits<double>::infinity();
  std::vector<std::string> pieces;
  int num_best = 0;  // segmentations within 1e-12 of the max
};

// Max-probability segmentation by trying all 2^(n-1) cut patterns.
inline ExhaustiveBest exhaustive_best(
    const std::string& word,
    const std::function<std::optional<double>(const std::string&)>& score) {
  const auto chars = rdforge::text::utf8_chars(word);
  const size_t n = chars.size();
  ExhaustiveBest best;
  if (n == 0) return best;
  for (uint32_t mask = 0; mask < (1u << (n - 1)); ++mask) {
    double lp = 0.0;
    bool ok = true;
    std::vector<std::string> pieces;
    std::string piece;
    for (size_t i = 0; i < n && ok; ++i) {
      piece += chars[i];
      const bool cut = i + 1 == n || ((mask >> i) & 1u);
      if (cut) {
        const auto s = score(piece);
        if (!s) {
          ok = false;
        } else {
          lp += *s;
          pieces.push_back(piece);
          piece.clear();
        }
      }
    }
    if (!ok) continue;
    if (lp > best.logprob + 1e-12) {
      best.logprob = lp;
      best.pieces = std::move(pieces);
      best.num_best = 1;
    } else if (lp >= best.logprob - 1e-12) {
      best.num_best += 1;
    }
  }
  return best;
}

// Score lookup over a trained unigram model (reserved tokens excluded).
inline std::function<std::optional<double>(const std::string&)> ulm_scorer(
    const rdforge::TokenizerModel& model) {
  return [&model](const std::string& piece) -> std::optional<double> {
    const int id = model.vocab.id(piece);
    if (id < 0 || model.vocab.is_reserved(id)) return std::nullopt;
    return model.scores[id];
  };
}

// Viterbi corpus log-likelihood under a trained unigram model, computed with
// the exhaustive enumerator.
inline double ulm_corpus_loglik(const rdforge::TokenizerModel& model,
                                const rdforge::WordCounts& corpus) {
  double total = 0.0;
  const auto scorer = ulm_scorer(model);
  for (const auto& [w, f] : corpus) {
    total += static_cast<double>(f) * exhaustive_best(w, scorer).logprob;
  }
  return total;
}

}  // namespace oracles
