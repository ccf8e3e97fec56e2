#include "rdforge/tokenizer.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <set>
#include <sstream>
#include <stdexcept>

#include <nlohmann/json.hpp>

#include "rdforge/text.hpp"

namespace rdforge {

namespace {

const char* kReservedTokens[4] = {"[PAD]", "[UNK]", "[CLS]", "[SEP]"};

std::string lang_token(const std::string& code) { return "[LANG:" + code + "]"; }

std::vector<std::string> sorted_unique(std::vector<std::string> v) {
  std::sort(v.begin(), v.end());
  v.erase(std::unique(v.begin(), v.end()), v.end());
  return v;
}

}  // namespace

Vocabulary::Vocabulary() : Vocabulary(std::vector<std::string>{}) {}

Vocabulary::Vocabulary(const std::vector<std::string>& languages)
    : languages_(sorted_unique(languages)) {
  for (const char* t : kReservedTokens) add(t);
  for (const std::string& code : languages_) add(lang_token(code));
}

int Vocabulary::add(const std::string& token) {
  const int id = static_cast<int>(id_to_token_.size());
  if (!token_to_id_.emplace(token, id).second) {
    throw std::runtime_error("vocabulary: duplicate token \"" + token + "\"");
  }
  id_to_token_.push_back(token);
  return id;
}

bool Vocabulary::contains(const std::string& token) const {
  return token_to_id_.count(token) != 0;
}

int Vocabulary::id(const std::string& token) const {
  auto it = token_to_id_.find(token);
  return it == token_to_id_.end() ? -1 : it->second;
}

const std::string& Vocabulary::token(int id) const {
  if (id < 0 || id >= size()) {
    throw std::runtime_error("vocabulary: token id " + std::to_string(id) +
                             " out of range [0," + std::to_string(size()) + ")");
  }
  return id_to_token_[id];
}

int Vocabulary::lang_id(const std::string& code) const {
  return id(lang_token(code));
}

const char* tokenizer_kind_name(TokenizerKind kind) {
  switch (kind) {
    case TokenizerKind::kBpe: return "bpe";
    case TokenizerKind::kWordPiece: return "wordpiece";
    case TokenizerKind::kUlm: return "ulm";
  }
  return "?";
}

TokenizerKind tokenizer_kind_from_name(const std::string& name) {
  if (name == "bpe") return TokenizerKind::kBpe;
  if (name == "wordpiece") return TokenizerKind::kWordPiece;
  if (name == "ulm") return TokenizerKind::kUlm;
  throw std::runtime_error("tokenizer: unknown kind \"" + name + "\"");
}

WordCounts build_word_counts(const std::vector<std::string>& texts) {
  WordCounts counts;
  for (const std::string& t : texts) {
    for (const std::string& w : text::pretokenize(t)) counts[w] += 1;
  }
  return counts;
}

// ---------------------------------------------------------------------------
// Shared merge-training machinery (BPE and WordPiece).

namespace {

using SymPair = std::pair<std::string, std::string>;

struct MergeCorpus {
  std::vector<std::vector<std::string>> words;  // current segmentation
  std::vector<int64_t> freqs;
  std::map<SymPair, int64_t> pair_freq;
  std::map<SymPair, std::set<size_t>> pair_words;

  void add_word_pairs(size_t w, int64_t sign) {
    const auto& syms = words[w];
    for (size_t i = 0; i + 1 < syms.size(); ++i) {
      const SymPair p{syms[i], syms[i + 1]};
      pair_freq[p] += sign * freqs[w];
      if (sign > 0) {
        pair_words[p].insert(w);
      }
    }
    if (sign < 0) {
      for (size_t i = 0; i + 1 < syms.size(); ++i) {
        const SymPair p{syms[i], syms[i + 1]};
        if (pair_freq[p] == 0) {
          pair_freq.erase(p);
          pair_words.erase(p);
        }
      }
    }
  }

  // Takes the pair by value: callers hand in references into pair_freq, and
  // this routine erases nodes from it.
  void apply_merge(const SymPair pair, const std::string& merged) {
    auto it = pair_words.find(pair);
    if (it == pair_words.end()) return;
    const std::vector<size_t> affected(it->second.begin(), it->second.end());
    for (size_t w : affected) {
      add_word_pairs(w, -1);
      std::vector<std::string> out;
      const auto& syms = words[w];
      size_t i = 0;
      while (i < syms.size()) {
        if (i + 1 < syms.size() && syms[i] == pair.first &&
            syms[i + 1] == pair.second) {
          out.push_back(merged);
          i += 2;
        } else {
          out.push_back(syms[i]);
          ++i;
        }
      }
      words[w] = std::move(out);
      add_word_pairs(w, +1);
    }
    pair_freq.erase(pair);
    pair_words.erase(pair);
  }
};

std::string strip_marker(const std::string& sym) {
  return sym.rfind("##", 0) == 0 ? sym.substr(2) : sym;
}

void check_target(const char* op, int target, int reserved, int alphabet) {
  if (target < reserved + alphabet) {
    throw std::runtime_error(std::string(op) + ": target vocab " +
                             std::to_string(target) + " below alphabet " +
                             std::to_string(alphabet) + " + reserved " +
                             std::to_string(reserved));
  }
}

void check_corpus(const char* op, const WordCounts& corpus) {
  if (corpus.empty()) {
    throw std::runtime_error(std::string(op) + ": empty corpus");
  }
  for (const auto& [word, freq] : corpus) {
    if (word.empty() || freq <= 0) {
      throw std::runtime_error(std::string(op) +
                               ": corpus entries need nonempty words and "
                               "positive frequencies");
    }
  }
}

}  // namespace

TokenizerModel train_bpe(const WordCounts& corpus, int target_vocab_size,
                         const std::vector<std::string>& languages) {
  check_corpus("train_bpe", corpus);

  std::set<std::string> alphabet;
  MergeCorpus mc;
  for (const auto& [word, freq] : corpus) {
    auto chars = text::utf8_chars(word);
    alphabet.insert(chars.begin(), chars.end());
    mc.words.push_back(std::move(chars));
    mc.freqs.push_back(freq);
  }

  TokenizerModel model;
  model.kind = TokenizerKind::kBpe;
  model.vocab = Vocabulary(languages);
  check_target("train_bpe", target_vocab_size, model.vocab.num_reserved(),
               static_cast<int>(alphabet.size()));
  for (const std::string& c : alphabet) model.vocab.add(c);

  for (size_t w = 0; w < mc.words.size(); ++w) mc.add_word_pairs(w, +1);

  while (model.vocab.size() < target_vocab_size) {
    const SymPair* best = nullptr;
    int64_t best_freq = 0;
    std::string best_merged;
    for (const auto& [pair, freq] : mc.pair_freq) {
      std::string merged = pair.first + pair.second;
      if (best == nullptr || freq > best_freq ||
          (freq == best_freq &&
           (merged < best_merged ||
            (merged == best_merged && pair.first < best->first)))) {
        best = &pair;
        best_freq = freq;
        best_merged = std::move(merged);
      }
    }
    if (best == nullptr || best_freq < 2) break;

    model.merges.push_back(*best);
    if (!model.vocab.contains(best_merged)) model.vocab.add(best_merged);
    mc.apply_merge(*best, best_merged);
  }

  model.max_token_cp = 1;
  for (int id = model.vocab.num_reserved(); id < model.vocab.size(); ++id) {
    model.max_token_cp = std::max(
        model.max_token_cp,
        static_cast<int>(text::utf8_chars(model.vocab.token(id)).size()));
  }
  return model;
}

TokenizerModel train_wordpiece(const WordCounts& corpus, int target_vocab_size,
                               const std::vector<std::string>& languages) {
  check_corpus("train_wordpiece", corpus);

  std::set<std::string> alphabet;  // marked forms that occur in the corpus
  MergeCorpus mc;
  for (const auto& [word, freq] : corpus) {
    auto chars = text::utf8_chars(word);
    for (size_t i = 1; i < chars.size(); ++i) chars[i] = "##" + chars[i];
    alphabet.insert(chars.begin(), chars.end());
    mc.words.push_back(std::move(chars));
    mc.freqs.push_back(freq);
  }

  TokenizerModel model;
  model.kind = TokenizerKind::kWordPiece;
  model.vocab = Vocabulary(languages);
  check_target("train_wordpiece", target_vocab_size, model.vocab.num_reserved(),
               static_cast<int>(alphabet.size()));
  for (const std::string& c : alphabet) model.vocab.add(c);

  for (size_t w = 0; w < mc.words.size(); ++w) mc.add_word_pairs(w, +1);

  while (model.vocab.size() < target_vocab_size) {
    // Token frequencies under the current segmentation, for the score
    // denominator.
    std::map<std::string, int64_t> sym_freq;
    for (size_t w = 0; w < mc.words.size(); ++w) {
      for (const std::string& s : mc.words[w]) sym_freq[s] += mc.freqs[w];
    }

    // score(a,b) = freq(ab) / (freq(a) * freq(b)); exact comparison via
    // cross-multiplication to keep ties honest.
    const SymPair* best = nullptr;
    int64_t best_num = 0, best_den = 1;
    std::string best_merged;
    for (const auto& [pair, freq] : mc.pair_freq) {
      if (freq < 2) continue;
      const int64_t den = sym_freq[pair.first] * sym_freq[pair.second];
      std::string merged = pair.first + strip_marker(pair.second);
      const auto lhs = static_cast<__int128>(freq) * best_den;
      const auto rhs = static_cast<__int128>(best_num) * den;
      if (best == nullptr || lhs > rhs ||
          (lhs == rhs &&
           (merged < best_merged ||
            (merged == best_merged && pair.first < best->first)))) {
        best = &pair;
        best_num = freq;
        best_den = den;
        best_merged = std::move(merged);
      }
    }
    if (best == nullptr) break;

    if (!model.vocab.contains(best_merged)) model.vocab.add(best_merged);
    mc.apply_merge(*best, best_merged);
  }

  model.max_token_cp = 1;
  for (int id = model.vocab.num_reserved(); id < model.vocab.size(); ++id) {
    model.max_token_cp = std::max(
        model.max_token_cp,
        static_cast<int>(
            text::utf8_chars(strip_marker(model.vocab.token(id))).size()));
  }
  return model;
}

// ---------------------------------------------------------------------------
// Unigram LM.

namespace {

constexpr double kNoCountLogProb = -1e9;   // pruned to zero mass, kept finite
constexpr double kUnkCharLogProb = -1e12;  // encode-time fallback only

struct ViterbiResult {
  double logprob = 0.0;
  std::vector<int> ids;
};

// Best segmentation of chars[0..n) into vocabulary tokens. skip_id masks one
// token out (for prune scoring); allow_unk adds a per-character [UNK]
// fallback so encoding is total.
ViterbiResult viterbi(const std::vector<std::string>& chars,
                      const Vocabulary& vocab, const std::vector<double>& scores,
                      int max_token_cp, int skip_id, bool allow_unk) {
  const size_t n = chars.size();
  const double kNegInf = -std::numeric_limits<double>::infinity();
  std::vector<double> dp(n + 1, kNegInf);
  std::vector<int> back_tok(n + 1, -1);
  std::vector<size_t> back_pos(n + 1, 0);
  dp[0] = 0.0;

  std::string piece;
  for (size_t end = 1; end <= n; ++end) {
    const size_t lo = end > static_cast<size_t>(max_token_cp)
                          ? end - static_cast<size_t>(max_token_cp)
                          : 0;
    for (size_t start = lo; start < end; ++start) {
      if (dp[start] == kNegInf) continue;
      piece.clear();
      for (size_t i = start; i < end; ++i) piece += chars[i];
      const int id = vocab.id(piece);
      if (id < 0 || id == skip_id || vocab.is_reserved(id)) continue;
      const double cand = dp[start] + scores[id];
      if (cand > dp[end]) {
        dp[end] = cand;
        back_tok[end] = id;
        back_pos[end] = start;
      }
    }
    if (allow_unk && dp[end - 1] != kNegInf &&
        dp[end - 1] + kUnkCharLogProb > dp[end]) {
      dp[end] = dp[end - 1] + kUnkCharLogProb;
      back_tok[end] = Vocabulary::kUnk;
      back_pos[end] = end - 1;
    }
  }

  ViterbiResult res;
  res.logprob = dp[n];
  for (size_t pos = n; pos > 0; pos = back_pos[pos]) {
    res.ids.push_back(back_tok[pos]);
  }
  std::reverse(res.ids.begin(), res.ids.end());
  return res;
}

}  // namespace

TokenizerModel train_ulm(const WordCounts& corpus, int target_vocab_size,
                         const std::vector<std::string>& languages,
                         const UlmOptions& options) {
  check_corpus("train_ulm", corpus);
  if (options.seed_multiplier < 2) {
    throw std::runtime_error("train_ulm: seed_multiplier must be >= 2");
  }
  if (!(options.prune_fraction > 0.0 && options.prune_fraction < 1.0)) {
    throw std::runtime_error("train_ulm: prune_fraction must be in (0,1)");
  }

  std::vector<std::vector<std::string>> words;
  std::vector<int64_t> freqs;
  std::set<std::string> alphabet;
  std::map<std::string, int64_t> substr_freq;
  for (const auto& [word, freq] : corpus) {
    auto chars = text::utf8_chars(word);
    alphabet.insert(chars.begin(), chars.end());
    for (size_t i = 0; i < chars.size(); ++i) {
      std::string sub = chars[i];
      substr_freq[sub] += freq;
      for (size_t j = i + 1; j < chars.size(); ++j) {
        sub += chars[j];
        substr_freq[sub] += freq;
      }
    }
    words.push_back(std::move(chars));
    freqs.push_back(freq);
  }

  Vocabulary base(languages);
  check_target("train_ulm", target_vocab_size, base.num_reserved(),
               static_cast<int>(alphabet.size()));

  // Seed: every character plus the most frequent longer substrings, up to
  // target * multiplier tokens.
  std::vector<std::pair<std::string, int64_t>> candidates;
  for (const auto& [sub, freq] : substr_freq) {
    if (text::utf8_chars(sub).size() > 1) candidates.emplace_back(sub, freq);
  }
  std::sort(candidates.begin(), candidates.end(), [](const auto& a, const auto& b) {
    if (a.second != b.second) return a.second > b.second;
    return a.first < b.first;
  });

  const int64_t seed_size =
      static_cast<int64_t>(target_vocab_size) * options.seed_multiplier;
  std::vector<std::string> learned;  // creation order
  for (const auto& [sub, freq] : candidates) {
    if (base.num_reserved() + static_cast<int64_t>(alphabet.size()) +
            static_cast<int64_t>(learned.size()) >=
        seed_size) {
      break;
    }
    learned.push_back(sub);
  }

  auto rebuild = [&](const std::vector<std::string>& kept) {
    Vocabulary v(languages);
    for (const std::string& c : alphabet) v.add(c);
    for (const std::string& t : kept) v.add(t);
    return v;
  };

  Vocabulary vocab = rebuild(learned);
  int max_cp = 1;
  for (const std::string& t : learned) {
    max_cp = std::max(max_cp, static_cast<int>(text::utf8_chars(t).size()));
  }

  // Initial scores from raw substring frequencies.
  std::vector<double> scores(vocab.size(), kNoCountLogProb);
  {
    double total = 0.0;
    for (int id = vocab.num_reserved(); id < vocab.size(); ++id) {
      total += static_cast<double>(substr_freq[vocab.token(id)]);
    }
    for (int id = vocab.num_reserved(); id < vocab.size(); ++id) {
      const auto f = substr_freq[vocab.token(id)];
      if (f > 0) scores[id] = std::log(static_cast<double>(f) / total);
    }
  }

  while (true) {
    // Viterbi-EM under the current vocabulary.
    for (int iter = 0; iter < std::max(1, options.em_iterations); ++iter) {
      std::vector<int64_t> counts(vocab.size(), 0);
      int64_t total = 0;
      for (size_t w = 0; w < words.size(); ++w) {
        const auto res =
            viterbi(words[w], vocab, scores, max_cp, -1, false);
        for (int id : res.ids) {
          counts[id] += freqs[w];
          total += freqs[w];
        }
      }
      for (int id = 0; id < vocab.size(); ++id) {
        scores[id] = counts[id] > 0
                         ? std::log(static_cast<double>(counts[id]) /
                                    static_cast<double>(total))
                         : kNoCountLogProb;
      }
    }

    if (vocab.size() <= target_vocab_size) break;

    // Loss increase of dropping each learned token: re-segment exactly the
    // words whose best path uses it, with the token masked out.
    std::map<std::string, double> loss_increase;
    for (const std::string& t : learned) loss_increase[t] = 0.0;
    for (size_t w = 0; w < words.size(); ++w) {
      const auto best = viterbi(words[w], vocab, scores, max_cp, -1, false);
      std::set<int> used(best.ids.begin(), best.ids.end());
      for (int id : used) {
        const std::string& tok = vocab.token(id);
        if (!loss_increase.count(tok)) continue;  // single chars stay
        const auto without =
            viterbi(words[w], vocab, scores, max_cp, id, false);
        loss_increase[tok] +=
            static_cast<double>(freqs[w]) * (best.logprob - without.logprob);
      }
    }

    std::vector<std::string> by_increase = learned;
    std::sort(by_increase.begin(), by_increase.end(),
              [&](const std::string& a, const std::string& b) {
                const double da = loss_increase[a], db = loss_increase[b];
                if (da != db) return da < db;
                return a < b;
              });
    const auto n_candidates = static_cast<int64_t>(by_increase.size());
    int64_t k = std::max<int64_t>(
        1, static_cast<int64_t>(
               std::floor(options.prune_fraction * n_candidates)));
    k = std::min(k, static_cast<int64_t>(vocab.size() - target_vocab_size));
    std::set<std::string> dropped(by_increase.begin(), by_increase.begin() + k);

    std::vector<std::string> kept;
    for (const std::string& t : learned) {
      if (!dropped.count(t)) kept.push_back(t);
    }
    learned = std::move(kept);

    std::vector<double> old_scores = std::move(scores);
    Vocabulary old_vocab = std::move(vocab);
    vocab = rebuild(learned);
    scores.assign(vocab.size(), kNoCountLogProb);
    for (int id = 0; id < vocab.size(); ++id) {
      const int old_id = old_vocab.id(vocab.token(id));
      scores[id] = old_scores[old_id];
    }
    max_cp = 1;
    for (const std::string& t : learned) {
      max_cp = std::max(max_cp, static_cast<int>(text::utf8_chars(t).size()));
    }
  }

  TokenizerModel model;
  model.kind = TokenizerKind::kUlm;
  model.vocab = std::move(vocab);
  model.scores = std::move(scores);
  model.max_token_cp = max_cp;
  return model;
}

// ---------------------------------------------------------------------------
// Encode / decode.

namespace {

void encode_word_bpe(const TokenizerModel& model,
                     const std::vector<std::string>& chars,
                     std::vector<int>& out) {
  std::vector<std::string> syms = chars;
  for (const auto& [a, b] : model.merges) {
    std::vector<std::string> next;
    size_t i = 0;
    while (i < syms.size()) {
      if (i + 1 < syms.size() && syms[i] == a && syms[i + 1] == b) {
        next.push_back(a + b);
        i += 2;
      } else {
        next.push_back(syms[i]);
        ++i;
      }
    }
    syms = std::move(next);
  }
  for (const std::string& s : syms) {
    const int id = model.vocab.id(s);
    out.push_back(id < 0 ? Vocabulary::kUnk : id);
  }
}

void encode_word_wordpiece(const TokenizerModel& model,
                           const std::vector<std::string>& chars,
                           std::vector<int>& out) {
  std::vector<int> pieces;
  size_t pos = 0;
  while (pos < chars.size()) {
    const size_t remaining = chars.size() - pos;
    const auto max_len =
        std::min<size_t>(remaining, static_cast<size_t>(model.max_token_cp));
    int match = -1;
    size_t match_len = 0;
    for (size_t len = max_len; len >= 1; --len) {
      std::string piece = pos > 0 ? "##" : "";
      for (size_t i = 0; i < len; ++i) piece += chars[pos + i];
      const int id = model.vocab.id(piece);
      if (id >= 0) {
        match = id;
        match_len = len;
        break;
      }
    }
    if (match < 0) {
      out.push_back(Vocabulary::kUnk);  // whole word is unsegmentable
      return;
    }
    pieces.push_back(match);
    pos += match_len;
  }
  out.insert(out.end(), pieces.begin(), pieces.end());
}

void encode_word_ulm(const TokenizerModel& model,
                     const std::vector<std::string>& chars,
                     std::vector<int>& out) {
  const auto res = viterbi(chars, model.vocab, model.scores,
                           model.max_token_cp, -1, true);
  out.insert(out.end(), res.ids.begin(), res.ids.end());
}

}  // namespace

std::vector<int> TokenizerModel::encode(const std::string& text_in,
                                        const std::string& language,
                                        bool prepend_cls) const {
  std::vector<int> out;
  if (!language.empty()) {
    const int lid = vocab.lang_id(language);
    if (lid < 0) {
      throw std::runtime_error("encode: language \"" + language +
                               "\" is not configured");
    }
    out.push_back(lid);
  }
  if (prepend_cls) out.push_back(Vocabulary::kCls);

  for (const std::string& word : text::pretokenize(text_in)) {
    const auto chars = text::utf8_chars(word);
    switch (kind) {
      case TokenizerKind::kBpe: encode_word_bpe(*this, chars, out); break;
      case TokenizerKind::kWordPiece:
        encode_word_wordpiece(*this, chars, out);
        break;
      case TokenizerKind::kUlm: encode_word_ulm(*this, chars, out); break;
    }
  }
  return out;
}

std::string TokenizerModel::decode(const std::vector<int>& ids) const {
  std::string out;
  bool in_word = false;
  for (const int id : ids) {
    const std::string& tok = vocab.token(id);  // range check
    if (vocab.is_reserved(id)) continue;
    if (kind == TokenizerKind::kWordPiece) {
      if (tok.rfind("##", 0) == 0) {
        out += tok.substr(2);
      } else {
        if (in_word) out += ' ';
        out += tok;
      }
      in_word = true;
    } else {
      out += tok;
    }
  }
  return out;
}

// ---------------------------------------------------------------------------
// Serialization.

std::string TokenizerModel::to_json() const {
  nlohmann::json j;
  j["kind"] = tokenizer_kind_name(kind);
  j["vocab"] = vocab.tokens();
  j["languages"] = vocab.languages();
  if (kind == TokenizerKind::kBpe) {
    auto arr = nlohmann::json::array();
    for (const auto& [a, b] : merges) arr.push_back({a, b});
    j["merges"] = std::move(arr);
  }
  if (kind == TokenizerKind::kUlm) j["scores"] = scores;
  return j.dump(2) + "\n";
}

TokenizerModel TokenizerModel::from_json(const std::string& text_in) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(text_in);
  } catch (const nlohmann::json::exception& e) {
    throw std::runtime_error(std::string("tokenizer: malformed JSON: ") +
                             e.what());
  }
  if (!j.is_object() || !j.contains("kind") || !j.contains("vocab") ||
      !j.contains("languages")) {
    throw std::runtime_error(
        "tokenizer: document needs kind, vocab and languages");
  }

  TokenizerModel model;
  model.kind = tokenizer_kind_from_name(j["kind"].get<std::string>());

  const auto languages = j["languages"].get<std::vector<std::string>>();
  const auto tokens = j["vocab"].get<std::vector<std::string>>();
  Vocabulary expected(languages);
  if (static_cast<int>(tokens.size()) < expected.num_reserved()) {
    throw std::runtime_error("tokenizer: vocabulary smaller than the reserved block");
  }
  for (int i = 0; i < expected.num_reserved(); ++i) {
    if (tokens[i] != expected.token(i)) {
      throw std::runtime_error("tokenizer: reserved token at id " +
                               std::to_string(i) + " is \"" + tokens[i] +
                               "\", expected \"" + expected.token(i) + "\"");
    }
  }
  model.vocab = Vocabulary(languages);
  for (size_t i = expected.num_reserved(); i < tokens.size(); ++i) {
    model.vocab.add(tokens[i]);  // throws on duplicates
  }

  if (model.kind == TokenizerKind::kBpe) {
    if (!j.contains("merges") || !j["merges"].is_array()) {
      throw std::runtime_error("tokenizer: bpe model needs a merges list");
    }
    std::set<std::string> derivable;
    for (const std::string& t : model.vocab.tokens()) {
      if (text::utf8_chars(t).size() == 1) derivable.insert(t);
    }
    for (const auto& m : j["merges"]) {
      if (!m.is_array() || m.size() != 2) {
        throw std::runtime_error("tokenizer: each merge must be a [left,right] pair");
      }
      const auto a = m[0].get<std::string>();
      const auto b = m[1].get<std::string>();
      if (!derivable.count(a) || !derivable.count(b)) {
        throw std::runtime_error("tokenizer: merge (" + a + "," + b +
                                 ") references an underived token");
      }
      if (!model.vocab.contains(a + b)) {
        throw std::runtime_error("tokenizer: merge result \"" + a + b +
                                 "\" missing from the vocabulary");
      }
      derivable.insert(a + b);
      model.merges.emplace_back(a, b);
    }
  }

  if (model.kind == TokenizerKind::kUlm) {
    if (!j.contains("scores") || !j["scores"].is_array() ||
        j["scores"].size() != tokens.size()) {
      throw std::runtime_error(
          "tokenizer: ulm model needs one score per vocabulary entry");
    }
    model.scores = j["scores"].get<std::vector<double>>();
    double total = 0.0;
    for (const double s : model.scores) {
      if (!std::isfinite(s)) {
        throw std::runtime_error("tokenizer: non-finite token score");
      }
      total += std::exp(s);
    }
    if (std::abs(total - 1.0) > 1e-6) {
      throw std::runtime_error(
          "tokenizer: token probabilities sum to " + std::to_string(total) +
          ", expected 1");
    }
  }

  model.max_token_cp = 1;
  for (int id = model.vocab.num_reserved(); id < model.vocab.size(); ++id) {
    const std::string& t = model.vocab.token(id);
    const std::string content =
        model.kind == TokenizerKind::kWordPiece ? strip_marker(t) : t;
    model.max_token_cp = std::max(
        model.max_token_cp, static_cast<int>(text::utf8_chars(content).size()));
  }
  return model;
}

void TokenizerModel::save(const std::string& path) const {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("tokenizer: cannot write " + path);
  out << to_json();
  if (!out) throw std::runtime_error("tokenizer: write failed for " + path);
}

TokenizerModel TokenizerModel::load(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("tokenizer: cannot read " + path);
  std::stringstream ss;
  ss << in.rdbuf();
  return from_json(ss.str());
}

}  // namespace rdforge
