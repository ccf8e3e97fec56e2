#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <utility>
#include <vector>

namespace rdforge {

// Token id layout, fixed for every trained vocabulary:
//   0 [PAD]  1 [UNK]  2 [CLS]  3 [SEP]
//   4.. one [LANG:xx] per configured language, sorted by code
//   then the base alphabet, sorted
//   then learned tokens in creation order
class Vocabulary {
 public:
  static constexpr int kPad = 0;
  static constexpr int kUnk = 1;
  static constexpr int kCls = 2;
  static constexpr int kSep = 3;

  Vocabulary();
  explicit Vocabulary(const std::vector<std::string>& languages);

  // Appends a new token at the next dense id. Duplicate tokens are an error.
  int add(const std::string& token);

  bool contains(const std::string& token) const;
  int id(const std::string& token) const;  // -1 when absent
  const std::string& token(int id) const;  // throws on out-of-range id
  int size() const { return static_cast<int>(id_to_token_.size()); }

  int lang_id(const std::string& code) const;  // -1 when not configured
  const std::vector<std::string>& languages() const { return languages_; }

  // [PAD]/[UNK]/[CLS]/[SEP] and the language tokens.
  bool is_reserved(int id) const { return id >= 0 && id < num_reserved(); }
  int num_reserved() const { return 4 + static_cast<int>(languages_.size()); }

  const std::vector<std::string>& tokens() const { return id_to_token_; }

 private:
  std::vector<std::string> id_to_token_;
  std::map<std::string, int> token_to_id_;
  std::vector<std::string> languages_;  // sorted codes
};

enum class TokenizerKind { kBpe, kWordPiece, kUlm };

const char* tokenizer_kind_name(TokenizerKind kind);
TokenizerKind tokenizer_kind_from_name(const std::string& name);

// A trained subword segmenter. Immutable once trained or loaded; encode and
// decode are const and safe to call from several threads.
struct TokenizerModel {
  TokenizerKind kind = TokenizerKind::kBpe;
  Vocabulary vocab;
  std::vector<std::pair<std::string, std::string>> merges;  // BPE, in order
  std::vector<double> scores;  // ULM log-probs, aligned with vocab ids

  // Lowercases, splits, and segments text. Output is
  // [LANG:xx]? [CLS]? piece-ids. Characters outside the trained alphabet map
  // to [UNK]: WordPiece replaces the whole unsegmentable word, BPE and ULM
  // substitute per character. A given language must be configured.
  std::vector<int> encode(const std::string& text,
                          const std::string& language = "",
                          bool prepend_cls = true) const;

  // Drops reserved tokens and fuses WordPiece "##" continuations. WordPiece
  // joins words with spaces; BPE and ULM concatenate pieces (word boundaries
  // are not represented in their id streams).
  std::string decode(const std::vector<int>& ids) const;

  std::string to_json() const;
  static TokenizerModel from_json(const std::string& text);
  void save(const std::string& path) const;
  static TokenizerModel load(const std::string& path);

  // Longest token length in code points, kept for the segmenters.
  int max_token_cp = 1;
};

using WordCounts = std::map<std::string, int64_t>;

// Pre-tokenizes each text and tallies the resulting words.
WordCounts build_word_counts(const std::vector<std::string>& texts);

// Greedy pair merging by raw pair frequency; stops at the target size or when
// the best pair occurs fewer than 2 times. Ties prefer the lexicographically
// smaller merged string, then the smaller left token.
TokenizerModel train_bpe(const WordCounts& corpus, int target_vocab_size,
                         const std::vector<std::string>& languages = {});

// Pair merging by score = freq(ab) / (freq(a) * freq(b)); non-initial pieces
// carry the "##" marker. Same stop and tie rules as train_bpe.
TokenizerModel train_wordpiece(const WordCounts& corpus, int target_vocab_size,
                               const std::vector<std::string>& languages = {});

struct UlmOptions {
  int seed_multiplier = 4;     // seed vocab = target * multiplier
  double prune_fraction = 0.2; // tokens removed per prune round
  int em_iterations = 2;       // Viterbi-EM passes between prunes
};

// Unigram LM tokenizer: seeds from the most frequent substrings, alternates
// Viterbi-EM with pruning the tokens whose removal least increases corpus
// loss, until the vocabulary fits the target. Single characters are never
// pruned.
TokenizerModel train_ulm(const WordCounts& corpus, int target_vocab_size,
                         const std::vector<std::string>& languages = {},
                         const UlmOptions& options = {});

}  // namespace rdforge
