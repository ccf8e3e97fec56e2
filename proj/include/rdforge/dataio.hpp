#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "rdforge/tokenizer.hpp"

namespace rdforge {

// The three regression targets a dataset may carry per entry.
inline constexpr int kNumTasks = 3;
inline constexpr const char* kTaskNames[kNumTasks] = {"sgns", "char",
                                                      "electra"};

struct GlossEntry {
  std::string id;
  std::string gloss;
  std::string language;
  std::optional<std::vector<double>> sgns;
  std::optional<std::vector<double>> char_emb;  // JSON key "char"
  std::optional<std::vector<double>> electra;

  const std::optional<std::vector<double>>& task(int t) const {
    return t == 0 ? sgns : t == 1 ? char_emb : electra;
  }
  std::optional<std::vector<double>>& task(int t) {
    return t == 0 ? sgns : t == 1 ? char_emb : electra;
  }

  friend bool operator==(const GlossEntry&, const GlossEntry&) = default;
};

// Training data must supply at least one target vector per entry; prediction
// inputs may carry none.
enum class LoadMode { kTrain, kPredict };

// Accepts either a top-level array of entries or
// {"language": code, "entries": [...]} where the file-level code fills
// entries that omit their own. Validates glosses, vector finiteness and
// per-task dimension consistency across the whole dataset.
std::vector<GlossEntry> parse_dataset(const std::string& text, LoadMode mode);
std::vector<GlossEntry> load_dataset(const std::string& path, LoadMode mode);

std::string dataset_to_json(const std::vector<GlossEntry>& entries);
void save_dataset(const std::string& path,
                  const std::vector<GlossEntry>& entries);

// Deterministic stratified split: per language, a seeded shuffle sends
// round(dev_fraction * n) entries to dev. Both halves keep dataset order.
std::pair<std::vector<GlossEntry>, std::vector<GlossEntry>> split(
    const std::vector<GlossEntry>& entries, double dev_fraction,
    uint64_t seed);

struct Batch {
  std::vector<std::vector<int>> ids;  // rows padded with [PAD] to the width
  std::vector<int> lengths;           // true lengths, <= width
  std::vector<std::string> entry_ids;
  std::vector<std::string> languages;
  // Per task: one target row per entry (empty when absent) and its
  // presence flag. Absent targets never reach the loss.
  std::array<std::vector<std::vector<double>>, kNumTasks> targets;
  std::array<std::vector<char>, kNumTasks> present;

  int size() const { return static_cast<int>(ids.size()); }
  int width() const { return ids.empty() ? 0 : static_cast<int>(ids[0].size()); }
};

// Epoch order shared by every training path: entries grouped by language
// (sorted codes), each group shuffled with a stream derived from the seed and
// the code, then merged round-robin. With one language this is a plain
// seeded shuffle, so a one-language corpus trains identically through the
// monolingual and multilingual paths.
std::vector<size_t> make_epoch_order(const std::vector<GlossEntry>& entries,
                                     uint64_t seed);

// Encodes ([LANG] first under use_alt, then [CLS]), pads each batch to its
// own max length, and sets the per-task presence masks. Every entry lands in
// exactly one batch.
std::vector<Batch> make_batches(const std::vector<GlossEntry>& entries,
                                const TokenizerModel& tokenizer,
                                int batch_size, bool use_alt, uint64_t seed);

struct CorpusStats {
  int64_t gloss_num = 0;
  int64_t dict_size = 0;      // distinct token types over the corpus
  double avg_gloss_len = 0.0; // mean tokens per gloss, reserved ids excluded
};

// Without a tokenizer, tokens are the pre-tokenization words; with one,
// subword statistics under that model.
CorpusStats corpus_stats(const std::vector<GlossEntry>& entries,
                         const TokenizerModel* tokenizer = nullptr);

}  // namespace rdforge
