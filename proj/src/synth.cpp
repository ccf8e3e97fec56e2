#include "rdforge/synth.hpp"

#include <algorithm>
#include <set>
#include <stdexcept>

#include "rdforge/rng.hpp"
#include "rdforge/text.hpp"

namespace rdforge {

namespace {

std::optional<std::vector<double>>& task_field(GlossEntry& e,
                                               const std::string& task) {
  if (task == "sgns") return e.sgns;
  if (task == "char") return e.char_emb;
  if (task == "electra") return e.electra;
  throw std::runtime_error("synth: unknown task \"" + task +
                           "\" (expected sgns, char or electra)");
}

// Ten letters per language, picked by a stable hash of the code alone, so
// two languages read differently regardless of the seed.
std::string lang_letters(const std::string& code) {
  uint64_t h = 1469598103934665603ULL;  // FNV-1a
  for (unsigned char c : code) {
    h ^= c;
    h *= 1099511628211ULL;
  }
  std::string out;
  for (int i = 0; i < 10; ++i) {
    out.push_back(char('a' + (h + uint64_t(i)) % 26));
  }
  return out;
}

// A small unique-word lexicon over the language's letters. Deliberately
// tiny: a desk-scale encoder has to be able to carry the whole bag of words
// through its pooled state, or overfitting small sets stops being possible.
std::vector<std::string> lexicon(const std::string& language, uint64_t seed) {
  const std::string letters = lang_letters(language);
  Rng rng(Rng::derive(seed, "lexicon:" + language));
  std::set<std::string> seen;
  std::vector<std::string> words;
  while (words.size() < 12) {
    const int len = 2 + int(rng.below(5));
    std::string w;
    for (int i = 0; i < len; ++i) w.push_back(letters[rng.below(10)]);
    if (seen.insert(w).second) words.push_back(std::move(w));
  }
  return words;
}

}  // namespace

std::map<std::string, std::vector<double>> synth_targets(
    const std::string& gloss, const std::string& language,
    const std::map<std::string, int>& dims, uint64_t seed) {
  const std::vector<std::string> words = text::pretokenize(gloss);
  if (words.empty()) {
    throw std::runtime_error("synth_targets: empty gloss");
  }
  std::map<std::string, int> counts;
  for (const std::string& w : words) ++counts[w];

  std::map<std::string, std::vector<double>> out;
  for (const auto& [task, dim] : dims) {
    if (dim < 1) {
      throw std::runtime_error("synth_targets: task \"" + task +
                               "\" needs a positive dim");
    }
    std::vector<double> v(size_t(dim), 0.0);
    for (const auto& [word, count] : counts) {
      Rng wrng(
          Rng::derive(seed, "map:" + language + ":" + task + ":" + word));
      for (double& x : v) x += double(count) * wrng.normal(0.0, 0.5);
    }
    for (double& x : v) x /= double(words.size());
    out[task] = std::move(v);
  }
  return out;
}

std::vector<GlossEntry> synth_dataset(const SynthOptions& opts) {
  if (opts.languages.empty()) {
    throw std::runtime_error("synth: needs at least one language");
  }
  std::set<std::string> dedup(opts.languages.begin(), opts.languages.end());
  if (dedup.size() != opts.languages.size()) {
    throw std::runtime_error("synth: duplicate language code");
  }
  for (const std::string& lang : opts.languages) {
    if (lang.empty()) throw std::runtime_error("synth: empty language code");
  }
  if (opts.entries_per_language < 1) {
    throw std::runtime_error("synth: entries_per_language must be >= 1");
  }
  if (opts.dims.empty()) {
    throw std::runtime_error("synth: needs at least one task dim");
  }

  std::vector<GlossEntry> out;
  for (const std::string& lang : opts.languages) {
    const std::vector<std::string> words = lexicon(lang, opts.seed);
    Rng rng(Rng::derive(opts.seed, "gloss:" + lang));
    for (int i = 0; i < opts.entries_per_language; ++i) {
      GlossEntry e;
      e.id = lang + "-" + std::to_string(i);
      e.language = lang;
      const int len = 3 + int(rng.below(6));
      for (int w = 0; w < len; ++w) {
        if (w > 0) e.gloss += ' ';
        e.gloss += words[rng.below(words.size())];
      }
      for (auto& [task, v] :
           synth_targets(e.gloss, lang, opts.dims, opts.seed)) {
        task_field(e, task) = std::move(v);
      }
      out.push_back(std::move(e));
    }
  }
  return out;
}

}  // namespace rdforge
