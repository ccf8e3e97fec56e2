#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "rdforge/dataio.hpp"

namespace rdforge {

// Synthetic reverse-dictionary data. Glosses come from a per-language word
// grammar (a small seeded lexicon over a language-specific letter range);
// targets come from a fixed random linear map of the gloss's bag-of-word
// counts. The same gloss always gets the same targets, so the mapping is
// genuinely learnable and overfitting a small set is achievable.
struct SynthOptions {
  std::vector<std::string> languages = {"en"};
  int entries_per_language = 64;
  std::map<std::string, int> dims = {{"sgns", 32}};  // task name -> width
  uint64_t seed = 0;
};

// Target vectors for one gloss: every distinct word contributes a direction
// drawn from a generator seeded by (seed, language, task, word), scaled by
// the word's count; the sum is divided by the gloss length. Pure in its
// arguments — no lexicon needed.
std::map<std::string, std::vector<double>> synth_targets(
    const std::string& gloss, const std::string& language,
    const std::map<std::string, int>& dims, uint64_t seed);

// Full dataset: entries_per_language glosses per language, every entry
// carrying every task in dims. Deterministic in opts.
std::vector<GlossEntry> synth_dataset(const SynthOptions& opts);

}  // namespace rdforge
