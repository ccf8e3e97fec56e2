#pragma once

#include <string>
#include <vector>

#include "rdforge/dataio.hpp"
#include "rdforge/metrics.hpp"
#include "rdforge/tokenizer.hpp"
#include "rdforge/trainer.hpp"

namespace rdforge {

// Language codes present in a corpus, sorted and deduplicated. Entries
// without a code are an error (multilingual work needs to know who is who).
std::vector<std::string> corpus_languages(
    const std::vector<GlossEntry>& entries);

// One tokenizer trained on every language's glosses at once, with a
// [LANG:xx] reserved token per language. When `languages` is given it is
// authoritative: a listed language with no entries, or an entry outside the
// list, is an error naming the offender. Needs at least two languages.
TokenizerModel build_shared_vocab(const std::vector<GlossEntry>& entries,
                                  TokenizerKind kind, int target_size,
                                  std::vector<std::string> languages = {});

// The language-token trick on an encoded sequence: [LANG:xx] ++ ids, where
// ids must begin with [CLS] and must not already carry a language token.
std::vector<int> apply_alt(const std::vector<int>& ids,
                           const std::string& language,
                           const Vocabulary& vocab);

struct MultilingualRun {
  TrainResult result;
  metrics::EvalReport report;  // one row per (language, task)
};

// Trains one model on the language-mixed stream and reports metrics per
// language. The eval set defaults to the dev set when empty.
MultilingualRun train_multilingual(Model model,
                                   const std::vector<GlossEntry>& train_set,
                                   const std::vector<GlossEntry>& dev_set,
                                   const std::vector<GlossEntry>& eval_set,
                                   const TrainOptions& opts);

}  // namespace rdforge
