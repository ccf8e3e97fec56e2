#include "rdforge/multilingual.hpp"

#include <algorithm>
#include <map>
#include <stdexcept>

namespace rdforge {

std::vector<std::string> corpus_languages(
    const std::vector<GlossEntry>& entries) {
  std::vector<std::string> out;
  for (const GlossEntry& e : entries) {
    if (e.language.empty()) {
      throw std::runtime_error("entry \"" + e.id + "\" has no language code");
    }
    out.push_back(e.language);
  }
  std::sort(out.begin(), out.end());
  out.erase(std::unique(out.begin(), out.end()), out.end());
  return out;
}

TokenizerModel build_shared_vocab(const std::vector<GlossEntry>& entries,
                                  TokenizerKind kind, int target_size,
                                  std::vector<std::string> languages) {
  if (languages.empty()) {
    languages = corpus_languages(entries);
  }
  std::sort(languages.begin(), languages.end());
  languages.erase(std::unique(languages.begin(), languages.end()),
                  languages.end());
  if (languages.size() < 2) {
    throw std::runtime_error(
        "shared vocabulary needs at least 2 languages, got " +
        std::to_string(languages.size()));
  }

  std::map<std::string, int64_t> per_language;
  for (const std::string& l : languages) per_language[l] = 0;
  std::vector<std::string> texts;
  texts.reserve(entries.size());
  for (const GlossEntry& e : entries) {
    const auto it = per_language.find(e.language);
    if (it == per_language.end()) {
      throw std::runtime_error("entry \"" + e.id + "\" has language \"" +
                               e.language +
                               "\" outside the configured set");
    }
    ++it->second;
    texts.push_back(e.gloss);
  }
  for (const auto& [language, count] : per_language) {
    if (count == 0) {
      throw std::runtime_error("language \"" + language + "\" has no entries");
    }
  }

  const WordCounts corpus = build_word_counts(texts);
  switch (kind) {
    case TokenizerKind::kBpe:
      return train_bpe(corpus, target_size, languages);
    case TokenizerKind::kWordPiece:
      return train_wordpiece(corpus, target_size, languages);
    case TokenizerKind::kUlm:
      return train_ulm(corpus, target_size, languages);
  }
  throw std::logic_error("build_shared_vocab: unhandled tokenizer kind");
}

std::vector<int> apply_alt(const std::vector<int>& ids,
                           const std::string& language,
                           const Vocabulary& vocab) {
  if (ids.empty()) {
    throw std::runtime_error("apply_alt: empty sequence");
  }
  if (ids[0] >= 4 && ids[0] < vocab.num_reserved()) {
    throw std::runtime_error(
        "apply_alt: sequence already carries a language token");
  }
  if (ids[0] != Vocabulary::kCls) {
    throw std::runtime_error("apply_alt: sequence must begin with [CLS]");
  }
  const int lang = vocab.lang_id(language);
  if (lang < 0) {
    throw std::runtime_error("apply_alt: language \"" + language +
                             "\" is not configured");
  }
  std::vector<int> out;
  out.reserve(ids.size() + 1);
  out.push_back(lang);
  out.insert(out.end(), ids.begin(), ids.end());
  return out;
}

MultilingualRun train_multilingual(Model model,
                                   const std::vector<GlossEntry>& train_set,
                                   const std::vector<GlossEntry>& dev_set,
                                   const std::vector<GlossEntry>& eval_set,
                                   const TrainOptions& opts) {
  MultilingualRun run;
  run.result = train_model(std::move(model), train_set, dev_set, opts);
  const auto& testset = eval_set.empty() ? dev_set : eval_set;
  if (testset.empty()) {
    throw std::runtime_error(
        "train_multilingual: no dev or eval entries to report on");
  }
  run.report = metrics::evaluate(run.result.model, testset);
  return run;
}

}  // namespace rdforge
