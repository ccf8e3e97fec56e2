#include "rdforge/dataio.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <map>
#include <set>
#include <sstream>
#include <stdexcept>

#include <nlohmann/json.hpp>

#include "rdforge/rng.hpp"
#include "rdforge/text.hpp"

namespace rdforge {

namespace {

std::optional<std::vector<double>> read_vector(const nlohmann::json& j,
                                               const char* key,
                                               const std::string& id) {
  if (!j.contains(key)) return std::nullopt;
  const auto& v = j[key];
  if (!v.is_array()) {
    throw std::runtime_error("dataset: entry \"" + id + "\": " + key +
                             " must be an array of numbers");
  }
  std::vector<double> out;
  out.reserve(v.size());
  for (const auto& x : v) {
    if (!x.is_number()) {
      throw std::runtime_error("dataset: entry \"" + id + "\": " + key +
                               " must be an array of numbers");
    }
    const double d = x.get<double>();
    if (!std::isfinite(d)) {
      throw std::runtime_error("dataset: entry \"" + id +
                               "\": non-finite value in " + key);
    }
    out.push_back(d);
  }
  return out;
}

}  // namespace

std::vector<GlossEntry> parse_dataset(const std::string& text, LoadMode mode) {
  nlohmann::json doc;
  try {
    doc = nlohmann::json::parse(text);
  } catch (const nlohmann::json::exception& e) {
    throw std::runtime_error(std::string("dataset: malformed JSON: ") +
                             e.what());
  }

  std::string file_language;
  const nlohmann::json* arr = nullptr;
  if (doc.is_array()) {
    arr = &doc;
  } else if (doc.is_object() && doc.contains("entries") &&
             doc["entries"].is_array()) {
    if (doc.contains("language")) {
      file_language = doc["language"].get<std::string>();
    }
    arr = &doc["entries"];
  } else {
    throw std::runtime_error(
        "dataset: expected a JSON array of entries or an object with an "
        "\"entries\" array");
  }
  if (arr->empty()) throw std::runtime_error("dataset: empty dataset");

  std::vector<GlossEntry> entries;
  entries.reserve(arr->size());
  // First id seen per task, to name both offenders on a dim mismatch.
  std::array<std::pair<std::string, size_t>, kNumTasks> first_dim;
  std::array<bool, kNumTasks> seen{};

  for (size_t i = 0; i < arr->size(); ++i) {
    const auto& j = (*arr)[i];
    if (!j.is_object()) {
      throw std::runtime_error("dataset: entry " + std::to_string(i) +
                               " is not an object");
    }
    GlossEntry e;
    e.id = j.contains("id") ? j["id"].get<std::string>()
                            : "#" + std::to_string(i);
    if (!j.contains("gloss") || !j["gloss"].is_string() ||
        j["gloss"].get<std::string>().empty()) {
      throw std::runtime_error("dataset: entry \"" + e.id +
                               "\" is missing a gloss");
    }
    e.gloss = j["gloss"].get<std::string>();
    e.language = j.contains("language") ? j["language"].get<std::string>()
                                        : file_language;
    e.sgns = read_vector(j, "sgns", e.id);
    e.char_emb = read_vector(j, "char", e.id);
    e.electra = read_vector(j, "electra", e.id);

    bool any = false;
    for (int t = 0; t < kNumTasks; ++t) {
      const auto& v = e.task(t);
      if (!v) continue;
      any = true;
      if (!seen[t]) {
        seen[t] = true;
        first_dim[t] = {e.id, v->size()};
      } else if (v->size() != first_dim[t].second) {
        throw std::runtime_error(
            "dataset: entry \"" + e.id + "\": " + kTaskNames[t] + " dim " +
            std::to_string(v->size()) + " differs from entry \"" +
            first_dim[t].first + "\" dim " +
            std::to_string(first_dim[t].second));
      }
    }
    if (mode == LoadMode::kTrain && !any) {
      throw std::runtime_error("dataset: entry \"" + e.id +
                               "\" has no target vectors (training input "
                               "needs at least one of sgns/char/electra)");
    }
    entries.push_back(std::move(e));
  }
  return entries;
}

std::vector<GlossEntry> load_dataset(const std::string& path, LoadMode mode) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("dataset: cannot read " + path);
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_dataset(ss.str(), mode);
}

std::string dataset_to_json(const std::vector<GlossEntry>& entries) {
  auto arr = nlohmann::json::array();
  for (const GlossEntry& e : entries) {
    nlohmann::json j;
    j["id"] = e.id;
    j["gloss"] = e.gloss;
    if (!e.language.empty()) j["language"] = e.language;
    if (e.sgns) j["sgns"] = *e.sgns;
    if (e.char_emb) j["char"] = *e.char_emb;
    if (e.electra) j["electra"] = *e.electra;
    arr.push_back(std::move(j));
  }
  return arr.dump(2) + "\n";
}

void save_dataset(const std::string& path,
                  const std::vector<GlossEntry>& entries) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("dataset: cannot write " + path);
  out << dataset_to_json(entries);
  if (!out) throw std::runtime_error("dataset: write failed for " + path);
}

std::pair<std::vector<GlossEntry>, std::vector<GlossEntry>> split(
    const std::vector<GlossEntry>& entries, double dev_fraction,
    uint64_t seed) {
  if (!(dev_fraction > 0.0 && dev_fraction < 1.0)) {
    throw std::runtime_error("split: dev_fraction must be in (0,1)");
  }
  std::map<std::string, std::vector<size_t>> by_lang;
  for (size_t i = 0; i < entries.size(); ++i) {
    by_lang[entries[i].language].push_back(i);
  }
  std::set<size_t> dev_set;
  for (auto& [lang, idx] : by_lang) {
    Rng rng(Rng::derive(seed, "split:" + lang));
    rng.shuffle(idx);
    const auto n_dev = static_cast<size_t>(
        std::llround(dev_fraction * static_cast<double>(idx.size())));
    for (size_t k = 0; k < n_dev; ++k) dev_set.insert(idx[k]);
  }
  std::pair<std::vector<GlossEntry>, std::vector<GlossEntry>> out;
  for (size_t i = 0; i < entries.size(); ++i) {
    (dev_set.count(i) ? out.second : out.first).push_back(entries[i]);
  }
  return out;
}

std::vector<size_t> make_epoch_order(const std::vector<GlossEntry>& entries,
                                     uint64_t seed) {
  std::map<std::string, std::vector<size_t>> by_lang;
  for (size_t i = 0; i < entries.size(); ++i) {
    by_lang[entries[i].language].push_back(i);
  }
  std::vector<std::vector<size_t>> groups;
  for (auto& [lang, idx] : by_lang) {
    Rng rng(Rng::derive(seed, "shuffle:" + lang));
    rng.shuffle(idx);
    groups.push_back(std::move(idx));
  }
  std::vector<size_t> order;
  order.reserve(entries.size());
  for (size_t round = 0; order.size() < entries.size(); ++round) {
    for (const auto& g : groups) {
      if (round < g.size()) order.push_back(g[round]);
    }
  }
  return order;
}

std::vector<Batch> make_batches(const std::vector<GlossEntry>& entries,
                                const TokenizerModel& tokenizer,
                                int batch_size, bool use_alt, uint64_t seed) {
  if (batch_size <= 0) {
    throw std::runtime_error("make_batches: batch_size must be positive");
  }
  const std::vector<size_t> order = make_epoch_order(entries, seed);

  std::vector<Batch> batches;
  for (size_t start = 0; start < order.size();
       start += static_cast<size_t>(batch_size)) {
    const size_t end =
        std::min(order.size(), start + static_cast<size_t>(batch_size));
    Batch b;
    size_t width = 0;
    for (size_t k = start; k < end; ++k) {
      const GlossEntry& e = entries[order[k]];
      auto ids =
          tokenizer.encode(e.gloss, use_alt ? e.language : "", true);
      if (ids.empty()) {
        throw std::logic_error("make_batches: entry \"" + e.id +
                               "\" encoded to zero tokens");
      }
      width = std::max(width, ids.size());
      b.lengths.push_back(static_cast<int>(ids.size()));
      b.ids.push_back(std::move(ids));
      b.entry_ids.push_back(e.id);
      b.languages.push_back(e.language);
      for (int t = 0; t < kNumTasks; ++t) {
        const auto& v = e.task(t);
        b.targets[t].push_back(v ? *v : std::vector<double>{});
        b.present[t].push_back(v ? 1 : 0);
      }
    }
    for (auto& row : b.ids) row.resize(width, Vocabulary::kPad);
    batches.push_back(std::move(b));
  }
  return batches;
}

CorpusStats corpus_stats(const std::vector<GlossEntry>& entries,
                         const TokenizerModel* tokenizer) {
  if (entries.empty()) throw std::runtime_error("corpus_stats: empty dataset");
  CorpusStats s;
  s.gloss_num = static_cast<int64_t>(entries.size());
  int64_t total_tokens = 0;
  if (tokenizer == nullptr) {
    std::set<std::string> types;
    for (const GlossEntry& e : entries) {
      const auto words = text::pretokenize(e.gloss);
      total_tokens += static_cast<int64_t>(words.size());
      types.insert(words.begin(), words.end());
    }
    s.dict_size = static_cast<int64_t>(types.size());
  } else {
    std::set<int> types;
    for (const GlossEntry& e : entries) {
      for (const int id : tokenizer->encode(e.gloss, "", false)) {
        if (tokenizer->vocab.is_reserved(id)) continue;
        ++total_tokens;
        types.insert(id);
      }
    }
    s.dict_size = static_cast<int64_t>(types.size());
  }
  s.avg_gloss_len =
      static_cast<double>(total_tokens) / static_cast<double>(s.gloss_num);
  return s;
}

}  // namespace rdforge
