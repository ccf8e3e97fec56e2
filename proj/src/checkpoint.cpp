#include "rdforge/checkpoint.hpp"

#include <bit>
#include <cmath>
#include <cstdint>
#include <fstream>
#include <stdexcept>

#include <nlohmann/json.hpp>

#include "rdforge/config_json.hpp"

namespace rdforge {

namespace {

constexpr const char kMagic[] = "RDFORGE1";  // 8 bytes, no terminator stored
constexpr uint64_t kVersion = 1;

void put_u64(std::string& out, uint64_t v) {
  for (int i = 0; i < 8; ++i) {
    out.push_back(static_cast<char>((v >> (8 * i)) & 0xff));
  }
}

void put_f64(std::string& out, double d) {
  put_u64(out, std::bit_cast<uint64_t>(d));
}

struct Reader {
  const std::string& buf;
  size_t off = 0;

  void need(size_t n, const char* what) const {
    if (buf.size() - off < n) {
      throw std::runtime_error(
          std::string("checkpoint: corrupt file (truncated ") + what + ")");
    }
  }
  uint64_t u64(const char* what) {
    need(8, what);
    uint64_t v = 0;
    for (int i = 0; i < 8; ++i) {
      v |= static_cast<uint64_t>(static_cast<uint8_t>(buf[off + i]))
           << (8 * i);
    }
    off += 8;
    return v;
  }
  double f64(const char* what) { return std::bit_cast<double>(u64(what)); }
  std::string bytes(size_t n, const char* what) {
    need(n, what);
    std::string s = buf.substr(off, n);
    off += n;
    return s;
  }
  bool done() const { return off == buf.size(); }
};

}  // namespace

std::string checkpoint_bytes(const Model& model) {
  nlohmann::json j;
  j["version"] = kVersion;
  j["encoder"] = encoder_config_to_json(model.config);
  j["tasks"] = task_heads_to_json(model.tasks);
  j["tokenizer"] = nlohmann::json::parse(model.tokenizer.to_json());
  const std::string cfg = j.dump();  // object keys are sorted: stable bytes

  std::string out(kMagic, 8);
  put_u64(out, cfg.size());
  out += cfg;
  for (const auto& [name, t] : model.params) {  // map order: sorted by name
    put_u64(out, name.size());
    out += name;
    put_u64(out, static_cast<uint64_t>(t.rank()));
    for (const int64_t d : t.shape()) put_u64(out, static_cast<uint64_t>(d));
    for (const double v : t.data()) put_f64(out, v);
  }
  return out;
}

void save_checkpoint(const Model& model, const std::string& path) {
  const std::string bytes = checkpoint_bytes(model);
  std::ofstream f(path, std::ios::binary | std::ios::trunc);
  f.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
  if (!f) {
    throw std::runtime_error("checkpoint: cannot write " + path);
  }
}

Model checkpoint_from_bytes(const std::string& bytes) {
  Reader r{bytes};
  if (r.bytes(8, "magic") != std::string(kMagic, 8)) {
    throw std::runtime_error("checkpoint: bad magic (not a checkpoint file)");
  }
  const uint64_t cfg_len = r.u64("config length");
  const std::string cfg = r.bytes(cfg_len, "config block");

  nlohmann::json j;
  try {
    j = nlohmann::json::parse(cfg);
  } catch (const std::exception&) {
    throw std::runtime_error("checkpoint: corrupt config block");
  }
  if (!j.is_object() || !j.contains("version") ||
      !j.at("version").is_number_integer()) {
    throw std::runtime_error("checkpoint: corrupt config block");
  }
  const auto version = j.at("version").get<int64_t>();
  if (version != static_cast<int64_t>(kVersion)) {
    throw std::runtime_error("checkpoint: unsupported version " +
                             std::to_string(version) + " (expected 1)");
  }
  if (!j.contains("encoder") || !j.contains("tasks") ||
      !j.contains("tokenizer")) {
    throw std::runtime_error("checkpoint: corrupt config block");
  }

  const EncoderConfig config = encoder_config_from_json(j.at("encoder"));
  const std::vector<TaskHead> tasks = task_heads_from_json(j.at("tasks"));
  TokenizerModel tokenizer = TokenizerModel::from_json(j.at("tokenizer").dump());

  Model model(config, tasks, std::move(tokenizer), 0);

  std::map<std::string, bool> filled;
  for (const auto& [name, t] : model.params) filled[name] = false;

  while (!r.done()) {
    const uint64_t name_len = r.u64("parameter name length");
    if (name_len == 0 || name_len > 4096) {
      throw std::runtime_error("checkpoint: corrupt parameter record");
    }
    const std::string name = r.bytes(name_len, "parameter name");
    auto it = model.params.find(name);
    if (it == model.params.end()) {
      throw std::runtime_error("checkpoint: unexpected parameter \"" + name +
                               "\"");
    }
    if (filled[name]) {
      throw std::runtime_error("checkpoint: duplicate parameter \"" + name +
                               "\"");
    }
    const uint64_t rank = r.u64("parameter rank");
    if (rank == 0 || rank > 4) {
      throw std::runtime_error("checkpoint: corrupt parameter record");
    }
    ad::Shape shape;
    uint64_t numel = 1;
    for (uint64_t d = 0; d < rank; ++d) {
      const uint64_t dim = r.u64("parameter dims");
      if (dim == 0 || dim > (uint64_t{1} << 32) || numel > (uint64_t{1} << 32)) {
        throw std::runtime_error("checkpoint: corrupt parameter record");
      }
      numel *= dim;
      shape.push_back(static_cast<int64_t>(dim));
    }
    ad::Tensor& t = it->second;
    if (shape != t.shape()) {
      throw std::runtime_error("checkpoint: parameter \"" + name +
                               "\" has shape " + ad::shape_str(shape) +
                               ", model expects " + ad::shape_str(t.shape()));
    }
    for (uint64_t k = 0; k < numel; ++k) {
      const double v = r.f64("parameter values");
      if (!std::isfinite(v)) {
        throw std::runtime_error("checkpoint: non-finite value in parameter \"" +
                                 name + "\"");
      }
      t.data()[k] = v;
    }
    filled[name] = true;
  }
  for (const auto& [name, ok] : filled) {
    if (!ok) {
      throw std::runtime_error("checkpoint: missing parameter \"" + name +
                               "\"");
    }
  }
  return model;
}

Model load_checkpoint(const std::string& path) {
  std::ifstream f(path, std::ios::binary);
  if (!f) {
    throw std::runtime_error("checkpoint: cannot read " + path);
  }
  std::string bytes((std::istreambuf_iterator<char>(f)),
                    std::istreambuf_iterator<char>());
  return checkpoint_from_bytes(bytes);
}

}  // namespace rdforge
