#pragma once

#include <string>

#include "rdforge/encoder.hpp"

namespace rdforge {

// Binary model snapshot. Layout:
//   magic "RDFORGE1"
//   uint64 LE  config block length
//   JSON      {"version":1, "encoder":…, "tasks":…, "tokenizer":…}
//   repeated, sorted by parameter name:
//     uint64 LE name length, name bytes,
//     uint64 LE rank, uint64 LE dims…,
//     IEEE-754 doubles, little-endian, row major.
// Everything a model needs to run again travels in the file; loading
// reconstructs the model and fails loudly on any mismatch or corruption.

std::string checkpoint_bytes(const Model& model);
void save_checkpoint(const Model& model, const std::string& path);

Model checkpoint_from_bytes(const std::string& bytes);
Model load_checkpoint(const std::string& path);

}  // namespace rdforge
