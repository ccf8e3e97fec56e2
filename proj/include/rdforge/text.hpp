#pragma once

#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

namespace rdforge::text {

// Decodes UTF-8 into code points; malformed bytes become U+FFFD.
std::vector<uint32_t> decode_utf8(std::string_view s);

std::string encode_utf8(uint32_t cp);

// Splits a string into its code points, each re-encoded as UTF-8.
std::vector<std::string> utf8_chars(std::string_view s);

// Lowercase for ASCII, Latin-1, Latin Extended-A and Cyrillic. Code points
// outside those ranges pass through unchanged.
uint32_t to_lower(uint32_t cp);
std::string to_lower(std::string_view s);

bool is_space(uint32_t cp);
bool is_punct(uint32_t cp);

// Corpus pre-tokenization contract: lowercase, split on whitespace, isolate
// punctuation as single-character tokens.
std::vector<std::string> pretokenize(std::string_view s);

}  // namespace rdforge::text
