#include "rdforge/text.hpp"

namespace rdforge::text {

namespace {
constexpr uint32_t kReplacement = 0xFFFD;
}

std::vector<uint32_t> decode_utf8(std::string_view s) {
  std::vector<uint32_t> out;
  out.reserve(s.size());
  size_t i = 0;
  while (i < s.size()) {
    const auto b0 = static_cast<unsigned char>(s[i]);
    uint32_t cp = 0;
    size_t len = 0;
    if (b0 < 0x80) {
      cp = b0;
      len = 1;
    } else if ((b0 & 0xE0) == 0xC0) {
      cp = b0 & 0x1F;
      len = 2;
    } else if ((b0 & 0xF0) == 0xE0) {
      cp = b0 & 0x0F;
      len = 3;
    } else if ((b0 & 0xF8) == 0xF0) {
      cp = b0 & 0x07;
      len = 4;
    } else {
      out.push_back(kReplacement);
      ++i;
      continue;
    }
    if (i + len > s.size()) {
      out.push_back(kReplacement);
      ++i;
      continue;
    }
    bool ok = true;
    for (size_t k = 1; k < len; ++k) {
      const auto b = static_cast<unsigned char>(s[i + k]);
      if ((b & 0xC0) != 0x80) {
        ok = false;
        break;
      }
      cp = (cp << 6) | (b & 0x3F);
    }
    if (!ok || cp > 0x10FFFF) {
      out.push_back(kReplacement);
      ++i;
      continue;
    }
    out.push_back(cp);
    i += len;
  }
  return out;
}

std::string encode_utf8(uint32_t cp) {
  std::string out;
  if (cp < 0x80) {
    out.push_back(static_cast<char>(cp));
  } else if (cp < 0x800) {
    out.push_back(static_cast<char>(0xC0 | (cp >> 6)));
    out.push_back(static_cast<char>(0x80 | (cp & 0x3F)));
  } else if (cp < 0x10000) {
    out.push_back(static_cast<char>(0xE0 | (cp >> 12)));
    out.push_back(static_cast<char>(0x80 | ((cp >> 6) & 0x3F)));
    out.push_back(static_cast<char>(0x80 | (cp & 0x3F)));
  } else {
    out.push_back(static_cast<char>(0xF0 | (cp >> 18)));
    out.push_back(static_cast<char>(0x80 | ((cp >> 12) & 0x3F)));
    out.push_back(static_cast<char>(0x80 | ((cp >> 6) & 0x3F)));
    out.push_back(static_cast<char>(0x80 | (cp & 0x3F)));
  }
  return out;
}

std::vector<std::string> utf8_chars(std::string_view s) {
  std::vector<std::string> out;
  for (const uint32_t cp : decode_utf8(s)) out.push_back(encode_utf8(cp));
  return out;
}

uint32_t to_lower(uint32_t cp) {
  if (cp >= 'A' && cp <= 'Z') return cp + 0x20;
  // Latin-1 supplement, skipping the multiplication sign.
  if (cp >= 0xC0 && cp <= 0xDE && cp != 0xD7) return cp + 0x20;
  // Latin Extended-A: upper/lower pairs on even/odd code points.
  if (cp >= 0x100 && cp <= 0x177 && (cp % 2 == 0)) return cp + 1;
  if (cp >= 0x179 && cp <= 0x17D && (cp % 2 == 1)) return cp + 1;
  if (cp == 0x178) return 0xFF;   // Y with diaeresis
  if (cp == 0x130) return 'i';    // dotted capital I, approximate
  // Cyrillic.
  if (cp >= 0x410 && cp <= 0x42F) return cp + 0x20;
  if (cp >= 0x400 && cp <= 0x40F) return cp + 0x50;
  return cp;
}

std::string to_lower(std::string_view s) {
  std::string out;
  for (const uint32_t cp : decode_utf8(s)) out += encode_utf8(to_lower(cp));
  return out;
}

bool is_space(uint32_t cp) {
  switch (cp) {
    case ' ':
    case '\t':
    case '\n':
    case '\r':
    case '\f':
    case '\v':
    case 0xA0:
    case 0x1680:
    case 0x2028:
    case 0x2029:
    case 0x202F:
    case 0x205F:
    case 0x3000:
      return true;
    default:
      return cp >= 0x2000 && cp <= 0x200A;
  }
}

bool is_punct(uint32_t cp) {
  if (cp < 0x80) {
    return (cp >= '!' && cp <= '/') || (cp >= ':' && cp <= '@') ||
           (cp >= '[' && cp <= '`') || (cp >= '{' && cp <= '~');
  }
  switch (cp) {
    case 0xA1:   // inverted exclamation
    case 0xAB:   // left guillemet
    case 0xB7:   // middle dot
    case 0xBB:   // right guillemet
    case 0xBF:   // inverted question
      return true;
    default:
      // General punctuation block (dashes, quotes, ellipsis).
      return cp >= 0x2010 && cp <= 0x205E;
  }
}

std::vector<std::string> pretokenize(std::string_view s) {
  std::vector<std::string> tokens;
  std::string word;
  for (const uint32_t raw : decode_utf8(s)) {
    const uint32_t cp = to_lower(raw);
    if (is_space(cp)) {
      if (!word.empty()) {
        tokens.push_back(word);
        word.clear();
      }
    } else if (is_punct(cp)) {
      if (!word.empty()) {
        tokens.push_back(word);
        word.clear();
      }
      tokens.push_back(encode_utf8(cp));
    } else {
      word += encode_utf8(cp);
    }
  }
  if (!word.empty()) tokens.push_back(word);
  return tokens;
}

}  // namespace rdforge::text
