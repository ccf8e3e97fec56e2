#include "rdforge/log.hpp"

#include <cstdlib>
#include <iostream>

namespace rdforge {

LogLevel log_level() {
  static const LogLevel level = [] {
    const char* env = std::getenv("RDFORGE_LOG");
    if (env == nullptr) return LogLevel::kInfo;
    const std::string v(env);
    if (v == "error") return LogLevel::kError;
    if (v == "debug") return LogLevel::kDebug;
    return LogLevel::kInfo;
  }();
  return level;
}

void log_error(const std::string& msg) {
  std::cerr << "[error] " << msg << "\n";
}

void log_info(const std::string& msg) {
  if (log_level() >= LogLevel::kInfo) std::cerr << "[info] " << msg << "\n";
}

void log_debug(const std::string& msg) {
  if (log_level() >= LogLevel::kDebug) std::cerr << "[debug] " << msg << "\n";
}

}  // namespace rdforge
