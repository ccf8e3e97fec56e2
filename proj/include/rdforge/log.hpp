#pragma once

#include <string>

namespace rdforge {

enum class LogLevel { kError = 0, kInfo = 1, kDebug = 2 };

// Level comes from RDFORGE_LOG (error|info|debug), read once. Default: info.
LogLevel log_level();

void log_error(const std::string& msg);
void log_info(const std::string& msg);
void log_debug(const std::string& msg);

}  // namespace rdforge
