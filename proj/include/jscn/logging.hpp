#pragma once

#include <string>

namespace jscn::log {

enum class Level { error = 0, info = 1, debug = 2 };

/// Current level, initialized once from the JSCN_LOG_LEVEL environment
/// variable (error|info|debug, default info).
Level level();

void error(const std::string& msg);
void info(const std::string& msg);
void debug(const std::string& msg);

}  // namespace jscn::log
