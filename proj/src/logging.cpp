#include "jscn/logging.hpp"

#include <cstdlib>
#include <iostream>

namespace jscn::log {

static Level parse_env() {
    const char* v = std::getenv("JSCN_LOG_LEVEL");
    if (!v) return Level::info;
    const std::string s(v);
    if (s == "error") return Level::error;
    if (s == "debug") return Level::debug;
    return Level::info;
}

Level level() {
    static const Level lv = parse_env();
    return lv;
}

static void emit(const char* tag, const std::string& msg) {
    std::cerr << "[jscn:" << tag << "] " << msg << "\n";
}

void error(const std::string& msg) { emit("error", msg); }

void info(const std::string& msg) {
    if (level() >= Level::info) emit("info", msg);
}

void debug(const std::string& msg) {
    if (level() >= Level::debug) emit("debug", msg);
}

}  // namespace jscn::log
