#pragma once

#include <atomic>
#include <iostream>
#include <string_view>

namespace hybrid::log {

enum class Level { debug = 0, info = 1, warn = 2, silent = 3 };

inline std::atomic<Level>& threshold() {
    static std::atomic<Level> level{Level::warn};
    return level;
}

inline void set_level(Level level) { threshold().store(level); }

inline void write(Level level, std::string_view tag, std::string_view msg) {
    if (level < threshold().load()) return;
    std::clog << '[' << tag << "] " << msg << '\n';
}

inline void debug(std::string_view msg) { write(Level::debug, "debug", msg); }
inline void info(std::string_view msg) { write(Level::info, "info", msg); }
inline void warn(std::string_view msg) { write(Level::warn, "warn", msg); }

}  // namespace hybrid::log
