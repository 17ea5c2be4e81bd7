#pragma once

#include <cstdlib>
#include <iostream>
#include <mutex>
#include <string>
#include <string_view>

namespace gaugeflow::log {

enum class Level { Error = 0, Warn = 1, Info = 2, Debug = 3 };

/// Threshold from GAUGEFLOW_LOG (error, warn, info, debug); warn when unset or unrecognized.
inline Level threshold() {
    static const Level level = [] {
        const char* env = std::getenv("GAUGEFLOW_LOG");
        const std::string_view s = env ? env : "";
        if (s == "error") return Level::Error;
        if (s == "info") return Level::Info;
        if (s == "debug") return Level::Debug;
        return Level::Warn;
    }();
    return level;
}

inline void write(Level level, std::string_view msg) {
    if (static_cast<int>(level) > static_cast<int>(threshold())) return;
    static constexpr std::string_view tags[] = {"error", "warn", "info", "debug"};
    static std::mutex mu;
    std::lock_guard<std::mutex> lock(mu);
    std::cerr << "gaugeflow " << tags[static_cast<int>(level)] << ": " << msg << '\n';
}

inline void error(std::string_view m) { write(Level::Error, m); }
inline void warn(std::string_view m) { write(Level::Warn, m); }
inline void info(std::string_view m) { write(Level::Info, m); }
inline void debug(std::string_view m) { write(Level::Debug, m); }

} // namespace gaugeflow::log
