// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdlib>
#include <iostream>
#include <mutex>
#include <sstream>
#include <string_view>

namespace lipal::log {

enum class Level { off = 0, info = 1, debug = 2 };

/// Level is read once from LIPAL_LOG (off | info | debug); default off.
inline Level level() {
  static const Level cached = [] {
    const char* env = std::getenv("LIPAL_LOG");
    if (env == nullptr) return Level::off;
    std::string_view v(env);
    if (v == "debug") return Level::debug;
    if (v == "info") return Level::info;
    return Level::off;
  }();
  return cached;
}

inline bool enabled(Level l) { return static_cast<int>(level()) >= static_cast<int>(l); }

template <typename... Args>
void write(Level l, const Args&... args) {
  if (!enabled(l)) return;
  std::ostringstream os;
  os << (l == Level::debug ? "[lipal debug] " : "[lipal] ");
  (os << ... << args);
  os << '\n';
  static std::mutex mu;
  std::lock_guard<std::mutex> lock(mu);
  std::cerr << os.str();
}

template <typename... Args>
void info(const Args&... args) {
  write(Level::info, args...);
}

template <typename... Args>
void debug(const Args&... args) {
  write(Level::debug, args...);
}

}  // namespace lipal::log
