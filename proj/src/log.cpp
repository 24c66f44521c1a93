#include "cpn/log.hpp"

#include <atomic>
#include <iostream>
#include <map>
#include <mutex>
#include <string>

namespace cpn::log {

namespace {
std::atomic<Level> g_level{Level::warning};
std::mutex g_mutex;
std::map<std::string, long, std::less<>> g_counts;

void emit(Level at, std::string_view tag, std::string_view message) {
  if (at < g_level.load()) return;
  std::lock_guard lock(g_mutex);
  std::cerr << "[" << tag << "] " << message << '\n';
}
}  // namespace

void set_level(Level level) { g_level = level; }
Level level() { return g_level.load(); }

void warn(std::string_view message) { emit(Level::warning, "warn", message); }
void info(std::string_view message) { emit(Level::info, "info", message); }
void error(std::string_view message) { emit(Level::error, "error", message); }

void warn_once(std::string_view key, std::string_view message) {
  bool first = false;
  {
    std::lock_guard lock(g_mutex);
    auto it = g_counts.find(key);
    if (it == g_counts.end()) {
      g_counts.emplace(std::string(key), 1);
      first = true;
    } else {
      ++it->second;
    }
  }
  if (first) warn(message);
}

long warning_count(std::string_view key) {
  std::lock_guard lock(g_mutex);
  auto it = g_counts.find(key);
  return it == g_counts.end() ? 0 : it->second;
}

}  // namespace cpn::log
