#pragma once

#include <string_view>

namespace cpn::log {

enum class Level { debug, info, warning, error, off };

void set_level(Level level);
Level level();

void warn(std::string_view message);
void info(std::string_view message);
void error(std::string_view message);

/// Warns the first time `key` is seen in this process, counts the rest.
void warn_once(std::string_view key, std::string_view message);
long warning_count(std::string_view key);

}  // namespace cpn::log
