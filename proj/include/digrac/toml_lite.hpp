#pragma once

#include <filesystem>
#include <string>

#include "json.hpp"

namespace digrac::toml {

/// Reader for the TOML subset used by experiment configs: `[table]` and
/// `[dotted.table]` headers, `key = value` with bare or dotted keys, basic
/// and literal strings, integers, floats (incl. inf/nan), booleans, and
/// arrays (possibly spanning lines). No inline tables, dates or arrays of
/// tables. Errors are digrac::InputError naming the line.
nlohmann::json parse(const std::string& text, const std::string& source = "<config>");
nlohmann::json parse_file(const std::filesystem::path& path);

}  // namespace digrac::toml
