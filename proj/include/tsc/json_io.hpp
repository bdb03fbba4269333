#pragma once

#include <filesystem>
#include <string>

#include "json.hpp"

namespace tsc {

/// Parses JSON text; syntax errors become ConfigError with "<source>:<line>:<col>".
nlohmann::json parse_json(const std::string& text, const std::string& source);
nlohmann::json read_json_file(const std::filesystem::path& path);

}  // namespace tsc
