#pragma once

#include <filesystem>
#include <iosfwd>
#include <string>
#include <string_view>
#include <vector>

#include "flickermine/model.hpp"

namespace flickermine::cli {

/// Runs one command line (without the program name). Returns the process exit status;
/// diagnostics go to `err`, the optional human summary to `out`.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

/// key=value lines; '#' starts a comment. Unknown keys and bad values throw ConfigError
/// naming the file and line.
void apply_config_file(MiningConfig& cfg, const std::filesystem::path& path);

std::string sha256_hex(std::string_view bytes);
std::string sha256_file(const std::filesystem::path& path);

/// Writes through a sibling temporary file and renames it into place.
void write_file_atomic(const std::filesystem::path& path, std::string_view contents);

}  // namespace flickermine::cli
