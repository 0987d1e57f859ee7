#pragma once

#include <cstdint>
#include <string>
#include <string_view>

#include "abl/cases.hpp"

namespace abl {

/// Parse a sectioned key = value configuration. Missing keys take the
/// defaults of the selected case; unknown keys and malformed values throw
/// ConfigError naming the key.
CaseConfig parse_config(const std::string& text);

/// Reads and parses `path`; the raw text is returned through `text` if given.
CaseConfig load_config(const std::string& path, std::string* text = nullptr);

/// ABL_OUTPUT_DIR, when set and non-empty, replaces output.dir.
void apply_environment(CaseConfig& config);

/// 64-bit FNV-1a of the configuration text.
std::uint64_t config_hash(std::string_view text);

}  // namespace abl
