#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <string_view>

#include "bcsr/scene.hpp"

namespace bcsr {

/// Parses the JSON scenario format described in the README. Missing optional
/// keys take the defaults of the value types; `Pt` defaults to Mt and
/// `powers` to the uniform allocation at Pt.
Scenario parse_scenario(std::string_view json_text);
Scenario load_scenario(const std::filesystem::path& path);

/// Canonical JSON (sorted keys, full double precision).
std::string dump_scenario(const Scenario& scenario);

/// FNV-1a over the canonical dump. Stamped into matrix files so a cached
/// dictionary or designed phi is never reused with the wrong scenario.
std::uint64_t scenario_hash(const Scenario& scenario);

}  // namespace bcsr
