#pragma once

#include <cstdint>
#include <string>

#include "io/config.hpp"

#include "json.hpp"

namespace fsr::io {

/**
 * Every report carries the same envelope — effective config echo, seed,
 * library version, and drop counts — plus a mode-specific results object.
 * Serialization is key-sorted with no timing or host fields, so a report is
 * byte-identical across runs and thread counts.
 */
nlohmann::json make_report(const RunConfig& config, std::uint64_t dropped_rows,
                           nlohmann::json results);

void write_report(const std::string& path, const nlohmann::json& report);

}  // namespace fsr::io
