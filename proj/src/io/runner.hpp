#pragma once

#include "io/config.hpp"

namespace fsr::io {

/// Dispatches on config.mode; every entry point writes its outputs under
/// config.out and returns the report it wrote.
nlohmann::json run(const RunConfig& config);

nlohmann::json run_simulate(const RunConfig& config);
nlohmann::json run_fit(const RunConfig& config);
nlohmann::json run_infer(const RunConfig& config);
nlohmann::json run_benchmark(const RunConfig& config);

}  // namespace fsr::io
