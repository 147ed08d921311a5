#pragma once

#include <optional>
#include <string>

#include "fsr/bootstrap.hpp"
#include "fsr/metrics.hpp"

namespace fsr::io {

/**
 * Binary stop/resume image of the full recursive state.
 *
 * Layout (little-endian, IEEE-754 doubles), version tag in the magic:
 *
 *   bytes 0..7   magic "FSRSNAP1"
 *   u64          d, m, chain_count, burn_in, n, master_seed
 *   f64          gamma, alpha, max_step
 *   f64[m]       grid locations
 *   f64[d*m]     estimator iterate (row-major)
 *   f64[d*m]     estimator average
 *   u8           standardizer present (0/1)
 *   if present:  u64 count; f64[d] mean; f64[d] m2
 *   per chain:   f64[d*m] iterate; f64[d*m] average;
 *                u64[4] generator state; u8 spare flag; f64 spare
 *
 * A snapshot restores to an engine that continues bit-identically to one
 * that never stopped.
 */
struct Snapshot {
  InferenceEngined engine;
  std::optional<OnlineMoments<double>> standardizer;
};

void save_snapshot(const std::string& path, const InferenceEngined& engine,
                   const OnlineMoments<double>* standardizer = nullptr);

Snapshot load_snapshot(const std::string& path);

}  // namespace fsr::io
