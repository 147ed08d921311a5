#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "fsr/bootstrap.hpp"
#include "fsr/online_gm.hpp"
#include "fsr/simulation.hpp"
#include "fsr/types.hpp"

#include "json.hpp"

namespace fsr::io {

enum class Mode { simulate, fit, infer, benchmark };

Mode parse_mode(const std::string& name);
const char* mode_name(Mode mode);

/// How load_stream treats a row that fails to parse.
enum class MalformedPolicy { skip, abort };

struct InputConfig {
  std::string path;
  /// Covariate columns by header name; empty selects every column whose
  /// name starts with "x", in file order.
  std::vector<std::string> covariates;
  /// Response columns are those whose name starts with this prefix; the
  /// remainder of the name is the numeric grid location.
  std::string response_prefix = "y@";
  bool standardize = false;
  MalformedPolicy on_malformed = MalformedPolicy::skip;
};

struct InferenceConfig {
  bool enabled = true;
  Eigen::Index chains = 500;
  /// Significance levels tau; each yields a 1 - tau band.
  std::vector<double> levels = {0.10};
  /// Observations before the perturbed-chain averages start accumulating.
  Eigen::Index burn_in = kDefaultChainBurnIn;
};

struct FitConfig {
  /// 0 = geometric stride (snapshots at n = 1, 2, 4, ...); otherwise every k.
  std::uint64_t trajectory_stride = 0;
  /// 0 = export on the native grid; otherwise interpolate to a uniform grid
  /// of this size.
  Eigen::Index output_grid = 0;
};

/**
 * One run manifest: everything a subcommand needs, loadable from a JSON
 * document with flat CLI flags layered on top. The full pipeline output is a
 * pure function of this struct.
 */
struct RunConfig {
  Mode mode = Mode::simulate;
  std::uint64_t seed = 1;
  int threads = 1;
  std::string out = ".";
  StepSchedule<double> schedule;
  InferenceConfig inference;
  DgpConfig dgp;            // simulate / benchmark
  InputConfig input;        // fit / infer
  FitConfig fit;            // fit
  std::uint64_t replications = 1;

  void validate() const;
};

/// Parses a config document; unknown keys are an error (manifests should not
/// silently rot).
RunConfig config_from_json(const nlohmann::json& doc);

RunConfig load_config(const std::string& path);

/// Round-trips the effective config back to JSON for the report echo.
nlohmann::json config_to_json(const RunConfig& config);

}  // namespace fsr::io
