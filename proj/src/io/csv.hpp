#pragma once

#include <cstdint>
#include <fstream>
#include <optional>
#include <string>
#include <vector>

#include "fsr/bootstrap.hpp"
#include "fsr/metrics.hpp"
#include "fsr/offline.hpp"
#include "fsr/types.hpp"
#include "io/config.hpp"

namespace fsr::io {

/// 17 significant digits: lossless for IEEE doubles, so written tables
/// round-trip bit-exactly.
std::string format_double(double value);

/**
 * Lazy reader for the sample schema: a header of covariate columns plus
 * response columns "<prefix><location>", then one observation per row.
 * Locations are parsed from the response headers and rescaled to [0,1].
 * Rows with missing or non-numeric fields are dropped (counted) or abort the
 * run, per the input policy. With standardization enabled, covariates are
 * centered and scaled by running moments — a one-pass approximation of the
 * usual offline standardization.
 */
class CsvStream {
 public:
  CsvStream(const std::string& path, const InputConfig& input);

  Eigen::Index covariate_count() const {
    return static_cast<Eigen::Index>(covariate_index_.size());
  }
  const Gridd& grid() const { return grid_; }
  const std::vector<std::string>& covariate_names() const {
    return covariate_names_;
  }

  /// Next valid sample, or nullopt at end of file.
  std::optional<FunctionalSampled> next();

  std::uint64_t dropped_rows() const { return dropped_rows_; }
  std::uint64_t accepted_rows() const { return accepted_rows_; }

  /// Running standardization state; engaged only when the input requests it.
  const std::optional<OnlineMoments<double>>& moments() const { return moments_; }

 private:
  std::ifstream file_;
  InputConfig input_;
  std::vector<std::size_t> covariate_index_;   // column -> x slot
  std::vector<std::size_t> response_index_;    // column -> grid slot
  std::vector<std::string> covariate_names_;
  std::size_t column_count_ = 0;
  Gridd grid_;
  std::optional<OnlineMoments<double>> moments_;
  std::uint64_t dropped_rows_ = 0;
  std::uint64_t accepted_rows_ = 0;
  std::uint64_t line_number_ = 1;  // header consumed in ctor
};

/// Writes a dataset in the schema CsvStream reads (x1..xd, <prefix><loc>...).
void write_dataset_csv(const std::string& path, const Datasetd& data,
                       const std::string& response_prefix = "y@");

/// Long-format coefficient table: coefficient, location, value.
void write_field_csv(const std::string& path, const CoefficientFieldd& field);

/// Long-format band table: method, level, coefficient, location, lower,
/// estimate, upper.
struct BandExportRow {
  const char* method;
  double level;  // confidence level 1 - tau
  const ConfidenceBandd* band;
};
void write_bands_csv(const std::string& path, const CoefficientFieldd& estimate,
                     const std::vector<BandExportRow>& bands);

/// Long-format trajectory table: n, coefficient, location, value.
struct TrajectoryPoint {
  std::uint64_t n;
  CoefficientFieldd average;
};
void write_trajectory_csv(const std::string& path,
                          const std::vector<TrajectoryPoint>& points);

}  // namespace fsr::io
