#include "io/report.hpp"

#include <fstream>

#include "fsr/version.hpp"

namespace fsr::io {

nlohmann::json make_report(const RunConfig& config, std::uint64_t dropped_rows,
                           nlohmann::json results) {
  nlohmann::json report;
  report["config"] = config_to_json(config);
  report["library_version"] = kLibraryVersion;
  report["seed"] = config.seed;
  report["drop_counts"] = {{"malformed_rows", dropped_rows}};
  report["results"] = std::move(results);
  return report;
}

void write_report(const std::string& path, const nlohmann::json& report) {
  std::ofstream out(path);
  if (!out) throw Error("report: cannot write \"" + path + "\"");
  out << report.dump(2) << "\n";
  if (!out) throw Error("report: write failure on \"" + path + "\"");
}

}  // namespace fsr::io
