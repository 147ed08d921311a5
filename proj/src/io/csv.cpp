#include "io/csv.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdio>

namespace fsr::io {

namespace {

[[noreturn]] void bad(const std::string& what) { throw Error("csv: " + what); }

std::vector<std::string> split_line(const std::string& line) {
  std::vector<std::string> fields;
  std::size_t start = 0;
  while (true) {
    const std::size_t comma = line.find(',', start);
    std::string field = line.substr(
        start, comma == std::string::npos ? std::string::npos : comma - start);
    // Trim surrounding whitespace and a trailing CR from DOS line endings.
    const auto is_space = [](char c) { return c == ' ' || c == '\t' || c == '\r'; };
    while (!field.empty() && is_space(field.front())) field.erase(field.begin());
    while (!field.empty() && is_space(field.back())) field.pop_back();
    fields.push_back(std::move(field));
    if (comma == std::string::npos) break;
    start = comma + 1;
  }
  return fields;
}

bool parse_double(const std::string& field, double& out) {
  if (field.empty()) return false;
  const char* begin = field.data();
  const char* end = begin + field.size();
  auto [ptr, ec] = std::from_chars(begin, end, out);
  return ec == std::errc{} && ptr == end && std::isfinite(out);
}

}  // namespace

std::string format_double(double value) {
  char buffer[40];
  std::snprintf(buffer, sizeof buffer, "%.17g", value);
  return buffer;
}

CsvStream::CsvStream(const std::string& path, const InputConfig& input)
    : file_(path), input_(input) {
  if (!file_) bad("cannot open \"" + path + "\"");
  std::string header_line;
  if (!std::getline(file_, header_line)) bad("empty file \"" + path + "\"");
  const std::vector<std::string> header = split_line(header_line);
  column_count_ = header.size();

  std::vector<double> locations;
  std::vector<std::size_t> response_columns;
  for (std::size_t c = 0; c < header.size(); ++c) {
    const std::string& name = header[c];
    if (name.rfind(input_.response_prefix, 0) == 0) {
      double loc;
      if (!parse_double(name.substr(input_.response_prefix.size()), loc))
        bad("response header \"" + name + "\" has no numeric location");
      locations.push_back(loc);
      response_columns.push_back(c);
    }
  }
  if (locations.size() < 2) bad("need at least 2 response columns");

  if (input_.covariates.empty()) {
    for (std::size_t c = 0; c < header.size(); ++c)
      if (header[c].rfind("x", 0) == 0 &&
          header[c].rfind(input_.response_prefix, 0) != 0) {
        covariate_index_.push_back(c);
        covariate_names_.push_back(header[c]);
      }
  } else {
    for (const std::string& want : input_.covariates) {
      const auto it = std::find(header.begin(), header.end(), want);
      if (it == header.end()) bad("covariate column \"" + want + "\" not found");
      covariate_index_.push_back(
          static_cast<std::size_t>(it - header.begin()));
      covariate_names_.push_back(want);
    }
  }
  if (covariate_index_.empty()) bad("no covariate columns");

  // Response columns sorted by location, rescaled onto [0,1].
  std::vector<std::size_t> order(locations.size());
  for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
  std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    return locations[a] < locations[b];
  });
  const double lo = locations[order.front()];
  const double hi = locations[order.back()];
  if (!(hi > lo)) bad("response locations must not be all equal");
  Vector<double> points(static_cast<Eigen::Index>(order.size()));
  response_index_.resize(order.size());
  for (std::size_t i = 0; i < order.size(); ++i) {
    points[static_cast<Eigen::Index>(i)] = (locations[order[i]] - lo) / (hi - lo);
    response_index_[i] = response_columns[order[i]];
  }
  grid_ = Gridd(std::move(points));

  if (input_.standardize)
    moments_.emplace(static_cast<Eigen::Index>(covariate_index_.size()));
}

std::optional<FunctionalSampled> CsvStream::next() {
  std::string line;
  while (std::getline(file_, line)) {
    ++line_number_;
    if (line.empty() || line == "\r") continue;
    const std::vector<std::string> fields = split_line(line);
    FunctionalSampled sample;
    sample.x.resize(covariate_count());
    sample.y.resize(grid_.size());
    bool ok = fields.size() == column_count_;
    for (std::size_t i = 0; ok && i < covariate_index_.size(); ++i)
      ok = parse_double(fields[covariate_index_[i]],
                        sample.x[static_cast<Eigen::Index>(i)]);
    for (std::size_t i = 0; ok && i < response_index_.size(); ++i)
      ok = parse_double(fields[response_index_[i]],
                        sample.y[static_cast<Eigen::Index>(i)]);
    if (!ok) {
      if (input_.on_malformed == MalformedPolicy::abort)
        bad("malformed row at line " + std::to_string(line_number_));
      ++dropped_rows_;
      continue;
    }
    ++accepted_rows_;
    if (moments_) {
      moments_->add(sample.x);
      const Vector<double> sd = moments_->standard_deviation();
      for (Eigen::Index j = 0; j < sample.x.size(); ++j) {
        const double centered = sample.x[j] - moments_->mean()[j];
        sample.x[j] = sd[j] > 0 ? centered / sd[j] : 0.0;
      }
    }
    return sample;
  }
  return std::nullopt;
}

void write_dataset_csv(const std::string& path, const Datasetd& data,
                       const std::string& response_prefix) {
  data.require_consistent();
  std::ofstream out(path);
  if (!out) bad("cannot write \"" + path + "\"");
  for (Eigen::Index j = 0; j < data.x.cols(); ++j)
    out << (j ? "," : "") << "x" << (j + 1);
  for (Eigen::Index l = 0; l < data.grid.size(); ++l)
    out << "," << response_prefix << format_double(data.grid[l]);
  out << "\n";
  for (Eigen::Index i = 0; i < data.size(); ++i) {
    for (Eigen::Index j = 0; j < data.x.cols(); ++j)
      out << (j ? "," : "") << format_double(data.x(i, j));
    for (Eigen::Index l = 0; l < data.grid.size(); ++l)
      out << "," << format_double(data.y(i, l));
    out << "\n";
  }
  if (!out) bad("write failure on \"" + path + "\"");
}

void write_field_csv(const std::string& path, const CoefficientFieldd& field) {
  field.require_shape();
  std::ofstream out(path);
  if (!out) bad("cannot write \"" + path + "\"");
  out << "coefficient,location,value\n";
  for (Eigen::Index j = 0; j < field.covariates(); ++j)
    for (Eigen::Index l = 0; l < field.grid.size(); ++l)
      out << (j + 1) << "," << format_double(field.grid[l]) << ","
          << format_double(field.values(j, l)) << "\n";
  if (!out) bad("write failure on \"" + path + "\"");
}

void write_bands_csv(const std::string& path, const CoefficientFieldd& estimate,
                     const std::vector<BandExportRow>& bands) {
  estimate.require_shape();
  std::ofstream out(path);
  if (!out) bad("cannot write \"" + path + "\"");
  out << "method,level,coefficient,location,lower,estimate,upper\n";
  for (const BandExportRow& row : bands) {
    for (Eigen::Index j = 0; j < estimate.covariates(); ++j)
      for (Eigen::Index l = 0; l < estimate.grid.size(); ++l)
        out << row.method << "," << format_double(row.level) << "," << (j + 1)
            << "," << format_double(estimate.grid[l]) << ","
            << format_double(row.band->lower(j, l)) << ","
            << format_double(estimate.values(j, l)) << ","
            << format_double(row.band->upper(j, l)) << "\n";
  }
  if (!out) bad("write failure on \"" + path + "\"");
}

void write_trajectory_csv(const std::string& path,
                          const std::vector<TrajectoryPoint>& points) {
  std::ofstream out(path);
  if (!out) bad("cannot write \"" + path + "\"");
  out << "n,coefficient,location,value\n";
  for (const TrajectoryPoint& point : points) {
    for (Eigen::Index j = 0; j < point.average.covariates(); ++j)
      for (Eigen::Index l = 0; l < point.average.grid.size(); ++l)
        out << point.n << "," << (j + 1) << ","
            << format_double(point.average.grid[l]) << ","
            << format_double(point.average.values(j, l)) << "\n";
  }
  if (!out) bad("write failure on \"" + path + "\"");
}

}  // namespace fsr::io
