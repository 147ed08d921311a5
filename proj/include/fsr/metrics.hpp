#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <vector>

#include "fsr/bootstrap.hpp"
#include "fsr/types.hpp"

namespace fsr {

/**
 * Root mean integrated squared error of an estimate against a reference,
 * per coefficient: sqrt(mean over grid of squared error), the Riemann
 * approximation of the L2[0,1] distance on a uniform grid.
 */
template <class Scalar>
Vector<Scalar> rmise(const CoefficientField<Scalar>& estimate,
                     const CoefficientField<Scalar>& reference) {
  if (estimate.values.rows() != reference.values.rows() ||
      estimate.values.cols() != reference.values.cols())
    throw Error("rmise: shape mismatch");
  Vector<Scalar> out(estimate.values.rows());
  for (Eigen::Index j = 0; j < out.size(); ++j)
    out[j] = functional_norm(
        Vector<Scalar>(estimate.values.row(j) - reference.values.row(j)));
  return out;
}

/// Mean and unbiased standard deviation of replicate values.
template <class Scalar>
struct ReplicateSummary {
  Scalar mean = 0;
  Scalar sd = 0;  // zero when fewer than two replicates
  std::size_t count = 0;
};

template <class Scalar>
ReplicateSummary<Scalar> summarize(const std::vector<Scalar>& values) {
  ReplicateSummary<Scalar> s;
  s.count = values.size();
  if (values.empty()) return s;
  Scalar sum = 0;
  for (Scalar v : values) sum += v;
  s.mean = sum / Scalar(s.count);
  if (s.count > 1) {
    Scalar ss = 0;
    for (Scalar v : values) ss += (v - s.mean) * (v - s.mean);
    s.sd = std::sqrt(ss / Scalar(s.count - 1));
  }
  return s;
}

/**
 * Pointwise coverage bookkeeping for confidence bands: counts, per
 * coefficient and grid point, how often the reference value lies inside the
 * band across replicates.
 */
template <class Scalar>
class CoverageAccumulator {
 public:
  CoverageAccumulator(Eigen::Index coefficients, Eigen::Index grid_size)
      : hits_(Matrix<Scalar>::Zero(coefficients, grid_size)) {}

  void add(const ConfidenceBand<Scalar>& band,
           const CoefficientField<Scalar>& reference) {
    if (band.lower.rows() != hits_.rows() || band.lower.cols() != hits_.cols())
      throw Error("coverage: shape mismatch");
    for (Eigen::Index j = 0; j < hits_.rows(); ++j)
      for (Eigen::Index l = 0; l < hits_.cols(); ++l) {
        const Scalar v = reference.values(j, l);
        if (band.lower(j, l) <= v && v <= band.upper(j, l)) hits_(j, l) += 1;
      }
    ++replicates_;
  }

  std::uint64_t replicates() const { return replicates_; }

  /// Empirical coverage per coefficient and grid point, in [0,1].
  Matrix<Scalar> rates() const {
    if (replicates_ == 0) throw Error("coverage: no replicates");
    return hits_ / Scalar(replicates_);
  }

  /// Coverage averaged over the grid, per coefficient.
  Vector<Scalar> mean_rates() const {
    return Vector<Scalar>(rates().rowwise().mean());
  }

 private:
  Matrix<Scalar> hits_;
  std::uint64_t replicates_ = 0;
};

/// Welford running mean/variance, one lane per column of a streamed vector.
template <class Scalar>
class OnlineMoments {
 public:
  explicit OnlineMoments(Eigen::Index size)
      : mean_(Vector<Scalar>::Zero(size)), m2_(Vector<Scalar>::Zero(size)) {}

  void add(const Vector<Scalar>& v) {
    if (v.size() != mean_.size()) throw Error("moments: size mismatch");
    ++count_;
    Vector<Scalar> delta = v - mean_;
    mean_ += delta / Scalar(count_);
    m2_ += delta.cwiseProduct(v - mean_);
  }

  std::uint64_t count() const { return count_; }
  const Vector<Scalar>& mean() const { return mean_; }
  /// Sum of squared deviations (the Welford M2 accumulator); snapshot state.
  const Vector<Scalar>& sum_squares() const { return m2_; }

  void restore(std::uint64_t count, Vector<Scalar> mean, Vector<Scalar> m2) {
    if (mean.size() != m2.size()) throw Error("moments: size mismatch");
    count_ = count;
    mean_ = std::move(mean);
    m2_ = std::move(m2);
  }

  Vector<Scalar> variance() const {
    if (count_ < 2) return Vector<Scalar>::Zero(mean_.size());
    return m2_ / Scalar(count_ - 1);
  }

  Vector<Scalar> standard_deviation() const {
    return variance().cwiseSqrt();
  }

 private:
  Vector<Scalar> mean_;
  Vector<Scalar> m2_;
  std::uint64_t count_ = 0;
};

/// Two-sample Kolmogorov-Smirnov distance: sup |F_a - F_b| over the pooled
/// sample points.
template <class Scalar>
Scalar ks_distance(std::vector<Scalar> a, std::vector<Scalar> b) {
  if (a.empty() || b.empty()) throw Error("ks: empty sample");
  std::sort(a.begin(), a.end());
  std::sort(b.begin(), b.end());
  Scalar d = 0;
  std::size_t i = 0, k = 0;
  while (i < a.size() && k < b.size()) {
    // Evaluate the ECDF gap only after stepping past every copy of the
    // current value in both samples; splitting a tie inflates the distance.
    const Scalar value = std::min(a[i], b[k]);
    while (i < a.size() && a[i] == value) ++i;
    while (k < b.size() && b[k] == value) ++k;
    d = std::max(d, std::abs(Scalar(i) / Scalar(a.size()) -
                             Scalar(k) / Scalar(b.size())));
  }
  return d;
}

/// Kolmogorov-Smirnov distance between a sample and the standard normal.
template <class Scalar>
Scalar ks_distance_normal(std::vector<Scalar> values) {
  if (values.empty()) throw Error("ks: empty sample");
  std::sort(values.begin(), values.end());
  const Scalar n = Scalar(values.size());
  Scalar d = 0;
  for (std::size_t i = 0; i < values.size(); ++i) {
    const Scalar cdf = Scalar(0.5) * std::erfc(-values[i] / std::sqrt(Scalar(2)));
    d = std::max(d, std::abs(Scalar(i + 1) / n - cdf));
    d = std::max(d, std::abs(cdf - Scalar(i) / n));
  }
  return d;
}

}  // namespace fsr
