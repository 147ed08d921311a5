#pragma once

#include <cmath>
#include <cstdint>

#include "fsr/offline.hpp"
#include "fsr/rng.hpp"
#include "fsr/types.hpp"

namespace fsr {

inline constexpr double kPi = 3.141592653589793238462643383279502884;

enum class ResidualTail { gaussian, student_t3 };

/// The third coefficient function as printed (with a linear second term) or
/// the smooth alternative; estimation accuracy is equivariant to the choice,
/// so the toggle is cosmetic. See the config reference.
enum class Beta3Variant { verbatim, sine };

/**
 * The canned simulation design: d = 3 correlated Gaussian covariates, three
 * fixed coefficient functions, and a two-component residual process with
 * Gaussian or heavy-tailed scores plus white noise.
 */
struct DgpConfig {
  std::uint64_t n = 10000;
  Eigen::Index m = 50;
  ResidualTail tail = ResidualTail::gaussian;
  std::uint64_t seed = 1;
  /// Variance of the white-noise component epsilon(t_k) ~ N(0, 0.25),
  /// i.e. standard deviation 0.5. The reference tables pin this down.
  double noise_variance = 0.25;
  /// Covariance of the Gaussian scores is score_covariance_scale * I_2.
  /// The heavy-tailed case ignores it: those scores are a STANDARD bivariate
  /// t3 (identity scale matrix, covariance 3 * I_2), which is what the
  /// reference tables correspond to.
  double score_covariance_scale = 0.5;
  Beta3Variant beta3 = Beta3Variant::verbatim;

  void validate() const {
    if (n < 1) throw Error("dgp: n must be >= 1");
    if (m < 2) throw Error("dgp: m must be >= 2");
    if (!(noise_variance >= 0)) throw Error("dgp: noise_variance must be >= 0");
    if (!(score_covariance_scale >= 0))
      throw Error("dgp: score_covariance_scale must be >= 0");
  }
};

inline constexpr Eigen::Index kDgpCovariates = 3;

/// Var(X_i) = 0.5 * 2^(i-1), Cor(X_i, X_j) = 0.5^|i-j|.
template <class Scalar = double>
Eigen::Matrix<Scalar, 3, 3> dgp_covariate_covariance() {
  Eigen::Matrix<Scalar, 3, 3> cov;
  for (int i = 0; i < 3; ++i) {
    for (int j = 0; j < 3; ++j) {
      const Scalar sd_i = std::sqrt(Scalar(0.5) * Scalar(1 << i));
      const Scalar sd_j = std::sqrt(Scalar(0.5) * Scalar(1 << j));
      cov(i, j) = std::pow(Scalar(0.5), std::abs(i - j)) * sd_i * sd_j;
    }
  }
  return cov;
}

/// beta_1 = 2t^2, beta_2 = cos(3 pi t / 2 + pi / 2),
/// beta_3 = sin(pi t / 2) + sqrt(2) * (3 pi t / 2) as printed (linear term),
/// or sin(pi t / 2) + sqrt(2) * sin(3 pi t / 2) for the sine variant.
template <class Scalar>
CoefficientField<Scalar> true_beta(const Grid<Scalar>& grid,
                                   Beta3Variant beta3 = Beta3Variant::verbatim) {
  CoefficientField<Scalar> field;
  field.grid = grid;
  field.values.resize(kDgpCovariates, grid.size());
  for (Eigen::Index l = 0; l < grid.size(); ++l) {
    const Scalar t = grid[l];
    field.values(0, l) = Scalar(2) * t * t;
    field.values(1, l) = std::cos(Scalar(1.5) * Scalar(kPi) * t + Scalar(kPi) / 2);
    const Scalar first = std::sin(Scalar(kPi) * t / 2);
    field.values(2, l) =
        beta3 == Beta3Variant::verbatim
            ? first + std::sqrt(Scalar(2)) * (Scalar(1.5) * Scalar(kPi) * t)
            : first + std::sqrt(Scalar(2)) * std::sin(Scalar(1.5) * Scalar(kPi) * t);
  }
  return field;
}

/// One mean-zero trivariate normal draw with the design covariance.
template <class Scalar>
Vector<Scalar> sample_covariates(Rng& rng) {
  static const Eigen::Matrix<Scalar, 3, 3> chol =
      Eigen::Matrix<Scalar, 3, 3>(dgp_covariate_covariance<Scalar>().llt().matrixL());
  Eigen::Vector<Scalar, 3> z;
  for (int i = 0; i < 3; ++i) z[i] = Scalar(rng.normal());
  return chol * z;
}

/// U(t) = xi_1 * phi_1(t) + xi_2 * phi_2(t) + eps(t) with
/// phi_1 = -cos(pi (t - 1/2)), phi_2 = sin(t - 1/2) (argument NOT scaled by
/// pi; as printed). Scores per DgpConfig; eps i.i.d. N(0, noise_variance).
template <class Scalar>
Vector<Scalar> sample_residual(Rng& rng, const Grid<Scalar>& grid, ResidualTail tail,
                               Scalar score_covariance_scale = Scalar(0.5),
                               Scalar noise_variance = Scalar(0.25)) {
  Scalar xi1, xi2;
  if (tail == ResidualTail::gaussian) {
    const Scalar scale = std::sqrt(score_covariance_scale);
    xi1 = scale * Scalar(rng.normal());
    xi2 = scale * Scalar(rng.normal());
  } else {
    const Scalar z1 = Scalar(rng.normal());
    const Scalar z2 = Scalar(rng.normal());
    const Scalar w = Scalar(rng.chi_squared_3());
    const Scalar scale = std::sqrt(Scalar(3) / std::max(w, Scalar(1e-300)));
    xi1 = z1 * scale;
    xi2 = z2 * scale;
  }
  const Scalar noise_sd = std::sqrt(noise_variance);
  Vector<Scalar> u(grid.size());
  for (Eigen::Index l = 0; l < grid.size(); ++l) {
    const Scalar t = grid[l];
    u[l] = -xi1 * std::cos(Scalar(kPi) * (t - Scalar(0.5))) +
           xi2 * std::sin(t - Scalar(0.5)) + noise_sd * Scalar(rng.normal());
  }
  return u;
}

/**
 * Streaming sample generator: produces the n samples one at a time, a pure
 * function of the config. Usable directly as the stream argument of
 * fit_stream (returns nullptr when exhausted).
 */
template <class Scalar>
class DgpStream {
 public:
  explicit DgpStream(DgpConfig config)
      : config_(config),
        rng_(derive_stream_seed(config.seed, StreamDomain::dataset, 0)),
        grid_(grid_uniform<Scalar>(config.m)),
        beta_(true_beta(grid_, config.beta3)) {
    config_.validate();
  }

  const Grid<Scalar>& grid() const { return grid_; }
  const CoefficientField<Scalar>& beta() const { return beta_; }
  std::uint64_t remaining() const { return config_.n - produced_; }

  const FunctionalSample<Scalar>* operator()() {
    if (produced_ >= config_.n) return nullptr;
    ++produced_;
    sample_.x = sample_covariates<Scalar>(rng_);
    sample_.y = apply_coefficients(beta_, sample_.x) +
                sample_residual(rng_, grid_, config_.tail,
                                Scalar(config_.score_covariance_scale),
                                Scalar(config_.noise_variance));
    return &sample_;
  }

 private:
  DgpConfig config_;
  Rng rng_;
  Grid<Scalar> grid_;
  CoefficientField<Scalar> beta_;
  FunctionalSample<Scalar> sample_;
  std::uint64_t produced_ = 0;
};

using DgpStreamd = DgpStream<double>;

/// Materializes the whole stream for the offline solvers.
template <class Scalar>
Dataset<Scalar> generate_dataset(const DgpConfig& config) {
  DgpStream<Scalar> stream(config);
  Dataset<Scalar> data;
  data.grid = stream.grid();
  data.x.resize(static_cast<Eigen::Index>(config.n), kDgpCovariates);
  data.y.resize(static_cast<Eigen::Index>(config.n), config.m);
  Eigen::Index i = 0;
  while (const FunctionalSample<Scalar>* sample = stream()) {
    data.x.row(i) = sample->x.transpose();
    data.y.row(i) = sample->y.transpose();
    ++i;
  }
  return data;
}

}  // namespace fsr
