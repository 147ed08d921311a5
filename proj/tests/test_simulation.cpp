#include <cmath>
#include <cstdint>

#include "doctest.h"
#include "fsr/metrics.hpp"
#include "fsr/offline.hpp"
#include "fsr/rng.hpp"
#include "fsr/simulation.hpp"
#include "fsr/types.hpp"

TEST_CASE("coefficient functions: pinned values") {
  // Probe on {0, 1/2, 1} plus a finer grid for interior points.
  const auto grid = fsr::grid_uniform<double>(3);
  const auto field = fsr::true_beta(grid);
  REQUIRE(field.values.rows() == 3);
  REQUIRE(field.values.cols() == 3);

  CHECK(field.values(0, 0) == 0.0);
  CHECK(field.values(0, 1) == doctest::Approx(0.5).epsilon(1e-14));
  CHECK(field.values(0, 2) == doctest::Approx(2.0).epsilon(1e-14));

  CHECK(std::abs(field.values(1, 0)) < 1e-15);  // cos(pi/2)
  CHECK(field.values(1, 2) == doctest::Approx(1.0).epsilon(1e-12));

  CHECK(std::abs(field.values(2, 0)) < 1e-15);
  // sin(pi/2) + sqrt(2) * 3pi/2 at t = 1, with the printed linear term.
  CHECK(field.values(2, 2) == doctest::Approx(7.66432439).epsilon(1e-7));

  const auto sine = fsr::true_beta(grid, fsr::Beta3Variant::sine);
  CHECK(sine.values(2, 2) ==
        doctest::Approx(1.0 - std::sqrt(2.0)).epsilon(1e-12));
  // The first two coefficients are unaffected by the variant toggle.
  CHECK(sine.values.row(0) == field.values.row(0));
  CHECK(sine.values.row(1) == field.values.row(1));
}

TEST_CASE("coefficient functions: beta_2 dips to -1 at t = 1/3") {
  fsr::Vectord points(3);
  points << 0.0, 1.0 / 3.0, 1.0;
  const fsr::Gridd grid(points);
  const auto field = fsr::true_beta(grid);
  CHECK(field.values(1, 1) == doctest::Approx(-1.0).epsilon(1e-12));
}

TEST_CASE("covariate covariance: pinned entries") {
  const auto cov = fsr::dgp_covariate_covariance<double>();
  CHECK(cov(0, 0) == doctest::Approx(0.5).epsilon(1e-14));
  CHECK(cov(1, 1) == doctest::Approx(1.0).epsilon(1e-14));
  CHECK(cov(2, 2) == doctest::Approx(2.0).epsilon(1e-14));
  CHECK(cov(0, 1) == doctest::Approx(0.5 * std::sqrt(0.5)).epsilon(1e-14));
  CHECK(cov(0, 2) == doctest::Approx(0.25).epsilon(1e-14));
  CHECK(cov(1, 2) == doctest::Approx(0.5 * std::sqrt(2.0)).epsilon(1e-14));
  CHECK(cov == cov.transpose());
}

TEST_CASE("covariate sampler: long-run moments match the design") {
  fsr::Rng rng(1001);
  const int draws = 1000000;
  Eigen::Vector3d sum = Eigen::Vector3d::Zero();
  Eigen::Matrix3d outer = Eigen::Matrix3d::Zero();
  for (int i = 0; i < draws; ++i) {
    const fsr::Vectord x = fsr::sample_covariates<double>(rng);
    sum += x;
    outer += x * x.transpose();
  }
  const Eigen::Vector3d mean = sum / draws;
  const Eigen::Matrix3d second = outer / draws;
  const Eigen::Matrix3d cov = second - mean * mean.transpose();

  for (int i = 0; i < 3; ++i) CHECK(std::abs(mean[i]) < 0.01);
  CHECK(cov(0, 0) == doctest::Approx(0.5).epsilon(0.02));
  CHECK(cov(1, 1) == doctest::Approx(1.0).epsilon(0.02));
  CHECK(cov(2, 2) == doctest::Approx(2.0).epsilon(0.02));

  const double corr_12 = cov(0, 1) / std::sqrt(cov(0, 0) * cov(1, 1));
  const double corr_13 = cov(0, 2) / std::sqrt(cov(0, 0) * cov(2, 2));
  CHECK(corr_12 == doctest::Approx(0.5).epsilon(0.04));
  CHECK(corr_13 == doctest::Approx(0.25).epsilon(0.08));
}

TEST_CASE("residual process: variance at the curve midpoint") {
  // On {0, 1/2, 1} the second basis function vanishes at t = 1/2, so
  // U(1/2) = -xi_1 + eps: variance 0.5 + 0.25 under the Gaussian scores.
  const auto grid = fsr::grid_uniform<double>(3);
  const int draws = 200000;

  fsr::Rng rng(2002);
  fsr::OnlineMoments<double> mid(1);
  fsr::Vectord cell(1);
  for (int i = 0; i < draws; ++i) {
    const fsr::Vectord u =
        fsr::sample_residual(rng, grid, fsr::ResidualTail::gaussian);
    cell[0] = u[1];
    mid.add(cell);
  }
  CHECK(std::abs(mid.mean()[0]) < 0.01);
  CHECK(mid.variance()[0] == doctest::Approx(0.75).epsilon(0.03));

  // Without the white-noise component only the score term remains.
  fsr::Rng rng2(2003);
  fsr::OnlineMoments<double> scores(1);
  for (int i = 0; i < draws; ++i) {
    const fsr::Vectord u = fsr::sample_residual(rng2, grid,
                                                fsr::ResidualTail::gaussian,
                                                /*score_covariance_scale=*/0.5,
                                                /*noise_variance=*/0.0);
    cell[0] = u[1];
    scores.add(cell);
  }
  CHECK(scores.variance()[0] == doctest::Approx(0.5).epsilon(0.03));
}

TEST_CASE("residual process: heavy-tailed scores have the t3 absolute moment") {
  // With zero noise, U(1/2) = -xi_1 and xi_1 is standard t with 3 degrees of
  // freedom: E|xi_1| = 2 sqrt(3) / pi, variance 3.
  const auto grid = fsr::grid_uniform<double>(3);
  fsr::Rng rng(3003);
  const int draws = 200000;
  double abs_sum = 0.0, sq_sum = 0.0;
  for (int i = 0; i < draws; ++i) {
    const fsr::Vectord u = fsr::sample_residual(rng, grid,
                                                fsr::ResidualTail::student_t3,
                                                /*score_covariance_scale=*/0.5,
                                                /*noise_variance=*/0.0);
    abs_sum += std::abs(u[1]);
    sq_sum += u[1] * u[1];
  }
  const double abs_mean = abs_sum / draws;
  const double variance = sq_sum / draws;
  CHECK(abs_mean == doctest::Approx(2.0 * std::sqrt(3.0) / fsr::kPi).epsilon(0.02));
  // The fourth moment of t3 is infinite, so the sample variance converges
  // slowly; the window is wide and the seed is fixed.
  CHECK(variance > 2.5);
  CHECK(variance < 3.5);
}

TEST_CASE("noise-free configuration reduces to the exact linear model") {
  fsr::DgpConfig config;
  config.n = 50;
  config.m = 8;
  config.seed = 17;
  config.noise_variance = 0.0;
  config.score_covariance_scale = 0.0;

  fsr::DgpStream<double> stream(config);
  const auto& beta = stream.beta();
  while (const auto* sample = stream()) {
    const fsr::Vectord expected = fsr::apply_coefficients(beta, sample->x);
    CHECK(sample->y == expected);
  }

  const auto data = fsr::generate_dataset<double>(config);
  const auto fit = fsr::fit_ls_offline(data);
  CHECK((fit.values - beta.values).cwiseAbs().maxCoeff() < 1e-8);
}

TEST_CASE("identical configs generate identical data; seeds decouple them") {
  fsr::DgpConfig config;
  config.n = 40;
  config.m = 6;
  config.seed = 99;
  const auto a = fsr::generate_dataset<double>(config);
  const auto b = fsr::generate_dataset<double>(config);
  CHECK(a.x == b.x);
  CHECK(a.y == b.y);

  config.seed = 100;
  const auto c = fsr::generate_dataset<double>(config);
  CHECK(a.x != c.x);
}

TEST_CASE("stream mechanics: count, exhaustion, and accessors") {
  fsr::DgpConfig config;
  config.n = 5;
  config.m = 4;
  fsr::DgpStream<double> stream(config);

  CHECK(stream.grid() == fsr::grid_uniform<double>(4));
  CHECK(stream.beta().values == fsr::true_beta(stream.grid()).values);

  CHECK(stream.remaining() == 5);
  int produced = 0;
  while (const auto* sample = stream()) {
    ++produced;
    CHECK(sample->x.size() == fsr::kDgpCovariates);
    CHECK(sample->y.size() == 4);
  }
  CHECK(produced == 5);
  CHECK(stream.remaining() == 0);
  CHECK(stream() == nullptr);  // stays exhausted
}

TEST_CASE("dgp configuration validation") {
  fsr::DgpConfig config;
  config.n = 0;
  CHECK_THROWS_AS(config.validate(), fsr::Error);
  config = {};
  config.m = 1;
  CHECK_THROWS_AS(config.validate(), fsr::Error);
  config = {};
  config.noise_variance = -0.1;
  CHECK_THROWS_AS(config.validate(), fsr::Error);
  config = {};
  config.score_covariance_scale = -1.0;
  CHECK_THROWS_AS(config.validate(), fsr::Error);
  config = {};
  CHECK_NOTHROW(config.validate());
}
