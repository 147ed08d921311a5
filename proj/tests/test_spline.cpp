#include <cmath>
#include <numbers>

#include "doctest.h"
#include "fsr/rng.hpp"
#include "fsr/spline.hpp"
#include "fsr/types.hpp"

namespace {

// Max absolute error against a reference function on a fine probe grid.
template <class F>
double max_error(const fsr::SplineCurved& curve, F&& reference, int probes) {
  double worst = 0.0;
  for (int i = 0; i <= probes; ++i) {
    const double t = static_cast<double>(i) / probes;
    worst = std::max(worst, std::abs(curve(t) - reference(t)));
  }
  return worst;
}

// L2 error of the spline through m uniform knots of `reference`.
template <class F>
double l2_error(Eigen::Index m, F&& reference, int probes) {
  const auto knots = fsr::grid_uniform<double>(m);
  fsr::Vectord values(m);
  for (Eigen::Index i = 0; i < m; ++i) values[i] = reference(knots[i]);
  const fsr::SplineCurved curve(knots, values);
  fsr::Vectord errors(probes + 1);
  for (int i = 0; i <= probes; ++i) {
    const double t = static_cast<double>(i) / probes;
    errors[i] = curve(t) - reference(t);
  }
  return fsr::functional_norm(errors);
}

}  // namespace

TEST_CASE("spline interpolates its knots exactly") {
  const auto knots = fsr::grid_uniform<double>(12);
  fsr::Vectord values(12);
  fsr::Rng rng(15);
  for (Eigen::Index i = 0; i < 12; ++i) values[i] = rng.normal();
  const fsr::SplineCurved curve(knots, values);
  for (Eigen::Index i = 0; i < 12; ++i) CHECK(curve(knots[i]) == values[i]);
}

TEST_CASE("spline reproduces constants and lines") {
  const auto knots = fsr::grid_uniform<double>(7);

  const fsr::SplineCurved flat(knots, fsr::Vectord::Constant(7, 1.5));
  for (double t : {0.0, 0.013, 0.4, 0.77, 1.0}) CHECK(flat(t) == doctest::Approx(1.5));

  fsr::Vectord line(7);
  for (Eigen::Index i = 0; i < 7; ++i) line[i] = 2.0 * knots[i] + 1.0;
  const fsr::SplineCurved linear(knots, line);
  // Linear data has zero second differences, so the spline is the line itself.
  for (double t = 0.0; t <= 1.0; t += 0.001)
    CHECK(linear(t) == doctest::Approx(2.0 * t + 1.0).epsilon(1e-13));
  // Outside the knots the curve holds the boundary value.
  CHECK(linear(-0.5) == 1.0);
  CHECK(linear(1.5) == 3.0);
}

TEST_CASE("spline extends as a constant beyond the knots") {
  const auto knots = fsr::grid_uniform<double>(9);
  fsr::Vectord values(9);
  for (Eigen::Index i = 0; i < 9; ++i) values[i] = std::sin(3.0 * knots[i]);
  const fsr::SplineCurved curve(knots, values);
  CHECK(curve(-1.0) == values[0]);
  CHECK(curve(-1e-9) == values[0]);
  CHECK(curve(2.0) == values[8]);
  CHECK(curve(1.0 + 1e-12) == values[8]);
}

TEST_CASE("three-knot spline: hand-solved coefficients") {
  // Knots {0, 1/2, 1}, values {0, 1, 0}: the single interior equation is
  // 2 * M_1 = 6 * ((0-1)/.5 - (1-0)/.5) = -24, so M = (0, -12, 0), and
  // s(1/4) = 1/2 + (b^3 - b) * M_1 * h^2 / 6 = 0.6875 with b = 1/2, h = 1/2.
  fsr::Vectord values(3);
  values << 0.0, 1.0, 0.0;
  const fsr::SplineCurved curve(fsr::grid_uniform<double>(3), values);
  CHECK(curve.second_derivatives()[0] == 0.0);
  CHECK(curve.second_derivatives()[1] == doctest::Approx(-12.0).epsilon(1e-14));
  CHECK(curve.second_derivatives()[2] == 0.0);
  CHECK(curve(0.25) == doctest::Approx(0.6875).epsilon(1e-14));
  CHECK(curve(0.75) == doctest::Approx(0.6875).epsilon(1e-14));
}

TEST_CASE("two knots degenerate to linear interpolation") {
  fsr::Vectord values(2);
  values << 1.0, 3.0;
  const fsr::SplineCurved curve(fsr::grid_uniform<double>(2), values);
  CHECK(curve(0.5) == doctest::Approx(2.0));
  CHECK(curve(0.25) == doctest::Approx(1.5));
  CHECK(curve(-2.0) == 1.0);
  CHECK(curve(7.0) == 3.0);
}

TEST_CASE("smooth periodic target: small uniform error at 50 knots") {
  const auto knots = fsr::grid_uniform<double>(50);
  fsr::Vectord values(50);
  const auto target = [](double t) { return std::sin(2.0 * std::numbers::pi * t); };
  for (Eigen::Index i = 0; i < 50; ++i) values[i] = target(knots[i]);
  const fsr::SplineCurved curve(knots, values);
  CHECK(max_error(curve, target, 2000) < 1e-4);
}

TEST_CASE("refining the knots shrinks the error") {
  const auto target = [](double t) { return std::sin(2.0 * std::numbers::pi * t); };
  CHECK(l2_error(40, target, 1000) < l2_error(20, target, 1000));
}

TEST_CASE("fourth-order convergence on a boundary-compatible target") {
  // sin(pi t) has vanishing second derivative at both ends, so the natural
  // spline converges at the full fourth-order rate: quadrupling the knots
  // should divide the L2 error by roughly (39/9)^4, around 350.
  const auto target = [](double t) { return std::sin(std::numbers::pi * t); };
  const double coarse = l2_error(10, target, 1000);
  const double fine = l2_error(40, target, 1000);
  const double ratio = coarse / fine;
  CAPTURE(coarse);
  CAPTURE(fine);
  CAPTURE(ratio);
  CHECK(ratio > 128.0);
  CHECK(ratio < 512.0);
}

TEST_CASE("spline rejects malformed inputs") {
  const auto knots = fsr::grid_uniform<double>(4);
  CHECK_THROWS_AS(fsr::SplineCurved(knots, fsr::Vectord::Zero(3)), fsr::Error);
  fsr::Vectord bad = fsr::Vectord::Zero(4);
  bad[2] = std::nan("");
  CHECK_THROWS_AS(fsr::SplineCurved(knots, bad), fsr::Error);
}

TEST_CASE("field interpolation: identity on the source grid") {
  const auto grid = fsr::grid_uniform<double>(15);
  fsr::CoefficientField<double> field;
  field.grid = grid;
  field.values.resize(2, 15);
  fsr::Rng rng(92);
  for (Eigen::Index j = 0; j < 2; ++j)
    for (Eigen::Index l = 0; l < 15; ++l) field.values(j, l) = rng.normal();

  const auto same = fsr::interpolate_field(field, grid);
  CHECK(same.values == field.values);
  CHECK(same.grid == field.grid);
}

TEST_CASE("field interpolation: refinement tracks each row's function") {
  const auto grid = fsr::grid_uniform<double>(25);
  fsr::CoefficientField<double> field;
  field.grid = grid;
  field.values.resize(2, 25);
  for (Eigen::Index l = 0; l < 25; ++l) {
    field.values(0, l) = 2.0 * grid[l] + 1.0;                 // linear row
    field.values(1, l) = std::sin(2.0 * std::numbers::pi * grid[l]);  // smooth row
  }

  const auto query = fsr::grid_uniform<double>(301);
  const auto refined = fsr::interpolate_field(field, query);
  REQUIRE(refined.values.rows() == 2);
  REQUIRE(refined.values.cols() == 301);
  for (Eigen::Index l = 0; l < 301; ++l) {
    CHECK(refined.values(0, l) ==
          doctest::Approx(2.0 * query[l] + 1.0).epsilon(1e-12));
    CHECK(std::abs(refined.values(1, l) - std::sin(2.0 * std::numbers::pi * query[l])) <
          5e-4);
  }
}
