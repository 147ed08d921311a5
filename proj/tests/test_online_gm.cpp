#include "doctest.h"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <vector>

#include "fsr/metrics.hpp"
#include "fsr/online_gm.hpp"
#include "fsr/simulation.hpp"

using namespace fsr;

namespace {

FunctionalSampled make_sample(std::initializer_list<double> x,
                              std::initializer_list<double> y) {
  FunctionalSampled s;
  s.x = Vectord(static_cast<Eigen::Index>(x.size()));
  std::copy(x.begin(), x.end(), s.x.data());
  s.y = Vectord(static_cast<Eigen::Index>(y.size()));
  std::copy(y.begin(), y.end(), s.y.data());
  return s;
}

}  // namespace

TEST_CASE("step schedule values") {
  StepSchedule<double> s1{1.0, 0.75, 3.0};
  CHECK(step_size(1, s1) == doctest::Approx(1.0));
  StepSchedule<double> s2{2.0, 0.75, 3.0};
  CHECK(step_size(16, s2) == doctest::Approx(0.25));  // 16^0.75 = 8
  StepSchedule<double> s3{3.0, 0.75, 3.0};
  CHECK(step_size(10000, s3) == doctest::Approx(3e-3));  // 10000^0.75 = 1000
  CHECK_THROWS_AS(step_size(0, s1), Error);
}

TEST_CASE("step schedule cap binds only above max_step") {
  StepSchedule<double> aggressive{10.0, 0.75, 3.0};
  CHECK(step_size(1, aggressive) == doctest::Approx(3.0));
  CHECK(step_size(2, aggressive) == doctest::Approx(std::min(10.0 * std::pow(2.0, -0.75), 3.0)));
  // Far along the schedule the cap no longer matters.
  CHECK(step_size(10000, aggressive) == doctest::Approx(1e-2));
  // gamma <= max_step never hits the cap at any n.
  StepSchedule<double> tame{3.0, 0.75, 3.0};
  for (std::uint64_t n : {1ULL, 2ULL, 7ULL, 100ULL})
    CHECK(step_size(n, tame) == doctest::Approx(3.0 * std::pow(double(n), -0.75)));
}

TEST_CASE("schedule validation") {
  CHECK_THROWS_AS((StepSchedule<double>{0.0, 0.75, 3.0}).validate(), Error);
  CHECK_THROWS_AS((StepSchedule<double>{1.0, 0.5, 3.0}).validate(), Error);
  CHECK_THROWS_AS((StepSchedule<double>{1.0, 1.01, 3.0}).validate(), Error);
  CHECK_THROWS_AS((StepSchedule<double>{1.0, 0.75, 0.0}).validate(), Error);
  CHECK_NOTHROW((StepSchedule<double>{1.0, 1.0, 3.0}).validate());
}

TEST_CASE("sgd step: exact fit leaves the iterate unchanged") {
  GmStated state = GmStated::zero(1, grid_uniform(2));
  state.current.values << 2.0, 3.0;
  const FunctionalSampled s = make_sample({1.0}, {2.0, 3.0});  // y = x^T beta
  sgd_step(state, s);
  CHECK(state.current.values(0, 0) == 2.0);
  CHECK(state.current.values(0, 1) == 3.0);
}

TEST_CASE("sgd step: one-line evaluation") {
  // d=1, m=2, beta = 0, x = [1], y = [1,1], gamma_1 = 0.1: the residual has
  // unit functional norm, so the update is gamma * x * r^T = [[0.1, 0.1]].
  GmStated state = GmStated::zero(1, grid_uniform(2), {0.1, 0.75, 3.0});
  sgd_step(state, make_sample({1.0}, {1.0, 1.0}));
  CHECK(state.current.values(0, 0) == doctest::Approx(0.1));
  CHECK(state.current.values(0, 1) == doctest::Approx(0.1));
}

TEST_CASE("sgd step: update magnitude is gamma * |x| * sqrt(m)") {
  // The step direction r / ||r|| has unit functional norm, i.e. plain grid
  // norm sqrt(m); stacking the per-covariate rows multiplies by |x|_2.
  Rng rng(5);
  const Eigen::Index d = 3, m = 17;
  GmStated state = GmStated::zero(d, grid_uniform(m), {0.7, 0.75, 3.0});
  for (Eigen::Index j = 0; j < d; ++j)
    for (Eigen::Index l = 0; l < m; ++l) state.current.values(j, l) = rng.normal();
  state.n = 4;  // gamma_5
  FunctionalSampled s;
  s.x = Vectord(d);
  s.y = Vectord(m);
  for (Eigen::Index j = 0; j < d; ++j) s.x[j] = rng.normal();
  for (Eigen::Index l = 0; l < m; ++l) s.y[l] = rng.normal();

  const Matrixd before = state.current.values;
  sgd_step(state, s);
  const double update_norm = grid_norm(Matrixd(state.current.values - before));
  const double expected = step_size(5, state.schedule) * s.x.norm() *
                          std::sqrt(double(m));
  CHECK(update_norm == doctest::Approx(expected).epsilon(1e-12));
}

TEST_CASE("averaging recursion") {
  GmStated state = GmStated::zero(2, grid_uniform(3));

  SUBCASE("first average equals the first iterate") {
    state.current.values.setRandom();
    update_average(state);  // n = 0
    CHECK(state.average.values == state.current.values);
  }
  SUBCASE("iterate at the average is a fixed point") {
    state.current.values.setConstant(1.5);
    state.average.values.setConstant(1.5);
    state.n = 7;
    update_average(state);
    CHECK(state.average.values.isApproxToConstant(1.5, 1e-15));
  }
  SUBCASE("constant iterates average to the constant") {
    state.current.values.setConstant(-2.25);
    for (int k = 0; k < 10; ++k) {
      update_average(state);
      ++state.n;
    }
    CHECK(state.average.values.isApproxToConstant(-2.25, 1e-15));
  }
}

TEST_CASE("observe uses the schedule position") {
  const FunctionalSampled s = make_sample({1.0}, {1.0, 1.0});
  GmStated once = GmStated::zero(1, grid_uniform(2));
  observe(once, s);
  GmStated twice = GmStated::zero(1, grid_uniform(2));
  observe(twice, s);
  observe(twice, s);
  // The second call applies gamma_2 < gamma_1 to a new residual: recompute.
  GmStated manual = once;
  sgd_step(manual, s);
  update_average(manual);
  ++manual.n;
  CHECK(twice.current.values == manual.current.values);
  CHECK(twice.average.values == manual.average.values);
  CHECK(twice.current.values != once.current.values);
}

TEST_CASE("observe at n=1 averages to the sgd step result") {
  const FunctionalSampled s = make_sample({1.0, -0.5}, {0.25, -1.0, 2.0});
  GmStated observed = GmStated::zero(2, grid_uniform(3));
  observe(observed, s);
  GmStated stepped = GmStated::zero(2, grid_uniform(3));
  sgd_step(stepped, s);
  CHECK(observed.average.values == stepped.current.values);
  CHECK(observed.n == 1);
}

TEST_CASE("fit_stream equals manual observes and rejects empty input") {
  DgpConfig cfg;
  cfg.n = 5;
  cfg.m = 8;
  cfg.seed = 21;
  DgpStream<double> stream(cfg);
  GmStated manual = GmStated::zero(3, stream.grid());
  DgpStream<double> stream_copy(cfg);
  while (const FunctionalSampled* s = stream_copy()) observe(manual, *s);

  GmStated folded =
      fit_stream(stream, GmStated::zero(3, grid_uniform(cfg.m)));
  CHECK(folded.n == 5);
  CHECK(folded.current.values == manual.current.values);
  CHECK(folded.average.values == manual.average.values);

  auto empty = []() -> const FunctionalSampled* { return nullptr; };
  CHECK_THROWS_AS(fit_stream(empty, GmStated::zero(3, grid_uniform(8))),
                  Error);
}

TEST_CASE("risk decreases with stream length on average") {
  // Monte-Carlo over seeds: mean RMISE at n=800 is below mean RMISE at n=200.
  const int seeds = 100;
  double short_total = 0, long_total = 0;
  for (int seed = 0; seed < seeds; ++seed) {
    DgpConfig cfg;
    cfg.m = 12;
    cfg.seed = 1000 + static_cast<std::uint64_t>(seed);
    cfg.n = 800;
    DgpStream<double> stream(cfg);
    GmStated state = GmStated::zero(3, stream.grid());
    const CoefficientFieldd truth = stream.beta();
    std::uint64_t count = 0;
    while (const FunctionalSampled* s = stream()) {
      observe(state, *s);
      ++count;
      if (count == 200) short_total += rmise(state.average, truth).mean();
    }
    long_total += rmise(state.average, truth).mean();
  }
  CHECK(long_total < short_total);
}

TEST_CASE("averaging washes out the stream order") {
  // The final iterate depends on the order; the averaged estimate's RMISE
  // distribution does not. Paired comparison: same data forward vs reversed.
  const int seeds = 60;
  const Eigen::Index n = 400;
  std::vector<double> forward, reversed;
  double last_iterate_gap = 0;
  for (int seed = 0; seed < seeds; ++seed) {
    DgpConfig cfg;
    cfg.n = static_cast<std::uint64_t>(n);
    cfg.m = 10;
    cfg.seed = 400 + static_cast<std::uint64_t>(seed);
    const Datasetd data = generate_dataset<double>(cfg);
    const CoefficientFieldd truth = true_beta(data.grid);

    auto run = [&](bool reverse) {
      GmStated state = GmStated::zero(3, data.grid);
      FunctionalSampled s;
      for (Eigen::Index i = 0; i < n; ++i) {
        const Eigen::Index row = reverse ? n - 1 - i : i;
        s.x = data.x.row(row).transpose();
        s.y = data.y.row(row).transpose();
        observe(state, s);
      }
      return state;
    };
    const GmStated fwd = run(false), rev = run(true);
    forward.push_back(rmise(fwd.average, truth).mean());
    reversed.push_back(rmise(rev.average, truth).mean());
    last_iterate_gap += (fwd.current.values - rev.current.values).norm();
  }
  CHECK(last_iterate_gap > 1e-6);  // order does change the raw iterate
  const auto f = summarize(forward), r = summarize(reversed);
  // Two-sample tolerance: means agree within 3 paired standard errors.
  std::vector<double> diff;
  for (int i = 0; i < seeds; ++i) diff.push_back(forward[i] - reversed[i]);
  const auto d = summarize(diff);
  CHECK(std::abs(d.mean) <= 3.0 * d.sd / std::sqrt(double(seeds)) + 1e-12);
  CHECK(f.mean == doctest::Approx(r.mean).epsilon(0.05));
}

TEST_CASE("reference accuracy at n = 10000") {
  // Mean sqrt(n)-scaled RMISE of the first coefficient near 1.28 across
  // seeds (full-precision reproduction is the acceptance gate; this is the
  // in-suite guard at 30 seeds, +/-25%).
  const int seeds = 30;
  double total = 0;
  for (int seed = 0; seed < seeds; ++seed) {
    DgpConfig cfg;
    cfg.n = 10000;
    cfg.m = 50;
    cfg.seed = 7000 + static_cast<std::uint64_t>(seed);
    DgpStream<double> stream(cfg);
    GmStated state = fit_stream(stream, GmStated::zero(3, grid_uniform(50)));
    total += rmise(state.average, stream.beta())[0];
  }
  const double mean_scaled = 100.0 * total / seeds;
  CHECK(mean_scaled > 1.28 * 0.75);
  CHECK(mean_scaled < 1.28 * 1.25);
}
