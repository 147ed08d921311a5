#pragma once

#include <cmath>
#include <cstdint>

#include "fsr/types.hpp"

namespace fsr {

/// Residual norms below this are treated as an exact fit and the update is
/// skipped: the step direction is undefined in the limit, so skip is the only
/// well-defined choice.
inline constexpr double kResidualFloor = 1e-10;

/**
 * Step schedule gamma_n = min(gamma * n^(-alpha), max_step).
 *
 * alpha in (1/2, 1] satisfies the Robbins-Monro conditions automatically.
 * The cap exists because the first few normalized-gradient steps move the
 * iterate by about gamma * |x_j| per entry regardless of how small the
 * residual is; with an aggressive gamma those early iterates land far from
 * anything and then sit in the running average forever. Capping the schedule
 * leaves every gamma <= max_step trajectory untouched (the default gamma
 * never binds) and makes the estimator insensitive to gamma over a wide
 * range, which is the documented behavior of the method.
 */
template <class Scalar>
struct StepSchedule {
  Scalar gamma = Scalar(3);
  Scalar alpha = Scalar(0.75);
  Scalar max_step = Scalar(3);

  void validate() const {
    if (!(gamma > Scalar(0))) throw Error("schedule: gamma must be positive");
    if (!(alpha > Scalar(0.5) && alpha <= Scalar(1)))
      throw Error("schedule: alpha must lie in (1/2, 1]");
    if (!(max_step > Scalar(0))) throw Error("schedule: max_step must be positive");
  }
};

/// gamma_n for the n-th observation; n is 1-based (the first observation uses
/// gamma_1 = min(gamma, max_step)).
template <class Scalar>
Scalar step_size(std::uint64_t n, const StepSchedule<Scalar>& schedule) {
  if (n == 0) throw Error("step_size: counter is 1-based");
  using std::min;
  using std::pow;
  return min(schedule.gamma * pow(Scalar(n), -schedule.alpha), schedule.max_step);
}

/**
 * State of the averaged stochastic-gradient recursion for the geometric
 * median of Y - X^T beta: the current iterate beta_n, the running average
 * beta_bar_n, and the observation counter.
 */
template <class Scalar>
struct GmState {
  CoefficientField<Scalar> current;
  CoefficientField<Scalar> average;
  std::uint64_t n = 0;
  StepSchedule<Scalar> schedule;

  static GmState zero(Eigen::Index d, Grid<Scalar> grid,
                      StepSchedule<Scalar> schedule = {}) {
    schedule.validate();
    GmState state;
    state.current.values = Matrix<Scalar>::Zero(d, grid.size());
    state.current.grid = grid;
    state.average.values = Matrix<Scalar>::Zero(d, grid.size());
    state.average.grid = std::move(grid);
    state.schedule = schedule;
    return state;
  }

  /// Number of scalars held, for the streaming-memory contract: the state
  /// never grows with the number of observations.
  std::uint64_t stored_scalar_count() const {
    return 2 * static_cast<std::uint64_t>(current.values.size()) +
           static_cast<std::uint64_t>(current.grid.size()) + 4;  // counter + schedule
  }
};

using GmStated = GmState<double>;

/**
 * One stochastic gradient step on the current iterate:
 *
 *   beta_{n+1} = beta_n + gamma_n * x * r^T / ||r||,
 *
 * where r = y - x^T beta_n on the grid and ||.|| is the functional
 * (mean-square) norm. The recursion minimizes E||Y - X^T beta|| in L2[0,1],
 * so the gradient is normalized by the norm of the residual *function*, not
 * by the plain Euclidean norm of the value vector: the two differ by sqrt(m),
 * and using the latter silently rescales the step size with the grid
 * resolution (a gamma tuned on m = 50 would act like gamma/7 — the reference
 * results are not reproducible that way).
 *
 * Mutates state.current in place; does not touch the average or the counter.
 */
template <class Scalar>
void sgd_step(GmState<Scalar>& state, const FunctionalSample<Scalar>& sample) {
  if (sample.x.size() != state.current.values.rows())
    throw Error("sgd_step: covariate dimension mismatch");
  if (sample.y.size() != state.current.grid.size())
    throw Error("sgd_step: response length does not match grid");
  if (!sample.x.allFinite() || !sample.y.allFinite())
    throw Error("sgd_step: non-finite sample");

  Vector<Scalar> r = sample.y;
  r.noalias() -= state.current.values.transpose() * sample.x;
  const Scalar norm = functional_norm(r);
  if (norm < Scalar(kResidualFloor)) return;  // exactly fitted; direction undefined

  const Scalar gamma_n = step_size(state.n + 1, state.schedule);
  state.current.values.noalias() += (gamma_n / norm) * sample.x * r.transpose();
}

/// Running-average update beta_bar_{n+1} = beta_bar_n + (beta_{n+1} - beta_bar_n)/(n+1);
/// beta_bar_1 equals the first iterate.
template <class Scalar>
void update_average(GmState<Scalar>& state) {
  const Scalar weight = Scalar(1) / Scalar(state.n + 1);
  state.average.values += weight * (state.current.values - state.average.values);
}

/// One full recursion step: SGD update, averaging update, counter increment.
template <class Scalar>
void observe(GmState<Scalar>& state, const FunctionalSample<Scalar>& sample) {
  sgd_step(state, sample);
  update_average(state);
  ++state.n;
}

/**
 * Folds observe over a stream. The stream is any callable returning
 * const FunctionalSample<Scalar>* (nullptr at end); see simulation.hpp for
 * the generator side.
 */
template <class Scalar, class Stream>
GmState<Scalar> fit_stream(Stream&& stream, GmState<Scalar> state) {
  std::uint64_t consumed = 0;
  while (const FunctionalSample<Scalar>* sample = stream()) {
    observe(state, *sample);
    ++consumed;
  }
  if (consumed == 0) throw Error("fit_stream: empty stream");
  return state;
}

}  // namespace fsr
