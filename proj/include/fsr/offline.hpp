#pragma once

#include <cstdint>
#include <vector>

#include "fsr/types.hpp"

namespace fsr {

/// Batch dataset view for the offline solvers: row i of x is one observation's
/// covariates, row i of y its response values on the grid.
template <class Scalar>
struct Dataset {
  Matrix<Scalar> x;  // n x d
  Matrix<Scalar> y;  // n x m
  Grid<Scalar> grid;

  Eigen::Index size() const { return x.rows(); }

  void require_consistent() const {
    if (x.rows() != y.rows()) throw Error("dataset: x and y row counts differ");
    if (y.cols() != grid.size()) throw Error("dataset: y columns do not match grid");
  }
};

using Datasetd = Dataset<double>;

template <class Scalar>
struct OracleConfig {
  std::uint64_t max_iterations = 500;
  Scalar rel_tolerance = Scalar(1e-8);
  Scalar weight_floor = Scalar(1e-10);

  void validate() const {
    if (max_iterations < 1) throw Error("oracle: max_iterations must be >= 1");
    if (!(rel_tolerance > Scalar(0))) throw Error("oracle: rel_tolerance must be positive");
    if (!(weight_floor > Scalar(0))) throw Error("oracle: weight_floor must be positive");
  }
};

/// The batch loss the geometric-median regression minimizes:
/// sum_i grid_norm(y_i - x_i^T field). Scale conventions cancel in the argmin,
/// so the plain Euclidean grid norm is used verbatim.
template <class Scalar>
Scalar gm_loss(const CoefficientField<Scalar>& field, const Dataset<Scalar>& data) {
  data.require_consistent();
  if (data.size() == 0) throw Error("gm_loss: empty dataset");
  Scalar loss = 0;
  for (Eigen::Index i = 0; i < data.x.rows(); ++i)
    loss += (data.y.row(i) - data.x.row(i) * field.values).norm();
  return loss;
}

/// Per-grid-point least squares: (sum x_i x_i^T) beta(t_l) = sum x_i y_i(t_l).
/// One shared Gram factorization serves every grid point.
template <class Scalar>
CoefficientField<Scalar> fit_ls_offline(const Dataset<Scalar>& data) {
  data.require_consistent();
  const Eigen::Index d = data.x.cols();
  if (data.size() < d) throw Error("fit_ls_offline: fewer observations than covariates");
  Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic> gram =
      data.x.transpose() * data.x;
  auto solver = gram.ldlt();
  const Vector<Scalar> diag = solver.vectorD().cwiseAbs();
  if (solver.info() != Eigen::Success ||
      diag.minCoeff() <= Eigen::NumTraits<Scalar>::epsilon() * d * diag.maxCoeff())
    throw Error("fit_ls_offline: singular design");
  CoefficientField<Scalar> field;
  field.grid = data.grid;
  field.values = solver.solve(data.x.transpose() * data.y);
  return field;
}

template <class Scalar>
struct IrlsResult {
  CoefficientField<Scalar> field;
  std::vector<Scalar> loss_trace;  // loss after each reweighting, LS start first
  bool converged = false;
  std::uint64_t iterations = 0;
};

/**
 * Geometric-median regression by iteratively reweighted least squares
 * (Weiszfeld with covariates): weights w_i = 1 / max(||r_i||, weight_floor)
 * are SHARED across grid points — the norm couples the grid, which is what
 * separates this from a pointwise median fit — and each pass solves the
 * weighted normal equations (X^T W X) B = X^T W Y from the LS start.
 */
template <class Scalar>
IrlsResult<Scalar> fit_gm_offline(const Dataset<Scalar>& data,
                                  const OracleConfig<Scalar>& config = {}) {
  config.validate();
  data.require_consistent();
  const Eigen::Index n = data.size();
  const Eigen::Index d = data.x.cols();
  if (n < d) throw Error("fit_gm_offline: fewer observations than covariates");

  IrlsResult<Scalar> result;
  result.field = fit_ls_offline(data);
  result.loss_trace.push_back(gm_loss(result.field, data));

  Vector<Scalar> weights(n);
  Matrix<Scalar> weighted_x(n, d);
  for (std::uint64_t it = 1; it <= config.max_iterations; ++it) {
    for (Eigen::Index i = 0; i < n; ++i) {
      const Scalar norm = (data.y.row(i) - data.x.row(i) * result.field.values).norm();
      weights[i] = Scalar(1) / std::max(norm, config.weight_floor);
    }
    weighted_x = weights.asDiagonal() * data.x;
    Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic> gram =
        data.x.transpose() * weighted_x;
    auto solver = gram.ldlt();
    if (solver.info() != Eigen::Success)
      throw Error("fit_gm_offline: weighted normal equations not solvable");
    Matrix<Scalar> next = solver.solve(weighted_x.transpose() * data.y);

    const Scalar change = (next - result.field.values).norm();
    const Scalar scale = std::max(result.field.values.norm(), Scalar(1));
    result.field.values = std::move(next);
    result.loss_trace.push_back(gm_loss(result.field, data));
    result.iterations = it;
    if (change <= config.rel_tolerance * scale) {
      result.converged = true;
      break;
    }
  }
  return result;
}

}  // namespace fsr
