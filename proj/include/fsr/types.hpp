#pragma once

#include <Eigen/Dense>

#include <stdexcept>
#include <string>
#include <utility>

namespace fsr {

/// Library-wide error type; every precondition violation throws this.
class Error : public std::runtime_error {
 public:
  explicit Error(const std::string& what) : std::runtime_error(what) {}
};

template <class Scalar>
using Vector = Eigen::Vector<Scalar, Eigen::Dynamic>;

/// Coefficient storage is row-major by covariate: entry (j, l) = beta_j(t_l).
/// The per-observation update touches every entry, so the layout is a pure
/// performance choice.
template <class Scalar>
using Matrix = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

/**
 * Common sampling locations t_1 < ... < t_m in [0, 1] on which all
 * functional responses are observed.
 */
template <class Scalar>
class Grid {
 public:
  Grid() = default;

  explicit Grid(Vector<Scalar> points) : points_(std::move(points)) {
    if (points_.size() < 2) throw Error("grid needs at least 2 points");
    for (Eigen::Index l = 0; l < points_.size(); ++l) {
      const Scalar t = points_[l];
      if (!(t >= Scalar(0) && t <= Scalar(1)))
        throw Error("grid point outside [0, 1]");
      if (l > 0 && !(t > points_[l - 1]))
        throw Error("grid points must be strictly increasing");
    }
  }

  Eigen::Index size() const { return points_.size(); }
  Scalar operator[](Eigen::Index l) const { return points_[l]; }
  const Vector<Scalar>& points() const { return points_; }

  bool operator==(const Grid& other) const {
    return points_.size() == other.points_.size() && points_ == other.points_;
  }

 private:
  Vector<Scalar> points_;
};

/// One observation: covariates x in R^d and the response values on the grid.
template <class Scalar>
struct FunctionalSample {
  Vector<Scalar> x;
  Vector<Scalar> y;
};

/**
 * A d x m field of coefficient values, entry (j, l) = beta_j(t_l); both the
 * estimand and every estimate of it.
 */
template <class Scalar>
struct CoefficientField {
  Matrix<Scalar> values;  // d x m
  Grid<Scalar> grid;

  Eigen::Index covariates() const { return values.rows(); }

  void require_shape() const {
    if (values.cols() != grid.size())
      throw Error("coefficient field shape inconsistent with grid");
    if (!values.allFinite()) throw Error("coefficient field has non-finite entries");
  }
};

using Vectord = Vector<double>;
using Matrixd = Matrix<double>;
using Gridd = Grid<double>;
using FunctionalSampled = FunctionalSample<double>;
using CoefficientFieldd = CoefficientField<double>;

/// Uniform grid with both endpoints: t_l = (l-1)/(m-1), l = 1..m.
template <class Scalar = double>
Grid<Scalar> grid_uniform(Eigen::Index m) {
  if (m < 2) throw Error("grid_uniform: m must be >= 2");
  Vector<Scalar> pts(m);
  for (Eigen::Index l = 0; l < m; ++l)
    pts[l] = Scalar(l) / Scalar(m - 1);
  return Grid<Scalar>(std::move(pts));
}

/// Plain Euclidean norm over grid values, sqrt(sum v_l^2); no dt weighting.
template <class Derived>
typename Derived::Scalar grid_norm(const Eigen::MatrixBase<Derived>& v) {
  return v.norm();
}

/**
 * Norm of the function the grid values discretize: sqrt(mean_l v_l^2).
 * This is the L2[0,1] norm the stochastic recursion divides by; see
 * online_gm.hpp for why the two norms are not interchangeable there.
 */
template <class Derived>
typename Derived::Scalar functional_norm(const Eigen::MatrixBase<Derived>& v) {
  using std::sqrt;
  if (v.size() == 0) return typename Derived::Scalar(0);
  return sqrt(v.squaredNorm() / typename Derived::Scalar(v.size()));
}

/// Mean structure of the model: returns the vector with entries sum_j x_j * field[j, l].
template <class Scalar>
Vector<Scalar> apply_coefficients(const CoefficientField<Scalar>& field,
                                  const Vector<Scalar>& x) {
  if (x.size() != field.values.rows())
    throw Error("apply_coefficients: covariate length does not match field");
  return field.values.transpose() * x;
}

}  // namespace fsr
