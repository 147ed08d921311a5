#pragma once

#include <utility>

#include "fsr/types.hpp"

namespace fsr {

/**
 * Natural cubic spline through (knots, values): the minimizer of
 * int (g'')^2 among interpolants, i.e. zero second derivative at both ends.
 * Outside the knot range the curve extends as a constant (the boundary
 * value), matching how the estimator is used beyond the observed grid.
 */
template <class Scalar>
class SplineCurve {
 public:
  SplineCurve(Grid<Scalar> knots, Vector<Scalar> values)
      : knots_(std::move(knots)), values_(std::move(values)) {
    const Eigen::Index m = knots_.size();
    if (values_.size() != m)
      throw Error("spline_fit: values length does not match knots");
    if (!values_.allFinite()) throw Error("spline_fit: non-finite values");

    // Second derivatives M solve the standard tridiagonal system with
    // M_0 = M_{m-1} = 0; Thomas elimination, O(m).
    second_ = Vector<Scalar>::Zero(m);
    if (m > 2) {
      const Eigen::Index interior = m - 2;
      Vector<Scalar> diag(interior), rhs(interior), upper(interior);
      for (Eigen::Index i = 0; i < interior; ++i) {
        const Scalar h_lo = knots_[i + 1] - knots_[i];
        const Scalar h_hi = knots_[i + 2] - knots_[i + 1];
        diag[i] = Scalar(2) * (h_lo + h_hi);
        upper[i] = h_hi;
        rhs[i] = Scalar(6) * ((values_[i + 2] - values_[i + 1]) / h_hi -
                              (values_[i + 1] - values_[i]) / h_lo);
      }
      for (Eigen::Index i = 1; i < interior; ++i) {
        // lower diagonal entry equals the previous row's upper entry h_lo.
        const Scalar w = (knots_[i + 1] - knots_[i]) / diag[i - 1];
        diag[i] -= w * upper[i - 1];
        rhs[i] -= w * rhs[i - 1];
      }
      second_[interior] = rhs[interior - 1] / diag[interior - 1];
      for (Eigen::Index i = interior - 1; i >= 1; --i)
        second_[i] = (rhs[i - 1] - upper[i - 1] * second_[i + 1]) / diag[i - 1];
    }
  }

  const Grid<Scalar>& knots() const { return knots_; }
  const Vector<Scalar>& values() const { return values_; }
  const Vector<Scalar>& second_derivatives() const { return second_; }

  Scalar operator()(Scalar t) const {
    const Eigen::Index m = knots_.size();
    if (t <= knots_[0]) return values_[0];
    if (t >= knots_[m - 1]) return values_[m - 1];

    // Rightmost interval with knot <= t; knots are strictly increasing.
    Eigen::Index lo = 0, hi = m - 1;
    while (hi - lo > 1) {
      const Eigen::Index mid = (lo + hi) / 2;
      (knots_[mid] <= t ? lo : hi) = mid;
    }
    const Scalar h = knots_[lo + 1] - knots_[lo];
    const Scalar a = (knots_[lo + 1] - t) / h;
    const Scalar b = (t - knots_[lo]) / h;
    return a * values_[lo] + b * values_[lo + 1] +
           ((a * a * a - a) * second_[lo] + (b * b * b - b) * second_[lo + 1]) *
               (h * h) / Scalar(6);
  }

 private:
  Grid<Scalar> knots_;
  Vector<Scalar> values_;
  Vector<Scalar> second_;  // M_i, zero at both ends
};

using SplineCurved = SplineCurve<double>;

template <class Scalar>
SplineCurve<Scalar> spline_fit(Grid<Scalar> knots, Vector<Scalar> values) {
  return SplineCurve<Scalar>(std::move(knots), std::move(values));
}

template <class Scalar>
Scalar spline_eval(const SplineCurve<Scalar>& curve, Scalar t) {
  return curve(t);
}

/// One spline per covariate row, evaluated on the query grid.
template <class Scalar>
CoefficientField<Scalar> interpolate_field(const CoefficientField<Scalar>& field,
                                           const Grid<Scalar>& query) {
  field.require_shape();
  CoefficientField<Scalar> out;
  out.grid = query;
  out.values.resize(field.values.rows(), query.size());
  for (Eigen::Index j = 0; j < field.values.rows(); ++j) {
    SplineCurve<Scalar> curve(field.grid, field.values.row(j).transpose());
    for (Eigen::Index l = 0; l < query.size(); ++l)
      out.values(j, l) = curve(query[l]);
  }
  return out;
}

}  // namespace fsr
