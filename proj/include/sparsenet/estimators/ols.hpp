#pragma once

#include <Eigen/Dense>

#include "sparsenet/errors.hpp"

namespace sparsenet {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;

struct LinearModel {
  Vector coefficients;
  double intercept = 0.0;

  Vector predict(const Matrix& x) const { return (x * coefficients).array() + intercept; }
};

inline void require_finite(const Matrix& x, const Vector& y, const char* who) {
  if (!x.allFinite() || !y.allFinite()) throw ArgumentError(std::string(who) + ": input contains NaN or infinity");
  if (x.rows() != y.size()) throw ArgumentError(std::string(who) + ": row count of X differs from length of y");
}

// Least squares with an intercept column, solved by a complete orthogonal
// decomposition so rank-deficient designs get the minimum-norm solution.
inline LinearModel fit_ols(const Matrix& x, const Vector& y) {
  require_finite(x, y, "fit_ols");
  if (x.rows() < x.cols() + 1) throw ArgumentError("fit_ols: need at least columns + 1 rows");
  Matrix design(x.rows(), x.cols() + 1);
  design.leftCols(x.cols()) = x;
  design.col(x.cols()).setOnes();
  const Eigen::CompleteOrthogonalDecomposition<Matrix> cod(design);
  const Vector beta = cod.solve(y);
  LinearModel model;
  model.coefficients = beta.head(x.cols());
  model.intercept = beta(x.cols());
  return model;
}

// z-score scaling from training statistics; zero-variance columns are left
// centered but unscaled.
struct Standardizer {
  Vector mean;
  Vector scale;

  static Standardizer fit(const Matrix& x) {
    Standardizer s;
    s.mean = x.colwise().mean();
    s.scale.resize(x.cols());
    for (Eigen::Index j = 0; j < x.cols(); ++j) {
      const double var = (x.col(j).array() - s.mean(j)).square().mean();
      s.scale(j) = var > 0.0 ? std::sqrt(var) : 1.0;
    }
    return s;
  }

  Matrix transform(const Matrix& x) const {
    return (x.rowwise() - mean.transpose()).array().rowwise() / scale.transpose().array();
  }
};

}  // namespace sparsenet
