#pragma once

#include "moltrap/errors.hpp"

#include <Eigen/Dense>
#include <lapacke.h>

#include <string>
#include <vector>

namespace moltrap::linalg {

struct SymmetricEigen {
  Eigen::VectorXd values;   // ascending
  Eigen::MatrixXd vectors;  // one column per value
};

// Largest dense problem the radial solvers accept.
inline constexpr Eigen::Index max_dense_dimension = 4000;

// Eigenpairs of a real symmetric matrix with eigenvalue below `upper`
// (LAPACK dsyevr, MRRR). The matrix is taken by value because LAPACK
// destroys it.
inline SymmetricEigen eigen_below(Eigen::MatrixXd h, double upper) {
  const Eigen::Index n = h.rows();
  if (n != h.cols())
    throw InvariantError("eigen_below: matrix is not square");
  if (n > max_dense_dimension)
    throw ConfigError("dense eigenproblem of dimension " + std::to_string(n) +
                      " exceeds the limit of " + std::to_string(max_dense_dimension) +
                      "; reduce the grid point count");
  if (n == 0)
    return {};

  const double lower = h.diagonal().minCoeff() - 10.0 * h.cwiseAbs().rowwise().sum().maxCoeff();
  if (!(upper > lower))
    return {};

  lapack_int found = 0;
  Eigen::VectorXd w(n);
  Eigen::MatrixXd z(n, n);
  std::vector<lapack_int> support(2 * static_cast<std::size_t>(n));
  const lapack_int info = LAPACKE_dsyevr(
      LAPACK_COL_MAJOR, 'V', 'V', 'L', static_cast<lapack_int>(n), h.data(),
      static_cast<lapack_int>(n), lower, upper, 0, 0, 0.0, &found, w.data(), z.data(),
      static_cast<lapack_int>(n), support.data());
  if (info != 0)
    throw NumericalError("dsyevr failed with info = " + std::to_string(info));

  SymmetricEigen out;
  out.values = w.head(found);
  out.vectors = z.leftCols(found);
  return out;
}

// Lowest `count` eigenpairs.
inline SymmetricEigen eigen_lowest(Eigen::MatrixXd h, Eigen::Index count) {
  const Eigen::Index n = h.rows();
  if (n > max_dense_dimension)
    throw ConfigError("dense eigenproblem of dimension " + std::to_string(n) +
                      " exceeds the limit of " + std::to_string(max_dense_dimension));
  count = std::min(count, n);
  if (count <= 0)
    return {};
  lapack_int found = 0;
  Eigen::VectorXd w(n);
  Eigen::MatrixXd z(n, count);
  std::vector<lapack_int> support(2 * static_cast<std::size_t>(n));
  const lapack_int info = LAPACKE_dsyevr(
      LAPACK_COL_MAJOR, 'V', 'I', 'L', static_cast<lapack_int>(n), h.data(),
      static_cast<lapack_int>(n), 0.0, 0.0, 1, static_cast<lapack_int>(count), 0.0, &found,
      w.data(), z.data(), static_cast<lapack_int>(n), support.data());
  if (info != 0)
    throw NumericalError("dsyevr failed with info = " + std::to_string(info));
  return {w.head(found), z.leftCols(found)};
}

} // namespace moltrap::linalg
