#pragma once

// Conversions for the Eigen-based dense oracles used by the unit tests.
// Eigen appears here only: the library under test never calls it.

#include <Eigen/Dense>

#include "gclab/matrix.hpp"

namespace testsupport {

inline Eigen::MatrixXd to_eigen(const gclab::DenseMatrix& m) {
  Eigen::MatrixXd e(m.rows(), m.cols());
  for (std::size_t i = 0; i < m.rows(); ++i)
    for (std::size_t j = 0; j < m.cols(); ++j)
      e(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = m(i, j);
  return e;
}

inline gclab::DenseMatrix from_eigen(const Eigen::MatrixXd& e) {
  gclab::DenseMatrix m(static_cast<std::size_t>(e.rows()),
                       static_cast<std::size_t>(e.cols()));
  for (Eigen::Index i = 0; i < e.rows(); ++i)
    for (Eigen::Index j = 0; j < e.cols(); ++j)
      m(static_cast<std::size_t>(i), static_cast<std::size_t>(j)) = e(i, j);
  return m;
}

}  // namespace testsupport
