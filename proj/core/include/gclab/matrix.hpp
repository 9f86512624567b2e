#pragma once

#include <cassert>
#include <cstddef>
#include <iosfwd>
#include <vector>

#include "gclab/rng.hpp"

namespace gclab {

// Dense row-major matrix of doubles.  Deliberately minimal: the numeric
// kernels below are free functions with exact, loop-order-pinned semantics so
// that every run of the laboratory is bit-reproducible.
class DenseMatrix {
 public:
  DenseMatrix() = default;
  DenseMatrix(std::size_t rows, std::size_t cols)
      : rows_(rows), cols_(cols), data_(rows * cols, 0.0) {}
  DenseMatrix(std::size_t rows, std::size_t cols, std::vector<double> data)
      : rows_(rows), cols_(cols), data_(std::move(data)) {
    assert(data_.size() == rows_ * cols_);
  }

  static DenseMatrix identity(std::size_t n);
  // Row-major initializer for literals in tests and examples.
  static DenseMatrix from_rows(
      std::initializer_list<std::initializer_list<double>> rows);

  std::size_t rows() const { return rows_; }
  std::size_t cols() const { return cols_; }
  std::size_t size() const { return data_.size(); }
  bool empty() const { return data_.empty(); }

  double& operator()(std::size_t r, std::size_t c) {
    assert(r < rows_ && c < cols_);
    return data_[r * cols_ + c];
  }
  double operator()(std::size_t r, std::size_t c) const {
    assert(r < rows_ && c < cols_);
    return data_[r * cols_ + c];
  }

  double* data() { return data_.data(); }
  const double* data() const { return data_.data(); }
  double* row(std::size_t r) { return data_.data() + r * cols_; }
  const double* row(std::size_t r) const { return data_.data() + r * cols_; }

  bool same_shape(const DenseMatrix& o) const {
    return rows_ == o.rows_ && cols_ == o.cols_;
  }

  friend bool operator==(const DenseMatrix& a, const DenseMatrix& b) {
    return a.rows_ == b.rows_ && a.cols_ == b.cols_ && a.data_ == b.data_;
  }

 private:
  std::size_t rows_ = 0;
  std::size_t cols_ = 0;
  std::vector<double> data_;
};

// out = a * b, exact i-k-j triple loop (fixed accumulation order).
DenseMatrix matmul(const DenseMatrix& a, const DenseMatrix& b);

DenseMatrix transpose(const DenseMatrix& m);
DenseMatrix add(const DenseMatrix& a, const DenseMatrix& b);
DenseMatrix subtract(const DenseMatrix& a, const DenseMatrix& b);
DenseMatrix scale(const DenseMatrix& m, double s);
DenseMatrix hadamard(const DenseMatrix& a, const DenseMatrix& b);
// Frobenius inner product <a, b> = sum_ij a_ij * b_ij.
double dot(const DenseMatrix& a, const DenseMatrix& b);
// a += s * b, in place.
void axpy(DenseMatrix& a, double s, const DenseMatrix& b);

// Elementwise max(x, 0).
DenseMatrix relu(const DenseMatrix& m);
// Elementwise {0,1} mask with mask = 0 at exactly 0 (the fixed subgradient
// choice for the kink).  Invariant: hadamard(relu_mask(z), z) == relu(z).
DenseMatrix relu_mask(const DenseMatrix& m);
// Numerically stable logistic function.
double sigmoid(double x);
DenseMatrix sigmoid(const DenseMatrix& m);

double frobenius_norm(const DenseMatrix& m);
// max_i ||row_i||_2.
double row_norm_max(const DenseMatrix& m);
double max_abs(const DenseMatrix& m);
bool has_non_finite(const DenseMatrix& m);

struct SpectralNormResult {
  double value = 0.0;
  bool converged = false;
  std::size_t iterations = 0;
};

// Largest singular value via power iteration on M^T M with a deterministic
// internal start vector.  A zero matrix returns {0, true, 0}.
SpectralNormResult spectral_norm(const DenseMatrix& m, double tol = 1e-12,
                                 std::size_t max_iter = 10000);

// Eigenvalues of a symmetric matrix, ascending, by the cyclic Jacobi method.
// Used as the dense spectral oracle for small problems (n <= a few hundred).
// Throws std::invalid_argument if m is not square or not symmetric to 1e-9.
std::vector<double> symmetric_eigenvalues(const DenseMatrix& m,
                                          double tol = 1e-12,
                                          std::size_t max_sweeps = 100);

// Smallest singular value of m (sqrt of the smallest eigenvalue of M^T M,
// clamped at 0); dense oracle path, intended for small matrices.
double smallest_singular_value(const DenseMatrix& m);

// Solves A X = B for square A by Gaussian elimination with partial pivoting.
// Throws std::invalid_argument on shape mismatch and std::domain_error when
// A is numerically singular.
DenseMatrix solve_linear(DenseMatrix a, DenseMatrix b);

// i.i.d. N(0, std^2) entries drawn row-major from rng.
DenseMatrix gaussian_matrix(std::size_t rows, std::size_t cols, double std_dev,
                            SeededRng& rng);

// Full-precision textual round-trip: every value with 17 significant digits.
void dump_csv(const DenseMatrix& m, std::ostream& out);
DenseMatrix load_csv(std::istream& in);

}  // namespace gclab
