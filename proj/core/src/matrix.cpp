#include "gclab/matrix.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <istream>
#include <ostream>
#include <sstream>
#include <stdexcept>
#include <string>

#include "gclab/io.hpp"

namespace gclab {

DenseMatrix DenseMatrix::identity(std::size_t n) {
  DenseMatrix m(n, n);
  for (std::size_t i = 0; i < n; ++i) m(i, i) = 1.0;
  return m;
}

DenseMatrix DenseMatrix::from_rows(
    std::initializer_list<std::initializer_list<double>> rows) {
  const std::size_t r = rows.size();
  const std::size_t c = r == 0 ? 0 : rows.begin()->size();
  DenseMatrix m(r, c);
  std::size_t i = 0;
  for (const auto& row : rows) {
    assert(row.size() == c);
    std::size_t j = 0;
    for (double v : row) m(i, j++) = v;
    ++i;
  }
  return m;
}

DenseMatrix matmul(const DenseMatrix& a, const DenseMatrix& b) {
  if (a.cols() != b.rows()) {
    throw std::invalid_argument("matmul: inner dimensions differ");
  }
  DenseMatrix out(a.rows(), b.cols());
  // i-k-j order: the k loop walks one row of b contiguously, and the
  // accumulation order for each out(i, j) is fixed by k ascending.
  for (std::size_t i = 0; i < a.rows(); ++i) {
    double* out_row = out.row(i);
    const double* a_row = a.row(i);
    for (std::size_t k = 0; k < a.cols(); ++k) {
      const double aik = a_row[k];
      if (aik == 0.0) continue;
      const double* b_row = b.row(k);
      for (std::size_t j = 0; j < b.cols(); ++j) out_row[j] += aik * b_row[j];
    }
  }
  return out;
}

DenseMatrix transpose(const DenseMatrix& m) {
  DenseMatrix out(m.cols(), m.rows());
  for (std::size_t i = 0; i < m.rows(); ++i)
    for (std::size_t j = 0; j < m.cols(); ++j) out(j, i) = m(i, j);
  return out;
}

DenseMatrix add(const DenseMatrix& a, const DenseMatrix& b) {
  assert(a.same_shape(b));
  DenseMatrix out = a;
  for (std::size_t i = 0; i < out.size(); ++i) out.data()[i] += b.data()[i];
  return out;
}

DenseMatrix subtract(const DenseMatrix& a, const DenseMatrix& b) {
  assert(a.same_shape(b));
  DenseMatrix out = a;
  for (std::size_t i = 0; i < out.size(); ++i) out.data()[i] -= b.data()[i];
  return out;
}

DenseMatrix scale(const DenseMatrix& m, double s) {
  DenseMatrix out = m;
  for (std::size_t i = 0; i < out.size(); ++i) out.data()[i] *= s;
  return out;
}

DenseMatrix hadamard(const DenseMatrix& a, const DenseMatrix& b) {
  assert(a.same_shape(b));
  DenseMatrix out = a;
  for (std::size_t i = 0; i < out.size(); ++i) out.data()[i] *= b.data()[i];
  return out;
}

double dot(const DenseMatrix& a, const DenseMatrix& b) {
  assert(a.same_shape(b));
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += a.data()[i] * b.data()[i];
  return s;
}

void axpy(DenseMatrix& a, double s, const DenseMatrix& b) {
  assert(a.same_shape(b));
  for (std::size_t i = 0; i < a.size(); ++i) a.data()[i] += s * b.data()[i];
}

DenseMatrix relu(const DenseMatrix& m) {
  DenseMatrix out = m;
  for (std::size_t i = 0; i < out.size(); ++i)
    out.data()[i] = out.data()[i] > 0.0 ? out.data()[i] : 0.0;
  return out;
}

DenseMatrix relu_mask(const DenseMatrix& m) {
  DenseMatrix out(m.rows(), m.cols());
  for (std::size_t i = 0; i < m.size(); ++i)
    out.data()[i] = m.data()[i] > 0.0 ? 1.0 : 0.0;
  return out;
}

double sigmoid(double x) {
  if (x >= 0.0) {
    const double e = std::exp(-x);
    return 1.0 / (1.0 + e);
  }
  const double e = std::exp(x);
  return e / (1.0 + e);
}

DenseMatrix sigmoid(const DenseMatrix& m) {
  DenseMatrix out = m;
  for (std::size_t i = 0; i < out.size(); ++i)
    out.data()[i] = sigmoid(out.data()[i]);
  return out;
}

double frobenius_norm(const DenseMatrix& m) {
  double s = 0.0;
  for (std::size_t i = 0; i < m.size(); ++i) s += m.data()[i] * m.data()[i];
  return std::sqrt(s);
}

double row_norm_max(const DenseMatrix& m) {
  double best = 0.0;
  for (std::size_t i = 0; i < m.rows(); ++i) {
    double s = 0.0;
    const double* r = m.row(i);
    for (std::size_t j = 0; j < m.cols(); ++j) s += r[j] * r[j];
    best = std::max(best, s);
  }
  return std::sqrt(best);
}

double max_abs(const DenseMatrix& m) {
  double best = 0.0;
  for (std::size_t i = 0; i < m.size(); ++i)
    best = std::max(best, std::abs(m.data()[i]));
  return best;
}

bool has_non_finite(const DenseMatrix& m) {
  for (std::size_t i = 0; i < m.size(); ++i)
    if (!std::isfinite(m.data()[i])) return true;
  return false;
}

SpectralNormResult spectral_norm(const DenseMatrix& m, double tol,
                                 std::size_t max_iter) {
  if (m.empty() || frobenius_norm(m) == 0.0) return {0.0, true, 0};
  // Power iteration on M^T M.  The start vector comes from a fixed-seed
  // generator so the result is a pure function of the input matrix.
  SeededRng rng(0x5EC7A11CE5ULL);
  std::vector<double> v(m.cols());
  double vn = 0.0;
  while (vn == 0.0) {
    for (auto& x : v) x = rng.next_gaussian();
    vn = 0.0;
    for (double x : v) vn += x * x;
    vn = std::sqrt(vn);
  }
  for (auto& x : v) x /= vn;

  std::vector<double> mv(m.rows()), w(m.cols());
  double sigma_prev = 0.0;
  for (std::size_t it = 1; it <= max_iter; ++it) {
    // mv = M v; w = M^T mv.
    for (std::size_t i = 0; i < m.rows(); ++i) {
      const double* r = m.row(i);
      double s = 0.0;
      for (std::size_t j = 0; j < m.cols(); ++j) s += r[j] * v[j];
      mv[i] = s;
    }
    std::fill(w.begin(), w.end(), 0.0);
    for (std::size_t i = 0; i < m.rows(); ++i) {
      const double* r = m.row(i);
      const double s = mv[i];
      if (s == 0.0) continue;
      for (std::size_t j = 0; j < m.cols(); ++j) w[j] += s * r[j];
    }
    double sigma2 = 0.0;  // Rayleigh quotient v^T M^T M v for unit v.
    for (std::size_t j = 0; j < m.cols(); ++j) sigma2 += v[j] * w[j];
    const double sigma = std::sqrt(std::max(0.0, sigma2));
    double wn = 0.0;
    for (double x : w) wn += x * x;
    wn = std::sqrt(wn);
    if (wn == 0.0) {
      // v landed exactly in the null space; restart from fresh noise.
      for (auto& x : v) x = rng.next_gaussian();
      double n2 = 0.0;
      for (double x : v) n2 += x * x;
      n2 = std::sqrt(n2);
      for (auto& x : v) x /= n2;
      continue;
    }
    for (std::size_t j = 0; j < m.cols(); ++j) v[j] = w[j] / wn;
    if (std::abs(sigma - sigma_prev) <= tol * std::max(1.0, sigma)) {
      return {sigma, true, it};
    }
    sigma_prev = sigma;
  }
  return {sigma_prev, false, max_iter};
}

std::vector<double> symmetric_eigenvalues(const DenseMatrix& m, double tol,
                                          std::size_t max_sweeps) {
  if (m.rows() != m.cols()) {
    throw std::invalid_argument("symmetric_eigenvalues: matrix not square");
  }
  const std::size_t n = m.rows();
  const double scale_ref = std::max(1.0, max_abs(m));
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = i + 1; j < n; ++j)
      if (std::abs(m(i, j) - m(j, i)) > 1e-9 * scale_ref) {
        throw std::invalid_argument("symmetric_eigenvalues: matrix not symmetric");
      }

  DenseMatrix a = m;
  // Cyclic Jacobi: rotate away every off-diagonal pair per sweep until the
  // off-diagonal Frobenius mass falls below tol * scale.
  for (std::size_t sweep = 0; sweep < max_sweeps; ++sweep) {
    double off = 0.0;
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t j = i + 1; j < n; ++j) off += a(i, j) * a(i, j);
    if (std::sqrt(off) <= tol * scale_ref) break;
    for (std::size_t p = 0; p < n; ++p) {
      for (std::size_t q = p + 1; q < n; ++q) {
        const double apq = a(p, q);
        if (std::abs(apq) <= 1e-300) continue;
        const double theta = (a(q, q) - a(p, p)) / (2.0 * apq);
        const double t = (theta >= 0.0 ? 1.0 : -1.0) /
                         (std::abs(theta) + std::sqrt(theta * theta + 1.0));
        const double c = 1.0 / std::sqrt(t * t + 1.0);
        const double s = t * c;
        for (std::size_t k = 0; k < n; ++k) {
          const double akp = a(k, p), akq = a(k, q);
          a(k, p) = c * akp - s * akq;
          a(k, q) = s * akp + c * akq;
        }
        for (std::size_t k = 0; k < n; ++k) {
          const double apk = a(p, k), aqk = a(q, k);
          a(p, k) = c * apk - s * aqk;
          a(q, k) = s * apk + c * aqk;
        }
      }
    }
  }
  std::vector<double> ev(n);
  for (std::size_t i = 0; i < n; ++i) ev[i] = a(i, i);
  std::sort(ev.begin(), ev.end());
  return ev;
}

double smallest_singular_value(const DenseMatrix& m) {
  if (m.empty()) return 0.0;
  // Form the Gram matrix of the thinner side to keep the dense solve small.
  const bool tall = m.rows() >= m.cols();
  const DenseMatrix g = tall ? matmul(transpose(m), m) : matmul(m, transpose(m));
  const std::vector<double> ev = symmetric_eigenvalues(g);
  double lo = ev.empty() ? 0.0 : ev.front();
  // A Gram matrix is PSD; tiny negative values are round-off.
  return std::sqrt(std::max(0.0, lo));
}

DenseMatrix solve_linear(DenseMatrix a, DenseMatrix b) {
  if (a.rows() != a.cols())
    throw std::invalid_argument("solve_linear: A must be square");
  if (a.rows() != b.rows())
    throw std::invalid_argument("solve_linear: A and B row counts differ");
  const std::size_t n = a.rows();
  const std::size_t k = b.cols();
  const double singular_tol = 1e-12 * std::max(1.0, max_abs(a));
  for (std::size_t col = 0; col < n; ++col) {
    std::size_t pivot = col;
    for (std::size_t r = col + 1; r < n; ++r)
      if (std::fabs(a(r, col)) > std::fabs(a(pivot, col))) pivot = r;
    if (std::fabs(a(pivot, col)) <= singular_tol)
      throw std::domain_error("solve_linear: matrix is numerically singular");
    if (pivot != col) {
      for (std::size_t j = 0; j < n; ++j) std::swap(a(col, j), a(pivot, j));
      for (std::size_t j = 0; j < k; ++j) std::swap(b(col, j), b(pivot, j));
    }
    const double inv = 1.0 / a(col, col);
    for (std::size_t r = col + 1; r < n; ++r) {
      const double f = a(r, col) * inv;
      if (f == 0.0) continue;
      for (std::size_t j = col; j < n; ++j) a(r, j) -= f * a(col, j);
      for (std::size_t j = 0; j < k; ++j) b(r, j) -= f * b(col, j);
    }
  }
  for (std::size_t col = n; col-- > 0;) {
    const double inv = 1.0 / a(col, col);
    for (std::size_t j = 0; j < k; ++j) {
      double sum = b(col, j);
      for (std::size_t t = col + 1; t < n; ++t) sum -= a(col, t) * b(t, j);
      b(col, j) = sum * inv;
    }
  }
  return b;
}

DenseMatrix gaussian_matrix(std::size_t rows, std::size_t cols, double std_dev,
                            SeededRng& rng) {
  DenseMatrix m(rows, cols);
  for (std::size_t i = 0; i < m.size(); ++i)
    m.data()[i] = std_dev * rng.next_gaussian();
  return m;
}

void dump_csv(const DenseMatrix& m, std::ostream& out) {
  for (std::size_t i = 0; i < m.rows(); ++i) {
    for (std::size_t j = 0; j < m.cols(); ++j) {
      if (j) out << ',';
      out << format_full(m(i, j));
    }
    out << '\n';
  }
}

DenseMatrix load_csv(std::istream& in) {
  std::vector<double> data;
  std::size_t rows = 0, cols = 0;
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    std::stringstream ss(line);
    std::string cell;
    std::size_t c = 0;
    while (std::getline(ss, cell, ',')) {
      data.push_back(std::stod(cell));
      ++c;
    }
    if (rows == 0) {
      cols = c;
    } else if (c != cols) {
      throw std::invalid_argument("load_csv: ragged rows");
    }
    ++rows;
  }
  return DenseMatrix(rows, cols, std::move(data));
}

}  // namespace gclab
