#include "gclab/graph.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numeric>
#include <sstream>
#include <stdexcept>

namespace gclab {

SparseGraph::SparseGraph(
    std::size_t n, std::vector<std::pair<std::uint32_t, std::uint32_t>> edges)
    : n_(n) {
  for (auto& [a, b] : edges) {
    if (a >= n || b >= n) {
      throw std::invalid_argument("graph: edge endpoint out of range");
    }
    if (a == b) {
      throw std::invalid_argument(
          "graph: explicit self-loop in edge list (self-loops are implicit)");
    }
    if (a > b) std::swap(a, b);
  }
  std::sort(edges.begin(), edges.end());
  edges.erase(std::unique(edges.begin(), edges.end()), edges.end());
  edges_ = std::move(edges);

  // CSR of the plain adjacency (both directions).
  std::vector<std::size_t> counts(n_ + 1, 0);
  for (const auto& [a, b] : edges_) {
    ++counts[a + 1];
    ++counts[b + 1];
  }
  row_ptr_.assign(n_ + 1, 0);
  for (std::size_t i = 0; i < n_; ++i) row_ptr_[i + 1] = row_ptr_[i] + counts[i + 1];
  col_.resize(row_ptr_[n_]);
  std::vector<std::size_t> cursor(row_ptr_.begin(), row_ptr_.end() - 1);
  for (const auto& [a, b] : edges_) {
    col_[cursor[a]++] = b;
    col_[cursor[b]++] = a;
  }
  for (std::size_t i = 0; i < n_; ++i) {
    std::sort(col_.begin() + static_cast<std::ptrdiff_t>(row_ptr_[i]),
              col_.begin() + static_cast<std::ptrdiff_t>(row_ptr_[i + 1]));
  }
}

std::size_t SparseGraph::max_degree() const {
  std::size_t best = n_ > 0 ? 1 : 0;
  for (std::uint32_t i = 0; i < n_; ++i) best = std::max(best, degree(i));
  return best;
}

std::vector<std::uint32_t> SparseGraph::component_ids() const {
  // Union-find with path halving.
  std::vector<std::uint32_t> parent(n_);
  std::iota(parent.begin(), parent.end(), 0);
  const auto find = [&](std::uint32_t x) {
    while (parent[x] != x) {
      parent[x] = parent[parent[x]];
      x = parent[x];
    }
    return x;
  };
  for (const auto& [a, b] : edges_) {
    const std::uint32_t ra = find(a), rb = find(b);
    if (ra != rb) parent[std::max(ra, rb)] = std::min(ra, rb);
  }
  std::vector<std::uint32_t> ids(n_);
  std::vector<std::uint32_t> remap(n_, UINT32_MAX);
  std::uint32_t next = 0;
  for (std::uint32_t i = 0; i < n_; ++i) {
    const std::uint32_t r = find(i);
    if (remap[r] == UINT32_MAX) remap[r] = next++;
    ids[i] = remap[r];
  }
  return ids;
}

std::size_t SparseGraph::num_components() const {
  if (n_ == 0) return 0;
  const auto ids = component_ids();
  return 1 + *std::max_element(ids.begin(), ids.end());
}

DenseMatrix Propagator::to_dense() const {
  DenseMatrix m(n, n);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t k = row_ptr[i]; k < row_ptr[i + 1]; ++k)
      m(i, col[k]) = val[k];
  return m;
}

Propagator build_propagator(const SparseGraph& g) {
  const std::size_t n = g.num_nodes();
  std::vector<double> inv_sqrt_deg(n);
  for (std::uint32_t i = 0; i < n; ++i)
    inv_sqrt_deg[i] = 1.0 / std::sqrt(static_cast<double>(g.degree(i)));

  Propagator p;
  p.n = n;
  p.row_ptr.assign(n + 1, 0);
  for (std::uint32_t i = 0; i < n; ++i) {
    p.row_ptr[i + 1] = p.row_ptr[i] + (g.row_ptr()[i + 1] - g.row_ptr()[i]) + 1;
  }
  p.col.resize(p.row_ptr[n]);
  p.val.resize(p.row_ptr[n]);
  for (std::uint32_t i = 0; i < n; ++i) {
    std::size_t w = p.row_ptr[i];
    bool loop_placed = false;
    for (std::size_t k = g.row_ptr()[i]; k < g.row_ptr()[i + 1]; ++k) {
      const std::uint32_t j = g.neighbors()[k];
      if (!loop_placed && j > i) {
        // Keep columns sorted: the self-loop slots in at position i.
        p.col[w] = i;
        p.val[w] = 1.0 / static_cast<double>(g.degree(i));
        ++w;
        loop_placed = true;
      }
      p.col[w] = j;
      p.val[w] = inv_sqrt_deg[i] * inv_sqrt_deg[j];
      ++w;
    }
    if (!loop_placed) {
      p.col[w] = i;
      p.val[w] = 1.0 / static_cast<double>(g.degree(i));
      ++w;
    }
  }
  return p;
}

DenseMatrix spmm(const Propagator& p, const DenseMatrix& h) {
  if (h.rows() != p.n) {
    throw std::invalid_argument("spmm: row count does not match operator size");
  }
  DenseMatrix out(h.rows(), h.cols());
  for (std::size_t i = 0; i < p.n; ++i) {
    double* out_row = out.row(i);
    for (std::size_t k = p.row_ptr[i]; k < p.row_ptr[i + 1]; ++k) {
      const double v = p.val[k];
      const double* h_row = h.row(p.col[k]);
      for (std::size_t c = 0; c < h.cols(); ++c) out_row[c] += v * h_row[c];
    }
  }
  return out;
}

std::vector<double> spmv(const Propagator& p, const std::vector<double>& x) {
  if (x.size() != p.n) {
    throw std::invalid_argument("spmv: vector length does not match operator size");
  }
  std::vector<double> y(p.n, 0.0);
  for (std::size_t i = 0; i < p.n; ++i) {
    double s = 0.0;
    for (std::size_t k = p.row_ptr[i]; k < p.row_ptr[i + 1]; ++k)
      s += p.val[k] * x[p.col[k]];
    y[i] = s;
  }
  return y;
}

double max_row_sum(const Propagator& p) {
  double best = 0.0;
  for (std::size_t i = 0; i < p.n; ++i) {
    double s = 0.0;
    for (std::size_t k = p.row_ptr[i]; k < p.row_ptr[i + 1]; ++k) s += p.val[k];
    best = std::max(best, s);
  }
  return best;
}

DenseMatrix degree_profile_basis(const SparseGraph& g) {
  const std::size_t n = g.num_nodes();
  const auto ids = g.component_ids();
  const std::size_t m = g.num_components();
  std::vector<double> volume(m, 0.0);
  for (std::uint32_t i = 0; i < n; ++i)
    volume[ids[i]] += static_cast<double>(g.degree(i));
  DenseMatrix e(n, m);
  for (std::uint32_t i = 0; i < n; ++i) {
    e(i, ids[i]) =
        std::sqrt(static_cast<double>(g.degree(i))) / std::sqrt(volume[ids[i]]);
  }
  return e;
}

SpectralSummary spectral_summary(const SparseGraph& g, double tol,
                                 std::size_t max_iter) {
  SpectralSummary s;
  s.num_components = g.num_components();
  s.max_degree = g.max_degree();
  const std::size_t n = g.num_nodes();
  if (n == 0) {
    s.converged = true;
    return s;
  }
  const Propagator p = build_propagator(g);
  const DenseMatrix e = degree_profile_basis(g);
  const std::size_t m = e.cols();
  if (m >= n) {  // complement is empty (e.g. edgeless graph)
    s.lambda_second = 0.0;
    s.converged = true;
    return s;
  }

  const auto deflate = [&](std::vector<double>& v) {
    // v -= E E^T v, column by column.
    for (std::size_t c = 0; c < m; ++c) {
      double proj = 0.0;
      for (std::size_t i = 0; i < n; ++i) proj += e(i, c) * v[i];
      for (std::size_t i = 0; i < n; ++i) v[i] -= proj * e(i, c);
    }
  };
  const auto norm = [](const std::vector<double>& v) {
    double q = 0.0;
    for (double x : v) q += x * x;
    return std::sqrt(q);
  };

  // Power iteration on P^2 restricted to the complement of the top
  // eigenspace.  P^2 is symmetric PSD there, so the iteration cannot
  // oscillate between +/- eigenvalues and the Rayleigh quotient converges to
  // max lambda_i^2 = lambda_second^2.
  SeededRng rng(0x57EC7A5ULL);
  std::vector<double> v(n);
  for (auto& x : v) x = rng.next_gaussian();
  deflate(v);
  double vn = norm(v);
  while (vn < 1e-12) {  // astronomically unlikely; retry with fresh noise
    for (auto& x : v) x = rng.next_gaussian();
    deflate(v);
    vn = norm(v);
  }
  for (auto& x : v) x /= vn;

  double mu_prev = 0.0;
  for (std::size_t it = 1; it <= max_iter; ++it) {
    std::vector<double> w = spmv(p, spmv(p, v));
    deflate(w);  // re-deflate every step: kills numerical drift back into E
    double mu = 0.0;
    for (std::size_t i = 0; i < n; ++i) mu += v[i] * w[i];
    // Residual of the P^2 eigenproblem: ||w - mu v||.
    double res = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      const double r = w[i] - mu * v[i];
      res += r * r;
    }
    res = std::sqrt(res);
    const double wn = norm(w);
    if (wn < 1e-300) {  // complement maps to ~0: lambda_second is 0
      s.lambda_second = 0.0;
      s.converged = true;
      s.iterations = it;
      return s;
    }
    for (std::size_t i = 0; i < n; ++i) v[i] = w[i] / wn;
    if (res <= tol) {
      s.lambda_second = std::sqrt(std::max(0.0, mu));
      s.converged = true;
      s.iterations = it;
      return s;
    }
    mu_prev = mu;
  }
  s.lambda_second = std::sqrt(std::max(0.0, mu_prev));
  s.converged = false;
  s.iterations = max_iter;
  return s;
}

SparseGraph drop_edges(const SparseGraph& g, double rate, std::uint64_t seed) {
  if (rate < 0.0 || rate > 1.0) {
    throw std::invalid_argument("drop_edges: rate must lie in [0, 1]");
  }
  SeededRng rng(seed);
  std::vector<std::pair<std::uint32_t, std::uint32_t>> kept;
  kept.reserve(g.edges().size());
  for (const auto& edge : g.edges()) {
    // One draw per canonical edge, in canonical order, also when rate is 0 or
    // 1, so the kept set for a given seed is nested as the rate grows.
    const double u = rng.next_unit();
    if (u >= rate) kept.push_back(edge);
  }
  return SparseGraph(g.num_nodes(), std::move(kept));
}

SparseGraph read_graph_file(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw std::invalid_argument("graph: cannot open " + path.string());
  std::size_t n = 0;
  if (!(in >> n)) throw std::invalid_argument("graph: missing node count");
  std::vector<std::pair<std::uint32_t, std::uint32_t>> edges;
  std::uint64_t a, b;
  while (in >> a >> b) {
    if (a >= n || b >= n) {
      throw std::invalid_argument("graph: edge endpoint out of range in file");
    }
    edges.emplace_back(static_cast<std::uint32_t>(a), static_cast<std::uint32_t>(b));
  }
  if (!in.eof()) throw std::invalid_argument("graph: malformed edge line");
  return SparseGraph(n, std::move(edges));
}

void write_graph_file(const SparseGraph& g, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("graph: cannot open " + path.string());
  out << g.num_nodes() << "\n";
  for (const auto& [a, b] : g.edges()) out << a << ' ' << b << "\n";
}

}  // namespace gclab
