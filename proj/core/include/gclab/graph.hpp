#pragma once

#include <cstdint>
#include <filesystem>
#include <utility>
#include <vector>

#include "gclab/matrix.hpp"
#include "gclab/rng.hpp"

namespace gclab {

// Undirected graph on n nodes.  Every node additionally carries an implicit
// self-loop (the convention throughout this library), so deg(i) counts the
// loop: deg(i) = 1 + #plain neighbors.  The edge list stores each plain edge
// once as (i, j) with i < j, sorted and deduplicated.
class SparseGraph {
 public:
  SparseGraph() = default;
  // Validates, canonicalizes (sort + dedup), and rejects out-of-range
  // endpoints; explicit self-loops in `edges` are rejected (they are implied).
  SparseGraph(std::size_t n, std::vector<std::pair<std::uint32_t, std::uint32_t>> edges);

  std::size_t num_nodes() const { return n_; }
  std::size_t num_edges() const { return edges_.size(); }  // plain edges only
  const std::vector<std::pair<std::uint32_t, std::uint32_t>>& edges() const {
    return edges_;
  }

  // Degree including the self-loop; always >= 1.
  std::size_t degree(std::uint32_t i) const {
    return 1 + row_ptr_[i + 1] - row_ptr_[i];
  }
  std::size_t max_degree() const;

  // Plain (loop-free) adjacency in CSR form.
  const std::vector<std::size_t>& row_ptr() const { return row_ptr_; }
  const std::vector<std::uint32_t>& neighbors() const { return col_; }

  // Component id per node (ids are 0..k-1 in order of first appearance).
  std::vector<std::uint32_t> component_ids() const;
  std::size_t num_components() const;

 private:
  std::size_t n_ = 0;
  std::vector<std::pair<std::uint32_t, std::uint32_t>> edges_;
  std::vector<std::size_t> row_ptr_;
  std::vector<std::uint32_t> col_;
};

// Symmetric degree-normalized propagation operator of the self-looped graph,
// stored CSR: P = D^{-1/2} (A + I) D^{-1/2} with D the self-looped degrees.
// Diagonal entries are exactly 1/deg(i); spectral radius is exactly 1.
struct Propagator {
  std::size_t n = 0;
  std::vector<std::size_t> row_ptr;
  std::vector<std::uint32_t> col;
  std::vector<double> val;

  DenseMatrix to_dense() const;
};

Propagator build_propagator(const SparseGraph& g);

// out = P * h (sparse-dense product, fixed CSR accumulation order).
DenseMatrix spmm(const Propagator& p, const DenseMatrix& h);
// y = P * x for a single vector.
std::vector<double> spmv(const Propagator& p, const std::vector<double>& x);

// max_i sum_j P_ij.  Always <= sqrt(max_degree) for this operator family.
double max_row_sum(const Propagator& p);

struct SpectralSummary {
  // Largest |eigenvalue| of P outside the top per-component eigenspace
  // (the "second" eigenvalue magnitude); 0 when that complement is empty.
  double lambda_second = 0.0;
  std::size_t num_components = 0;
  std::size_t max_degree = 0;
  bool converged = false;
  std::size_t iterations = 0;
};

// Deflated power iteration on P^2 against the exactly-known top eigenvectors
// (sqrt-degree profiles per component).  Deterministic start vector.
SpectralSummary spectral_summary(const SparseGraph& g, double tol = 1e-10,
                                 std::size_t max_iter = 10000);

// Orthonormal basis of the top eigenspace of P: one column per component,
// e_c(i) = sqrt(deg(i)) / sqrt(vol(component)) for i in component c, else 0.
DenseMatrix degree_profile_basis(const SparseGraph& g);

// Independently keep each plain edge with probability 1-rate (self-loops are
// implicit and never dropped).  Deterministic in (g, rate, seed): edges are
// visited in canonical sorted order.
SparseGraph drop_edges(const SparseGraph& g, double rate, std::uint64_t seed);

// Text format: first line n, then one "i j" pair per plain edge, sorted.
SparseGraph read_graph_file(const std::filesystem::path& path);
void write_graph_file(const SparseGraph& g, const std::filesystem::path& path);

}  // namespace gclab
