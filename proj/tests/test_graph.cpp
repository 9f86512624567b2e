#include <algorithm>
#include <cmath>
#include <filesystem>
#include <set>
#include <stdexcept>
#include <vector>

#include "doctest.h"
#include "eigen_support.hpp"
#include "gclab/graph.hpp"
#include "gclab/matrix.hpp"
#include "support.hpp"

using namespace gclab;
namespace fs = std::filesystem;

namespace {
// Path graph 0-1-2.
SparseGraph path3() { return SparseGraph(3, {{0, 1}, {1, 2}}); }
}  // namespace

TEST_CASE("constructor canonicalizes and validates the edge list") {
  const SparseGraph g(4, {{2, 1}, {0, 1}, {1, 2}, {3, 0}});
  CHECK(g.num_nodes() == 4);
  CHECK(g.num_edges() == 3);  // duplicate (1,2) collapsed
  const auto& e = g.edges();
  CHECK(e[0] == std::make_pair<std::uint32_t, std::uint32_t>(0, 1));
  CHECK(e[1] == std::make_pair<std::uint32_t, std::uint32_t>(0, 3));
  CHECK(e[2] == std::make_pair<std::uint32_t, std::uint32_t>(1, 2));

  CHECK_THROWS_AS(SparseGraph(3, {{0, 3}}), std::invalid_argument);
  CHECK_THROWS_AS(SparseGraph(3, {{1, 1}}), std::invalid_argument);

  CHECK(g.degree(0) == 3);  // self-loop + neighbors 1, 3
  CHECK(g.degree(3) == 2);
  CHECK(g.max_degree() == 3);

  const SparseGraph empty(2, {});
  CHECK(empty.degree(0) == 1);
  CHECK(empty.num_components() == 2);
}

TEST_CASE("component labeling") {
  const SparseGraph g(5, {{0, 1}, {3, 4}});
  const auto ids = g.component_ids();
  CHECK(g.num_components() == 3);
  CHECK(ids[0] == ids[1]);
  CHECK(ids[3] == ids[4]);
  CHECK(ids[0] != ids[2]);
  CHECK(ids[2] != ids[3]);
  CHECK(ids[0] == 0);  // first-appearance order
  CHECK(ids[2] == 1);
  CHECK(ids[3] == 2);
}

TEST_CASE("propagator entries on the 3-path are exact") {
  const Propagator p = build_propagator(path3());
  const DenseMatrix d = p.to_dense();
  // Self-looped degrees: 2, 3, 2.
  CHECK(d(0, 0) == 0.5);
  CHECK(d(1, 1) == doctest::Approx(1.0 / 3.0).epsilon(1e-15));
  CHECK(d(2, 2) == 0.5);
  CHECK(d(0, 1) == doctest::Approx(1.0 / std::sqrt(6.0)).epsilon(1e-15));
  CHECK(d(1, 0) == d(0, 1));
  CHECK(d(1, 2) == d(0, 1));
  CHECK(d(0, 2) == 0.0);
  CHECK(max_row_sum(p) ==
        doctest::Approx(1.0 / 3.0 + 2.0 / std::sqrt(6.0)).epsilon(1e-15));
}

TEST_CASE("spmm and spmv agree with the dense product") {
  SeededRng rng(3);
  const SparseGraph g = testsupport::er_graph(9, 0.4, rng);
  const Propagator p = build_propagator(g);
  const DenseMatrix dense = p.to_dense();
  const DenseMatrix h = gaussian_matrix(9, 4, 1.0, rng);
  const DenseMatrix via_sparse = spmm(p, h);
  const DenseMatrix via_dense = matmul(dense, h);
  for (std::size_t i = 0; i < 9; ++i)
    for (std::size_t j = 0; j < 4; ++j)
      CHECK(via_sparse(i, j) ==
            doctest::Approx(via_dense(i, j)).epsilon(1e-13));

  std::vector<double> x(9);
  for (std::size_t i = 0; i < 9; ++i) x[i] = h(i, 0);
  const std::vector<double> y = spmv(p, x);
  for (std::size_t i = 0; i < 9; ++i)
    CHECK(y[i] == doctest::Approx(via_sparse(i, 0)).epsilon(1e-13));
}

TEST_CASE("degree profile basis is orthonormal and P-invariant") {
  const SparseGraph g(6, {{0, 1}, {1, 2}, {3, 4}});  // two components + isolate
  const DenseMatrix e = degree_profile_basis(g);
  REQUIRE(e.rows() == 6);
  REQUIRE(e.cols() == 3);
  const DenseMatrix gram = matmul(transpose(e), e);
  for (std::size_t i = 0; i < 3; ++i)
    for (std::size_t j = 0; j < 3; ++j)
      CHECK(gram(i, j) ==
            doctest::Approx(i == j ? 1.0 : 0.0).epsilon(1e-12));
  const Propagator p = build_propagator(g);
  const DenseMatrix pe = spmm(p, e);
  for (std::size_t i = 0; i < 6; ++i)
    for (std::size_t j = 0; j < 3; ++j)
      CHECK(pe(i, j) == doctest::Approx(e(i, j)).epsilon(1e-12));
}

TEST_CASE("spectral summary matches the dense eigensolve on random graphs") {
  for (std::uint64_t seed = 1; seed <= 20; ++seed) {
    SeededRng rng(seed);
    const std::size_t n = 4 + rng.next_below(9);  // 4..12
    const SparseGraph g = testsupport::er_graph(n, 0.35, rng);
    const SpectralSummary s = spectral_summary(g);
    REQUIRE(s.converged);
    CHECK(s.num_components == g.num_components());
    CHECK(s.max_degree == g.max_degree());

    // Oracle: |eigenvalues| of dense P, drop the top one per component.
    const auto ev =
        symmetric_eigenvalues(build_propagator(g).to_dense());
    std::vector<double> mags;
    for (double v : ev) mags.push_back(std::abs(v));
    std::sort(mags.begin(), mags.end(), std::greater<double>());
    // The per-component top eigenvalues are exactly 1.
    for (std::size_t c = 0; c < g.num_components(); ++c)
      CHECK(mags[c] == doctest::Approx(1.0).epsilon(1e-9));
    const double oracle = mags.size() > g.num_components()
                              ? mags[g.num_components()]
                              : 0.0;
    CHECK(s.lambda_second == doctest::Approx(oracle).epsilon(1e-8));
  }
}

TEST_CASE("two-node edge cases of the spectral summary") {
  // K2: P = [[1/2, 1/2], [1/2, 1/2]], eigenvalues {1, 0}.
  const SpectralSummary k2 = spectral_summary(SparseGraph(2, {{0, 1}}));
  CHECK(k2.converged);
  CHECK(k2.lambda_second == doctest::Approx(0.0).epsilon(1e-9));
  // Single node: no complement at all.
  const SpectralSummary one = spectral_summary(SparseGraph(1, {}));
  CHECK(one.converged);
  CHECK(one.lambda_second == 0.0);
}

TEST_CASE("drop_edges endpoints, determinism, and independence") {
  SeededRng rng(11);
  const SparseGraph g = testsupport::er_graph(30, 0.3, rng);
  REQUIRE(g.num_edges() > 30);

  const SparseGraph keep_all = drop_edges(g, 0.0, 7);
  CHECK(keep_all.edges() == g.edges());
  const SparseGraph keep_none = drop_edges(g, 1.0, 7);
  CHECK(keep_none.num_edges() == 0);
  CHECK(keep_none.num_nodes() == g.num_nodes());

  const SparseGraph a = drop_edges(g, 0.4, 9);
  const SparseGraph b = drop_edges(g, 0.4, 9);
  CHECK(a.edges() == b.edges());
  const SparseGraph c = drop_edges(g, 0.4, 10);
  CHECK(a.edges() != c.edges());

  // Same seed, higher rate keeps a subset: each edge uses its own draw.
  const SparseGraph lo = drop_edges(g, 0.25, 9);
  const SparseGraph hi = drop_edges(g, 0.5, 9);
  std::set<std::pair<std::uint32_t, std::uint32_t>> lo_set(
      lo.edges().begin(), lo.edges().end());
  for (const auto& e : hi.edges()) CHECK(lo_set.count(e) == 1);
}

TEST_CASE("graph file round trip") {
  const fs::path p = fs::temp_directory_path() / "gclab_test_graph.txt";
  const SparseGraph g(5, {{0, 4}, {1, 2}, {0, 1}});
  write_graph_file(g, p);
  const SparseGraph back = read_graph_file(p);
  CHECK(back.num_nodes() == g.num_nodes());
  CHECK(back.edges() == g.edges());
  fs::remove(p);
  CHECK_THROWS_AS(read_graph_file(p), std::invalid_argument);
}
