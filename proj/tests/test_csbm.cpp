#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <set>
#include <stdexcept>
#include <vector>

#include "doctest.h"
#include "gclab/csbm.hpp"
#include "gclab/matrix.hpp"

using namespace gclab;
namespace fs = std::filesystem;

namespace {
std::size_t count_label(const std::vector<int>& labels, int value) {
  return static_cast<std::size_t>(
      std::count(labels.begin(), labels.end(), value));
}
}  // namespace

TEST_CASE("edge probabilities follow the block-model formula") {
  CsbmParams p;
  p.n = 100;
  p.avg_degree = 4.0;
  p.lambda_g = 1.0;
  const auto [intra, inter] = edge_probabilities(p);
  CHECK(intra == doctest::Approx((4.0 + 2.0) / 100.0).epsilon(1e-15));
  CHECK(inter == doctest::Approx((4.0 - 2.0) / 100.0).epsilon(1e-15));

  p.lambda_g = -0.5;  // negative signal flips intra/inter ordering
  const auto [intra2, inter2] = edge_probabilities(p);
  CHECK(intra2 < inter2);

  p.lambda_g = 2.5;  // |lambda| > sqrt(4)
  CHECK_THROWS_AS(edge_probabilities(p), std::invalid_argument);
}

TEST_CASE("generate validates parameters") {
  CsbmParams p;
  p.n = 101;  // odd
  CHECK_THROWS_AS(generate(p), std::invalid_argument);
  p.n = 0;
  CHECK_THROWS_AS(generate(p), std::invalid_argument);
  p.n = 100;
  p.feature_dim = 0;
  CHECK_THROWS_AS(generate(p), std::invalid_argument);
  p.feature_dim = 10;
  p.avg_degree = -1.0;
  CHECK_THROWS_AS(generate(p), std::invalid_argument);
  p.avg_degree = 4.0;
  p.lambda_g = 3.0;
  CHECK_THROWS_AS(generate(p), std::invalid_argument);
}

TEST_CASE("generate balances classes exactly and is seed-deterministic") {
  CsbmParams p;
  p.n = 200;
  p.feature_dim = 32;
  p.avg_degree = 5.0;
  p.mu = 2.0;
  p.lambda_g = 1.0;
  p.seed = 42;
  const LabeledGraph a = generate(p);
  REQUIRE(a.labels.size() == 200);
  CHECK(count_label(a.labels, 0) == 100);
  CHECK(count_label(a.labels, 1) == 100);
  CHECK(a.features.rows() == 200);
  CHECK(a.features.cols() == 32);
  CHECK(a.graph.num_nodes() == 200);
  CHECK(a.graph.num_edges() > 0);

  const LabeledGraph b = generate(p);
  CHECK(a.labels == b.labels);
  CHECK(a.features == b.features);
  CHECK(a.graph.edges() == b.graph.edges());

  p.seed = 43;
  const LabeledGraph c = generate(p);
  CHECK(a.graph.edges() != c.graph.edges());
}

TEST_CASE("strong feature signal separates the class means") {
  CsbmParams p;
  p.n = 400;
  p.feature_dim = 50;
  p.mu = 25.0;
  p.lambda_g = 0.0;
  p.seed = 7;
  const LabeledGraph d = generate(p);

  // Projected onto the difference of empirical class means, the classes
  // should be nearly linearly separated when mu dominates the noise.
  std::vector<double> mean0(50, 0.0), mean1(50, 0.0);
  for (std::size_t i = 0; i < 400; ++i)
    for (std::size_t j = 0; j < 50; ++j)
      (d.labels[i] == 1 ? mean1 : mean0)[j] += d.features(i, j) / 200.0;
  double correct = 0;
  for (std::size_t i = 0; i < 400; ++i) {
    double score = 0;
    for (std::size_t j = 0; j < 50; ++j)
      score += d.features(i, j) * (mean1[j] - mean0[j]);
    if ((score > 0) == (d.labels[i] == 1)) ++correct;
  }
  CHECK(correct / 400.0 > 0.95);
}

TEST_CASE("signed labels map 0 to -1 and 1 to +1") {
  const std::vector<double> s = signed_labels({0, 1, 1, 0});
  REQUIRE(s.size() == 4);
  CHECK(s[0] == -1.0);
  CHECK(s[1] == 1.0);
  CHECK(s[2] == 1.0);
  CHECK(s[3] == -1.0);
}

TEST_CASE("split apportions 75/15/10 with largest-remainder rounding") {
  std::vector<int> labels(100);
  for (std::size_t i = 0; i < 100; ++i) labels[i] = i % 2;
  const TransductiveSplit s = split(labels, {0.75, 0.15, 0.10}, 5);
  CHECK(s.train_idx.size() == 75);
  CHECK(s.val_idx.size() == 15);
  CHECK(s.test_idx.size() == 10);

  // Disjoint and covering.
  std::set<std::uint32_t> seen;
  for (const auto* part : {&s.train_idx, &s.val_idx, &s.test_idx}) {
    CHECK(std::is_sorted(part->begin(), part->end()));
    for (std::uint32_t i : *part) {
      CHECK(i < 100);
      CHECK(seen.insert(i).second);
    }
  }
  CHECK(seen.size() == 100);

  // Stratification: train carries 38/37 (largest remainder, tie to earlier
  // class), val 7/8, test 5/5.
  const auto class_count = [&](const std::vector<std::uint32_t>& idx, int y) {
    std::size_t k = 0;
    for (std::uint32_t i : idx) k += labels[i] == y ? 1 : 0;
    return k;
  };
  CHECK(class_count(s.train_idx, 0) == 38);
  CHECK(class_count(s.train_idx, 1) == 37);
  CHECK(class_count(s.val_idx, 0) == 7);
  CHECK(class_count(s.val_idx, 1) == 8);
  CHECK(class_count(s.test_idx, 0) == 5);
  CHECK(class_count(s.test_idx, 1) == 5);

  const TransductiveSplit again = split(labels, {0.75, 0.15, 0.10}, 5);
  CHECK(again.train_idx == s.train_idx);
  CHECK(again.val_idx == s.val_idx);
  CHECK(again.test_idx == s.test_idx);
  const TransductiveSplit other = split(labels, {0.75, 0.15, 0.10}, 6);
  CHECK(other.train_idx != s.train_idx);

  CHECK_THROWS_AS(split(labels, {0.9, 0.2, 0.1}, 1), std::invalid_argument);
  CHECK_THROWS_AS(split(labels, {0.9, -0.1, 0.2}, 1), std::invalid_argument);
}

TEST_CASE("equal-information parameters stay on the constant-signal curve") {
  CsbmParams base;
  base.n = 1000;
  base.feature_dim = 1000;
  base.avg_degree = 5.0;
  for (std::uint64_t seed = 1; seed <= 10; ++seed) {
    const CsbmParams p = equal_information_params(seed, base, 0.25);
    const double ratio = static_cast<double>(p.feature_dim) /
                         static_cast<double>(p.n);
    const double combined =
        p.lambda_g * p.lambda_g + p.mu * p.mu / ratio;
    CHECK(combined == doctest::Approx(1.25).epsilon(1e-12));
    CHECK(p.n == base.n);
    CHECK(p.feature_dim == base.feature_dim);
    CHECK(p.avg_degree == base.avg_degree);
    CHECK(std::abs(p.lambda_g) <= std::sqrt(base.avg_degree));
    // Valid by construction: generate must accept the point.
    CsbmParams small = p;
    small.n = 50;
    small.feature_dim = 50;
    CHECK_NOTHROW(edge_probabilities(small));
  }
  // Deterministic in the seed.
  const CsbmParams a = equal_information_params(3, base);
  const CsbmParams b = equal_information_params(3, base);
  CHECK(a.mu == b.mu);
  CHECK(a.lambda_g == b.lambda_g);
}

TEST_CASE("write_dataset emits a loadable bundle") {
  const fs::path dir = fs::temp_directory_path() / "gclab_test_dataset";
  fs::remove_all(dir);
  CsbmParams p;
  p.n = 20;
  p.feature_dim = 4;
  p.avg_degree = 3.0;
  p.seed = 9;
  const LabeledGraph d = generate(p);
  write_dataset(dir, p, d);
  CHECK(fs::exists(dir / "graph.txt"));
  CHECK(fs::exists(dir / "features.csv"));
  CHECK(fs::exists(dir / "labels.csv"));
  CHECK(fs::exists(dir / "dataset.json"));

  const SparseGraph g = read_graph_file(dir / "graph.txt");
  CHECK(g.num_nodes() == 20);
  CHECK(g.edges() == d.graph.edges());
  std::ifstream feat(dir / "features.csv");
  const DenseMatrix back = load_csv(feat);
  CHECK(back == d.features);
  fs::remove_all(dir);
}
