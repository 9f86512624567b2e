#pragma once

#include <cstdint>
#include <filesystem>
#include <vector>

#include "gclab/graph.hpp"
#include "gclab/matrix.hpp"

namespace gclab {

// Contextual stochastic block model with two balanced classes.
//
// Edges: intra-class probability (d + lg*sqrt(d))/n, inter-class
// (d - lg*sqrt(d))/n with d = avg_degree and lg the edge-signal strength.
// Features: x_i = sqrt(mu/n) * y_i * u + z_i / sqrt(p) with y_i in {-1,+1},
// u a fixed random unit direction in R^p, z_i ~ N(0, I_p).
struct CsbmParams {
  std::size_t n = 1000;
  std::size_t feature_dim = 1000;
  double avg_degree = 5.0;
  double mu = 1.0;        // feature-signal strength
  double lambda_g = 1.0;  // edge-signal strength
  std::uint64_t seed = 1;
};

struct LabeledGraph {
  SparseGraph graph;
  DenseMatrix features;     // n x feature_dim
  std::vector<int> labels;  // 0 / 1, exactly n/2 each
};

struct TransductiveSplit {
  std::vector<std::uint32_t> train_idx;
  std::vector<std::uint32_t> val_idx;
  std::vector<std::uint32_t> test_idx;
};

// Intra/inter edge probabilities for params; throws if they leave [0, 1].
std::pair<double, double> edge_probabilities(const CsbmParams& params);

// Draw a dataset.  Throws std::invalid_argument when n is odd, n == 0,
// feature_dim == 0, avg_degree < 0, |lambda_g| > sqrt(avg_degree), or the
// implied edge probabilities leave [0, 1].
LabeledGraph generate(const CsbmParams& params);

// +/-1 view of the 0/1 labels (class 0 -> -1).
std::vector<double> signed_labels(const std::vector<int>& labels);

// Class-stratified split with largest-remainder rounding: global split sizes
// are the largest-remainder apportionment of n * fractions (ties to the
// earlier split), then per-class allocations are rounded so that both the
// class totals and the global split sizes are met exactly.  Membership within
// a class is a seeded shuffle; returned index lists are sorted ascending.
// fractions must be nonnegative and sum to 1 (tolerance 1e-9).
TransductiveSplit split(const std::vector<int>& labels,
                        const std::vector<double>& fractions,
                        std::uint64_t seed);

// A parameter point sampled uniformly (in angle) from the curve of constant
// combined signal lambda^2 + mu^2 / (p/n) = 1 + margin, scaled onto `base`
// (n, feature_dim, avg_degree, seed are taken from base).
CsbmParams equal_information_params(std::uint64_t seed, const CsbmParams& base,
                                    double margin = 0.25);

// Writes graph.txt, features.csv, labels.csv and dataset.json into dir.
void write_dataset(const std::filesystem::path& dir, const CsbmParams& params,
                   const LabeledGraph& data);

}  // namespace gclab
