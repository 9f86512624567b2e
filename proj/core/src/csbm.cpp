#include "gclab/csbm.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numbers>
#include <stdexcept>

#include "gclab/io.hpp"

namespace gclab {

std::pair<double, double> edge_probabilities(const CsbmParams& params) {
  const double n = static_cast<double>(params.n);
  const double d = params.avg_degree;
  const double shift = params.lambda_g * std::sqrt(d);
  const double intra = (d + shift) / n;
  const double inter = (d - shift) / n;
  if (intra < 0.0 || intra > 1.0 || inter < 0.0 || inter > 1.0) {
    throw std::invalid_argument("csbm: edge probabilities leave [0, 1]");
  }
  return {intra, inter};
}

LabeledGraph generate(const CsbmParams& params) {
  if (params.n == 0 || params.n % 2 != 0) {
    throw std::invalid_argument("csbm: n must be positive and even");
  }
  if (params.feature_dim == 0) {
    throw std::invalid_argument("csbm: feature_dim must be positive");
  }
  if (params.avg_degree < 0.0) {
    throw std::invalid_argument("csbm: avg_degree must be nonnegative");
  }
  if (std::abs(params.lambda_g) > std::sqrt(params.avg_degree)) {
    throw std::invalid_argument(
        "csbm: |lambda_g| must not exceed sqrt(avg_degree)");
  }
  const auto [p_intra, p_inter] = edge_probabilities(params);

  const std::size_t n = params.n;
  const std::size_t p = params.feature_dim;
  SeededRng root(params.seed);

  // Stream 0: which nodes belong to class 1 (exactly n/2).
  SeededRng label_rng = root.split(0);
  std::vector<int> labels(n, 0);
  {
    const auto perm = label_rng.permutation(n);
    for (std::size_t k = n / 2; k < n; ++k) labels[perm[k]] = 1;
  }

  // Stream 1: the shared feature direction u (unit norm).
  SeededRng dir_rng = root.split(1);
  std::vector<double> u(p);
  double un = 0.0;
  for (auto& x : u) {
    x = dir_rng.next_gaussian();
    un += x * x;
  }
  un = std::sqrt(un);
  for (auto& x : u) x /= un;

  // Stream 2: node features.
  SeededRng feat_rng = root.split(2);
  const double signal = std::sqrt(params.mu / static_cast<double>(n));
  const double noise = 1.0 / std::sqrt(static_cast<double>(p));
  DenseMatrix x(n, p);
  for (std::size_t i = 0; i < n; ++i) {
    const double y_pm = labels[i] == 0 ? -1.0 : 1.0;
    double* row = x.row(i);
    for (std::size_t j = 0; j < p; ++j) {
      row[j] = signal * y_pm * u[j] + noise * feat_rng.next_gaussian();
    }
  }

  // Stream 3: edges, one Bernoulli draw per unordered pair in (i, j) order.
  SeededRng edge_rng = root.split(3);
  std::vector<std::pair<std::uint32_t, std::uint32_t>> edges;
  for (std::uint32_t i = 0; i < n; ++i) {
    for (std::uint32_t j = i + 1; j < n; ++j) {
      const double prob = labels[i] == labels[j] ? p_intra : p_inter;
      if (edge_rng.next_unit() < prob) edges.emplace_back(i, j);
    }
  }

  return LabeledGraph{SparseGraph(n, std::move(edges)), std::move(x),
                      std::move(labels)};
}

std::vector<double> signed_labels(const std::vector<int>& labels) {
  std::vector<double> y(labels.size());
  for (std::size_t i = 0; i < labels.size(); ++i)
    y[i] = labels[i] == 0 ? -1.0 : 1.0;
  return y;
}

namespace {

// Largest-remainder apportionment of `total` into parts proportional to
// `weights`; ties go to the earlier part.
std::vector<std::size_t> apportion(std::size_t total,
                                   const std::vector<double>& weights) {
  const std::size_t k = weights.size();
  std::vector<std::size_t> out(k, 0);
  std::vector<double> frac(k, 0.0);
  std::size_t assigned = 0;
  for (std::size_t i = 0; i < k; ++i) {
    const double target = static_cast<double>(total) * weights[i];
    out[i] = static_cast<std::size_t>(std::floor(target + 1e-12));
    frac[i] = target - static_cast<double>(out[i]);
    assigned += out[i];
  }
  std::vector<std::size_t> order(k);
  for (std::size_t i = 0; i < k; ++i) order[i] = i;
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    return frac[a] > frac[b];
  });
  for (std::size_t r = 0; assigned < total; ++r) {
    out[order[r % k]] += 1;
    ++assigned;
  }
  return out;
}

}  // namespace

TransductiveSplit split(const std::vector<int>& labels,
                        const std::vector<double>& fractions,
                        std::uint64_t seed) {
  const std::size_t n = labels.size();
  if (fractions.size() != 3) {
    throw std::invalid_argument("split: expected three fractions");
  }
  double sum = 0.0;
  for (double f : fractions) {
    if (f < 0.0) throw std::invalid_argument("split: negative fraction");
    sum += f;
  }
  if (std::abs(sum - 1.0) > 1e-9) {
    throw std::invalid_argument("split: fractions must sum to 1");
  }

  const int num_classes =
      1 + (n ? *std::max_element(labels.begin(), labels.end()) : 0);
  std::vector<std::vector<std::uint32_t>> members(num_classes);
  for (std::size_t i = 0; i < n; ++i) {
    if (labels[i] < 0) throw std::invalid_argument("split: negative label");
    members[labels[i]].push_back(static_cast<std::uint32_t>(i));
  }

  // Global split sizes, then per-(class, split) base allocations; leftover
  // units go to the largest fractional parts subject to both the class totals
  // and the global split sizes (ties: earlier split, then lower class id).
  const std::vector<std::size_t> quota = apportion(n, fractions);
  std::vector<std::vector<std::size_t>> alloc(num_classes,
                                              std::vector<std::size_t>(3, 0));
  std::vector<std::size_t> class_slack(num_classes, 0);
  std::vector<std::size_t> split_slack(quota);
  struct Cell {
    double frac;
    int cls;
    int part;
  };
  std::vector<Cell> cells;
  for (int c = 0; c < num_classes; ++c) {
    const std::size_t nc = members[c].size();
    std::size_t base_sum = 0;
    for (int k = 0; k < 3; ++k) {
      const double target = static_cast<double>(nc) * fractions[k];
      alloc[c][k] = static_cast<std::size_t>(std::floor(target + 1e-12));
      base_sum += alloc[c][k];
      if (split_slack[k] < alloc[c][k]) {
        throw std::runtime_error("split: infeasible base allocation");
      }
      split_slack[k] -= alloc[c][k];
      cells.push_back({target - std::floor(target + 1e-12), c, k});
    }
    class_slack[c] = nc - base_sum;
  }
  std::stable_sort(cells.begin(), cells.end(), [](const Cell& a, const Cell& b) {
    if (a.frac != b.frac) return a.frac > b.frac;
    if (a.part != b.part) return a.part < b.part;
    return a.cls < b.cls;
  });
  // Two passes: first by fractional part, then (degenerate ties exhausted)
  // any still-open cell.  The second pass only runs in pathological cases.
  for (int pass = 0; pass < 2; ++pass) {
    for (const Cell& cell : cells) {
      if (class_slack[cell.cls] == 0 || split_slack[cell.part] == 0) continue;
      alloc[cell.cls][cell.part] += 1;
      class_slack[cell.cls] -= 1;
      split_slack[cell.part] -= 1;
    }
  }

  TransductiveSplit out;
  SeededRng root(seed);
  for (int c = 0; c < num_classes; ++c) {
    SeededRng class_rng = root.split(static_cast<std::uint64_t>(c));
    const auto order = class_rng.permutation(members[c].size());
    std::size_t cursor = 0;
    for (int k = 0; k < 3; ++k) {
      auto& dest = k == 0 ? out.train_idx : k == 1 ? out.val_idx : out.test_idx;
      for (std::size_t t = 0; t < alloc[c][k]; ++t) {
        dest.push_back(members[c][order[cursor++]]);
      }
    }
  }
  std::sort(out.train_idx.begin(), out.train_idx.end());
  std::sort(out.val_idx.begin(), out.val_idx.end());
  std::sort(out.test_idx.begin(), out.test_idx.end());
  return out;
}

CsbmParams equal_information_params(std::uint64_t seed, const CsbmParams& base,
                                    double margin) {
  if (margin <= -1.0) {
    throw std::invalid_argument("equal_information_params: margin <= -1");
  }
  CsbmParams out = base;
  out.seed = seed;
  SeededRng rng = SeededRng(seed).split(0xE0);
  const double theta = rng.next_unit() * std::numbers::pi / 2.0;
  const double radius = std::sqrt(1.0 + margin);
  const double ratio = static_cast<double>(base.feature_dim) /
                       static_cast<double>(base.n);
  out.lambda_g = radius * std::cos(theta);
  out.mu = radius * std::sqrt(ratio) * std::sin(theta);
  if (std::abs(out.lambda_g) > std::sqrt(base.avg_degree)) {
    throw std::invalid_argument(
        "equal_information_params: sampled lambda exceeds sqrt(avg_degree)");
  }
  return out;
}

void write_dataset(const std::filesystem::path& dir, const CsbmParams& params,
                   const LabeledGraph& data) {
  std::filesystem::create_directories(dir);
  write_graph_file(data.graph, dir / "graph.txt");
  {
    std::ofstream f(dir / "features.csv", std::ios::binary);
    if (!f) throw std::runtime_error("csbm: cannot write features.csv");
    dump_csv(data.features, f);
  }
  {
    std::ofstream f(dir / "labels.csv", std::ios::binary);
    if (!f) throw std::runtime_error("csbm: cannot write labels.csv");
    for (int label : data.labels) f << label << "\n";
  }
  Sidecar meta;
  meta.add_int("n", static_cast<std::int64_t>(params.n));
  meta.add_int("feature_dim", static_cast<std::int64_t>(params.feature_dim));
  meta.add_number("avg_degree", params.avg_degree);
  meta.add_number("mu", params.mu);
  meta.add_number("lambda_g", params.lambda_g);
  meta.add_int("seed", static_cast<std::int64_t>(params.seed));
  meta.add_int("num_edges", static_cast<std::int64_t>(data.graph.num_edges()));
  meta.add_number("mean_plain_degree",
                  params.n ? 2.0 * static_cast<double>(data.graph.num_edges()) /
                                 static_cast<double>(params.n)
                           : 0.0);
  meta.write(dir / "dataset.json");
}

}  // namespace gclab
