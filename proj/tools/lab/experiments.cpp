#include "experiments.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <filesystem>
#include <limits>
#include <map>
#include <numeric>
#include <stdexcept>
#include <string>
#include <tuple>
#include <utility>
#include <vector>

#include "gclab/bounds.hpp"
#include "gclab/csbm.hpp"
#include "gclab/graph.hpp"
#include "gclab/matrix.hpp"
#include "gclab/metrics.hpp"
#include "gclab/model.hpp"
#include "gclab/rng.hpp"
#include "gclab/train.hpp"
#include "pool.hpp"

namespace gclab::lab {
namespace {

namespace fs = std::filesystem;

std::string fmt(double x) { return format_full(x); }
std::string fmt(std::uint64_t x) { return std::to_string(x); }
std::string fmt(int x) { return std::to_string(x); }

double mean_of(const std::vector<double>& v) {
  if (v.empty()) return std::numeric_limits<double>::quiet_NaN();
  return std::accumulate(v.begin(), v.end(), 0.0) / static_cast<double>(v.size());
}

double sample_std(const std::vector<double>& v) {
  if (v.size() < 2) return 0.0;
  const double m = mean_of(v);
  double ss = 0.0;
  for (double x : v) ss += (x - m) * (x - m);
  return std::sqrt(ss / static_cast<double>(v.size() - 1));
}

double median_of(std::vector<double> v) {
  if (v.empty()) return std::numeric_limits<double>::quiet_NaN();
  std::sort(v.begin(), v.end());
  const std::size_t n = v.size();
  return n % 2 ? v[n / 2] : 0.5 * (v[n / 2 - 1] + v[n / 2]);
}

std::vector<std::size_t> depth_list(const Config& cfg,
                                    std::vector<double> fallback) {
  std::vector<std::size_t> out;
  for (double d : cfg.get_double_list("depths", fallback))
    out.push_back(static_cast<std::size_t>(d));
  return out;
}

struct DatasetBundle {
  CsbmParams params;
  LabeledGraph data;
  TransductiveSplit parts;
};

// One synthetic instance per seed: the generator parameters are drawn from
// the equal-information curve, then graph/features/split all derive from
// decorrelated substreams of the instance seed.
DatasetBundle make_dataset(const Config& cfg, std::uint64_t instance_seed) {
  CsbmParams base;
  base.n = static_cast<std::size_t>(cfg.get_int("n", 200));
  base.feature_dim = static_cast<std::size_t>(cfg.get_int("feature_dim", 1000));
  base.avg_degree = cfg.get_double("avg_degree", 5.0);
  SeededRng root(instance_seed);
  base.seed = root.split(10).seed();
  CsbmParams params = equal_information_params(
      root.split(11).seed(), base, cfg.get_double("margin", 0.25));
  DatasetBundle out{params, generate(params), {}};
  out.parts =
      split(out.data.labels, {0.75, 0.15, 0.10}, root.split(12).seed());
  return out;
}

LossConfig loss_from(const Config& cfg) {
  LossConfig lc;
  const std::string kind = cfg.get_string("loss", "margin");
  if (kind == "margin")
    lc.kind = LossKind::Margin;
  else if (kind == "squared")
    lc.kind = LossKind::Squared;
  else
    throw std::invalid_argument("unknown loss kind: " + kind);
  lc.gamma = cfg.get_double("gamma", 1.0);
  return lc;
}

ModelSpec spec_for(const Config& cfg, const std::string& arch,
                   std::size_t depth, std::size_t input_dim) {
  ModelSpec s;
  s.arch = arch_from_name(arch);
  s.depth = depth;
  s.input_dim = input_dim;
  s.hidden_dim = static_cast<std::size_t>(cfg.get_int("hidden", 16));
  s.use_bias = cfg.get_bool("use_bias", false);
  s.alpha = cfg.get_double("alpha", 0.9);
  s.beta = cfg.get_double("beta", 0.1);
  s.beta_schedule = cfg.get_bool("beta_schedule", false);
  s.validate();
  return s;
}

std::uint64_t train_seed_for(std::uint64_t instance_seed,
                             const std::string& arch, std::size_t depth) {
  const auto arch_id = static_cast<std::uint64_t>(arch_from_name(arch));
  return SeededRng(instance_seed).split(100 + arch_id).split(depth).seed();
}

struct CellResult {
  GapRun run;
  TrainHistory history;
};

CellResult run_cell(const Config& cfg, const DatasetBundle& ds,
                    const std::string& arch, std::size_t depth,
                    std::uint64_t instance_seed,
                    const AugmentConfig& aug = {}) {
  const ModelSpec spec = spec_for(cfg, arch, depth, ds.data.features.cols());
  TrainConfig tc;
  tc.eta = cfg.get_double("eta", 0.01);
  tc.epochs = static_cast<std::size_t>(cfg.get_int("epochs", 500));
  tc.loss = loss_from(cfg);
  tc.augment = aug;
  tc.seed = train_seed_for(instance_seed, arch, depth);
  tc.eta_mix = cfg.get_double("eta_mix", -1.0);
  TrainResult r = train(spec, ds.data.graph, ds.data.features, ds.data.labels,
                        ds.parts, tc);
  const std::size_t e = best_train_epoch(r.history);
  GapRun g;
  g.seed = static_cast<int>(instance_seed);
  g.arch = arch;
  g.depth = static_cast<int>(depth);
  g.early_epoch = static_cast<int>(e);
  g.train_loss = r.history.train_loss[e];
  g.val_loss = r.history.val_loss[e];
  g.test_loss = r.history.test_loss[e];
  g.train_acc = r.history.train_acc[e];
  g.val_acc = r.history.val_acc[e];
  g.test_acc = r.history.test_acc[e];
  g.gap_loss = g.val_loss - g.train_loss;
  g.gap_acc = g.train_acc - g.val_acc;
  return {std::move(g), std::move(r.history)};
}

void write_gap_runs(const fs::path& path, std::uint64_t hash,
                    const std::vector<GapRun>& runs) {
  CsvWriter csv(path, hash,
                "seed,arch,depth,early_epoch,train_loss,val_loss,test_loss,"
                "train_acc,val_acc,test_acc,gap_loss,gap_acc");
  for (const GapRun& g : runs)
    csv.row({fmt(g.seed), g.arch, fmt(g.depth), fmt(g.early_epoch),
             fmt(g.train_loss), fmt(g.val_loss), fmt(g.test_loss),
             fmt(g.train_acc), fmt(g.val_acc), fmt(g.test_acc),
             fmt(g.gap_loss), fmt(g.gap_acc)});
}

// The architecture chain the gap ordering is asserted over, restricted to
// the architectures actually present in the run.
std::vector<std::string> canonical_chain(const std::vector<std::string>& archs) {
  static const std::vector<std::string> order = {"appnp", "gcnii", "gcn",
                                                 "resgcn"};
  std::vector<std::string> chain;
  for (const auto& name : order)
    if (std::find(archs.begin(), archs.end(), name) != archs.end())
      chain.push_back(name);
  return chain;
}

std::vector<double> gaps_of(const std::vector<GapRun>& runs,
                            const std::string& arch, int depth) {
  std::vector<double> out;
  for (const GapRun& g : runs)
    if (g.arch == arch && g.depth == depth) out.push_back(g.gap_loss);
  return out;
}

bool histories_identical(const TrainHistory& a, const TrainHistory& b) {
  const auto eq = [](const std::vector<double>& x,
                     const std::vector<double>& y) { return x == y; };
  return eq(a.train_loss, b.train_loss) && eq(a.val_loss, b.val_loss) &&
         eq(a.test_loss, b.test_loss) && eq(a.train_acc, b.train_acc) &&
         eq(a.val_acc, b.val_acc) && eq(a.test_acc, b.test_acc) &&
         eq(a.grad_norm, b.grad_norm) && eq(a.max_sv, b.max_sv);
}

SparseGraph er_graph(std::size_t n, double prob, SeededRng& rng) {
  std::vector<std::pair<std::uint32_t, std::uint32_t>> edges;
  for (std::uint32_t i = 0; i < n; ++i)
    for (std::uint32_t j = i + 1; j < n; ++j)
      if (rng.next_unit() < prob) edges.emplace_back(i, j);
  return SparseGraph(n, std::move(edges));
}

// Spectral norm of the weight matrix applied at a given representation
// layer, NaN where the layer has no dedicated weight.
double layer_weight_sv(const ModelSpec& spec, const ModelParams& params,
                       std::size_t layer) {
  const double nan = std::numeric_limits<double>::quiet_NaN();
  switch (spec.arch) {
    case Arch::GCN:
      return layer == 0 ? nan : spectral_norm(params.weights[layer - 1]).value;
    case Arch::ResGCN:
    case Arch::GCNII:
      return spectral_norm(params.weights[layer]).value;
    case Arch::APPNP:
    case Arch::SGC:
      return layer == 0 ? spectral_norm(params.weights[0]).value : nan;
    case Arch::DGCN:
      return layer == 0 ? nan : spectral_norm(params.weights[layer - 1]).value;
  }
  return nan;
}

}  // namespace

CheckReport run_synth_gap(const Config& cfg, const std::string& out_dir) {
  fs::create_directories(out_dir);
  const auto num_seeds = static_cast<std::size_t>(cfg.get_int("seeds", 20));
  const auto base_seed = static_cast<std::uint64_t>(cfg.get_int("seed", 1));
  const auto depth = static_cast<std::size_t>(cfg.get_int("depth", 8));
  const auto archs =
      cfg.get_list("archs", {"appnp", "gcnii", "gcn", "resgcn"});
  const auto workers = static_cast<std::size_t>(cfg.get_int("workers", 0));

  std::vector<std::vector<GapRun>> per_seed(num_seeds);
  parallel_for(num_seeds, workers, [&](std::size_t i) {
    const std::uint64_t instance_seed = base_seed + i;
    const DatasetBundle ds = make_dataset(cfg, instance_seed);
    for (const auto& arch : archs)
      per_seed[i].push_back(run_cell(cfg, ds, arch, depth, instance_seed).run);
  });

  std::vector<GapRun> runs;
  for (const auto& block : per_seed)
    runs.insert(runs.end(), block.begin(), block.end());
  write_gap_runs(fs::path(out_dir) / "runs.csv", cfg.hash(), runs);

  {
    CsvWriter csv(fs::path(out_dir) / "summary.csv", cfg.hash(),
                  "arch,depth,runs,mean_gap,std_gap,median_gap,mean_test_acc");
    for (const auto& arch : archs) {
      const std::vector<double> gaps = gaps_of(runs, arch, static_cast<int>(depth));
      std::vector<double> accs;
      for (const GapRun& g : runs)
        if (g.arch == arch) accs.push_back(g.test_acc);
      csv.row({arch, fmt(depth), fmt(gaps.size()), fmt(mean_of(gaps)),
               fmt(sample_std(gaps)), fmt(median_of(gaps)), fmt(mean_of(accs))});
    }
  }

  CheckReport rep;
  const std::vector<std::string> chain = canonical_chain(archs);
  const double threshold = cfg.get_double("ordering_threshold", 0.55);
  {
    CsvWriter csv(fs::path(out_dir) / "ordering.csv", cfg.hash(),
                  "pair,wins,total,fraction");
    for (std::size_t k = 0; k + 1 < chain.size(); ++k) {
      const auto& lo = chain[k];
      const auto& hi = chain[k + 1];
      const std::vector<double> a = gaps_of(runs, lo, static_cast<int>(depth));
      const std::vector<double> b = gaps_of(runs, hi, static_cast<int>(depth));
      std::size_t wins = 0;
      for (std::size_t i = 0; i < a.size(); ++i)
        if (a[i] <= b[i]) ++wins;
      const double frac =
          a.empty() ? 0.0 : static_cast<double>(wins) / static_cast<double>(a.size());
      csv.row({lo + "<=" + hi, fmt(wins), fmt(a.size()), fmt(frac)});
      rep.require(frac >= threshold,
                  "gap sign test " + lo + "<=" + hi + ": fraction " +
                      fmt(frac) + " below threshold " + fmt(threshold));
      const double med_lo = median_of(a), med_hi = median_of(b);
      rep.require(med_lo <= med_hi,
                  "median gap ordering violated: " + lo + " (" + fmt(med_lo) +
                      ") > " + hi + " (" + fmt(med_hi) + ")");
    }
  }
  return rep;
}

CheckReport run_depth_sweep(const Config& cfg, const std::string& out_dir) {
  fs::create_directories(out_dir);
  const auto num_seeds = static_cast<std::size_t>(cfg.get_int("seeds", 20));
  const auto base_seed = static_cast<std::uint64_t>(cfg.get_int("seed", 1));
  const std::vector<std::size_t> depths = depth_list(cfg, {2, 4, 8});
  const auto archs =
      cfg.get_list("archs", {"appnp", "gcnii", "gcn", "resgcn"});
  const auto workers = static_cast<std::size_t>(cfg.get_int("workers", 0));

  struct Task {
    std::size_t seed_idx;
    std::size_t depth;
  };
  std::vector<Task> tasks;
  for (std::size_t i = 0; i < num_seeds; ++i)
    for (std::size_t d : depths) tasks.push_back({i, d});

  std::vector<std::vector<GapRun>> per_task(tasks.size());
  parallel_for(tasks.size(), workers, [&](std::size_t t) {
    const std::uint64_t instance_seed = base_seed + tasks[t].seed_idx;
    const DatasetBundle ds = make_dataset(cfg, instance_seed);
    for (const auto& arch : archs)
      per_task[t].push_back(
          run_cell(cfg, ds, arch, tasks[t].depth, instance_seed).run);
  });

  std::vector<GapRun> runs;
  for (const auto& block : per_task)
    runs.insert(runs.end(), block.begin(), block.end());
  write_gap_runs(fs::path(out_dir) / "runs.csv", cfg.hash(), runs);

  CsvWriter csv(fs::path(out_dir) / "summary.csv", cfg.hash(),
                "arch,depth,runs,mean_gap,std_gap,median_gap,mean_test_acc");
  for (const auto& arch : archs)
    for (std::size_t d : depths) {
      const std::vector<double> gaps = gaps_of(runs, arch, static_cast<int>(d));
      std::vector<double> accs;
      for (const GapRun& g : runs)
        if (g.arch == arch && g.depth == static_cast<int>(d))
          accs.push_back(g.test_acc);
      csv.row({arch, fmt(d), fmt(gaps.size()), fmt(mean_of(gaps)),
               fmt(sample_std(gaps)), fmt(median_of(gaps)), fmt(mean_of(accs))});
    }
  return {};
}

CheckReport run_smoothing(const Config& cfg, const std::string& out_dir) {
  fs::create_directories(out_dir);
  const auto base_seed = static_cast<std::uint64_t>(cfg.get_int("seed", 1));
  const std::vector<std::size_t> depths = depth_list(cfg, {2, 4, 8});
  const auto archs = cfg.get_list("archs", {"gcn", "sgc"});
  const DatasetBundle ds = make_dataset(cfg, base_seed);
  const Propagator prop = build_propagator(ds.data.graph);

  CheckReport rep;
  CsvWriter csv(fs::path(out_dir) / "layer_metrics.csv", cfg.hash(),
                "arch,depth,trained,layer,d_m,dirichlet,intra,inter,"
                "w_spectral_norm");
  const auto emit = [&](const std::string& arch, std::size_t depth,
                        int trained, const ModelSpec& spec,
                        const ModelParams& params) {
    const ForwardTrace trace = forward(spec, params, prop, ds.data.features);
    const auto rows = layer_metrics(trace, ds.data.graph, ds.data.labels);
    for (const auto& r : rows)
      csv.row({arch, fmt(depth), fmt(trained), fmt(r.layer), fmt(r.d_m),
               fmt(r.dirichlet), fmt(r.intra), fmt(r.inter),
               fmt(layer_weight_sv(spec, params, r.layer))});
    return rows;
  };

  for (const auto& arch : archs)
    for (std::size_t depth : depths) {
      const ModelSpec spec =
          spec_for(cfg, arch, depth, ds.data.features.cols());
      SeededRng init_rng(train_seed_for(base_seed, arch, depth));
      SeededRng init_stream = init_rng.split(1);
      const ModelParams init = init_params(spec, init_stream);
      const auto untrained_rows = emit(arch, depth, 0, spec, init);

      TrainConfig tc;
      tc.eta = cfg.get_double("eta", 0.01);
      tc.epochs = static_cast<std::size_t>(cfg.get_int("epochs", 200));
      tc.loss = loss_from(cfg);
      tc.seed = train_seed_for(base_seed, arch, depth);
      tc.eta_mix = cfg.get_double("eta_mix", -1.0);
      const TrainResult r = train(spec, ds.data.graph, ds.data.features,
                                  ds.data.labels, ds.parts, tc, init);
      emit(arch, depth, 1, spec, r.params);

      if (arch == "sgc") {
        const double slack = 1e-9 * (1.0 + untrained_rows.front().d_m);
        for (std::size_t l = 0; l + 1 < untrained_rows.size(); ++l)
          rep.require(
              untrained_rows[l + 1].d_m <= untrained_rows[l].d_m + slack,
              "untrained linear cascade distance increased at depth " +
                  fmt(depth) + " layer " + fmt(l + 1));
      }
    }
  return rep;
}

CheckReport run_bounds_table(const Config& cfg, const std::string& out_dir) {
  fs::create_directories(out_dir);
  const auto archs =
      cfg.get_list("archs", {"appnp", "gcnii", "gcn", "resgcn", "dgcn"});
  const std::vector<std::size_t> depths = depth_list(cfg, {2, 4, 8});
  const std::vector<double> degree_grid =
      cfg.get_double_list("degree_list", {4, 5, 6, 7, 8, 10, 12});
  const std::vector<double> bw_grid =
      cfg.get_double_list("b_w_list", {1, 1.5, 2, 3, 5});

  StabilityInputs base;
  base.b_x = cfg.get_double("b_x", 1.0);
  base.gamma = cfg.get_double("gamma", 1.0);
  base.eta = cfg.get_double("eta", 0.01);
  base.t = static_cast<std::size_t>(cfg.get_int("steps", 10));
  base.m = cfg.get_double("m", 150.0);
  base.u = cfg.get_double("u", 50.0);
  base.alpha = cfg.get_double("alpha", 0.9);
  base.beta = cfg.get_double("beta", 0.1);
  base.delta = cfg.get_double("delta", 0.05);

  // eps[arch][point]; points enumerated L-major, then d, then b_w.
  std::vector<std::tuple<std::size_t, double, double>> points;
  for (std::size_t l : depths)
    for (double d : degree_grid)
      for (double bw : bw_grid) points.emplace_back(l, d, bw);

  std::map<std::string, std::vector<double>> eps;
  std::map<std::string, std::vector<StabilityConstants>> cons;
  for (const auto& arch : archs) {
    auto& ev = eps[arch];
    auto& cv = cons[arch];
    for (const auto& [l, d, bw] : points) {
      StabilityInputs in = base;
      in.l = l;
      in.d = d;
      in.b_w = bw;
      const StabilityConstants c = constants_for(arch_from_name(arch), in);
      cv.push_back(c);
      ev.push_back(epsilon_stability(c, in));
    }
  }

  {
    CsvWriter csv(fs::path(out_dir) / "bounds.csv", cfg.hash(),
                  "arch,L,d,b_w,alpha,beta,rho_f,g_f,l_f,epsilon");
    for (const auto& arch : archs)
      for (std::size_t p = 0; p < points.size(); ++p) {
        const auto& [l, d, bw] = points[p];
        const StabilityConstants& c = cons[arch][p];
        csv.row({arch, fmt(l), fmt(d), fmt(bw), fmt(base.alpha),
                 fmt(base.beta), fmt(c.rho_f), fmt(c.g_f), fmt(c.l_f),
                 fmt(eps[arch][p])});
      }
  }

  CheckReport rep;
  for (const auto& arch : archs) {
    bool all_finite = true;
    for (double e : eps[arch])
      if (!std::isfinite(e) || e <= 0.0) all_finite = false;
    rep.require(all_finite, "stability bound not finite/positive for " + arch);
  }
  // Depth monotonicity along each (arch, d, b_w) slice.
  for (const auto& arch : archs) {
    bool monotone = true;
    for (std::size_t di = 0; di < degree_grid.size(); ++di)
      for (std::size_t bi = 0; bi < bw_grid.size(); ++bi)
        for (std::size_t li = 0; li + 1 < depths.size(); ++li) {
          const std::size_t stride = degree_grid.size() * bw_grid.size();
          const std::size_t p0 = li * stride + di * bw_grid.size() + bi;
          const std::size_t p1 = (li + 1) * stride + di * bw_grid.size() + bi;
          if (!(eps[arch][p0] <= eps[arch][p1])) monotone = false;
        }
    rep.require(monotone, "stability bound not depth-monotone for " + arch);
  }
  const std::vector<std::string> chain = canonical_chain(archs);
  if (chain.size() >= 2) {
    std::size_t ordered = 0;
    for (std::size_t p = 0; p < points.size(); ++p) {
      bool ok = true;
      for (std::size_t k = 0; k + 1 < chain.size(); ++k)
        if (!(eps[chain[k]][p] <= eps[chain[k + 1]][p])) ok = false;
      if (ok) ++ordered;
    }
    const double frac =
        static_cast<double>(ordered) / static_cast<double>(points.size());
    const double min_frac = cfg.get_double("ordering_min_fraction", 0.95);
    rep.require(frac >= min_frac,
                "stability-bound architecture ordering holds on only " +
                    fmt(frac) + " of grid points (need " + fmt(min_frac) + ")");
  }
  return rep;
}

CheckReport run_convergence(const Config& cfg, const std::string& out_dir) {
  fs::create_directories(out_dir);
  const auto n = static_cast<std::size_t>(cfg.get_int("n", 8));
  const auto depth = static_cast<std::size_t>(cfg.get_int("depth", 1));
  if (depth != 1)
    throw std::invalid_argument(
        "convergence: the constructed instance supports depth 1 only");
  const double er_prob = cfg.get_double("er_prob", 0.5);
  const int tries = static_cast<int>(cfg.get_int("search_tries", 400));
  const auto base_seed = static_cast<std::uint64_t>(cfg.get_int("seed", 1));
  SeededRng root(base_seed);

  // Search for the best-conditioned (graph, features) pair: maximize
  // sigma_min(P X) / ||X||_F over connected draws.
  struct Instance {
    SparseGraph graph;
    DenseMatrix x;
    DenseMatrix px;
    double score = -1.0;
    int draw = -1;
  } best;
  for (int k = 0; k < tries; ++k) {
    SeededRng gr = root.split(1000 + static_cast<std::uint64_t>(k));
    SparseGraph g = er_graph(n, er_prob, gr);
    if (g.num_components() != 1) continue;
    SeededRng xr = root.split(2000 + static_cast<std::uint64_t>(k));
    DenseMatrix x = gaussian_matrix(n, n, 1.0, xr);
    DenseMatrix px = matmul(build_propagator(g).to_dense(), x);
    const double score = smallest_singular_value(px) / frobenius_norm(x);
    if (score > best.score)
      best = {std::move(g), std::move(x), std::move(px), score, k};
  }
  if (best.draw < 0)
    throw std::runtime_error("convergence: no connected instance drawn");

  // First layer W = theta * (P X)^{-1} (I + delta 11^T): the pre-activation
  // is entrywise positive, the activation is transparent, and the top-layer
  // least singular value is theta (up to round-off).
  const double delta = cfg.get_double("delta_offdiag", 0.01);
  DenseMatrix target(n, n);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j)
      target(i, j) = (i == j ? 1.0 : 0.0) + delta;
  const DenseMatrix w_unit = solve_linear(best.px, target);
  const double w_unit_norm = spectral_norm(w_unit).value;
  const double x_frob = frobenius_norm(best.x);
  const double alpha0_unit =
      smallest_singular_value(relu(matmul(best.px, w_unit)));
  const double c2_coeff = cfg.get_double("c2_safety", 0.99) / (4.0 * x_frob);
  const double loss0 = static_cast<double>(n) / 2.0;

  const auto requirements_at = [&](double theta, double eps_target,
                                   double eta) {
    ConvergenceInputs in;
    in.loss0 = loss0;
    in.eps_target = eps_target;
    in.alpha0 = theta * alpha0_unit;
    in.lambdas = {theta * (w_unit_norm + c2_coeff), theta * c2_coeff};
    in.c = {theta * c2_coeff, theta * c2_coeff};
    in.s = 1.0;
    in.x_frob = x_frob;
    in.eta = eta;
    return convergence_requirements(in);
  };

  // Smallest power-of-two scale passing all three init conditions, padded.
  double theta = 1.0;
  bool scale_found = false;
  for (int k = 0; k < 400; ++k) {
    if (requirements_at(theta, loss0 * 0.5, 0.0).init_conditions_ok) {
      scale_found = true;
      break;
    }
    theta *= 2.0;
  }
  if (!scale_found)
    throw std::runtime_error("convergence: no passing weight scale found");
  theta *= cfg.get_double("theta_slack", 1.25);

  const double eta_max = requirements_at(theta, loss0 * 0.5, 0.0).eta_max;
  const double alpha0 = theta * alpha0_unit;
  const double rate = eta_max * alpha0 * alpha0 / 8.0;
  const auto t_target = static_cast<double>(cfg.get_int("t_target", 1500));
  const double eps_target = loss0 * std::pow(1.0 - rate, t_target);
  const ConvergenceRequirements req =
      requirements_at(theta, eps_target, eta_max);

  // Assemble the model at the constructed starting point and run GD.
  ModelSpec spec;
  spec.arch = Arch::GCN;
  spec.depth = 1;
  spec.input_dim = n;
  spec.hidden_dim = n;
  spec.validate();
  ModelParams start;
  start.weights.push_back(scale(w_unit, theta));
  start.v = DenseMatrix(n, 1);
  std::vector<int> labels(n);
  for (std::size_t i = 0; i < n; ++i) labels[i] = static_cast<int>(i % 2);
  TransductiveSplit parts;
  parts.train_idx.resize(n);
  std::iota(parts.train_idx.begin(), parts.train_idx.end(), 0u);

  TrainConfig tc;
  tc.eta = eta_max;
  tc.epochs = static_cast<std::size_t>(cfg.get_int("epochs", 2000));
  tc.loss = {LossKind::Squared, 1.0};
  tc.seed = base_seed;
  const TrainResult run = train(spec, best.graph, best.x, labels, parts, tc,
                                start);

  // History losses are reported per node; the certificate's envelope lives on
  // the raw 0.5*sum objective, so scale the trace back up by the split size.
  std::vector<double> loss = run.history.train_loss;
  for (double& v : loss) v *= static_cast<double>(n);
  {
    CsvWriter csv(fs::path(out_dir) / "trace.csv", cfg.hash(),
                  "epoch,loss,envelope");
    for (std::size_t t = 0; t < loss.size(); ++t)
      csv.row({fmt(t), fmt(loss[t]),
               fmt(loss0 * std::pow(1.0 - rate, static_cast<double>(t)))});
  }
  Sidecar side;
  side.add_int("n", static_cast<std::int64_t>(n));
  side.add_int("search_draw", best.draw);
  side.add_number("instance_score", best.score);
  side.add_number("theta", theta);
  side.add_number("alpha0", alpha0);
  side.add_number("x_frob", x_frob);
  side.add_number("lambda1", theta * (w_unit_norm + c2_coeff));
  side.add_number("lambda2", theta * c2_coeff);
  side.add_number("loss0", loss0);
  side.add_number("eps_target", eps_target);
  side.add_number("eta", eta_max);
  side.add_number("envelope_rate", rate);
  side.add_int("t_min", static_cast<std::int64_t>(req.t_min));
  side.add_number("cond1_lhs", req.cond1_lhs);
  side.add_number("cond1_rhs", req.cond1_rhs);
  side.add_number("cond2_lhs", req.cond2_lhs);
  side.add_number("cond2_rhs", req.cond2_rhs);
  side.add_number("cond3_lhs", req.cond3_lhs);
  side.add_number("cond3_rhs", req.cond3_rhs);
  side.add_string("init_conditions",
                  req.init_conditions_ok ? "satisfied" : "violated");
  side.write(fs::path(out_dir) / "instance.json");

  CheckReport rep;
  rep.require(req.init_conditions_ok, "initialization conditions violated");
  bool under_envelope = true;
  std::size_t first_violation = 0;
  for (std::size_t t = 0; t < loss.size(); ++t) {
    const double env = loss0 * std::pow(1.0 - rate, static_cast<double>(t));
    if (loss[t] > env * (1.0 + 1e-9) + 1e-12) {
      under_envelope = false;
      first_violation = t;
      break;
    }
  }
  rep.require(under_envelope, "loss crossed the geometric envelope at epoch " +
                                  fmt(first_violation));
  rep.require(req.t_min < loss.size(),
              "certified step count " + fmt(req.t_min) +
                  " exceeds the trained horizon " + fmt(loss.size()));
  if (req.t_min < loss.size())
    rep.require(loss[req.t_min] <= eps_target,
                "loss after " + fmt(req.t_min) + " steps is " +
                    fmt(loss[req.t_min]) + ", above the target " +
                    fmt(eps_target));
  return rep;
}

CheckReport run_augment(const Config& cfg, const std::string& out_dir) {
  fs::create_directories(out_dir);
  const auto num_seeds = static_cast<std::size_t>(cfg.get_int("seeds", 10));
  const auto base_seed = static_cast<std::uint64_t>(cfg.get_int("seed", 1));
  const auto depth = static_cast<std::size_t>(cfg.get_int("depth", 2));
  const auto archs = cfg.get_list("archs", {"gcn"});
  const std::vector<double> rates =
      cfg.get_double_list("rates", {0.0, 0.25, 0.5});
  const std::vector<double> scales =
      cfg.get_double_list("pairnorm_scales", {1.0});
  const auto workers = static_cast<std::size_t>(cfg.get_int("workers", 0));

  struct Row {
    GapRun run;
    std::string setting;
    double param = 0.0;
  };
  // One entry per (seed, arch) task so parallel workers never share a slot
  // and the CSV row order is independent of thread scheduling.
  struct CellOutcome {
    std::vector<Row> rows;
    bool zero_rate_matches = true;
    bool zero_rate_seen = false;
    std::map<std::string, double> gap_by_setting;  // keyed setting@param
  };
  std::vector<CellOutcome> outcomes(num_seeds * archs.size());

  parallel_for(num_seeds * archs.size(), workers, [&](std::size_t task) {
    const std::size_t i = task / archs.size();
    const std::string arch = archs[task % archs.size()];
    const std::uint64_t instance_seed = base_seed + i;
    const DatasetBundle ds = make_dataset(cfg, instance_seed);
    CellOutcome& out = outcomes[task];

    const CellResult baseline = run_cell(cfg, ds, arch, depth, instance_seed);
    out.rows.push_back({baseline.run, "baseline", 0.0});
    out.gap_by_setting[arch + ":baseline"] = baseline.run.gap_loss;

    for (double r : rates) {
      AugmentConfig aug;
      aug.kind = AugmentConfig::Kind::DropEdge;
      aug.rate = r;
      const CellResult c = run_cell(cfg, ds, arch, depth, instance_seed, aug);
      out.rows.push_back({c.run, "dropedge", r});
      out.gap_by_setting[arch + ":dropedge@" + fmt(r)] = c.run.gap_loss;
      if (r == 0.0) {
        out.zero_rate_seen = true;
        out.zero_rate_matches =
            histories_identical(baseline.history, c.history);
      }
    }
    for (double s : scales) {
      AugmentConfig aug;
      aug.kind = AugmentConfig::Kind::PairNorm;
      aug.scale = s;
      const CellResult c = run_cell(cfg, ds, arch, depth, instance_seed, aug);
      out.rows.push_back({c.run, "pairnorm", s});
    }
  });

  {
    CsvWriter csv(fs::path(out_dir) / "augment.csv", cfg.hash(),
                  "seed,arch,depth,setting,param,early_epoch,train_loss,"
                  "val_loss,train_acc,val_acc,test_acc,gap_loss,gap_acc");
    for (const auto& out : outcomes)
      for (const Row& r : out.rows)
        csv.row({fmt(r.run.seed), r.run.arch, fmt(r.run.depth), r.setting,
                 fmt(r.param), fmt(r.run.early_epoch), fmt(r.run.train_loss),
                 fmt(r.run.val_loss), fmt(r.run.train_acc), fmt(r.run.val_acc),
                 fmt(r.run.test_acc), fmt(r.run.gap_loss), fmt(r.run.gap_acc)});
  }

  CheckReport rep;
  for (std::size_t task = 0; task < outcomes.size(); ++task)
    if (outcomes[task].zero_rate_seen)
      rep.require(outcomes[task].zero_rate_matches,
                  "zero-rate edge-drop run diverged from baseline at seed " +
                      fmt(base_seed + task / archs.size()));
  if (!rates.empty()) {
    const double top = *std::max_element(rates.begin(), rates.end());
    for (const auto& arch : archs) {
      std::size_t improved = 0, total = 0;
      for (const auto& out : outcomes) {
        const auto b = out.gap_by_setting.find(arch + ":baseline");
        const auto d = out.gap_by_setting.find(arch + ":dropedge@" + fmt(top));
        if (b == out.gap_by_setting.end() || d == out.gap_by_setting.end())
          continue;
        ++total;
        if (d->second <= b->second + 1e-12) ++improved;
      }
      const double frac =
          total == 0 ? 0.0
                     : static_cast<double>(improved) / static_cast<double>(total);
      const double need = cfg.get_double("improve_fraction", 0.6);
      rep.require(frac >= need,
                  "edge-drop rate " + fmt(top) + " reduced the " + arch +
                      " gap on only " + fmt(frac) + " of seeds (need " +
                      fmt(need) + ")");
    }
  }
  return rep;
}

CheckReport run_richness(const Config& cfg, const std::string& out_dir) {
  fs::create_directories(out_dir);
  std::vector<std::uint64_t> d_grid, l_grid;
  for (double d : cfg.get_double_list("branching_list", {2, 3, 4}))
    d_grid.push_back(static_cast<std::uint64_t>(d));
  for (double l : cfg.get_double_list("depth_list", {1, 2, 3}))
    l_grid.push_back(static_cast<std::uint64_t>(l));

  CheckReport rep;
  CsvWriter csv(fs::path(out_dir) / "richness.csv", cfg.hash(),
                "d,L,count,lower_bound,enumerated");
  for (std::uint64_t d : d_grid)
    for (std::uint64_t l : l_grid) {
      const std::uint64_t count = count_computation_trees(d, l);
      const std::uint64_t lb = richness_lower_bound(d, l);
      std::string enumerated;
      try {
        const std::uint64_t e = enumerate_computation_trees(d, l);
        enumerated = fmt(e);
        rep.require(e == count, "closed-form count " + fmt(count) +
                                    " disagrees with enumeration " + fmt(e) +
                                    " at d=" + fmt(d) + " L=" + fmt(l));
      } catch (const std::runtime_error&) {
        // enumeration infeasible at this size; the recurrence stands alone
      }
      rep.require(count >= lb, "count " + fmt(count) +
                                   " below the lower bound " + fmt(lb) +
                                   " at d=" + fmt(d) + " L=" + fmt(l));
      csv.row({fmt(d), fmt(l), fmt(count), fmt(lb), enumerated});
    }
  return rep;
}

}  // namespace gclab::lab
