#pragma once

#include <string>
#include <vector>

#include "gclab/io.hpp"

namespace gclab::lab {

// Every experiment takes a key=value Config plus an output directory, writes
// CSV files (each stamped with the config hash) into that directory and
// nothing anywhere else, and returns a CheckReport.  When cfg "check" is
// truthy the CLI turns a failed report into exit code 2.
struct CheckReport {
  bool checked = false;  // whether any acceptance property was evaluated
  bool ok = true;
  std::vector<std::string> failures;  // human-readable property violations

  void require(bool condition, const std::string& what) {
    checked = true;
    if (!condition) {
      ok = false;
      failures.push_back(what);
    }
  }
};

// One trained run of the generalization-gap protocol: the early-stop epoch is
// the earliest epoch with maximal training accuracy, and the gap is
// validation minus training loss at that epoch.
struct GapRun {
  int seed = 0;
  std::string arch;
  int depth = 0;
  int early_epoch = 0;
  double train_loss = 0, val_loss = 0, test_loss = 0;
  double train_acc = 0, val_acc = 0, test_acc = 0;
  double gap_loss = 0, gap_acc = 0;
};

// Trains every (seed, arch) cell at a single depth on fresh synthetic data
// drawn from the equal-information curve, with identical step size and epoch
// budget across architectures.  Writes runs.csv, summary.csv, ordering.csv.
// Checked properties: per-arch median gaps follow the canonical order
// appnp <= gcnii <= gcn <= resgcn (restricted to the archs present) and each
// adjacent pair wins the per-seed sign test at cfg "ordering_threshold".
CheckReport run_synth_gap(const Config& cfg, const std::string& out_dir);

// Same protocol across a depth grid; writes runs.csv and summary.csv keyed by
// (arch, depth).  No checked properties (reporting experiment).
CheckReport run_depth_sweep(const Config& cfg, const std::string& out_dir);

// Per-layer representation metrics (distance to the degree-profile subspace,
// Dirichlet energy, intra/inter class distances, weight spectral norm) for
// untrained and trained models across a depth grid.  Writes
// layer_metrics.csv.  Checked property: for the untrained linear cascade
// ("sgc") the subspace distance is non-increasing layer over layer.
CheckReport run_smoothing(const Config& cfg, const std::string& out_dir);

// Closed-form stability constants and the uniform-stability epsilon over an
// (arch, depth, degree, weight-bound) grid.  Writes bounds.csv.  Checked
// properties: every epsilon is finite and positive, epsilon grows with depth
// along each (arch, d, b_w) slice, and at every grid point the architecture
// ordering appnp <= gcnii <= gcn <= resgcn holds for epsilon.
CheckReport run_bounds_table(const Config& cfg, const std::string& out_dir);

// Constructs a deep-linear-rate instance (random graph, gaussian features,
// explicitly conditioned first layer), verifies the initialization
// conditions, runs gradient descent at the certified step size, and writes
// trace.csv (epoch, loss, envelope) plus instance.json.  Checked properties:
// all three initialization conditions hold, the loss stays under the
// geometric envelope at every recorded epoch, and the loss at the computed
// step bound t_min has reached eps_target.
CheckReport run_convergence(const Config& cfg, const std::string& out_dir);

// Generalization gap with graph augmentation: edge dropping at a rate grid
// and feature renormalization.  Writes augment.csv.  Checked properties:
// the rate-0 edge-drop run matches the unaugmented baseline exactly, and
// edge dropping at the largest rate does not increase the gap on at least
// cfg "improve_fraction" of seeds.
CheckReport run_augment(const Config& cfg, const std::string& out_dir);

// Computation-tree richness counts over a (degree, depth) grid: closed-form
// recurrence, exhaustive enumeration where feasible, and the exponential
// lower bound.  Writes richness.csv.  Checked properties: count matches
// enumeration wherever enumeration ran, and count >= lower bound everywhere.
CheckReport run_richness(const Config& cfg, const std::string& out_dir);

}  // namespace gclab::lab
