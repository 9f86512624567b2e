#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <vector>

#include "gclab/csbm.hpp"
#include "gclab/model.hpp"

namespace gclab {

struct AugmentConfig {
  enum class Kind { None, DropEdge, PairNorm };
  Kind kind = Kind::None;
  double rate = 0.0;   // DropEdge: probability each plain edge is removed
  double scale = 1.0;  // PairNorm: target root-mean-square row norm
};

struct TrainConfig {
  double eta = 0.01;
  std::size_t epochs = 100;
  LossConfig loss;
  AugmentConfig augment;
  std::uint64_t seed = 1;  // drives init and the per-epoch DropEdge stream
  // Step size for the DGCN mixing logits; negative means "use eta".
  double eta_mix = -1.0;
};

// Per-epoch record, epoch e holding the state *before* step e is applied:
// losses/accuracies of params_e on the full graph, the gradient norm used by
// step e, and max spectral norm over the weight matrices of params_e.
struct TrainHistory {
  std::vector<double> train_loss, val_loss, test_loss;
  std::vector<double> train_acc, val_acc, test_acc;
  std::vector<double> grad_norm;
  std::vector<double> max_sv;
  // Per-epoch spectral norm of every weight matrix (in-memory only; the CSV
  // keeps just the max).
  std::vector<std::vector<double>> weight_norms;

  std::size_t epochs() const { return train_loss.size(); }
};

struct TrainResult {
  ModelParams params;  // after the final step
  TrainHistory history;
};

// Full-batch gradient descent.  Deterministic: a fixed (spec, data, config)
// triple reproduces the history bit-for-bit.  With DropEdge the gradient is
// computed on a freshly resampled propagator each epoch (self-loops never
// drop) while the recorded metrics always use the full graph.  Aborts with
// std::runtime_error naming the epoch if parameters or gradients stop being
// finite.  `warm_start` bypasses seeded init when provided.
TrainResult train(const ModelSpec& spec, const SparseGraph& g,
                  const DenseMatrix& x, const std::vector<int>& labels,
                  const TransductiveSplit& split, const TrainConfig& cfg,
                  const std::optional<ModelParams>& warm_start = std::nullopt);

// Epoch index with the highest training accuracy (earliest on ties).
std::size_t best_train_epoch(const TrainHistory& h);

// Long-format CSV: epoch,split,loss,accuracy,grad_norm,max_sv with one row
// per (epoch, split); grad_norm/max_sv repeat across an epoch's rows.
void write_history_csv(const TrainHistory& h, const std::filesystem::path& path,
                       std::uint64_t config_hash);

}  // namespace gclab
