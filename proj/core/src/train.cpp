#include "gclab/train.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>

#include "gclab/io.hpp"

namespace gclab {

TrainResult train(const ModelSpec& spec, const SparseGraph& g,
                  const DenseMatrix& x, const std::vector<int>& labels,
                  const TransductiveSplit& split, const TrainConfig& cfg,
                  const std::optional<ModelParams>& warm_start) {
  spec.validate();
  if (split.train_idx.empty()) {
    throw std::invalid_argument("train: empty training split");
  }
  if (labels.size() != g.num_nodes() || x.rows() != g.num_nodes()) {
    throw std::invalid_argument("train: labels/features do not match graph");
  }
  const bool dropedge = cfg.augment.kind == AugmentConfig::Kind::DropEdge &&
                        cfg.augment.rate > 0.0;
  PairNormConfig pn;
  if (cfg.augment.kind == AugmentConfig::Kind::PairNorm) {
    pn.enabled = true;
    pn.scale = cfg.augment.scale;
  }
  const double eta_mix = cfg.eta_mix < 0.0 ? cfg.eta : cfg.eta_mix;

  SeededRng root(cfg.seed);
  SeededRng init_rng = root.split(1);
  const SeededRng dropedge_root = root.split(2);

  ModelParams params =
      warm_start ? *warm_start : init_params(spec, init_rng);
  const Propagator p_full = build_propagator(g);

  TrainResult result;
  TrainHistory& hist = result.history;
  for (std::size_t epoch = 0; epoch < cfg.epochs; ++epoch) {
    if (!params_finite(params)) {
      throw std::runtime_error("train: non-finite parameters at epoch " +
                               std::to_string(epoch));
    }

    // Metrics for epoch e are always evaluated on the full propagator.
    const ForwardTrace eval_trace = forward(spec, params, p_full, x, pn);
    const SplitEval tr =
        evaluate_split(eval_trace.output, params.v, labels, split.train_idx, cfg.loss);
    const SplitEval va =
        evaluate_split(eval_trace.output, params.v, labels, split.val_idx, cfg.loss);
    const SplitEval te =
        evaluate_split(eval_trace.output, params.v, labels, split.test_idx, cfg.loss);

    // The gradient may come from a resampled propagator (DropEdge).
    Gradients grads;
    if (dropedge) {
      const SparseGraph g_epoch =
          drop_edges(g, cfg.augment.rate, dropedge_root.split(epoch).seed());
      const Propagator p_epoch = build_propagator(g_epoch);
      grads = compute_gradients(spec, params, p_epoch, x, labels,
                                split.train_idx, cfg.loss, pn)
                  .grads;
    } else {
      LossGradient lg = loss_gradient(eval_trace.output, params.v, labels,
                                      split.train_idx, cfg.loss);
      grads = backward(spec, params, eval_trace, p_full, x, lg.d_output);
      grads.v = std::move(lg.d_v);
    }

    hist.train_loss.push_back(tr.loss);
    hist.val_loss.push_back(va.loss);
    hist.test_loss.push_back(te.loss);
    hist.train_acc.push_back(tr.accuracy);
    hist.val_acc.push_back(va.accuracy);
    hist.test_acc.push_back(te.accuracy);
    const double gn = gradient_total_norm(grads);
    if (!std::isfinite(gn)) {
      throw std::runtime_error("train: non-finite gradient at epoch " +
                               std::to_string(epoch));
    }
    hist.grad_norm.push_back(gn);
    std::vector<double> wn;
    wn.reserve(params.weights.size());
    double max_sv = 0.0;
    for (const auto& w : params.weights) {
      const double sv = spectral_norm(w).value;
      wn.push_back(sv);
      max_sv = std::max(max_sv, sv);
    }
    hist.max_sv.push_back(max_sv);
    hist.weight_norms.push_back(std::move(wn));

    gd_step(params, grads, cfg.eta, eta_mix);
  }
  if (!params_finite(params)) {
    throw std::runtime_error("train: non-finite parameters after final step");
  }
  result.params = std::move(params);
  return result;
}

std::size_t best_train_epoch(const TrainHistory& h) {
  if (h.epochs() == 0) throw std::invalid_argument("best_train_epoch: empty history");
  std::size_t best = 0;
  for (std::size_t e = 1; e < h.epochs(); ++e) {
    if (h.train_acc[e] > h.train_acc[best]) best = e;  // strict: earliest tie wins
  }
  return best;
}

void write_history_csv(const TrainHistory& h, const std::filesystem::path& path,
                       std::uint64_t config_hash) {
  CsvWriter csv(path, config_hash,
                {"epoch", "split", "loss", "accuracy", "grad_norm", "max_sv"});
  for (std::size_t e = 0; e < h.epochs(); ++e) {
    const std::string epoch = std::to_string(e);
    const std::string gn = format_full(h.grad_norm[e]);
    const std::string sv = format_full(h.max_sv[e]);
    csv.row({epoch, "train", format_full(h.train_loss[e]),
             format_full(h.train_acc[e]), gn, sv});
    csv.row({epoch, "val", format_full(h.val_loss[e]),
             format_full(h.val_acc[e]), gn, sv});
    csv.row({epoch, "test", format_full(h.test_loss[e]),
             format_full(h.test_acc[e]), gn, sv});
  }
}

}  // namespace gclab
