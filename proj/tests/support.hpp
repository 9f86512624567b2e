#pragma once

// Shared helpers for the unit tests and the acceptance gate: small random
// instances and a central-finite-difference gradient checker with kink
// filtering (instances whose pre-activations or margins sit on a
// non-differentiable point are rejected, so the comparison is made where the
// analytic derivative is the true derivative).

#include <cmath>
#include <cstdint>
#include <utility>
#include <vector>

#include "gclab/graph.hpp"
#include "gclab/matrix.hpp"
#include "gclab/model.hpp"
#include "gclab/rng.hpp"

namespace testsupport {

inline gclab::SparseGraph er_graph(std::size_t n, double prob,
                                   gclab::SeededRng& rng) {
  std::vector<std::pair<std::uint32_t, std::uint32_t>> edges;
  for (std::uint32_t i = 0; i < n; ++i)
    for (std::uint32_t j = i + 1; j < n; ++j)
      if (rng.next_unit() < prob) edges.emplace_back(i, j);
  return gclab::SparseGraph(n, std::move(edges));
}

inline gclab::SparseGraph connected_er_graph(std::size_t n, double prob,
                                             gclab::SeededRng& rng,
                                             int max_tries = 200) {
  for (int t = 0; t < max_tries; ++t) {
    gclab::SparseGraph g = er_graph(n, prob, rng);
    if (g.num_components() == 1) return g;
  }
  throw std::runtime_error("connected_er_graph: no connected draw");
}

// Balanced 0/1 labels in a seeded random order.
inline std::vector<int> balanced_labels(std::size_t n, gclab::SeededRng& rng) {
  std::vector<int> labels(n);
  for (std::size_t i = 0; i < n; ++i) labels[i] = static_cast<int>(i % 2);
  const std::vector<std::uint32_t> perm = rng.permutation(n);
  std::vector<int> out(n);
  for (std::size_t i = 0; i < n; ++i) out[i] = labels[perm[i]];
  return out;
}

inline std::vector<double*> param_ptrs(gclab::ModelParams& p) {
  std::vector<double*> out;
  for (auto& w : p.weights)
    for (std::size_t i = 0; i < w.size(); ++i) out.push_back(&w.data()[i]);
  for (auto& b : p.biases)
    for (std::size_t i = 0; i < b.size(); ++i) out.push_back(&b.data()[i]);
  for (std::size_t i = 0; i < p.v.size(); ++i) out.push_back(&p.v.data()[i]);
  for (auto& a : p.mix_a_logits) out.push_back(&a);
  for (auto& b : p.mix_b_logits) out.push_back(&b);
  return out;
}

inline std::vector<double> grad_values(const gclab::Gradients& g) {
  std::vector<double> out;
  for (const auto& w : g.weights)
    for (std::size_t i = 0; i < w.size(); ++i) out.push_back(w.data()[i]);
  for (const auto& b : g.biases)
    for (std::size_t i = 0; i < b.size(); ++i) out.push_back(b.data()[i]);
  for (std::size_t i = 0; i < g.v.size(); ++i) out.push_back(g.v.data()[i]);
  for (double a : g.mix_a_logits) out.push_back(a);
  for (double b : g.mix_b_logits) out.push_back(b);
  return out;
}

// True when no pre-activation, margin, or ramp knee sits within `guard` of a
// non-differentiable point for this instance.
inline bool instance_clean(const gclab::ModelSpec& spec,
                           const gclab::ModelParams& params,
                           const gclab::Propagator& prop,
                           const gclab::DenseMatrix& x,
                           const std::vector<int>& labels,
                           const std::vector<std::uint32_t>& idx,
                           const gclab::LossConfig& loss,
                           double guard = 1e-3) {
  const gclab::ForwardTrace trace = gclab::forward(spec, params, prop, x);
  const bool has_relu = spec.arch == gclab::Arch::GCN ||
                        spec.arch == gclab::Arch::ResGCN ||
                        spec.arch == gclab::Arch::GCNII;
  if (has_relu)
    for (const auto& z : trace.z)
      for (std::size_t i = 0; i < z.size(); ++i)
        if (std::fabs(z.data()[i]) < guard) return false;
  if (loss.kind == gclab::LossKind::Margin) {
    for (std::uint32_t r : idx) {
      double score = 0.0;
      for (std::size_t j = 0; j < trace.output.cols(); ++j)
        score += trace.output(r, j) * params.v(j, 0);
      const double z = gclab::sigmoid(score);
      const double p = gclab::p_margin(z, labels[r]);
      if (std::fabs(p) < guard) return false;
      if (std::fabs(p - loss.gamma) < guard) return false;
    }
  }
  return true;
}

struct FdResult {
  double max_rel_err = 0.0;
  std::size_t coords = 0;
};

// Central finite differences on the total loss against the analytic
// gradient; relative error uses a floor so near-zero coordinates compare
// absolutely.
inline FdResult fd_max_rel_error(const gclab::ModelSpec& spec,
                                 gclab::ModelParams params,
                                 const gclab::Propagator& prop,
                                 const gclab::DenseMatrix& x,
                                 const std::vector<int>& labels,
                                 const std::vector<std::uint32_t>& idx,
                                 const gclab::LossConfig& loss,
                                 double h = 1e-5) {
  const gclab::ModelGradients analytic =
      gclab::compute_gradients(spec, params, prop, x, labels, idx, loss);
  const std::vector<double> grad = grad_values(analytic.grads);
  std::vector<double*> ptrs = param_ptrs(params);
  FdResult res;
  res.coords = ptrs.size();
  for (std::size_t k = 0; k < ptrs.size(); ++k) {
    const double saved = *ptrs[k];
    *ptrs[k] = saved + h;
    const double up =
        gclab::compute_gradients(spec, params, prop, x, labels, idx, loss).loss;
    *ptrs[k] = saved - h;
    const double dn =
        gclab::compute_gradients(spec, params, prop, x, labels, idx, loss).loss;
    *ptrs[k] = saved;
    const double fd = (up - dn) / (2.0 * h);
    const double denom =
        std::max({std::fabs(fd), std::fabs(grad[k]), 1e-4});
    const double rel = std::fabs(fd - grad[k]) / denom;
    if (rel > res.max_rel_err) res.max_rel_err = rel;
  }
  return res;
}

}  // namespace testsupport
