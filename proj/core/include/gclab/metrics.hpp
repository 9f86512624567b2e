#pragma once

#include <cstdint>
#include <vector>

#include "gclab/graph.hpp"
#include "gclab/matrix.hpp"
#include "gclab/train.hpp"

namespace gclab {

// Distance from the column space spanned by the orthonormal basis e:
// ||h - e e^T h||_F.  With e = degree_profile_basis(g) this measures how far
// a representation is from the collapse subspace that repeated propagation
// converges to.  e must have orthonormal columns and match h's row count.
double subspace_distance(const DenseMatrix& h, const DenseMatrix& e);

// Degree-normalized Dirichlet energy
//   0.5 * sum_{i != j} P_ij || h_i/sqrt(deg i) - h_j/sqrt(deg j) ||^2
// over the propagator's plain (non-loop) entries; 0 exactly on
// degree-profile-aligned inputs.
double dirichlet_energy(const DenseMatrix& h, const SparseGraph& g);

// Unnormalized variant: sum over plain undirected edges (each counted once)
// of || h_i - h_j ||^2.  Exactly invariant to adding one shared row bias.
double dirichlet_energy_unnormalized(const DenseMatrix& h, const SparseGraph& g);

struct ClassDistances {
  double intra = 0.0;
  double inter = 0.0;
};

// Mean squared pair distances within / across classes over ordered pairs
// (diagonal pairs included in the within-class count), normalized by
// ||h||_F.  Throws std::invalid_argument when fewer than two classes are
// present or a class has fewer than two members, std::domain_error when
// ||h||_F = 0.
ClassDistances intra_inter_distance(const DenseMatrix& h,
                                    const std::vector<int>& labels);

// Architectures covered by the per-layer collapse-rate table (the plain
// model list plus the biased GCN variant).
enum class ContractionArch { GCN, GCNBias, SGC, ResGCN, APPNP, GCNII };

struct ContractionRate {
  double gamma = 0.0;  // per-layer multiplicative rate on d_M
  double eps = 0.0;    // additive offset (limit radius where the table says so)
};

// Closed-form (gamma, eps) per architecture:
//   gcn      (lambda * s, 0)
//   gcn+bias (lambda * s, d_m_ref)                      [d_m_ref = d_M(B)]
//   sgc      (lambda, 0)
//   resgcn   (1 + lambda * s, 0)
//   appnp    (alpha * lambda, (1-alpha) d_m_ref / (1-gamma))
//   gcnii    (alpha * lambda * (1-(1-beta)(1-s)),
//             (1-alpha) d_m_ref / (1-gamma))            [d_m_ref = d_M(H^0)]
// where s is the relevant weight spectral norm and lambda the propagator's
// second eigenvalue magnitude.  Throws std::domain_error when a division by
// 1 - gamma is required and gamma == 1 with a nonzero numerator.
ContractionRate contraction_rate(ContractionArch arch, double lambda, double s,
                                 double alpha, double beta, double d_m_ref);

// val_loss - train_loss per epoch.
std::vector<double> generalization_gap(const TrainHistory& h);

// Smallest nonzero eigenvalue of the combinatorial Laplacian D - A (the
// self-loop convention cancels out of D - A).  Dense eigensolve; intended
// for small graphs.  Exactly num_components eigenvalues are treated as the
// zero modes.  Throws std::invalid_argument on an empty graph or when the
// complement is empty (every component a singleton).
double lambda_min_nonzero_laplacian(const SparseGraph& g);

struct LayerMetricsRow {
  std::size_t layer = 0;
  double d_m = 0.0;
  double dirichlet = 0.0;
  double intra = 0.0;
  double inter = 0.0;
};

// The four collapse diagnostics for every representation h[0..L] of a trace.
// intra/inter are NaN where their preconditions fail (e.g. an all-zero
// layer).
std::vector<LayerMetricsRow> layer_metrics(const ForwardTrace& trace,
                                           const SparseGraph& g,
                                           const std::vector<int>& labels);

}  // namespace gclab
