#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "gclab/graph.hpp"
#include "gclab/matrix.hpp"
#include "gclab/rng.hpp"

namespace gclab {

// Architectures.  P is the symmetric degree-normalized propagator, sigma the
// ReLU, X the n x p feature matrix, L the depth.
//
//   GCN     H^l = sigma(P H^{l-1} W^l [+ 1 b^l]),          H^0 = X
//   ResGCN  H^l = sigma(P H^{l-1} W^l) + H^{l-1},          H^0 = X W^0
//   APPNP   H^l = a P H^{l-1} + (1-a) H^0,                 H^0 = X W
//   GCNII   H^l = sigma((a P H^{l-1} + (1-a) H^0)
//                       (b_l W^l + (1-b_l) I)),            H^0 = X W^0
//   SGC     H^l = P H^{l-1},                               H^0 = X W
//   DGCN    Z   = sum_l a_l P^l X (b_l W^l + (1-b_l) I),   a = softmax, b = sigmoid
//
// Readout for every architecture: score_i = v^T h_i on the final
// representation; binary prediction via the logistic function.
enum class Arch { GCN, ResGCN, APPNP, GCNII, DGCN, SGC };

std::string arch_name(Arch a);
Arch arch_from_name(const std::string& name);

struct ModelSpec {
  Arch arch = Arch::GCN;
  std::size_t depth = 2;        // L, number of propagation layers (>= 1)
  std::size_t input_dim = 0;    // feature dimension p
  std::size_t hidden_dim = 16;  // width of every hidden layer (DGCN: unused)
  bool use_bias = false;        // GCN only: adds a learned per-layer row bias
  double alpha = 0.9;           // APPNP/GCNII initial-representation mixing
  double beta = 0.1;            // GCNII identity-mixing weight (constant mode)
  bool beta_schedule = false;   // GCNII: beta_l = log(1 + 0.5 / l) instead

  std::size_t output_dim() const {
    return arch == Arch::DGCN ? input_dim : hidden_dim;
  }
  double beta_at(std::size_t layer) const;  // layer is 1-based
  void validate() const;                    // throws std::invalid_argument
};

struct ModelParams {
  // GCN: W^1..W^L.  ResGCN/GCNII: W^0 (input projection) then W^1..W^L.
  // APPNP/SGC: the single W.  DGCN: W^1..W^L (square, input_dim-sized).
  std::vector<DenseMatrix> weights;
  std::vector<DenseMatrix> biases;  // GCN use_bias: L row vectors (1 x hidden)
  DenseMatrix v;                    // output_dim x 1 readout direction
  std::vector<double> mix_a_logits;  // DGCN: softmax -> a_l (sum 1)
  std::vector<double> mix_b_logits;  // DGCN: sigmoid -> b_l in (0, 1)
};

struct Gradients {
  std::vector<DenseMatrix> weights;
  std::vector<DenseMatrix> biases;
  DenseMatrix v;
  std::vector<double> mix_a_logits;
  std::vector<double> mix_b_logits;
};

// Gaussian init with per-matrix std sqrt(1 / fan_in); biases start at zero,
// DGCN mixing logits start at zero (uniform a, b = 1/2), v ~ sqrt(1 / dim).
// Draw order is fixed: weights in index order, then v.
ModelParams init_params(const ModelSpec& spec, SeededRng& rng);

std::vector<double> softmax(const std::vector<double>& logits);

// Row-wise centering and scaling: PN(H) = scale * (H - mean row) / sigma with
// sigma^2 the mean squared row norm after centering.  Throws
// std::domain_error when sigma < 1e-12 (degenerate input).
DenseMatrix pairnorm(const DenseMatrix& h, double scale);
// d(loss)/d(input) of pairnorm given d(loss)/d(output); h_in is the
// pre-normalization input that forward saw.
DenseMatrix pairnorm_backward(const DenseMatrix& h_in, double scale,
                              const DenseMatrix& d_out);

struct PairNormConfig {
  bool enabled = false;
  double scale = 1.0;
};

// Everything backward needs, plus the per-layer representation sequence
// h[0..L] that the smoothing metrics consume.
struct ForwardTrace {
  std::vector<DenseMatrix> h;         // h[0] = input repr, h[L] = final
  std::vector<DenseMatrix> z;         // pre-activations, layer l at z[l-1]
  std::vector<DenseMatrix> prop;      // GCN/ResGCN: P h^{l-1} at prop[l-1]
  std::vector<DenseMatrix> mixed;     // GCNII: a P h^{l-1} + (1-a) h^0
  std::vector<DenseMatrix> pre_norm;  // pairnorm inputs when enabled
  std::vector<DenseMatrix> branch;    // DGCN: per-power branch outputs H_l
  DenseMatrix output;                 // n x output_dim final representation
  bool pairnorm = false;
  double pairnorm_scale = 1.0;
};

// Exact forward pass.  Pairnorm is applied after each layer's activation
// (after the skip for ResGCN, after each propagation step for APPNP);
// SGC/DGCN reject pairnorm with std::invalid_argument.
ForwardTrace forward(const ModelSpec& spec, const ModelParams& params,
                     const Propagator& p, const DenseMatrix& x,
                     const PairNormConfig& pn = {});

// Exact reverse-mode gradients of sum_ij d_output_ij * output_ij w.r.t. all
// parameters except v (v's gradient lives in the loss layer).  `trace` must
// come from forward() with the same spec/params/p/x.
Gradients backward(const ModelSpec& spec, const ModelParams& params,
                   const ForwardTrace& trace, const Propagator& p,
                   const DenseMatrix& x, const DenseMatrix& d_output);

// ---- Losses -------------------------------------------------------------

// Ramp function: 1 for x <= 0, 1 - x/gamma on [0, gamma], 0 beyond gamma.
double phi_margin(double x, double gamma);
// Fixed subgradient: -1/gamma on [0, gamma), 0 elsewhere (left-closed so a
// freshly-zeroed classifier still receives gradient).
double phi_margin_slope(double x, double gamma);
// Signed confidence of logistic output z for label y in {0, 1}:
// p = 2z - 1 for y = 1 and 1 - 2z for y = 0; p > 0 iff correct.
double p_margin(double z, int y);
// phi_margin(p_margin(sigmoid(score), y), gamma): 0 when confidently right.
double margin_loss(double score, int y, double gamma);
// Squared loss 0.5 * ||a - b||_F^2 (raw, unscaled).
double squared_loss(const DenseMatrix& a, const DenseMatrix& b);

enum class LossKind { Margin, Squared };

struct LossConfig {
  LossKind kind = LossKind::Margin;
  double gamma = 1.0;
};

struct SplitEval {
  double loss = 0.0;      // margin: mean over the split; squared: raw 0.5*sum
  double accuracy = 0.0;  // margin: p > 0; squared: sign(score) == +/-1 label
};

// Evaluate scores v^T h_i over the listed rows.  Empty index list -> NaNs.
SplitEval evaluate_split(const DenseMatrix& output, const DenseMatrix& v,
                         const std::vector<int>& labels,
                         const std::vector<std::uint32_t>& idx,
                         const LossConfig& loss);

struct LossGradient {
  double loss = 0.0;
  double accuracy = 0.0;
  DenseMatrix d_output;  // n x output_dim, nonzero only on the split's rows
  DenseMatrix d_v;       // output_dim x 1
};

LossGradient loss_gradient(const DenseMatrix& output, const DenseMatrix& v,
                           const std::vector<int>& labels,
                           const std::vector<std::uint32_t>& idx,
                           const LossConfig& loss);

// ---- Whole-model convenience ---------------------------------------------

struct ModelGradients {
  double loss = 0.0;
  double accuracy = 0.0;
  Gradients grads;  // includes v
};

// forward + loss_gradient + backward in one call (the unit the optimizer and
// the finite-difference harness both consume).
ModelGradients compute_gradients(const ModelSpec& spec,
                                 const ModelParams& params, const Propagator& p,
                                 const DenseMatrix& x,
                                 const std::vector<int>& labels,
                                 const std::vector<std::uint32_t>& idx,
                                 const LossConfig& loss,
                                 const PairNormConfig& pn = {});

// params -= eta * grads (eta_mix for the DGCN mixing logits; pass eta there
// for the default coupling).
void gd_step(ModelParams& params, const Gradients& grads, double eta,
             double eta_mix);

double gradient_total_norm(const Gradients& grads);
double max_weight_spectral_norm(const ModelParams& params);
bool params_finite(const ModelParams& params);

}  // namespace gclab
