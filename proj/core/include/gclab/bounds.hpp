#pragma once

#include <cstdint>
#include <vector>

#include "gclab/model.hpp"

namespace gclab {

// Shared inputs for the closed-form stability and risk calculators.
// d is the degree bound of the self-looped graph, l the depth, b_x the
// feature row-norm bound, b_w the per-layer weight spectral-norm bound,
// gamma the margin, eta/t the GD step size and step count, m/u the labeled
// and unlabeled counts, alpha/beta the mixing parameters where the
// architecture has them, delta the confidence level.
struct StabilityInputs {
  double d = 4.0;
  std::size_t l = 2;
  double b_x = 1.0;
  double b_w = 1.0;
  double gamma = 1.0;
  double eta = 0.01;
  std::size_t t = 100;
  double m = 100.0;
  double u = 100.0;
  double alpha = 0.9;
  double beta = 0.1;
  double delta = 0.05;
};

struct HelperConstants {
  double b_d_alpha = 0.0;  // (1-a) sum_{l=1}^L (a sqrt d)^{l-1} + (a sqrt d)^L
  double b_w_beta = 0.0;   // b*B_w + (1-b)
  double b_ldb = 0.0;      // max(b((1-a)L + a sqrt d), (1-a) L b_w_beta + 1)
};

HelperConstants helper_constants(const StabilityInputs& in);

// Uniform-stability ingredients: output-scale bound rho_f, loss-gradient
// scale g_f, and the GD-expansion Lipschitz constant l_f.
struct StabilityConstants {
  double rho_f = 0.0;
  double g_f = 0.0;
  double l_f = 0.0;
};

// Closed-form constants per architecture (gcn, resgcn, appnp, gcnii, dgcn).
// sgc has no trained propagation stack here and is rejected.  Exact formulas:
//
//   gcn:    C1 = max(1, sqrt(d) B_w), C2 = sqrt(d)(1 + B_x)
//           rho = C1^L C2
//           g   = (2/g)(L+1) C1^L C2
//           l   = (2/g)(L+1) C1^L C2 ((L+2) C1^L C2 + 2)
//   resgcn: as gcn with C1 = 1 + sqrt(d) B_w
//   appnp:  rho = B_d^a B_x B_w
//           g   = (4/g) B_d^a B_x
//           l   = (4/g) B_d^a B_x (B_d^a B_x max(1, B_w) + 1)
//   gcnii:  C1 = max(1, a sqrt(d) B_w^b), C2 = sqrt(d) + B_ldb B_x
//           rho = b C1^L C2
//           g   = (2/g)(L+1) b C1^L C2
//           l   = a b (2/g)(L+1) sqrt(d) C1^L C2 ((a b L + b B_w + 2) C1^L C2 + 2 b)
//   dgcn:   rho = d^{L/2} B_x
//           g   = (2/g)(L+1) d^{L/2} B_x
//           l   = (2/g)(L+1) d^{L/2} B_x (d^{L/2} B_x max(1, B_w) + 1)
StabilityConstants constants_for(Arch arch, const StabilityInputs& in);

// Uniform-stability bound after T full-batch GD steps:
//   eps = (2 eta rho g / m) * sum_{t=1}^T (1 + eta l)^{t-1},
// evaluated in closed form; the degenerate eta*l < 1e-14 limit is
// 2 eta rho g T / m.  Overflow is reported as +infinity, never a trap.
double epsilon_stability(const StabilityConstants& c, const StabilityInputs& in);

// Margin-based transductive risk bound with c1 = c2 = 1:
//   R_u <= train_margin_loss + (2/gamma) eps sqrt(Q ln(1/delta))
//          + ln(1/delta) / sqrt(Q),   Q = m u / (m + u).
// Throws std::invalid_argument when delta is outside (0, 1) or m, u <= 0.
double transductive_bound(double train_margin_loss, double eps,
                          const StabilityInputs& in);

// ---- Convergence of GD on the squared loss ---------------------------------

struct ConvergenceInputs {
  double loss0 = 0.0;       // squared loss at init (raw 0.5 ||.||^2 scale)
  double eps_target = 0.0;  // loss level to reach
  double alpha0 = 0.0;      // least singular value of the init top layer H^L
  // lambda_l = ||W0^l||_2 + C_l for l = 1..L+1 (readout included), with the
  // slack radii C_l > 0 chosen by the caller.
  std::vector<double> lambdas;
  std::vector<double> c;  // same length as lambdas
  double s = 1.0;         // propagator spectral norm
  double x_frob = 0.0;    // ||X||_F
  double eta = 0.0;       // intended step size; <= 0 means "use eta_max"
};

struct ConvergenceRequirements {
  double eta_max = 0.0;
  std::uint64_t t_min = 0;        // steps guaranteeing loss <= eps_target
  bool init_conditions_ok = false;
  // The three scale conditions, lhs >= rhs form, for reporting.
  double cond1_lhs = 0, cond1_rhs = 0;
  double cond2_lhs = 0, cond2_rhs = 0;
  double cond3_lhs = 0, cond3_rhs = 0;
};

// Evaluates the init-scale conditions, the step-size ceiling and the step
// count t_min = ceil(8 / (eta alpha0^2) * ln(loss0 / eps_target)) for the
// geometric envelope loss_t <= (1 - eta alpha0^2 / 8)^t loss0.
// Throws std::domain_error when alpha0 <= 0 (rank-deficient top layer) and
// std::invalid_argument on malformed lambda/c lists or nonpositive targets.
ConvergenceRequirements convergence_requirements(const ConvergenceInputs& in);

// One fixed-point sweep family for the constructive slack radii:
//   C_l = (16 / alpha0^2) s^L (prod_k lambda_k) / lambda_l * x_frob
//         * sqrt(2 loss0),  lambda_l = w_norms[l] + C_l.
// Returns the iterate after `iterations` sweeps; `diverged` reports whether
// it blew past 1e100 (the caller should then pick slacks manually).
struct ConstructiveSlack {
  std::vector<double> c;
  bool diverged = false;
};
ConstructiveSlack constructive_slack(const std::vector<double>& w_norms,
                                     double alpha0, double s, double x_frob,
                                     double loss0, std::size_t iterations = 100);

// ---- Expressiveness ---------------------------------------------------------

// Closed-form lower bound 2 (d-1)^{L-1} on the number of rooted computation
// trees of branching d and depth L.  Requires d >= 2, L >= 1; throws
// std::overflow_error if the value exceeds 64 bits.
std::uint64_t richness_lower_bound(std::uint64_t d, std::uint64_t l);

// Exact number of distinct rooted computation trees of depth L where every
// node carries one of two feature values, each internal node has exactly d
// children, and every internal node's feature appears among its children's
// features.  Level counts follow the closed recurrence
//   m(0) = 2,  m(l) = 2 (C(m(l-1)+d-1, d) - C(m(l-1)/2+d-1, d)).
// Requires 2 <= d <= 4 and 1 <= L <= 4 (the supported lattice); throws
// std::overflow_error when the count exceeds 64 bits (d = 4, L = 4 does).
std::uint64_t count_computation_trees(std::uint64_t d, std::uint64_t l);

// Explicit enumerator for the same family; materializes each level and
// counts by brute force.  Throws std::runtime_error when any level would
// require more than ~2e6 candidate multisets.  Exists to cross-check the
// counting recurrence on small inputs.
std::uint64_t enumerate_computation_trees(std::uint64_t d, std::uint64_t l);

}  // namespace gclab
