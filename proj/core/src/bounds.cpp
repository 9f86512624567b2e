#include "gclab/bounds.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <optional>
#include <stdexcept>
#include <string>

namespace gclab {

namespace {

// x^k with the x^0 = 1 convention (also for x = 0).
double pow_int(double x, std::size_t k) {
  double out = 1.0;
  for (std::size_t i = 0; i < k; ++i) out *= x;
  return out;
}

}  // namespace

HelperConstants helper_constants(const StabilityInputs& in) {
  const double sqrt_d = std::sqrt(in.d);
  const double asd = in.alpha * sqrt_d;
  HelperConstants h;
  double series = 0.0;
  for (std::size_t l = 1; l <= in.l; ++l) series += pow_int(asd, l - 1);
  h.b_d_alpha = (1.0 - in.alpha) * series + pow_int(asd, in.l);
  h.b_w_beta = in.beta * in.b_w + (1.0 - in.beta);
  const double ld = static_cast<double>(in.l);
  h.b_ldb = std::max(in.beta * ((1.0 - in.alpha) * ld + asd),
                     (1.0 - in.alpha) * ld * h.b_w_beta + 1.0);
  return h;
}

StabilityConstants constants_for(Arch arch, const StabilityInputs& in) {
  if (in.gamma <= 0.0) {
    throw std::invalid_argument("constants_for: gamma must be positive");
  }
  if (in.d < 1.0) {
    throw std::invalid_argument("constants_for: degree bound must be >= 1");
  }
  const double sqrt_d = std::sqrt(in.d);
  const double ld = static_cast<double>(in.l);
  const double lip = 2.0 / in.gamma;
  StabilityConstants out;
  switch (arch) {
    case Arch::GCN: {
      const double c1 = std::max(1.0, sqrt_d * in.b_w);
      const double c2 = sqrt_d * (1.0 + in.b_x);
      const double stack = pow_int(c1, in.l) * c2;
      out.rho_f = stack;
      out.g_f = lip * (ld + 1.0) * stack;
      out.l_f = lip * (ld + 1.0) * stack * ((ld + 2.0) * stack + 2.0);
      break;
    }
    case Arch::ResGCN: {
      const double c1 = 1.0 + sqrt_d * in.b_w;
      const double c2 = sqrt_d * (1.0 + in.b_x);
      const double stack = pow_int(c1, in.l) * c2;
      out.rho_f = stack;
      out.g_f = lip * (ld + 1.0) * stack;
      out.l_f = lip * (ld + 1.0) * stack * ((ld + 2.0) * stack + 2.0);
      break;
    }
    case Arch::APPNP: {
      const double bda = helper_constants(in).b_d_alpha;
      out.rho_f = bda * in.b_x * in.b_w;
      out.g_f = 2.0 * lip * bda * in.b_x;
      out.l_f = 2.0 * lip * bda * in.b_x *
                (bda * in.b_x * std::max(1.0, in.b_w) + 1.0);
      break;
    }
    case Arch::GCNII: {
      const HelperConstants h = helper_constants(in);
      const double c1 = std::max(1.0, in.alpha * sqrt_d * h.b_w_beta);
      const double c2 = sqrt_d + h.b_ldb * in.b_x;
      const double stack = pow_int(c1, in.l) * c2;
      const double ab = in.alpha * in.beta;
      out.rho_f = in.beta * stack;
      out.g_f = lip * (ld + 1.0) * in.beta * stack;
      out.l_f = ab * lip * (ld + 1.0) * sqrt_d * stack *
                ((ab * ld + in.beta * in.b_w + 2.0) * stack + 2.0 * in.beta);
      break;
    }
    case Arch::DGCN: {
      const double reach = pow_int(sqrt_d, in.l) * in.b_x;
      out.rho_f = reach;
      out.g_f = lip * (ld + 1.0) * reach;
      out.l_f = lip * (ld + 1.0) * reach * (reach * std::max(1.0, in.b_w) + 1.0);
      break;
    }
    case Arch::SGC:
      throw std::invalid_argument(
          "constants_for: sgc has no stability constants (no trained "
          "propagation stack)");
  }
  return out;
}

double epsilon_stability(const StabilityConstants& c,
                         const StabilityInputs& in) {
  if (in.m <= 0.0) {
    throw std::invalid_argument("epsilon_stability: m must be positive");
  }
  if (in.eta < 0.0) {
    throw std::invalid_argument("epsilon_stability: eta must be nonnegative");
  }
  if (in.t == 0) return 0.0;
  const double prefactor = 2.0 * in.eta * c.rho_f * c.g_f / in.m;
  const double x = in.eta * c.l_f;
  const double t = static_cast<double>(in.t);
  if (x < 1e-14) {
    // Degenerate expansion limit: every step contributes equally.
    return prefactor * t;
  }
  // sum_{k=0}^{T-1} (1+x)^k = ((1+x)^T - 1) / x, via expm1/log1p for
  // precision at small x.
  const double exponent = t * std::log1p(x);
  if (exponent > 700.0 || !std::isfinite(prefactor)) {
    return std::numeric_limits<double>::infinity();
  }
  return prefactor * std::expm1(exponent) / x;
}

double transductive_bound(double train_margin_loss, double eps,
                          const StabilityInputs& in) {
  if (in.delta <= 0.0 || in.delta >= 1.0) {
    throw std::invalid_argument("transductive_bound: delta must be in (0, 1)");
  }
  if (in.m <= 0.0 || in.u <= 0.0) {
    throw std::invalid_argument("transductive_bound: m and u must be positive");
  }
  if (in.gamma <= 0.0) {
    throw std::invalid_argument("transductive_bound: gamma must be positive");
  }
  const double q = in.m * in.u / (in.m + in.u);
  const double log_term = std::log(1.0 / in.delta);
  return train_margin_loss + (2.0 / in.gamma) * eps * std::sqrt(q * log_term) +
         log_term / std::sqrt(q);
}

ConvergenceRequirements convergence_requirements(const ConvergenceInputs& in) {
  if (in.alpha0 <= 0.0) {
    throw std::domain_error(
        "convergence_requirements: alpha0 <= 0 (rank-deficient top-layer "
        "representation; the analysis needs full row rank)");
  }
  const std::size_t depth_plus_readout = in.lambdas.size();
  if (depth_plus_readout < 2) {
    throw std::invalid_argument(
        "convergence_requirements: need lambdas for at least one layer plus "
        "the readout");
  }
  if (in.c.size() != depth_plus_readout) {
    throw std::invalid_argument(
        "convergence_requirements: lambdas and c must have equal length");
  }
  for (std::size_t i = 0; i < depth_plus_readout; ++i) {
    if (in.lambdas[i] <= 0.0 || in.c[i] <= 0.0) {
      throw std::invalid_argument(
          "convergence_requirements: lambdas and c must be positive");
    }
  }
  if (in.loss0 <= 0.0) {
    throw std::invalid_argument("convergence_requirements: loss0 must be positive");
  }
  if (in.eps_target <= 0.0) {
    throw std::invalid_argument(
        "convergence_requirements: eps_target must be positive");
  }
  const std::size_t L = depth_plus_readout - 1;

  const double s2l = pow_int(in.s, 2 * L);
  double prod_all = 1.0;  // lambda_{1 -> L+1}
  for (double l : in.lambdas) prod_all *= l;
  double prod_hidden = 1.0;  // lambda_{1 -> L}
  for (std::size_t i = 0; i < L; ++i) prod_hidden *= in.lambdas[i];
  const double sqrt_2l0 = std::sqrt(2.0 * in.loss0);

  ConvergenceRequirements out;

  // Condition 1: alpha0^2 >= 16 s^{2L} ||X||_F max_l (prod_all / (lambda_l C_l))
  //              sqrt(2 loss0).
  double max_ratio = 0.0;
  for (std::size_t i = 0; i < depth_plus_readout; ++i) {
    max_ratio = std::max(max_ratio, prod_all / (in.lambdas[i] * in.c[i]));
  }
  out.cond1_lhs = in.alpha0 * in.alpha0;
  out.cond1_rhs = 16.0 * s2l * in.x_frob * max_ratio * sqrt_2l0;

  // sum_{l=1}^{L} prod_hidden^2 / lambda_l^2, shared by conditions 2 and 3.
  double hidden_sum = 0.0;
  for (std::size_t i = 0; i < L; ++i) {
    const double r = prod_hidden / in.lambdas[i];
    hidden_sum += r * r;
  }
  const double lambda_out = in.lambdas[L];

  out.cond2_lhs = in.alpha0 * in.alpha0 * in.alpha0;
  out.cond2_rhs = 32.0 * s2l * in.x_frob * in.x_frob * lambda_out * hidden_sum *
                  sqrt_2l0;

  out.cond3_lhs = in.alpha0 * in.alpha0;
  out.cond3_rhs =
      16.0 * s2l * in.x_frob * in.x_frob * lambda_out * lambda_out * hidden_sum;

  out.init_conditions_ok = out.cond1_lhs >= out.cond1_rhs &&
                           out.cond2_lhs >= out.cond2_rhs &&
                           out.cond3_lhs >= out.cond3_rhs;

  // Step-size ceiling.
  double inv_sq_hidden = 0.0;
  for (std::size_t i = 0; i < L; ++i)
    inv_sq_hidden += 1.0 / (in.lambdas[i] * in.lambdas[i]);
  double inv_sq_all = inv_sq_hidden + 1.0 / (lambda_out * lambda_out);
  const double cap_curvature =
      inv_sq_hidden / (s2l * prod_all * prod_all * in.x_frob * in.x_frob *
                       inv_sq_all * inv_sq_all);
  out.eta_max = std::min(8.0 / (in.alpha0 * in.alpha0), cap_curvature);

  const double eta = in.eta > 0.0 ? in.eta : out.eta_max;
  if (in.eps_target >= in.loss0) {
    out.t_min = 0;
  } else {
    const double steps = 8.0 / (eta * in.alpha0 * in.alpha0) *
                         std::log(in.loss0 / in.eps_target);
    if (!std::isfinite(steps) || steps >= 1e18) {
      throw std::overflow_error("convergence_requirements: t_min overflows");
    }
    out.t_min = static_cast<std::uint64_t>(std::ceil(steps));
  }
  return out;
}

ConstructiveSlack constructive_slack(const std::vector<double>& w_norms,
                                     double alpha0, double s, double x_frob,
                                     double loss0, std::size_t iterations) {
  if (alpha0 <= 0.0) {
    throw std::domain_error("constructive_slack: alpha0 must be positive");
  }
  const std::size_t k = w_norms.size();
  if (k < 2) {
    throw std::invalid_argument(
        "constructive_slack: need at least one layer plus the readout");
  }
  const std::size_t L = k - 1;
  const double front = 16.0 / (alpha0 * alpha0) * pow_int(s, L) * x_frob *
                       std::sqrt(2.0 * loss0);
  ConstructiveSlack out;
  out.c.assign(k, 0.0);
  std::vector<double> lambdas(w_norms);
  for (std::size_t it = 0; it < iterations; ++it) {
    double prod = 1.0;
    for (double l : lambdas) prod *= l;
    std::vector<double> next(k);
    for (std::size_t i = 0; i < k; ++i) next[i] = front * prod / lambdas[i];
    bool blew_up = false;
    for (double v : next) {
      if (!std::isfinite(v) || v > 1e100) blew_up = true;
    }
    out.c = next;
    if (blew_up) {
      out.diverged = true;
      return out;
    }
    for (std::size_t i = 0; i < k; ++i) lambdas[i] = w_norms[i] + next[i];
  }
  return out;
}

namespace {

// C(n, k) in exact 64-bit arithmetic with interleaved division (the running
// product after step i is C(n-k+i, i), an integer); nullopt on overflow.
std::optional<std::uint64_t> checked_binomial(std::uint64_t n, std::uint64_t k) {
  if (k > n) return 0;
  if (k > n - k) k = n - k;
  std::uint64_t r = 1;
  for (std::uint64_t i = 1; i <= k; ++i) {
    std::uint64_t hi;
    if (__builtin_mul_overflow(r, n - k + i, &hi)) return std::nullopt;
    r = hi / i;
  }
  return r;
}

std::uint64_t require(std::optional<std::uint64_t> v, const char* what) {
  if (!v) throw std::overflow_error(std::string(what) + " exceeds 64-bit range");
  return *v;
}

void check_tree_domain(std::uint64_t d, std::uint64_t l) {
  if (d < 2 || d > 4 || l < 1 || l > 4) {
    throw std::invalid_argument(
        "computation trees: supported lattice is d in [2,4], depth in [1,4]");
  }
}

}  // namespace

std::uint64_t richness_lower_bound(std::uint64_t d, std::uint64_t l) {
  if (d < 2 || l < 1) {
    throw std::invalid_argument("richness_lower_bound: need d >= 2 and L >= 1");
  }
  std::uint64_t out = 2;
  for (std::uint64_t i = 1; i < l; ++i) {
    std::uint64_t next;
    if (__builtin_mul_overflow(out, d - 1, &next)) {
      throw std::overflow_error("richness_lower_bound exceeds 64-bit range");
    }
    out = next;
  }
  return out;
}

std::uint64_t count_computation_trees(std::uint64_t d, std::uint64_t l) {
  check_tree_domain(d, l);
  std::uint64_t m = 2;  // two distinct depth-0 trees (bare feature values)
  for (std::uint64_t level = 1; level <= l; ++level) {
    // Multisets of d children drawn from the m previous-level trees that
    // contain at least one child whose root feature matches; by the two-value
    // symmetry exactly m/2 previous trees carry each feature.
    const std::uint64_t all =
        require(checked_binomial(m + d - 1, d), "computation-tree count");
    const std::uint64_t missing =
        require(checked_binomial(m / 2 + d - 1, d), "computation-tree count");
    const std::uint64_t per_feature = all - missing;
    if (per_feature > (~std::uint64_t{0}) / 2) {
      throw std::overflow_error("computation-tree count exceeds 64-bit range");
    }
    m = 2 * per_feature;
  }
  return m;
}

std::uint64_t enumerate_computation_trees(std::uint64_t d, std::uint64_t l) {
  check_tree_domain(d, l);
  std::vector<std::string> level = {"0", "1"};
  std::uint64_t final_count = 0;
  for (std::uint64_t depth = 1; depth <= l; ++depth) {
    const std::uint64_t m = level.size();
    const auto candidates = checked_binomial(m + d - 1, d);
    if (!candidates || *candidates > 2'000'000ULL) {
      throw std::runtime_error(
          "enumerate_computation_trees: level too large to enumerate");
    }
    const bool last = depth == l;
    std::vector<std::string> next;
    std::uint64_t count = 0;
    // Iterate all nondecreasing index d-tuples (multisets) over the level.
    std::vector<std::uint64_t> idx(d, 0);
    while (true) {
      bool has[2] = {false, false};
      for (std::uint64_t i = 0; i < d; ++i) {
        has[level[idx[i]][0] - '0'] = true;
      }
      for (int f = 0; f < 2; ++f) {
        if (!has[f]) continue;
        if (last) {
          ++count;
        } else {
          std::string tree;
          tree += static_cast<char>('0' + f);
          tree += '(';
          for (std::uint64_t i = 0; i < d; ++i) {
            if (i) tree += ',';
            tree += level[idx[i]];
          }
          tree += ')';
          next.push_back(std::move(tree));
        }
      }
      // Advance the nondecreasing tuple.
      std::uint64_t pos = d;
      while (pos > 0 && idx[pos - 1] == m - 1) --pos;
      if (pos == 0) break;
      const std::uint64_t v = idx[pos - 1] + 1;
      for (std::uint64_t i = pos - 1; i < d; ++i) idx[i] = v;
    }
    if (last) {
      final_count = count;
    } else {
      level = std::move(next);
    }
  }
  return final_count;
}

}  // namespace gclab
