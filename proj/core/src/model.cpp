#include "gclab/model.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

namespace gclab {

std::string arch_name(Arch a) {
  switch (a) {
    case Arch::GCN: return "gcn";
    case Arch::ResGCN: return "resgcn";
    case Arch::APPNP: return "appnp";
    case Arch::GCNII: return "gcnii";
    case Arch::DGCN: return "dgcn";
    case Arch::SGC: return "sgc";
  }
  throw std::invalid_argument("arch_name: unknown architecture");
}

Arch arch_from_name(const std::string& name) {
  if (name == "gcn") return Arch::GCN;
  if (name == "resgcn") return Arch::ResGCN;
  if (name == "appnp") return Arch::APPNP;
  if (name == "gcnii") return Arch::GCNII;
  if (name == "dgcn") return Arch::DGCN;
  if (name == "sgc") return Arch::SGC;
  throw std::invalid_argument("unknown architecture name: " + name);
}

double ModelSpec::beta_at(std::size_t layer) const {
  if (!beta_schedule) return beta;
  return std::log(1.0 + 0.5 / static_cast<double>(layer));
}

void ModelSpec::validate() const {
  if (depth == 0) throw std::invalid_argument("model: depth must be >= 1");
  if (input_dim == 0) throw std::invalid_argument("model: input_dim must be >= 1");
  if (hidden_dim == 0 && arch != Arch::DGCN) {
    throw std::invalid_argument("model: hidden_dim must be >= 1");
  }
  if (use_bias && arch != Arch::GCN) {
    throw std::invalid_argument("model: use_bias is only defined for gcn");
  }
  if (alpha < 0.0 || alpha > 1.0) {
    throw std::invalid_argument("model: alpha must lie in [0, 1]");
  }
  if (beta < 0.0 || beta > 1.0) {
    throw std::invalid_argument("model: beta must lie in [0, 1]");
  }
}

namespace {

double init_std(std::size_t fan_in) {
  return std::sqrt(1.0 / static_cast<double>(fan_in));
}

void add_row_bias(DenseMatrix& z, const DenseMatrix& b) {
  assert(b.rows() == 1 && b.cols() == z.cols());
  for (std::size_t i = 0; i < z.rows(); ++i) {
    double* row = z.row(i);
    for (std::size_t c = 0; c < z.cols(); ++c) row[c] += b(0, c);
  }
}

DenseMatrix column_sums(const DenseMatrix& m) {
  DenseMatrix out(1, m.cols());
  for (std::size_t i = 0; i < m.rows(); ++i) {
    const double* row = m.row(i);
    for (std::size_t c = 0; c < m.cols(); ++c) out(0, c) += row[c];
  }
  return out;
}

// b_l W^l + (1 - b_l) I for GCNII.
DenseMatrix identity_mix(const DenseMatrix& w, double beta_l) {
  assert(w.rows() == w.cols());
  DenseMatrix out = scale(w, beta_l);
  for (std::size_t i = 0; i < w.rows(); ++i) out(i, i) += 1.0 - beta_l;
  return out;
}

std::vector<double> sigmoid_each(const std::vector<double>& v) {
  std::vector<double> out(v.size());
  for (std::size_t i = 0; i < v.size(); ++i) out[i] = sigmoid(v[i]);
  return out;
}

}  // namespace

std::vector<double> softmax(const std::vector<double>& logits) {
  if (logits.empty()) return {};
  const double m = *std::max_element(logits.begin(), logits.end());
  std::vector<double> out(logits.size());
  double sum = 0.0;
  for (std::size_t i = 0; i < logits.size(); ++i) {
    out[i] = std::exp(logits[i] - m);
    sum += out[i];
  }
  for (auto& x : out) x /= sum;
  return out;
}

ModelParams init_params(const ModelSpec& spec, SeededRng& rng) {
  spec.validate();
  ModelParams params;
  const std::size_t p = spec.input_dim;
  const std::size_t h = spec.hidden_dim;
  const std::size_t L = spec.depth;

  const auto draw = [&rng](std::size_t rows, std::size_t cols) {
    return gaussian_matrix(rows, cols, init_std(rows), rng);
  };

  switch (spec.arch) {
    case Arch::GCN:
      params.weights.push_back(draw(p, h));
      for (std::size_t l = 2; l <= L; ++l) params.weights.push_back(draw(h, h));
      if (spec.use_bias) {
        for (std::size_t l = 0; l < L; ++l)
          params.biases.emplace_back(1, h);  // zeros
      }
      break;
    case Arch::ResGCN:
    case Arch::GCNII:
      params.weights.push_back(draw(p, h));  // input projection W^0
      for (std::size_t l = 1; l <= L; ++l) params.weights.push_back(draw(h, h));
      break;
    case Arch::APPNP:
    case Arch::SGC:
      params.weights.push_back(draw(p, h));
      break;
    case Arch::DGCN:
      for (std::size_t l = 1; l <= L; ++l) params.weights.push_back(draw(p, p));
      params.mix_a_logits.assign(L, 0.0);
      params.mix_b_logits.assign(L, 0.0);
      break;
  }
  params.v = draw(spec.output_dim(), 1);
  return params;
}

DenseMatrix pairnorm(const DenseMatrix& h, double scale_factor) {
  const std::size_t n = h.rows();
  if (n == 0) throw std::domain_error("pairnorm: empty input");
  DenseMatrix centered = h;
  for (std::size_t c = 0; c < h.cols(); ++c) {
    double mean = 0.0;
    for (std::size_t i = 0; i < n; ++i) mean += h(i, c);
    mean /= static_cast<double>(n);
    for (std::size_t i = 0; i < n; ++i) centered(i, c) -= mean;
  }
  const double sigma =
      frobenius_norm(centered) / std::sqrt(static_cast<double>(n));
  if (sigma < 1e-12) {
    throw std::domain_error("pairnorm: degenerate input (all rows equal)");
  }
  return scale(centered, scale_factor / sigma);
}

DenseMatrix pairnorm_backward(const DenseMatrix& h_in, double scale_factor,
                              const DenseMatrix& d_out) {
  assert(h_in.same_shape(d_out));
  const std::size_t n = h_in.rows();
  DenseMatrix centered = h_in;
  for (std::size_t c = 0; c < h_in.cols(); ++c) {
    double mean = 0.0;
    for (std::size_t i = 0; i < n; ++i) mean += h_in(i, c);
    mean /= static_cast<double>(n);
    for (std::size_t i = 0; i < n; ++i) centered(i, c) -= mean;
  }
  const double sigma2 =
      dot(centered, centered) / static_cast<double>(n);
  const double sigma = std::sqrt(sigma2);
  if (sigma < 1e-12) {
    throw std::domain_error("pairnorm_backward: degenerate input");
  }
  // out = s * C / sigma with sigma^2 = |C|^2 / n:
  // dL/dC = (s / sigma) * (D - C * <D, C> / (n * sigma^2)).
  const double coupling = dot(d_out, centered) / (static_cast<double>(n) * sigma2);
  DenseMatrix d_centered = d_out;
  axpy(d_centered, -coupling, centered);
  d_centered = scale(d_centered, scale_factor / sigma);
  // Centering chain rule: subtract the column means.
  for (std::size_t c = 0; c < d_centered.cols(); ++c) {
    double mean = 0.0;
    for (std::size_t i = 0; i < n; ++i) mean += d_centered(i, c);
    mean /= static_cast<double>(n);
    for (std::size_t i = 0; i < n; ++i) d_centered(i, c) -= mean;
  }
  return d_centered;
}

ForwardTrace forward(const ModelSpec& spec, const ModelParams& params,
                     const Propagator& p, const DenseMatrix& x,
                     const PairNormConfig& pn) {
  spec.validate();
  if (x.rows() != p.n) {
    throw std::invalid_argument("forward: feature rows != propagator size");
  }
  if (x.cols() != spec.input_dim) {
    throw std::invalid_argument("forward: feature cols != spec.input_dim");
  }
  if (pn.enabled && (spec.arch == Arch::SGC || spec.arch == Arch::DGCN)) {
    throw std::invalid_argument(
        "forward: pairnorm is undefined for architectures without per-layer "
        "activations (sgc, dgcn)");
  }

  const std::size_t L = spec.depth;
  ForwardTrace t;
  t.pairnorm = pn.enabled;
  t.pairnorm_scale = pn.scale;

  const auto norm_layer = [&](DenseMatrix act) {
    if (!pn.enabled) return act;
    t.pre_norm.push_back(act);
    return pairnorm(act, pn.scale);
  };

  switch (spec.arch) {
    case Arch::GCN: {
      t.h.push_back(x);
      for (std::size_t l = 1; l <= L; ++l) {
        t.prop.push_back(spmm(p, t.h[l - 1]));
        DenseMatrix z = matmul(t.prop[l - 1], params.weights[l - 1]);
        if (spec.use_bias) add_row_bias(z, params.biases[l - 1]);
        t.z.push_back(std::move(z));
        t.h.push_back(norm_layer(relu(t.z[l - 1])));
      }
      break;
    }
    case Arch::ResGCN: {
      t.h.push_back(matmul(x, params.weights[0]));
      for (std::size_t l = 1; l <= L; ++l) {
        t.prop.push_back(spmm(p, t.h[l - 1]));
        t.z.push_back(matmul(t.prop[l - 1], params.weights[l]));
        t.h.push_back(norm_layer(add(relu(t.z[l - 1]), t.h[l - 1])));
      }
      break;
    }
    case Arch::APPNP: {
      t.h.push_back(matmul(x, params.weights[0]));
      for (std::size_t l = 1; l <= L; ++l) {
        DenseMatrix step = scale(spmm(p, t.h[l - 1]), spec.alpha);
        axpy(step, 1.0 - spec.alpha, t.h[0]);
        t.h.push_back(norm_layer(std::move(step)));
      }
      break;
    }
    case Arch::GCNII: {
      t.h.push_back(matmul(x, params.weights[0]));
      for (std::size_t l = 1; l <= L; ++l) {
        DenseMatrix mixed = scale(spmm(p, t.h[l - 1]), spec.alpha);
        axpy(mixed, 1.0 - spec.alpha, t.h[0]);
        t.mixed.push_back(std::move(mixed));
        const DenseMatrix wbar =
            identity_mix(params.weights[l], spec.beta_at(l));
        t.z.push_back(matmul(t.mixed[l - 1], wbar));
        t.h.push_back(norm_layer(relu(t.z[l - 1])));
      }
      break;
    }
    case Arch::SGC: {
      t.h.push_back(matmul(x, params.weights[0]));
      for (std::size_t l = 1; l <= L; ++l) t.h.push_back(spmm(p, t.h[l - 1]));
      break;
    }
    case Arch::DGCN: {
      t.h.push_back(x);
      for (std::size_t l = 1; l <= L; ++l) t.h.push_back(spmm(p, t.h[l - 1]));
      const std::vector<double> a = softmax(params.mix_a_logits);
      const std::vector<double> b = sigmoid_each(params.mix_b_logits);
      DenseMatrix out(x.rows(), spec.input_dim);
      for (std::size_t l = 1; l <= L; ++l) {
        DenseMatrix br = scale(matmul(t.h[l], params.weights[l - 1]), b[l - 1]);
        axpy(br, 1.0 - b[l - 1], t.h[l]);
        axpy(out, a[l - 1], br);
        t.branch.push_back(std::move(br));
      }
      t.output = std::move(out);
      return t;
    }
  }
  t.output = t.h.back();
  return t;
}

Gradients backward(const ModelSpec& spec, const ModelParams& params,
                   const ForwardTrace& trace, const Propagator& p,
                   const DenseMatrix& x, const DenseMatrix& d_output) {
  const std::size_t L = spec.depth;
  Gradients g;
  g.weights.reserve(params.weights.size());
  for (const auto& w : params.weights) g.weights.emplace_back(w.rows(), w.cols());
  for (const auto& b : params.biases) g.biases.emplace_back(b.rows(), b.cols());
  g.v = DenseMatrix(params.v.rows(), params.v.cols());
  g.mix_a_logits.assign(params.mix_a_logits.size(), 0.0);
  g.mix_b_logits.assign(params.mix_b_logits.size(), 0.0);

  if (trace.pairnorm && trace.pre_norm.size() != L) {
    throw std::invalid_argument("backward: trace inconsistent with pairnorm");
  }
  const auto unnorm = [&](std::size_t l, DenseMatrix d) {
    // Inverse-order chain rule through pairnorm at layer l (1-based).
    if (!trace.pairnorm) return d;
    return pairnorm_backward(trace.pre_norm[l - 1], trace.pairnorm_scale, d);
  };

  switch (spec.arch) {
    case Arch::GCN: {
      DenseMatrix d = d_output;
      for (std::size_t l = L; l >= 1; --l) {
        d = unnorm(l, std::move(d));
        const DenseMatrix dz = hadamard(d, relu_mask(trace.z[l - 1]));
        g.weights[l - 1] = matmul(transpose(trace.prop[l - 1]), dz);
        if (spec.use_bias) g.biases[l - 1] = column_sums(dz);
        if (l > 1) d = spmm(p, matmul(dz, transpose(params.weights[l - 1])));
      }
      break;
    }
    case Arch::ResGCN: {
      DenseMatrix d = d_output;
      for (std::size_t l = L; l >= 1; --l) {
        d = unnorm(l, std::move(d));
        const DenseMatrix dz = hadamard(d, relu_mask(trace.z[l - 1]));
        g.weights[l] = matmul(transpose(trace.prop[l - 1]), dz);
        // Conv path plus the identity skip path.
        d = add(spmm(p, matmul(dz, transpose(params.weights[l]))), d);
      }
      g.weights[0] = matmul(transpose(x), d);
      break;
    }
    case Arch::APPNP: {
      DenseMatrix d = d_output;
      DenseMatrix d0(d_output.rows(), d_output.cols());
      for (std::size_t l = L; l >= 1; --l) {
        d = unnorm(l, std::move(d));
        axpy(d0, 1.0 - spec.alpha, d);
        d = scale(spmm(p, d), spec.alpha);
      }
      d0 = add(d0, d);
      g.weights[0] = matmul(transpose(x), d0);
      break;
    }
    case Arch::GCNII: {
      DenseMatrix d = d_output;
      DenseMatrix d0(d_output.rows(), d_output.cols());
      for (std::size_t l = L; l >= 1; --l) {
        d = unnorm(l, std::move(d));
        const double beta_l = spec.beta_at(l);
        const DenseMatrix dz = hadamard(d, relu_mask(trace.z[l - 1]));
        g.weights[l] = scale(matmul(transpose(trace.mixed[l - 1]), dz), beta_l);
        const DenseMatrix wbar = identity_mix(params.weights[l], beta_l);
        const DenseMatrix ds = matmul(dz, transpose(wbar));
        axpy(d0, 1.0 - spec.alpha, ds);
        d = scale(spmm(p, ds), spec.alpha);
      }
      d0 = add(d0, d);
      g.weights[0] = matmul(transpose(x), d0);
      break;
    }
    case Arch::SGC: {
      DenseMatrix d = d_output;
      for (std::size_t l = 0; l < L; ++l) d = spmm(p, d);  // P is symmetric
      g.weights[0] = matmul(transpose(x), d);
      break;
    }
    case Arch::DGCN: {
      const std::vector<double> a = softmax(params.mix_a_logits);
      const std::vector<double> b = sigmoid_each(params.mix_b_logits);
      std::vector<double> d_a(L, 0.0);
      for (std::size_t l = 1; l <= L; ++l) {
        g.weights[l - 1] = scale(matmul(transpose(trace.h[l]), d_output),
                                 a[l - 1] * b[l - 1]);
        d_a[l - 1] = dot(d_output, trace.branch[l - 1]);
        const double d_b = a[l - 1] *
                           (dot(d_output, matmul(trace.h[l], params.weights[l - 1])) -
                            dot(d_output, trace.h[l]));
        g.mix_b_logits[l - 1] = b[l - 1] * (1.0 - b[l - 1]) * d_b;
      }
      double coupled = 0.0;
      for (std::size_t l = 0; l < L; ++l) coupled += a[l] * d_a[l];
      for (std::size_t l = 0; l < L; ++l) {
        g.mix_a_logits[l] = a[l] * (d_a[l] - coupled);
      }
      break;
    }
  }
  return g;
}

double phi_margin(double x, double gamma) {
  assert(gamma > 0.0);
  if (x <= 0.0) return 1.0;
  if (x >= gamma) return 0.0;
  return 1.0 - x / gamma;
}

double phi_margin_slope(double x, double gamma) {
  assert(gamma > 0.0);
  if (x >= 0.0 && x < gamma) return -1.0 / gamma;
  return 0.0;
}

double p_margin(double z, int y) {
  assert(y == 0 || y == 1);
  return y == 1 ? 2.0 * z - 1.0 : 1.0 - 2.0 * z;
}

double margin_loss(double score, int y, double gamma) {
  return phi_margin(p_margin(sigmoid(score), y), gamma);
}

double squared_loss(const DenseMatrix& a, const DenseMatrix& b) {
  const DenseMatrix r = subtract(a, b);
  return 0.5 * dot(r, r);
}

namespace {

double score_row(const DenseMatrix& output, const DenseMatrix& v,
                 std::size_t i) {
  const double* row = output.row(i);
  double s = 0.0;
  for (std::size_t c = 0; c < output.cols(); ++c) s += row[c] * v(c, 0);
  return s;
}

}  // namespace

SplitEval evaluate_split(const DenseMatrix& output, const DenseMatrix& v,
                         const std::vector<int>& labels,
                         const std::vector<std::uint32_t>& idx,
                         const LossConfig& loss) {
  if (idx.empty()) {
    const double nan = std::numeric_limits<double>::quiet_NaN();
    return {nan, nan};
  }
  double total = 0.0;
  std::size_t correct = 0;
  for (const std::uint32_t i : idx) {
    const double s = score_row(output, v, i);
    const int y = labels[i];
    if (loss.kind == LossKind::Margin) {
      const double pm = p_margin(sigmoid(s), y);
      total += phi_margin(pm, loss.gamma);
      if (pm > 0.0) ++correct;
    } else {
      const double target = y == 0 ? -1.0 : 1.0;
      const double r = s - target;
      total += 0.5 * r * r;
      if ((s > 0.0) == (y == 1) && s != 0.0) ++correct;
    }
  }
  SplitEval e;
  // Reported losses are per-node means for both kinds so values are
  // comparable across splits of different sizes.  The squared-loss training
  // objective itself stays the raw 0.5*sum (see compute_gradients); dividing
  // the report by the split size rescales every epoch identically, so
  // ratio-based checks (geometric envelopes, gaps) are unaffected.
  e.loss = total / static_cast<double>(idx.size());
  e.accuracy = static_cast<double>(correct) / static_cast<double>(idx.size());
  return e;
}

LossGradient loss_gradient(const DenseMatrix& output, const DenseMatrix& v,
                           const std::vector<int>& labels,
                           const std::vector<std::uint32_t>& idx,
                           const LossConfig& loss) {
  if (idx.empty()) {
    throw std::invalid_argument("loss_gradient: empty index set");
  }
  LossGradient out;
  out.d_output = DenseMatrix(output.rows(), output.cols());
  out.d_v = DenseMatrix(v.rows(), v.cols());
  double total = 0.0;
  std::size_t correct = 0;
  const double inv_m = 1.0 / static_cast<double>(idx.size());
  for (const std::uint32_t i : idx) {
    const double s = score_row(output, v, i);
    const int y = labels[i];
    double d_score;
    if (loss.kind == LossKind::Margin) {
      const double z = sigmoid(s);
      const double pm = p_margin(z, y);
      total += phi_margin(pm, loss.gamma);
      if (pm > 0.0) ++correct;
      const double dp_dz = y == 1 ? 2.0 : -2.0;
      d_score = phi_margin_slope(pm, loss.gamma) * dp_dz * z * (1.0 - z) * inv_m;
    } else {
      const double target = y == 0 ? -1.0 : 1.0;
      const double r = s - target;
      total += 0.5 * r * r;
      if ((s > 0.0) == (y == 1) && s != 0.0) ++correct;
      d_score = r;
    }
    double* d_row = out.d_output.row(i);
    const double* h_row = output.row(i);
    for (std::size_t c = 0; c < output.cols(); ++c) {
      d_row[c] = d_score * v(c, 0);
      out.d_v(c, 0) += d_score * h_row[c];
    }
  }
  out.loss = loss.kind == LossKind::Margin ? total * inv_m : total;
  out.accuracy = static_cast<double>(correct) / static_cast<double>(idx.size());
  return out;
}

ModelGradients compute_gradients(const ModelSpec& spec,
                                 const ModelParams& params, const Propagator& p,
                                 const DenseMatrix& x,
                                 const std::vector<int>& labels,
                                 const std::vector<std::uint32_t>& idx,
                                 const LossConfig& loss,
                                 const PairNormConfig& pn) {
  const ForwardTrace trace = forward(spec, params, p, x, pn);
  LossGradient lg = loss_gradient(trace.output, params.v, labels, idx, loss);
  ModelGradients out;
  out.loss = lg.loss;
  out.accuracy = lg.accuracy;
  out.grads = backward(spec, params, trace, p, x, lg.d_output);
  out.grads.v = std::move(lg.d_v);
  return out;
}

void gd_step(ModelParams& params, const Gradients& grads, double eta,
             double eta_mix) {
  for (std::size_t i = 0; i < params.weights.size(); ++i) {
    axpy(params.weights[i], -eta, grads.weights[i]);
  }
  for (std::size_t i = 0; i < params.biases.size(); ++i) {
    axpy(params.biases[i], -eta, grads.biases[i]);
  }
  axpy(params.v, -eta, grads.v);
  for (std::size_t i = 0; i < params.mix_a_logits.size(); ++i) {
    params.mix_a_logits[i] -= eta_mix * grads.mix_a_logits[i];
  }
  for (std::size_t i = 0; i < params.mix_b_logits.size(); ++i) {
    params.mix_b_logits[i] -= eta_mix * grads.mix_b_logits[i];
  }
}

double gradient_total_norm(const Gradients& grads) {
  double s = 0.0;
  for (const auto& w : grads.weights) s += dot(w, w);
  for (const auto& b : grads.biases) s += dot(b, b);
  s += dot(grads.v, grads.v);
  for (double g : grads.mix_a_logits) s += g * g;
  for (double g : grads.mix_b_logits) s += g * g;
  return std::sqrt(s);
}

double max_weight_spectral_norm(const ModelParams& params) {
  double best = 0.0;
  for (const auto& w : params.weights) {
    best = std::max(best, spectral_norm(w).value);
  }
  return best;
}

bool params_finite(const ModelParams& params) {
  for (const auto& w : params.weights)
    if (has_non_finite(w)) return false;
  for (const auto& b : params.biases)
    if (has_non_finite(b)) return false;
  if (has_non_finite(params.v)) return false;
  for (double x : params.mix_a_logits)
    if (!std::isfinite(x)) return false;
  for (double x : params.mix_b_logits)
    if (!std::isfinite(x)) return false;
  return true;
}

}  // namespace gclab
