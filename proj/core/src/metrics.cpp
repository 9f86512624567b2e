#include "gclab/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

namespace gclab {

double subspace_distance(const DenseMatrix& h, const DenseMatrix& e) {
  if (e.rows() != h.rows()) {
    throw std::invalid_argument("subspace_distance: row counts differ");
  }
  // h - e (e^T h), computed column-block-free: r = e^T h (m x d).
  const DenseMatrix r = matmul(transpose(e), h);
  const DenseMatrix proj = matmul(e, r);
  return frobenius_norm(subtract(h, proj));
}

double dirichlet_energy(const DenseMatrix& h, const SparseGraph& g) {
  if (h.rows() != g.num_nodes()) {
    throw std::invalid_argument("dirichlet_energy: row count != node count");
  }
  const Propagator p = build_propagator(g);
  std::vector<double> inv_sqrt_deg(g.num_nodes());
  for (std::uint32_t i = 0; i < g.num_nodes(); ++i) {
    inv_sqrt_deg[i] = 1.0 / std::sqrt(static_cast<double>(g.degree(i)));
  }
  double total = 0.0;
  for (std::size_t i = 0; i < p.n; ++i) {
    for (std::size_t k = p.row_ptr[i]; k < p.row_ptr[i + 1]; ++k) {
      const std::uint32_t j = p.col[k];
      if (j == i) continue;  // the loop term vanishes identically
      double dist2 = 0.0;
      const double* hi = h.row(i);
      const double* hj = h.row(j);
      for (std::size_t c = 0; c < h.cols(); ++c) {
        const double d = hi[c] * inv_sqrt_deg[i] - hj[c] * inv_sqrt_deg[j];
        dist2 += d * d;
      }
      total += p.val[k] * dist2;
    }
  }
  return 0.5 * total;
}

double dirichlet_energy_unnormalized(const DenseMatrix& h,
                                     const SparseGraph& g) {
  if (h.rows() != g.num_nodes()) {
    throw std::invalid_argument(
        "dirichlet_energy_unnormalized: row count != node count");
  }
  double total = 0.0;
  for (const auto& [a, b] : g.edges()) {
    const double* ha = h.row(a);
    const double* hb = h.row(b);
    for (std::size_t c = 0; c < h.cols(); ++c) {
      const double d = ha[c] - hb[c];
      total += d * d;
    }
  }
  return total;
}

ClassDistances intra_inter_distance(const DenseMatrix& h,
                                    const std::vector<int>& labels) {
  const std::size_t n = h.rows();
  if (labels.size() != n) {
    throw std::invalid_argument("intra_inter_distance: label count mismatch");
  }
  const int num_classes =
      n == 0 ? 0 : 1 + *std::max_element(labels.begin(), labels.end());
  if (num_classes < 2) {
    throw std::invalid_argument("intra_inter_distance: need at least 2 classes");
  }
  std::vector<std::size_t> count(num_classes, 0);
  for (int y : labels) {
    if (y < 0) throw std::invalid_argument("intra_inter_distance: negative label");
    ++count[y];
  }
  for (int c = 0; c < num_classes; ++c) {
    if (count[c] < 2) {
      throw std::invalid_argument(
          "intra_inter_distance: class with fewer than two members");
    }
  }
  const double h_norm = frobenius_norm(h);
  if (h_norm == 0.0) {
    throw std::domain_error("intra_inter_distance: zero representation norm");
  }

  // Ordered-pair sums via per-class first/second moments:
  // sum_{i,j in S} ||h_i - h_j||^2 = 2|S| * sum_i ||h_i||^2 - 2 ||sum_i h_i||^2.
  const std::size_t d = h.cols();
  std::vector<double> class_sq(num_classes, 0.0);
  DenseMatrix class_mean_sum(static_cast<std::size_t>(num_classes), d);
  double total_sq = 0.0;
  DenseMatrix total_sum(1, d);
  for (std::size_t i = 0; i < n; ++i) {
    const double* row = h.row(i);
    double sq = 0.0;
    double* cs = class_mean_sum.row(labels[i]);
    double* ts = total_sum.row(0);
    for (std::size_t c = 0; c < d; ++c) {
      sq += row[c] * row[c];
      cs[c] += row[c];
      ts[c] += row[c];
    }
    class_sq[labels[i]] += sq;
    total_sq += sq;
  }

  double intra_num = 0.0;
  double intra_pairs = 0.0;
  for (int c = 0; c < num_classes; ++c) {
    double sum_sq = 0.0;
    const double* cs = class_mean_sum.row(c);
    for (std::size_t k = 0; k < d; ++k) sum_sq += cs[k] * cs[k];
    intra_num += 2.0 * static_cast<double>(count[c]) * class_sq[c] - 2.0 * sum_sq;
    intra_pairs += static_cast<double>(count[c]) * static_cast<double>(count[c]);
  }
  double all_sum_sq = 0.0;
  for (std::size_t k = 0; k < d; ++k) {
    all_sum_sq += total_sum(0, k) * total_sum(0, k);
  }
  const double all_num =
      2.0 * static_cast<double>(n) * total_sq - 2.0 * all_sum_sq;
  const double inter_num = all_num - intra_num;
  const double inter_pairs =
      static_cast<double>(n) * static_cast<double>(n) - intra_pairs;

  ClassDistances out;
  out.intra = std::max(0.0, intra_num) / (h_norm * intra_pairs);
  out.inter = std::max(0.0, inter_num) / (h_norm * inter_pairs);
  return out;
}

ContractionRate contraction_rate(ContractionArch arch, double lambda, double s,
                                 double alpha, double beta, double d_m_ref) {
  if (lambda < 0.0) {
    throw std::invalid_argument("contraction_rate: lambda must be >= 0");
  }
  const auto limit_radius = [](double gamma, double numerator) {
    if (numerator == 0.0) return 0.0;
    if (gamma == 1.0) {
      throw std::domain_error(
          "contraction_rate: rate 1 with a nonzero additive term has no "
          "finite limit radius");
    }
    return numerator / (1.0 - gamma);
  };
  switch (arch) {
    case ContractionArch::GCN:
      return {lambda * s, 0.0};
    case ContractionArch::GCNBias:
      return {lambda * s, d_m_ref};
    case ContractionArch::SGC:
      return {lambda, 0.0};
    case ContractionArch::ResGCN:
      return {1.0 + lambda * s, 0.0};
    case ContractionArch::APPNP: {
      const double gamma = alpha * lambda;
      return {gamma, limit_radius(gamma, (1.0 - alpha) * d_m_ref)};
    }
    case ContractionArch::GCNII: {
      const double gamma = alpha * lambda * (1.0 - (1.0 - beta) * (1.0 - s));
      return {gamma, limit_radius(gamma, (1.0 - alpha) * d_m_ref)};
    }
  }
  throw std::invalid_argument("contraction_rate: unknown architecture");
}

std::vector<double> generalization_gap(const TrainHistory& h) {
  std::vector<double> gap(h.epochs());
  for (std::size_t e = 0; e < h.epochs(); ++e) {
    gap[e] = h.val_loss[e] - h.train_loss[e];
  }
  return gap;
}

double lambda_min_nonzero_laplacian(const SparseGraph& g) {
  const std::size_t n = g.num_nodes();
  if (n == 0) {
    throw std::invalid_argument("lambda_min_nonzero_laplacian: empty graph");
  }
  const std::size_t zero_modes = g.num_components();
  if (zero_modes >= n) {
    throw std::invalid_argument(
        "lambda_min_nonzero_laplacian: no nonzero eigenvalues (edgeless graph)");
  }
  DenseMatrix lap(n, n);
  for (const auto& [a, b] : g.edges()) {
    lap(a, b) -= 1.0;
    lap(b, a) -= 1.0;
    lap(a, a) += 1.0;
    lap(b, b) += 1.0;
  }
  const std::vector<double> ev = symmetric_eigenvalues(lap);
  // The kernel dimension equals the component count exactly; everything past
  // it is a genuine nonzero mode.
  return ev[zero_modes];
}

std::vector<LayerMetricsRow> layer_metrics(const ForwardTrace& trace,
                                           const SparseGraph& g,
                                           const std::vector<int>& labels) {
  const DenseMatrix e = degree_profile_basis(g);
  std::vector<LayerMetricsRow> rows;
  rows.reserve(trace.h.size());
  for (std::size_t l = 0; l < trace.h.size(); ++l) {
    LayerMetricsRow row;
    row.layer = l;
    row.d_m = subspace_distance(trace.h[l], e);
    row.dirichlet = dirichlet_energy(trace.h[l], g);
    try {
      const ClassDistances cd = intra_inter_distance(trace.h[l], labels);
      row.intra = cd.intra;
      row.inter = cd.inter;
    } catch (const std::exception&) {
      row.intra = std::numeric_limits<double>::quiet_NaN();
      row.inter = std::numeric_limits<double>::quiet_NaN();
    }
    rows.push_back(row);
  }
  return rows;
}

}  // namespace gclab
