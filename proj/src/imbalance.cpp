#include "digrac/imbalance.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "digrac/kernels.hpp"

namespace digrac {

Normalization parse_normalization(std::string_view name) {
  if (name == "vol_sum") return Normalization::vol_sum;
  if (name == "vol_min") return Normalization::vol_min;
  if (name == "vol_max") return Normalization::vol_max;
  if (name == "plain") return Normalization::plain;
  throw InputError("unknown normalization '" + std::string(name) + "'");
}

Selection parse_selection(std::string_view name) {
  if (name == "naive") return Selection::naive;
  if (name == "sort") return Selection::sort;
  if (name == "std") return Selection::std_dev;
  throw InputError("unknown selection variant '" + std::string(name) + "'");
}

std::string_view to_string(Normalization n) {
  switch (n) {
    case Normalization::vol_sum: return "vol_sum";
    case Normalization::vol_min: return "vol_min";
    case Normalization::vol_max: return "vol_max";
    case Normalization::plain: return "plain";
  }
  return "?";
}

std::string_view to_string(Selection s) {
  switch (s) {
    case Selection::naive: return "naive";
    case Selection::sort: return "sort";
    case Selection::std_dev: return "std";
  }
  return "?";
}

std::string objective_name(Normalization norm, Selection variant) {
  return std::string(to_string(norm)) + "_" + std::string(to_string(variant));
}

namespace {

void check_assignment(const SparseDigraph& g, const Matrix& p) {
  if (p.rows() != g.num_nodes())
    throw InputError("assignment matrix has " + std::to_string(p.rows()) + " rows for a " +
                     std::to_string(g.num_nodes()) + "-node graph");
}

double sign(double x) { return x > 0.0 ? 1.0 : (x < 0.0 ? -1.0 : 0.0); }

// max over pairs k < l of min(VOL_k, VOL_l), i.e. the second largest volume.
// Returns the value and the index that attains it.
std::pair<double, int> max_min_volume(const Vector& volumes) {
  const int k = static_cast<int>(volumes.size());
  std::vector<int> order(static_cast<std::size_t>(k));
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(),
                   [&](int a, int b) { return volumes[a] > volumes[b]; });
  if (k < 2) return {0.0, -1};
  return {volumes[order[1]], order[1]};
}

}  // namespace

Matrix probabilistic_cut(const SparseDigraph& g, const Matrix& p) {
  check_assignment(g, p);
  Matrix ap(p.rows(), p.cols());
  kernels::spmm(g.out(), p, ap);
  return kernels::gram(p, ap);
}

Vector probabilistic_volume(const SparseDigraph& g, const Matrix& p) {
  check_assignment(g, p);
  const Vector deg = g.total_degree();
  return p.transpose() * deg;
}

Matrix pairwise_ci(const Matrix& cuts, const Vector& volumes, Normalization norm) {
  const Index k_count = cuts.rows();
  if (cuts.cols() != k_count || volumes.size() != k_count)
    throw InputError("pairwise_ci: cuts and volumes disagree on K");
  Matrix ci = Matrix::Zero(k_count, k_count);
  const double max_min = max_min_volume(volumes).first;
  for (Index k = 0; k < k_count; ++k)
    for (Index l = k + 1; l < k_count; ++l) {
      const double flow = std::abs(cuts(k, l) - cuts(l, k));
      const double total = cuts(k, l) + cuts(l, k);
      double value = 0.0;
      switch (norm) {
        case Normalization::vol_sum: {
          const double denom = volumes[k] + volumes[l];
          value = denom > 0.0 ? 2.0 * flow / denom : 0.0;
          break;
        }
        case Normalization::plain:
          value = total > 0.0 ? flow / total : 0.0;
          break;
        case Normalization::vol_min: {
          const double plain = total > 0.0 ? flow / total : 0.0;
          value = max_min > 0.0 ? plain * std::min(volumes[k], volumes[l]) / max_min : 0.0;
          break;
        }
        case Normalization::vol_max: {
          const double denom = std::max(volumes[k], volumes[l]);
          value = denom > 0.0 ? flow / denom : 0.0;
          break;
        }
      }
      ci(k, l) = value;
    }
  return ci;
}

std::vector<ClusterPair> select_pairs(const Matrix& ci, const Matrix& cuts, Selection variant,
                                      int beta) {
  const int k_count = static_cast<int>(ci.rows());
  std::vector<ClusterPair> all;
  for (int k = 0; k < k_count; ++k)
    for (int l = k + 1; l < k_count; ++l) all.push_back({k, l});

  switch (variant) {
    case Selection::naive:
      return all;
    case Selection::sort: {
      if (beta < 1 || beta > static_cast<int>(all.size()))
        throw InputError("sort selection needs 1 <= beta <= K(K-1)/2, got " + std::to_string(beta));
      std::stable_sort(all.begin(), all.end(), [&](const ClusterPair& a, const ClusterPair& b) {
        return ci(a.k, a.l) > ci(b.k, b.l);
      });
      all.resize(static_cast<std::size_t>(beta));
      return all;
    }
    case Selection::std_dev: {
      std::vector<ClusterPair> picked;
      for (const auto& pr : all) {
        const double diff = cuts(pr.k, pr.l) - cuts(pr.l, pr.k);
        const double total = cuts(pr.k, pr.l) + cuts(pr.l, pr.k);
        if (diff * diff > 9.0 * total) picked.push_back(pr);
      }
      return picked;
    }
  }
  return all;
}

Objective objective_from_scores(const Matrix& cuts, const Vector& volumes, Normalization norm,
                                Selection variant, int beta) {
  if (cuts.rows() < 2) throw InputError("imbalance objectives need K >= 2");
  const Matrix ci = pairwise_ci(cuts, volumes, norm);
  Objective out;
  out.applied = variant;
  out.pairs = select_pairs(ci, cuts, variant, beta);
  if (out.pairs.empty() && variant == Selection::std_dev) {
    out.applied = Selection::naive;
    out.pairs = select_pairs(ci, cuts, Selection::naive, beta);
  }
  double sum = 0.0;
  for (const auto& pr : out.pairs) sum += ci(pr.k, pr.l);
  out.value = sum / static_cast<double>(out.pairs.size());
  out.loss = 1.0 - out.value;
  return out;
}

Objective global_objective(const SparseDigraph& g, const Matrix& p, Normalization norm,
                           Selection variant, int beta) {
  return objective_from_scores(probabilistic_cut(g, p), probabilistic_volume(g, p), norm, variant,
                               beta);
}

ObjectiveTable all_objectives(const SparseDigraph& g, const Matrix& p, int beta) {
  const Matrix cuts = probabilistic_cut(g, p);
  const Vector volumes = probabilistic_volume(g, p);
  ObjectiveTable table{};
  for (std::size_t s = 0; s < kSelections.size(); ++s)
    for (std::size_t n = 0; n < kNormalizations.size(); ++n)
      table[s][n] = objective_from_scores(cuts, volumes, kNormalizations[n], kSelections[s], beta).value;
  return table;
}

ImbalanceGradient imbalance_loss_gradient(const SparseDigraph& g, const Matrix& p,
                                          Normalization norm, Selection variant, int beta) {
  check_assignment(g, p);
  const Index n = p.rows();
  const Index k_count = p.cols();

  Matrix ap(n, k_count);
  kernels::spmm(g.out(), p, ap);
  Matrix atp(n, k_count);
  kernels::spmm(g.in(), p, atp);
  const Matrix cuts = kernels::gram(p, ap);
  const Vector deg = g.total_degree();
  const Vector volumes = p.transpose() * deg;

  ImbalanceGradient out;
  out.objective = objective_from_scores(cuts, volumes, norm, variant, beta);

  // dL/dCI = -1/|pairs| for every selected pair; push through CI to the
  // cut matrix and the volume vector.
  const double scale = -1.0 / static_cast<double>(out.objective.pairs.size());
  Matrix d_cuts = Matrix::Zero(k_count, k_count);
  Vector d_vol = Vector::Zero(k_count);
  const auto [max_min, max_min_index] = max_min_volume(volumes);

  for (const auto& pr : out.objective.pairs) {
    const int k = pr.k;
    const int l = pr.l;
    const double diff = cuts(k, l) - cuts(l, k);
    const double flow = std::abs(diff);
    const double s = sign(diff);
    const double total = cuts(k, l) + cuts(l, k);
    switch (norm) {
      case Normalization::vol_sum: {
        const double denom = volumes[k] + volumes[l];
        if (!(denom > 0.0)) break;
        const double ci = 2.0 * flow / denom;
        d_cuts(k, l) += scale * 2.0 * s / denom;
        d_cuts(l, k) -= scale * 2.0 * s / denom;
        d_vol[k] -= scale * ci / denom;
        d_vol[l] -= scale * ci / denom;
        break;
      }
      case Normalization::plain: {
        if (!(total > 0.0)) break;
        const double inv = 1.0 / total;
        d_cuts(k, l) += scale * (s * inv - flow * inv * inv);
        d_cuts(l, k) += scale * (-s * inv - flow * inv * inv);
        break;
      }
      case Normalization::vol_min: {
        if (!(total > 0.0) || !(max_min > 0.0)) break;
        const double inv = 1.0 / total;
        const double plain = flow * inv;
        const int small = volumes[k] <= volumes[l] ? k : l;
        const double vmin = volumes[small];
        const double factor = vmin / max_min;
        d_cuts(k, l) += scale * factor * (s * inv - flow * inv * inv);
        d_cuts(l, k) += scale * factor * (-s * inv - flow * inv * inv);
        d_vol[small] += scale * plain / max_min;
        d_vol[max_min_index] -= scale * plain * vmin / (max_min * max_min);
        break;
      }
      case Normalization::vol_max: {
        const int big = volumes[k] >= volumes[l] ? k : l;
        const double denom = volumes[big];
        if (!(denom > 0.0)) break;
        d_cuts(k, l) += scale * s / denom;
        d_cuts(l, k) -= scale * s / denom;
        d_vol[big] -= scale * flow / (denom * denom);
        break;
      }
    }
  }

  // W = Pᵀ A P  =>  dP = A P dWᵀ + Aᵀ P dW;  VOL = Pᵀ deg  =>  dP += deg dVOLᵀ.
  out.grad_p = ap * d_cuts.transpose() + atp * d_cuts + deg * d_vol.transpose();
  return out;
}

NullThreshold null_threshold_check(std::span<const double> weights) {
  if (weights.empty()) throw InputError("null_threshold_check: no edges");
  double variance = 0.0;
  for (double w : weights) variance += w * w;
  return {variance, 3.0 * std::sqrt(variance)};
}

}  // namespace digrac
