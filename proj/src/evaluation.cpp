#include "digrac/evaluation.hpp"

#include <algorithm>
#include <cmath>
#include <map>

#include "digrac/training.hpp"

namespace digrac {

namespace {

struct Contingency {
  std::map<std::pair<int, int>, double> joint;
  std::map<int, double> rows;
  std::map<int, double> cols;
  double n = 0.0;
};

Contingency contingency(std::span<const int> a, std::span<const int> b) {
  if (a.size() != b.size()) throw InputError("partition comparison: length mismatch");
  Contingency t;
  for (std::size_t i = 0; i < a.size(); ++i) {
    t.joint[{a[i], b[i]}] += 1.0;
    t.rows[a[i]] += 1.0;
    t.cols[b[i]] += 1.0;
  }
  t.n = static_cast<double>(a.size());
  return t;
}

double choose2(double x) { return 0.5 * x * (x - 1.0); }

}  // namespace

double adjusted_rand_index(std::span<const int> a, std::span<const int> b) {
  if (a.size() < 2) throw InputError("adjusted_rand_index: need at least two items");
  const Contingency t = contingency(a, b);
  double sum_joint = 0.0;
  for (const auto& [key, count] : t.joint) sum_joint += choose2(count);
  double sum_rows = 0.0;
  for (const auto& [key, count] : t.rows) sum_rows += choose2(count);
  double sum_cols = 0.0;
  for (const auto& [key, count] : t.cols) sum_cols += choose2(count);
  const double total = choose2(t.n);
  const double expected = sum_rows * sum_cols / total;
  const double maximum = 0.5 * (sum_rows + sum_cols);
  if (maximum == expected) return 1.0;  // both partitions trivial and equal in shape
  return (sum_joint - expected) / (maximum - expected);
}

double normalized_mutual_information(std::span<const int> a, std::span<const int> b) {
  const Contingency t = contingency(a, b);
  if (t.n == 0.0) throw InputError("normalized_mutual_information: empty partitions");
  auto entropy = [&](const std::map<int, double>& marginal) {
    double h = 0.0;
    for (const auto& [key, count] : marginal) {
      const double q = count / t.n;
      h -= q * std::log(q);
    }
    return h;
  };
  const double ha = entropy(t.rows);
  const double hb = entropy(t.cols);
  double mi = 0.0;
  for (const auto& [key, count] : t.joint) {
    const double pij = count / t.n;
    mi += pij * std::log(pij / (t.rows.at(key.first) / t.n * t.cols.at(key.second) / t.n));
  }
  const double mean = 0.5 * (ha + hb);
  if (mean == 0.0) return 1.0;
  return std::clamp(mi / mean, 0.0, 1.0);
}

Matrix one_hot(std::span<const int> labels, int clusters) {
  Matrix p = Matrix::Zero(static_cast<Index>(labels.size()), clusters);
  for (std::size_t i = 0; i < labels.size(); ++i) {
    if (labels[i] < 0 || labels[i] >= clusters)
      throw InputError("label " + std::to_string(labels[i]) + " outside [0, K)");
    p(static_cast<Index>(i), labels[i]) = 1.0;
  }
  return p;
}

Matrix predicted_flow_matrix(const SparseDigraph& g, const Matrix& p) {
  const Matrix w = probabilistic_cut(g, p);
  const Index k_count = w.rows();
  Matrix f = Matrix::Zero(k_count, k_count);
  for (Index k = 0; k < k_count; ++k)
    for (Index l = 0; l < k_count; ++l) {
      const double total = w(k, l) + w(l, k);
      if (total > 0.0) f(k, l) = w(k, l) / total;
    }
  return f;
}

Matrix predicted_flow_matrix(const SparseDigraph& g, std::span<const int> labels, int clusters) {
  return predicted_flow_matrix(g, one_hot(labels, clusters));
}

namespace {

PartitionReport build_report(const SparseDigraph& g, const Matrix& p,
                             std::span<const int> hard, int beta, std::span<const int> truth) {
  const int k_count = static_cast<int>(p.cols());
  PartitionReport out;
  out.beta = beta;
  out.objectives = all_objectives(g, p, beta);
  out.cuts = probabilistic_cut(g, p);
  out.volumes = probabilistic_volume(g, p);
  out.flow_matrix = predicted_flow_matrix(g, p);

  out.sizes.assign(static_cast<std::size_t>(k_count), 0);
  for (int label : hard) ++out.sizes[static_cast<std::size_t>(label)];
  Index largest = 0;
  Index smallest = std::numeric_limits<Index>::max();
  double mean = 0.0;
  for (Index s : out.sizes) {
    largest = std::max(largest, s);
    if (s > 0) smallest = std::min(smallest, s);
    mean += static_cast<double>(s);
  }
  mean /= k_count;
  double var = 0.0;
  for (Index s : out.sizes) var += (static_cast<double>(s) - mean) * (static_cast<double>(s) - mean);
  out.size_std = std::sqrt(var / k_count);
  out.size_ratio = smallest == std::numeric_limits<Index>::max()
                       ? 1.0
                       : static_cast<double>(largest) / static_cast<double>(smallest);

  if (!truth.empty()) {
    if (truth.size() != hard.size()) throw InputError("report: truth and prediction lengths differ");
    out.ari = adjusted_rand_index(hard, truth);
    out.nmi = normalized_mutual_information(hard, truth);
  }
  return out;
}

}  // namespace

PartitionReport report(const SparseDigraph& g, std::span<const int> prediction, int clusters,
                       int beta, std::span<const int> truth) {
  if (static_cast<Index>(prediction.size()) != g.num_nodes())
    throw InputError("report: prediction length does not match the graph");
  return build_report(g, one_hot(prediction, clusters), prediction, beta, truth);
}

PartitionReport report(const SparseDigraph& g, const Matrix& p, int beta,
                       std::span<const int> truth) {
  const std::vector<int> hard = argmax_labels(p);
  return build_report(g, p, hard, beta, truth);
}

}  // namespace digrac
