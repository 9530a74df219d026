#pragma once

#include <optional>
#include <span>
#include <vector>

#include "digrac/graph.hpp"
#include "digrac/imbalance.hpp"
#include "digrac/types.hpp"

namespace digrac {

/// Hubert-Arabie adjusted Rand index from the contingency table.
double adjusted_rand_index(std::span<const int> a, std::span<const int> b);

/// Mutual information normalized by the arithmetic mean of the two
/// entropies. Two single-cluster partitions score 1 (0/0 convention).
double normalized_mutual_information(std::span<const int> a, std::span<const int> b);

/// n×K one-hot matrix of hard labels in [0, K).
Matrix one_hot(std::span<const int> labels, int clusters);

/// F'(k, l) = W_kl / (W_kl + W_lk), or 0 when the pair has no flow.
Matrix predicted_flow_matrix(const SparseDigraph& g, const Matrix& p);
Matrix predicted_flow_matrix(const SparseDigraph& g, std::span<const int> labels, int clusters);

struct PartitionReport {
  ObjectiveTable objectives{};
  int beta = 1;
  std::optional<double> ari;
  std::optional<double> nmi;
  double size_ratio = 1.0;  // largest / smallest non-empty predicted cluster
  double size_std = 0.0;    // population std of predicted cluster sizes
  std::vector<Index> sizes;
  Matrix flow_matrix;
  Matrix cuts;
  Vector volumes;
};

PartitionReport report(const SparseDigraph& g, std::span<const int> prediction, int clusters,
                       int beta, std::span<const int> truth = {});

/// Soft-assignment variant: objectives use P directly, the shape statistics
/// and external indices use argmax(P).
PartitionReport report(const SparseDigraph& g, const Matrix& p, int beta,
                       std::span<const int> truth = {});

}  // namespace digrac
