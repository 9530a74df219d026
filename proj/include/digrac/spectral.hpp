#pragma once

#include <complex>
#include <cstdint>
#include <string_view>
#include <vector>

#include "digrac/graph.hpp"
#include "digrac/types.hpp"

namespace digrac {

enum class HermitianNormalization { none, random_walk };

HermitianNormalization parse_hermitian_normalization(std::string_view name);

/// H = i(A - Aᵀ), optionally scaled to D^{-1/2} H D^{-1/2}. Stored through
/// its real antisymmetric part S (H = iS), which is all the 2n×2n real
/// embedding [[0, -S], [S, 0]] needs.
class HermitianOperator {
 public:
  HermitianOperator(const SparseDigraph& g, HermitianNormalization normalization);

  Index size() const { return n_; }
  HermitianNormalization normalization() const { return normalization_; }

  /// y = M x for the 2n real embedding.
  void apply_embedding(const double* x, double* y) const;

  /// H v for complex v.
  Eigen::VectorXcd apply(const Eigen::VectorXcd& v) const;

  /// Dense n×n complex H. Tests and small graphs only.
  Eigen::MatrixXcd to_dense() const;
  /// Dense 2n×2n real embedding. Tests and small graphs only.
  Eigen::MatrixXd embedding_dense() const;

  /// Frobenius-based upper bound on the spectral norm.
  double norm_bound() const;

 private:
  Index n_;
  HermitianNormalization normalization_;
  Csr antisym_;  // S = scaled (A - Aᵀ), rows sorted
};

HermitianOperator build_hermitian(const SparseDigraph& g, HermitianNormalization normalization);

struct Eigenpairs {
  std::vector<double> values;             // descending |λ|, ties: positive first
  std::vector<Eigen::VectorXcd> vectors;  // unit 2-norm
  std::vector<double> residuals;          // ‖Hv - λv‖₂
  double norm_estimate = 0.0;             // ‖H‖₂ estimate (largest |Ritz value|)
};

struct LanczosOptions {
  double tolerance = 1e-10;  // relative to ‖H‖
  int max_restarts = 500;
  int subspace = 0;  // 0 picks a size from the request
  std::uint64_t seed = 0x5eed;
};

/// The K eigenpairs of H with largest |λ|, via thick-restart Lanczos on the
/// real symmetric embedding.
Eigenpairs top_k_eigenpairs(const HermitianOperator& op, int k, const LanczosOptions& options = {});

/// Stacked [Re v_1 .. Re v_K, Im v_1 .. Im v_K], each column standardized to
/// mean 0 and variance 1 (constant columns become 0).
Matrix make_features(const SparseDigraph& g, int k,
                     HermitianNormalization normalization = HermitianNormalization::random_walk);

/// In-place column standardization used by make_features.
void standardize_columns(Matrix& x);

struct KMeansResult {
  std::vector<int> labels;
  Matrix centers;
  double inertia = 0.0;
};

/// Lloyd iterations from k-means++ seeds; best of `restarts` by inertia.
KMeansResult kmeans(const Matrix& x, int k, int restarts, std::uint64_t seed, int max_iter = 300);

/// Herm / Herm_rw baseline: k-means on the Hermitian spectral embedding.
std::vector<int> hermitian_clustering(const SparseDigraph& g, int k,
                                      HermitianNormalization normalization, std::uint64_t seed,
                                      int restarts = 10);

}  // namespace digrac
