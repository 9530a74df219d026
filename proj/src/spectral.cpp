#include "digrac/spectral.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <string>

#include <Eigen/Eigenvalues>

namespace digrac {

HermitianNormalization parse_hermitian_normalization(std::string_view name) {
  if (name == "none" || name == "herm") return HermitianNormalization::none;
  if (name == "random_walk" || name == "rw") return HermitianNormalization::random_walk;
  throw InputError("unknown Hermitian normalization '" + std::string(name) + "'");
}

HermitianOperator::HermitianOperator(const SparseDigraph& g, HermitianNormalization normalization)
    : n_(g.num_nodes()), normalization_(normalization) {
  struct Entry {
    NodeId row, col;
    double value;
  };
  std::vector<Entry> entries;
  entries.reserve(static_cast<std::size_t>(2 * g.num_edges()));
  for (const Edge& e : g.edges()) {
    if (e.src == e.dst) continue;  // cancels in A - Aᵀ
    entries.push_back({e.src, e.dst, e.weight});
    entries.push_back({e.dst, e.src, -e.weight});
  }
  std::sort(entries.begin(), entries.end(), [](const Entry& a, const Entry& b) {
    return a.row != b.row ? a.row < b.row : a.col < b.col;
  });

  Vector inv_sqrt_deg = Vector::Ones(n_);
  if (normalization == HermitianNormalization::random_walk && n_ > 0) {
    Vector deg = g.total_degree();
    const double reg = deg.mean() / static_cast<double>(n_);
    for (Index i = 0; i < n_; ++i) {
      const double d = deg[i] + reg;
      inv_sqrt_deg[i] = d > 0.0 ? 1.0 / std::sqrt(d) : 0.0;
    }
  }

  antisym_.offsets.assign(static_cast<std::size_t>(n_) + 1, 0);
  for (std::size_t k = 0; k < entries.size();) {
    double v = 0.0;
    std::size_t j = k;
    for (; j < entries.size() && entries[j].row == entries[k].row && entries[j].col == entries[k].col; ++j)
      v += entries[j].value;
    if (v != 0.0) {
      const NodeId r = entries[k].row;
      const NodeId c = entries[k].col;
      antisym_.cols.push_back(c);
      antisym_.weights.push_back(v * inv_sqrt_deg[r] * inv_sqrt_deg[c]);
      ++antisym_.offsets[static_cast<std::size_t>(r) + 1];
    }
    k = j;
  }
  std::partial_sum(antisym_.offsets.begin(), antisym_.offsets.end(), antisym_.offsets.begin());
}

void HermitianOperator::apply_embedding(const double* x, double* y) const {
  // [[0, -S], [S, 0]] [a; b] = [-S b; S a]
  const double* a = x;
  const double* b = x + n_;
  for (Index i = 0; i < n_; ++i) {
    double top = 0.0;
    double bottom = 0.0;
    for (Index e = antisym_.offsets[i]; e < antisym_.offsets[i + 1]; ++e) {
      const double w = antisym_.weights[e];
      top -= w * b[antisym_.cols[e]];
      bottom += w * a[antisym_.cols[e]];
    }
    y[i] = top;
    y[i + n_] = bottom;
  }
}

Eigen::VectorXcd HermitianOperator::apply(const Eigen::VectorXcd& v) const {
  const std::complex<double> unit(0.0, 1.0);
  Eigen::VectorXcd out = Eigen::VectorXcd::Zero(n_);
  for (Index i = 0; i < n_; ++i) {
    std::complex<double> acc = 0.0;
    for (Index e = antisym_.offsets[i]; e < antisym_.offsets[i + 1]; ++e)
      acc += antisym_.weights[e] * v[antisym_.cols[e]];
    out[i] = unit * acc;
  }
  return out;
}

Eigen::MatrixXcd HermitianOperator::to_dense() const {
  Eigen::MatrixXcd h = Eigen::MatrixXcd::Zero(n_, n_);
  for (Index i = 0; i < n_; ++i)
    for (Index e = antisym_.offsets[i]; e < antisym_.offsets[i + 1]; ++e)
      h(i, antisym_.cols[e]) = std::complex<double>(0.0, antisym_.weights[e]);
  return h;
}

Eigen::MatrixXd HermitianOperator::embedding_dense() const {
  Eigen::MatrixXd m = Eigen::MatrixXd::Zero(2 * n_, 2 * n_);
  for (Index i = 0; i < n_; ++i)
    for (Index e = antisym_.offsets[i]; e < antisym_.offsets[i + 1]; ++e) {
      const Index j = antisym_.cols[e];
      m(i, n_ + j) = -antisym_.weights[e];
      m(n_ + i, j) = antisym_.weights[e];
    }
  return m;
}

double HermitianOperator::norm_bound() const {
  double sq = 0.0;
  for (double w : antisym_.weights) sq += w * w;
  return std::sqrt(sq);
}

HermitianOperator build_hermitian(const SparseDigraph& g, HermitianNormalization normalization) {
  return HermitianOperator(g, normalization);
}

namespace {

// Descending |θ|, positive before negative on ties, then index.
std::vector<int> magnitude_order(const Eigen::VectorXd& theta) {
  std::vector<int> order(static_cast<std::size_t>(theta.size()));
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](int a, int b) {
    const double ma = std::abs(theta[a]);
    const double mb = std::abs(theta[b]);
    if (ma != mb) return ma > mb;
    return theta[a] > theta[b];
  });
  return order;
}

// Orthogonalizes v against the first `count` columns of basis (two passes of
// classical Gram-Schmidt) and returns the remaining norm.
double orthogonalize(const Eigen::MatrixXd& basis, Index count, Eigen::VectorXd& v) {
  for (int pass = 0; pass < 2; ++pass) {
    if (count == 0) break;
    const Eigen::VectorXd h = basis.leftCols(count).transpose() * v;
    v.noalias() -= basis.leftCols(count) * h;
  }
  return v.norm();
}

struct RitzResult {
  Eigen::VectorXd values;
  Eigen::MatrixXd vectors;  // N × nev
  Eigen::VectorXd residuals;
  double norm_estimate;
};

// Thick-restart Lanczos with full reorthogonalization on the embedding.
// The projected matrix is formed explicitly as Vᵀ(MV), which keeps the
// Rayleigh-Ritz step exact across restarts.
RitzResult restarted_lanczos(const HermitianOperator& op, int nev, const LanczosOptions& options) {
  const Index dim = 2 * op.size();
  const Index m = std::min<Index>(dim, options.subspace > 0 ? options.subspace
                                                          : std::max(2 * nev + 20, 40));
  Eigen::MatrixXd basis(dim, m);
  Eigen::MatrixXd image(dim, m);
  Rng rng(options.seed);
  std::normal_distribution<double> normal;
  auto random_unit = [&](Index filled) {
    for (int attempt = 0; attempt < 8; ++attempt) {
      Eigen::VectorXd v(dim);
      for (Index i = 0; i < dim; ++i) v[i] = normal(rng);
      const double nrm = orthogonalize(basis, filled, v);
      if (nrm > 1e-8) return Eigen::VectorXd(v / nrm);
    }
    throw NumericalError("lanczos: could not extend the basis");
  };

  basis.col(0) = random_unit(0);
  Index filled = 0;  // columns with their image computed
  double norm_estimate = op.norm_bound();
  double best_residual = std::numeric_limits<double>::infinity();

  for (int cycle = 0; cycle <= options.max_restarts; ++cycle) {
    for (Index j = filled; j < m; ++j) {
      op.apply_embedding(basis.col(j).data(), image.col(j).data());
      if (j + 1 < m) {
        Eigen::VectorXd w = image.col(j);
        const double nrm = orthogonalize(basis, j + 1, w);
        if (nrm > 1e-12 * std::max(norm_estimate, 1e-300))
          basis.col(j + 1) = w / nrm;
        else
          basis.col(j + 1) = random_unit(j + 1);  // invariant subspace reached
      }
    }
    filled = m;

    Eigen::MatrixXd projected = basis.transpose() * image;
    projected = 0.5 * (projected + projected.transpose()).eval();
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(projected);
    const Eigen::VectorXd& theta = solver.eigenvalues();
    const std::vector<int> order = magnitude_order(theta);
    norm_estimate = std::abs(theta[order[0]]);

    const int keep = static_cast<int>(std::min<Index>(nev, m));
    Eigen::MatrixXd coeffs(m, keep);
    Eigen::VectorXd values(keep);
    for (int i = 0; i < keep; ++i) {
      coeffs.col(i) = solver.eigenvectors().col(order[i]);
      values[i] = theta[order[i]];
    }
    Eigen::MatrixXd ritz = basis * coeffs;
    Eigen::MatrixXd ritz_image = image * coeffs;
    Eigen::VectorXd residuals(keep);
    for (int i = 0; i < keep; ++i)
      residuals[i] = (ritz_image.col(i) - values[i] * ritz.col(i)).norm();
    const double worst = residuals.size() ? residuals.maxCoeff() : 0.0;
    best_residual = std::min(best_residual, worst);

    if (worst <= options.tolerance * norm_estimate || m == dim) {
      return {values, ritz, residuals, norm_estimate};
    }

    // Restart: keep more Ritz vectors than requested to speed convergence,
    // and continue the Krylov sequence from the residual direction.
    const int extra = static_cast<int>(std::min<Index>(m - 1, keep + (m - keep) / 2));
    Eigen::MatrixXd keep_coeffs(m, extra);
    for (int i = 0; i < extra; ++i) keep_coeffs.col(i) = solver.eigenvectors().col(order[i]);
    Eigen::VectorXd next = image.col(m - 1);
    orthogonalize(basis, m, next);
    const Eigen::MatrixXd new_basis = basis * keep_coeffs;
    const Eigen::MatrixXd new_image = image * keep_coeffs;
    basis.leftCols(extra) = new_basis;
    image.leftCols(extra) = new_image;
    const double nrm = orthogonalize(basis, extra, next);
    if (nrm > 1e-12 * std::max(norm_estimate, 1e-300))
      basis.col(extra) = next / nrm;
    else
      basis.col(extra) = random_unit(extra);
    filled = extra;
  }
  throw NumericalError("lanczos: no convergence after " + std::to_string(options.max_restarts) +
                       " restarts; best residual " + std::to_string(best_residual));
}

}  // namespace

Eigenpairs top_k_eigenpairs(const HermitianOperator& op, int k, const LanczosOptions& options) {
  const Index n = op.size();
  if (k < 1 || k > n) throw InputError("top_k_eigenpairs: need 1 <= K <= n");

  // The embedding doubles every eigenvalue and the spectrum pairs ±λ, so a
  // magnitude level can take four Ritz values; ask for enough that the K-th
  // level is complete.
  int nev = std::min<int>(2 * k + 4, static_cast<int>(2 * n));
  while (true) {
    const RitzResult ritz = restarted_lanczos(op, nev, options);

    // Each complex eigenvector v of H shows up in the embedding as
    // [Re v; Im v] and as [-Im v; Re v] = i·v; keep one per complex line,
    // by modified Gram-Schmidt over C in Ritz order.
    Eigenpairs out;
    out.norm_estimate = ritz.norm_estimate;
    std::vector<Eigen::VectorXcd> accepted;
    std::vector<double> accepted_values;
    for (Index i = 0; i < ritz.vectors.cols(); ++i) {
      Eigen::VectorXcd v(n);
      for (Index r = 0; r < n; ++r) v[r] = {ritz.vectors(r, i), ritz.vectors(n + r, i)};
      for (const auto& u : accepted) v -= u.dot(v) * u;
      const double nrm = v.norm();
      if (nrm < 0.5) continue;
      v /= nrm;
      accepted.push_back(v);
      accepted_values.push_back(ritz.values[i]);
    }

    if (static_cast<int>(accepted.size()) >= k || nev >= 2 * n) {
      std::vector<int> order(accepted.size());
      std::iota(order.begin(), order.end(), 0);
      // The spectrum is symmetric (H̄ = -H), so ±λ tie in magnitude up to
      // rounding; the positive one goes first.
      const double tie = 1e-9 * std::max(1.0, ritz.norm_estimate);
      std::stable_sort(order.begin(), order.end(), [&](int a, int b) {
        const double ma = std::abs(accepted_values[a]);
        const double mb = std::abs(accepted_values[b]);
        if (std::abs(ma - mb) > tie) return ma > mb;
        return accepted_values[a] > accepted_values[b];
      });
      const int take = std::min<int>(k, static_cast<int>(order.size()));
      for (int t = 0; t < take; ++t) {
        Eigen::VectorXcd v = accepted[order[t]];
        // Fix the phase: largest-magnitude entry becomes real positive.
        Index pivot = 0;
        v.cwiseAbs().maxCoeff(&pivot);
        if (std::abs(v[pivot]) > 0.0) v *= std::conj(v[pivot]) / std::abs(v[pivot]);
        const Eigen::VectorXcd hv = op.apply(v);
        const double lambda = v.dot(hv).real();
        out.values.push_back(lambda);
        out.residuals.push_back((hv - lambda * v).norm());
        out.vectors.push_back(std::move(v));
      }
      if (take < k)
        throw NumericalError("top_k_eigenpairs: found only " + std::to_string(take) +
                             " distinct eigenvectors");
      return out;
    }
    nev = std::min<int>(2 * nev, static_cast<int>(2 * n));
  }
}

void standardize_columns(Matrix& x) {
  const Index n = x.rows();
  if (n == 0) return;
  for (Index c = 0; c < x.cols(); ++c) {
    const double mean = x.col(c).mean();
    x.col(c).array() -= mean;
    const double sd = std::sqrt(x.col(c).squaredNorm() / static_cast<double>(n));
    const double scale = std::max(1.0, std::abs(mean) + x.col(c).cwiseAbs().maxCoeff());
    if (sd <= 1e-12 * scale)
      x.col(c).setZero();
    else
      x.col(c) /= sd;
  }
}

Matrix make_features(const SparseDigraph& g, int k, HermitianNormalization normalization) {
  const Index n = g.num_nodes();
  const HermitianOperator op(g, normalization);
  Matrix x = Matrix::Zero(n, 2 * k);
  const double scale = op.norm_bound();
  if (scale == 0.0) return x;  // H = 0: no directional signal at all
  const Eigenpairs pairs = top_k_eigenpairs(op, k);
  for (int i = 0; i < k; ++i) {
    // Null-space eigenvectors are arbitrary; they carry no signal.
    if (std::abs(pairs.values[i]) <= 1e-10 * scale) continue;
    for (Index r = 0; r < n; ++r) {
      x(r, i) = pairs.vectors[i][r].real();
      x(r, k + i) = pairs.vectors[i][r].imag();
    }
  }
  standardize_columns(x);
  return x;
}

namespace {

double squared_distance(const Matrix& x, Index row, const Matrix& centers, Index c) {
  return (x.row(row) - centers.row(c)).squaredNorm();
}

Index count_distinct_rows(const Matrix& x) {
  std::vector<Index> rows(static_cast<std::size_t>(x.rows()));
  std::iota(rows.begin(), rows.end(), 0);
  auto less = [&](Index a, Index b) {
    for (Index c = 0; c < x.cols(); ++c)
      if (x(a, c) != x(b, c)) return x(a, c) < x(b, c);
    return false;
  };
  std::sort(rows.begin(), rows.end(), less);
  Index distinct = rows.empty() ? 0 : 1;
  for (std::size_t i = 1; i < rows.size(); ++i)
    if (less(rows[i - 1], rows[i])) ++distinct;
  return distinct;
}

KMeansResult lloyd(const Matrix& x, int k, Rng& rng, int max_iter) {
  const Index n = x.rows();
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  Matrix centers(k, x.cols());

  // k-means++ seeding.
  std::uniform_int_distribution<Index> pick(0, n - 1);
  centers.row(0) = x.row(pick(rng));
  Vector nearest(n);
  for (Index i = 0; i < n; ++i) nearest[i] = squared_distance(x, i, centers, 0);
  for (int c = 1; c < k; ++c) {
    const double total = nearest.sum();
    Index chosen = 0;
    if (total > 0.0) {
      double target = unit(rng) * total;
      chosen = n - 1;
      for (Index i = 0; i < n; ++i) {
        target -= nearest[i];
        if (target < 0.0 && nearest[i] > 0.0) {
          chosen = i;
          break;
        }
      }
      while (nearest[chosen] == 0.0 && chosen > 0) --chosen;
    }
    centers.row(c) = x.row(chosen);
    for (Index i = 0; i < n; ++i) nearest[i] = std::min(nearest[i], squared_distance(x, i, centers, c));
  }

  KMeansResult result;
  result.labels.assign(static_cast<std::size_t>(n), -1);
  for (int iter = 0; iter < max_iter; ++iter) {
    bool changed = false;
    for (Index i = 0; i < n; ++i) {
      int best = 0;
      double best_d = squared_distance(x, i, centers, 0);
      for (int c = 1; c < k; ++c) {
        const double d = squared_distance(x, i, centers, c);
        if (d < best_d) {
          best_d = d;
          best = c;
        }
      }
      if (result.labels[i] != best) {
        result.labels[i] = best;
        changed = true;
      }
    }
    if (!changed && iter > 0) break;

    Matrix sums = Matrix::Zero(k, x.cols());
    std::vector<Index> counts(static_cast<std::size_t>(k), 0);
    for (Index i = 0; i < n; ++i) {
      sums.row(result.labels[i]) += x.row(i);
      ++counts[result.labels[i]];
    }
    for (int c = 0; c < k; ++c) {
      if (counts[c] > 0) {
        centers.row(c) = sums.row(c) / static_cast<double>(counts[c]);
        continue;
      }
      // Empty cluster: move its center onto the worst-fitted point.
      Index far = 0;
      double far_d = -1.0;
      for (Index i = 0; i < n; ++i) {
        const double d = squared_distance(x, i, centers, result.labels[i]);
        if (d > far_d) {
          far_d = d;
          far = i;
        }
      }
      centers.row(c) = x.row(far);
      result.labels[far] = c;
      changed = true;
    }
  }
  result.inertia = 0.0;
  for (Index i = 0; i < n; ++i) result.inertia += squared_distance(x, i, centers, result.labels[i]);
  result.centers = std::move(centers);
  return result;
}

}  // namespace

KMeansResult kmeans(const Matrix& x, int k, int restarts, std::uint64_t seed, int max_iter) {
  if (k < 1 || k > x.rows()) throw InputError("kmeans: need 1 <= K <= n");
  if (count_distinct_rows(x) < k) throw InputError("kmeans: fewer distinct rows than clusters");
  KMeansResult best;
  best.inertia = std::numeric_limits<double>::infinity();
  for (int r = 0; r < std::max(restarts, 1); ++r) {
    Rng rng(derive_seed(seed, static_cast<std::uint64_t>(r)));
    KMeansResult run = lloyd(x, k, rng, max_iter);
    if (run.inertia < best.inertia) best = std::move(run);
  }
  return best;
}

std::vector<int> hermitian_clustering(const SparseDigraph& g, int k,
                                      HermitianNormalization normalization, std::uint64_t seed,
                                      int restarts) {
  const Matrix features = make_features(g, k, normalization);
  return kmeans(features, k, restarts, seed).labels;
}

}  // namespace digrac
