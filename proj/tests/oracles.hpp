#pragma once

// Dense reference computations written directly from the defining formulas.
// Slow and O(n²) on purpose; only used on small instances.

#include <algorithm>
#include <cmath>
#include <random>
#include <vector>

#include "digrac/graph.hpp"
#include "digrac/imbalance.hpp"
#include "digrac/types.hpp"

namespace oracle {

using digrac::Index;
using digrac::Matrix;
using digrac::Vector;

inline digrac::SparseDigraph random_graph(int n, double density, std::mt19937_64& rng,
                                          bool weighted = true, bool self_loops = true) {
  std::bernoulli_distribution coin(density);
  std::uniform_real_distribution<double> weight(0.1, 3.0);
  std::vector<digrac::Edge> edges;
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) {
      if (i == j && !self_loops) continue;
      if (coin(rng)) edges.push_back({i, j, weighted ? weight(rng) : 1.0});
    }
  return digrac::SparseDigraph::from_edges(edges, n);
}

inline Matrix random_stochastic(int n, int k, std::mt19937_64& rng) {
  std::uniform_real_distribution<double> u(0.0, 1.0);
  Matrix p(n, k);
  for (int i = 0; i < n; ++i) {
    double sum = 0.0;
    for (int c = 0; c < k; ++c) sum += (p(i, c) = u(rng) + 1e-3);
    p.row(i) /= sum;
  }
  return p;
}

// W_kl = Σ_ij A_ij P_ik P_jl
inline Matrix cut(const Matrix& a, const Matrix& p) {
  const Index n = a.rows(), k = p.cols();
  Matrix w = Matrix::Zero(k, k);
  for (Index c = 0; c < k; ++c)
    for (Index d = 0; d < k; ++d)
      for (Index i = 0; i < n; ++i)
        for (Index j = 0; j < n; ++j) w(c, d) += a(i, j) * p(i, c) * p(j, d);
  return w;
}

// VOL_k = Σ_ij (A_ji + A_ij) P_jk
inline Vector volume(const Matrix& a, const Matrix& p) {
  const Index n = a.rows(), k = p.cols();
  Vector v = Vector::Zero(k);
  for (Index c = 0; c < k; ++c)
    for (Index i = 0; i < n; ++i)
      for (Index j = 0; j < n; ++j) v(c) += (a(j, i) + a(i, j)) * p(j, c);
  return v;
}

inline double ci(const Matrix& w, const Vector& vol, int k, int l, digrac::Normalization norm) {
  using digrac::Normalization;
  const double diff = std::abs(w(k, l) - w(l, k));
  auto safe = [](double num, double den) { return den > 0.0 ? num / den : 0.0; };
  switch (norm) {
    case Normalization::vol_sum:
      return safe(2.0 * diff, vol(k) + vol(l));
    case Normalization::plain:
      return safe(diff, w(k, l) + w(l, k));
    case Normalization::vol_max:
      return safe(diff, std::max(vol(k), vol(l)));
    case Normalization::vol_min: {
      double best = 0.0;
      for (Index a = 0; a < vol.size(); ++a)
        for (Index b = a + 1; b < vol.size(); ++b) best = std::max(best, std::min(vol(a), vol(b)));
      return safe(safe(diff, w(k, l) + w(l, k)) * std::min(vol(k), vol(l)), best);
    }
  }
  return 0.0;
}

// Mean CI over the selected pairs; std falls back to every pair.
inline double objective(const Matrix& w, const Vector& vol, digrac::Normalization norm,
                        digrac::Selection sel, int beta) {
  const int k = static_cast<int>(w.rows());
  struct Entry {
    double value;
    int a, b;
  };
  std::vector<Entry> all;
  for (int a = 0; a < k; ++a)
    for (int b = a + 1; b < k; ++b) all.push_back({ci(w, vol, a, b, norm), a, b});
  std::vector<Entry> chosen;
  if (sel == digrac::Selection::naive) {
    chosen = all;
  } else if (sel == digrac::Selection::sort) {
    // Selection sort by value, earlier pair wins ties.
    std::vector<bool> used(all.size(), false);
    for (int t = 0; t < beta; ++t) {
      int best = -1;
      for (int i = 0; i < static_cast<int>(all.size()); ++i)
        if (!used[i] && (best < 0 || all[i].value > all[best].value)) best = i;
      used[best] = true;
      chosen.push_back(all[best]);
    }
  } else {
    for (const Entry& e : all) {
      const double d = w(e.a, e.b) - w(e.b, e.a);
      if (d * d > 9.0 * (w(e.a, e.b) + w(e.b, e.a))) chosen.push_back(e);
    }
    if (chosen.empty()) chosen = all;
  }
  double sum = 0.0;
  for (const Entry& e : chosen) sum += e.value;
  return sum / static_cast<double>(chosen.size());
}

// D̃⁻¹(B + τI) with B = A or Aᵀ.
inline Matrix propagation(const Matrix& a, double tau, bool transpose) {
  Matrix b = transpose ? Matrix(a.transpose()) : a;
  b += tau * Matrix::Identity(a.rows(), a.cols());
  for (Index i = 0; i < b.rows(); ++i) {
    const double s = b.row(i).sum();
    if (s > 0.0) b.row(i) /= s;
  }
  return b;
}

// Σ ωᵢ Āⁱ H with explicit matrix powers.
inline Matrix dimpa(const Matrix& abar, const Matrix& h, const std::vector<double>& omega) {
  Matrix power = Matrix::Identity(abar.rows(), abar.cols());
  Matrix z = Matrix::Zero(h.rows(), h.cols());
  for (double w : omega) {
    z += w * power * h;
    power = power * abar;
  }
  return z;
}

// Eigenvalues by decreasing magnitude; ±λ pairs tie up to `tie` and the
// positive one comes first.
inline std::vector<double> sort_spectrum(std::vector<double> values, double tie) {
  std::sort(values.begin(), values.end(), [tie](double x, double y) {
    if (std::abs(std::abs(x) - std::abs(y)) > tie) return std::abs(x) > std::abs(y);
    return x > y;
  });
  return values;
}

// Adjusted Rand index by enumerating every pair of items.
inline double ari_pairs(const std::vector<int>& x, const std::vector<int>& y) {
  const std::size_t n = x.size();
  double both = 0, only_x = 0, only_y = 0, total = 0;
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = i + 1; j < n; ++j) {
      const bool sx = x[i] == x[j];
      const bool sy = y[i] == y[j];
      both += sx && sy;
      only_x += sx;
      only_y += sy;
      total += 1;
    }
  const double expected = only_x * only_y / total;
  const double maximum = 0.5 * (only_x + only_y);
  if (maximum == expected) return 1.0;
  return (both - expected) / (maximum - expected);
}

}  // namespace oracle
