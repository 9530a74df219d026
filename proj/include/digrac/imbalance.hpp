#pragma once

#include <array>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "digrac/graph.hpp"
#include "digrac/types.hpp"

namespace digrac {

/// Pairwise cut-imbalance normalizations.
enum class Normalization { vol_sum, vol_min, vol_max, plain };

/// Which cluster pairs enter the global score.
enum class Selection { naive, sort, std_dev };

Normalization parse_normalization(std::string_view name);
Selection parse_selection(std::string_view name);
std::string_view to_string(Normalization n);
std::string_view to_string(Selection s);

inline constexpr std::array<Normalization, 4> kNormalizations = {
    Normalization::vol_sum, Normalization::vol_min, Normalization::vol_max, Normalization::plain};
inline constexpr std::array<Selection, 3> kSelections = {Selection::sort, Selection::std_dev,
                                                         Selection::naive};

struct ClusterPair {
  int k;
  int l;
  bool operator==(const ClusterPair&) const = default;
};

/// W(C_k, C_l) = P_(:,k)ᵀ A P_(:,l), as a K×K matrix.
Matrix probabilistic_cut(const SparseDigraph& g, const Matrix& p);

/// VOL(C_k) = Σ_ij (A_ji + A_ij) P_jk.
Vector probabilistic_volume(const SparseDigraph& g, const Matrix& p);

/// Upper-triangular K×K table of CI(k, l) for k < l. Entries whose
/// denominator vanishes are 0.
Matrix pairwise_ci(const Matrix& cuts, const Vector& volumes, Normalization norm);

/// Pairs k < l chosen by `variant`. For sort, the β largest CI values win
/// with ties broken by (k, l) order. For std, (W_kl - W_lk)² > 9(W_kl + W_lk)
/// must hold strictly; the result may be empty.
std::vector<ClusterPair> select_pairs(const Matrix& ci, const Matrix& cuts, Selection variant,
                                      int beta = 1);

/// A global score O with its loss 1 - O.
struct Objective {
  double value = 0.0;
  double loss = 1.0;
  std::vector<ClusterPair> pairs;
  // The variant actually applied; std degrades to naive on an empty pick.
  Selection applied = Selection::naive;
};

/// Mean CI over the selected pairs, computed from cuts and volumes.
Objective objective_from_scores(const Matrix& cuts, const Vector& volumes, Normalization norm,
                                Selection variant, int beta);

Objective global_objective(const SparseDigraph& g, const Matrix& p, Normalization norm,
                           Selection variant, int beta);

/// All twelve (normalization, selection) scores, indexed
/// [selection][normalization] in the order of kSelections / kNormalizations.
using ObjectiveTable = std::array<std::array<double, 4>, 3>;
ObjectiveTable all_objectives(const SparseDigraph& g, const Matrix& p, int beta);

std::string objective_name(Normalization norm, Selection variant);

/// Loss value plus dL/dP. Pair selection is held fixed; |x| has derivative 0
/// at 0; vanishing denominators contribute neither value nor gradient.
struct ImbalanceGradient {
  Objective objective;
  Matrix grad_p;
};

ImbalanceGradient imbalance_loss_gradient(const SparseDigraph& g, const Matrix& p,
                                          Normalization norm, Selection variant, int beta);

struct NullThreshold {
  double variance;  // ‖w‖²
  double bound;     // 3‖w‖
};

/// Variance of W_kl - W_lk when every between-cluster edge has a uniformly
/// random direction, and the matching 3σ bound.
NullThreshold null_threshold_check(std::span<const double> weights);

}  // namespace digrac
