#pragma once

#include <cstdint>
#include <limits>
#include <span>
#include <string>
#include <vector>

#include "digrac/graph.hpp"
#include "digrac/imbalance.hpp"
#include "digrac/model.hpp"
#include "digrac/types.hpp"

namespace digrac {

struct SplitFractions {
  double test = 0.1;
  double validation = 0.1;
};

struct Splits {
  std::vector<NodeId> train;
  std::vector<NodeId> validation;
  std::vector<NodeId> test;
  std::vector<NodeId> seed;  // subset of train with known labels
  double seed_ratio = 0.0;
};

/// Per-cluster stratified split: ⌈test·|C|⌉ test nodes, ⌈validation·|C|⌉
/// validation nodes, the rest train; seeds are drawn from each cluster's
/// train part. Without labels the whole node set is one stratum.
Splits make_splits(Index n, const std::vector<int>* labels, const SplitFractions& fractions,
                   double seed_ratio, Rng& rng);

struct Triplet {
  NodeId anchor;
  NodeId positive;
  NodeId negative;
};

struct TripletSample {
  std::vector<Triplet> triplets;
  // Some seed cluster had a single member and could not anchor triplets.
  bool skipped_singleton_cluster = false;
};

/// Draws `count` (anchor, same-cluster, other-cluster) triplets over
/// `seeds` (indices into the rows of P / Z) with labels `seed_labels`.
TripletSample sample_triplets(std::span<const NodeId> seeds, std::span<const int> seed_labels,
                              std::size_t count, Rng& rng);

/// min(10 |seeds|, 5000).
std::size_t default_triplet_count(std::size_t seeds);

struct SupervisedLoss {
  double cross_entropy = 0.0;
  double triplet = 0.0;
  Matrix grad_logits;  // d L_CE / d logits
  Matrix grad_z;       // d L_triplet / d Z
};

/// L_CE = -mean log P[i, y_i]; L_triplet = mean [CS(a, n) - CS(a, p)]₊.
SupervisedLoss supervised_losses(const Matrix& p, const Matrix& z, std::span<const NodeId> seeds,
                                 std::span<const int> seed_labels,
                                 std::span<const Triplet> triplets);

/// Cosine similarity; 0 when either vector vanishes.
double cosine_similarity(const Eigen::Ref<const Eigen::RowVectorXd>& u,
                         const Eigen::Ref<const Eigen::RowVectorXd>& v);

struct LossSpec {
  Normalization norm = Normalization::vol_sum;
  Selection variant = Selection::sort;
  int beta = 3;
  double gamma_s = 50.0;
  double gamma_t = 0.1;
};

/// Seed supervision expressed in the row indexing of the forward pass.
struct SeedSupervision {
  std::vector<NodeId> nodes;
  std::vector<int> labels;
  std::vector<Triplet> triplets;
};

struct LossBreakdown {
  double total = 0.0;
  double imbalance = 0.0;
  double cross_entropy = 0.0;
  double triplet = 0.0;
  Objective objective;
};

struct Backprop {
  LossBreakdown loss;
  ModelParams grad;
};

/// Exact gradient of L_imbalance + γ_s (L_CE + γ_t L_triplet) with respect to
/// every parameter. `seeds` may be null (pure self-supervision).
Backprop backward(const Dimpa& model, const ForwardTrace& trace, const ModelParams& params,
                  const SparseDigraph& graph, const LossSpec& spec, const SeedSupervision* seeds);

/// Loss only, same composition as backward. Used by gradient checks.
LossBreakdown evaluate_loss(const Dimpa& model, const Matrix& x, const ModelParams& params,
                            const SparseDigraph& graph, const LossSpec& spec,
                            const SeedSupervision* seeds);

/// Adam with coupled L2 weight decay (decay·θ added to the gradient).
class Adam {
 public:
  Adam(const ModelParams& like, double lr, double weight_decay, double beta1 = 0.9,
       double beta2 = 0.999, double eps = 1e-8);

  void step(ModelParams& params, const ModelParams& grad);
  int steps() const { return t_; }

 private:
  ModelParams m_;
  ModelParams v_;
  double lr_, weight_decay_, beta1_, beta2_, eps_;
  int t_ = 0;
};

struct TrainConfig {
  int max_epochs = 1000;
  int patience = 200;
  double lr = 0.01;
  double weight_decay = 5e-4;
  LossSpec loss;
  int std_warmup_epochs = 50;
  int warmup_beta = 3;
  double tau = 0.5;
  std::uint64_t seed = 0;
};

struct EpochRecord {
  int epoch = 0;
  double train_loss = 0.0;
  double val_objective = 0.0;
  double test_ari = std::numeric_limits<double>::quiet_NaN();
  // Variant used for the training loss: "sort", "std", "naive", or
  // "sort(warmup)" / "naive(fallback)" under the std protocol.
  std::string selection;
  int beta = 0;
};

struct TrainResult {
  ModelParams best;
  int best_epoch = -1;
  double best_val_objective = -std::numeric_limits<double>::infinity();
  std::vector<EpochRecord> log;
  bool stopped_early = false;
  bool triplets_skipped = false;
};

/// Full-batch training on the subgraph induced by the train nodes, model
/// selection on the validation-induced subgraph objective, early stopping
/// after `patience` epochs without a strict improvement.
TrainResult train(const SparseDigraph& graph, const Matrix& features, ModelParams params,
                  const Splits& splits, const TrainConfig& config,
                  const std::vector<int>* labels = nullptr);

/// Row-wise argmax of P.
std::vector<int> argmax_labels(const Matrix& p);

}  // namespace digrac
