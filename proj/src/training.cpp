#include "digrac/training.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <sstream>

#include "digrac/evaluation.hpp"

namespace digrac {

Splits make_splits(Index n, const std::vector<int>* labels, const SplitFractions& fractions,
                   double seed_ratio, Rng& rng) {
  if (n <= 0) throw InputError("make_splits: empty node set");
  if (fractions.test < 0.0 || fractions.validation < 0.0 ||
      fractions.test + fractions.validation > 1.0)
    throw InputError("make_splits: fractions must be non-negative and sum to at most 1");
  if (seed_ratio < 0.0 || seed_ratio > 1.0)
    throw InputError("make_splits: seed ratio must lie in [0, 1]");
  if (seed_ratio > 0.0 && labels == nullptr)
    throw InputError("make_splits: seed nodes need labels");
  if (labels != nullptr && static_cast<Index>(labels->size()) != n)
    throw InputError("make_splits: label count does not match node count");

  std::map<int, std::vector<NodeId>> strata;
  for (Index i = 0; i < n; ++i)
    strata[labels ? (*labels)[static_cast<std::size_t>(i)] : 0].push_back(static_cast<NodeId>(i));

  // ceil with a small guard so 0.1·30 does not round up to 4.
  auto ceil_count = [](double x) { return static_cast<std::size_t>(std::ceil(x - 1e-9)); };

  Splits s;
  s.seed_ratio = seed_ratio;
  for (auto& [label, members] : strata) {
    std::shuffle(members.begin(), members.end(), rng);
    const double size = static_cast<double>(members.size());
    const std::size_t t = ceil_count(fractions.test * size);
    const std::size_t v = ceil_count(fractions.validation * size);
    if (t + v > members.size()) {
      std::ostringstream msg;
      msg << "make_splits: cluster " << label << " has " << members.size()
          << " nodes, fewer than the " << t + v << " required for test and validation";
      throw InputError(msg.str());
    }
    s.test.insert(s.test.end(), members.begin(), members.begin() + static_cast<std::ptrdiff_t>(t));
    s.validation.insert(s.validation.end(), members.begin() + static_cast<std::ptrdiff_t>(t),
                        members.begin() + static_cast<std::ptrdiff_t>(t + v));
    const auto train_begin = members.begin() + static_cast<std::ptrdiff_t>(t + v);
    const std::size_t train_count = members.size() - t - v;
    s.train.insert(s.train.end(), train_begin, members.end());
    const auto seeds = static_cast<std::size_t>(
        std::lround(seed_ratio * static_cast<double>(train_count)));
    // The train block is already shuffled, so its prefix is a uniform draw.
    s.seed.insert(s.seed.end(), train_begin,
                  train_begin + static_cast<std::ptrdiff_t>(std::min(seeds, train_count)));
  }
  std::sort(s.train.begin(), s.train.end());
  std::sort(s.validation.begin(), s.validation.end());
  std::sort(s.test.begin(), s.test.end());
  std::sort(s.seed.begin(), s.seed.end());
  return s;
}

std::size_t default_triplet_count(std::size_t seeds) { return std::min<std::size_t>(10 * seeds, 5000); }

TripletSample sample_triplets(std::span<const NodeId> seeds, std::span<const int> seed_labels,
                              std::size_t count, Rng& rng) {
  if (seeds.size() != seed_labels.size())
    throw InputError("sample_triplets: seeds and labels differ in length");
  TripletSample out;
  std::map<int, std::vector<NodeId>> by_label;
  for (std::size_t i = 0; i < seeds.size(); ++i) by_label[seed_labels[i]].push_back(seeds[i]);
  if (by_label.size() < 2) {
    out.skipped_singleton_cluster = by_label.size() == 1 && by_label.begin()->second.size() < 2;
    return out;
  }

  // Anchors come from clusters that can also supply a positive.
  std::vector<std::size_t> anchor_slots;
  for (std::size_t i = 0; i < seeds.size(); ++i) {
    if (by_label[seed_labels[i]].size() >= 2)
      anchor_slots.push_back(i);
    else
      out.skipped_singleton_cluster = true;
  }
  if (anchor_slots.empty()) return out;

  std::uniform_int_distribution<std::size_t> pick_anchor(0, anchor_slots.size() - 1);
  std::uniform_int_distribution<std::size_t> pick_any(0, seeds.size() - 1);
  out.triplets.reserve(count);
  for (std::size_t t = 0; t < count; ++t) {
    const std::size_t a = anchor_slots[pick_anchor(rng)];
    const auto& same = by_label[seed_labels[a]];
    NodeId positive = seeds[a];
    while (positive == seeds[a]) {
      std::uniform_int_distribution<std::size_t> pick(0, same.size() - 1);
      positive = same[pick(rng)];
    }
    std::size_t neg = pick_any(rng);
    while (seed_labels[neg] == seed_labels[a]) neg = pick_any(rng);
    out.triplets.push_back({seeds[a], positive, seeds[neg]});
  }
  return out;
}

double cosine_similarity(const Eigen::Ref<const Eigen::RowVectorXd>& u,
                         const Eigen::Ref<const Eigen::RowVectorXd>& v) {
  const double nu = u.norm();
  const double nv = v.norm();
  if (nu == 0.0 || nv == 0.0) return 0.0;
  return u.dot(v) / (nu * nv);
}

namespace {

// d CS(u, v) / du, accumulated with weight `scale` into `out`.
void add_cosine_grad(const Eigen::RowVectorXd& u, const Eigen::RowVectorXd& v, double scale,
                     Eigen::Ref<Eigen::RowVectorXd> out) {
  const double nu = u.norm();
  const double nv = v.norm();
  if (nu == 0.0 || nv == 0.0) return;
  const double cs = u.dot(v) / (nu * nv);
  out += scale * (v / (nu * nv) - cs * u / (nu * nu));
}

}  // namespace

SupervisedLoss supervised_losses(const Matrix& p, const Matrix& z, std::span<const NodeId> seeds,
                                 std::span<const int> seed_labels,
                                 std::span<const Triplet> triplets) {
  if (seeds.empty()) throw InputError("supervised_losses: empty seed set");
  if (seeds.size() != seed_labels.size())
    throw InputError("supervised_losses: seeds and labels differ in length");
  SupervisedLoss out;
  out.grad_logits = Matrix::Zero(p.rows(), p.cols());
  out.grad_z = Matrix::Zero(z.rows(), z.cols());

  const double inv_seeds = 1.0 / static_cast<double>(seeds.size());
  for (std::size_t s = 0; s < seeds.size(); ++s) {
    const Index i = seeds[s];
    const int y = seed_labels[s];
    if (y < 0 || y >= p.cols()) throw InputError("supervised_losses: seed label out of range");
    out.cross_entropy -= std::log(std::max(p(i, y), 1e-300)) * inv_seeds;
    out.grad_logits.row(i) += p.row(i) * inv_seeds;
    out.grad_logits(i, y) -= inv_seeds;
  }

  if (!triplets.empty()) {
    const double inv_t = 1.0 / static_cast<double>(triplets.size());
    for (const Triplet& t : triplets) {
      const Eigen::RowVectorXd a = z.row(t.anchor);
      const Eigen::RowVectorXd pos = z.row(t.positive);
      const Eigen::RowVectorXd neg = z.row(t.negative);
      const double margin = cosine_similarity(a, neg) - cosine_similarity(a, pos);
      if (margin <= 0.0) continue;
      out.triplet += margin * inv_t;
      add_cosine_grad(a, neg, inv_t, out.grad_z.row(t.anchor));
      add_cosine_grad(neg, a, inv_t, out.grad_z.row(t.negative));
      add_cosine_grad(a, pos, -inv_t, out.grad_z.row(t.anchor));
      add_cosine_grad(pos, a, -inv_t, out.grad_z.row(t.positive));
    }
  }
  return out;
}

namespace {

struct Composite {
  LossBreakdown loss;
  Matrix grad_p;
  Matrix grad_logits;
  Matrix grad_z;
};

Composite composite_loss(const Matrix& p, const Matrix& z, const SparseDigraph& graph,
                         const LossSpec& spec, const SeedSupervision* seeds) {
  Composite c;
  ImbalanceGradient imb = imbalance_loss_gradient(graph, p, spec.norm, spec.variant, spec.beta);
  c.loss.imbalance = imb.objective.loss;
  c.loss.objective = std::move(imb.objective);
  c.grad_p = std::move(imb.grad_p);
  c.loss.total = c.loss.imbalance;
  if (seeds != nullptr && !seeds->nodes.empty() && spec.gamma_s != 0.0) {
    SupervisedLoss sup = supervised_losses(p, z, seeds->nodes, seeds->labels, seeds->triplets);
    c.loss.cross_entropy = sup.cross_entropy;
    c.loss.triplet = sup.triplet;
    c.loss.total += spec.gamma_s * (sup.cross_entropy + spec.gamma_t * sup.triplet);
    c.grad_logits = spec.gamma_s * sup.grad_logits;
    c.grad_z = (spec.gamma_s * spec.gamma_t) * sup.grad_z;
  }
  return c;
}

}  // namespace

Backprop backward(const Dimpa& model, const ForwardTrace& trace, const ModelParams& params,
                  const SparseDigraph& graph, const LossSpec& spec, const SeedSupervision* seeds) {
  if (graph.num_nodes() != trace.p.rows())
    throw InputError("backward: graph does not match the forward trace");
  Composite c = composite_loss(trace.p, trace.z, graph, spec, seeds);
  Backprop out;
  out.grad = model.backward(trace, params, c.grad_p, c.grad_logits, c.grad_z);
  out.loss = std::move(c.loss);
  return out;
}

LossBreakdown evaluate_loss(const Dimpa& model, const Matrix& x, const ModelParams& params,
                            const SparseDigraph& graph, const LossSpec& spec,
                            const SeedSupervision* seeds) {
  const ForwardTrace trace = model.forward(x, params, Mode::eval);
  return composite_loss(trace.p, trace.z, graph, spec, seeds).loss;
}

Adam::Adam(const ModelParams& like, double lr, double weight_decay, double beta1, double beta2,
           double eps)
    : m_(ModelParams::zeros(like.shape)),
      v_(ModelParams::zeros(like.shape)),
      lr_(lr),
      weight_decay_(weight_decay),
      beta1_(beta1),
      beta2_(beta2),
      eps_(eps) {
  if (lr < 0.0 || weight_decay < 0.0) throw InputError("adam: negative learning rate or decay");
}

void Adam::step(ModelParams& params, const ModelParams& grad) {
  ++t_;
  const double c1 = 1.0 - std::pow(beta1_, t_);
  const double c2 = 1.0 - std::pow(beta2_, t_);
  auto theta = params.tensors();
  const auto g = grad.tensors();
  auto m = m_.tensors();
  auto v = v_.tensors();
  for (std::size_t k = 0; k < theta.size(); ++k) {
    if (g[k].size() != theta[k].size()) throw InputError("adam: gradient shape mismatch");
    for (Index i = 0; i < theta[k].size(); ++i) {
      const double gi = g[k].data[i] + weight_decay_ * theta[k].data[i];
      m[k].data[i] = beta1_ * m[k].data[i] + (1.0 - beta1_) * gi;
      v[k].data[i] = beta2_ * v[k].data[i] + (1.0 - beta2_) * gi * gi;
      const double mhat = m[k].data[i] / c1;
      const double vhat = v[k].data[i] / c2;
      theta[k].data[i] -= lr_ * mhat / (std::sqrt(vhat) + eps_);
    }
  }
  ++params.generation;
}

std::vector<int> argmax_labels(const Matrix& p) {
  std::vector<int> out(static_cast<std::size_t>(p.rows()));
  for (Index i = 0; i < p.rows(); ++i) {
    Index best = 0;
    p.row(i).maxCoeff(&best);
    out[static_cast<std::size_t>(i)] = static_cast<int>(best);
  }
  return out;
}

namespace {

Matrix gather_rows(const Matrix& m, std::span<const NodeId> rows) {
  Matrix out(static_cast<Index>(rows.size()), m.cols());
  for (std::size_t r = 0; r < rows.size(); ++r) out.row(static_cast<Index>(r)) = m.row(rows[r]);
  return out;
}

void check_config(const TrainConfig& c, int clusters) {
  if (c.max_epochs <= 0 || c.patience <= 0 || c.patience > c.max_epochs)
    throw InputError("train: need 0 < patience <= max_epochs");
  if (c.lr < 0.0 || c.weight_decay < 0.0) throw InputError("train: negative lr or weight decay");
  const int pairs = clusters * (clusters - 1) / 2;
  if (c.loss.variant == Selection::sort && (c.loss.beta < 1 || c.loss.beta > pairs))
    throw InputError("train: beta must lie in [1, K(K-1)/2]");
}

}  // namespace

TrainResult train(const SparseDigraph& graph, const Matrix& features, ModelParams params,
                  const Splits& splits, const TrainConfig& config, const std::vector<int>* labels) {
  const int clusters = params.shape.clusters;
  check_config(config, clusters);
  if (features.rows() != graph.num_nodes())
    throw InputError("train: feature rows do not match the graph");
  if (splits.train.empty()) throw InputError("train: empty training set");
  if (!splits.seed.empty() && labels == nullptr)
    throw InputError("train: seed nodes need labels");

  const SparseDigraph train_graph = graph.induced_subgraph(splits.train);
  const Matrix train_x = gather_rows(features, splits.train);
  const Dimpa train_model(train_graph, config.tau);
  const Dimpa full_model(graph, config.tau);
  const bool has_validation = !splits.validation.empty();
  const SparseDigraph val_graph =
      has_validation ? graph.induced_subgraph(splits.validation) : SparseDigraph();

  // Seeds in train-subgraph row indexing.
  SeedSupervision seeds;
  {
    std::vector<NodeId> local(static_cast<std::size_t>(graph.num_nodes()), -1);
    for (std::size_t i = 0; i < splits.train.size(); ++i)
      local[static_cast<std::size_t>(splits.train[i])] = static_cast<NodeId>(i);
    for (NodeId s : splits.seed) {
      const NodeId l = local[static_cast<std::size_t>(s)];
      if (l < 0) throw InputError("train: seed node outside the training set");
      seeds.nodes.push_back(l);
      seeds.labels.push_back((*labels)[static_cast<std::size_t>(s)]);
    }
  }
  const bool supervised = !seeds.nodes.empty() && config.loss.gamma_s != 0.0;
  std::vector<int> test_truth;
  if (labels != nullptr)
    for (NodeId t : splits.test) test_truth.push_back((*labels)[static_cast<std::size_t>(t)]);

  const int warmup_beta = std::min(config.warmup_beta, clusters * (clusters - 1) / 2);
  Rng rng(config.seed);
  Adam adam(params, config.lr, config.weight_decay);

  TrainResult result;
  result.best = params;
  for (int epoch = 0; epoch < config.max_epochs; ++epoch) {
    LossSpec spec = config.loss;
    EpochRecord rec;
    rec.epoch = epoch;
    rec.selection = std::string(to_string(spec.variant));
    if (spec.variant == Selection::std_dev && epoch < config.std_warmup_epochs) {
      spec.variant = Selection::sort;
      spec.beta = warmup_beta;
      rec.selection = "sort(warmup)";
    }
    rec.beta = spec.variant == Selection::sort ? spec.beta : 0;

    const ForwardTrace trace = train_model.forward(train_x, params, Mode::train, &rng);
    if (supervised) {
      TripletSample ts = sample_triplets(seeds.nodes, seeds.labels,
                                         default_triplet_count(seeds.nodes.size()), rng);
      seeds.triplets = std::move(ts.triplets);
      result.triplets_skipped = result.triplets_skipped || ts.skipped_singleton_cluster;
    }
    const Backprop bp =
        backward(train_model, trace, params, train_graph, spec, supervised ? &seeds : nullptr);
    if (!std::isfinite(bp.loss.total) || !bp.grad.all_finite()) {
      std::ostringstream msg;
      msg << "train: non-finite loss or gradient at epoch " << epoch << " (parameter norm "
          << std::sqrt(params.squared_norm()) << ", gradient norm "
          << std::sqrt(bp.grad.squared_norm()) << ")";
      throw NumericalError(msg.str());
    }
    if (config.loss.variant == Selection::std_dev && spec.variant == Selection::std_dev &&
        bp.loss.objective.applied == Selection::naive)
      rec.selection = "naive(fallback)";
    rec.train_loss = bp.loss.total;
    adam.step(params, bp.grad);

    const ForwardTrace eval = full_model.forward(features, params, Mode::eval);
    if (has_validation) {
      LossSpec val_spec = config.loss;
      rec.val_objective = global_objective(val_graph, gather_rows(eval.p, splits.validation),
                                           val_spec.norm, val_spec.variant, val_spec.beta)
                              .value;
    } else {
      rec.val_objective = global_objective(train_graph, gather_rows(eval.p, splits.train),
                                           config.loss.norm, config.loss.variant, config.loss.beta)
                              .value;
    }
    if (!test_truth.empty() && test_truth.size() >= 2) {
      const std::vector<int> pred = argmax_labels(gather_rows(eval.p, splits.test));
      rec.test_ari = adjusted_rand_index(pred, test_truth);
    }

    if (rec.val_objective > result.best_val_objective) {
      result.best_val_objective = rec.val_objective;
      result.best_epoch = epoch;
      result.best = params;
    }
    result.log.push_back(std::move(rec));
    if (epoch - result.best_epoch >= config.patience) {
      result.stopped_early = epoch + 1 < config.max_epochs;
      break;
    }
  }
  return result;
}

}  // namespace digrac
