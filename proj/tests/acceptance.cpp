// End-to-end acceptance checks. Prints one PASS/FAIL line per criterion and
// exits non-zero when any criterion fails.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <map>
#include <random>
#include <string>

#include <Eigen/Eigenvalues>

#include "alloc_probe.hpp"
#include "oracles.hpp"

#include "digrac/dsbm.hpp"
#include "digrac/evaluation.hpp"
#include "digrac/experiment.hpp"
#include "digrac/imbalance.hpp"
#include "digrac/io.hpp"
#include "digrac/model.hpp"
#include "digrac/spectral.hpp"
#include "digrac/toml_lite.hpp"
#include "digrac/training.hpp"

using namespace digrac;
namespace fs = std::filesystem;

namespace {

std::map<int, std::pair<bool, std::string>> verdicts;

// Progress goes to stderr as criteria finish; the summary is printed in order.
void verdict(int id, bool ok, const std::string& detail) {
  std::fprintf(stderr, "[criterion %d done: %s]\n", id, ok ? "PASS" : "FAIL");
  verdicts[id] = {ok, detail};
}

std::string fmt(const char* f, auto... args) {
  char buf[512];
  std::snprintf(buf, sizeof buf, f, args...);
  return buf;
}

// Wraps a criterion so an unexpected exception is reported as a failure.
void guarded(int id, const std::function<void()>& body) {
  try {
    body();
  } catch (const std::exception& e) {
    verdict(id, false, std::string("exception: ") + e.what());
  }
}

long vm_hwm_kib() {
  std::ifstream in("/proc/self/status");
  for (std::string line; std::getline(in, line);)
    if (line.rfind("VmHWM:", 0) == 0) return std::stol(line.substr(6));
  return -1;
}

// Cycle DSBM from criteria 1, 2 and 8, swept over the noise grid.
const char* kCycleSweep = R"(
seed = 20220101
baseline = true

[dsbm]
structure = "cycle"
clusters = 3
nodes = 1000
p = 0.1
rho = 1.0
eta = 0.0
ambient = false

[replication]
graphs = 3
splits = 3

[sweep]
eta = [0.0, 0.1, 0.2, 0.3, 0.4]
)";

const char* kAmbientComplete = R"(
seed = 20220202

[dsbm]
structure = "complete"
clusters = 5
nodes = 1000
p = 0.02
rho = 1.5
eta = 0.05
ambient = true

[replication]
graphs = 1
splits = 3
)";

void criteria_1_2_8_9(const SweepResult& sweep, const ExperimentConfig& config) {
  std::vector<const RunResult*> clean;
  for (const auto& r : sweep.runs)
    if (r.setting == 0) clean.push_back(&r);

  guarded(1, [&] {
    double seconds = 0.0;
    std::vector<double> ari;
    bool all_ok = true;
    for (const RunResult* r : clean) {
      seconds += r->seconds;
      all_ok = all_ok && r->ok;
      ari.push_back(r->test_ari);
    }
    const auto [mean, se] = mean_stderr(ari);
    verdict(1, all_ok && clean.size() == 9 && mean >= 0.90 && seconds <= 600.0,
            fmt("cycle eta=0, 9 runs: mean test ARI %.4f (+/- %.4f) >= 0.90, runtime %.1f s <= 600 s",
                mean, se, seconds));
  });

  guarded(2, [&] {
    std::string curve;
    int inversions = 0;
    bool inversion_small = true;
    const auto& s = sweep.summary;
    for (std::size_t i = 0; i < s.size(); ++i) {
      curve += fmt("%s%.1f:%.3f±%.3f", i ? " " : "", s[i].eta, s[i].ari_mean, s[i].ari_stderr);
      if (i == 0 || s[i].ari_mean <= s[i - 1].ari_mean) continue;
      ++inversions;
      if (s[i].ari_mean - s[i - 1].ari_mean > std::max(s[i].ari_stderr, s[i - 1].ari_stderr))
        inversion_small = false;
    }
    const double drop = s.front().ari_mean - s.back().ari_mean;
    verdict(2, sweep.exit_code == 0 && inversions <= 1 && inversion_small && drop >= 0.3,
            fmt("ARI by eta [%s]; %d inversion(s), within one stderr: %s; drop 0->0.4 = %.3f >= 0.3",
                curve.c_str(), inversions, inversion_small ? "yes" : "no", drop));
  });

  // Spectral correctness: dense agreement plus the baseline ordering.
  guarded(8, [&] {
    std::mt19937_64 rng(808);
    std::uniform_int_distribution<int> size(4, 64);
    double worst = 0.0;
    for (int trial = 0; trial < 100; ++trial) {
      const int n = size(rng);
      const auto g = oracle::random_graph(n, 4.0 / n, rng, trial % 2 == 0);
      for (auto norm : {HermitianNormalization::none, HermitianNormalization::random_walk}) {
        const HermitianOperator op(g, norm);
        if (op.norm_bound() == 0.0) continue;
        const int k = std::min(3, n / 2);
        Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> dense(op.to_dense());
        const std::vector<double> values = oracle::sort_spectrum(
            {dense.eigenvalues().data(), dense.eigenvalues().data() + n}, 1e-9 * std::max(1.0, op.norm_bound()));
        const auto pairs = top_k_eigenpairs(op, k);
        for (int i = 0; i < k; ++i) {
          worst = std::max(worst, std::abs(pairs.values[i] - values[i]));
          // Residual against the operator.
          worst = std::max(worst, (op.apply(pairs.vectors[i]) - pairs.values[i] * pairs.vectors[i]).norm());
        }
      }
    }
    std::vector<double> digrac_ari, herm_ari;
    for (const RunResult* r : clean) {
      digrac_ari.push_back(r->test_ari);
      herm_ari.push_back(r->baseline_ari);
    }
    const double d = mean_stderr(digrac_ari).first;
    const double h = mean_stderr(herm_ari).first;
    verdict(8, worst < 1e-8 && h > 0.9 && d >= h - 0.02,
            fmt("Lanczos vs dense max err %.2e < 1e-8; Herm_rw ARI %.4f > 0.9; DIGRAC ARI %.4f >= %.4f",
                worst, h, d, h - 0.02));
  });

  guarded(9, [&] {
    // Split arithmetic on K=5 equal clusters of 200.
    std::vector<int> labels(1000);
    for (int i = 0; i < 1000; ++i) labels[i] = i / 200;
    Rng rng(9);
    const Splits sp = make_splits(1000, &labels, SplitFractions{}, 0.0, rng);
    bool counts_ok = true;
    for (int c = 0; c < 5; ++c) {
      int test = 0, val = 0, train = 0;
      for (NodeId v : sp.test) test += labels[v] == c;
      for (NodeId v : sp.validation) val += labels[v] == c;
      for (NodeId v : sp.train) train += labels[v] == c;
      counts_ok = counts_ok && test == 20 && val == 20 && train == 160;
    }

    // Early stopping on the cycle sweep runs.
    const int patience = config.train.patience;
    int worst_gap = 0;
    bool best_is_argmax = true;
    for (const auto& r : sweep.runs) {
      if (!r.ok) continue;
      const int last = r.log.back().epoch;
      if (last + 1 < config.train.max_epochs) worst_gap = std::max(worst_gap, last - r.best_epoch);
      double best = -INFINITY;
      int arg = -1;
      for (const auto& e : r.log)
        if (e.val_objective > best) {
          best = e.val_objective;
          arg = e.epoch;
        }
      best_is_argmax = best_is_argmax && arg == r.best_epoch;
    }

    // Std protocol warm-up.
    DsbmSpec spec;
    spec.meta = build_meta_graph(MetaStructure::complete, 5, 0.1, false);
    spec.nodes = 500;
    spec.p = 0.05;
    spec.seed = 99;
    const auto lg = sample_dsbm(spec);
    const Matrix x = make_features(lg.graph, 5);
    Rng split_rng(3), init_rng(4);
    const Splits s2 = make_splits(500, &lg.labels, SplitFractions{}, 0.0, split_rng);
    ModelShape shape;
    shape.input_dim = x.cols();
    shape.clusters = 5;
    TrainConfig tc;
    tc.loss.variant = Selection::std_dev;
    tc.loss.beta = spec.meta.beta();
    tc.max_epochs = 80;
    tc.patience = 80;
    tc.seed = 5;
    const auto trained = train(lg.graph, x, ModelParams::initialize(shape, init_rng), s2, tc, &lg.labels);
    int warm = 0;
    bool prefix = true;
    for (const auto& e : trained.log) {
      const bool is_warm = e.selection == "sort(warmup)" && e.beta == 3;
      if (is_warm) ++warm;
      if (is_warm != (e.epoch < 50)) prefix = false;
    }
    verdict(9, counts_ok && worst_gap <= patience + 1 && best_is_argmax && warm == 50 && prefix &&
                   trained.log.size() == 80,
            fmt("splits 20/20/160 per cluster: %s; max stop gap %d <= patience+1 = %d, best = argmax: %s; "
                "std warm-up epochs with sort(beta=3): %d of first 50 (%s), log length %zu",
                counts_ok ? "yes" : "no", worst_gap, patience + 1, best_is_argmax ? "yes" : "no", warm,
                prefix ? "exact prefix" : "not a prefix", trained.log.size()));
  });
}

void criterion_3() {
  const auto config = ExperimentConfig::from_json(toml::parse(kAmbientComplete));
  const auto sweep = run_sweep(config);
  std::vector<double> obj, truth;
  std::string runs;
  for (const auto& r : sweep.runs) {
    if (!r.ok) {
      verdict(3, false, "run failed: " + r.error);
      return;
    }
    obj.push_back(r.objective);
    truth.push_back(r.truth_objective);
    runs += fmt("%s%.3f/%.3f", runs.empty() ? "" : " ", r.objective, r.truth_objective);
  }
  const double o = mean_stderr(obj).first;
  const double t = mean_stderr(truth).first;
  verdict(3, o >= 0.8 * t,
          fmt("complete+ambient K=5: mean O_vol_sum^sort %.4f >= 0.8 x truth %.4f = %.4f (runs %s)", o, t,
              0.8 * t, runs.c_str()));
}

void criterion_4() {
  const int m = 400;
  const std::vector<double> unit(m, 1.0);
  const NullThreshold null = null_threshold_check(unit);
  std::mt19937_64 rng(404);
  std::bernoulli_distribution coin(0.5);
  // Two clusters of 20 nodes; each edge joins a random cross pair.
  std::uniform_int_distribution<int> pick(0, 19);
  std::vector<int> labels(40);
  for (int i = 0; i < 40; ++i) labels[i] = i / 20;
  const Matrix p = one_hot(labels, 2);
  int within = 0, std_agrees = 0;
  const int draws = 10000;
  for (int d = 0; d < draws; ++d) {
    std::vector<Edge> edges;
    edges.reserve(m);
    for (int e = 0; e < m; ++e) {
      const int a = pick(rng), b = 20 + pick(rng);
      if (coin(rng))
        edges.push_back({a, b, 1.0});
      else
        edges.push_back({b, a, 1.0});
    }
    const auto g = SparseDigraph::from_edges(edges, 40);
    const Matrix w = probabilistic_cut(g, p);
    const bool in = std::abs(w(0, 1) - w(1, 0)) <= null.bound;
    within += in;
    const Matrix ci = pairwise_ci(w, probabilistic_volume(g, p), Normalization::vol_sum);
    std_agrees += select_pairs(ci, w, Selection::std_dev).empty() == in;
  }
  const double frac = static_cast<double>(within) / draws;
  verdict(4, frac >= 0.994 && frac <= 0.999 && null.bound == 60.0 && std_agrees == draws,
          fmt("fraction with |W01-W10| <= 3 sqrt(m) = %.0f: %.4f in [0.994, 0.999]; std selection agrees "
              "on %d/%d draws",
              null.bound, frac, std_agrees, draws));
}

void criterion_5() {
  DsbmSpec spec;
  spec.meta = build_meta_graph(MetaStructure::cycle, 3, 0.1, false);
  spec.nodes = 30;
  spec.p = 0.3;
  spec.seed = 55;
  const auto lg = sample_dsbm(spec);
  Rng rng(5);
  std::normal_distribution<double> normal;
  Matrix x(30, 8);
  for (Index i = 0; i < x.size(); ++i) x.data()[i] = normal(rng);
  ModelShape shape;
  shape.input_dim = 8;
  shape.hidden = 8;
  shape.clusters = 3;
  shape.hops = 2;
  shape.dropout = 0.0;
  ModelParams params = ModelParams::initialize(shape, rng);
  const Dimpa model(lg.graph);
  SeedSupervision seeds;
  for (NodeId v = 0; v < 30; v += 2) {
    seeds.nodes.push_back(v);
    seeds.labels.push_back(lg.labels[v]);
  }
  seeds.triplets =
      sample_triplets(seeds.nodes, seeds.labels, default_triplet_count(seeds.nodes.size()), rng).triplets;
  const LossSpec loss;  // vol_sum, sort, gamma_s = 50, gamma_t = 0.1
  const auto trace = model.forward(x, params, Mode::eval);
  const Backprop bp = backward(model, trace, params, lg.graph, loss, &seeds);
  auto views = params.tensors();
  const auto grads = bp.grad.tensors();
  double worst = 0.0;
  std::string worst_name;
  Index checked = 0;
  const double h = 1e-5;
  for (std::size_t t = 0; t < views.size(); ++t)
    for (Index i = 0; i < views[t].size(); ++i) {
      const double saved = views[t].data[i];
      views[t].data[i] = saved + h;
      const double up = evaluate_loss(model, x, params, lg.graph, loss, &seeds).total;
      views[t].data[i] = saved - h;
      const double down = evaluate_loss(model, x, params, lg.graph, loss, &seeds).total;
      views[t].data[i] = saved;
      const double fd = (up - down) / (2 * h);
      const double a = grads[t].data[i];
      const double rel = std::abs(a - fd) / std::max({std::abs(a), std::abs(fd), 1e-6});
      if (rel > worst) {
        worst = rel;
        worst_name = views[t].name;
      }
      ++checked;
    }
  verdict(5, worst < 1e-4 && checked == params.parameter_count(),
          fmt("%lld parameters, max relative error %.2e < 1e-4 (worst in %s), loss %.4f", (long long)checked,
              worst, worst_name.c_str(), bp.loss.total));
}

void criterion_6() {
  std::mt19937_64 rng(606);
  std::uniform_int_distribution<int> size(2, 12);
  double worst = 0.0;
  for (int trial = 0; trial < 200; ++trial) {
    const int n = size(rng);
    const int k = std::min(n, 2 + trial % 5);
    const auto g = oracle::random_graph(n, 0.1 + 0.4 * (trial % 4) / 3.0, rng, trial % 3 != 0);
    const Matrix a = g.to_dense();
    const Matrix p = oracle::random_stochastic(n, k, rng);
    const Matrix w = probabilistic_cut(g, p);
    const Vector v = probabilistic_volume(g, p);
    worst = std::max(worst, (w - oracle::cut(a, p)).cwiseAbs().maxCoeff());
    worst = std::max(worst, (v - oracle::volume(a, p)).cwiseAbs().maxCoeff());
    const int beta = 1 + trial % (k * (k - 1) / 2);
    const auto table = all_objectives(g, p, beta);
    for (std::size_t ni = 0; ni < kNormalizations.size(); ++ni) {
      const Matrix ci = pairwise_ci(w, v, kNormalizations[ni]);
      for (int c = 0; c < k; ++c)
        for (int d = c + 1; d < k; ++d)
          worst = std::max(worst, std::abs(ci(c, d) - oracle::ci(w, v, c, d, kNormalizations[ni])));
      for (std::size_t si = 0; si < kSelections.size(); ++si) {
        const double expect = oracle::objective(w, v, kNormalizations[ni], kSelections[si], beta);
        worst = std::max(worst, std::abs(table[si][ni] - expect));
        worst = std::max(worst, std::abs(global_objective(g, p, kNormalizations[ni], kSelections[si], beta).value -
                                         expect));
      }
    }
  }
  verdict(6, worst <= 1e-12, fmt("200 instances, 12 objectives: max abs deviation %.2e <= 1e-12", worst));
}

void criterion_7() {
  std::mt19937_64 rng(707);
  std::uniform_int_distribution<int> size(2, 64);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  double worst = 0.0;
  for (int trial = 0; trial < 100; ++trial) {
    const int n = size(rng);
    const auto g = oracle::random_graph(n, 3.0 / n, rng, trial % 2 == 0);
    const Matrix a = g.to_dense();
    Matrix h(n, 5);
    for (Index i = 0; i < h.size(); ++i) h.data()[i] = u(rng);
    std::vector<double> omega(3 + trial % 3);
    for (double& w : omega) w = u(rng);
    for (auto dir : {Direction::source, Direction::target}) {
      const Matrix z = dimpa_aggregate(PropagationMatrix(g, 0.5, dir), h, omega);
      const Matrix expect = oracle::dimpa(oracle::propagation(a, 0.5, dir == Direction::target), h, omega);
      worst = std::max(worst, (z - expect).cwiseAbs().maxCoeff());
    }
  }

  // Full pipeline at n = 30000 under the allocation probe.
  const Index n = 30000;
  alloc_probe::start();
  DsbmSpec spec;
  spec.meta = build_meta_graph(MetaStructure::cycle, 3, 0.1, false);
  spec.nodes = n;
  spec.p = 0.001;
  spec.seed = 7;
  const auto lg = sample_dsbm(spec);
  const Matrix x = make_features(lg.graph, 3);
  Rng split_rng(1), init_rng(2);
  const Splits sp = make_splits(n, &lg.labels, SplitFractions{}, 0.1, split_rng);
  ModelShape shape;
  shape.input_dim = x.cols();
  shape.clusters = 3;
  TrainConfig tc;
  tc.max_epochs = 3;
  tc.patience = 3;
  tc.seed = 3;
  const auto trained = train(lg.graph, x, ModelParams::initialize(shape, init_rng), sp, tc, &lg.labels);
  const Dimpa model(lg.graph);
  const auto out = model.forward(x, trained.best, Mode::eval);
  const auto rep = report(lg.graph, out.p, spec.meta.beta(), lg.labels);
  const std::size_t largest = alloc_probe::stop();
  const long hwm = vm_hwm_kib();
  const double nn = static_cast<double>(n) * static_cast<double>(n);
  verdict(7, worst < 1e-12 && static_cast<double>(largest) < nn / 10.0 && hwm > 0 && hwm * 1024.0 < nn,
          fmt("100 instances, max |sparse - dense| %.2e < 1e-12; n=30000 (%lld edges): largest allocation "
              "%.1f MB < n^2/10 bytes = %.0f MB, peak RSS %.0f MB < n^2 bytes = %.0f MB",
              worst, (long long)lg.graph.num_edges(), largest / 1e6, nn / 10.0 / 1e6, hwm / 1024.0,
              nn / 1e6));
  (void)rep;
}

void criterion_10() {
  const fs::path root = DIGRAC_TEST_DATA;
  const fs::path edges = root / "standin_edges.tsv";
  const fs::path labels = root / "standin_labels.txt";
  const auto d = io::load_dataset({edges, std::nullopt, labels});
  const auto raw = io::read_edge_list(edges);

  const fs::path tmp = fs::temp_directory_path() / ("digrac_standin_" + std::to_string(std::random_device{}()));
  fs::create_directories(tmp);
  io::write_edge_list(tmp / "edges.tsv", d.graph);
  io::write_labels(tmp / "labels.txt", *d.labels);
  const auto back = io::load_dataset({tmp / "edges.tsv", std::nullopt, tmp / "labels.txt"});
  fs::remove_all(tmp);

  const int k = *std::max_element(d.labels->begin(), d.labels->end()) + 1;
  const auto rep = report(d.graph, *d.labels, k, k, *d.labels);
  const double o = rep.objectives[0][0];
  const Matrix p = one_hot(*d.labels, k);
  const double expect = oracle::objective(oracle::cut(d.graph.to_dense(), p),
                                          oracle::volume(d.graph.to_dense(), p), Normalization::vol_sum,
                                          Selection::sort, k);
  const bool ok = d.graph.num_nodes() == 245 && static_cast<std::size_t>(d.graph.num_edges()) == raw.edges.size() &&
                  back.graph == d.graph && back.labels == d.labels && std::abs(o - expect) < 1e-12 &&
                  *rep.ari == 1.0;
  verdict(10, ok,
          fmt("real-data table values not reproducible offline; 245-node stand-in: %lld nodes, %lld edges, "
              "round trip identical: %s, truth O_vol_sum^sort %.4f matches oracle",
              (long long)d.graph.num_nodes(), (long long)d.graph.num_edges(),
              back.graph == d.graph && back.labels == d.labels ? "yes" : "no", o));
}

}  // namespace

int main() {
  const auto start = std::chrono::steady_clock::now();
  guarded(4, criterion_4);
  guarded(5, criterion_5);
  guarded(6, criterion_6);
  guarded(7, criterion_7);
  guarded(10, criterion_10);
  guarded(3, criterion_3);
  try {
    const auto config = ExperimentConfig::from_json(toml::parse(kCycleSweep));
    const auto sweep = run_sweep(config, [](const RunResult& r) {
      std::fprintf(stderr, "  eta=%.1f graph %d split %d: test ARI %.4f, %d epochs, %.1f s%s\n", r.eta,
                   r.graph_index, r.split_index, r.test_ari, r.epochs, r.seconds, r.ok ? "" : " FAILED");
    });
    criteria_1_2_8_9(sweep, config);
  } catch (const std::exception& e) {
    for (int id : {1, 2, 8, 9}) verdict(id, false, std::string("sweep failed: ") + e.what());
  }
  const double total = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  int failures = 0;
  for (const auto& [id, v] : verdicts) {
    std::printf("criterion %2d: %s  %s\n", id, v.first ? "PASS" : "FAIL", v.second.c_str());
    failures += !v.first;
  }
  std::printf("%d of %zu criteria failed, %.0f s total\n", failures, verdicts.size(), total);
  return failures == 0 ? 0 : 1;
}
