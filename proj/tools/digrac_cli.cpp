// digrac: command-line front end. Subcommands generate, spectral, train,
// evaluate, report, sweep; `digrac <cmd> --help` lists the flags.

#include <algorithm>
#include <cstdlib>
#include <optional>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <sstream>

#include "CLI11.hpp"
#include "json.hpp"

#include "digrac/dsbm.hpp"
#include "digrac/evaluation.hpp"
#include "digrac/experiment.hpp"
#include "digrac/io.hpp"
#include "digrac/kernels.hpp"
#include "digrac/spectral.hpp"

namespace fs = std::filesystem;
using nlohmann::json;
using namespace digrac;

namespace {

constexpr int kOk = 0;
constexpr int kConfigError = 2;
constexpr int kFailure = 4;

json matrix_json(const Matrix& m) {
  json rows = json::array();
  for (Index r = 0; r < m.rows(); ++r) {
    json row = json::array();
    for (Index c = 0; c < m.cols(); ++c) row.push_back(m(r, c));
    rows.push_back(std::move(row));
  }
  return rows;
}

void write_json(const fs::path& path, const json& doc) {
  std::ofstream out(path);
  if (!out) throw InputError("cannot write " + path.string());
  out << doc.dump(2) << '\n';
}

std::string read_text(const fs::path& path) {
  std::ifstream in(path);
  std::stringstream buffer;
  buffer << in.rdbuf();
  return buffer.str();
}

fs::path default_output(const fs::path& config_path) {
  const char* root = std::getenv("DIGRAC_OUTPUT_ROOT");
  return fs::path(root ? root : "runs") / config_path.stem();
}

// ---- generate ---------------------------------------------------------------

struct GenerateArgs {
  std::string structure = "cycle";
  int clusters = 3;
  Index nodes = 1000;
  double p = 0.1;
  double rho = 1.0;
  double eta = 0.0;
  bool ambient = false;
  bool no_self_loops = false;
  std::uint64_t seed = 0;
  std::string out = ".";
};

int run_generate(const GenerateArgs& a) {
  DsbmSpec spec;
  spec.meta = build_meta_graph(parse_structure(a.structure), a.clusters, a.eta, a.ambient, a.seed);
  spec.nodes = a.nodes;
  spec.p = a.p;
  spec.rho = a.rho;
  spec.seed = a.seed;
  spec.self_loops = !a.no_self_loops;
  const LabeledGraph lg = sample_dsbm(spec);

  const fs::path dir(a.out);
  fs::create_directories(dir);
  io::write_edge_list(dir / "edges.tsv", lg.graph);
  io::write_labels(dir / "labels.txt", lg.labels);
  const auto sizes = cluster_sizes(a.nodes, a.clusters, a.rho);
  write_json(dir / "dsbm.json",
             {{"structure", a.structure},
              {"clusters", a.clusters},
              {"nodes", a.nodes},
              {"p", a.p},
              {"rho", a.rho},
              {"eta", a.eta},
              {"ambient", a.ambient},
              {"self_loops", spec.self_loops},
              {"seed", a.seed},
              {"beta", spec.meta.beta()},
              {"cluster_sizes", sizes},
              {"edges", lg.graph.num_edges()},
              {"flow", matrix_json(spec.meta.flow)},
              {"filled_flow", matrix_json(spec.meta.filled_flow)}});
  std::cout << "wrote " << lg.graph.num_nodes() << " nodes, " << lg.graph.num_edges()
            << " edges to " << dir.string() << " (beta=" << spec.meta.beta() << ")\n";
  return kOk;
}

// ---- spectral ---------------------------------------------------------------

struct SpectralArgs {
  std::string edges;
  int clusters = 0;
  std::string normalization = "rw";
  std::string out = ".";
  std::uint64_t seed = 0;
  int restarts = 10;
  bool keep_all = false;
};

int run_spectral(const SpectralArgs& a) {
  io::Dataset ds = io::load_dataset({a.edges, std::nullopt, std::nullopt}, {!a.keep_all, false});
  const Matrix x = make_features(ds.graph, a.clusters, parse_hermitian_normalization(a.normalization));
  const KMeansResult km = kmeans(x, a.clusters, a.restarts, a.seed);
  const fs::path dir(a.out);
  fs::create_directories(dir);
  io::write_matrix_csv(dir / "features.csv", x);
  io::write_labels(dir / "kmeans_labels.txt", km.labels);
  io::write_mapping_csv(dir / "mapping.csv", ds.node_names);
  std::cout << "features " << x.rows() << "x" << x.cols() << ", k-means inertia "
            << km.inertia << '\n';
  return kOk;
}

// ---- train / sweep ----------------------------------------------------------

struct ExperimentArgs {
  std::string config;
  std::string output;
  int jobs = 0;
};

int run_experiment_command(const ExperimentArgs& a, bool sweep) {
  ExperimentConfig config;
  try {
    config = load_config(a.config);
  } catch (const std::exception& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return kConfigError;
  }
  if (!sweep && config.eta_grid.size() > 1) {
    std::cerr << "config error: `train` runs one setting; use `sweep` for an eta grid\n";
    return kConfigError;
  }
  if (a.jobs > 0) config.jobs = a.jobs;
  if (!a.output.empty()) config.output = a.output;
  if (config.output.empty()) config.output = default_output(a.config);

  const SweepResult result = run_sweep(config, [](const RunResult& r) {
    std::cerr << "eta=" << r.eta << " graph=" << r.graph_index << " split=" << r.split_index;
    if (r.ok)
      std::cerr << " ari=" << std::setprecision(4) << r.test_ari << " O=" << r.objective
                << " epochs=" << r.epochs << " (" << std::setprecision(3) << r.seconds << "s)\n";
    else
      std::cerr << " FAILED: " << r.error << '\n';
  });
  write_outputs(config.output, config, read_text(a.config), result, !sweep);

  std::cout << "eta,runs,failed,ari_mean,ari_stderr,objective_mean\n" << std::setprecision(6);
  for (const SettingSummary& s : result.summary)
    std::cout << s.eta << ',' << s.runs << ',' << s.failed << ',' << s.ari_mean << ','
              << s.ari_stderr << ',' << s.objective_mean << '\n';
  std::cout << "outputs in " << config.output.string() << '\n';
  return result.exit_code;
}

// ---- evaluate ---------------------------------------------------------------

struct EvaluateArgs {
  std::string edges;
  std::string labels;         // hard partition
  std::string probabilities;  // n×K soft assignment
  std::string checkpoint;     // or run a trained model
  std::string features;
  std::string normalization = "rw";
  double tau = 0.5;
  std::string truth;
  std::string norm = "vol_sum";
  std::string variant = "sort";
  int beta = 0;
  std::string out = ".";
};

json report_json(const PartitionReport& rep, int clusters) {
  json objectives = json::object();
  for (std::size_t s = 0; s < kSelections.size(); ++s)
    for (std::size_t n = 0; n < kNormalizations.size(); ++n)
      objectives[objective_name(kNormalizations[n], kSelections[s])] = rep.objectives[s][n];
  json doc = {{"clusters", clusters},
              {"beta", rep.beta},
              {"objectives", objectives},
              {"size_ratio", rep.size_ratio},
              {"size_std", rep.size_std},
              {"sizes", rep.sizes},
              {"flow_matrix", matrix_json(rep.flow_matrix)},
              {"cuts", matrix_json(rep.cuts)}};
  doc["volumes"] = std::vector<double>(rep.volumes.data(), rep.volumes.data() + rep.volumes.size());
  doc["ari"] = rep.ari ? json(*rep.ari) : json(nullptr);
  doc["nmi"] = rep.nmi ? json(*rep.nmi) : json(nullptr);
  return doc;
}

void write_pair_tables(const fs::path& dir, const PartitionReport& rep) {
  const Index k = rep.cuts.rows();
  std::ofstream pairs(dir / "pairs.csv");
  pairs << std::setprecision(12) << "k,l,w_kl,w_lk,ci_vol_sum,ci_vol_min,ci_vol_max,ci_plain,"
                                    "flow_kl,flow_lk\n";
  std::array<Matrix, 4> ci;
  for (std::size_t n = 0; n < kNormalizations.size(); ++n)
    ci[n] = pairwise_ci(rep.cuts, rep.volumes, kNormalizations[n]);
  for (Index a = 0; a < k; ++a)
    for (Index b = a + 1; b < k; ++b)
      pairs << a << ',' << b << ',' << rep.cuts(a, b) << ',' << rep.cuts(b, a) << ','
            << ci[0](a, b) << ',' << ci[1](a, b) << ',' << ci[2](a, b) << ',' << ci[3](a, b)
            << ',' << rep.flow_matrix(a, b) << ',' << rep.flow_matrix(b, a) << '\n';
  io::write_matrix_csv(dir / "flow_matrix.csv", rep.flow_matrix);
}

int default_beta(int clusters) { return std::min(3, clusters * (clusters - 1) / 2); }

json objective_json(const Objective& o, Normalization norm, Selection variant, int beta) {
  json pairs = json::array();
  for (const ClusterPair& p : o.pairs) pairs.push_back({p.k, p.l});
  return {{"name", objective_name(norm, variant)},
          {"value", o.value},
          {"loss", o.loss},
          {"beta", beta},
          {"applied", to_string(o.applied)},
          {"pairs", pairs}};
}

// Node ids are taken as they appear in the edge list (no component
// extraction), so every input file is positional over the same ids.
int run_evaluate(const EvaluateArgs& a) {
  const int sources = !a.labels.empty() + !a.probabilities.empty() + !a.checkpoint.empty();
  if (sources != 1) throw InputError("evaluate: give exactly one of --labels, --probabilities, --checkpoint");
  const Normalization norm = parse_normalization(a.norm);
  const Selection variant = parse_selection(a.variant);

  io::DatasetPaths paths{a.edges, std::nullopt, std::nullopt};
  if (!a.labels.empty()) paths.labels = a.labels;
  if (!a.probabilities.empty()) paths.features = a.probabilities;
  if (!a.checkpoint.empty() && !a.features.empty()) paths.features = a.features;
  const io::Dataset ds = io::load_dataset(paths, {false, false});
  const Index n = ds.graph.num_nodes();

  Matrix p;
  std::optional<ModelParams> params;
  if (!a.labels.empty()) {
    const int clusters = *std::max_element(ds.labels->begin(), ds.labels->end()) + 1;
    p = one_hot(*ds.labels, clusters);
  } else if (!a.probabilities.empty()) {
    p = *ds.features;
    for (Index i = 0; i < n; ++i)
      if ((p.row(i).array() < 0.0).any() || std::abs(p.row(i).sum() - 1.0) > 1e-6)
        throw InputError(a.probabilities + ": row " + std::to_string(i) +
                         " is not a probability vector");
  } else {
    params = io::load_checkpoint(a.checkpoint);
    const Matrix x = ds.features ? *ds.features
                                 : make_features(ds.graph, params->shape.clusters,
                                                 parse_hermitian_normalization(a.normalization));
    p = Dimpa(ds.graph, a.tau).forward(x, *params, Mode::eval).p;
  }
  const int clusters = static_cast<int>(p.cols());
  if (clusters < 2) throw InputError("evaluate: need at least two clusters");
  const int beta = a.beta > 0 ? a.beta : default_beta(clusters);

  std::vector<int> truth;
  if (!a.truth.empty()) {
    truth = io::read_labels(a.truth, ds.node_names);
    if (static_cast<Index>(truth.size()) != n)
      throw InputError("evaluate: truth labels do not cover the graph");
  }
  const PartitionReport rep = report(ds.graph, p, beta, truth);
  const Objective chosen = objective_from_scores(rep.cuts, rep.volumes, norm, variant, beta);

  json doc = report_json(rep, clusters);
  doc["objective"] = objective_json(chosen, norm, variant, beta);
  const fs::path dir(a.out);
  fs::create_directories(dir);
  write_json(dir / "evaluation.json", doc);
  write_pair_tables(dir, rep);
  if (params) {
    io::write_matrix_csv(dir / "probabilities.csv", p);
    io::write_labels(dir / "predicted_labels.txt", argmax_labels(p));
  }
  std::cout << doc["objectives"].dump(2) << '\n' << doc["objective"].dump() << '\n';
  return kOk;
}

// ---- report -----------------------------------------------------------------

struct ReportArgs {
  std::string edges;
  std::string prediction;
  std::string truth;
  int clusters = 0;
  int beta = 0;
  std::string out = ".";
};

int run_report(const ReportArgs& a) {
  // Labels are positional over the ids in the edge list, so no component
  // extraction here.
  io::Dataset ds = io::load_dataset({a.edges, std::nullopt, a.prediction}, {false, false});
  const std::vector<int>& pred = *ds.labels;
  std::vector<int> truth;
  if (!a.truth.empty()) {
    truth = io::read_labels(a.truth);
    if (truth.size() != pred.size()) throw InputError("truth and prediction lengths differ");
  }
  int clusters = a.clusters;
  for (int l : pred) clusters = std::max(clusters, l + 1);
  const int beta = a.beta > 0 ? a.beta : default_beta(clusters);
  const PartitionReport rep = report(ds.graph, pred, clusters, beta, truth);
  const fs::path dir(a.out);
  fs::create_directories(dir);
  write_json(dir / "report.json", report_json(rep, clusters));
  write_pair_tables(dir, rep);
  std::cout << report_json(rep, clusters)["objectives"].dump(2) << '\n';
  return kOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"digrac: directed graph clustering by flow imbalance"};
  app.require_subcommand(1);
  int threads = 1;
  app.add_option("--threads", threads, "Threads for the sparse kernels")
      ->check(CLI::PositiveNumber);

  GenerateArgs gen;
  auto* generate = app.add_subcommand("generate", "Sample a DSBM graph with labels");
  generate->add_option("--structure", gen.structure, "cycle | path | complete | star")
      ->capture_default_str();
  generate->add_option("-k,--clusters", gen.clusters, "Number of clusters")->capture_default_str();
  generate->add_option("-n,--nodes", gen.nodes, "Number of nodes")->capture_default_str();
  generate->add_option("-p", gen.p, "Edge probability scale")->capture_default_str();
  generate->add_option("--rho", gen.rho, "Largest/smallest cluster size ratio")
      ->capture_default_str();
  generate->add_option("--eta", gen.eta, "Direction flip probability")->capture_default_str();
  generate->add_flag("--ambient", gen.ambient, "Make the last cluster ambient");
  generate->add_flag("--no-self-loops", gen.no_self_loops, "Skip i == j pairs");
  generate->add_option("--seed", gen.seed, "RNG seed")->capture_default_str();
  generate->add_option("-o,--out", gen.out, "Output directory")->capture_default_str();

  SpectralArgs spec;
  auto* spectral = app.add_subcommand("spectral", "Hermitian spectral features and k-means");
  spectral->add_option("--edges", spec.edges, "Edge list")->required();
  spectral->add_option("-k,--clusters", spec.clusters, "Number of eigenvectors / clusters")
      ->required();
  spectral->add_option("--normalization", spec.normalization, "rw | herm")->capture_default_str();
  spectral->add_option("--seed", spec.seed, "k-means seed")->capture_default_str();
  spectral->add_option("--restarts", spec.restarts, "k-means restarts")->capture_default_str();
  spectral->add_flag("--all-nodes", spec.keep_all, "Keep every component");
  spectral->add_option("-o,--out", spec.out, "Output directory")->capture_default_str();

  ExperimentArgs train_args;
  auto* train_cmd = app.add_subcommand("train", "Train DIMPA from a TOML config");
  train_cmd->add_option("config", train_args.config, "TOML config")->required()->check(CLI::ExistingFile);
  train_cmd->add_option("-o,--output", train_args.output, "Output directory (overrides config)");
  train_cmd->add_option("-j,--jobs", train_args.jobs, "Concurrent runs");

  ExperimentArgs sweep_args;
  auto* sweep_cmd = app.add_subcommand("sweep", "Run an eta grid with replication");
  sweep_cmd->add_option("config", sweep_args.config, "TOML config or a previous manifest.json")
      ->required()
      ->check(CLI::ExistingFile);
  sweep_cmd->add_option("-o,--output", sweep_args.output, "Output directory (overrides config)");
  sweep_cmd->add_option("-j,--jobs", sweep_args.jobs, "Concurrent runs");

  EvaluateArgs ev;
  auto* evaluate = app.add_subcommand(
      "evaluate", "Score a partition (labels, probabilities or a checkpoint) on a graph");
  evaluate->add_option("--edges", ev.edges, "Edge list")->required();
  auto* labels_opt = evaluate->add_option("--labels", ev.labels, "Hard partition, one label per node");
  auto* prob_opt = evaluate->add_option("--probabilities", ev.probabilities, "n x K probability CSV");
  auto* ckpt_opt = evaluate->add_option("--checkpoint", ev.checkpoint, "Model checkpoint (JSON)");
  labels_opt->excludes(prob_opt)->excludes(ckpt_opt);
  prob_opt->excludes(ckpt_opt);
  evaluate->add_option("--features", ev.features, "Checkpoint input features (default: spectral)")
      ->needs(ckpt_opt);
  evaluate->add_option("--normalization", ev.normalization, "Spectral features: rw | herm")
      ->capture_default_str();
  evaluate->add_option("--tau", ev.tau, "Self-loop weight")->capture_default_str();
  evaluate->add_option("--truth", ev.truth, "Ground-truth labels for ARI/NMI");
  evaluate->add_option("--norm", ev.norm, "vol_sum | vol_min | vol_max | plain")->capture_default_str();
  evaluate->add_option("--variant", ev.variant, "sort | std | naive")->capture_default_str();
  evaluate->add_option("--beta", ev.beta, "Pairs for the sort objectives (default min(3, K(K-1)/2))");
  evaluate->add_option("-o,--out", ev.out, "Output directory")->capture_default_str();

  ReportArgs rep;
  auto* report_cmd = app.add_subcommand("report", "Score a labelled partition");
  report_cmd->add_option("--edges", rep.edges, "Edge list")->required();
  report_cmd->add_option("--prediction", rep.prediction, "Predicted labels")->required();
  report_cmd->add_option("--truth", rep.truth, "Ground-truth labels");
  report_cmd->add_option("-k,--clusters", rep.clusters, "Number of clusters (default: max label + 1)");
  report_cmd->add_option("--beta", rep.beta, "Pairs for the sort objectives");
  report_cmd->add_option("-o,--out", rep.out, "Output directory")->capture_default_str();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    // --help is a ParseError with code 0; real usage errors map to 2.
    return app.exit(e) == 0 ? kOk : kConfigError;
  }
  kernels::set_threads(threads);

  try {
    if (*generate) return run_generate(gen);
    if (*spectral) return run_spectral(spec);
    if (*train_cmd) return run_experiment_command(train_args, false);
    if (*sweep_cmd) return run_experiment_command(sweep_args, true);
    if (*evaluate) return run_evaluate(ev);
    if (*report_cmd) return run_report(rep);
  } catch (const InputError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kConfigError;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kFailure;
  }
  return kOk;
}
