#include "digrac/experiment.hpp"

#include <atomic>
#include <chrono>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <mutex>
#include <set>
#include <sstream>
#include <thread>

#include "digrac/evaluation.hpp"
#include "digrac/io.hpp"
#include "digrac/kernels.hpp"
#include "digrac/toml_lite.hpp"

namespace digrac {

namespace {

using nlohmann::json;

// Typed access to one config table, remembering which keys were read so
// leftovers can be reported.
class Table {
 public:
  Table(const json& doc, std::string name) : name_(std::move(name)) {
    if (doc.is_null()) return;
    if (!doc.is_object()) throw InputError("config: `" + name_ + "` must be a table");
    doc_ = &doc;
  }

  bool has(const std::string& key) const { return doc_ && doc_->contains(key); }

  template <typename T>
  void read(const std::string& key, T& out) {
    if (!has(key)) return;
    seen_.insert(key);
    const json& v = doc_->at(key);
    if constexpr (std::is_same_v<T, bool>) {
      if (!v.is_boolean()) bad(key, "a boolean");
      out = v.get<bool>();
    } else if constexpr (std::is_floating_point_v<T>) {
      if (!v.is_number()) bad(key, "a number");
      out = v.get<double>();
    } else if constexpr (std::is_integral_v<T>) {
      if (!v.is_number_integer()) bad(key, "an integer");
      if (v.is_number_unsigned()) {
        out = static_cast<T>(v.get<std::uint64_t>());
      } else {
        const auto x = v.get<std::int64_t>();
        if (std::is_unsigned_v<T> && x < 0) bad(key, "a non-negative integer");
        out = static_cast<T>(x);
      }
    } else if constexpr (std::is_same_v<T, std::string>) {
      if (!v.is_string()) bad(key, "a string");
      out = v.get<std::string>();
    } else if constexpr (std::is_same_v<T, std::vector<double>>) {
      if (!v.is_array()) bad(key, "an array of numbers");
      out.clear();
      for (const auto& x : v) {
        if (!x.is_number()) bad(key, "an array of numbers");
        out.push_back(x.get<double>());
      }
    } else {
      static_assert(sizeof(T) == 0, "unsupported config type");
    }
  }

  std::string get_string(const std::string& key, std::string fallback) {
    read(key, fallback);
    return fallback;
  }

  void finish() const {
    if (!doc_) return;
    for (const auto& [key, value] : doc_->items())
      if (!seen_.count(key) && !value.is_object())
        throw InputError("config: unknown key `" + prefix() + key + "`");
  }

  const json* doc() const { return doc_; }

 private:
  std::string prefix() const { return name_.empty() ? "" : name_ + "."; }
  [[noreturn]] void bad(const std::string& key, const char* what) const {
    throw InputError("config: `" + prefix() + key + "` must be " + what);
  }

  const json* doc_ = nullptr;
  std::string name_;
  std::set<std::string> seen_;
};

const json& section(const json& doc, const char* name) {
  static const json null_json;
  return doc.contains(name) ? doc.at(name) : null_json;
}

void validate(const ExperimentConfig& c) {
  auto require = [](bool ok, const std::string& what) {
    if (!ok) throw InputError("config: " + what);
  };
  require(c.dsbm.has_value() != c.files.has_value(), "exactly one of [dsbm] and [files] is needed");
  if (c.dsbm) {
    const auto& d = *c.dsbm;
    require(d.clusters >= 2, "dsbm.clusters must be at least 2");
    require(!d.ambient || d.clusters >= 3, "an ambient DSBM needs at least 3 clusters");
    require(d.nodes >= d.clusters, "dsbm.nodes must be at least dsbm.clusters");
    require(d.p > 0.0 && d.p <= 1.0, "dsbm.p must lie in (0, 1]");
    require(d.rho >= 1.0, "dsbm.rho must be at least 1");
    require(d.eta >= 0.0 && d.eta <= 0.5, "dsbm.eta must lie in [0, 0.5]");
    for (double eta : c.eta_grid) require(eta >= 0.0 && eta <= 0.5, "sweep.eta entries must lie in [0, 0.5]");
  } else {
    require(!c.files->edges.empty(), "files.edges is required");
    require(c.files->clusters >= 2 || c.files->labels.has_value(),
            "files.clusters is required without a labels file");
    require(c.eta_grid.empty(), "sweep.eta only applies to DSBM datasets");
    require(c.features == FeatureSource::spectral || c.files->features.has_value(),
            "features.source = \"file\" needs files.features");
  }
  require(c.features == FeatureSource::spectral || c.files.has_value(),
          "features.source = \"file\" needs a [files] dataset");
  require(c.hidden >= 1, "model.hidden must be positive");
  require(c.hops >= 2, "model.hops must be at least 2");
  require(c.dropout >= 0.0 && c.dropout < 1.0, "model.dropout must lie in [0, 1)");
  require(c.train.tau >= 0.0, "model.tau must be non-negative");
  const auto& t = c.train;
  require(t.max_epochs >= 1, "training.max_epochs must be positive");
  require(t.patience >= 1 && t.patience <= t.max_epochs,
          "training.patience must lie in [1, max_epochs]");
  require(t.lr >= 0.0 && t.weight_decay >= 0.0, "training.lr and weight_decay must be non-negative");
  require(t.loss.gamma_s >= 0.0 && t.loss.gamma_t >= 0.0, "gamma_s and gamma_t must be non-negative");
  require(t.std_warmup_epochs >= 0 && t.warmup_beta >= 1, "std warm-up settings must be positive");
  if (!c.beta_from_meta_graph) require(t.loss.beta >= 1, "training.beta must be positive");
  require(c.fractions.test >= 0.0 && c.fractions.validation >= 0.0 &&
              c.fractions.test + c.fractions.validation < 1.0,
          "split fractions must be non-negative and sum below 1");
  require(c.seed_ratio >= 0.0 && c.seed_ratio <= 1.0, "splits.seed_ratio must lie in [0, 1]");
  require(c.graphs >= 1 && c.splits >= 1, "replication counts must be at least 1");
  require(c.jobs >= 1, "jobs must be at least 1");
}

std::string format_double(double x) {
  std::ostringstream out;
  out << std::setprecision(10) << x;
  return out.str();
}

}  // namespace

int ExperimentConfig::clusters() const {
  if (dsbm) return dsbm->clusters;
  return files ? files->clusters : 0;
}

ExperimentConfig ExperimentConfig::from_json(const json& doc) {
  if (!doc.is_object()) throw InputError("config: top level must be a table");
  ExperimentConfig c;
  Table top(doc, "");
  top.read("seed", c.seed);
  std::string output;
  top.read("output", output);
  c.output = output;
  top.read("baseline", c.baseline);
  top.read("jobs", c.jobs);
  top.finish();
  static const std::set<std::string> sections = {"dsbm", "files", "features", "model",
                                                 "training", "splits", "replication", "sweep"};
  for (const auto& [key, value] : doc.items())
    if (value.is_object() && !sections.count(key))
      throw InputError("config: unknown table `[" + key + "]`");

  if (doc.contains("dsbm") || !doc.contains("files")) {
    DsbmSettings d;
    Table t(section(doc, "dsbm"), "dsbm");
    d.structure = parse_structure(t.get_string("structure", std::string(to_string(d.structure))));
    t.read("clusters", d.clusters);
    t.read("nodes", d.nodes);
    t.read("p", d.p);
    t.read("rho", d.rho);
    t.read("eta", d.eta);
    t.read("ambient", d.ambient);
    t.read("self_loops", d.self_loops);
    t.finish();
    c.dsbm = d;
  }
  if (doc.contains("files")) {
    FileSettings f;
    Table t(section(doc, "files"), "files");
    f.edges = t.get_string("edges", "");
    if (t.has("labels")) f.labels = t.get_string("labels", "");
    if (t.has("features")) f.features = t.get_string("features", "");
    t.read("clusters", f.clusters);
    t.read("largest_component", f.largest_component);
    t.read("ratio_transform", f.ratio_transform);
    t.finish();
    c.files = f;
  }
  {
    Table t(section(doc, "features"), "features");
    const std::string source = t.get_string("source", "spectral");
    if (source == "spectral")
      c.features = FeatureSource::spectral;
    else if (source == "file")
      c.features = FeatureSource::file;
    else
      throw InputError("config: features.source must be \"spectral\" or \"file\"");
    c.feature_normalization = parse_hermitian_normalization(t.get_string("normalization", "rw"));
    t.finish();
  }
  {
    Table t(section(doc, "model"), "model");
    t.read("hidden", c.hidden);
    t.read("hops", c.hops);
    t.read("dropout", c.dropout);
    t.read("tau", c.train.tau);
    t.finish();
  }
  {
    Table t(section(doc, "training"), "training");
    auto& tr = c.train;
    t.read("max_epochs", tr.max_epochs);
    t.read("patience", tr.patience);
    t.read("lr", tr.lr);
    t.read("weight_decay", tr.weight_decay);
    tr.loss.norm = parse_normalization(t.get_string("norm", std::string(to_string(tr.loss.norm))));
    tr.loss.variant =
        parse_selection(t.get_string("variant", std::string(to_string(tr.loss.variant))));
    if (t.has("beta")) {
      t.read("beta", tr.loss.beta);
      c.beta_from_meta_graph = false;
    }
    t.read("gamma_s", tr.loss.gamma_s);
    t.read("gamma_t", tr.loss.gamma_t);
    t.read("std_warmup_epochs", tr.std_warmup_epochs);
    t.read("warmup_beta", tr.warmup_beta);
    t.finish();
  }
  {
    Table t(section(doc, "splits"), "splits");
    t.read("test", c.fractions.test);
    t.read("validation", c.fractions.validation);
    t.read("seed_ratio", c.seed_ratio);
    t.finish();
  }
  {
    Table t(section(doc, "replication"), "replication");
    t.read("graphs", c.graphs);
    t.read("splits", c.splits);
    t.finish();
  }
  {
    Table t(section(doc, "sweep"), "sweep");
    t.read("eta", c.eta_grid);
    t.finish();
  }
  if (!c.dsbm) c.beta_from_meta_graph = false;
  validate(c);
  return c;
}

json ExperimentConfig::to_json() const {
  json doc;
  doc["seed"] = seed;
  doc["output"] = output.string();
  doc["baseline"] = baseline;
  doc["jobs"] = jobs;
  if (dsbm)
    doc["dsbm"] = {{"structure", to_string(dsbm->structure)}, {"clusters", dsbm->clusters},
                   {"nodes", dsbm->nodes},     {"p", dsbm->p},
                   {"rho", dsbm->rho},         {"eta", dsbm->eta},
                   {"ambient", dsbm->ambient}, {"self_loops", dsbm->self_loops}};
  if (files) {
    json f = {{"edges", files->edges.string()},
              {"clusters", files->clusters},
              {"largest_component", files->largest_component},
              {"ratio_transform", files->ratio_transform}};
    if (files->labels) f["labels"] = files->labels->string();
    if (files->features) f["features"] = files->features->string();
    doc["files"] = f;
  }
  doc["features"] = {
      {"source", features == FeatureSource::spectral ? "spectral" : "file"},
      {"normalization", feature_normalization == HermitianNormalization::random_walk ? "rw" : "herm"}};
  doc["model"] = {{"hidden", hidden}, {"hops", hops}, {"dropout", dropout}, {"tau", train.tau}};
  json tr = {{"max_epochs", train.max_epochs},
             {"patience", train.patience},
             {"lr", train.lr},
             {"weight_decay", train.weight_decay},
             {"norm", to_string(train.loss.norm)},
             {"variant", to_string(train.loss.variant)},
             {"gamma_s", train.loss.gamma_s},
             {"gamma_t", train.loss.gamma_t},
             {"std_warmup_epochs", train.std_warmup_epochs},
             {"warmup_beta", train.warmup_beta}};
  if (!beta_from_meta_graph) tr["beta"] = train.loss.beta;
  doc["training"] = tr;
  doc["splits"] = {{"test", fractions.test},
                   {"validation", fractions.validation},
                   {"seed_ratio", seed_ratio}};
  doc["replication"] = {{"graphs", graphs}, {"splits", splits}};
  if (!eta_grid.empty()) doc["sweep"] = {{"eta", eta_grid}};
  return doc;
}

ExperimentConfig load_config(const std::filesystem::path& path) {
  if (path.extension() == ".json") {
    std::ifstream in(path);
    if (!in) throw InputError("cannot open " + path.string());
    json doc;
    try {
      in >> doc;
    } catch (const json::exception& e) {
      throw InputError(path.string() + ": " + e.what());
    }
    // A sweep manifest carries the resolved config under "config".
    if (doc.contains("config") && doc.contains("runs")) doc = doc.at("config");
    return ExperimentConfig::from_json(doc);
  }
  return ExperimentConfig::from_json(toml::parse_file(path));
}

RunSeeds run_seeds(std::uint64_t master, std::size_t setting, int graph, int split) {
  RunSeeds s;
  const std::uint64_t setting_seed = derive_seed(master, 0x5e7700 + setting);
  s.graph = derive_seed(setting_seed, static_cast<std::uint64_t>(graph));
  const std::uint64_t split_base = derive_seed(s.graph, 0x5917 + static_cast<std::uint64_t>(split));
  s.split = derive_seed(split_base, 1);
  s.init = derive_seed(split_base, 2);
  s.train = derive_seed(split_base, 3);
  return s;
}

namespace {

std::vector<int> gather(const std::vector<int>& v, const std::vector<NodeId>& idx) {
  std::vector<int> out;
  out.reserve(idx.size());
  for (NodeId i : idx) out.push_back(v[static_cast<std::size_t>(i)]);
  return out;
}

}  // namespace

RunResult run_single(const ExperimentConfig& config, std::size_t setting, double eta, int graph,
                     int split) {
  RunResult r;
  r.setting = setting;
  r.eta = eta;
  r.graph_index = graph;
  r.split_index = split;
  r.seeds = run_seeds(config.seed, setting, graph, split);
  const auto start = std::chrono::steady_clock::now();
  try {
    SparseDigraph g;
    std::optional<std::vector<int>> labels;
    std::optional<Matrix> file_features;
    int clusters = config.clusters();
    int beta = config.train.loss.beta;
    if (config.dsbm) {
      const DsbmSettings& d = *config.dsbm;
      DsbmSpec spec;
      spec.meta = build_meta_graph(d.structure, d.clusters, eta, d.ambient, r.seeds.graph);
      spec.nodes = d.nodes;
      spec.p = d.p;
      spec.rho = d.rho;
      spec.seed = r.seeds.graph;
      spec.self_loops = d.self_loops;
      LabeledGraph lg = sample_dsbm(spec);
      g = std::move(lg.graph);
      labels = std::move(lg.labels);
      if (config.beta_from_meta_graph) beta = std::max(1, spec.meta.beta());
    } else {
      const FileSettings& f = *config.files;
      io::Dataset ds = io::load_dataset({f.edges, f.features, f.labels},
                                        {f.largest_component, f.ratio_transform});
      g = std::move(ds.graph);
      labels = std::move(ds.labels);
      file_features = std::move(ds.features);
      if (clusters < 2 && labels) clusters = *std::max_element(labels->begin(), labels->end()) + 1;
    }

    const Matrix x = config.features == FeatureSource::spectral
                         ? make_features(g, clusters, config.feature_normalization)
                         : *file_features;

    Rng split_rng(r.seeds.split);
    const Splits splits = make_splits(g.num_nodes(), labels ? &*labels : nullptr, config.fractions,
                                      config.seed_ratio, split_rng);

    ModelShape shape;
    shape.input_dim = x.cols();
    shape.hidden = config.hidden;
    shape.clusters = clusters;
    shape.hops = config.hops;
    shape.dropout = config.dropout;
    Rng init_rng(r.seeds.init);
    ModelParams params = ModelParams::initialize(shape, init_rng);

    TrainConfig tc = config.train;
    tc.seed = r.seeds.train;
    tc.loss.beta = beta;
    TrainResult trained = train(g, x, std::move(params), splits, tc, labels ? &*labels : nullptr);

    const Dimpa model(g, tc.tau);
    const ForwardTrace eval = model.forward(x, trained.best, Mode::eval);
    r.prediction = argmax_labels(eval.p);
    const Matrix hard = one_hot(r.prediction, clusters);
    r.objective = global_objective(g, hard, tc.loss.norm, tc.loss.variant, beta).value;
    if (labels) {
      r.truth_objective =
          global_objective(g, one_hot(*labels, clusters), tc.loss.norm, tc.loss.variant, beta).value;
      const auto test_pred = gather(r.prediction, splits.test);
      const auto test_truth = gather(*labels, splits.test);
      r.test_ari = adjusted_rand_index(test_pred, test_truth);
      r.test_nmi = normalized_mutual_information(test_pred, test_truth);
      r.full_ari = adjusted_rand_index(r.prediction, *labels);
      if (config.baseline) {
        const std::vector<int> base =
            config.features == FeatureSource::spectral &&
                    config.feature_normalization == HermitianNormalization::random_walk
                ? kmeans(x, clusters, 10, r.seeds.init).labels
                : hermitian_clustering(g, clusters, HermitianNormalization::random_walk,
                                       r.seeds.init);
        r.baseline_ari = adjusted_rand_index(gather(base, splits.test), test_truth);
      }
    }
    r.best_epoch = trained.best_epoch;
    r.epochs = static_cast<int>(trained.log.size());
    r.log = std::move(trained.log);
    r.params = std::move(trained.best);
    r.ok = true;
  } catch (const std::exception& e) {
    r.ok = false;
    r.error = e.what();
  }
  r.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  return r;
}

std::pair<double, double> mean_stderr(const std::vector<double>& values) {
  if (values.empty()) return {std::nan(""), std::nan("")};
  double mean = 0.0;
  for (double v : values) mean += v;
  mean /= static_cast<double>(values.size());
  if (values.size() < 2) return {mean, 0.0};
  double ss = 0.0;
  for (double v : values) ss += (v - mean) * (v - mean);
  const double sd = std::sqrt(ss / static_cast<double>(values.size() - 1));
  return {mean, sd / std::sqrt(static_cast<double>(values.size()))};
}

SweepResult run_sweep(const ExperimentConfig& config,
                      const std::function<void(const RunResult&)>& progress) {
  validate(config);
  std::vector<double> etas = config.eta_grid;
  if (etas.empty()) etas.push_back(config.dsbm ? config.dsbm->eta : 0.0);

  struct Job {
    std::size_t setting;
    int graph;
    int split;
  };
  std::vector<Job> jobs;
  for (std::size_t s = 0; s < etas.size(); ++s)
    for (int g = 0; g < config.graphs; ++g)
      for (int k = 0; k < config.splits; ++k) jobs.push_back({s, g, k});

  SweepResult out;
  out.runs.resize(jobs.size());
  std::atomic<std::size_t> next{0};
  std::mutex progress_mutex;
  auto worker = [&] {
    for (std::size_t j = next++; j < jobs.size(); j = next++) {
      const Job& job = jobs[j];
      out.runs[j] = run_single(config, job.setting, etas[job.setting], job.graph, job.split);
      if (progress) {
        std::lock_guard<std::mutex> lock(progress_mutex);
        progress(out.runs[j]);
      }
    }
  };
  const int workers = std::min<int>(config.jobs, static_cast<int>(jobs.size()));
  if (workers <= 1) {
    worker();
  } else {
    // Concurrent runs share the kernel thread setting; keep each run serial.
    const int saved = kernels::threads();
    kernels::set_threads(1);
    std::vector<std::thread> pool;
    for (int w = 0; w < workers; ++w) pool.emplace_back(worker);
    for (auto& t : pool) t.join();
    kernels::set_threads(saved);
  }

  int failed_total = 0;
  bool some_setting_dead = false;
  for (std::size_t s = 0; s < etas.size(); ++s) {
    SettingSummary sum;
    sum.eta = etas[s];
    std::vector<double> ari, nmi, obj, base;
    for (const RunResult& r : out.runs) {
      if (r.setting != s) continue;
      ++sum.runs;
      if (!r.ok) {
        ++sum.failed;
        continue;
      }
      ari.push_back(r.test_ari);
      nmi.push_back(r.test_nmi);
      obj.push_back(r.objective);
      base.push_back(r.baseline_ari);
    }
    std::tie(sum.ari_mean, sum.ari_stderr) = mean_stderr(ari);
    std::tie(sum.nmi_mean, sum.nmi_stderr) = mean_stderr(nmi);
    std::tie(sum.objective_mean, sum.objective_stderr) = mean_stderr(obj);
    std::tie(sum.baseline_ari_mean, sum.baseline_ari_stderr) = mean_stderr(base);
    failed_total += sum.failed;
    some_setting_dead = some_setting_dead || sum.failed == sum.runs;
    out.summary.push_back(sum);
  }
  if (failed_total == static_cast<int>(out.runs.size()))
    out.exit_code = 4;
  else if (failed_total > 0 || some_setting_dead)
    out.exit_code = 3;
  return out;
}

void write_outputs(const std::filesystem::path& dir, const ExperimentConfig& config,
                   const std::string& config_text, const SweepResult& result, bool save_models) {
  namespace fs = std::filesystem;
  fs::create_directories(dir / "logs");
  auto open = [](const fs::path& p) {
    std::ofstream out(p);
    if (!out) throw InputError("cannot write " + p.string());
    out << std::setprecision(10);
    return out;
  };
  {
    auto out = open(dir / "config.toml");
    if (!config_text.empty())
      out << config_text;
    else
      out << "# resolved configuration (JSON)\n# " << config.to_json().dump() << '\n';
  }
  auto run_name = [](const RunResult& r) {
    std::ostringstream s;
    s << "run_s" << r.setting << "_g" << r.graph_index << "_k" << r.split_index;
    return s.str();
  };
  {
    auto out = open(dir / "runs.csv");
    out << "setting,eta,graph,split,ok,test_ari,test_nmi,full_ari,objective,truth_objective,"
           "baseline_ari,best_epoch,epochs,seconds,graph_seed,split_seed,init_seed,train_seed,"
           "error\n";
    for (const RunResult& r : result.runs) {
      std::string err = r.error;
      std::replace(err.begin(), err.end(), ',', ';');
      std::replace(err.begin(), err.end(), '\n', ' ');
      out << r.setting << ',' << r.eta << ',' << r.graph_index << ',' << r.split_index << ','
          << (r.ok ? 1 : 0) << ',' << r.test_ari << ',' << r.test_nmi << ',' << r.full_ari << ','
          << r.objective << ',' << r.truth_objective << ',' << r.baseline_ari << ','
          << r.best_epoch << ',' << r.epochs << ',' << r.seconds << ',' << r.seeds.graph << ','
          << r.seeds.split << ',' << r.seeds.init << ',' << r.seeds.train << ',' << err << '\n';
    }
  }
  {
    auto out = open(dir / "summary.csv");
    out << "eta,runs,failed,ari_mean,ari_stderr,nmi_mean,nmi_stderr,objective_mean,"
           "objective_stderr,baseline_ari_mean,baseline_ari_stderr\n";
    for (const SettingSummary& s : result.summary)
      out << s.eta << ',' << s.runs << ',' << s.failed << ',' << s.ari_mean << ','
          << s.ari_stderr << ',' << s.nmi_mean << ',' << s.nmi_stderr << ',' << s.objective_mean
          << ',' << s.objective_stderr << ',' << s.baseline_ari_mean << ','
          << s.baseline_ari_stderr << '\n';
  }
  for (const RunResult& r : result.runs) {
    if (!r.ok) continue;
    auto out = open(dir / "logs" / (run_name(r) + ".csv"));
    out << "epoch,train_loss,val_objective,test_ari,selection,beta\n";
    for (const EpochRecord& e : r.log)
      out << e.epoch << ',' << e.train_loss << ',' << e.val_objective << ','
          << (std::isnan(e.test_ari) ? std::string() : format_double(e.test_ari)) << ','
          << e.selection << ',' << e.beta << '\n';
  }
  if (save_models) {
    fs::create_directories(dir / "models");
    for (const RunResult& r : result.runs) {
      if (!r.ok) continue;
      io::save_checkpoint(dir / "models" / (run_name(r) + ".json"), r.params);
      io::write_labels(dir / "models" / (run_name(r) + "_labels.txt"), r.prediction);
    }
  }
  json manifest;
  manifest["program"] = "digrac";
  manifest["master_seed"] = config.seed;
  manifest["config"] = config.to_json();
  manifest["exit_code"] = result.exit_code;
  json runs = json::array();
  for (const RunResult& r : result.runs)
    runs.push_back({{"name", run_name(r)},
                    {"setting", r.setting},
                    {"eta", r.eta},
                    {"graph", r.graph_index},
                    {"split", r.split_index},
                    {"ok", r.ok},
                    {"seeds",
                     {{"graph", r.seeds.graph},
                      {"split", r.seeds.split},
                      {"init", r.seeds.init},
                      {"train", r.seeds.train}}}});
  manifest["runs"] = std::move(runs);
  auto out = open(dir / "manifest.json");
  out << manifest.dump(2) << '\n';
}

}  // namespace digrac
