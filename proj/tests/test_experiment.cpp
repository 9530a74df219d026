#include <filesystem>
#include <fstream>
#include <random>
#include <sstream>

#include "doctest.h"

#include "digrac/experiment.hpp"
#include "digrac/toml_lite.hpp"

using namespace digrac;
namespace fs = std::filesystem;

namespace {

const char* kTiny = R"(
seed = 7

[dsbm]
structure = "cycle"
clusters = 3
nodes = 90
p = 0.3
eta = 0.05

[model]
hidden = 8

[training]
max_epochs = 30
patience = 10

[replication]
graphs = 2
splits = 3
)";

ExperimentConfig tiny() { return ExperimentConfig::from_json(toml::parse(kTiny)); }

std::string config_error(const std::string& text) {
  try {
    ExperimentConfig::from_json(toml::parse(text));
  } catch (const InputError& e) {
    return e.what();
  }
  return "";
}

std::size_t count_lines(const fs::path& p) {
  std::ifstream in(p);
  std::size_t n = 0;
  for (std::string line; std::getline(in, line);) n += !line.empty();
  return n;
}

}  // namespace

TEST_SUITE("experiment") {

TEST_CASE("config parsing and defaults") {
  const auto c = tiny();
  REQUIRE(c.dsbm.has_value());
  CHECK(c.dsbm->nodes == 90);
  CHECK(c.dsbm->eta == 0.05);
  CHECK(c.hidden == 8);
  CHECK(c.hops == 2);
  CHECK(c.dropout == 0.5);
  CHECK(c.train.lr == 0.01);
  CHECK(c.train.weight_decay == 5e-4);
  CHECK(c.train.loss.norm == Normalization::vol_sum);
  CHECK(c.train.loss.variant == Selection::sort);
  CHECK(c.beta_from_meta_graph);
  CHECK(c.fractions.test == 0.1);
  CHECK(c.fractions.validation == 0.1);
  CHECK(c.graphs == 2);
  CHECK(c.splits == 3);
  CHECK(c.clusters() == 3);

  // The resolved form parses back to the same thing.
  const auto again = ExperimentConfig::from_json(c.to_json());
  CHECK(again.to_json() == c.to_json());

  const auto explicit_beta = ExperimentConfig::from_json(toml::parse("[training]\nbeta = 2\n"));
  CHECK_FALSE(explicit_beta.beta_from_meta_graph);
  CHECK(explicit_beta.train.loss.beta == 2);
}

TEST_CASE("config errors") {
  CHECK(config_error("[dsbm]\nnodez = 5\n").find("dsbm.nodez") != std::string::npos);
  CHECK(config_error("[extra]\na = 1\n").find("[extra]") != std::string::npos);
  CHECK(config_error("seeds = 1\n").find("seeds") != std::string::npos);
  CHECK(config_error("[dsbm]\neta = 0.7\n").find("eta") != std::string::npos);
  CHECK(config_error("[dsbm]\np = \"high\"\n").find("dsbm.p") != std::string::npos);
  CHECK(config_error("[training]\nvariant = \"median\"\n") != "");
  CHECK(config_error("[model]\nhops = 1\n").find("hops") != std::string::npos);
  CHECK(config_error("[splits]\ntest = 0.6\nvalidation = 0.5\n") != "");
  CHECK(config_error("[dsbm]\n[files]\nedges = \"e.txt\"\nclusters = 3\n").find("exactly one") !=
        std::string::npos);
  CHECK(config_error("[files]\nedges = \"e.txt\"\n").find("clusters") != std::string::npos);
  CHECK(config_error("[sweep]\neta = [0.1, 0.9]\n") != "");
  CHECK(config_error("[training]\npatience = 500\nmax_epochs = 100\n") != "");
}

TEST_CASE("mean and standard error") {
  const auto [m, se] = mean_stderr({1.0, 2.0, 3.0, 4.0});
  CHECK(m == 2.5);
  CHECK(se == doctest::Approx(std::sqrt(5.0 / 3.0) / 2.0));
  CHECK(mean_stderr({3.0}).second == 0.0);
  CHECK(std::isnan(mean_stderr({}).first));
}

TEST_CASE("seeds differ across runs and are stable") {
  const auto a = run_seeds(1, 0, 0, 0);
  const auto b = run_seeds(1, 0, 0, 1);
  const auto c = run_seeds(1, 0, 1, 0);
  CHECK(a.graph == b.graph);
  CHECK(a.split != b.split);
  CHECK(a.init != b.init);
  CHECK(a.graph != c.graph);
  CHECK(run_seeds(1, 0, 0, 1).train == b.train);
  CHECK(run_seeds(2, 0, 0, 0).graph != a.graph);
}

TEST_CASE("tiny sweep writes every artifact and replays from its manifest") {
  const fs::path dir = fs::temp_directory_path() / ("digrac_sweep_" + std::to_string(std::random_device{}()));
  auto config = tiny();
  const auto result = run_sweep(config);
  REQUIRE(result.runs.size() == 6);
  CHECK(result.exit_code == 0);
  for (const auto& r : result.runs) {
    CAPTURE(r.error);
    CHECK(r.ok);
    CHECK(r.test_ari >= -1.0);
    CHECK(r.test_ari <= 1.0);
    CHECK(r.epochs >= 1);
    CHECK(r.prediction.size() > 0);
  }
  REQUIRE(result.summary.size() == 1);
  CHECK(result.summary[0].runs == 6);
  CHECK(result.summary[0].failed == 0);

  write_outputs(dir, config, kTiny, result, true);
  CHECK(count_lines(dir / "runs.csv") == 7);
  CHECK(count_lines(dir / "summary.csv") == 2);
  CHECK(fs::exists(dir / "config.toml"));
  CHECK(fs::exists(dir / "manifest.json"));
  CHECK(fs::exists(dir / "logs" / "run_s0_g1_k2.csv"));
  CHECK(fs::exists(dir / "models" / "run_s0_g0_k0.json"));

  const auto replay_config = load_config(dir / "manifest.json");
  const auto replay = run_sweep(replay_config);
  REQUIRE(replay.runs.size() == 6);
  for (std::size_t i = 0; i < 6; ++i) {
    CHECK(replay.runs[i].prediction == result.runs[i].prediction);
    CHECK(replay.runs[i].test_ari == result.runs[i].test_ari);
  }

  config.jobs = 2;
  const auto parallel = run_sweep(config);
  for (std::size_t i = 0; i < 6; ++i) {
    CHECK(parallel.runs[i].prediction == result.runs[i].prediction);
    CHECK(parallel.runs[i].objective == result.runs[i].objective);
  }
  fs::remove_all(dir);
}

TEST_CASE("eta grid produces one summary row per setting") {
  auto config = tiny();
  config.graphs = 1;
  config.splits = 1;
  config.eta_grid = {0.0, 0.2};
  const auto result = run_sweep(config);
  REQUIRE(result.summary.size() == 2);
  CHECK(result.summary[1].eta == 0.2);
  CHECK(result.runs[1].eta == 0.2);
  CHECK(result.runs[0].seeds.graph != result.runs[1].seeds.graph);
}

TEST_CASE("failed runs set the exit code") {
  auto config = tiny();
  config.dsbm.reset();
  FileSettings f;
  f.edges = "/nonexistent/edges.txt";
  f.clusters = 3;
  config.files = f;
  config.beta_from_meta_graph = false;
  config.graphs = 1;
  config.splits = 2;
  const auto result = run_sweep(config);
  CHECK(result.exit_code == 4);
  CHECK_FALSE(result.runs[0].ok);
  CHECK(result.runs[0].error.find("cannot open") != std::string::npos);
}

}  // TEST_SUITE
