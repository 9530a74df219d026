#include <filesystem>
#include <fstream>
#include <random>
#include <sstream>

#include "doctest.h"
#include "oracles.hpp"

#include "digrac/io.hpp"

using namespace digrac;
namespace fs = std::filesystem;

namespace {

struct TempDir {
  fs::path path;
  TempDir() {
    path = fs::temp_directory_path() /
           ("digrac_io_" + std::to_string(std::random_device{}()) + std::to_string(reinterpret_cast<std::uintptr_t>(this)));
    fs::create_directories(path);
  }
  ~TempDir() { fs::remove_all(path); }
  fs::path operator/(const std::string& name) const { return path / name; }
};

void write_text(const fs::path& p, const std::string& text) {
  std::ofstream out(p);
  out << text;
}

}  // namespace

TEST_SUITE("io") {

TEST_CASE("edge list parsing") {
  std::istringstream in("# header\n0 1\n1\t2 2.5\n\n2 0 # trailing\n");
  const auto list = io::parse_edge_list(in);
  CHECK(list.num_nodes == 3);
  CHECK(list.names.empty());
  REQUIRE(list.edges.size() == 3);
  CHECK(list.edges[1].weight == 2.5);
  CHECK(list.edges[0].weight == 1.0);
}

TEST_CASE("malformed rows name their line") {
  auto line_of = [](const std::string& text) -> std::size_t {
    std::istringstream in(text);
    try {
      io::parse_edge_list(in, "g.txt");
    } catch (const EdgeError& e) {
      return e.row();
    }
    return 0;
  };
  CHECK(line_of("0 1\n1 2 -3\n") == 2);
  CHECK(line_of("0 1\n\n# c\n1 2 x\n") == 4);
  CHECK(line_of("0 1 1 1\n") == 1);
  CHECK(line_of("0 1 inf\n") == 1);
  std::istringstream in("0 1\n1 2 -3\n");
  try {
    io::parse_edge_list(in, "g.txt");
    FAIL("expected an error");
  } catch (const EdgeError& e) {
    CHECK(std::string(e.what()).find("g.txt:2") != std::string::npos);
    CHECK(std::string(e.what()).find("negative") != std::string::npos);
  }
}

TEST_CASE("named node tokens are interned in order") {
  std::istringstream in("alice bob\nbob carol 2\ncarol alice\n");
  const auto list = io::parse_edge_list(in);
  CHECK(list.names == std::vector<std::string>{"alice", "bob", "carol"});
  CHECK(list.num_nodes == 3);
  CHECK(list.edges[1].src == 1);
  CHECK(list.edges[1].dst == 2);
  // One non-integer token switches the whole file to named ids.
  std::istringstream mixed("5 7\n7 x\n");
  const auto m = io::parse_edge_list(mixed);
  CHECK(m.names == std::vector<std::string>{"5", "7", "x"});
}

TEST_CASE("edge list and label round trip") {
  TempDir dir;
  std::mt19937_64 rng(4);
  const auto g = oracle::random_graph(20, 0.2, rng);
  io::write_edge_list(dir / "g.tsv", g);
  const auto list = io::read_edge_list(dir / "g.tsv");
  CHECK(SparseDigraph::from_edges(list.edges, 20) == g);

  const std::vector<int> labels = {0, 2, 1, 1, 0};
  io::write_labels(dir / "l.txt", labels);
  CHECK(io::read_labels(dir / "l.txt") == labels);

  write_text(dir / "pairs.txt", "2 1\n0 0\n1 3\n");
  CHECK(io::read_labels(dir / "pairs.txt") == std::vector<int>{0, 3, 1});
  write_text(dir / "named.csv", "bob,1\nalice,0\n");
  CHECK(io::read_labels(dir / "named.csv", {"alice", "bob"}) == std::vector<int>{0, 1});
  write_text(dir / "gap.txt", "0 1\n2 1\n");
  CHECK_THROWS_AS(io::read_labels(dir / "gap.txt"), InputError);
  write_text(dir / "mixed.txt", "0\n1 1\n");
  CHECK_THROWS_AS(io::read_labels(dir / "mixed.txt"), InputError);
  write_text(dir / "neg.txt", "0\n-1\n");
  CHECK_THROWS_AS(io::read_labels(dir / "neg.txt"), EdgeError);
  CHECK_THROWS_AS(io::read_labels(dir / "missing.txt"), InputError);
}

TEST_CASE("matrix CSV round trip with a header") {
  TempDir dir;
  Matrix m(3, 2);
  m << 1.0 / 3.0, -2e-17, 4.5, 1e300, 0.0, -7.25;
  io::write_matrix_csv(dir / "m.csv", m, {"a", "b"});
  const Matrix back = io::read_matrix_csv(dir / "m.csv");
  CHECK(back == m);
  io::write_matrix_csv(dir / "plain.csv", m);
  CHECK(io::read_matrix_csv(dir / "plain.csv") == m);
  write_text(dir / "ragged.csv", "1,2\n3\n");
  CHECK_THROWS_AS(io::read_matrix_csv(dir / "ragged.csv"), InputError);
}

TEST_CASE("checkpoint round trip") {
  TempDir dir;
  ModelShape shape;
  shape.input_dim = 4;
  shape.hidden = 6;
  shape.clusters = 3;
  shape.hops = 3;
  shape.dropout = 0.25;
  Rng rng(11);
  ModelParams p = ModelParams::initialize(shape, rng);
  p.head_b << 0.1, -1.0 / 3.0, 2.0;
  io::save_checkpoint(dir / "ck.json", p);
  const ModelParams q = io::load_checkpoint(dir / "ck.json");
  CHECK(q.shape.input_dim == 4);
  CHECK(q.shape.hidden == 6);
  CHECK(q.shape.clusters == 3);
  CHECK(q.shape.hops == 3);
  CHECK(q.shape.dropout == 0.25);
  auto a = p.tensors();
  auto b = q.tensors();
  for (std::size_t t = 0; t < a.size(); ++t) {
    CAPTURE(a[t].name);
    REQUIRE(a[t].size() == b[t].size());
    for (Index i = 0; i < a[t].size(); ++i) CHECK(a[t].data[i] == b[t].data[i]);
  }
  write_text(dir / "bad.json", "{\"format\": \"other\"}");
  CHECK_THROWS_AS(io::load_checkpoint(dir / "bad.json"), InputError);
  write_text(dir / "broken.json", "{");
  CHECK_THROWS_AS(io::load_checkpoint(dir / "broken.json"), InputError);
}

TEST_CASE("dataset loading keeps the largest component and reindexes") {
  TempDir dir;
  // Component {0,1,2,3} and component {4,5}; node 6 is isolated but labeled.
  write_text(dir / "e.txt", "0 1\n1 2\n2 3\n3 0 2\n4 5\n");
  write_text(dir / "l.txt", "0\n0\n1\n1\n2\n2\n1\n");
  write_text(dir / "x.csv", "f0,f1\n0,0\n1,1\n2,2\n3,3\n4,4\n5,5\n6,6\n");
  io::DatasetPaths paths{dir / "e.txt", dir / "x.csv", dir / "l.txt"};
  const auto d = io::load_dataset(paths);
  CHECK(d.graph.num_nodes() == 4);
  CHECK(d.graph.num_edges() == 4);
  CHECK(d.labels == std::vector<int>{0, 0, 1, 1});
  CHECK(d.features->rows() == 4);
  CHECK((*d.features)(3, 1) == 3.0);
  CHECK(d.node_names == std::vector<std::string>{"0", "1", "2", "3"});

  io::DatasetOptions keep_all;
  keep_all.largest_component = false;
  const auto all = io::load_dataset(paths, keep_all);
  CHECK(all.graph.num_nodes() == 7);

  io::DatasetOptions ratio;
  ratio.ratio_transform = true;
  write_text(dir / "r.txt", "0 1 3\n1 0 1\n1 2\n");
  const auto r = io::load_dataset({dir / "r.txt", std::nullopt, std::nullopt}, ratio);
  const Matrix a = r.graph.to_dense();
  CHECK(a(0, 1) == doctest::Approx(0.75));
  CHECK(a(1, 0) == doctest::Approx(0.25));
  CHECK(a(1, 2) == doctest::Approx(1.0));

  write_text(dir / "short.txt", "0\n1\n");
  CHECK_THROWS_AS(io::load_dataset({dir / "e.txt", std::nullopt, dir / "short.txt"}), InputError);
}

TEST_CASE("named dataset keeps original tokens") {
  TempDir dir;
  write_text(dir / "e.txt", "x y\ny z\nq r\n");
  write_text(dir / "l.txt", "z 2\nx 0\ny 1\nq 0\nr 0\n");
  const auto d = io::load_dataset({dir / "e.txt", std::nullopt, dir / "l.txt"});
  CHECK(d.node_names == std::vector<std::string>{"x", "y", "z"});
  CHECK(d.labels == std::vector<int>{0, 1, 2});
  io::write_mapping_csv(dir / "map.csv", d.node_names);
  std::ifstream in(dir / "map.csv");
  std::stringstream text;
  text << in.rdbuf();
  CHECK(text.str() == "new_id,original\n0,x\n1,y\n2,z\n");
}

TEST_CASE("bundled stand-in dataset loads") {
  const fs::path root = DIGRAC_TEST_DATA;
  const auto d = io::load_dataset({root / "standin_edges.tsv", std::nullopt, root / "standin_labels.txt"});
  CHECK(d.graph.num_nodes() == 245);
  CHECK(d.labels->size() == 245);
}

}  // TEST_SUITE
