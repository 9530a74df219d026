#pragma once

#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

#include "digrac/graph.hpp"
#include "digrac/types.hpp"

namespace digrac {

enum class MetaStructure { cycle, path, complete, star };

MetaStructure parse_structure(std::string_view name);
std::string_view to_string(MetaStructure s);

/// Meta-graph flow matrix F and its filled version F̃. When `ambient` is set
/// the last cluster is the ambient one.
struct MetaGraph {
  int clusters = 0;
  MetaStructure structure = MetaStructure::cycle;
  bool ambient = false;
  double eta = 0.0;
  Matrix flow;         // F
  Matrix filled_flow;  // F̃
  // Unordered cluster pairs (k < l) that carry a meta-graph edge.
  std::vector<std::pair<int, int>> structural_pairs;

  /// Number of meta-graph edges, i.e. the pair count used by the "sort"
  /// selection. Counts structural pairs, so η = 0 does not halve it.
  int beta() const { return static_cast<int>(structural_pairs.size()); }
};

/// `seed` only matters for the complete structure, whose orientation coin
/// flips come from a dedicated sub-stream.
MetaGraph build_meta_graph(MetaStructure structure, int clusters, double eta, bool ambient,
                           std::uint64_t seed = 0);

struct DsbmSpec {
  MetaGraph meta;
  Index nodes = 0;
  double p = 0.0;
  double rho = 1.0;
  std::uint64_t seed = 0;
  bool self_loops = true;
};

struct LabeledGraph {
  SparseDigraph graph;
  std::vector<int> labels;
};

/// Cluster sizes n_0 <= ... <= n_{K-1} summing to n with size ratio ≈ ρ.
std::vector<Index> cluster_sizes(Index n, int clusters, double rho);

LabeledGraph sample_dsbm(const DsbmSpec& spec);

}  // namespace digrac
