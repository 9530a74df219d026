#include "digrac/dsbm.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <set>

#include "digrac/kernels.hpp"

namespace digrac {

MetaStructure parse_structure(std::string_view name) {
  if (name == "cycle") return MetaStructure::cycle;
  if (name == "path") return MetaStructure::path;
  if (name == "complete") return MetaStructure::complete;
  if (name == "star") return MetaStructure::star;
  throw InputError("unknown meta-graph structure '" + std::string(name) + "'");
}

std::string_view to_string(MetaStructure s) {
  switch (s) {
    case MetaStructure::cycle: return "cycle";
    case MetaStructure::path: return "path";
    case MetaStructure::complete: return "complete";
    case MetaStructure::star: return "star";
  }
  return "?";
}

MetaGraph build_meta_graph(MetaStructure structure, int clusters, double eta, bool ambient,
                           std::uint64_t seed) {
  if (clusters < 2) throw InputError("meta-graph needs K >= 2");
  if (ambient && clusters < 3) throw InputError("ambient meta-graph needs K >= 3");
  if (!(eta >= 0.0 && eta <= 0.5)) throw InputError("eta must lie in [0, 0.5]");

  MetaGraph meta;
  meta.clusters = clusters;
  meta.structure = structure;
  meta.ambient = ambient;
  meta.eta = eta;

  // Active block: every cluster except the ambient one.
  const int active = ambient ? clusters - 1 : clusters;
  Matrix f = Matrix::Zero(clusters, clusters);
  std::set<std::pair<int, int>> pairs;
  auto mark = [&](int a, int b) {
    if (a != b) pairs.insert({std::min(a, b), std::max(a, b)});
  };

  switch (structure) {
    case MetaStructure::cycle:
      for (int k = 0; k < active; ++k) {
        const int next = (k + 1) % active;
        const int prev = (k - 1 + active) % active;
        f(k, next) += 1.0 - eta;
        f(k, prev) += eta;
        mark(k, next);
      }
      break;
    case MetaStructure::path:
      for (int k = 0; k + 1 < active; ++k) {
        f(k, k + 1) = 1.0 - eta;
        f(k + 1, k) = eta;
        mark(k, k + 1);
      }
      break;
    case MetaStructure::complete: {
      Rng coin(derive_seed(seed, 0x6d657461ULL));
      for (int k = 0; k < active; ++k)
        for (int l = k + 1; l < active; ++l) {
          f(k, l) = (coin() >> 63) ? 1.0 - eta : eta;
          f(l, k) = 1.0 - f(k, l);
          mark(k, l);
        }
      break;
    }
    case MetaStructure::star: {
      const int center = (active - 1) / 2;
      for (int l = 0; l < active; ++l) {
        if (l == center) continue;
        f(center, l) = (l % 2 == 1) ? 1.0 - eta : eta;
        f(l, center) = 1.0 - f(center, l);
        mark(center, l);
      }
      break;
    }
  }
  for (int k = 0; k < active; ++k) f(k, k) = 0.5;

  Matrix filled = f;
  for (int k = 0; k < clusters; ++k)
    for (int l = 0; l < clusters; ++l) {
      if (k == l && k < active) continue;
      const bool on_structure = k < active && l < active && pairs.count({std::min(k, l), std::max(k, l)});
      if (!on_structure) filled(k, l) = 0.5;
    }

  meta.flow = std::move(f);
  meta.filled_flow = std::move(filled);
  meta.structural_pairs.assign(pairs.begin(), pairs.end());
  return meta;
}

std::vector<Index> cluster_sizes(Index n, int clusters, double rho) {
  if (clusters < 1) throw InputError("cluster_sizes: K must be positive");
  if (n < clusters) throw InputError("cluster_sizes: n must be at least K");
  if (!(rho >= 1.0) || !std::isfinite(rho)) throw InputError("cluster_sizes: rho must be >= 1");

  std::vector<Index> sizes(static_cast<std::size_t>(clusters));
  if (rho == 1.0 || clusters == 1) {
    const Index base = n / clusters;
    std::fill(sizes.begin(), sizes.end(), base);
    sizes.back() = n - base * (clusters - 1);
  } else {
    const double rho0 = std::pow(rho, 1.0 / (clusters - 1));
    sizes[0] = static_cast<Index>(
        std::floor(static_cast<double>(n) * (1.0 - rho0) / (1.0 - std::pow(rho0, clusters))));
    Index used = sizes[0];
    for (int i = 1; i + 1 < clusters; ++i) {
      sizes[i] = static_cast<Index>(std::floor(rho0 * static_cast<double>(sizes[i - 1])));
      used += sizes[i];
    }
    sizes.back() = n - used;
  }
  for (Index s : sizes)
    if (s <= 0)
      throw InputError("cluster_sizes: a cluster came out empty; increase n or lower rho");
  return sizes;
}

LabeledGraph sample_dsbm(const DsbmSpec& spec) {
  const MetaGraph& meta = spec.meta;
  const int k_count = meta.clusters;
  if (!(spec.p >= 0.0 && spec.p <= 1.0)) throw InputError("dsbm: p must lie in [0, 1]");
  if (spec.p * meta.filled_flow.maxCoeff() > 1.0) throw InputError("dsbm: p * max(F~) exceeds 1");
  if (meta.filled_flow.rows() != k_count) throw InputError("dsbm: malformed meta-graph");

  const std::vector<Index> sizes = cluster_sizes(spec.nodes, k_count, spec.rho);

  std::vector<NodeId> order(static_cast<std::size_t>(spec.nodes));
  std::iota(order.begin(), order.end(), 0);
  Rng assign_rng(derive_seed(spec.seed, 1));
  std::shuffle(order.begin(), order.end(), assign_rng);

  LabeledGraph out;
  out.labels.assign(static_cast<std::size_t>(spec.nodes), 0);
  std::vector<std::vector<NodeId>> members(static_cast<std::size_t>(k_count));
  {
    std::size_t cursor = 0;
    for (int k = 0; k < k_count; ++k) {
      members[k].assign(order.begin() + static_cast<std::ptrdiff_t>(cursor),
                        order.begin() + static_cast<std::ptrdiff_t>(cursor + sizes[k]));
      std::sort(members[k].begin(), members[k].end());
      for (NodeId v : members[k]) out.labels[v] = k;
      cursor += static_cast<std::size_t>(sizes[k]);
    }
  }

  // One RNG sub-stream per block, and blocks are concatenated in (k, l)
  // order, so the edge set does not depend on the thread count.
  const int blocks = k_count * k_count;
  std::vector<std::vector<Edge>> block_edges(static_cast<std::size_t>(blocks));
#pragma omp parallel for schedule(dynamic, 1) num_threads(kernels::threads())
  for (int b = 0; b < blocks; ++b) {
    const int k = b / k_count;
    const int l = b % k_count;
    const double q = spec.p * meta.filled_flow(k, l);
    if (q <= 0.0) continue;
    const auto& from = members[k];
    const auto& to = members[l];
    const Index width = static_cast<Index>(to.size());
    const Index total = static_cast<Index>(from.size()) * width;
    auto& sink = block_edges[static_cast<std::size_t>(b)];
    sink.reserve(static_cast<std::size_t>(q * static_cast<double>(total) * 1.1) + 16);
    auto emit = [&](Index t) {
      const NodeId i = from[t / width];
      const NodeId j = to[t % width];
      if (i == j && !spec.self_loops) return;
      sink.push_back({i, j, 1.0});
    };
    if (q >= 1.0) {
      for (Index t = 0; t < total; ++t) emit(t);
      continue;
    }
    Rng rng(derive_seed(spec.seed, 1000 + static_cast<std::uint64_t>(b)));
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    const double log_miss = std::log1p(-q);
    Index t = -1;
    while (true) {
      const double u = 1.0 - unit(rng);  // (0, 1]
      const double skip = std::floor(std::log(u) / log_miss);
      if (skip >= static_cast<double>(total)) break;
      t += 1 + static_cast<Index>(skip);
      if (t >= total) break;
      emit(t);
    }
  }

  std::size_t count = 0;
  for (const auto& e : block_edges) count += e.size();
  std::vector<Edge> edges;
  edges.reserve(count);
  for (auto& e : block_edges) edges.insert(edges.end(), e.begin(), e.end());
  out.graph = SparseDigraph::from_edges(edges, spec.nodes);
  return out;
}

}  // namespace digrac
