#include "digrac/graph.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>

#include "digrac/kernels.hpp"

namespace digrac {

Csr transpose(const Csr& m, Index cols) {
  Csr t;
  t.offsets.assign(static_cast<std::size_t>(cols) + 1, 0);
  for (NodeId c : m.cols) ++t.offsets[static_cast<std::size_t>(c) + 1];
  std::partial_sum(t.offsets.begin(), t.offsets.end(), t.offsets.begin());
  t.cols.resize(m.cols.size());
  t.weights.resize(m.weights.size());
  std::vector<Index> cursor(t.offsets.begin(), t.offsets.end() - 1);
  for (Index i = 0; i < m.rows(); ++i) {
    for (Index e = m.offsets[i]; e < m.offsets[i + 1]; ++e) {
      const Index slot = cursor[m.cols[e]]++;
      t.cols[slot] = static_cast<NodeId>(i);
      t.weights[slot] = m.weights[e];
    }
  }
  return t;
}

SparseDigraph SparseDigraph::from_edges(std::span<const Edge> edges,
                                        std::optional<Index> num_nodes) {
  Index n = num_nodes.value_or(0);
  if (num_nodes && *num_nodes < 0) throw InputError("negative node count");
  for (std::size_t row = 0; row < edges.size(); ++row) {
    const Edge& e = edges[row];
    if (!std::isfinite(e.weight))
      throw EdgeError(row, "edge row " + std::to_string(row) + ": non-finite weight");
    if (e.weight < 0.0)
      throw EdgeError(row, "edge row " + std::to_string(row) + ": negative weight");
    if (e.src < 0 || e.dst < 0)
      throw EdgeError(row, "edge row " + std::to_string(row) + ": negative node id");
    if (num_nodes) {
      if (e.src >= n || e.dst >= n)
        throw EdgeError(row, "edge row " + std::to_string(row) + ": node id out of range");
    } else {
      n = std::max<Index>(n, std::max(e.src, e.dst) + Index{1});
    }
  }

  std::vector<Edge> sorted(edges.begin(), edges.end());
  std::stable_sort(sorted.begin(), sorted.end(), [](const Edge& a, const Edge& b) {
    return a.src != b.src ? a.src < b.src : a.dst < b.dst;
  });

  SparseDigraph g;
  g.n_ = n;
  g.out_.offsets.assign(static_cast<std::size_t>(n) + 1, 0);
  g.out_.cols.reserve(sorted.size());
  g.out_.weights.reserve(sorted.size());
  for (std::size_t k = 0; k < sorted.size();) {
    const Edge& head = sorted[k];
    double w = 0.0;
    std::size_t j = k;
    for (; j < sorted.size() && sorted[j].src == head.src && sorted[j].dst == head.dst; ++j)
      w += sorted[j].weight;
    g.out_.cols.push_back(head.dst);
    g.out_.weights.push_back(w);
    ++g.out_.offsets[static_cast<std::size_t>(head.src) + 1];
    k = j;
  }
  std::partial_sum(g.out_.offsets.begin(), g.out_.offsets.end(), g.out_.offsets.begin());
  g.in_ = transpose(g.out_, n);
  return g;
}

double SparseDigraph::weight(NodeId i, NodeId j) const {
  const auto first = out_.cols.begin() + out_.offsets[i];
  const auto last = out_.cols.begin() + out_.offsets[i + 1];
  const auto it = std::lower_bound(first, last, j);
  if (it == last || *it != j) return 0.0;
  return out_.weights[static_cast<std::size_t>(it - out_.cols.begin())];
}

std::vector<Edge> SparseDigraph::edges() const {
  std::vector<Edge> out;
  out.reserve(out_.cols.size());
  for (Index i = 0; i < n_; ++i)
    for (Index e = out_.offsets[i]; e < out_.offsets[i + 1]; ++e)
      out.push_back({static_cast<NodeId>(i), out_.cols[e], out_.weights[e]});
  return out;
}

SparseDigraph SparseDigraph::transposed() const {
  SparseDigraph t;
  t.n_ = n_;
  t.out_ = in_;
  t.in_ = out_;
  return t;
}

Vector SparseDigraph::total_degree() const {
  Vector deg = Vector::Zero(n_);
  for (Index i = 0; i < n_; ++i)
    for (Index e = out_.offsets[i]; e < out_.offsets[i + 1]; ++e) {
      deg[i] += out_.weights[e];
      deg[out_.cols[e]] += out_.weights[e];
    }
  return deg;
}

SparseDigraph SparseDigraph::induced_subgraph(std::span<const NodeId> nodes) const {
  std::vector<NodeId> remap(static_cast<std::size_t>(n_), -1);
  for (std::size_t k = 0; k < nodes.size(); ++k) {
    if (nodes[k] < 0 || nodes[k] >= n_) throw InputError("induced_subgraph: node id out of range");
    if (remap[nodes[k]] != -1) throw InputError("induced_subgraph: repeated node id");
    remap[nodes[k]] = static_cast<NodeId>(k);
  }
  std::vector<Edge> kept;
  for (NodeId old_src : nodes)
    for (Index e = out_.offsets[old_src]; e < out_.offsets[old_src + 1]; ++e) {
      const NodeId dst = remap[out_.cols[e]];
      if (dst >= 0) kept.push_back({remap[old_src], dst, out_.weights[e]});
    }
  return from_edges(kept, static_cast<Index>(nodes.size()));
}

Matrix SparseDigraph::to_dense() const {
  Matrix a = Matrix::Zero(n_, n_);
  for (Index i = 0; i < n_; ++i)
    for (Index e = out_.offsets[i]; e < out_.offsets[i + 1]; ++e) a(i, out_.cols[e]) = out_.weights[e];
  return a;
}

bool SparseDigraph::operator==(const SparseDigraph& other) const {
  return n_ == other.n_ && out_.offsets == other.out_.offsets && out_.cols == other.out_.cols &&
         out_.weights == other.out_.weights;
}

PropagationMatrix::PropagationMatrix(const SparseDigraph& g, double tau, Direction direction)
    : tau_(tau), direction_(direction) {
  if (!(tau >= 0.0) || !std::isfinite(tau)) throw InputError("tau must be finite and >= 0");
  const Csr& base = direction == Direction::source ? g.out() : g.in();
  const Index n = g.num_nodes();
  matrix_.offsets.assign(static_cast<std::size_t>(n) + 1, 0);
  matrix_.cols.reserve(base.cols.size() + static_cast<std::size_t>(n));
  matrix_.weights.reserve(base.cols.size() + static_cast<std::size_t>(n));
  for (Index i = 0; i < n; ++i) {
    const std::size_t row_start = matrix_.cols.size();
    bool diagonal_done = false;
    auto push_diagonal = [&](double extra) {
      if (tau > 0.0 || extra != 0.0) {
        matrix_.cols.push_back(static_cast<NodeId>(i));
        matrix_.weights.push_back(extra + tau);
      }
      diagonal_done = true;
    };
    for (Index e = base.offsets[i]; e < base.offsets[i + 1]; ++e) {
      const NodeId j = base.cols[e];
      if (!diagonal_done && j > i) push_diagonal(0.0);
      if (j == i) {
        push_diagonal(base.weights[e]);
        continue;
      }
      matrix_.cols.push_back(j);
      matrix_.weights.push_back(base.weights[e]);
    }
    if (!diagonal_done) push_diagonal(0.0);

    double sum = 0.0;
    for (std::size_t e = row_start; e < matrix_.cols.size(); ++e) sum += matrix_.weights[e];
    if (!(sum > 0.0))
      throw InputError("row_normalize: node " + std::to_string(i) +
                       " has an all-zero row and tau = 0");
    for (std::size_t e = row_start; e < matrix_.cols.size(); ++e) matrix_.weights[e] /= sum;
    matrix_.offsets[static_cast<std::size_t>(i) + 1] = static_cast<Index>(matrix_.cols.size());
  }
  adjoint_ = transpose(matrix_, n);
}

Matrix PropagationMatrix::to_dense() const {
  const Index n = size();
  Matrix a = Matrix::Zero(n, n);
  for (Index i = 0; i < n; ++i)
    for (Index e = matrix_.offsets[i]; e < matrix_.offsets[i + 1]; ++e)
      a(i, matrix_.cols[e]) = matrix_.weights[e];
  return a;
}

PropagationMatrix row_normalize(const SparseDigraph& g, double tau, Direction direction) {
  return PropagationMatrix(g, tau, direction);
}

Matrix spmv(const PropagationMatrix& m, const Matrix& x) {
  if (x.rows() != m.size())
    throw InputError("spmv: operand has " + std::to_string(x.rows()) + " rows, expected " +
                     std::to_string(m.size()));
  Matrix y(m.size(), x.cols());
  kernels::spmm(m.matrix(), x, y);
  return y;
}

Matrix spmv_adjoint(const PropagationMatrix& m, const Matrix& x) {
  if (x.rows() != m.size()) throw InputError("spmv_adjoint: dimension mismatch");
  Matrix y(m.size(), x.cols());
  kernels::spmm(m.adjoint(), x, y);
  return y;
}

namespace {

struct DisjointSets {
  std::vector<NodeId> parent;
  explicit DisjointSets(Index n) : parent(static_cast<std::size_t>(n)) {
    std::iota(parent.begin(), parent.end(), 0);
  }
  NodeId find(NodeId x) {
    while (parent[x] != x) {
      parent[x] = parent[parent[x]];
      x = parent[x];
    }
    return x;
  }
  // Smaller root wins so every root is its component's minimum id.
  void unite(NodeId a, NodeId b) {
    a = find(a);
    b = find(b);
    if (a == b) return;
    if (b < a) std::swap(a, b);
    parent[b] = a;
  }
};

}  // namespace

ComponentExtraction largest_weakly_connected_component(const SparseDigraph& g) {
  const Index n = g.num_nodes();
  if (n == 0) throw InputError("largest_weakly_connected_component: empty graph");
  DisjointSets sets(n);
  const Csr& out = g.out();
  for (Index i = 0; i < n; ++i)
    for (Index e = out.offsets[i]; e < out.offsets[i + 1]; ++e)
      sets.unite(static_cast<NodeId>(i), out.cols[e]);

  std::vector<Index> size(static_cast<std::size_t>(n), 0);
  for (Index i = 0; i < n; ++i) ++size[sets.find(static_cast<NodeId>(i))];
  NodeId best = 0;
  for (Index r = 0; r < n; ++r)
    if (size[r] > size[best]) best = static_cast<NodeId>(r);

  ComponentExtraction result;
  result.old_to_new.assign(static_cast<std::size_t>(n), -1);
  for (Index i = 0; i < n; ++i)
    if (sets.find(static_cast<NodeId>(i)) == best) {
      result.old_to_new[i] = static_cast<NodeId>(result.new_to_old.size());
      result.new_to_old.push_back(static_cast<NodeId>(i));
    }
  result.graph = g.induced_subgraph(result.new_to_old);
  return result;
}

SparseDigraph ratio_transform(const SparseDigraph& g) {
  std::vector<Edge> edges = g.edges();
  for (Edge& e : edges) {
    if (e.weight > 0.0) e.weight = e.weight / (e.weight + g.weight(e.dst, e.src));
  }
  return SparseDigraph::from_edges(edges, g.num_nodes());
}

}  // namespace digrac
