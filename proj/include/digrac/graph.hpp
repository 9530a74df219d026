#pragma once

#include <optional>
#include <span>
#include <utility>
#include <vector>

#include "digrac/types.hpp"

namespace digrac {

struct Edge {
  NodeId src;
  NodeId dst;
  double weight = 1.0;
};

/// Compressed sparse rows. Column indices within a row are sorted ascending.
struct Csr {
  std::vector<Index> offsets;  // size rows + 1
  std::vector<NodeId> cols;
  std::vector<double> weights;

  Index rows() const { return static_cast<Index>(offsets.size()) - 1; }
  Index nnz() const { return static_cast<Index>(cols.size()); }
};

/// Ingest failure that points at the offending input row.
class EdgeError : public InputError {
 public:
  EdgeError(std::size_t row, const std::string& what)
      : InputError(what), row_(row) {}
  std::size_t row() const { return row_; }

 private:
  std::size_t row_;
};

/// Immutable weighted digraph holding both A (out-rows) and Aᵀ (in-rows).
class SparseDigraph {
 public:
  SparseDigraph() = default;

  /// Builds the CSR pair from triplets. Duplicate (src, dst) entries are
  /// summed. When `num_nodes` is empty, n = max id + 1.
  static SparseDigraph from_edges(std::span<const Edge> edges,
                                  std::optional<Index> num_nodes = std::nullopt);

  Index num_nodes() const { return n_; }
  Index num_edges() const { return out_.nnz(); }

  const Csr& out() const { return out_; }
  const Csr& in() const { return in_; }

  /// A_ij, or 0 when absent. O(log deg).
  double weight(NodeId i, NodeId j) const;

  std::vector<Edge> edges() const;
  SparseDigraph transposed() const;

  /// Σ_j (A_ij + A_ji): the total (out + in) weighted degree.
  Vector total_degree() const;

  /// Induced subgraph on `nodes`; node `nodes[k]` becomes k.
  SparseDigraph induced_subgraph(std::span<const NodeId> nodes) const;

  /// Dense n×n copy. Test and small-instance use only.
  Matrix to_dense() const;

  bool operator==(const SparseDigraph& other) const;

 private:
  Index n_ = 0;
  Csr out_;
  Csr in_;
};

enum class Direction { source, target };

/// Row-normalized Ā = D̃⁻¹(B + τI) where B = A (source) or Aᵀ (target).
/// Keeps the transpose of Ā too, so adjoint products are row-parallel.
class PropagationMatrix {
 public:
  PropagationMatrix(const SparseDigraph& g, double tau, Direction direction);

  Index size() const { return matrix_.rows(); }
  double tau() const { return tau_; }
  Direction direction() const { return direction_; }
  const Csr& matrix() const { return matrix_; }
  const Csr& adjoint() const { return adjoint_; }

  Matrix to_dense() const;

 private:
  Csr matrix_;
  Csr adjoint_;
  double tau_;
  Direction direction_;
};

PropagationMatrix row_normalize(const SparseDigraph& g, double tau, Direction direction);

/// Ā·x without forming anything n×n.
Matrix spmv(const PropagationMatrix& m, const Matrix& x);
/// Āᵀ·x.
Matrix spmv_adjoint(const PropagationMatrix& m, const Matrix& x);

struct ComponentExtraction {
  SparseDigraph graph;
  // old id -> new id, or -1 when the node is outside the component.
  std::vector<NodeId> old_to_new;
  // new id -> old id.
  std::vector<NodeId> new_to_old;
};

/// Largest weakly connected component; ties go to the component holding
/// the smallest original node id.
ComponentExtraction largest_weakly_connected_component(const SparseDigraph& g);

/// A_ij <- A_ij / (A_ij + A_ji) on nonzero entries.
SparseDigraph ratio_transform(const SparseDigraph& g);

Csr transpose(const Csr& m, Index cols);

}  // namespace digrac
