#pragma once

#include <array>
#include <cstdint>
#include <span>
#include <string_view>
#include <vector>

#include "digrac/graph.hpp"
#include "digrac/types.hpp"

namespace digrac {

struct ModelShape {
  Index input_dim = 0;
  Index hidden = 32;
  int clusters = 2;
  int hops = 2;
  double dropout = 0.5;
};

/// Named view of one parameter tensor, row-major.
struct TensorView {
  std::string_view name;
  double* data;
  Index rows;
  Index cols;
  Index size() const { return rows * cols; }
};

struct ConstTensorView {
  std::string_view name;
  const double* data;
  Index rows;
  Index cols;
  Index size() const { return rows * cols; }
};

/// DIMPA weights. Also used as the gradient container.
struct ModelParams {
  ModelShape shape;
  Matrix source_w1, source_w2;  // d_in×d, d×d (no biases)
  Matrix target_w1, target_w2;
  Vector source_hops, target_hops;  // h+1 scalars each
  Matrix head_w;                    // 2d×K
  Vector head_b;                    // K
  // Bumped on every in-place update; traces remember the value they saw.
  std::uint64_t generation = 0;

  static ModelParams zeros(const ModelShape& shape);
  /// Glorot-uniform weights, unit hop weights, zero head bias.
  static ModelParams initialize(const ModelShape& shape, Rng& rng);

  std::array<TensorView, 8> tensors();
  std::array<ConstTensorView, 8> tensors() const;

  Index parameter_count() const;
  bool all_finite() const;
  double squared_norm() const;
};

enum class Mode { train, eval };

/// Intermediates of one forward pass, enough to run the backward pass.
struct BranchTrace {
  Matrix pre;                   // X W1
  Matrix dropped;               // dropout(relu(pre)), already rescaled
  std::vector<std::uint8_t> keep;  // dropout mask over `pre`, empty when unused
  std::vector<Matrix> hops;     // Āⁱ H for i = 0..h (hops[0] = H)
  Matrix z;                     // Σ ωᵢ Āⁱ H
};

struct ForwardTrace {
  const Matrix* features = nullptr;
  Mode mode = Mode::eval;
  double keep_scale = 1.0;
  BranchTrace source;
  BranchTrace target;
  Matrix z;       // CONCAT(Z^s, Z^t)
  Matrix logits;  // Z W + b
  Matrix p;       // row softmax
  std::uint64_t generation = 0;
};

/// H = Dropout(ReLU(X W1)) W2. An empty mask means no dropout; otherwise the
/// kept activations are scaled by 1/(1 - rate).
Matrix mlp_forward(const Matrix& x, const Matrix& w1, const Matrix& w2,
                   std::span<const std::uint8_t> keep = {}, double keep_scale = 1.0);

/// Σ_{i=0..h} ωᵢ Āⁱ H by repeated sparse products (never forms Āⁱ).
Matrix dimpa_aggregate(const PropagationMatrix& propagation, const Matrix& h,
                       std::span<const double> omega);

/// Numerically stable row softmax.
Matrix row_softmax(const Matrix& logits);

/// DIMPA bound to one graph: caches Ā^s and Ā^t.
class Dimpa {
 public:
  Dimpa(const SparseDigraph& g, double tau = 0.5);

  Index num_nodes() const { return source_.size(); }
  const PropagationMatrix& source() const { return source_; }
  const PropagationMatrix& target() const { return target_; }

  /// In train mode `rng` draws fresh dropout masks; in eval mode it is unused.
  ForwardTrace forward(const Matrix& x, const ModelParams& params, Mode mode,
                       Rng* rng = nullptr) const;

  /// Pulls dL/dP, an additive dL/dlogits and an additive dL/dZ back to every
  /// parameter. Any of the upstream terms may be empty.
  ModelParams backward(const ForwardTrace& trace, const ModelParams& params,
                       const Matrix& grad_p, const Matrix& grad_logits = Matrix(),
                       const Matrix& grad_z = Matrix()) const;

 private:
  PropagationMatrix source_;
  PropagationMatrix target_;
};

}  // namespace digrac
