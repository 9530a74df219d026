#include "digrac/model.hpp"

#include <cmath>
#include <string>

#include "digrac/kernels.hpp"

namespace digrac {

namespace {

void glorot(Matrix& w, Rng& rng) {
  const double bound = std::sqrt(6.0 / static_cast<double>(w.rows() + w.cols()));
  std::uniform_real_distribution<double> dist(-bound, bound);
  for (Index i = 0; i < w.size(); ++i) w.data()[i] = dist(rng);
}

void require(bool ok, const char* what) {
  if (!ok) throw InputError(std::string("dimpa: ") + what);
}

}  // namespace

ModelParams ModelParams::zeros(const ModelShape& shape) {
  require(shape.input_dim > 0 && shape.hidden > 0 && shape.clusters >= 2, "bad model shape");
  require(shape.hops >= 2, "hop count must be at least 2");
  require(shape.dropout >= 0.0 && shape.dropout < 1.0, "dropout must lie in [0, 1)");
  ModelParams p;
  p.shape = shape;
  p.source_w1 = Matrix::Zero(shape.input_dim, shape.hidden);
  p.source_w2 = Matrix::Zero(shape.hidden, shape.hidden);
  p.target_w1 = Matrix::Zero(shape.input_dim, shape.hidden);
  p.target_w2 = Matrix::Zero(shape.hidden, shape.hidden);
  p.source_hops = Vector::Zero(shape.hops + 1);
  p.target_hops = Vector::Zero(shape.hops + 1);
  p.head_w = Matrix::Zero(2 * shape.hidden, shape.clusters);
  p.head_b = Vector::Zero(shape.clusters);
  return p;
}

ModelParams ModelParams::initialize(const ModelShape& shape, Rng& rng) {
  ModelParams p = zeros(shape);
  glorot(p.source_w1, rng);
  glorot(p.source_w2, rng);
  glorot(p.target_w1, rng);
  glorot(p.target_w2, rng);
  glorot(p.head_w, rng);
  p.source_hops.setOnes();
  p.target_hops.setOnes();
  return p;
}

std::array<TensorView, 8> ModelParams::tensors() {
  return {{{"source_w1", source_w1.data(), source_w1.rows(), source_w1.cols()},
           {"source_w2", source_w2.data(), source_w2.rows(), source_w2.cols()},
           {"target_w1", target_w1.data(), target_w1.rows(), target_w1.cols()},
           {"target_w2", target_w2.data(), target_w2.rows(), target_w2.cols()},
           {"source_hops", source_hops.data(), source_hops.size(), 1},
           {"target_hops", target_hops.data(), target_hops.size(), 1},
           {"head_w", head_w.data(), head_w.rows(), head_w.cols()},
           {"head_b", head_b.data(), head_b.size(), 1}}};
}

std::array<ConstTensorView, 8> ModelParams::tensors() const {
  auto views = const_cast<ModelParams*>(this)->tensors();
  std::array<ConstTensorView, 8> out;
  for (std::size_t i = 0; i < views.size(); ++i)
    out[i] = {views[i].name, views[i].data, views[i].rows, views[i].cols};
  return out;
}

Index ModelParams::parameter_count() const {
  Index total = 0;
  for (const auto& t : tensors()) total += t.size();
  return total;
}

bool ModelParams::all_finite() const {
  for (const auto& t : tensors())
    for (Index i = 0; i < t.size(); ++i)
      if (!std::isfinite(t.data[i])) return false;
  return true;
}

double ModelParams::squared_norm() const {
  double sq = 0.0;
  for (const auto& t : tensors())
    for (Index i = 0; i < t.size(); ++i) sq += t.data[i] * t.data[i];
  return sq;
}

Matrix mlp_forward(const Matrix& x, const Matrix& w1, const Matrix& w2,
                   std::span<const std::uint8_t> keep, double keep_scale) {
  require(x.cols() == w1.rows() && w1.cols() == w2.rows(), "MLP shape mismatch");
  Matrix hidden = (x * w1).cwiseMax(0.0);
  if (!keep.empty()) {
    require(static_cast<Index>(keep.size()) == hidden.size(), "dropout mask size mismatch");
    for (Index i = 0; i < hidden.size(); ++i)
      hidden.data()[i] = keep[static_cast<std::size_t>(i)] ? hidden.data()[i] * keep_scale : 0.0;
  }
  return hidden * w2;
}

Matrix dimpa_aggregate(const PropagationMatrix& propagation, const Matrix& h,
                       std::span<const double> omega) {
  require(omega.size() >= 3, "hop count must be at least 2");
  require(h.rows() == propagation.size(), "aggregation shape mismatch");
  Matrix z = omega[0] * h;
  Matrix hop = h;
  Matrix next(h.rows(), h.cols());
  for (std::size_t i = 1; i < omega.size(); ++i) {
    kernels::spmm(propagation.matrix(), hop, next);
    kernels::axpy(omega[i], next, z);
    std::swap(hop, next);
  }
  return z;
}

Matrix row_softmax(const Matrix& logits) {
  Matrix p(logits.rows(), logits.cols());
  for (Index i = 0; i < logits.rows(); ++i) {
    const double top = logits.row(i).maxCoeff();
    double sum = 0.0;
    for (Index k = 0; k < logits.cols(); ++k) {
      p(i, k) = std::exp(logits(i, k) - top);
      sum += p(i, k);
    }
    p.row(i) /= sum;
  }
  return p;
}

Dimpa::Dimpa(const SparseDigraph& g, double tau)
    : source_(g, tau, Direction::source), target_(g, tau, Direction::target) {}

namespace {

void branch_forward(const PropagationMatrix& prop, const Matrix& x, const Matrix& w1,
                    const Matrix& w2, const Vector& omega, bool use_dropout, double rate,
                    double keep_scale, Rng* rng, BranchTrace& out) {
  out.pre = x * w1;
  out.dropped = out.pre.cwiseMax(0.0);
  out.keep.clear();
  if (use_dropout) {
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    out.keep.resize(static_cast<std::size_t>(out.pre.size()));
    for (Index i = 0; i < out.pre.size(); ++i) {
      const bool kept = unit(*rng) >= rate;
      out.keep[static_cast<std::size_t>(i)] = kept ? 1 : 0;
      out.dropped.data()[i] = kept ? out.dropped.data()[i] * keep_scale : 0.0;
    }
  }
  const Index hops = omega.size() - 1;
  out.hops.resize(static_cast<std::size_t>(hops + 1));
  out.hops[0] = out.dropped * w2;
  out.z = omega[0] * out.hops[0];
  for (Index i = 1; i <= hops; ++i) {
    kernels::spmm(prop.matrix(), out.hops[i - 1], out.hops[i]);
    kernels::axpy(omega[i], out.hops[i], out.z);
  }
}

void branch_backward(const PropagationMatrix& prop, const Matrix& x, const Matrix& w2,
                     const Vector& omega, const BranchTrace& trace, double keep_scale,
                     const Matrix& grad_z, Matrix& grad_w1, Matrix& grad_w2, Vector& grad_omega) {
  const Index hops = omega.size() - 1;
  for (Index i = 0; i <= hops; ++i) grad_omega[i] = kernels::dot(grad_z, trace.hops[i]);

  // dH = Σ ωᵢ (Āᵀ)ⁱ dZ, evaluated Horner-style.
  Matrix grad_h = omega[hops] * grad_z;
  Matrix scratch(grad_z.rows(), grad_z.cols());
  for (Index i = hops - 1; i >= 0; --i) {
    kernels::spmm(prop.adjoint(), grad_h, scratch);
    kernels::axpy(omega[i], grad_z, scratch);
    std::swap(grad_h, scratch);
  }

  grad_w2.noalias() = trace.dropped.transpose() * grad_h;
  Matrix grad_pre = grad_h * w2.transpose();
  for (Index i = 0; i < grad_pre.size(); ++i) {
    double g = trace.pre.data()[i] > 0.0 ? grad_pre.data()[i] : 0.0;
    if (!trace.keep.empty()) g = trace.keep[static_cast<std::size_t>(i)] ? g * keep_scale : 0.0;
    grad_pre.data()[i] = g;
  }
  grad_w1.noalias() = x.transpose() * grad_pre;
}

}  // namespace

ForwardTrace Dimpa::forward(const Matrix& x, const ModelParams& params, Mode mode, Rng* rng) const {
  const ModelShape& s = params.shape;
  require(x.rows() == num_nodes(), "feature rows do not match the graph");
  require(x.cols() == s.input_dim, "feature width does not match the model");
  const bool use_dropout = mode == Mode::train && s.dropout > 0.0;
  require(!use_dropout || rng != nullptr, "train-mode forward needs an RNG");

  ForwardTrace trace;
  trace.features = &x;
  trace.mode = mode;
  trace.generation = params.generation;
  trace.keep_scale = use_dropout ? 1.0 / (1.0 - s.dropout) : 1.0;
  branch_forward(source_, x, params.source_w1, params.source_w2, params.source_hops, use_dropout,
                 s.dropout, trace.keep_scale, rng, trace.source);
  branch_forward(target_, x, params.target_w1, params.target_w2, params.target_hops, use_dropout,
                 s.dropout, trace.keep_scale, rng, trace.target);

  trace.z.resize(x.rows(), 2 * s.hidden);
  trace.z.leftCols(s.hidden) = trace.source.z;
  trace.z.rightCols(s.hidden) = trace.target.z;
  trace.logits = trace.z * params.head_w;
  trace.logits.rowwise() += params.head_b.transpose();
  trace.p = row_softmax(trace.logits);
  return trace;
}

ModelParams Dimpa::backward(const ForwardTrace& trace, const ModelParams& params,
                            const Matrix& grad_p, const Matrix& grad_logits,
                            const Matrix& grad_z) const {
  if (trace.generation != params.generation || trace.features == nullptr)
    throw InputError("dimpa: stale forward trace (parameters changed since the forward pass)");
  const ModelShape& s = params.shape;
  const Index n = trace.p.rows();

  Matrix d_logits = Matrix::Zero(n, s.clusters);
  if (grad_p.size() > 0) {
    require(grad_p.rows() == n && grad_p.cols() == s.clusters, "dL/dP shape mismatch");
    const Vector inner = (grad_p.cwiseProduct(trace.p)).rowwise().sum();
    d_logits = trace.p.cwiseProduct(grad_p - inner.replicate(1, s.clusters));
  }
  if (grad_logits.size() > 0) d_logits += grad_logits;

  ModelParams grad = ModelParams::zeros(s);
  grad.head_w.noalias() = trace.z.transpose() * d_logits;
  grad.head_b = d_logits.colwise().sum().transpose();
  Matrix d_z = d_logits * params.head_w.transpose();
  if (grad_z.size() > 0) d_z += grad_z;

  const Matrix d_source = d_z.leftCols(s.hidden);
  const Matrix d_target = d_z.rightCols(s.hidden);
  branch_backward(source_, *trace.features, params.source_w2, params.source_hops, trace.source,
                  trace.keep_scale, d_source, grad.source_w1, grad.source_w2, grad.source_hops);
  branch_backward(target_, *trace.features, params.target_w2, params.target_hops, trace.target,
                  trace.keep_scale, d_target, grad.target_w1, grad.target_w2, grad.target_hops);
  return grad;
}

}  // namespace digrac
