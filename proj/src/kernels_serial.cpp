#include <atomic>

#include "digrac/kernels.hpp"

namespace digrac::kernels {

namespace {
std::atomic<int> g_threads{1};

void check_spmm_shapes(const Csr& m, const Matrix& x, Matrix& y) {
  if (y.rows() != m.rows() || y.cols() != x.cols()) y.resize(m.rows(), x.cols());
}
}  // namespace

namespace serial {

void spmm(const Csr& m, const Matrix& x, Matrix& y) {
  check_spmm_shapes(m, x, y);
  const Index d = x.cols();
  for (Index i = 0; i < m.rows(); ++i) {
    double* out = y.data() + i * d;
    std::fill(out, out + d, 0.0);
    for (Index e = m.offsets[i]; e < m.offsets[i + 1]; ++e) {
      const double w = m.weights[e];
      const double* in = x.data() + static_cast<Index>(m.cols[e]) * d;
      for (Index c = 0; c < d; ++c) out[c] += w * in[c];
    }
  }
}

void axpy(double a, const Matrix& x, Matrix& y) {
  const Index size = x.size();
  const double* in = x.data();
  double* out = y.data();
  for (Index i = 0; i < size; ++i) out[i] += a * in[i];
}

double dot(const Matrix& x, const Matrix& y) {
  const Index size = x.size();
  double acc = 0.0;
  for (Index i = 0; i < size; ++i) acc += x.data()[i] * y.data()[i];
  return acc;
}

Matrix gram(const Matrix& p, const Matrix& q) {
  Matrix out = Matrix::Zero(p.cols(), q.cols());
  for (Index i = 0; i < p.rows(); ++i)
    for (Index k = 0; k < p.cols(); ++k) {
      const double a = p(i, k);
      if (a == 0.0) continue;
      for (Index l = 0; l < q.cols(); ++l) out(k, l) += a * q(i, l);
    }
  return out;
}

}  // namespace serial

int threads() { return g_threads.load(); }
void set_threads(int count) { g_threads.store(count < 1 ? 1 : count); }

void spmm(const Csr& m, const Matrix& x, Matrix& y) {
  if (threads() > 1)
    omp::spmm(m, x, y, threads());
  else
    serial::spmm(m, x, y);
}

void axpy(double a, const Matrix& x, Matrix& y) {
  if (threads() > 1)
    omp::axpy(a, x, y, threads());
  else
    serial::axpy(a, x, y);
}

double dot(const Matrix& x, const Matrix& y) {
  return threads() > 1 ? omp::dot(x, y, threads()) : serial::dot(x, y);
}

Matrix gram(const Matrix& p, const Matrix& q) {
  return threads() > 1 ? omp::gram(p, q, threads()) : serial::gram(p, q);
}

}  // namespace digrac::kernels
