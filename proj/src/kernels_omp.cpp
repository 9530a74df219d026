#include <omp.h>

#include <vector>

#include "digrac/kernels.hpp"

namespace digrac::kernels::omp {

void spmm(const Csr& m, const Matrix& x, Matrix& y, int threads) {
  if (y.rows() != m.rows() || y.cols() != x.cols()) y.resize(m.rows(), x.cols());
  const Index d = x.cols();
  const Index rows = m.rows();
  // Each row is owned by one thread and summed in CSR order, so the result
  // is bitwise identical to the serial kernel.
#pragma omp parallel for schedule(dynamic, 256) num_threads(threads)
  for (Index i = 0; i < rows; ++i) {
    double* out = y.data() + i * d;
    std::fill(out, out + d, 0.0);
    for (Index e = m.offsets[i]; e < m.offsets[i + 1]; ++e) {
      const double w = m.weights[e];
      const double* in = x.data() + static_cast<Index>(m.cols[e]) * d;
      for (Index c = 0; c < d; ++c) out[c] += w * in[c];
    }
  }
}

void axpy(double a, const Matrix& x, Matrix& y, int threads) {
  const Index size = x.size();
  const double* in = x.data();
  double* out = y.data();
#pragma omp parallel for schedule(static) num_threads(threads)
  for (Index i = 0; i < size; ++i) out[i] += a * in[i];
}

double dot(const Matrix& x, const Matrix& y, int threads) {
  const Index size = x.size();
  std::vector<double> partial(static_cast<std::size_t>(threads), 0.0);
#pragma omp parallel num_threads(threads)
  {
    const int t = omp_get_thread_num();
    double acc = 0.0;
#pragma omp for schedule(static)
    for (Index i = 0; i < size; ++i) acc += x.data()[i] * y.data()[i];
    partial[static_cast<std::size_t>(t)] = acc;
  }
  double total = 0.0;
  for (double v : partial) total += v;
  return total;
}

Matrix gram(const Matrix& p, const Matrix& q, int threads) {
  std::vector<Matrix> partial(static_cast<std::size_t>(threads),
                              Matrix::Zero(p.cols(), q.cols()));
#pragma omp parallel num_threads(threads)
  {
    Matrix& acc = partial[static_cast<std::size_t>(omp_get_thread_num())];
#pragma omp for schedule(static)
    for (Index i = 0; i < p.rows(); ++i)
      for (Index k = 0; k < p.cols(); ++k) {
        const double a = p(i, k);
        if (a == 0.0) continue;
        for (Index l = 0; l < q.cols(); ++l) acc(k, l) += a * q(i, l);
      }
  }
  Matrix out = Matrix::Zero(p.cols(), q.cols());
  for (const auto& m : partial) out += m;
  return out;
}

}  // namespace digrac::kernels::omp
