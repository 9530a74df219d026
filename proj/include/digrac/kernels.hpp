#pragma once

// Data-parallel inner loops. Every kernel has a serial reference version,
// kept for testing and as the single-thread path, and an OpenMP version.
// The dispatchers at the bottom pick one by the configured thread count.

#include "digrac/graph.hpp"
#include "digrac/types.hpp"

namespace digrac::kernels {

namespace serial {

/// y = M·x for CSR M (rows × cols) and row-major dense x (cols × d).
void spmm(const Csr& m, const Matrix& x, Matrix& y);

/// y = a·x + y, elementwise over equally shaped matrices.
void axpy(double a, const Matrix& x, Matrix& y);

/// Frobenius inner product Σ x∘y.
double dot(const Matrix& x, const Matrix& y);

/// Pᵀ·Q for n×K inputs, summing rows in index order.
Matrix gram(const Matrix& p, const Matrix& q);

}  // namespace serial

namespace omp {

void spmm(const Csr& m, const Matrix& x, Matrix& y, int threads);
void axpy(double a, const Matrix& x, Matrix& y, int threads);
double dot(const Matrix& x, const Matrix& y, int threads);
Matrix gram(const Matrix& p, const Matrix& q, int threads);

}  // namespace omp

/// Thread count used by the dispatchers. Defaults to 1.
int threads();
void set_threads(int count);

void spmm(const Csr& m, const Matrix& x, Matrix& y);
void axpy(double a, const Matrix& x, Matrix& y);
double dot(const Matrix& x, const Matrix& y);
Matrix gram(const Matrix& p, const Matrix& q);

}  // namespace digrac::kernels
