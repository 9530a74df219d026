#include <random>

#include "doctest.h"
#include "oracles.hpp"

#include "digrac/kernels.hpp"

using namespace digrac;

TEST_SUITE("kernels") {

TEST_CASE("serial spmm equals the dense product") {
  std::mt19937_64 rng(1);
  const auto g = oracle::random_graph(40, 0.1, rng);
  const Matrix x = Matrix::Random(40, 7);
  Matrix y(40, 7);
  kernels::serial::spmm(g.out(), x, y);
  CHECK((y - g.to_dense() * x).cwiseAbs().maxCoeff() < 1e-12);
}

TEST_CASE("OpenMP kernels agree with the serial reference") {
  std::mt19937_64 rng(2);
  const auto g = oracle::random_graph(300, 0.03, rng);
  const Matrix x = Matrix::Random(300, 16);
  const Matrix z = Matrix::Random(300, 16);
  Matrix ref(300, 16);
  kernels::serial::spmm(g.out(), x, ref);
  const double dot_ref = kernels::serial::dot(x, z);
  const Matrix gram_ref = kernels::serial::gram(x, z);
  for (int threads : {1, 2, 4}) {
    CAPTURE(threads);
    Matrix y(300, 16);
    kernels::omp::spmm(g.out(), x, y, threads);
    CHECK(y == ref);  // row-parallel, so bitwise equal

    Matrix a = z, b = z;
    kernels::serial::axpy(0.3, x, a);
    kernels::omp::axpy(0.3, x, b, threads);
    CHECK(a == b);

    CHECK(kernels::omp::dot(x, z, threads) == doctest::Approx(dot_ref).epsilon(1e-12));
    CHECK((kernels::omp::gram(x, z, threads) - gram_ref).cwiseAbs().maxCoeff() < 1e-10);
  }
  CHECK((gram_ref - x.transpose() * z).cwiseAbs().maxCoeff() < 1e-10);
  CHECK(dot_ref == doctest::Approx(x.cwiseProduct(z).sum()).epsilon(1e-12));
}

TEST_CASE("dispatch follows the thread setting") {
  const int saved = kernels::threads();
  kernels::set_threads(3);
  CHECK(kernels::threads() == 3);
  kernels::set_threads(0);
  CHECK(kernels::threads() == 1);
  kernels::set_threads(saved);
}

}  // TEST_SUITE
