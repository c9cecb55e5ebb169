#pragma once

#include <random>

#include "statdisc/geometry.hpp"

namespace statdisc::testing {

inline MatrixXcd random_hermitian(int n, std::mt19937_64& rng) {
  std::normal_distribution<double> g;
  MatrixXcd m(n, n);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) m(i, j) = cplx(g(rng), g(rng));
  return (m + m.adjoint()) / 2.0;
}

inline HermitianPencil random_pencil(int n, int d, std::mt19937_64& rng) {
  std::vector<MatrixXcd> a;
  for (int j = 0; j < d; ++j) a.push_back(random_hermitian(n, rng));
  return HermitianPencil(std::move(a));
}

inline VectorXcd random_cvector(int n, std::mt19937_64& rng) {
  std::normal_distribution<double> g;
  VectorXcd v(n);
  for (int i = 0; i < n; ++i) v(i) = cplx(g(rng), g(rng));
  return v;
}

inline VectorXd random_rvector(int n, std::mt19937_64& rng) {
  std::normal_distribution<double> g;
  VectorXd v(n);
  for (int i = 0; i < n; ++i) v(i) = g(rng);
  return v;
}

inline HermitianPencil scalar_pencil(double a) { return HermitianPencil({MatrixXcd::Constant(1, 1, a)}); }

}  // namespace statdisc::testing
