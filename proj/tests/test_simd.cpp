#include <complex>
#include <random>
#include <vector>

#include "doctest.h"
#include "statdisc/simd/kernels.hpp"

using namespace statdisc::simd;

namespace {

std::vector<double> noise(std::size_t n, std::mt19937_64& rng) {
  std::normal_distribution<double> g;
  std::vector<double> v(n);
  for (auto& x : v) x = g(rng);
  return v;
}

std::vector<const KernelTable*> variants() {
  std::vector<const KernelTable*> out{kernels_for(Isa::scalar)};
  if (const KernelTable* t = kernels_for(Isa::avx2)) out.push_back(t);
  return out;
}

const std::size_t kSizes[] = {0, 1, 3, 4, 5, 7, 8, 9, 31, 64, 257};

}  // namespace

TEST_CASE("scalar horner matches a direct power sum") {
  std::mt19937_64 rng(1);
  const KernelTable& k = *kernels_for(Isa::scalar);
  const auto cr = noise(6, rng), ci = noise(6, rng);
  const auto xr = noise(10, rng), xi = noise(10, rng);
  std::vector<double> orr(10), oi(10);
  k.horner(cr.data(), ci.data(), 6, xr.data(), xi.data(), 10, orr.data(), oi.data());
  for (int p = 0; p < 10; ++p) {
    std::complex<double> x(xr[p], xi[p]), acc = 0.0, pw = 1.0;
    for (int j = 0; j < 6; ++j, pw *= x) acc += std::complex<double>(cr[j], ci[j]) * pw;
    CHECK(std::abs(std::complex<double>(orr[p], oi[p]) - acc) < 1e-12 * (1.0 + std::abs(acc)));
  }
}

TEST_CASE("scale_realify matches its definition") {
  std::mt19937_64 rng(2);
  const auto er = noise(7, rng), ei = noise(7, rng);
  std::vector<double> out(14);
  kernels_for(Isa::scalar)->scale_realify(0.3, -1.2, er.data(), ei.data(), 7, out.data());
  for (int k = 0; k < 7; ++k) {
    const std::complex<double> v = std::complex<double>(0.3, -1.2) * std::complex<double>(er[k], ei[k]);
    CHECK(out[2 * k] == doctest::Approx(v.real()).epsilon(1e-14));
    CHECK(out[2 * k + 1] == doctest::Approx(-v.imag()).epsilon(1e-14));
  }
}

TEST_CASE("every variant agrees with the scalar reference") {
  const KernelTable& ref = *kernels_for(Isa::scalar);
  std::mt19937_64 rng(3);
  for (const KernelTable* t : variants()) {
    CAPTURE(isa_name(t->isa));
    for (std::size_t n : kSizes) {
      CAPTURE(n);
      const auto cr = noise(9, rng), ci = noise(9, rng);
      auto xr = noise(n, rng), xi = noise(n, rng);
      for (std::size_t p = 0; p < n; ++p) {  // keep |x| <= 1 like grid points
        const double m = std::max(1.0, std::hypot(xr[p], xi[p]));
        xr[p] /= m;
        xi[p] /= m;
      }
      std::vector<double> a(n), b(n), c(n), e(n);
      ref.horner(cr.data(), ci.data(), 9, xr.data(), xi.data(), n, a.data(), b.data());
      t->horner(cr.data(), ci.data(), 9, xr.data(), xi.data(), n, c.data(), e.data());
      for (std::size_t p = 0; p < n; ++p) {
        CHECK(std::abs(a[p] - c[p]) < 1e-13);
        CHECK(std::abs(b[p] - e[p]) < 1e-13);
      }

      std::vector<double> r1(2 * n), r2(2 * n);
      ref.scale_realify(0.7, 0.2, xr.data(), xi.data(), n, r1.data());
      t->scale_realify(0.7, 0.2, xr.data(), xi.data(), n, r2.data());
      for (std::size_t p = 0; p < 2 * n; ++p) CHECK(std::abs(r1[p] - r2[p]) < 1e-15);

      if (n > 0) {
        for (std::size_t shift : {std::size_t{1}, n / 2, n - 1}) {
          std::vector<double> acc1(n, 0.5), acc2(n, 0.5);
          ref.accumulate_shift_diff(xr.data(), xi.data(), n, shift, acc1.data());
          t->accumulate_shift_diff(xr.data(), xi.data(), n, shift, acc2.data());
          for (std::size_t p = 0; p < n; ++p) CHECK(std::abs(acc1[p] - acc2[p]) < 1e-14);
        }
        CHECK(ref.max_value(xr.data(), n) == t->max_value(xr.data(), n));
      }
    }
  }
}

TEST_CASE("dispatcher returns a usable table") {
  const KernelTable& k = kernels();
  CHECK(kernels_for(k.isa) != nullptr);
  CHECK(!isa_name(k.isa).empty());
  const double v[] = {-3.0, 2.5, 1.0};
  CHECK(k.max_value(v, 3) == 2.5);
}
