#include "statdisc/simd/kernels.hpp"

#include <algorithm>
#include <limits>

namespace statdisc::simd {
namespace {

void horner(const double* cr, const double* ci, std::size_t ncoef, const double* xr,
            const double* xi, std::size_t npts, double* outr, double* outi) {
  for (std::size_t p = 0; p < npts; ++p) {
    if (ncoef == 0) {
      outr[p] = 0.0;
      outi[p] = 0.0;
      continue;
    }
    double ar = cr[ncoef - 1];
    double ai = ci[ncoef - 1];
    for (std::size_t k = ncoef - 1; k-- > 0;) {
      const double tr = ar * xr[p] - ai * xi[p];
      const double ti = ar * xi[p] + ai * xr[p];
      ar = tr + cr[k];
      ai = ti + ci[k];
    }
    outr[p] = ar;
    outi[p] = ai;
  }
}

void scale_realify(double gr, double gi, const double* er, const double* ei, std::size_t n,
                   double* out) {
  for (std::size_t k = 0; k < n; ++k) {
    out[2 * k] = gr * er[k] - gi * ei[k];
    out[2 * k + 1] = -(gr * ei[k] + gi * er[k]);
  }
}

void accumulate_shift_diff(const double* re, const double* im, std::size_t m, std::size_t shift,
                           double* acc) {
  shift %= m;
  const std::size_t head = m - shift;
  for (std::size_t j = 0; j < head; ++j) {
    const double dr = re[j] - re[j + shift];
    const double di = im[j] - im[j + shift];
    acc[j] += dr * dr + di * di;
  }
  for (std::size_t j = head; j < m; ++j) {
    const double dr = re[j] - re[j - head];
    const double di = im[j] - im[j - head];
    acc[j] += dr * dr + di * di;
  }
}

double max_value(const double* a, std::size_t n) {
  double best = -std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < n; ++i) best = std::max(best, a[i]);
  return best;
}

}  // namespace

namespace detail {
const KernelTable scalar_table{Isa::scalar, &horner, &scale_realify, &accumulate_shift_diff,
                               &max_value};
}

}  // namespace statdisc::simd
