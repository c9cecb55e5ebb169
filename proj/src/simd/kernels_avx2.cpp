#include "statdisc/simd/kernels.hpp"

#include <immintrin.h>

#include <algorithm>
#include <limits>

namespace statdisc::simd {
namespace {

void horner(const double* cr, const double* ci, std::size_t ncoef, const double* xr,
            const double* xi, std::size_t npts, double* outr, double* outi) {
  std::size_t p = 0;
  if (ncoef == 0) {
    for (; p < npts; ++p) outr[p] = outi[p] = 0.0;
    return;
  }
  for (; p + 4 <= npts; p += 4) {
    const __m256d vxr = _mm256_loadu_pd(xr + p);
    const __m256d vxi = _mm256_loadu_pd(xi + p);
    __m256d ar = _mm256_set1_pd(cr[ncoef - 1]);
    __m256d ai = _mm256_set1_pd(ci[ncoef - 1]);
    for (std::size_t k = ncoef - 1; k-- > 0;) {
      // (ar + i ai) * (xr + i xi) + c_k
      const __m256d tr = _mm256_fmsub_pd(ar, vxr, _mm256_mul_pd(ai, vxi));
      const __m256d ti = _mm256_fmadd_pd(ar, vxi, _mm256_mul_pd(ai, vxr));
      ar = _mm256_add_pd(tr, _mm256_set1_pd(cr[k]));
      ai = _mm256_add_pd(ti, _mm256_set1_pd(ci[k]));
    }
    _mm256_storeu_pd(outr + p, ar);
    _mm256_storeu_pd(outi + p, ai);
  }
  for (; p < npts; ++p) {
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
  const __m256d vgr = _mm256_set1_pd(gr);
  const __m256d vgi = _mm256_set1_pd(gi);
  const __m256d neg = _mm256_set1_pd(-0.0);
  std::size_t k = 0;
  for (; k + 4 <= n; k += 4) {
    const __m256d vr = _mm256_loadu_pd(er + k);
    const __m256d vi = _mm256_loadu_pd(ei + k);
    const __m256d re = _mm256_fmsub_pd(vgr, vr, _mm256_mul_pd(vgi, vi));
    const __m256d im = _mm256_xor_pd(_mm256_fmadd_pd(vgr, vi, _mm256_mul_pd(vgi, vr)), neg);
    const __m256d lo = _mm256_unpacklo_pd(re, im);  // re0 im0 re2 im2
    const __m256d hi = _mm256_unpackhi_pd(re, im);  // re1 im1 re3 im3
    _mm256_storeu_pd(out + 2 * k, _mm256_permute2f128_pd(lo, hi, 0x20));
    _mm256_storeu_pd(out + 2 * k + 4, _mm256_permute2f128_pd(lo, hi, 0x31));
  }
  for (; k < n; ++k) {
    out[2 * k] = gr * er[k] - gi * ei[k];
    out[2 * k + 1] = -(gr * ei[k] + gi * er[k]);
  }
}

void accumulate_span(const double* re, const double* im, const double* re2, const double* im2,
                     std::size_t len, double* acc) {
  std::size_t j = 0;
  for (; j + 4 <= len; j += 4) {
    const __m256d dr = _mm256_sub_pd(_mm256_loadu_pd(re + j), _mm256_loadu_pd(re2 + j));
    const __m256d di = _mm256_sub_pd(_mm256_loadu_pd(im + j), _mm256_loadu_pd(im2 + j));
    __m256d a = _mm256_loadu_pd(acc + j);
    a = _mm256_fmadd_pd(dr, dr, a);
    a = _mm256_fmadd_pd(di, di, a);
    _mm256_storeu_pd(acc + j, a);
  }
  for (; j < len; ++j) {
    const double dr = re[j] - re2[j];
    const double di = im[j] - im2[j];
    acc[j] += dr * dr + di * di;
  }
}

void accumulate_shift_diff(const double* re, const double* im, std::size_t m, std::size_t shift,
                           double* acc) {
  shift %= m;
  const std::size_t head = m - shift;
  accumulate_span(re, im, re + shift, im + shift, head, acc);
  accumulate_span(re + head, im + head, re, im, shift, acc + head);
}

double max_value(const double* a, std::size_t n) {
  double best = -std::numeric_limits<double>::infinity();
  std::size_t i = 0;
  if (n >= 4) {
    __m256d vb = _mm256_loadu_pd(a);
    for (i = 4; i + 4 <= n; i += 4) vb = _mm256_max_pd(vb, _mm256_loadu_pd(a + i));
    alignas(32) double lanes[4];
    _mm256_store_pd(lanes, vb);
    best = std::max(std::max(lanes[0], lanes[1]), std::max(lanes[2], lanes[3]));
  }
  for (; i < n; ++i) best = std::max(best, a[i]);
  return best;
}

}  // namespace

namespace detail {
const KernelTable avx2_table{Isa::avx2, &horner, &scale_realify, &accumulate_shift_diff,
                             &max_value};
}

}  // namespace statdisc::simd
