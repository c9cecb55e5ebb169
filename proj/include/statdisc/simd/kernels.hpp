#pragma once

// Grid-level inner loops. Every kernel has a portable scalar reference and,
// on x86-64, an AVX2/FMA variant picked at runtime. Complex data is passed in
// split (re[], im[]) layout.

#include <cstddef>
#include <string_view>

namespace statdisc::simd {

enum class Isa { scalar, avx2 };

struct KernelTable {
  Isa isa;

  // out[p] = sum_k coef[k] * x[p]^k for p < npts (Horner, highest degree first).
  void (*horner)(const double* coef_re, const double* coef_im, std::size_t ncoef,
                 const double* x_re, const double* x_im, std::size_t npts,
                 double* out_re, double* out_im);

  // out[2k] = Re(g * e[k]), out[2k+1] = -Im(g * e[k]).
  // This is the row of the real-ified operator u -> 2 Re[conj(G) u] restricted
  // to one pointwise coefficient g = 2 conj(G_ij) and one basis trace e.
  void (*scale_realify)(double g_re, double g_im, const double* e_re, const double* e_im,
                        std::size_t n, double* out);

  // acc[j] += |f[j] - f[(j + shift) mod m]|^2
  void (*accumulate_shift_diff)(const double* re, const double* im, std::size_t m,
                                std::size_t shift, double* acc);

  double (*max_value)(const double* a, std::size_t n);
};

// Table chosen from the running CPU. Setting STATDISC_ISA=scalar in the
// environment forces the reference kernels.
const KernelTable& kernels();

// Explicit table, used by the equivalence tests. Returns nullptr when the
// variant was not compiled in or is not supported by this CPU.
const KernelTable* kernels_for(Isa isa);

std::string_view isa_name(Isa isa);

namespace detail {
extern const KernelTable scalar_table;
#if defined(STATDISC_HAS_AVX2)
extern const KernelTable avx2_table;
#endif
}  // namespace detail

}  // namespace statdisc::simd
