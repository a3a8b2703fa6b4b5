// AVX2 variants of the simulation kernels. Compiled with -mavx2 -mfma in its
// own translation unit; selected at runtime only when the CPU reports both.
//
// Contract with the scalar reference:
//   - fill_uniform_pairs is bit-identical (pure integer pipeline),
//   - exp_transform agrees to ~2 ulp (own polynomial log),
//   - reductions agree to ~1e-13 relative (different summation order).

#include <cmath>
#include <cstring>

#include "grw/kernels/kernels.hpp"
#include "grw/kernels/philox.hpp"
#include "kernels_internal.hpp"

#if defined(GRW_HAVE_AVX2_TU) && defined(__AVX2__)

#include <immintrin.h>

namespace grw::kernels::detail {

namespace {

// ---------------------------------------------------------------- philox ---

// 32x32 -> 64 multiply across all eight 32-bit lanes; returns lo/hi words
// back in their original lane positions.
inline void mulhilo8(__m256i c, std::uint32_t mul, __m256i& lo, __m256i& hi) {
  const __m256i m = _mm256_set1_epi32(static_cast<int>(mul));
  __m256i even = _mm256_mul_epu32(c, m);                         // lanes 0,2,4,6
  __m256i odd = _mm256_mul_epu32(_mm256_srli_epi64(c, 32), m);   // lanes 1,3,5,7
  lo = _mm256_blend_epi32(even, _mm256_slli_epi64(odd, 32), 0xAA);
  hi = _mm256_blend_epi32(_mm256_srli_epi64(even, 32), odd, 0xAA);
}

struct Philox8 {
  __m256i c0, c1, c2, c3;  // eight independent counters, SoA

  inline void run(std::uint32_t key0, std::uint32_t key1) {
    __m256i k0 = _mm256_set1_epi32(static_cast<int>(key0));
    __m256i k1 = _mm256_set1_epi32(static_cast<int>(key1));
    const __m256i w0 = _mm256_set1_epi32(static_cast<int>(Philox4x32::kWeyl0));
    const __m256i w1 = _mm256_set1_epi32(static_cast<int>(Philox4x32::kWeyl1));
    for (int round = 0; round < 10; ++round) {
      if (round > 0) {
        k0 = _mm256_add_epi32(k0, w0);
        k1 = _mm256_add_epi32(k1, w1);
      }
      __m256i lo0, hi0, lo1, hi1;
      mulhilo8(c0, Philox4x32::kMul0, lo0, hi0);
      mulhilo8(c2, Philox4x32::kMul1, lo1, hi1);
      __m256i n0 = _mm256_xor_si256(hi1, _mm256_xor_si256(c1, k0));
      __m256i n2 = _mm256_xor_si256(hi0, _mm256_xor_si256(c3, k1));
      c0 = n0;
      c1 = lo1;
      c2 = n2;
      c3 = lo0;
    }
  }
};

// (u53 + 1) * 2^-53 with u53 held as (hi32, lo32) lane pairs; exact, matching
// the scalar conversion bit for bit.
inline __m256d u53_to_unit(__m256i u53_lo, __m256i u53_hi) {
  const __m256i magic = _mm256_set1_epi64x(0x4330000000000000ll);  // 2^52
  const __m256d magic_d = _mm256_castsi256_pd(magic);
  __m256d lo_d = _mm256_sub_pd(
      _mm256_castsi256_pd(_mm256_or_si256(u53_lo, magic)), magic_d);
  __m256d hi_d = _mm256_sub_pd(
      _mm256_castsi256_pd(_mm256_or_si256(u53_hi, magic)), magic_d);
  __m256d v = _mm256_add_pd(_mm256_mul_pd(hi_d, _mm256_set1_pd(4294967296.0)),
                            _mm256_add_pd(lo_d, _mm256_set1_pd(1.0)));
  return _mm256_mul_pd(v, _mm256_set1_pd(0x1p-53));
}

// Assemble the 53-bit draw ((w >> 11) + handled in u53_to_unit) from a
// 64-bit word given as two 32-bit lane registers (even lanes = low words).
// Output: zero-extended lane pairs ready for u53_to_unit.
inline void shift11(__m256i word_lo, __m256i word_hi, __m256i& u53_lo,
                    __m256i& u53_hi) {
  // u64 = (hi << 32) | lo; u53 = u64 >> 11
  // low 32 of u53 = (lo >> 11) | (hi << 21); high 21 = hi >> 11
  __m256i lo_shift = _mm256_srli_epi32(word_lo, 11);
  __m256i hi_carry = _mm256_slli_epi32(word_hi, 21);
  u53_lo = _mm256_or_si256(lo_shift, hi_carry);
  u53_hi = _mm256_srli_epi32(word_hi, 11);
}

void fill_uniform_pairs_avx2(std::uint64_t seed, std::uint64_t trajectory,
                             std::uint64_t first, std::size_t count,
                             double* u_time, double* u_branch) {
  const auto key0 = static_cast<std::uint32_t>(seed);
  const auto key1 = static_cast<std::uint32_t>(seed >> 32);
  const auto t_lo = static_cast<std::uint32_t>(trajectory);
  const auto t_hi = static_cast<std::uint32_t>(trajectory >> 32);

  std::size_t i = 0;
  alignas(32) std::uint32_t idx_lo[8];
  alignas(32) std::uint32_t idx_hi[8];
  for (; i + 8 <= count; i += 8) {
    for (int l = 0; l < 8; ++l) {
      std::uint64_t idx = first + i + static_cast<std::uint64_t>(l);
      idx_lo[l] = static_cast<std::uint32_t>(idx);
      idx_hi[l] = static_cast<std::uint32_t>(idx >> 32);
    }
    Philox8 ph;
    ph.c0 = _mm256_load_si256(reinterpret_cast<const __m256i*>(idx_lo));
    ph.c1 = _mm256_load_si256(reinterpret_cast<const __m256i*>(idx_hi));
    ph.c2 = _mm256_set1_epi32(static_cast<int>(t_lo));
    ph.c3 = _mm256_set1_epi32(static_cast<int>(t_hi));
    ph.run(key0, key1);

    // marble lane l: u_time word = (r1 << 32) | r0, u_branch = (r3 << 32) | r2
    // Process lanes in two int32 half-registers at a time via unpack to
    // 64-lane pairs. Simpler: store and reassemble per 4-lane group.
    alignas(32) std::uint32_t r0[8], r1[8], r2[8], r3[8];
    _mm256_store_si256(reinterpret_cast<__m256i*>(r0), ph.c0);
    _mm256_store_si256(reinterpret_cast<__m256i*>(r1), ph.c1);
    _mm256_store_si256(reinterpret_cast<__m256i*>(r2), ph.c2);
    _mm256_store_si256(reinterpret_cast<__m256i*>(r3), ph.c3);

    for (int half = 0; half < 2; ++half) {
      const std::uint32_t* s0 = r0 + 4 * half;
      const std::uint32_t* s1 = r1 + 4 * half;
      const std::uint32_t* s2 = r2 + 4 * half;
      const std::uint32_t* s3 = r3 + 4 * half;
      __m256i wt_lo = _mm256_setr_epi64x(s0[0], s0[1], s0[2], s0[3]);
      __m256i wt_hi = _mm256_setr_epi64x(s1[0], s1[1], s1[2], s1[3]);
      __m256i wb_lo = _mm256_setr_epi64x(s2[0], s2[1], s2[2], s2[3]);
      __m256i wb_hi = _mm256_setr_epi64x(s3[0], s3[1], s3[2], s3[3]);
      __m256i u_lo, u_hi;
      shift11(wt_lo, wt_hi, u_lo, u_hi);
      _mm256_storeu_pd(u_time + i + 4 * half, u53_to_unit(u_lo, u_hi));
      shift11(wb_lo, wb_hi, u_lo, u_hi);
      _mm256_storeu_pd(u_branch + i + 4 * half, u53_to_unit(u_lo, u_hi));
    }
  }
  // tail marbles through the scalar path (identical results)
  for (; i < count; ++i) {
    philox_pair(seed, trajectory, first + i, u_time[i], u_branch[i]);
  }
}

// ------------------------------------------------------------ vector log ---

// log on (0,1]-range inputs (no zeros, subnormals, negatives by contract).
// x = 2^e * m with m in [sqrt(1/2), sqrt(2)); log m via atanh series.
inline __m256d log_unit(__m256d x) {
  const __m256i bits = _mm256_castpd_si256(x);
  const __m256i exp_raw = _mm256_srli_epi64(bits, 52);
  // int64 -> double for small nonnegative ints via the 2^52 magic constant
  const __m256i magic = _mm256_set1_epi64x(0x4330000000000000ll);
  __m256d e = _mm256_sub_pd(
      _mm256_castsi256_pd(_mm256_or_si256(exp_raw, magic)),
      _mm256_castsi256_pd(magic));
  e = _mm256_sub_pd(e, _mm256_set1_pd(1023.0));

  const __m256i mant_mask = _mm256_set1_epi64x(0x000FFFFFFFFFFFFFll);
  const __m256i one_bits = _mm256_set1_epi64x(0x3FF0000000000000ll);
  __m256d m = _mm256_castsi256_pd(
      _mm256_or_si256(_mm256_and_si256(bits, mant_mask), one_bits));

  // fold m in [sqrt2, 2) down a binade
  const __m256d sqrt2 = _mm256_set1_pd(1.4142135623730951);
  __m256d fold = _mm256_cmp_pd(m, sqrt2, _CMP_GT_OQ);
  m = _mm256_blendv_pd(m, _mm256_mul_pd(m, _mm256_set1_pd(0.5)), fold);
  e = _mm256_add_pd(e, _mm256_and_pd(fold, _mm256_set1_pd(1.0)));

  // s = (m-1)/(m+1); log m = 2s(1 + r/3 + r^2/5 + ...), r = s^2
  const __m256d one = _mm256_set1_pd(1.0);
  __m256d s = _mm256_div_pd(_mm256_sub_pd(m, one), _mm256_add_pd(m, one));
  __m256d r = _mm256_mul_pd(s, s);
  __m256d p = _mm256_set1_pd(1.0 / 19.0);
  p = _mm256_fmadd_pd(p, r, _mm256_set1_pd(1.0 / 17.0));
  p = _mm256_fmadd_pd(p, r, _mm256_set1_pd(1.0 / 15.0));
  p = _mm256_fmadd_pd(p, r, _mm256_set1_pd(1.0 / 13.0));
  p = _mm256_fmadd_pd(p, r, _mm256_set1_pd(1.0 / 11.0));
  p = _mm256_fmadd_pd(p, r, _mm256_set1_pd(1.0 / 9.0));
  p = _mm256_fmadd_pd(p, r, _mm256_set1_pd(1.0 / 7.0));
  p = _mm256_fmadd_pd(p, r, _mm256_set1_pd(1.0 / 5.0));
  p = _mm256_fmadd_pd(p, r, _mm256_set1_pd(1.0 / 3.0));
  p = _mm256_fmadd_pd(p, r, one);
  __m256d log_m = _mm256_mul_pd(_mm256_add_pd(s, s), p);

  // e*ln2 in two parts keeps the |e| <= 1074 contribution exact
  const __m256d ln2_hi = _mm256_set1_pd(6.93147180369123816490e-01);
  const __m256d ln2_lo = _mm256_set1_pd(1.90821492927058770002e-10);
  __m256d res = _mm256_fmadd_pd(e, ln2_lo, log_m);
  res = _mm256_fmadd_pd(e, ln2_hi, res);
  return res;
}

void exp_transform_avx2(const double* u, std::size_t n, double rate,
                        double* t) {
  const __m256d inv = _mm256_set1_pd(-1.0 / rate);
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) {
    __m256d x = _mm256_loadu_pd(u + i);
    _mm256_storeu_pd(t + i, _mm256_mul_pd(log_unit(x), inv));
  }
  double sinv = -1.0 / rate;
  for (; i < n; ++i) t[i] = std::log(u[i]) * sinv;
}

// -------------------------------------------------------------- reducers ---

McBlockResult mc_reduce_avx2(const double* t, const double* u_branch,
                             std::size_t n, double p_out, double t_max) {
  McBlockResult acc;
  const __m256d vt_max = _mm256_set1_pd(t_max);
  const __m256d vp_out = _mm256_set1_pd(p_out);
  __m256d vmax = _mm256_setzero_pd();
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) {
    __m256d vt = _mm256_loadu_pd(t + i);
    __m256d vu = _mm256_loadu_pd(u_branch + i);
    vmax = _mm256_max_pd(vmax, vt);
    __m256d resolved = _mm256_cmp_pd(vt, vt_max, _CMP_LE_OQ);
    __m256d is_in = _mm256_and_pd(resolved,
                                  _mm256_cmp_pd(vu, vp_out, _CMP_GE_OQ));
    acc.resolved += static_cast<unsigned>(
        __builtin_popcount(_mm256_movemask_pd(resolved)));
    acc.k_in += static_cast<unsigned>(
        __builtin_popcount(_mm256_movemask_pd(is_in)));
  }
  alignas(32) double mx[4];
  _mm256_store_pd(mx, vmax);
  acc.max_time = std::max(std::max(mx[0], mx[1]), std::max(mx[2], mx[3]));
  for (; i < n; ++i) {
    if (t[i] > acc.max_time) acc.max_time = t[i];
    if (t[i] <= t_max) {
      ++acc.resolved;
      if (u_branch[i] >= p_out) ++acc.k_in;
    }
  }
  return acc;
}

void cmul_inplace_avx2(std::complex<double>* z, const std::complex<double>* w,
                       std::size_t n) {
  auto* zd = reinterpret_cast<double*>(z);
  const auto* wd = reinterpret_cast<const double*>(w);
  std::size_t i = 0;
  for (; i + 2 <= n; i += 2) {
    __m256d vz = _mm256_loadu_pd(zd + 2 * i);
    __m256d vw = _mm256_loadu_pd(wd + 2 * i);
    __m256d w_re = _mm256_movedup_pd(vw);
    __m256d w_im = _mm256_permute_pd(vw, 0xF);
    __m256d z_swap = _mm256_permute_pd(vz, 0x5);
    __m256d res = _mm256_fmaddsub_pd(vz, w_re, _mm256_mul_pd(z_swap, w_im));
    _mm256_storeu_pd(zd + 2 * i, res);
  }
  for (; i < n; ++i) {
    double a = z[i].real(), b = z[i].imag();
    double c = w[i].real(), d = w[i].imag();
    z[i] = {a * c - b * d, a * d + b * c};
  }
}

void scale_inplace_avx2(std::complex<double>* z, std::size_t n, double s) {
  auto* zd = reinterpret_cast<double*>(z);
  const __m256d vs = _mm256_set1_pd(s);
  std::size_t i = 0;
  for (; i + 2 <= n; i += 2) {
    _mm256_storeu_pd(zd + 2 * i,
                     _mm256_mul_pd(_mm256_loadu_pd(zd + 2 * i), vs));
  }
  for (; i < n; ++i) z[i] *= s;
}

inline double hsum(__m256d v) {
  __m128d lo = _mm256_castpd256_pd128(v);
  __m128d hi = _mm256_extractf128_pd(v, 1);
  lo = _mm_add_pd(lo, hi);
  return _mm_cvtsd_f64(_mm_hadd_pd(lo, lo));
}

double sum_abs2_avx2(const std::complex<double>* z, std::size_t n) {
  const auto* zd = reinterpret_cast<const double*>(z);
  __m256d acc0 = _mm256_setzero_pd();
  __m256d acc1 = _mm256_setzero_pd();
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) {
    __m256d a = _mm256_loadu_pd(zd + 2 * i);
    __m256d b = _mm256_loadu_pd(zd + 2 * i + 4);
    acc0 = _mm256_fmadd_pd(a, a, acc0);
    acc1 = _mm256_fmadd_pd(b, b, acc1);
  }
  double sum = hsum(_mm256_add_pd(acc0, acc1));
  for (; i < n; ++i)
    sum += z[i].real() * z[i].real() + z[i].imag() * z[i].imag();
  return sum;
}

Moments abs2_moments_avx2(const std::complex<double>* z, std::size_t n,
                          double x0, double dx) {
  const auto* zd = reinterpret_cast<const double*>(z);
  __m256d s0 = _mm256_setzero_pd(), s1 = _mm256_setzero_pd(),
          s2 = _mm256_setzero_pd();
  __m256d idx = _mm256_setr_pd(0.0, 1.0, 2.0, 3.0);
  const __m256d four = _mm256_set1_pd(4.0);
  const __m256d vdx = _mm256_set1_pd(dx);
  const __m256d vx0 = _mm256_set1_pd(x0);
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) {
    __m256d a = _mm256_loadu_pd(zd + 2 * i);      // re0 im0 re1 im1
    __m256d b = _mm256_loadu_pd(zd + 2 * i + 4);  // re2 im2 re3 im3
    __m256d sq_a = _mm256_mul_pd(a, a);
    __m256d sq_b = _mm256_mul_pd(b, b);
    // |z|^2 per complex: horizontal pairwise add, then interleave lanes
    __m256d pair = _mm256_hadd_pd(sq_a, sq_b);  // v0 v2 v1 v3
    __m256d v = _mm256_permute4x64_pd(pair, 0xD8);  // v0 v1 v2 v3
    __m256d x = _mm256_fmadd_pd(idx, vdx, vx0);
    s0 = _mm256_add_pd(s0, v);
    s1 = _mm256_fmadd_pd(v, x, s1);
    s2 = _mm256_fmadd_pd(_mm256_mul_pd(v, x), x, s2);
    idx = _mm256_add_pd(idx, four);
  }
  Moments m;
  m.w0 = hsum(s0);
  m.w1 = hsum(s1);
  m.w2 = hsum(s2);
  for (; i < n; ++i) {
    double v = z[i].real() * z[i].real() + z[i].imag() * z[i].imag();
    double x = x0 + dx * static_cast<double>(i);
    m.w0 += v;
    m.w1 += v * x;
    m.w2 += v * x * x;
  }
  return m;
}

double max_abs2_avx2(const std::complex<double>* z, std::size_t n) {
  const auto* zd = reinterpret_cast<const double*>(z);
  __m256d vmax = _mm256_setzero_pd();
  std::size_t i = 0;
  for (; i + 2 <= n; i += 2) {
    __m256d a = _mm256_loadu_pd(zd + 2 * i);
    __m256d sq = _mm256_mul_pd(a, a);
    __m256d v = _mm256_add_pd(sq, _mm256_permute_pd(sq, 0x5));
    vmax = _mm256_max_pd(vmax, v);
  }
  alignas(32) double mx[4];
  _mm256_store_pd(mx, vmax);
  double best = std::max(std::max(mx[0], mx[1]), std::max(mx[2], mx[3]));
  for (; i < n; ++i) {
    double v = z[i].real() * z[i].real() + z[i].imag() * z[i].imag();
    if (v > best) best = v;
  }
  return best;
}

}  // namespace

const KernelTable avx2_table = {
    fill_uniform_pairs_avx2, exp_transform_avx2, mc_reduce_avx2,
    cmul_inplace_avx2,       scale_inplace_avx2, sum_abs2_avx2,
    abs2_moments_avx2,       max_abs2_avx2,
};

}  // namespace grw::kernels::detail

#endif  // GRW_HAVE_AVX2_TU && __AVX2__
