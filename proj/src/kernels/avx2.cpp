// AVX2 variants of the Monte-Carlo kernels.  Each lane mirrors one lane of
// the scalar reference operation for operation; the file is compiled with
// default flags and only the functions below are tagged for AVX2, so nothing
// here leaks AVX2 code into shared inline functions.

#include <algorithm>
#include <cstring>

#include "fiesta/kernels/kernels.hpp"

#if defined(__x86_64__) || defined(_M_X64)

#include <immintrin.h>

#define FIESTA_AVX2 __attribute__((target("avx2")))

namespace fiesta::kernels::avx2 {
namespace {

struct VecState {
  __m256i s0, s1, s2, s3;
};

template <int K>
FIESTA_AVX2 inline __m256i rotl(__m256i x) {
  return _mm256_or_si256(_mm256_slli_epi64(x, K), _mm256_srli_epi64(x, 64 - K));
}

FIESTA_AVX2 inline VecState load_state(const LaneState& ls) {
  return VecState{_mm256_load_si256(reinterpret_cast<const __m256i*>(ls.words[0])),
                  _mm256_load_si256(reinterpret_cast<const __m256i*>(ls.words[1])),
                  _mm256_load_si256(reinterpret_cast<const __m256i*>(ls.words[2])),
                  _mm256_load_si256(reinterpret_cast<const __m256i*>(ls.words[3]))};
}

FIESTA_AVX2 inline void store_state(const VecState& st, LaneState& ls) {
  _mm256_store_si256(reinterpret_cast<__m256i*>(ls.words[0]), st.s0);
  _mm256_store_si256(reinterpret_cast<__m256i*>(ls.words[1]), st.s1);
  _mm256_store_si256(reinterpret_cast<__m256i*>(ls.words[2]), st.s2);
  _mm256_store_si256(reinterpret_cast<__m256i*>(ls.words[3]), st.s3);
}

FIESTA_AVX2 inline __m256i next_bits(VecState& st) {
  const __m256i result = _mm256_add_epi64(rotl<23>(_mm256_add_epi64(st.s0, st.s3)), st.s0);
  const __m256i t = _mm256_slli_epi64(st.s1, 17);
  st.s2 = _mm256_xor_si256(st.s2, st.s0);
  st.s3 = _mm256_xor_si256(st.s3, st.s1);
  st.s1 = _mm256_xor_si256(st.s1, st.s2);
  st.s0 = _mm256_xor_si256(st.s0, st.s3);
  st.s2 = _mm256_xor_si256(st.s2, t);
  st.s3 = rotl<45>(st.s3);
  return result;
}

// Advances only the lanes set in `mask` (all-ones 64-bit lanes).
FIESTA_AVX2 inline __m256i next_bits_masked(VecState& st, __m256i mask) {
  VecState nx = st;
  const __m256i out = next_bits(nx);
  st.s0 = _mm256_blendv_epi8(st.s0, nx.s0, mask);
  st.s1 = _mm256_blendv_epi8(st.s1, nx.s1, mask);
  st.s2 = _mm256_blendv_epi8(st.s2, nx.s2, mask);
  st.s3 = _mm256_blendv_epi8(st.s3, nx.s3, mask);
  return out;
}

FIESTA_AVX2 inline __m256d to_open_unit(__m256i bits) {
  const __m256d d = _mm256_castsi256_pd(_mm256_or_si256(
      _mm256_srli_epi64(bits, 12), _mm256_set1_epi64x(static_cast<long long>(kOneBits))));
  return _mm256_add_pd(_mm256_sub_pd(d, _mm256_set1_pd(1.0)), _mm256_set1_pd(0x1p-53));
}

FIESTA_AVX2 inline __m256d log_positive(__m256d x) {
  const __m256i bits = _mm256_castpd_si256(x);
  __m256d e = _mm256_sub_pd(
      _mm256_castsi256_pd(_mm256_or_si256(_mm256_srli_epi64(bits, 52),
                                          _mm256_set1_epi64x(static_cast<long long>(kTwo52Bits)))),
      _mm256_set1_pd(kTwo52));
  __m256d m = _mm256_castsi256_pd(
      _mm256_or_si256(_mm256_and_si256(bits, _mm256_set1_epi64x(static_cast<long long>(kMantissaMask))),
                      _mm256_set1_epi64x(static_cast<long long>(kOneBits))));
  const __m256d big = _mm256_cmp_pd(m, _mm256_set1_pd(kSqrt2), _CMP_GT_OQ);
  m = _mm256_blendv_pd(m, _mm256_mul_pd(m, _mm256_set1_pd(0.5)), big);
  e = _mm256_blendv_pd(e, _mm256_add_pd(e, _mm256_set1_pd(1.0)), big);
  e = _mm256_sub_pd(e, _mm256_set1_pd(1023.0));
  const __m256d f = _mm256_sub_pd(m, _mm256_set1_pd(1.0));
  const __m256d s = _mm256_div_pd(f, _mm256_add_pd(_mm256_set1_pd(2.0), f));
  const __m256d s2 = _mm256_mul_pd(s, s);
  __m256d p = _mm256_set1_pd(kLogCoeffs[0]);
  for (int i = 1; i < 11; ++i) p = _mm256_add_pd(_mm256_mul_pd(p, s2), _mm256_set1_pd(kLogCoeffs[i]));
  const __m256d t = _mm256_mul_pd(s, _mm256_mul_pd(s2, p));
  const __m256d log_m = _mm256_mul_pd(_mm256_set1_pd(2.0), _mm256_add_pd(s, t));
  return _mm256_add_pd(_mm256_mul_pd(e, _mm256_set1_pd(kLn2Hi)),
                       _mm256_add_pd(_mm256_mul_pd(e, _mm256_set1_pd(kLn2Lo)), log_m));
}

FIESTA_AVX2 inline __m256d exp_bounded(__m256d x) {
  const __m256d magic = _mm256_set1_pd(kRoundMagic);
  const __m256d t = _mm256_add_pd(_mm256_mul_pd(x, _mm256_set1_pd(kInvLn2)), magic);
  const __m256d kd = _mm256_sub_pd(t, magic);
  const __m256d r = _mm256_sub_pd(_mm256_sub_pd(x, _mm256_mul_pd(kd, _mm256_set1_pd(kLn2Hi))),
                                  _mm256_mul_pd(kd, _mm256_set1_pd(kLn2Lo)));
  __m256d p = _mm256_set1_pd(kExpCoeffs[0]);
  for (int i = 1; i < 12; ++i) p = _mm256_add_pd(_mm256_mul_pd(p, r), _mm256_set1_pd(kExpCoeffs[i]));
  p = _mm256_add_pd(_mm256_mul_pd(p, r), _mm256_set1_pd(1.0));
  p = _mm256_add_pd(_mm256_mul_pd(p, r), _mm256_set1_pd(1.0));
  const __m256i k = _mm256_sub_epi64(_mm256_castpd_si256(t), _mm256_castpd_si256(magic));
  const __m256d scale =
      _mm256_castsi256_pd(_mm256_slli_epi64(_mm256_add_epi64(k, _mm256_set1_epi64x(1023)), 52));
  return _mm256_mul_pd(p, scale);
}

FIESTA_AVX2 inline void sincos_turns(__m256d u, __m256d& cos_out, __m256d& sin_out) {
  const __m256d magic = _mm256_set1_pd(kRoundMagic);
  const __m256d y4 = _mm256_mul_pd(u, _mm256_set1_pd(4.0));
  const __m256d t = _mm256_add_pd(y4, magic);
  const __m256d q = _mm256_sub_pd(t, magic);
  const __m256d phi = _mm256_mul_pd(_mm256_sub_pd(y4, q), _mm256_set1_pd(kHalfPi));
  const __m256d p2 = _mm256_mul_pd(phi, phi);
  __m256d ps = _mm256_set1_pd(kSinCoeffs[0]);
  for (int i = 1; i < 9; ++i) ps = _mm256_add_pd(_mm256_mul_pd(ps, p2), _mm256_set1_pd(kSinCoeffs[i]));
  __m256d pc = _mm256_set1_pd(kCosCoeffs[0]);
  for (int i = 1; i < 10; ++i) pc = _mm256_add_pd(_mm256_mul_pd(pc, p2), _mm256_set1_pd(kCosCoeffs[i]));
  const __m256d s = _mm256_add_pd(phi, _mm256_mul_pd(_mm256_mul_pd(phi, p2), ps));
  const __m256d c = _mm256_add_pd(_mm256_set1_pd(1.0), _mm256_mul_pd(p2, pc));

  const __m256i quadrant = _mm256_and_si256(_mm256_castpd_si256(t), _mm256_set1_epi64x(3));
  const __m256i one = _mm256_set1_epi64x(1);
  const __m256i two = _mm256_set1_epi64x(2);
  const __m256i three = _mm256_set1_epi64x(3);
  const __m256d odd =
      _mm256_castsi256_pd(_mm256_cmpeq_epi64(_mm256_and_si256(quadrant, one), one));
  const __m256i q1 = _mm256_cmpeq_epi64(quadrant, one);
  const __m256i q2 = _mm256_cmpeq_epi64(quadrant, two);
  const __m256i q3 = _mm256_cmpeq_epi64(quadrant, three);
  const __m256d sign = _mm256_set1_pd(-0.0);
  const __m256d neg_cos = _mm256_castsi256_pd(_mm256_or_si256(q1, q2));
  const __m256d neg_sin = _mm256_castsi256_pd(_mm256_or_si256(q2, q3));
  cos_out = _mm256_xor_pd(_mm256_blendv_pd(c, s, odd), _mm256_and_pd(neg_cos, sign));
  sin_out = _mm256_xor_pd(_mm256_blendv_pd(s, c, odd), _mm256_and_pd(neg_sin, sign));
}

FIESTA_AVX2 inline __m256d box_radius(__m256d u) {
  return _mm256_sqrt_pd(_mm256_mul_pd(_mm256_set1_pd(-2.0), log_positive(u)));
}

FIESTA_AVX2 inline __m256d student_t_block(VecState& st, const StudentTConstants& k) {
  const GammaConstants& g = k.gamma;
  const __m256d one = _mm256_set1_pd(1.0);
  const __m256d d = _mm256_set1_pd(g.d);
  const __m256d c = _mm256_set1_pd(g.c);

  const __m256d r = box_radius(to_open_unit(next_bits(st)));
  __m256d cs, sn;
  sincos_turns(to_open_unit(next_bits(st)), cs, sn);
  const __m256d z = _mm256_mul_pd(r, cs);
  __m256d x = _mm256_mul_pd(r, sn);

  __m256i active = _mm256_set1_epi64x(-1);
  __m256d gamma = _mm256_setzero_pd();
  for (;;) {
    const __m256d u = to_open_unit(next_bits_masked(st, active));
    const __m256d v = _mm256_add_pd(one, _mm256_mul_pd(c, x));
    const __m256d gate = _mm256_cmp_pd(v, _mm256_set1_pd(kGammaGate), _CMP_GT_OQ);
    const __m256d v3 = _mm256_mul_pd(_mm256_mul_pd(v, v), v);
    const __m256d x2 = _mm256_mul_pd(x, x);
    const __m256d squeeze = _mm256_cmp_pd(
        u, _mm256_sub_pd(one, _mm256_mul_pd(_mm256_set1_pd(kGammaSqueeze), _mm256_mul_pd(x2, x2))),
        _CMP_LT_OQ);
    __m256d pass = _mm256_and_pd(gate, squeeze);
    // The log test only matters for active lanes the squeeze did not accept.
    const __m256i undecided = _mm256_andnot_si256(_mm256_castpd_si256(pass), active);
    if (!_mm256_testz_si256(undecided, undecided)) {
      const __m256d v3_safe = _mm256_blendv_pd(one, v3, gate);
      const __m256d half_x2 = _mm256_mul_pd(_mm256_mul_pd(_mm256_set1_pd(0.5), x), x);
      const __m256d rhs =
          _mm256_add_pd(_mm256_sub_pd(_mm256_add_pd(half_x2, d), _mm256_mul_pd(d, v3_safe)),
                        _mm256_mul_pd(d, log_positive(v3_safe)));
      const __m256d lt = _mm256_cmp_pd(log_positive(u), rhs, _CMP_LT_OQ);
      pass = _mm256_or_pd(pass, _mm256_and_pd(gate, lt));
    }
    const __m256i accept = _mm256_and_si256(active, _mm256_castpd_si256(pass));
    gamma = _mm256_blendv_pd(gamma, _mm256_mul_pd(d, v3), _mm256_castsi256_pd(accept));
    active = _mm256_andnot_si256(accept, active);
    if (_mm256_testz_si256(active, active)) break;

    const __m256d r2 = box_radius(to_open_unit(next_bits_masked(st, active)));
    __m256d c2, s2;
    sincos_turns(to_open_unit(next_bits_masked(st, active)), c2, s2);
    x = _mm256_blendv_pd(x, _mm256_mul_pd(r2, c2), _mm256_castsi256_pd(active));
  }
  if (g.boosted) {
    const __m256d u = to_open_unit(next_bits(st));
    const __m256d e = _mm256_mul_pd(log_positive(u), _mm256_set1_pd(g.inv_shape));
    gamma = _mm256_mul_pd(gamma, exp_bounded(_mm256_max_pd(e, _mm256_set1_pd(kExpFloor))));
  }
  return _mm256_div_pd(z, _mm256_sqrt_pd(_mm256_mul_pd(gamma, _mm256_set1_pd(k.two_over_dof))));
}

}  // namespace

FIESTA_AVX2 void fill_student_t(LaneState& lanes, const StudentTConstants& k,
                                std::span<double> out) {
  VecState st = load_state(lanes);
  std::size_t i = 0;
  for (; i + kLanes <= out.size(); i += kLanes) {
    _mm256_storeu_pd(out.data() + i, student_t_block(st, k));
  }
  if (i < out.size()) {
    alignas(32) double block[kLanes];
    _mm256_store_pd(block, student_t_block(st, k));
    std::memcpy(out.data() + i, block, (out.size() - i) * sizeof(double));
  }
  store_state(st, lanes);
}

FIESTA_AVX2 void affine(std::span<double> values, double center, double scale) {
  const __m256d c = _mm256_set1_pd(center);
  const __m256d s = _mm256_set1_pd(scale);
  std::size_t i = 0;
  for (; i + kLanes <= values.size(); i += kLanes) {
    const __m256d v = _mm256_loadu_pd(values.data() + i);
    _mm256_storeu_pd(values.data() + i, _mm256_add_pd(c, _mm256_mul_pd(s, v)));
  }
  for (; i < values.size(); ++i) values[i] = center + scale * values[i];
}

FIESTA_AVX2 void count_row_maxima(std::span<const double* const> rows, std::size_t cols,
                                  std::span<std::uint64_t> wins,
                                  std::vector<std::size_t>& tied_columns) {
  if (rows.empty()) return;
  std::size_t j = 0;
  alignas(32) double idx_out[kLanes];
  for (; j + kLanes <= cols; j += kLanes) {
    __m256d best = _mm256_loadu_pd(rows[0] + j);
    __m256d idx = _mm256_setzero_pd();
    __m256d tie = _mm256_setzero_pd();
    for (std::size_t m = 1; m < rows.size(); ++m) {
      const __m256d v = _mm256_loadu_pd(rows[m] + j);
      const __m256d gt = _mm256_cmp_pd(v, best, _CMP_GT_OQ);
      const __m256d eq = _mm256_cmp_pd(v, best, _CMP_EQ_OQ);
      best = _mm256_blendv_pd(best, v, gt);
      idx = _mm256_blendv_pd(idx, _mm256_set1_pd(static_cast<double>(m)), gt);
      tie = _mm256_or_pd(_mm256_andnot_pd(gt, tie), eq);
    }
    _mm256_store_pd(idx_out, idx);
    const int tie_bits = _mm256_movemask_pd(tie);
    for (std::size_t l = 0; l < kLanes; ++l) {
      if (tie_bits & (1 << l)) {
        tied_columns.push_back(j + l);
      } else {
        ++wins[static_cast<std::size_t>(idx_out[l])];
      }
    }
  }
  if (j < cols) {
    std::vector<const double*> shifted(rows.begin(), rows.end());
    for (auto& p : shifted) p += j;
    const std::size_t first_tie = tied_columns.size();
    scalar::count_row_maxima(shifted, cols - j, wins, tied_columns);
    for (std::size_t t = first_tie; t < tied_columns.size(); ++t) tied_columns[t] += j;
  }
}

}  // namespace fiesta::kernels::avx2

#else

#include "fiesta/core/errors.hpp"

namespace fiesta::kernels::avx2 {

void fill_student_t(LaneState&, const StudentTConstants&, std::span<double>) {
  throw InvalidInput("AVX2 kernels are not available on this architecture");
}
void affine(std::span<double>, double, double) {
  throw InvalidInput("AVX2 kernels are not available on this architecture");
}
void count_row_maxima(std::span<const double* const>, std::size_t, std::span<std::uint64_t>,
                      std::vector<std::size_t>&) {
  throw InvalidInput("AVX2 kernels are not available on this architecture");
}

}  // namespace fiesta::kernels::avx2

#endif
