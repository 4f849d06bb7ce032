#pragma once

// Scalar elementary functions and random variate generators shared by the
// scalar and AVX2 kernels.
//
// Every function here uses only +, -, *, /, sqrt, comparisons and bit
// manipulation, in a fixed evaluation order, so the vector kernels can
// reproduce the results bit for bit.  Build with -ffp-contract=off.

#include <bit>
#include <cmath>
#include <cstdint>

#include "fiesta/core/rng.hpp"

namespace fiesta::kernels {

inline constexpr double kSqrt2 = 1.4142135623730951;
inline constexpr double kLn2Hi = 6.93147180369123816490e-01;
inline constexpr double kLn2Lo = 1.90821492927058770002e-10;
inline constexpr double kInvLn2 = 1.4426950408889634;
inline constexpr double kHalfPi = 1.5707963267948966;
inline constexpr double kRoundMagic = 6755399441055744.0;  // 1.5 * 2^52
inline constexpr double kTwo52 = 4503599627370496.0;
inline constexpr std::uint64_t kTwo52Bits = 0x4330000000000000ULL;
inline constexpr std::uint64_t kMantissaMask = 0x000fffffffffffffULL;
inline constexpr std::uint64_t kOneBits = 0x3ff0000000000000ULL;

// log(1+f) = 2 atanh(s) with s = f/(2+f); coefficients 1/(2k+1), k = 11..1.
inline constexpr double kLogCoeffs[] = {
    1.0 / 23.0, 1.0 / 21.0, 1.0 / 19.0, 1.0 / 17.0, 1.0 / 15.0, 1.0 / 13.0,
    1.0 / 11.0, 1.0 / 9.0,  1.0 / 7.0,  1.0 / 5.0,  1.0 / 3.0,
};

// exp(r) Taylor coefficients 1/k!, k = 13..2.
inline constexpr double kExpCoeffs[] = {
    1.0 / 6227020800.0, 1.0 / 479001600.0, 1.0 / 39916800.0, 1.0 / 3628800.0,
    1.0 / 362880.0,     1.0 / 40320.0,     1.0 / 5040.0,     1.0 / 720.0,
    1.0 / 120.0,        1.0 / 24.0,        1.0 / 6.0,        1.0 / 2.0,
};

// sin(p)/p - 1 = p^2 * sum_k (-1)^k p^(2k-2) / (2k+1)!, k = 9..1.
inline constexpr double kSinCoeffs[] = {
    -1.0 / 121645100408832000.0, 1.0 / 355687428096000.0, -1.0 / 1307674368000.0,
    1.0 / 6227020800.0,          -1.0 / 39916800.0,       1.0 / 362880.0,
    -1.0 / 5040.0,               1.0 / 120.0,             -1.0 / 6.0,
};

// cos(p) - 1 = p^2 * sum_k (-1)^k p^(2k-2) / (2k)!, k = 10..1.
inline constexpr double kCosCoeffs[] = {
    1.0 / 2432902008176640000.0, -1.0 / 6402373705728000.0, 1.0 / 20922789888000.0,
    -1.0 / 87178291200.0,        1.0 / 479001600.0,         -1.0 / 3628800.0,
    1.0 / 40320.0,               -1.0 / 720.0,              1.0 / 24.0,
    -1.0 / 2.0,
};

// Inputs to the Marsaglia-Tsang gamma sampler.  Shapes below
// one are drawn at shape+1 and scaled by U^(1/shape).
struct GammaConstants {
  double shape = 1.0;
  double d = 2.0 / 3.0;
  double c = 0.0;
  double inv_shape = 1.0;
  bool boosted = false;
};

inline GammaConstants make_gamma(double shape) {
  GammaConstants k;
  k.shape = shape;
  k.boosted = shape < 1.0;
  k.d = (k.boosted ? shape + 1.0 : shape) - 1.0 / 3.0;
  k.c = 1.0 / std::sqrt(9.0 * k.d);
  k.inv_shape = 1.0 / shape;
  return k;
}

struct StudentTConstants {
  double dof = 1.0;
  double two_over_dof = 2.0;
  GammaConstants gamma;
};

inline StudentTConstants make_student_t(double dof) {
  return StudentTConstants{dof, 2.0 / dof, make_gamma(0.5 * dof)};
}

// Candidates with 1 + c*x at or below this are rejected outright; the
// acceptance test would reject them anyway and log(v^3) stays finite.
inline constexpr double kGammaGate = 1e-50;

// Marsaglia-Tsang squeeze: u < 1 - 0.0331 x^4 accepts without logarithms.
inline constexpr double kGammaSqueeze = 0.0331;

// Natural log for normal positive finite x.
inline double log_positive(double x) {
  const std::uint64_t bits = std::bit_cast<std::uint64_t>(x);
  double e = std::bit_cast<double>((bits >> 52) | kTwo52Bits) - kTwo52;
  double m = std::bit_cast<double>((bits & kMantissaMask) | kOneBits);
  if (m > kSqrt2) {
    m = m * 0.5;
    e = e + 1.0;
  }
  e = e - 1023.0;
  const double f = m - 1.0;
  const double s = f / (2.0 + f);
  const double s2 = s * s;
  double p = kLogCoeffs[0];
  for (int i = 1; i < 11; ++i) p = p * s2 + kLogCoeffs[i];
  const double t = s * (s2 * p);
  const double log_m = 2.0 * (s + t);
  return e * kLn2Hi + (e * kLn2Lo + log_m);
}

// exp(x) for x in [-708, 709].
// Smallest argument exp_bounded handles; the boosted gamma path clamps to it
// (tiny shapes can push U^(1/shape) below the normal range).
inline constexpr double kExpFloor = -708.0;

inline double exp_bounded(double x) {
  const double t = x * kInvLn2 + kRoundMagic;
  const double kd = t - kRoundMagic;
  const double r = (x - kd * kLn2Hi) - kd * kLn2Lo;
  double p = kExpCoeffs[0];
  for (int i = 1; i < 12; ++i) p = p * r + kExpCoeffs[i];
  p = p * r + 1.0;
  p = p * r + 1.0;
  const std::int64_t k =
      std::bit_cast<std::int64_t>(t) - std::bit_cast<std::int64_t>(kRoundMagic);
  const double scale = std::bit_cast<double>(static_cast<std::uint64_t>(k + 1023) << 52);
  return p * scale;
}

// cos(2 pi u) and sin(2 pi u) for u in [0, 1).
inline void sincos_turns(double u, double& cos_out, double& sin_out) {
  const double y4 = u * 4.0;
  const double t = y4 + kRoundMagic;
  const double q = t - kRoundMagic;
  const double phi = (y4 - q) * kHalfPi;
  const double p2 = phi * phi;
  double ps = kSinCoeffs[0];
  for (int i = 1; i < 9; ++i) ps = ps * p2 + kSinCoeffs[i];
  double pc = kCosCoeffs[0];
  for (int i = 1; i < 10; ++i) pc = pc * p2 + kCosCoeffs[i];
  const double s = phi + (phi * p2) * ps;
  const double c = 1.0 + p2 * pc;
  const std::uint64_t quadrant = std::bit_cast<std::uint64_t>(t) & 3;
  const bool odd = (quadrant & 1) != 0;
  cos_out = odd ? s : c;
  sin_out = odd ? c : s;
  if (quadrant == 1 || quadrant == 2) cos_out = -cos_out;
  if (quadrant == 2 || quadrant == 3) sin_out = -sin_out;
}

// Box-Muller radius sqrt(-2 ln u).
inline double box_radius(double u) { return std::sqrt(-2.0 * log_positive(u)); }

// Standard normal from one Box-Muller pair, keeping the cosine branch.
// Consumes two draws: radius first, then angle.
template <class Next>
double normal_draw(Next& next) {
  const double r = box_radius(bits_to_open_unit(next()));
  double c, s;
  sincos_turns(bits_to_open_unit(next()), c, s);
  return r * c;
}

// Marsaglia-Tsang gamma(shape, 1) starting from an already drawn normal `x`.
// Each attempt consumes one uniform; a rejected attempt draws a fresh pair.
// Accepts when the squeeze or the log test passes.
template <class Next>
double gamma_from_normal(Next& next, const GammaConstants& k, double x) {
  double g;
  for (;;) {
    const double u = bits_to_open_unit(next());
    const double v = 1.0 + k.c * x;
    if (v > kGammaGate) {
      const double v3 = v * v * v;
      const double x2 = x * x;
      if (u < 1.0 - kGammaSqueeze * (x2 * x2)) {
        g = k.d * v3;
        break;
      }
      const double rhs = ((0.5 * x * x + k.d) - k.d * v3) + k.d * log_positive(v3);
      if (log_positive(u) < rhs) {
        g = k.d * v3;
        break;
      }
    }
    x = normal_draw(next);
  }
  if (k.boosted) {
    const double e = log_positive(bits_to_open_unit(next())) * k.inv_shape;
    g = g * exp_bounded(e > kExpFloor ? e : kExpFloor);
  }
  return g;
}

template <class Next>
double gamma_draw(Next& next, const GammaConstants& k) {
  return gamma_from_normal(next, k, normal_draw(next));
}

// Standard Student-t: z / sqrt(chi2 / dof), chi2 = 2 gamma(dof / 2).  Both
// branches of the first Box-Muller pair are used: cosine for z, sine for the
// gamma sampler's first candidate.
template <class Next>
double student_t_draw(Next& next, const StudentTConstants& k) {
  const double r = box_radius(bits_to_open_unit(next()));
  double c, s;
  sincos_turns(bits_to_open_unit(next()), c, s);
  const double z = r * c;
  const double g = gamma_from_normal(next, k.gamma, r * s);
  return z / std::sqrt(g * k.two_over_dof);
}

}  // namespace fiesta::kernels
