#pragma once

namespace crq {

inline constexpr double kPi = 3.14159265358979323846;
inline constexpr double kSqrt2 = 1.41421356237309504880;
inline constexpr double kInvSqrt2Pi = 0.39894228040143267794;  // 1/sqrt(2*pi)
inline constexpr double kSqrt2OverPi = 0.79788456080286535588;  // sqrt(2/pi)

/// Standard normal density.
double normal_pdf(double x) noexcept;

/// Standard normal CDF.
double normal_cdf(double x) noexcept;

/// Gaussian tail Q(x) = P(Z > x). Computed through erfc, so it keeps full
/// relative precision deep into the upper tail.
double normal_tail(double x) noexcept;

/// P(|Z| < b) for b >= 0.
double normal_central_mass(double b) noexcept;

}  // namespace crq
