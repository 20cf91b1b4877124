#include "crq/normal.hpp"

#include <cmath>

namespace crq {

double normal_pdf(double x) noexcept { return kInvSqrt2Pi * std::exp(-0.5 * x * x); }

double normal_cdf(double x) noexcept { return 0.5 * std::erfc(-x / kSqrt2); }

double normal_tail(double x) noexcept { return 0.5 * std::erfc(x / kSqrt2); }

double normal_central_mass(double b) noexcept { return std::erf(b / kSqrt2); }

}  // namespace crq
