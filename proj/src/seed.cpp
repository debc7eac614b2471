#include "ast/seed.hpp"

#include <cmath>
#include <numbers>
#include <stdexcept>

namespace ast {

double inverse_normal_cdf(double p) {
    if (!(p > 0.0) || !(p < 1.0)) {
        throw std::invalid_argument("inverse_normal_cdf: p must lie in (0, 1)");
    }

    // Coefficients from Peter Acklam's algorithm (2003).
    static constexpr double a[6] = {-3.969683028665376e+01, 2.209460984245205e+02,
                                    -2.759285104469687e+02, 1.383577518672690e+02,
                                    -3.066479806614716e+01, 2.506628277459239e+00};
    static constexpr double b[5] = {-5.447609879822406e+01, 1.615858368580409e+02,
                                    -1.556989798598866e+02, 6.680131188771972e+01,
                                    -1.328068155288572e+01};
    static constexpr double c[6] = {-7.784894002430293e-03, -3.223964580411365e-01,
                                    -2.400758277161838e+00, -2.549732539343734e+00,
                                    4.374664141464968e+00,  2.938163982698783e+00};
    static constexpr double d[4] = {7.784695709041462e-03, 3.224671290700398e-01,
                                    2.445134137142996e+00, 3.754408661907416e+00};
    static constexpr double p_low = 0.02425;

    if (p < p_low) {
        const double q = std::sqrt(-2.0 * std::log(p));
        return (((((c[0] * q + c[1]) * q + c[2]) * q + c[3]) * q + c[4]) * q + c[5]) /
               ((((d[0] * q + d[1]) * q + d[2]) * q + d[3]) * q + 1.0);
    }
    if (p > 1.0 - p_low) {
        const double q = std::sqrt(-2.0 * std::log(1.0 - p));
        return -(((((c[0] * q + c[1]) * q + c[2]) * q + c[3]) * q + c[4]) * q + c[5]) /
               ((((d[0] * q + d[1]) * q + d[2]) * q + d[3]) * q + 1.0);
    }
    const double q = p - 0.5;
    const double r = q * q;
    return (((((a[0] * r + a[1]) * r + a[2]) * r + a[3]) * r + a[4]) * r + a[5]) * q /
           (((((b[0] * r + b[1]) * r + b[2]) * r + b[3]) * r + b[4]) * r + 1.0);
}

double normal_pdf(double x) {
    constexpr double inv_sqrt_2pi = 0.3989422804014327;  // 1 / sqrt(2*pi)
    return inv_sqrt_2pi * std::exp(-0.5 * x * x);
}

double log_normal_pdf(double x, double sigma) {
    constexpr double log_sqrt_2pi = 0.9189385332046727;  // log(sqrt(2*pi))
    const double z = x / sigma;
    return -0.5 * z * z - log_sqrt_2pi - std::log(sigma);
}

double SplitMix64::next_normal() {
    double u = next_unit();
    // next_unit() can return exactly 0; the inverse CDF needs (0, 1).
    if (u <= 0.0) u = 0x1.0p-53;
    return inverse_normal_cdf(u);
}

}  // namespace ast
