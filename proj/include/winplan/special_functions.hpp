#pragma once

#include <cmath>
#include <limits>
#include <numbers>
#include <stdexcept>

namespace winplan {

// Standard-normal density, distribution and quantile plus the logit pair.
// Everything here is stateless and thread-safe.

inline double normal_pdf(double x) {
    if (!std::isfinite(x)) {
        throw std::domain_error("normal_pdf: input must be finite");
    }
    return std::exp(-0.5 * x * x) / std::sqrt(2.0 * std::numbers::pi);
}

inline double normal_cdf(double x) {
    if (!std::isfinite(x)) {
        throw std::domain_error("normal_cdf: input must be finite");
    }
    // erfc route keeps full precision in the lower tail
    return 0.5 * std::erfc(-x / std::numbers::sqrt2);
}

namespace detail {

// Acklam's rational approximation, |relative error| < 1.15e-9.
inline double normal_quantile_estimate(double p) {
    static constexpr double a[] = {-3.969683028665376e+01, 2.209460984245205e+02,
                                   -2.759285104469687e+02, 1.383577518672690e+02,
                                   -3.066479806614716e+01, 2.506628277459239e+00};
    static constexpr double b[] = {-5.447609879822406e+01, 1.615858368580409e+02,
                                   -1.556989798598866e+02, 6.680131188771972e+01,
                                   -1.328068155288572e+01};
    static constexpr double c[] = {-7.784894002430293e-03, -3.223964580411365e-01,
                                   -2.400758277161838e+00, -2.549732539343734e+00,
                                   4.374664141464968e+00,  2.938163982698783e+00};
    static constexpr double d[] = {7.784695709041462e-03, 3.224671290700398e-01,
                                   2.445134137142996e+00, 3.754408661907416e+00};
    constexpr double p_low = 0.02425;

    if (p < p_low) {
        double q = std::sqrt(-2.0 * std::log(p));
        return (((((c[0] * q + c[1]) * q + c[2]) * q + c[3]) * q + c[4]) * q + c[5]) /
               ((((d[0] * q + d[1]) * q + d[2]) * q + d[3]) * q + 1.0);
    }
    if (p > 1.0 - p_low) {
        double q = std::sqrt(-2.0 * std::log(1.0 - p));
        return -(((((c[0] * q + c[1]) * q + c[2]) * q + c[3]) * q + c[4]) * q + c[5]) /
               ((((d[0] * q + d[1]) * q + d[2]) * q + d[3]) * q + 1.0);
    }
    double q = p - 0.5;
    double s = q * q;
    return (((((a[0] * s + a[1]) * s + a[2]) * s + a[3]) * s + a[4]) * s + a[5]) * q /
           (((((b[0] * s + b[1]) * s + b[2]) * s + b[3]) * s + b[4]) * s + 1.0);
}

} // namespace detail

namespace detail {

// Refined quantile for p in (0, 0.5], where normal_cdf keeps full relative
// precision. One Halley step on the rational estimate.
inline double normal_quantile_lower(double p) {
    double x = normal_quantile_estimate(p);
    double e = normal_cdf(x) - p;
    double u = e * std::sqrt(2.0 * std::numbers::pi) * std::exp(0.5 * x * x);
    x -= u / (1.0 + 0.5 * x * u);
    return x;
}

} // namespace detail

// Inverse standard-normal CDF. The upper tail reflects onto the lower one
// (1-p is exact for p >= 0.5), which keeps absolute error near machine
// precision on both sides.
inline double normal_quantile(double p) {
    if (!(p > 0.0 && p < 1.0)) {
        throw std::domain_error("normal_quantile: p must be in the open interval (0,1)");
    }
    if (p > 0.5) {
        return -detail::normal_quantile_lower(1.0 - p);
    }
    return detail::normal_quantile_lower(p);
}

inline double logit(double p) {
    if (!(p > 0.0 && p < 1.0)) {
        throw std::domain_error("logit: p must be in the open interval (0,1)");
    }
    return std::log(p / (1.0 - p));
}

inline double expit(double x) {
    if (x >= 0.0) {
        return 1.0 / (1.0 + std::exp(-x));
    }
    double e = std::exp(x);
    return e / (1.0 + e);
}

} // namespace winplan
