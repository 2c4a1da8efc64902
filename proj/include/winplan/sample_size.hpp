#pragma once

#include <cmath>
#include <cstddef>
#include <numbers>
#include <stdexcept>
#include <string>
#include <vector>

#include "winplan/special_functions.hpp"
#include "winplan/winp_estimation.hpp"

namespace winplan {

// Design inputs for one endpoint: the planned win probability and the
// control/treated standard deviation ratio.
struct EndpointAssumption {
    double winp = 0.5;
    double sd_ratio = 1.0;

    void validate() const {
        if (!(winp > 0.0 && winp < 1.0)) {
            throw std::domain_error("EndpointAssumption: winp must be in (0,1)");
        }
        if (!(sd_ratio > 0.0)) {
            throw std::domain_error("EndpointAssumption: sd_ratio must be positive");
        }
    }
};

struct infeasible_design_error : std::domain_error {
    using std::domain_error::domain_error;
};

struct DesignSpec {
    std::vector<EndpointAssumption> endpoints;
    SquareMatrix correlation; // K x K, unit diagonal
    double lower_bound = 0.5; // theta_0
    double assurance = 0.9;   // 1 - beta
    double ci_level = 0.95;   // 1 - alpha
    double alloc_ratio = 1.0; // r, control / treated

    std::size_t num_endpoints() const { return endpoints.size(); }

    double global_winp() const {
        double s = 0.0;
        for (const auto& e : endpoints) s += e.winp;
        return s / static_cast<double>(endpoints.size());
    }

    // Exchangeable shortcut: one rho broadcast to every pair.
    void set_exchangeable_correlation(double rho) {
        const std::size_t K = endpoints.size();
        correlation = SquareMatrix(K);
        for (std::size_t i = 0; i < K; ++i) {
            for (std::size_t j = 0; j < K; ++j) {
                correlation(i, j) = (i == j) ? 1.0 : rho;
            }
        }
    }

    void validate() const {
        const std::size_t K = endpoints.size();
        if (K < 1) throw std::domain_error("DesignSpec: at least one endpoint required");
        for (const auto& e : endpoints) e.validate();
        if (correlation.dim() != K) {
            throw std::domain_error("DesignSpec: correlation matrix dimension mismatch");
        }
        for (std::size_t i = 0; i < K; ++i) {
            if (correlation(i, i) != 1.0) {
                throw std::domain_error("DesignSpec: correlation diagonal must be 1");
            }
            for (std::size_t j = 0; j < K; ++j) {
                const double v = correlation(i, j);
                if (!(v >= -1.0 && v <= 1.0)) {
                    throw std::domain_error("DesignSpec: correlation entries must be in [-1,1]");
                }
                if (v != correlation(j, i)) {
                    throw std::domain_error("DesignSpec: correlation matrix must be symmetric");
                }
            }
        }
        if (!(lower_bound > 0.0 && lower_bound < 1.0)) {
            throw std::domain_error("DesignSpec: lower_bound must be in (0,1)");
        }
        if (!(assurance > 0.0 && assurance < 1.0)) {
            throw std::domain_error("DesignSpec: assurance must be in (0,1)");
        }
        if (!(ci_level > 0.0 && ci_level < 1.0)) {
            throw std::domain_error("DesignSpec: ci_level must be in (0,1)");
        }
        if (!(alloc_ratio > 0.0)) {
            throw std::domain_error("DesignSpec: alloc_ratio must be positive");
        }
        if (!(global_winp() > lower_bound)) {
            throw infeasible_design_error(
                "DesignSpec: planned global WinP " + std::to_string(global_winp()) +
                " must exceed the lower bound " + std::to_string(lower_bound));
        }
    }
};

struct DesignResult {
    double raw_n = 0.0;
    long n_treated = 0;
    long n_control = 0;
    long n_total = 0;
    double f_value = 0.0;
    double global_winp = 0.0;
};

// Per-endpoint variance factor. z is the normal quantile of the planned WinP,
// B the sd ratio and r the allocation ratio.
inline double f_endpoint(const EndpointAssumption& a, double alloc_ratio) {
    a.validate();
    if (!(alloc_ratio > 0.0)) {
        throw std::domain_error("f_endpoint: alloc_ratio must be positive");
    }
    const double r = alloc_ratio;
    const double B = a.sd_ratio;
    const double B2 = B * B;
    const double z = normal_quantile(a.winp);
    const double phi = normal_pdf(z);
    const double bracket = z * z / ((1.0 + B2) * (1.0 + B2)) *
                               (r + 1.0 + (r + 1.0) * B2 * B2 / r) +
                           2.0 * (r + 1.0) / (1.0 + B2) +
                           2.0 * (r + 1.0) * B2 / (r * (1.0 + B2));
    return 0.5 * phi * phi * bracket;
}

// Correlation-weighted aggregate of the endpoint factors: (1/K^2) s'Rs with
// s_k = sqrt(f_k).
inline double f_global(const DesignSpec& spec) {
    spec.validate();
    const std::size_t K = spec.num_endpoints();
    std::vector<double> s(K);
    for (std::size_t k = 0; k < K; ++k) {
        s[k] = std::sqrt(f_endpoint(spec.endpoints[k], spec.alloc_ratio));
    }
    double total = 0.0;
    for (std::size_t i = 0; i < K; ++i) {
        for (std::size_t j = 0; j < K; ++j) {
            total += spec.correlation(i, j) * s[i] * s[j];
        }
    }
    return total / (static_cast<double>(K) * static_cast<double>(K));
}

// Closed-form total sample size with assurance. The pi/3 factor absorbs the
// efficiency loss of nonparametric analysis relative to the normal design
// assumption. Per-arm sizes apply the ceiling to the continuous n per group.
inline DesignResult required_sample_size(const DesignSpec& spec) {
    spec.validate();
    const double theta = spec.global_winp();
    const double f = f_global(spec);
    const double z_beta = normal_quantile(spec.assurance);
    const double z_alpha = normal_quantile(1.0 - (1.0 - spec.ci_level) / 2.0);
    const double denom = logit(theta) - logit(spec.lower_bound);
    const double raw_n = std::pow((z_beta + z_alpha) / denom, 2) * f /
                         (theta * theta * (1.0 - theta) * (1.0 - theta)) *
                         (std::numbers::pi / 3.0);
    const double r = spec.alloc_ratio;
    DesignResult out;
    out.raw_n = raw_n;
    out.n_treated = static_cast<long>(std::ceil(raw_n / (r + 1.0)));
    out.n_control = static_cast<long>(std::ceil(r * raw_n / (r + 1.0)));
    out.n_total = out.n_treated + out.n_control;
    out.f_value = f;
    out.global_winp = theta;
    return out;
}

// Normal-theory identity between a mean difference and the win probability.
inline double winp_from_normal_means(double mean_diff, double sd_treated,
                                     double sd_control) {
    if (!(sd_treated > 0.0 && sd_control > 0.0)) {
        throw std::domain_error("winp_from_normal_means: sds must be positive");
    }
    return normal_cdf(mean_diff / std::sqrt(sd_treated * sd_treated +
                                            sd_control * sd_control));
}

inline double mean_diff_from_winp(double winp, double sd_treated, double sd_control) {
    if (!(sd_treated > 0.0 && sd_control > 0.0)) {
        throw std::domain_error("mean_diff_from_winp: sds must be positive");
    }
    return normal_quantile(winp) *
           std::sqrt(sd_treated * sd_treated + sd_control * sd_control);
}

} // namespace winplan
