#pragma once

#include <cmath>
#include <cstddef>
#include <stdexcept>
#include <string>
#include <vector>

#include "winplan/special_functions.hpp"

namespace winplan {

// Two-arm subject-level outcomes. Rows are subjects, columns are endpoints,
// higher values are better. Stored row-major.
struct TrialData {
    std::size_t n_treated = 0;
    std::size_t n_control = 0;
    std::size_t n_endpoints = 0;
    std::vector<double> treated; // n_treated * n_endpoints
    std::vector<double> control; // n_control * n_endpoints

    double treated_at(std::size_t subject, std::size_t endpoint) const {
        return treated[subject * n_endpoints + endpoint];
    }
    double control_at(std::size_t subject, std::size_t endpoint) const {
        return control[subject * n_endpoints + endpoint];
    }

    void validate() const {
        if (n_endpoints < 1) {
            throw std::domain_error("TrialData: at least one endpoint required");
        }
        if (n_treated < 2 || n_control < 2) {
            throw std::domain_error("TrialData: each arm needs at least 2 subjects");
        }
        if (treated.size() != n_treated * n_endpoints ||
            control.size() != n_control * n_endpoints) {
            throw std::domain_error("TrialData: matrix dimensions inconsistent");
        }
        for (double v : treated) {
            if (!std::isfinite(v)) throw std::domain_error("TrialData: non-finite treated value");
        }
        for (double v : control) {
            if (!std::isfinite(v)) throw std::domain_error("TrialData: non-finite control value");
        }
    }
};

// Square matrix with value semantics, just enough for K x K covariance work.
class SquareMatrix {
public:
    SquareMatrix() = default;
    explicit SquareMatrix(std::size_t dim) : dim_(dim), data_(dim * dim, 0.0) {}

    std::size_t dim() const { return dim_; }
    double& operator()(std::size_t i, std::size_t j) { return data_[i * dim_ + j]; }
    double operator()(std::size_t i, std::size_t j) const { return data_[i * dim_ + j]; }

private:
    std::size_t dim_ = 0;
    std::vector<double> data_;
};

struct WinPAnalysis {
    std::vector<double> per_endpoint;
    SquareMatrix covariance;
    double global_estimate = 0.0;
    double global_variance = 0.0;
    double ci_level = 0.95;
    double ci_lower = 0.0;
    double ci_upper = 0.0;
};

inline double win_score(double treated, double control) {
    if (treated > control) return 1.0;
    if (treated == control) return 0.5;
    return 0.0;
}

// Win probability for one endpoint: fraction of (treated, control) pairs won,
// ties counting one half.
inline double winp_point(const std::vector<double>& treated_col,
                         const std::vector<double>& control_col) {
    if (treated_col.empty() || control_col.empty()) {
        throw std::domain_error("winp_point: both arms must be nonempty");
    }
    double total = 0.0;
    for (double t : treated_col) {
        for (double c : control_col) {
            total += win_score(t, c);
        }
    }
    return total / (static_cast<double>(treated_col.size()) *
                    static_cast<double>(control_col.size()));
}

struct DeLongResult {
    std::vector<double> per_endpoint;
    SquareMatrix covariance;
};

// DeLong point and covariance estimates for all endpoints.
//
// For endpoint k the treated-side structural component of subject i is the
// mean win score against all control subjects; the control-side component of
// subject j is the mean win score of all treated subjects against j. The
// covariance of the WinP estimates is S10/m + S01/n where S10, S01 are the
// sample covariance matrices (divisors m-1, n-1) of these components.
inline DeLongResult delong_analysis(const TrialData& data) {
    data.validate();
    const std::size_t m = data.n_treated;
    const std::size_t n = data.n_control;
    const std::size_t K = data.n_endpoints;

    // components, row-major: subject x endpoint
    std::vector<double> v10(m * K, 0.0);
    std::vector<double> v01(n * K, 0.0);
    std::vector<double> theta(K, 0.0);

    for (std::size_t k = 0; k < K; ++k) {
        for (std::size_t i = 0; i < m; ++i) {
            const double t = data.treated_at(i, k);
            for (std::size_t j = 0; j < n; ++j) {
                const double s = win_score(t, data.control_at(j, k));
                v10[i * K + k] += s;
                v01[j * K + k] += s;
            }
        }
        // raw total divided once keeps the point estimate identical to
        // winp_point and makes the arm-swap identity exact
        double total = 0.0;
        for (std::size_t i = 0; i < m; ++i) total += v10[i * K + k];
        theta[k] = total / (static_cast<double>(m) * static_cast<double>(n));
        for (std::size_t i = 0; i < m; ++i) v10[i * K + k] /= static_cast<double>(n);
        for (std::size_t j = 0; j < n; ++j) v01[j * K + k] /= static_cast<double>(m);
    }

    auto sample_cov = [](const std::vector<double>& comp, std::size_t rows,
                         std::size_t cols, const std::vector<double>& mean) {
        SquareMatrix s(cols);
        for (std::size_t a = 0; a < cols; ++a) {
            for (std::size_t b = a; b < cols; ++b) {
                double acc = 0.0;
                for (std::size_t i = 0; i < rows; ++i) {
                    acc += (comp[i * cols + a] - mean[a]) * (comp[i * cols + b] - mean[b]);
                }
                acc /= static_cast<double>(rows - 1);
                s(a, b) = acc;
                s(b, a) = acc;
            }
        }
        return s;
    };

    SquareMatrix s10 = sample_cov(v10, m, K, theta);
    SquareMatrix s01 = sample_cov(v01, n, K, theta);

    SquareMatrix cov(K);
    for (std::size_t a = 0; a < K; ++a) {
        for (std::size_t b = 0; b < K; ++b) {
            cov(a, b) = s10(a, b) / static_cast<double>(m) +
                        s01(a, b) / static_cast<double>(n);
        }
    }
    return {std::move(theta), std::move(cov)};
}

struct GlobalWinP {
    double estimate = 0.0;
    double variance = 0.0;
};

// Global WinP is the plain average of the endpoint estimates; its variance is
// the sum of all covariance entries divided by K^2.
inline GlobalWinP global_winp(const std::vector<double>& per_endpoint,
                              const SquareMatrix& covariance) {
    const std::size_t K = per_endpoint.size();
    if (K == 0 || covariance.dim() != K) {
        throw std::domain_error("global_winp: dimension mismatch");
    }
    double est = 0.0;
    for (double t : per_endpoint) est += t;
    est /= static_cast<double>(K);

    double var = 0.0;
    for (std::size_t i = 0; i < K; ++i) {
        for (std::size_t j = 0; j < K; ++j) {
            var += covariance(i, j);
        }
    }
    var /= static_cast<double>(K) * static_cast<double>(K);
    return {est, var};
}

struct ConfidenceInterval {
    double lower = 0.0;
    double upper = 0.0;
};

// Thrown when the point estimate sits on the boundary and the logit interval
// is undefined. Callers that simulate tally these rather than clamp.
struct degenerate_estimate_error : std::domain_error {
    using std::domain_error::domain_error;
};

inline ConfidenceInterval logit_ci(double global_estimate, double global_variance,
                                   double level) {
    if (!(level > 0.0 && level < 1.0)) {
        throw std::domain_error("logit_ci: level must be in (0,1)");
    }
    if (global_variance < 0.0) {
        throw std::domain_error("logit_ci: variance must be nonnegative");
    }
    if (!(global_estimate > 0.0 && global_estimate < 1.0)) {
        throw degenerate_estimate_error(
            "logit_ci: estimate on the boundary, logit interval undefined");
    }
    const double z = normal_quantile(1.0 - (1.0 - level) / 2.0);
    const double center = logit(global_estimate);
    const double half = z * std::sqrt(global_variance) /
                        (global_estimate * (1.0 - global_estimate));
    return {expit(center - half), expit(center + half)};
}

struct degenerate_variance_error : std::domain_error {
    using std::domain_error::domain_error;
};

inline SquareMatrix winp_correlations(const SquareMatrix& covariance) {
    const std::size_t K = covariance.dim();
    std::vector<double> sd(K);
    for (std::size_t k = 0; k < K; ++k) {
        if (!(covariance(k, k) > 0.0)) {
            throw degenerate_variance_error(
                "winp_correlations: zero variance on diagonal, endpoint " + std::to_string(k));
        }
        sd[k] = std::sqrt(covariance(k, k));
    }
    SquareMatrix rho(K);
    for (std::size_t i = 0; i < K; ++i) {
        for (std::size_t j = 0; j < K; ++j) {
            rho(i, j) = covariance(i, j) / (sd[i] * sd[j]);
        }
        rho(i, i) = 1.0;
    }
    return rho;
}

// Full pipeline from subject-level data to the global interval.
inline WinPAnalysis analyze(const TrialData& data, double ci_level = 0.95) {
    DeLongResult d = delong_analysis(data);
    GlobalWinP g = global_winp(d.per_endpoint, d.covariance);
    ConfidenceInterval ci = logit_ci(g.estimate, g.variance, ci_level);
    WinPAnalysis out;
    out.per_endpoint = std::move(d.per_endpoint);
    out.covariance = std::move(d.covariance);
    out.global_estimate = g.estimate;
    out.global_variance = g.variance;
    out.ci_level = ci_level;
    out.ci_lower = ci.lower;
    out.ci_upper = ci.upper;
    return out;
}

} // namespace winplan
