#pragma once

#include <cmath>
#include <cstddef>
#include <cstdint>
#include <functional>
#include <stdexcept>
#include <string>
#include <thread>
#include <vector>

#include "winplan/sample_size.hpp"
#include "winplan/special_functions.hpp"
#include "winplan/winp_estimation.hpp"

namespace winplan {

// Counter-based generator: splitmix64 over a stream key derived from
// (master seed, scenario index, replicate index). Streams are independent of
// thread scheduling, so parallel runs reproduce serial ones bit for bit.
class SplitMixRng {
public:
    explicit SplitMixRng(std::uint64_t state) : state_(state) {}

    static std::uint64_t mix(std::uint64_t z) {
        z += 0x9e3779b97f4a7c15ULL;
        z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
        z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
        return z ^ (z >> 31);
    }

    static std::uint64_t stream_key(std::uint64_t seed, std::uint64_t index) {
        return mix(mix(seed) ^ index);
    }

    std::uint64_t next_u64() {
        state_ += 0x9e3779b97f4a7c15ULL;
        std::uint64_t z = state_;
        z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
        z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
        return z ^ (z >> 31);
    }

    // Uniform on the open interval (0,1).
    double next_uniform() {
        return (static_cast<double>(next_u64() >> 11) + 0.5) * 0x1.0p-53;
    }

    // Standard normal via the inverse-CDF transform; reproducible across
    // platforms because it reuses the audited quantile.
    double next_normal() { return normal_quantile(next_uniform()); }

private:
    std::uint64_t state_;
};

struct Scenario {
    DesignSpec design;
    double data_correlation = 0.0; // exchangeable between-endpoint raw-data rho
    std::size_t replicates = 10000;
    std::uint64_t seed = 0;

    void validate() const {
        design.validate();
        const double K = static_cast<double>(design.num_endpoints());
        if (K > 1 && !(data_correlation > -1.0 / (K - 1.0) && data_correlation < 1.0)) {
            throw std::domain_error(
                "Scenario: exchangeable correlation matrix is not positive definite");
        }
        if (replicates == 0) {
            throw std::domain_error("Scenario: replicates must be positive");
        }
    }
};

struct ScenarioResult {
    long n_total_used = 0;
    double empirical_coverage = 0.0;  // percent
    double empirical_assurance = 0.0; // percent
    std::size_t degenerate_count = 0;
    double mean_ci_lower = 0.0;
};

namespace detail {

// Lower-triangular Cholesky factor of the exchangeable correlation matrix.
inline std::vector<double> exchangeable_cholesky(std::size_t K, double rho) {
    std::vector<double> a(K * K, 0.0);
    for (std::size_t i = 0; i < K; ++i) {
        for (std::size_t j = 0; j < K; ++j) {
            a[i * K + j] = (i == j) ? 1.0 : rho;
        }
    }
    std::vector<double> l(K * K, 0.0);
    for (std::size_t i = 0; i < K; ++i) {
        for (std::size_t j = 0; j <= i; ++j) {
            double s = a[i * K + j];
            for (std::size_t p = 0; p < j; ++p) s -= l[i * K + p] * l[j * K + p];
            if (i == j) {
                if (s <= 0.0) {
                    throw std::domain_error(
                        "exchangeable_cholesky: correlation matrix not positive definite");
                }
                l[i * K + i] = std::sqrt(s);
            } else {
                l[i * K + j] = s / l[j * K + j];
            }
        }
    }
    return l;
}

} // namespace detail

// Marginal parameters of the treated arm implied by the design assumptions.
// Control margins are N(0,1); treated margin k has sd 1/B_k and a mean set so
// the normal-theory WinP equals the planned theta_k.
struct GeneratorConfig {
    std::size_t n_treated = 0;
    std::size_t n_control = 0;
    std::vector<double> treated_mean;
    std::vector<double> treated_sd;
    double data_correlation = 0.0;

    static GeneratorConfig from_design(const DesignSpec& design, long n_treated,
                                       long n_control, double data_correlation) {
        GeneratorConfig g;
        g.n_treated = static_cast<std::size_t>(n_treated);
        g.n_control = static_cast<std::size_t>(n_control);
        g.data_correlation = data_correlation;
        for (const auto& e : design.endpoints) {
            const double sd = 1.0 / e.sd_ratio;
            g.treated_sd.push_back(sd);
            g.treated_mean.push_back(mean_diff_from_winp(e.winp, sd, 1.0));
        }
        return g;
    }
};

// One simulated trial: multivariate normal rows with exchangeable correlation
// imposed on the standardized scale, then per-endpoint scale and shift for the
// treated arm.
inline TrialData generate_trial(const GeneratorConfig& config, SplitMixRng& rng) {
    const std::size_t K = config.treated_mean.size();
    const std::vector<double> chol =
        detail::exchangeable_cholesky(K, config.data_correlation);

    TrialData data;
    data.n_treated = config.n_treated;
    data.n_control = config.n_control;
    data.n_endpoints = K;
    data.treated.resize(config.n_treated * K);
    data.control.resize(config.n_control * K);

    std::vector<double> e(K);
    auto fill_row = [&](double* row, bool treated_arm) {
        for (std::size_t k = 0; k < K; ++k) e[k] = rng.next_normal();
        for (std::size_t k = 0; k < K; ++k) {
            double z = 0.0;
            for (std::size_t p = 0; p <= k; ++p) z += chol[k * K + p] * e[p];
            row[k] = treated_arm ? config.treated_mean[k] + config.treated_sd[k] * z : z;
        }
    };
    for (std::size_t i = 0; i < config.n_treated; ++i) {
        fill_row(&data.treated[i * K], true);
    }
    for (std::size_t j = 0; j < config.n_control; ++j) {
        fill_row(&data.control[j * K], false);
    }
    return data;
}

// Full scenario run: size the trial with the raw-data correlation standing in
// for the between-WinP correlation, then simulate replicates and score
// coverage of the true global WinP and attainment of the lower bound.
inline ScenarioResult run_scenario(const Scenario& scenario, unsigned threads = 1) {
    scenario.validate();

    DesignSpec design = scenario.design;
    design.set_exchangeable_correlation(scenario.data_correlation);
    const DesignResult sized = required_sample_size(design);

    const GeneratorConfig gen = GeneratorConfig::from_design(
        design, sized.n_treated, sized.n_control, scenario.data_correlation);
    const double true_theta = design.global_winp();
    const double theta0 = design.lower_bound;
    const double level = design.ci_level;
    const std::size_t R = scenario.replicates;

    struct Record {
        bool degenerate = false;
        bool covered = false;
        bool assured = false;
        double ci_lower = 0.0;
    };
    std::vector<Record> records(R);

    auto run_replicate = [&](std::size_t rep) {
        SplitMixRng rng(SplitMixRng::stream_key(scenario.seed, rep));
        TrialData data = generate_trial(gen, rng);
        DeLongResult d = delong_analysis(data);
        GlobalWinP g = global_winp(d.per_endpoint, d.covariance);
        Record rec;
        if (!(g.estimate > 0.0 && g.estimate < 1.0)) {
            rec.degenerate = true;
        } else {
            ConfidenceInterval ci = logit_ci(g.estimate, g.variance, level);
            rec.covered = (ci.lower <= true_theta && true_theta <= ci.upper);
            rec.assured = (ci.lower >= theta0);
            rec.ci_lower = ci.lower;
        }
        records[rep] = rec;
    };

    if (threads <= 1 || R < 2) {
        for (std::size_t rep = 0; rep < R; ++rep) run_replicate(rep);
    } else {
        const unsigned T = std::min<unsigned>(threads, static_cast<unsigned>(R));
        std::vector<std::thread> pool;
        pool.reserve(T);
        for (unsigned t = 0; t < T; ++t) {
            pool.emplace_back([&, t] {
                for (std::size_t rep = t; rep < R; rep += T) run_replicate(rep);
            });
        }
        for (auto& th : pool) th.join();
    }

    ScenarioResult out;
    out.n_total_used = sized.n_total;
    std::size_t valid = 0, covered = 0, assured = 0;
    double lower_sum = 0.0;
    for (const Record& rec : records) {
        if (rec.degenerate) {
            ++out.degenerate_count;
            continue;
        }
        ++valid;
        covered += rec.covered ? 1 : 0;
        assured += rec.assured ? 1 : 0;
        lower_sum += rec.ci_lower;
    }
    if (valid > 0) {
        out.empirical_coverage = 100.0 * static_cast<double>(covered) / valid;
        out.empirical_assurance = 100.0 * static_cast<double>(assured) / valid;
        out.mean_ci_lower = lower_sum / static_cast<double>(valid);
    }
    return out;
}

// Per-row error capture so one bad scenario does not kill the grid.
struct GridRow {
    bool ok = false;
    ScenarioResult result;
    std::string error;
};

// Seeds are expected to be assigned per scenario before the call (the CLI
// derives them from a master seed and the scenario's config position), so the
// output follows a permutation of the input.
inline std::vector<GridRow> run_grid(const std::vector<Scenario>& scenarios,
                                     unsigned threads = 1) {
    std::vector<GridRow> rows(scenarios.size());
    for (std::size_t i = 0; i < scenarios.size(); ++i) {
        try {
            rows[i].result = run_scenario(scenarios[i], threads);
            rows[i].ok = true;
        } catch (const std::exception& ex) {
            rows[i].error = ex.what();
        }
    }
    return rows;
}

} // namespace winplan
