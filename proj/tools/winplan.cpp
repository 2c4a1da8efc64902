// winplan: sample size planning, WinP estimation and simulation checks for
// multi-endpoint two-arm trials.

#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "winplan/io.hpp"
#include "winplan/sample_size.hpp"
#include "winplan/sim_harness.hpp"
#include "winplan/winp_estimation.hpp"

namespace {

using nlohmann::json;
using namespace winplan;

constexpr int kExitOk = 0;
constexpr int kExitIo = 1;
constexpr int kExitValidation = 2;

bool progress_enabled() {
    return std::getenv("WINPLAN_NO_PROGRESS") == nullptr &&
           std::getenv("NO_COLOR") == nullptr;
}

std::string fmt_prob(double v) {
    std::ostringstream os;
    os << std::fixed << std::setprecision(4) << v;
    return os.str();
}

std::string fmt_pct(double v) {
    std::ostringstream os;
    os << std::fixed << std::setprecision(2) << v;
    return os.str();
}

void write_output(const std::string& text, const std::string& out_path) {
    if (out_path.empty()) {
        std::cout << text;
        return;
    }
    std::ofstream out(out_path);
    if (!out) {
        throw io::parse_error("cannot write output file: " + out_path);
    }
    out << text;
}

struct SweepSpec {
    std::string field;
    std::vector<double> values;
};

SweepSpec parse_sweep(const std::string& arg) {
    const auto eq = arg.find('=');
    if (eq == std::string::npos) {
        throw io::parse_error("--sweep expects field=v1,v2,...");
    }
    SweepSpec s;
    s.field = arg.substr(0, eq);
    std::stringstream ss(arg.substr(eq + 1));
    std::string tok;
    while (std::getline(ss, tok, ',')) {
        s.values.push_back(std::stod(tok));
    }
    if (s.values.empty()) {
        throw io::parse_error("--sweep has no values");
    }
    return s;
}

DesignSpec apply_sweep_value(DesignSpec spec, const std::string& field, double v) {
    if (field == "assurance") {
        spec.assurance = v;
    } else if (field == "correlation" || field == "rho") {
        spec.set_exchangeable_correlation(v);
    } else if (field == "lower_bound" || field == "theta0") {
        spec.lower_bound = v;
    } else if (field == "alloc_ratio" || field == "r") {
        spec.alloc_ratio = v;
    } else if (field == "sd_ratio" || field == "B") {
        for (auto& e : spec.endpoints) e.sd_ratio = v;
    } else if (field == "ci_level") {
        spec.ci_level = v;
    } else {
        throw io::parse_error("unknown sweep field: " + field);
    }
    return spec;
}

json plan_record(const DesignSpec& spec, const DesignResult& res,
                 const std::string& sweep_field, double sweep_value, bool swept) {
    json j;
    j["config"] = io::design_to_json(spec);
    if (swept) {
        j["sweep"] = {{"field", sweep_field}, {"value", sweep_value}};
    }
    j["raw_n"] = res.raw_n;
    j["n_treated"] = res.n_treated;
    j["n_control"] = res.n_control;
    j["n_total"] = res.n_total;
    j["f_value"] = res.f_value;
    j["global_winp"] = res.global_winp;
    return j;
}

int cmd_plan(const std::string& config_path, const std::string& sweep_arg,
             const std::string& out_path, const std::string& format) {
    const json cj = io::load_json_file(config_path);
    const DesignSpec base = io::parse_design(cj);

    std::vector<std::pair<double, DesignSpec>> runs;
    SweepSpec sweep;
    if (!sweep_arg.empty()) {
        sweep = parse_sweep(sweep_arg);
        for (double v : sweep.values) {
            runs.emplace_back(v, apply_sweep_value(base, sweep.field, v));
        }
    } else {
        runs.emplace_back(0.0, base);
    }

    std::ostringstream text;
    std::ostringstream records;
    text << "plan: global WinP " << fmt_prob(base.global_winp()) << ", lower bound "
         << fmt_prob(base.lower_bound) << "\n";
    if (!sweep_arg.empty()) {
        text << std::left << std::setw(14) << sweep.field;
    }
    text << std::left << std::setw(12) << "raw_n" << std::setw(11) << "n_treated"
         << std::setw(11) << "n_control" << std::setw(9) << "n_total"
         << std::setw(12) << "f_value" << "\n";

    for (const auto& [v, spec] : runs) {
        const DesignResult res = required_sample_size(spec);
        if (!sweep_arg.empty()) {
            text << std::left << std::setw(14) << fmt_prob(v);
        }
        text << std::left << std::setw(12) << fmt_prob(res.raw_n) << std::setw(11)
             << res.n_treated << std::setw(11) << res.n_control << std::setw(9)
             << res.n_total << std::setw(12) << fmt_prob(res.f_value) << "\n";
        records << plan_record(spec, res, sweep.field, v, !sweep_arg.empty()).dump()
                << "\n";
    }

    write_output(format == "records" ? records.str() : text.str(), out_path);
    return kExitOk;
}

int cmd_estimate(const std::string& data_path, const std::string& arm_column,
                 double level, const std::string& out_path, const std::string& format) {
    const TrialData data = io::read_trial_data(data_path, arm_column);
    const WinPAnalysis a = analyze(data, level);
    const SquareMatrix rho = winp_correlations(a.covariance);
    const std::size_t K = a.per_endpoint.size();

    json rec;
    rec["config"] = {{"data", data_path},
                     {"arm_column", arm_column},
                     {"ci_level", level},
                     {"n_treated", data.n_treated},
                     {"n_control", data.n_control},
                     {"n_endpoints", K}};
    rec["per_endpoint"] = a.per_endpoint;
    json cov = json::array(), cor = json::array();
    for (std::size_t i = 0; i < K; ++i) {
        json cov_row = json::array(), cor_row = json::array();
        for (std::size_t j = 0; j < K; ++j) {
            cov_row.push_back(a.covariance(i, j));
            cor_row.push_back(rho(i, j));
        }
        cov.push_back(cov_row);
        cor.push_back(cor_row);
    }
    rec["covariance"] = cov;
    rec["correlation"] = cor;
    rec["global_estimate"] = a.global_estimate;
    rec["global_variance"] = a.global_variance;
    rec["ci_lower"] = a.ci_lower;
    rec["ci_upper"] = a.ci_upper;

    std::ostringstream text;
    text << "estimate: " << data.n_treated << " treated, " << data.n_control
         << " control, " << K << " endpoint(s)\n";
    text << "per-endpoint WinP:";
    for (double t : a.per_endpoint) text << " " << fmt_prob(t);
    text << "\ncovariance:\n";
    for (std::size_t i = 0; i < K; ++i) {
        text << " ";
        for (std::size_t j = 0; j < K; ++j) {
            text << " " << std::scientific << std::setprecision(4) << a.covariance(i, j);
        }
        text << "\n";
    }
    text << "between-WinP correlation:\n";
    for (std::size_t i = 0; i < K; ++i) {
        text << " ";
        for (std::size_t j = 0; j < K; ++j) text << " " << fmt_prob(rho(i, j));
        text << "\n";
    }
    text << "global WinP " << fmt_prob(a.global_estimate) << ", "
         << fmt_pct(100.0 * level) << "% CI [" << fmt_prob(a.ci_lower) << ", "
         << fmt_prob(a.ci_upper) << "]\n";

    write_output(format == "records" ? rec.dump() + "\n" : text.str(), out_path);
    return kExitOk;
}

int cmd_simulate(const std::string& config_path, std::size_t replicates,
                 std::uint64_t seed, bool has_seed, unsigned threads,
                 const std::string& out_path, const std::string& format) {
    const json cj = io::load_json_file(config_path);
    const io::SimConfig cfg = io::parse_sim_config(cj, seed, has_seed, replicates);

    std::ostringstream text;
    std::ostringstream records;
    text << std::left << std::setw(10) << "scenario" << std::setw(9) << "n_total"
         << std::setw(9) << "ECP" << std::setw(9) << "EAP" << std::setw(12)
         << "degenerate" << "\n";

    const bool progress = progress_enabled();
    for (std::size_t i = 0; i < cfg.scenarios.size(); ++i) {
        if (progress) {
            std::cerr << "scenario " << (i + 1) << "/" << cfg.scenarios.size()
                      << " (" << cfg.scenarios[i].replicates << " replicates)...\n";
        }
        json rec;
        rec["scenario"] = i;
        rec["config"] = io::design_to_json(cfg.scenarios[i].design);
        rec["config"]["data_correlation"] = cfg.scenarios[i].data_correlation;
        rec["config"]["replicates"] = cfg.scenarios[i].replicates;
        rec["config"]["seed"] = cfg.scenarios[i].seed;
        try {
            const ScenarioResult r = run_scenario(cfg.scenarios[i], threads);
            rec["n_total"] = r.n_total_used;
            rec["ecp"] = r.empirical_coverage;
            rec["eap"] = r.empirical_assurance;
            rec["degenerate"] = r.degenerate_count;
            rec["mean_ci_lower"] = r.mean_ci_lower;
            text << std::left << std::setw(10) << i << std::setw(9) << r.n_total_used
                 << std::setw(9) << fmt_pct(r.empirical_coverage) << std::setw(9)
                 << fmt_pct(r.empirical_assurance) << std::setw(12)
                 << r.degenerate_count << "\n";
        } catch (const std::exception& ex) {
            rec["error"] = ex.what();
            text << std::left << std::setw(10) << i << "error: " << ex.what() << "\n";
        }
        records << rec.dump() << "\n";
    }

    write_output(format == "records" ? records.str() : text.str(), out_path);
    return kExitOk;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"Win probability planning and estimation for multi-endpoint trials"};
    app.require_subcommand(1);

    std::string config_path, sweep_arg, out_path, format = "table";
    std::string data_path, arm_column = "arm";
    double level = 0.95;
    std::size_t replicates = 0;
    std::uint64_t seed = 0;
    unsigned threads = 1;

    auto* plan = app.add_subcommand("plan", "Compute required sample size");
    plan->add_option("--config", config_path, "JSON design config")->required();
    plan->add_option("--sweep", sweep_arg, "field=v1,v2,... grid over one design field");
    plan->add_option("--out", out_path, "write report to file instead of stdout");
    plan->add_option("--format", format, "table or records")
        ->check(CLI::IsMember({"table", "records"}));

    auto* est = app.add_subcommand("estimate", "Estimate WinPs from subject-level data");
    est->add_option("--data", data_path, "delimited data file with header")->required();
    est->add_option("--arm-column", arm_column, "name of the 0/1 arm column");
    est->add_option("--level", level, "confidence level");
    est->add_option("--out", out_path, "write report to file instead of stdout");
    est->add_option("--format", format, "table or records")
        ->check(CLI::IsMember({"table", "records"}));

    auto* sim = app.add_subcommand("simulate", "Monte Carlo coverage/assurance check");
    sim->add_option("--config", config_path, "JSON scenario grid config")->required();
    sim->add_option("--replicates", replicates, "replicates per scenario (overrides config)");
    auto* seed_opt = sim->add_option("--seed", seed, "master seed (overrides config)");
    sim->add_option("--threads", threads, "worker threads per scenario");
    sim->add_option("--out", out_path, "write report to file instead of stdout");
    sim->add_option("--format", format, "table or records")
        ->check(CLI::IsMember({"table", "records"}));

    CLI11_PARSE(app, argc, argv);

    try {
        if (plan->parsed()) {
            return cmd_plan(config_path, sweep_arg, out_path, format);
        }
        if (est->parsed()) {
            return cmd_estimate(data_path, arm_column, level, out_path, format);
        }
        return cmd_simulate(config_path, replicates, seed, seed_opt->count() > 0,
                            threads, out_path, format);
    } catch (const winplan::infeasible_design_error& ex) {
        std::cerr << "infeasible: " << ex.what() << "\n";
        return kExitValidation;
    } catch (const winplan::io::parse_error& ex) {
        std::cerr << "error: " << ex.what() << "\n";
        return kExitIo;
    } catch (const std::domain_error& ex) {
        std::cerr << "invalid input: " << ex.what() << "\n";
        return kExitValidation;
    } catch (const std::exception& ex) {
        std::cerr << "error: " << ex.what() << "\n";
        return kExitIo;
    }
}
