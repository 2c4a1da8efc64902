#pragma once

#include <cstdint>
#include <fstream>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include <json.hpp>

#include "winplan/sample_size.hpp"
#include "winplan/sim_harness.hpp"
#include "winplan/winp_estimation.hpp"

namespace winplan::io {

struct parse_error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

using json = nlohmann::json;

inline json load_json_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) {
        throw parse_error("cannot open file: " + path);
    }
    try {
        return json::parse(in);
    } catch (const json::parse_error& ex) {
        throw parse_error(path + ": " + ex.what());
    }
}

// DesignSpec from a JSON object:
//   endpoints: [{winp, sd_ratio?}, ...]  (sd_ratio defaults to 1)
//   correlation: scalar rho or full K x K array of arrays
//   lower_bound, assurance, ci_level?, alloc_ratio?
inline DesignSpec parse_design(const json& j) {
    DesignSpec spec;
    if (!j.contains("endpoints") || !j["endpoints"].is_array() || j["endpoints"].empty()) {
        throw parse_error("design: 'endpoints' must be a nonempty array");
    }
    for (const auto& e : j["endpoints"]) {
        EndpointAssumption a;
        if (e.is_number()) {
            a.winp = e.get<double>();
        } else if (e.is_object()) {
            if (!e.contains("winp")) throw parse_error("design: endpoint missing 'winp'");
            a.winp = e["winp"].get<double>();
            a.sd_ratio = e.value("sd_ratio", 1.0);
        } else {
            throw parse_error("design: endpoint must be a number or object");
        }
        spec.endpoints.push_back(a);
    }
    const std::size_t K = spec.endpoints.size();

    if (!j.contains("correlation")) {
        throw parse_error("design: 'correlation' is required");
    }
    const auto& corr = j["correlation"];
    if (corr.is_number()) {
        spec.set_exchangeable_correlation(corr.get<double>());
    } else if (corr.is_array()) {
        if (corr.size() != K) {
            throw parse_error("design: correlation matrix must be " + std::to_string(K) +
                              "x" + std::to_string(K));
        }
        spec.correlation = SquareMatrix(K);
        for (std::size_t i = 0; i < K; ++i) {
            if (!corr[i].is_array() || corr[i].size() != K) {
                throw parse_error("design: correlation row " + std::to_string(i) +
                                  " has wrong length");
            }
            for (std::size_t c = 0; c < K; ++c) {
                spec.correlation(i, c) = corr[i][c].get<double>();
            }
        }
    } else {
        throw parse_error("design: 'correlation' must be a number or a matrix");
    }

    if (!j.contains("lower_bound")) throw parse_error("design: 'lower_bound' is required");
    spec.lower_bound = j["lower_bound"].get<double>();
    if (!j.contains("assurance")) throw parse_error("design: 'assurance' is required");
    spec.assurance = j["assurance"].get<double>();
    spec.ci_level = j.value("ci_level", 0.95);
    spec.alloc_ratio = j.value("alloc_ratio", 1.0);
    return spec;
}

inline json design_to_json(const DesignSpec& spec) {
    json j;
    for (const auto& e : spec.endpoints) {
        j["endpoints"].push_back({{"winp", e.winp}, {"sd_ratio", e.sd_ratio}});
    }
    json corr = json::array();
    const std::size_t K = spec.num_endpoints();
    for (std::size_t i = 0; i < K; ++i) {
        json row = json::array();
        for (std::size_t c = 0; c < K; ++c) row.push_back(spec.correlation(i, c));
        corr.push_back(row);
    }
    j["correlation"] = corr;
    j["lower_bound"] = spec.lower_bound;
    j["assurance"] = spec.assurance;
    j["ci_level"] = spec.ci_level;
    j["alloc_ratio"] = spec.alloc_ratio;
    return j;
}

struct SimConfig {
    std::vector<Scenario> scenarios;
};

// Simulation config:
//   { "seed": S?, "replicates": N?,
//     "scenarios": [ { design fields..., "data_correlation": rho,
//                      "replicates"?: N, } ... ] }
// Per-scenario seeds are derived from the master seed and the scenario's
// position in the config, so they travel with the scenario afterwards.
inline SimConfig parse_sim_config(const json& j, std::uint64_t seed_override,
                                  bool has_seed_override,
                                  std::size_t replicates_override) {
    SimConfig cfg;
    if (!j.contains("scenarios") || !j["scenarios"].is_array()) {
        throw parse_error("sim config: 'scenarios' must be an array");
    }
    const std::uint64_t master_seed =
        has_seed_override ? seed_override : j.value("seed", std::uint64_t{0});
    const std::size_t default_reps =
        replicates_override > 0 ? replicates_override
                                : j.value("replicates", std::size_t{10000});
    std::size_t index = 0;
    for (const auto& sj : j["scenarios"]) {
        Scenario s;
        s.design = parse_design(sj);
        if (!sj.contains("data_correlation")) {
            throw parse_error("sim config: scenario missing 'data_correlation'");
        }
        s.data_correlation = sj["data_correlation"].get<double>();
        s.replicates = replicates_override > 0
                           ? replicates_override
                           : sj.value("replicates", default_reps);
        s.seed = SplitMixRng::stream_key(master_seed, index);
        cfg.scenarios.push_back(std::move(s));
        ++index;
    }
    return cfg;
}

// Delimiter-separated subject-level data: header row names columns, one
// column holds the arm indicator (0=control, 1=treated), every other column
// is a numeric endpoint. Delimiter is comma, tab or semicolon, sniffed from
// the header.
inline TrialData read_trial_data(const std::string& path, const std::string& arm_column) {
    std::ifstream in(path);
    if (!in) {
        throw parse_error("cannot open data file: " + path);
    }
    std::string header;
    if (!std::getline(in, header)) {
        throw parse_error(path + ": empty file");
    }
    char delim = ',';
    if (header.find('\t') != std::string::npos) delim = '\t';
    else if (header.find(';') != std::string::npos) delim = ';';

    auto split = [delim](const std::string& line) {
        std::vector<std::string> out;
        std::stringstream ss(line);
        std::string field;
        while (std::getline(ss, field, delim)) out.push_back(field);
        return out;
    };

    std::vector<std::string> names = split(header);
    std::size_t arm_idx = names.size();
    for (std::size_t i = 0; i < names.size(); ++i) {
        if (names[i] == arm_column) arm_idx = i;
    }
    if (arm_idx == names.size()) {
        throw parse_error(path + ": arm column '" + arm_column + "' not found in header");
    }
    const std::size_t K = names.size() - 1;
    if (K < 1) {
        throw parse_error(path + ": no endpoint columns");
    }

    std::vector<std::vector<double>> treated_rows, control_rows;
    std::string line;
    std::size_t lineno = 1;
    while (std::getline(in, line)) {
        ++lineno;
        if (line.empty() || line == "\r") continue;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        std::vector<std::string> fields = split(line);
        if (fields.size() != names.size()) {
            throw parse_error(path + ": row " + std::to_string(lineno) + " has " +
                              std::to_string(fields.size()) + " fields, expected " +
                              std::to_string(names.size()));
        }
        std::vector<double> row(K);
        std::size_t col = 0;
        int arm = -1;
        for (std::size_t i = 0; i < fields.size(); ++i) {
            if (i == arm_idx) {
                if (fields[i] == "0") arm = 0;
                else if (fields[i] == "1") arm = 1;
                else {
                    throw parse_error(path + ": row " + std::to_string(lineno) +
                                      ": arm value must be 0 or 1, got '" + fields[i] + "'");
                }
                continue;
            }
            try {
                std::size_t pos = 0;
                row[col] = std::stod(fields[i], &pos);
                if (pos != fields[i].size()) throw std::invalid_argument("trailing chars");
            } catch (const std::exception&) {
                throw parse_error(path + ": row " + std::to_string(lineno) +
                                  ": non-numeric value '" + fields[i] + "' in column " +
                                  names[i]);
            }
            ++col;
        }
        (arm == 1 ? treated_rows : control_rows).push_back(std::move(row));
    }

    if (treated_rows.size() < 2 || control_rows.size() < 2) {
        throw parse_error(path + ": need at least 2 subjects per arm (treated=" +
                          std::to_string(treated_rows.size()) + ", control=" +
                          std::to_string(control_rows.size()) + ")");
    }

    TrialData data;
    data.n_treated = treated_rows.size();
    data.n_control = control_rows.size();
    data.n_endpoints = K;
    for (const auto& r : treated_rows) data.treated.insert(data.treated.end(), r.begin(), r.end());
    for (const auto& r : control_rows) data.control.insert(data.control.end(), r.begin(), r.end());
    data.validate();
    return data;
}

} // namespace winplan::io
