#pragma once

#include <algorithm>
#include <cctype>
#include <cstdint>
#include <map>
#include <optional>
#include <set>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "fracspde/model.hpp"
#include "fracspde/montecarlo.hpp"

namespace fracspde {

struct EnsembleSpec {
    int n_realizations = 1000;
    std::uint64_t master_seed = 1;
};

struct SweepSpec {
    SweepAxis axis = SweepAxis::H;
    std::vector<double> values;
};

struct BoundsSpec {
    double alpha1 = std::numeric_limits<double>::quiet_NaN();  // NaN: min(1, H + 0.2)
    int n_paths = 200;
    double t_sup = 10.0;
    int n_sup = 2000;
};

struct OutputSpec {
    std::string directory = "out";
    bool csv = true;
    bool json = true;
    int trajectory_stride = 0;
};

struct IcConfig {
    InitialConditionKind kind = InitialConditionKind::bump_plus_eigen;
    double c = 0.01;
    std::string custom_file;  // CSV of interior values, required for kind=custom
};

/// Full run configuration; defaults are the paper's indicative values
/// (delta=1, gamma=0.1, beta=1, sigma=0.1, p=2, q=2, alpha=1.2, H=0.6,
/// M=101, N=10^4, T=1, c=0.01, M_b=4.5036e15).
struct RunConfig {
    ModelParams model;
    GridSpec grid;
    IcConfig ic;
    EnsembleSpec ensemble;
    std::optional<SweepSpec> sweep;
    BoundsSpec bounds_opts;
    OutputSpec output;
    double rho_scheme = std::numeric_limits<double>::quiet_NaN();  // NaN: scheme default 1 + alpha/2
    double eigen_tol = 1e-10;

    void validate() const {
        model.validate();
        grid.validate();
        if (ic.kind != InitialConditionKind::custom && !(ic.c >= 0.0)) {
            throw std::invalid_argument("ic.c: must be >= 0");
        }
        if (ic.kind == InitialConditionKind::custom && ic.custom_file.empty()) {
            throw std::invalid_argument("ic.file: required when ic.kind = custom");
        }
        if (ensemble.n_realizations < 1) throw std::invalid_argument("ensemble.n_realizations: must be >= 1");
        if (sweep && sweep->values.empty()) throw std::invalid_argument("sweep.values: must be nonempty");
        if (bounds_opts.n_paths < 1) throw std::invalid_argument("bounds.n_paths: must be >= 1");
        if (!(bounds_opts.t_sup > 0.0)) throw std::invalid_argument("bounds.t_sup: must be > 0");
        if (bounds_opts.n_sup < 2) throw std::invalid_argument("bounds.n_sup: must be >= 2");
        if (output.trajectory_stride < 0) throw std::invalid_argument("output.trajectory_stride: must be >= 0");
        if (!output.csv && !output.json) throw std::invalid_argument("output.formats: need csv and/or json");
        if (!(eigen_tol > 0.0)) throw std::invalid_argument("operator.eigen_tol: must be > 0");
    }
};

namespace detail {

inline std::string trim(const std::string& s) {
    const auto b = s.find_first_not_of(" \t\r\n");
    if (b == std::string::npos) return "";
    const auto e = s.find_last_not_of(" \t\r\n");
    return s.substr(b, e - b + 1);
}

inline double parse_double(const std::string& key, const std::string& v) {
    try {
        std::size_t pos = 0;
        const double x = std::stod(v, &pos);
        if (pos != v.size()) throw std::invalid_argument("");
        return x;
    } catch (...) {
        throw std::invalid_argument(key + ": expected a number, got '" + v + "'");
    }
}

inline long long parse_int(const std::string& key, const std::string& v) {
    try {
        std::size_t pos = 0;
        const long long x = std::stoll(v, &pos);
        if (pos != v.size()) throw std::invalid_argument("");
        return x;
    } catch (...) {
        throw std::invalid_argument(key + ": expected an integer, got '" + v + "'");
    }
}

inline std::uint64_t parse_u64(const std::string& key, const std::string& v) {
    try {
        std::size_t pos = 0;
        const unsigned long long x = std::stoull(v, &pos);
        if (pos != v.size()) throw std::invalid_argument("");
        return x;
    } catch (...) {
        throw std::invalid_argument(key + ": expected an unsigned integer, got '" + v + "'");
    }
}

inline std::vector<double> parse_list(const std::string& key, const std::string& v) {
    std::vector<double> out;
    std::stringstream ss(v);
    std::string item;
    while (std::getline(ss, item, ',')) {
        item = trim(item);
        if (!item.empty()) out.push_back(parse_double(key, item));
    }
    if (out.empty()) throw std::invalid_argument(key + ": expected a comma-separated list");
    return out;
}

}  // namespace detail

/// Parse the flat dotted-key document ("model.delta = 1.0", '#' comments).
/// Unknown keys are rejected by name; missing keys keep their defaults.
inline RunConfig parse_config(const std::string& text) {
    RunConfig cfg;
    std::map<std::string, std::string> kv;
    std::istringstream in(text);
    std::string line;
    int lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        const auto hash = line.find('#');
        if (hash != std::string::npos) line = line.substr(0, hash);
        line = detail::trim(line);
        if (line.empty()) continue;
        const auto eq = line.find('=');
        if (eq == std::string::npos) {
            throw std::invalid_argument("config line " + std::to_string(lineno) +
                                        ": expected 'key = value'");
        }
        const std::string key = detail::trim(line.substr(0, eq));
        const std::string val = detail::trim(line.substr(eq + 1));
        if (key.empty()) throw std::invalid_argument("config line " + std::to_string(lineno) + ": empty key");
        if (kv.count(key)) throw std::invalid_argument("config: duplicate key '" + key + "'");
        kv[key] = val;
    }

    using detail::parse_double;
    using detail::parse_int;
    using detail::parse_list;
    using detail::parse_u64;

    std::string sweep_axis;
    std::vector<double> sweep_values;
    for (const auto& [key, val] : kv) {
        if (key == "model.delta") cfg.model.delta = parse_double(key, val);
        else if (key == "model.gamma") cfg.model.gamma = parse_double(key, val);
        else if (key == "model.beta") cfg.model.beta = parse_double(key, val);
        else if (key == "model.sigma") cfg.model.sigma = parse_double(key, val);
        else if (key == "model.p") cfg.model.p = parse_double(key, val);
        else if (key == "model.q") cfg.model.q = parse_double(key, val);
        else if (key == "model.alpha") cfg.model.alpha = parse_double(key, val);
        else if (key == "model.hurst") cfg.model.hurst = parse_double(key, val);
        else if (key == "model.noise_shape") cfg.model.noise_shape = noise_shape_from_string(val);
        else if (key == "grid.M") cfg.grid.M = static_cast<int>(parse_int(key, val));
        else if (key == "grid.N") cfg.grid.N = static_cast<int>(parse_int(key, val));
        else if (key == "grid.T") cfg.grid.T = parse_double(key, val);
        else if (key == "grid.blowup_threshold") cfg.grid.blowup_threshold = parse_double(key, val);
        else if (key == "ic.kind") cfg.ic.kind = ic_kind_from_string(val);
        else if (key == "ic.c") cfg.ic.c = parse_double(key, val);
        else if (key == "ic.file") cfg.ic.custom_file = val;
        else if (key == "ensemble.n_realizations") cfg.ensemble.n_realizations = static_cast<int>(parse_int(key, val));
        else if (key == "ensemble.master_seed") cfg.ensemble.master_seed = parse_u64(key, val);
        else if (key == "sweep.axis") sweep_axis = val;
        else if (key == "sweep.values") sweep_values = parse_list(key, val);
        else if (key == "bounds.alpha1") cfg.bounds_opts.alpha1 = parse_double(key, val);
        else if (key == "bounds.n_paths") cfg.bounds_opts.n_paths = static_cast<int>(parse_int(key, val));
        else if (key == "bounds.t_sup") cfg.bounds_opts.t_sup = parse_double(key, val);
        else if (key == "bounds.n_sup") cfg.bounds_opts.n_sup = static_cast<int>(parse_int(key, val));
        else if (key == "output.directory") cfg.output.directory = val;
        else if (key == "output.formats") {
            cfg.output.csv = val.find("csv") != std::string::npos;
            cfg.output.json = val.find("json") != std::string::npos;
            if (!cfg.output.csv && !cfg.output.json) {
                throw std::invalid_argument("output.formats: expected a subset of {csv, json}");
            }
        }
        else if (key == "output.trajectory_stride") cfg.output.trajectory_stride = static_cast<int>(parse_int(key, val));
        else if (key == "operator.rho_scheme") cfg.rho_scheme = parse_double(key, val);
        else if (key == "operator.eigen_tol") cfg.eigen_tol = parse_double(key, val);
        else throw std::invalid_argument("config: unknown key '" + key + "'");
    }

    if (!sweep_axis.empty() || !sweep_values.empty()) {
        if (sweep_axis.empty() || sweep_values.empty()) {
            throw std::invalid_argument("config: sweep.axis and sweep.values must be given together");
        }
        SweepSpec sw;
        sw.axis = sweep_axis_from_string(sweep_axis);
        sw.values = sweep_values;
        cfg.sweep = sw;
    }

    cfg.validate();
    return cfg;
}

/// Canonical text form; parse_config(serialize_config(cfg)) reproduces cfg.
inline std::string serialize_config(const RunConfig& cfg) {
    std::ostringstream out;
    out.precision(17);
    out << "model.delta = " << cfg.model.delta << "\n";
    out << "model.gamma = " << cfg.model.gamma << "\n";
    out << "model.beta = " << cfg.model.beta << "\n";
    out << "model.sigma = " << cfg.model.sigma << "\n";
    out << "model.p = " << cfg.model.p << "\n";
    out << "model.q = " << cfg.model.q << "\n";
    out << "model.alpha = " << cfg.model.alpha << "\n";
    out << "model.hurst = " << cfg.model.hurst << "\n";
    out << "model.noise_shape = " << to_string(cfg.model.noise_shape) << "\n";
    out << "grid.M = " << cfg.grid.M << "\n";
    out << "grid.N = " << cfg.grid.N << "\n";
    out << "grid.T = " << cfg.grid.T << "\n";
    out << "grid.blowup_threshold = " << cfg.grid.blowup_threshold << "\n";
    out << "ic.kind = " << to_string(cfg.ic.kind) << "\n";
    out << "ic.c = " << cfg.ic.c << "\n";
    if (!cfg.ic.custom_file.empty()) out << "ic.file = " << cfg.ic.custom_file << "\n";
    out << "ensemble.n_realizations = " << cfg.ensemble.n_realizations << "\n";
    out << "ensemble.master_seed = " << cfg.ensemble.master_seed << "\n";
    if (cfg.sweep) {
        out << "sweep.axis = " << to_string(cfg.sweep->axis) << "\n";
        out << "sweep.values = ";
        for (std::size_t i = 0; i < cfg.sweep->values.size(); ++i) {
            if (i) out << ", ";
            out << cfg.sweep->values[i];
        }
        out << "\n";
    }
    if (!std::isnan(cfg.bounds_opts.alpha1)) out << "bounds.alpha1 = " << cfg.bounds_opts.alpha1 << "\n";
    out << "bounds.n_paths = " << cfg.bounds_opts.n_paths << "\n";
    out << "bounds.t_sup = " << cfg.bounds_opts.t_sup << "\n";
    out << "bounds.n_sup = " << cfg.bounds_opts.n_sup << "\n";
    out << "output.directory = " << cfg.output.directory << "\n";
    out << "output.formats = " << (cfg.output.csv && cfg.output.json ? "csv,json"
                                   : cfg.output.csv ? "csv" : "json") << "\n";
    out << "output.trajectory_stride = " << cfg.output.trajectory_stride << "\n";
    if (!std::isnan(cfg.rho_scheme)) out << "operator.rho_scheme = " << cfg.rho_scheme << "\n";
    out << "operator.eigen_tol = " << cfg.eigen_tol << "\n";
    return out.str();
}

enum class Profile { desk, full };

/// Desk profile: N_R = 1000, M = 101, N = 2000 on [0, 1]; full profile is the
/// paper's N_R = 10^4, N = 10^4. Keys given explicitly in the config win.
inline void apply_profile(RunConfig& cfg, Profile profile, bool n_explicit, bool nr_explicit) {
    if (profile == Profile::desk) {
        if (!n_explicit) cfg.grid.N = 2000;
        if (!nr_explicit) cfg.ensemble.n_realizations = 1000;
    } else {
        if (!n_explicit) cfg.grid.N = 10000;
        if (!nr_explicit) cfg.ensemble.n_realizations = 10000;
    }
}

}  // namespace fracspde
