#pragma once

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <stdexcept>
#include <string>
#include <vector>

#include <json.hpp>

#include "fracspde/bounds.hpp"
#include "fracspde/montecarlo.hpp"
#include "fracspde/simulate.hpp"

namespace fracspde {

// Full-precision, locale-independent float formatting for stable files.
inline std::string fmt_g17(double x) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.17g", x);
    return buf;
}

inline void write_text_file(const std::filesystem::path& path, const std::string& content) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot open for writing: " + path.string());
    out << content;
    if (!out) throw std::runtime_error("write failed: " + path.string());
}

inline std::string read_text_file(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error("cannot open for reading: " + path.string());
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

// --- realization / ensemble / sweep CSV (frozen column orders) ---

inline std::string realization_csv_header() {
    return "realization_id,seed,blew_up,tau_b,termination,sup_final\n";
}

inline std::string realization_csv_row(const RealizationRow& r) {
    std::ostringstream out;
    out << r.id << ',' << r.seed << ',' << (r.blew_up ? 1 : 0) << ','
        << (r.blew_up ? fmt_g17(r.tau_b) : std::string("nan")) << ',' << to_string(r.termination)
        << ',' << fmt_g17(r.sup_final) << '\n';
    return out.str();
}

inline std::string ensemble_csv(const EnsembleResult& res) {
    std::string out = realization_csv_header();
    for (const auto& r : res.rows) out += realization_csv_row(r);
    return out;
}

inline std::string sweep_csv_header() {
    return "axis_value,p_hat,se_phat,mean_tau,var_tau,n_blowup,n_realizations,master_seed\n";
}

inline std::string sweep_csv(const std::vector<SweepRow>& rows) {
    std::string out = sweep_csv_header();
    for (const auto& row : rows) {
        std::ostringstream line;
        line << fmt_g17(row.axis_value) << ',';
        if (row.ok) {
            const EnsembleStats& s = row.stats;
            line << fmt_g17(s.p_hat) << ',' << fmt_g17(s.se_phat) << ','
                 << (s.n_blowup > 0 ? fmt_g17(s.mean_tau) : std::string("nan")) << ','
                 << (s.n_blowup > 0 ? fmt_g17(s.var_tau) : std::string("nan")) << ','
                 << s.n_blowup << ',' << s.n_realizations << ',' << s.master_seed;
        } else {
            line << "error,,,,,,";
        }
        line << '\n';
        out += line.str();
    }
    return out;
}

inline nlohmann::ordered_json stats_to_json(const EnsembleStats& s) {
    nlohmann::ordered_json j;
    j["n_realizations"] = s.n_realizations;
    j["n_blowup"] = s.n_blowup;
    j["p_hat"] = s.p_hat;
    if (s.n_blowup > 0) {
        j["mean_tau"] = s.mean_tau;
        j["var_tau"] = s.var_tau;
    } else {
        j["mean_tau"] = nullptr;
        j["var_tau"] = nullptr;
    }
    j["se_phat"] = s.se_phat;
    j["master_seed"] = s.master_seed;
    return j;
}

// --- bounds report ---

inline nlohmann::ordered_json hit_to_json(const HitResult& h) {
    nlohmann::ordered_json j;
    j["hit"] = h.hit;
    if (h.hit) j["time"] = h.time; else j["time"] = nullptr;
    j["accumulated"] = h.accumulated;
    j["threshold"] = h.threshold;
    return j;
}

inline nlohmann::ordered_json bounds_report_to_json(const BoundsReport& rep) {
    nlohmann::ordered_json j;
    j["lambda1"] = rep.lambda1;
    j["J0"] = rep.J0;
    j["c0"] = rep.c0;
    j["f_sup"] = rep.f_sup;
    j["regime"] = rep.regime;
    j["tau_lower"] = hit_to_json(rep.tau_lower);
    j["tau_upper"] = hit_to_json(rep.tau_upper.hit);
    j["tau_upper"]["f_dominates_eigen"] = rep.tau_upper.f_dominates_eigen;
    j["tau_upper"]["b_inferred"] = rep.tau_upper.b_inferred;
    j["b_condition_ok"] = rep.b_condition.ok;
    j["b_condition_margin"] = rep.b_condition.margin;
    j["b_used"] = rep.b_used;
    j["global_existence"] = to_string(rep.global_existence.verdict);
    j["global_existence_value"] = rep.global_existence.criterion_value;
    if (std::isnan(rep.prob_lower_fbm)) j["prob_lower_fbm"] = nullptr;
    else j["prob_lower_fbm"] = rep.prob_lower_fbm;
    j["nh"] = {{"value", rep.nh.value}, {"std_error", rep.nh.std_error},
               {"n_paths", rep.nh.n_paths}, {"alpha1", rep.nh_alpha1}};
    if (rep.brownian) {
        j["prob_bounds_brownian"] = {{"lower", rep.brownian->prob_lower},
                                     {"upper", rep.brownian->prob_upper},
                                     {"theta1", rep.brownian->theta1},
                                     {"nu", rep.brownian->nu},
                                     {"vartheta", rep.brownian->vartheta},
                                     {"tau_ss_threshold", rep.brownian->tau_ss_threshold},
                                     {"tau_ss_rate", rep.brownian->tau_ss_rate}};
    } else {
        j["prob_bounds_brownian"] = nullptr;
        j["brownian_error"] = rep.brownian_error;
    }
    j["path_seed"] = rep.path_seed;
    j["inputs_digest"] = rep.inputs_digest;
    return j;
}

inline std::string bounds_report_csv_header() {
    return "path_seed,lambda1,J0,c0,f_sup,regime,tau_lower_hit,tau_lower,tau_upper_hit,tau_upper,"
           "b_condition_ok,b_margin,global_existence,prob_lower_fbm,prob_brownian_lower,"
           "prob_brownian_upper,inputs_digest\n";
}

inline std::string bounds_report_csv_row(const BoundsReport& rep) {
    std::ostringstream out;
    out << rep.path_seed << ',' << fmt_g17(rep.lambda1) << ',' << fmt_g17(rep.J0) << ','
        << fmt_g17(rep.c0) << ',' << fmt_g17(rep.f_sup) << ',' << rep.regime << ','
        << (rep.tau_lower.hit ? 1 : 0) << ','
        << (rep.tau_lower.hit ? fmt_g17(rep.tau_lower.time) : std::string("nan")) << ','
        << (rep.tau_upper.hit.hit ? 1 : 0) << ','
        << (rep.tau_upper.hit.hit ? fmt_g17(rep.tau_upper.hit.time) : std::string("nan")) << ','
        << (rep.b_condition.ok ? 1 : 0) << ',' << fmt_g17(rep.b_condition.margin) << ','
        << to_string(rep.global_existence.verdict) << ','
        << (std::isnan(rep.prob_lower_fbm) ? std::string("nan") : fmt_g17(rep.prob_lower_fbm)) << ','
        << (rep.brownian ? fmt_g17(rep.brownian->prob_lower) : std::string("nan")) << ','
        << (rep.brownian ? fmt_g17(rep.brownian->prob_upper) : std::string("nan")) << ','
        << rep.inputs_digest << '\n';
    return out.str();
}

// --- plot data (whitespace-separated columns, commented header) ---

inline std::string sup_history_plot_data(const std::vector<double>& sup, double dt) {
    std::string out = "# t sup\n";
    for (std::size_t n = 0; n < sup.size(); ++n) {
        out += fmt_g17(n * dt);
        out += ' ';
        out += fmt_g17(sup[n]);
        out += '\n';
    }
    return out;
}

inline std::string trajectory_plot_data(const Trajectory& traj, const GridSpec& grid) {
    if (traj.stride <= 0) throw std::invalid_argument("trajectory_plot_data: stride must be positive");
    std::string out = "# t x u\n";
    for (std::size_t k = 0; k < traj.times.size(); ++k) {
        for (int j = 0; j < traj.fields[k].size(); ++j) {
            out += fmt_g17(traj.times[k]);
            out += ' ';
            out += fmt_g17(grid.x(j + 1));
            out += ' ';
            out += fmt_g17(traj.fields[k][j]);
            out += '\n';
        }
    }
    return out;
}

// Wide trajectory dump: one row per stored snapshot, columns
// (n, t, x_1..x_m, u_1..u_m).
inline std::string trajectory_csv(const Trajectory& traj, const GridSpec& grid) {
    if (traj.stride <= 0) throw std::invalid_argument("trajectory_csv: stride must be positive");
    const int m = grid.interior_nodes();
    std::string out = "n,t";
    for (int j = 1; j <= m; ++j) out += ",x" + std::to_string(j);
    for (int j = 1; j <= m; ++j) out += ",u" + std::to_string(j);
    out += '\n';
    for (std::size_t k = 0; k < traj.times.size(); ++k) {
        std::ostringstream line;
        line << static_cast<long>(std::lround(traj.times[k] / grid.dt())) << ','
             << fmt_g17(traj.times[k]);
        for (int j = 1; j <= m; ++j) line << ',' << fmt_g17(grid.x(j));
        for (int j = 0; j < m; ++j) line << ',' << fmt_g17(traj.fields[k][j]);
        line << '\n';
        out += line.str();
    }
    return out;
}

// --- fBm path dump (n, t, B, dB, Bstar) ---

inline std::string fbm_path_csv(const FbmPath& path) {
    const auto bstar = running_sup_abs(path);
    std::string out = "n,t,B,dB,Bstar\n";
    for (std::size_t n = 0; n < path.values.size(); ++n) {
        std::ostringstream line;
        line << n << ',' << fmt_g17(path.time(static_cast<int>(n))) << ','
             << fmt_g17(path.values[n]) << ','
             << (n < path.increments.size() ? fmt_g17(path.increments[n]) : std::string("nan"))
             << ',' << fmt_g17(bstar[n]) << '\n';
        out += line.str();
    }
    return out;
}

// Matrix dump for debugging (row-major, full precision).
inline std::string matrix_csv(const Eigen::MatrixXd& m) {
    std::string out;
    for (Eigen::Index i = 0; i < m.rows(); ++i) {
        for (Eigen::Index j = 0; j < m.cols(); ++j) {
            if (j) out += ',';
            out += fmt_g17(m(i, j));
        }
        out += '\n';
    }
    return out;
}

}  // namespace fracspde
