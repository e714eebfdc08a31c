// Command-line front end: configuration parsing, subcommand dispatch, and
// persistence of results as plot-ready artifacts.

#include <CLI11.hpp>

#include <cstdio>
#include <filesystem>
#include <iostream>
#include <sstream>
#include <string>

#include "fracspde/fracspde.hpp"

namespace fs = std::filesystem;
using namespace fracspde;

namespace {

bool config_has_key(const std::string& text, const std::string& key) {
    std::istringstream in(text);
    std::string line;
    while (std::getline(in, line)) {
        const auto hash = line.find('#');
        if (hash != std::string::npos) line = line.substr(0, hash);
        const auto eq = line.find('=');
        if (eq == std::string::npos) continue;
        std::string k = line.substr(0, eq);
        k.erase(0, k.find_first_not_of(" \t"));
        k.erase(k.find_last_not_of(" \t") + 1);
        if (k == key) return true;
    }
    return false;
}

Eigen::VectorXd load_custom_ic(const std::string& file, int expected) {
    std::ifstream in(file);
    if (!in) throw std::runtime_error("ic.file: cannot open '" + file + "'");
    std::vector<double> vals;
    std::string tok;
    while (std::getline(in, tok)) {
        if (tok.empty()) continue;
        vals.push_back(std::stod(tok));
    }
    if (static_cast<int>(vals.size()) != expected) {
        throw std::runtime_error("ic.file: expected " + std::to_string(expected) +
                                 " interior values, got " + std::to_string(vals.size()));
    }
    Eigen::VectorXd f(expected);
    for (int j = 0; j < expected; ++j) f[j] = vals[j];
    return f;
}

struct Context {
    RunConfig cfg;
    fs::path out_dir;
    int workers = 0;
    bool dump_matrix = false;

    FracOperator op;
    EigenPair eig;

    void prepare_operator() {
        std::optional<double> rho;
        if (!std::isnan(cfg.rho_scheme)) rho = cfg.rho_scheme;
        op = build_fd_matrix(cfg.model.alpha, cfg.grid.M, rho);
        eig = principal_eigenpair(op, cfg.eigen_tol);
        if (dump_matrix) {
            write_text_file(out_dir / "operator_matrix.csv", matrix_csv(op.stiffness));
        }
    }

    IcSpec ic_spec() const {
        IcSpec ic;
        ic.kind = cfg.ic.kind;
        ic.c = cfg.ic.c;
        if (ic.kind == InitialConditionKind::custom) {
            ic.custom = load_custom_ic(cfg.ic.custom_file, cfg.grid.interior_nodes());
        }
        return ic;
    }

    // the echoed configuration is location-independent: the directory is the
    // one holding the file itself
    std::string resolved_config_text() const {
        RunConfig copy = cfg;
        copy.output.directory = ".";
        return serialize_config(copy);
    }
};

int cmd_simulate(Context& ctx) {
    ctx.prepare_operator();
    const IcSpec ic = ctx.ic_spec();
    const EnsembleResult res = run_ensemble(ctx.cfg.model, ctx.cfg.grid, ic, ctx.eig, ctx.op,
                                            ctx.cfg.ensemble.n_realizations,
                                            ctx.cfg.ensemble.master_seed, ctx.workers);
    if (ctx.cfg.output.csv) write_text_file(ctx.out_dir / "realizations.csv", ensemble_csv(res));
    if (ctx.cfg.output.json) {
        write_text_file(ctx.out_dir / "stats.json", stats_to_json(res.stats).dump(2) + "\n");
    }
    write_text_file(ctx.out_dir / "resolved_config.txt", ctx.resolved_config_text());

    // plot-ready artifacts from realization 0 (deterministic rerun)
    {
        const Eigen::VectorXd f = build_ic(ic, ctx.eig, ctx.cfg.grid);
        const std::uint64_t seed = fracspde::detail::derive_seed(ctx.cfg.ensemble.master_seed, 0);
        const FbmPath path = sample_fbm_path(ctx.cfg.model.hurst, ctx.cfg.grid.T, ctx.cfg.grid.N, seed);
        SimulateOptions opts;
        opts.trajectory_stride = ctx.cfg.output.trajectory_stride;
        Trajectory traj;
        const BlowupRecord rec =
            simulate_realization(ctx.cfg.model, ctx.cfg.grid, path, f, ctx.op, opts,
                                 opts.trajectory_stride > 0 ? &traj : nullptr);
        write_text_file(ctx.out_dir / "sup_history.dat",
                        sup_history_plot_data(rec.sup_history, ctx.cfg.grid.dt()));
        if (opts.trajectory_stride > 0) {
            write_text_file(ctx.out_dir / "trajectory.dat", trajectory_plot_data(traj, ctx.cfg.grid));
            if (ctx.cfg.output.csv) {
                write_text_file(ctx.out_dir / "trajectory.csv", trajectory_csv(traj, ctx.cfg.grid));
            }
        }
    }

    std::printf("ensemble: N_R=%d p_hat=%.4f (se %.4f) n_blowup=%d", res.stats.n_realizations,
                res.stats.p_hat, res.stats.se_phat, res.stats.n_blowup);
    if (res.stats.n_blowup > 0) {
        std::printf(" mean_tau=%.4f var_tau=%.4g", res.stats.mean_tau, res.stats.var_tau);
    }
    std::printf("\n");
    return 0;
}

int cmd_sweep(Context& ctx) {
    if (!ctx.cfg.sweep) {
        std::fprintf(stderr, "sweep: config must set sweep.axis and sweep.values\n");
        return 2;
    }
    ctx.prepare_operator();
    const IcSpec ic = ctx.ic_spec();
    const auto rows = parameter_sweep(ctx.cfg.model, ctx.cfg.grid, ic, ctx.cfg.sweep->axis,
                                      ctx.cfg.sweep->values, ctx.cfg.ensemble.n_realizations,
                                      ctx.cfg.ensemble.master_seed, ctx.workers);
    if (ctx.cfg.output.csv) write_text_file(ctx.out_dir / "sweep.csv", sweep_csv(rows));
    if (ctx.cfg.output.json) {
        nlohmann::ordered_json j = nlohmann::ordered_json::array();
        for (const auto& row : rows) {
            nlohmann::ordered_json r;
            r["axis"] = to_string(ctx.cfg.sweep->axis);
            r["axis_value"] = row.axis_value;
            if (row.ok) r["stats"] = stats_to_json(row.stats);
            else r["error"] = row.message;
            j.push_back(r);
        }
        write_text_file(ctx.out_dir / "sweep.json", j.dump(2) + "\n");
    }
    write_text_file(ctx.out_dir / "resolved_config.txt", ctx.resolved_config_text());

    int failures = 0;
    std::string manifest;
    for (const auto& row : rows) {
        std::printf("%s=%-8g ", to_string(ctx.cfg.sweep->axis).c_str(), row.axis_value);
        if (row.ok) {
            std::printf("p_hat=%.4f n_blowup=%d\n", row.stats.p_hat, row.stats.n_blowup);
        } else {
            std::printf("ERROR: %s\n", row.message.c_str());
            manifest += "row " + std::to_string(row.axis_value) + ": " + row.message + "\n";
            ++failures;
        }
    }
    if (failures > 0) {
        write_text_file(ctx.out_dir / "failure_manifest.txt", manifest);
        return 1;
    }
    return 0;
}

int cmd_bounds(Context& ctx) {
    ctx.prepare_operator();
    const IcSpec ic = ctx.ic_spec();
    const Eigen::VectorXd f = build_ic(ic, ctx.eig, ctx.cfg.grid);

    BoundsOptions opts;
    opts.alpha1 = ctx.cfg.bounds_opts.alpha1;
    opts.nh_paths = ctx.cfg.bounds_opts.n_paths;
    opts.t_sup = ctx.cfg.bounds_opts.t_sup;
    opts.n_sup = ctx.cfg.bounds_opts.n_sup;
    opts.nh_seed = ctx.cfg.ensemble.master_seed;

    std::string csv = bounds_report_csv_header();
    for (int k = 0; k < ctx.cfg.ensemble.n_realizations; ++k) {
        const std::uint64_t seed = fracspde::detail::derive_seed(ctx.cfg.ensemble.master_seed, k);
        const FbmPath path = sample_fbm_path(ctx.cfg.model.hurst, ctx.cfg.grid.T, ctx.cfg.grid.N, seed);
        const BoundsReport rep =
            assemble_bounds_report(ctx.cfg.model, ctx.cfg.grid, ctx.eig, ctx.op, path, f, opts);
        if (ctx.cfg.output.json) {
            write_text_file(ctx.out_dir / ("bounds_seed" + std::to_string(k) + ".json"),
                            bounds_report_to_json(rep).dump(2) + "\n");
        }
        csv += bounds_report_csv_row(rep);
    }
    if (ctx.cfg.output.csv) write_text_file(ctx.out_dir / "bounds.csv", csv);
    write_text_file(ctx.out_dir / "resolved_config.txt", ctx.resolved_config_text());
    std::printf("bounds: wrote %d report(s) to %s\n", ctx.cfg.ensemble.n_realizations,
                ctx.out_dir.string().c_str());
    return 0;
}

int cmd_fbm_test(Context& ctx) {
    const double H = ctx.cfg.model.hurst;
    const int n_paths = ctx.cfg.ensemble.n_realizations;
    const int N = std::min(ctx.cfg.grid.N, 1024);
    const double T = ctx.cfg.grid.T;
    const double dt = T / N;

    // five fixed (s, t) probe pairs for the covariance check
    const std::pair<double, double> probes[5] = {
        {0.25 * T, 0.5 * T}, {0.25 * T, T}, {0.5 * T, T}, {0.5 * T, 0.75 * T}, {T, T}};
    int idx_s[5], idx_t[5];
    for (int i = 0; i < 5; ++i) {
        idx_s[i] = static_cast<int>(std::lround(probes[i].first / dt));
        idx_t[i] = static_cast<int>(std::lround(probes[i].second / dt));
    }

    double sum_bt1 = 0.0, sum_bt1_sq = 0.0;
    double cov_sum[5] = {0, 0, 0, 0, 0};
    double lag_xy = 0.0, lag_xx = 0.0;
    long lag_n = 0;
    for (int i = 0; i < n_paths; ++i) {
        const std::uint64_t seed = fracspde::detail::derive_seed(ctx.cfg.ensemble.master_seed, i);
        const FbmPath path = sample_fbm_path(H, T, N, seed);
        const double b1 = path.values.back();
        sum_bt1 += b1;
        sum_bt1_sq += b1 * b1;
        for (int j = 0; j < 5; ++j) cov_sum[j] += path.values[idx_s[j]] * path.values[idx_t[j]];
        for (int n = 0; n + 1 < N; ++n) {
            lag_xy += path.increments[n] * path.increments[n + 1];
            lag_xx += path.increments[n] * path.increments[n];
            ++lag_n;
        }
    }
    const double var_emp = (sum_bt1_sq - sum_bt1 * sum_bt1 / n_paths) / (n_paths - 1);
    const double var_target = std::pow(T, 2.0 * H);
    const double var_se = var_target * std::sqrt(2.0 / (n_paths - 1));
    const double lag1_corr = lag_xy / lag_xx;
    const double lag1_theory =
        0.5 * (std::pow(2.0, 2.0 * H) - 2.0);  // correlation of consecutive fGn increments

    nlohmann::ordered_json j;
    j["hurst"] = H;
    j["n_paths"] = n_paths;
    j["N"] = N;
    j["T"] = T;
    j["var_at_T"] = {{"empirical", var_emp}, {"target", var_target}, {"std_error", var_se}};
    bool ok = std::abs(var_emp - var_target) <= 4.0 * var_se;
    nlohmann::ordered_json cov = nlohmann::ordered_json::array();
    for (int i = 0; i < 5; ++i) {
        const double s = idx_s[i] * dt, t = idx_t[i] * dt;
        const double rh = 0.5 * (std::pow(s, 2 * H) + std::pow(t, 2 * H) - std::pow(std::abs(t - s), 2 * H));
        const double emp = cov_sum[i] / n_paths;
        const double se = std::sqrt((std::pow(s, 2 * H) * std::pow(t, 2 * H) + rh * rh) / n_paths);
        cov.push_back({{"s", s}, {"t", t}, {"empirical", emp}, {"target", rh}, {"std_error", se}});
        if (std::abs(emp - rh) > 4.0 * se) ok = false;
    }
    j["covariance_probes"] = cov;
    j["lag1_increment_correlation"] = {{"empirical", lag1_corr}, {"theory", lag1_theory}};
    if (H == 0.5 && std::abs(lag1_corr) >= 3.0 / std::sqrt(double(lag_n))) ok = false;
    j["pass"] = ok;
    write_text_file(ctx.out_dir / "fbm_diagnostics.json", j.dump(2) + "\n");

    // one dumped sample path for inspection
    const FbmPath sample = sample_fbm_path(H, T, N, ctx.cfg.ensemble.master_seed);
    write_text_file(ctx.out_dir / "fbm_path.csv", fbm_path_csv(sample));

    std::printf("fbm-test: H=%g Var(B(T)) emp=%.5f target=%.5f -> %s\n", H, var_emp, var_target,
                ok ? "ok" : "FAIL");
    return ok ? 0 : 1;
}

int cmd_validate(Context& ctx) {
    int failures = 0;
    nlohmann::ordered_json report = nlohmann::ordered_json::array();
    auto item = [&](const std::string& name, bool ok, const std::string& detail) {
        std::printf("[%s] %s: %s\n", ok ? "ok" : "FAIL", name.c_str(), detail.c_str());
        report.push_back({{"item", name}, {"pass", ok}, {"detail", detail}});
        if (!ok) ++failures;
    };

    // 1. eigenvalue calibration
    {
        const FracOperator op = build_fd_matrix(1.2, 101);
        const EigenPair eig = principal_eigenpair(op);
        std::ostringstream d;
        d << "lambda1 = " << eig.lambda1 << " (reference 1.3037 +- 0.01)";
        item("eigenvalue calibration", std::abs(eig.lambda1 - 1.3037) <= 0.01, d.str());
    }
    // 2. pathwise comparison
    {
        ModelParams mp;  // defaults
        GridSpec grid;
        grid.N = 1000;
        const FracOperator op = build_fd_matrix(mp.alpha, grid.M);
        const EigenPair eig = principal_eigenpair(op);
        const Eigen::VectorXd f_high =
            make_initial_condition(InitialConditionKind::bump_plus_eigen, 0.01, eig, grid);
        double worst = 0.0;
        for (int s = 0; s < 5; ++s) {
            worst = std::max(worst, pathwise_comparison_test(mp, grid, 100 + s,
                                                             0.5 * f_high, f_high));
        }
        std::ostringstream d;
        d << "max relative ordering violation over 5 seeds = " << worst;
        item("pathwise comparison", worst <= 1e-6, d.str());
    }
    // 3. transform equivalence
    {
        ModelParams mp;
        GridSpec grid;
        grid.N = 400;
        grid.T = 0.2;
        const FracOperator op = build_fd_matrix(mp.alpha, grid.M);
        const EigenPair eig = principal_eigenpair(op);
        const Eigen::VectorXd f =
            make_initial_condition(InitialConditionKind::bump_plus_eigen, 0.01, eig, grid);
        ModelParams det = mp;
        det.sigma = 0.0;
        const FbmPath path = sample_fbm_path(mp.hurst, grid.T, grid.N, 77);
        const auto zero = compare_direct_vs_transformed(det, grid, path, f, TransformVariant::fbm_s1);
        const auto noisy = compare_direct_vs_transformed(mp, grid, path, f, TransformVariant::fbm_s1);
        std::ostringstream d;
        d << "sigma=0 discrepancy = " << zero.max_discrepancy
          << ", sigma=0.1 discrepancy = " << noisy.max_discrepancy;
        item("transform equivalence", zero.max_discrepancy == 0.0 && noisy.max_discrepancy < 1e-2,
             d.str());
    }
    // 4. Gamma identity (quick Monte Carlo) and special-function relations
    {
        bool ok = std::abs(regularized_gamma_p(1.0, 0.5) - (1.0 - std::exp(-0.5))) < 1e-10 &&
                  std::abs(regularized_gamma_p(0.5, 1.0) - std::erf(1.0)) < 1e-10;
        const int n = 4000, steps = 6000;
        const double dt = 12.0 / steps;
        std::vector<double> vals(n);
        for (int i = 0; i < n; ++i) {
            fracspde::detail::GaussianRng rng(fracspde::detail::derive_seed(999, i));
            double w = 0.0, cum = 0.0, prev = 1.0;
            for (int k = 1; k <= steps; ++k) {
                w += std::sqrt(dt) * rng.normal();
                const double cur = std::exp(2.0 * (w - k * dt));
                cum += 0.5 * (prev + cur) * dt;
                prev = cur;
            }
            vals[i] = cum;
        }
        std::sort(vals.begin(), vals.end());
        double worst_gap = 0.0;
        for (double pq : {0.25, 0.5, 0.75}) {
            const double emp = vals[static_cast<std::size_t>(pq * n)];
            const double theo = 1.0 / (2.0 * (-std::log(pq)));  // quantile of 1/(2 Exp(1))
            worst_gap = std::max(worst_gap, std::abs(emp - theo) / theo);
        }
        std::ostringstream d;
        d << "worst relative quantile gap = " << worst_gap << " (n = " << n << ")";
        item("gamma identity", ok && worst_gap < 0.10, d.str());
    }

    write_text_file(ctx.out_dir / "validation_report.json", report.dump(2) + "\n");
    return failures == 0 ? 0 : 1;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"fracspde: numerical laboratory for a stochastic nonlocal fractional "
                 "reaction-diffusion equation (blow-up statistics, fBm sampling, closed-form "
                 "blow-up-time and probability bounds)"};
    app.require_subcommand(1);

    std::string config_path, out_override, profile = "desk";
    std::uint64_t seed_override = 0;
    bool seed_set = false;
    int workers = 0;
    bool dump_matrix = false;
    app.add_option("--config", config_path, "flat key-value configuration file");
    app.add_option("--out", out_override, "output directory (overrides output.directory)");
    app.add_option("--seed", seed_override, "master seed override")->each([&](const std::string&) {
        seed_set = true;
    });
    app.add_option("--profile", profile, "desk (N_R=1000, N=2000) or full (N_R=N=10^4)")
        ->check(CLI::IsMember({"desk", "full"}));
    app.add_option("--workers", workers,
                   "worker threads (default: FRACSPDE_WORKERS env var, else all cores)");
    app.add_flag("--dump-matrix", dump_matrix, "write the operator matrix as CSV");

    auto* sub_sim = app.add_subcommand("simulate", "run one seeded ensemble and write statistics");
    auto* sub_sweep = app.add_subcommand("sweep", "one ensemble per sweep value (table layout)");
    auto* sub_bounds = app.add_subcommand("bounds", "evaluate the closed-form bound suite per path seed");
    auto* sub_fbm = app.add_subcommand("fbm-test", "fBm sampler covariance/normality diagnostics");
    auto* sub_validate = app.add_subcommand("validate", "run the built-in invariant suite");

    CLI11_PARSE(app, argc, argv);

    try {
        Context ctx;
        std::string text;
        if (!config_path.empty()) text = read_text_file(config_path);
        ctx.cfg = parse_config(text);
        apply_profile(ctx.cfg, profile == "full" ? Profile::full : Profile::desk,
                      config_has_key(text, "grid.N"), config_has_key(text, "ensemble.n_realizations"));
        if (seed_set) ctx.cfg.ensemble.master_seed = seed_override;
        if (!out_override.empty()) ctx.cfg.output.directory = out_override;
        ctx.out_dir = ctx.cfg.output.directory;
        fs::create_directories(ctx.out_dir);
        ctx.workers = workers;
        ctx.dump_matrix = dump_matrix;

        if (sub_sim->parsed()) return cmd_simulate(ctx);
        if (sub_sweep->parsed()) return cmd_sweep(ctx);
        if (sub_bounds->parsed()) return cmd_bounds(ctx);
        if (sub_fbm->parsed()) return cmd_fbm_test(ctx);
        if (sub_validate->parsed()) return cmd_validate(ctx);
    } catch (const std::exception& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return 2;
    }
    return 2;
}
