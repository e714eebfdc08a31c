#pragma once

#include <Eigen/Dense>
#include <atomic>
#include <cmath>
#include <cstdint>
#include <cstdlib>
#include <functional>
#include <mutex>
#include <optional>
#include <stdexcept>
#include <string>
#include <thread>
#include <vector>

#include "fracspde/detail/rng.hpp"
#include "fracspde/fbm.hpp"
#include "fracspde/simulate.hpp"

namespace fracspde {

namespace detail {

// Index-parallel loop; per-index work must be independent. Results written
// into preallocated slots keep aggregation order-insensitive.
inline void parallel_for(int n, int workers, const std::function<void(int)>& body) {
    if (workers <= 1 || n <= 1) {
        for (int i = 0; i < n; ++i) body(i);
        return;
    }
    std::atomic<int> next{0};
    std::vector<std::thread> pool;
    std::exception_ptr error;
    std::mutex error_mutex;
    const int nw = std::min(workers, n);
    pool.reserve(nw);
    for (int w = 0; w < nw; ++w) {
        pool.emplace_back([&]() {
            for (int i = next.fetch_add(1); i < n; i = next.fetch_add(1)) {
                try {
                    body(i);
                } catch (...) {
                    std::lock_guard<std::mutex> lock(error_mutex);
                    if (!error) error = std::current_exception();
                }
            }
        });
    }
    for (auto& t : pool) t.join();
    if (error) std::rethrow_exception(error);
}

inline int default_workers() {
    if (const char* env = std::getenv("FRACSPDE_WORKERS")) {
        const int w = std::atoi(env);
        if (w >= 1) return w;
    }
    const unsigned hc = std::thread::hardware_concurrency();
    return hc == 0 ? 1 : static_cast<int>(hc);
}

}  // namespace detail

struct IcSpec {
    InitialConditionKind kind = InitialConditionKind::bump_plus_eigen;
    double c = 0.01;
    std::optional<Eigen::VectorXd> custom;
};

inline Eigen::VectorXd build_ic(const IcSpec& ic, const EigenPair& eig, const GridSpec& grid) {
    return make_initial_condition(ic.kind, ic.c, eig, grid,
                                  ic.custom ? &ic.custom.value() : nullptr);
}

struct EnsembleStats {
    int n_realizations = 0;
    int n_blowup = 0;
    double p_hat = 0.0;
    double mean_tau = std::numeric_limits<double>::quiet_NaN();  // over blow-up realizations
    double var_tau = std::numeric_limits<double>::quiet_NaN();   // unbiased, ditto
    double se_phat = 0.0;
    std::uint64_t master_seed = 0;
};

struct RealizationRow {
    int id = 0;
    std::uint64_t seed = 0;
    bool blew_up = false;
    double tau_b = std::numeric_limits<double>::quiet_NaN();
    Termination termination = Termination::completed;
    double sup_final = 0.0;
};

struct EnsembleResult {
    EnsembleStats stats;
    std::vector<RealizationRow> rows;
};

/// N_R independent realizations with per-index derived seeds; aggregation is
/// order-insensitive so the result does not depend on the worker count.
inline EnsembleResult run_ensemble(const ModelParams& params, const GridSpec& grid,
                                   const IcSpec& ic, const EigenPair& eig, const FracOperator& op,
                                   int n_realizations, std::uint64_t master_seed, int workers = 0) {
    if (n_realizations < 1) throw std::invalid_argument("run_ensemble: N_R must be >= 1");
    params.validate();
    grid.validate();
    if (workers <= 0) workers = detail::default_workers();

    const Eigen::VectorXd f = build_ic(ic, eig, grid);
    const SemiImplicitSolver solver(op.stiffness, grid.dt());
    const SimpsonRule rule = SimpsonRule::build(grid.M, grid.dx());

    EnsembleResult result;
    result.rows.resize(n_realizations);
    detail::parallel_for(n_realizations, workers, [&](int i) {
        const std::uint64_t seed = detail::derive_seed(master_seed, static_cast<std::uint64_t>(i));
        const FbmPath path = sample_fbm_path(params.hurst, grid.T, grid.N, seed);
        const BlowupRecord rec = simulate_realization(params, grid, path, f, solver, rule);
        RealizationRow& row = result.rows[i];
        row.id = i;
        row.seed = seed;
        row.blew_up = rec.blew_up;
        row.termination = rec.termination;
        row.sup_final = rec.sup_final;
        if (rec.blew_up) row.tau_b = rec.tau_b;
    });

    EnsembleStats& st = result.stats;
    st.n_realizations = n_realizations;
    st.master_seed = master_seed;
    double sum = 0.0, sumsq = 0.0;
    for (const auto& row : result.rows) {
        if (row.blew_up) {
            ++st.n_blowup;
            sum += row.tau_b;
            sumsq += row.tau_b * row.tau_b;
        }
    }
    st.p_hat = static_cast<double>(st.n_blowup) / n_realizations;
    st.se_phat = std::sqrt(st.p_hat * (1.0 - st.p_hat) / n_realizations);
    if (st.n_blowup > 0) {
        st.mean_tau = sum / st.n_blowup;
        st.var_tau = st.n_blowup > 1
                         ? (sumsq - sum * sum / st.n_blowup) / (st.n_blowup - 1)
                         : 0.0;
    }
    return result;
}

enum class SweepAxis { q, H, sigma, c, alpha };

inline std::string to_string(SweepAxis a) {
    switch (a) {
        case SweepAxis::q: return "q";
        case SweepAxis::H: return "H";
        case SweepAxis::sigma: return "sigma";
        case SweepAxis::c: return "c";
        case SweepAxis::alpha: return "alpha";
    }
    return "?";
}

inline SweepAxis sweep_axis_from_string(const std::string& s) {
    if (s == "q") return SweepAxis::q;
    if (s == "H" || s == "hurst") return SweepAxis::H;
    if (s == "sigma") return SweepAxis::sigma;
    if (s == "c") return SweepAxis::c;
    if (s == "alpha") return SweepAxis::alpha;
    throw std::invalid_argument("sweep.axis: expected one of q|H|sigma|c|alpha, got '" + s + "'");
}

struct SweepRow {
    double axis_value = 0.0;
    EnsembleStats stats;
    bool ok = false;
    std::string message;
};

/// One ensemble per axis value; eigen-data are re-derived when alpha changes.
/// All rows share the master seed, so duplicate values give identical rows.
inline std::vector<SweepRow> parameter_sweep(const ModelParams& base, const GridSpec& grid,
                                             const IcSpec& ic, SweepAxis axis,
                                             const std::vector<double>& values, int n_realizations,
                                             std::uint64_t master_seed, int workers = 0,
                                             std::vector<EnsembleResult>* full = nullptr) {
    if (values.empty()) throw std::invalid_argument("parameter_sweep: values must be nonempty");
    std::vector<SweepRow> rows;
    rows.reserve(values.size());

    FracOperator op = build_fd_matrix(base.alpha, grid.M);
    EigenPair eig = principal_eigenpair(op);
    double current_alpha = base.alpha;

    for (double v : values) {
        SweepRow row;
        row.axis_value = v;
        try {
            ModelParams params = base;
            IcSpec ic_row = ic;
            switch (axis) {
                case SweepAxis::q: params.q = v; break;
                case SweepAxis::H: params.hurst = v; break;
                case SweepAxis::sigma: params.sigma = v; break;
                case SweepAxis::c: ic_row.c = v; break;
                case SweepAxis::alpha: params.alpha = v; break;
            }
            params.validate();
            if (params.alpha != current_alpha) {
                op = build_fd_matrix(params.alpha, grid.M);
                eig = principal_eigenpair(op);
                current_alpha = params.alpha;
            }
            EnsembleResult res =
                run_ensemble(params, grid, ic_row, eig, op, n_realizations, master_seed, workers);
            row.stats = res.stats;
            row.ok = true;
            if (full != nullptr) full->push_back(std::move(res));
        } catch (const std::exception& e) {
            row.message = e.what();
            if (full != nullptr) full->push_back(EnsembleResult{});
        }
        rows.push_back(row);
    }
    return rows;
}

/// Runs f_low and f_high on the identical path and returns the largest
/// positive part of (u_low - u_high), relative to the current solution scale,
/// over all steps until the first blow-up of either run.
inline double pathwise_comparison_test(const ModelParams& params, const GridSpec& grid,
                                       std::uint64_t path_seed, const Eigen::VectorXd& f_low,
                                       const Eigen::VectorXd& f_high) {
    if (f_low.size() != f_high.size()) throw std::invalid_argument("pathwise_comparison_test: size mismatch");
    if ((f_low - f_high).maxCoeff() > 0.0) {
        throw std::invalid_argument("pathwise_comparison_test: requires f_low <= f_high nodewise");
    }
    const FracOperator op = build_fd_matrix(params.alpha, grid.M);
    const SemiImplicitSolver solver(op.stiffness, grid.dt());
    const SimpsonRule rule = SimpsonRule::build(grid.M, grid.dx());
    const FbmPath path = sample_fbm_path(params.hurst, grid.T, grid.N, path_seed);

    Eigen::VectorXd lo = f_low, hi = f_high;
    double worst = 0.0;
    for (int n = 0; n < grid.N; ++n) {
        lo = solver.step(lo, path.increments[n], params, rule);
        hi = solver.step(hi, path.increments[n], params, rule);
        if (!lo.allFinite() || !hi.allFinite()) break;
        const double hi_max = hi.maxCoeff();
        const double lo_max = lo.maxCoeff();
        if (hi_max >= grid.blowup_threshold || lo_max >= grid.blowup_threshold) break;
        const double scale = std::max({1.0, std::abs(hi_max), std::abs(lo_max)});
        worst = std::max(worst, (lo - hi).maxCoeff() / scale);
    }
    return worst;
}

/// Least-squares slope of log sup_history against t on the trailing
/// `window` fraction of the horizon.
inline double decay_rate_fit(const std::vector<double>& sup_history,
                             const std::vector<double>& t_grid, double window) {
    if (sup_history.size() != t_grid.size() || sup_history.size() < 3) {
        throw std::invalid_argument("decay_rate_fit: need matching histories with >= 3 samples");
    }
    if (!(window > 0.0 && window <= 1.0)) throw std::invalid_argument("decay_rate_fit: window in (0, 1]");
    const std::size_t n = t_grid.size();
    const std::size_t start = static_cast<std::size_t>(std::floor((1.0 - window) * (n - 1)));
    double sx = 0.0, sy = 0.0, sxx = 0.0, sxy = 0.0;
    std::size_t cnt = 0;
    for (std::size_t k = start; k < n; ++k) {
        if (!(sup_history[k] > 0.0)) {
            throw std::domain_error("decay_rate_fit: nonpositive sup value in the fit window");
        }
        const double x = t_grid[k], y = std::log(sup_history[k]);
        sx += x; sy += y; sxx += x * x; sxy += x * y;
        ++cnt;
    }
    const double denom = cnt * sxx - sx * sx;
    if (denom == 0.0) throw std::domain_error("decay_rate_fit: degenerate time window");
    return (cnt * sxy - sx * sy) / denom;
}

}  // namespace fracspde
