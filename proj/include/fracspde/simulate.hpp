#pragma once

#include <Eigen/Dense>
#include <cmath>
#include <cstdint>
#include <optional>
#include <stdexcept>
#include <vector>

#include "fracspde/fbm.hpp"
#include "fracspde/fd_operator.hpp"
#include "fracspde/model.hpp"
#include "fracspde/quadrature.hpp"

namespace fracspde {

enum class InitialConditionKind { bump_plus_eigen, pure_eigen, custom };

inline std::string to_string(InitialConditionKind k) {
    switch (k) {
        case InitialConditionKind::bump_plus_eigen: return "bump_plus_eigen";
        case InitialConditionKind::pure_eigen: return "pure_eigen";
        case InitialConditionKind::custom: return "custom";
    }
    return "?";
}

inline InitialConditionKind ic_kind_from_string(const std::string& s) {
    if (s == "bump_plus_eigen") return InitialConditionKind::bump_plus_eigen;
    if (s == "pure_eigen") return InitialConditionKind::pure_eigen;
    if (s == "custom") return InitialConditionKind::custom;
    throw std::invalid_argument("ic.kind: expected bump_plus_eigen|pure_eigen|custom, got '" + s + "'");
}

/// Initial data on the interior nodes.
///  - bump_plus_eigen: f_j = c (1 - x_j^2) + phi1(x_j)     (the paper's setup)
///  - pure_eigen:      f_j = (1 + c) phi1(x_j)             (c = 0 gives phi1)
///  - custom:          user-supplied nonnegative field
inline Eigen::VectorXd make_initial_condition(InitialConditionKind kind, double c,
                                              const EigenPair& eig, const GridSpec& grid,
                                              const Eigen::VectorXd* custom = nullptr) {
    const int m = grid.interior_nodes();
    if (kind != InitialConditionKind::custom && eig.phi1.size() != m) {
        throw std::invalid_argument("make_initial_condition: eigenpair grid mismatch");
    }
    if (kind != InitialConditionKind::custom && !(c >= 0.0)) {
        throw std::invalid_argument("make_initial_condition: amplitude c must be >= 0");
    }
    Eigen::VectorXd f(m);
    switch (kind) {
        case InitialConditionKind::bump_plus_eigen:
            for (int j = 0; j < m; ++j) {
                const double x = grid.x(j + 1);
                f[j] = c * (1.0 - x * x) + eig.phi1[j];
            }
            break;
        case InitialConditionKind::pure_eigen:
            f = (1.0 + c) * eig.phi1;
            break;
        case InitialConditionKind::custom:
            if (custom == nullptr || custom->size() != m) {
                throw std::invalid_argument("make_initial_condition: custom data missing or wrong size");
            }
            if (custom->minCoeff() < 0.0) {
                throw std::invalid_argument("make_initial_condition: custom data must be nonnegative");
            }
            f = *custom;
            break;
    }
    return f;
}

/// Drift F(u) = delta * I_q + gamma u - beta u^p with I_q the composite
/// Simpson value of int u^q dy (scalar, replicated across nodes).
struct DriftResult {
    Eigen::VectorXd F;
    double nonlocal_integral = 0.0;
};

namespace detail {

inline void pow_field(const Eigen::VectorXd& u, double e, Eigen::VectorXd& out) {
    const int m = static_cast<int>(u.size());
    out.resize(m);
    if (e == 1.0) { out = u; return; }
    if (e == 2.0) { out = u.cwiseProduct(u); return; }
    if (e == 3.0) { out = u.cwiseProduct(u).cwiseProduct(u); return; }
    if (e == 4.0) { Eigen::VectorXd sq = u.cwiseProduct(u); out = sq.cwiseProduct(sq); return; }
    for (int j = 0; j < m; ++j) {
        // signed power keeps odd-integer-like behaviour for transient negatives
        out[j] = u[j] >= 0.0 ? std::pow(u[j], e) : -std::pow(-u[j], e);
    }
}

}  // namespace detail

inline DriftResult nonlocal_drift(const Eigen::VectorXd& u, const ModelParams& params,
                                  const SimpsonRule& rule) {
    if (!u.allFinite()) throw std::overflow_error("nonlocal_drift: non-finite field");
    DriftResult r;
    Eigen::VectorXd uq, up;
    detail::pow_field(u, params.q, uq);
    detail::pow_field(u, params.p, up);
    r.nonlocal_integral = rule.integrate_interior(uq);
    r.F = Eigen::VectorXd::Constant(u.size(), params.delta * r.nonlocal_integral) +
          params.gamma * u - params.beta * up;
    return r;
}

/// Reusable factorisation of (I + dt * K) for the semi-implicit update
///   (I + dt K) u^{n+1} = u^n + dt F(u^n) + sigma(u^n) .* dB_n.
class SemiImplicitSolver {
public:
    SemiImplicitSolver(const Eigen::MatrixXd& stiffness, double dt) : dt_(dt) {
        const auto m = stiffness.rows();
        llt_.compute(Eigen::MatrixXd::Identity(m, m) + dt * stiffness);
        if (llt_.info() != Eigen::Success) {
            throw std::runtime_error("SemiImplicitSolver: factorisation of (I + dt K) failed");
        }
    }

    double dt() const { return dt_; }

    Eigen::VectorXd solve(const Eigen::VectorXd& rhs) const { return llt_.solve(rhs); }

    /// One step from u with noise increment dB (scalar, shared by all nodes).
    Eigen::VectorXd step(const Eigen::VectorXd& u, double dB, const ModelParams& params,
                         const SimpsonRule& rule) const {
        DriftResult drift = nonlocal_drift(u, params, rule);
        Eigen::VectorXd rhs = std::move(drift.F);
        rhs *= dt_;
        rhs += u;
        if (dB != 0.0 && params.sigma != 0.0) {
            for (int j = 0; j < u.size(); ++j) rhs[j] += params.noise_coefficient(u[j]) * dB;
        }
        llt_.solveInPlace(rhs);
        return rhs;
    }

private:
    double dt_;
    Eigen::LLT<Eigen::MatrixXd> llt_;
};

enum class Termination { completed, threshold, overflow };

inline std::string to_string(Termination t) {
    switch (t) {
        case Termination::completed: return "completed";
        case Termination::threshold: return "threshold";
        case Termination::overflow: return "overflow";
    }
    return "?";
}

struct BlowupRecord {
    bool blew_up = false;
    double tau_b = 0.0;               // valid iff blew_up
    std::vector<double> sup_history;  // ||u(t_n)||_inf, n = 0..last recorded
    Termination termination = Termination::completed;
    int positivity_violations = 0;    // steps with min u < -1e-8 * ||u||_inf
    double sup_final = 0.0;
};

struct Trajectory {
    int stride = 0;
    std::vector<double> times;
    std::vector<Eigen::VectorXd> fields;  // interior nodes
};

struct SimulateOptions {
    int trajectory_stride = 0;  // 0: no snapshots
};

namespace detail {

inline void check_path_grid(const FbmPath& path, const GridSpec& grid) {
    if (path.steps() < grid.N) throw std::invalid_argument("simulate: path shorter than the time grid");
    if (std::abs(path.dt - grid.dt()) > 1e-12 * std::max(1.0, grid.dt())) {
        throw std::invalid_argument("simulate: path dt does not match the grid");
    }
}

struct StepMonitor {
    const GridSpec& grid;
    BlowupRecord& rec;
    Trajectory* traj;
    int stride;

    // Returns true when the run should stop. `u` is the state at time t_n.
    bool observe(const Eigen::VectorXd& u, int n) {
        const double dt = grid.dt();
        double smax = -std::numeric_limits<double>::infinity();
        double smin = std::numeric_limits<double>::infinity();
        bool finite = true;
        for (int j = 0; j < u.size(); ++j) {
            const double x = u[j];
            if (!std::isfinite(x)) { finite = false; break; }
            smax = std::max(smax, x);
            smin = std::min(smin, x);
        }
        if (!finite) {
            rec.blew_up = true;
            rec.termination = Termination::overflow;
            rec.tau_b = n * dt;
            rec.sup_history.push_back(std::numeric_limits<double>::infinity());
            rec.sup_final = std::numeric_limits<double>::infinity();
            return true;
        }
        const double sup = std::max(smax, -smin);
        rec.sup_history.push_back(sup);
        rec.sup_final = sup;
        if (smin < -1e-8 * sup) ++rec.positivity_violations;
        if (traj != nullptr && stride > 0 && n % stride == 0) {
            traj->times.push_back(n * dt);
            traj->fields.push_back(u);
        }
        if (smax >= grid.blowup_threshold) {
            rec.blew_up = true;
            rec.termination = Termination::threshold;
            rec.tau_b = n * dt;
            return true;
        }
        return false;
    }
};

}  // namespace detail

/// Step the SPDE from f along the supplied path, recording the sup-norm each
/// step and stopping at the first threshold crossing or overflow.
inline BlowupRecord simulate_realization(const ModelParams& params, const GridSpec& grid,
                                         const FbmPath& path, const Eigen::VectorXd& f,
                                         const SemiImplicitSolver& solver, const SimpsonRule& rule,
                                         const SimulateOptions& opts = {},
                                         Trajectory* trajectory = nullptr) {
    params.validate();
    grid.validate();
    detail::check_path_grid(path, grid);
    if (f.size() != grid.interior_nodes()) throw std::invalid_argument("simulate: field size mismatch");

    BlowupRecord rec;
    if (trajectory != nullptr) trajectory->stride = opts.trajectory_stride;
    detail::StepMonitor monitor{grid, rec, trajectory, opts.trajectory_stride};

    Eigen::VectorXd u = f;
    if (monitor.observe(u, 0)) return rec;
    for (int n = 0; n < grid.N; ++n) {
        try {
            u = solver.step(u, path.increments[n], params, rule);
        } catch (const std::overflow_error&) {
            rec.blew_up = true;
            rec.termination = Termination::overflow;
            rec.tau_b = (n + 1) * grid.dt();
            rec.sup_final = std::numeric_limits<double>::infinity();
            return rec;
        }
        if (monitor.observe(u, n + 1)) return rec;
    }
    rec.termination = Termination::completed;
    return rec;
}

/// Convenience overload building the solver and quadrature internally.
inline BlowupRecord simulate_realization(const ModelParams& params, const GridSpec& grid,
                                         const FbmPath& path, const Eigen::VectorXd& f,
                                         const FracOperator& op, const SimulateOptions& opts = {},
                                         Trajectory* trajectory = nullptr) {
    const SemiImplicitSolver solver(op.stiffness, grid.dt());
    const SimpsonRule rule = SimpsonRule::build(grid.M, grid.dx());
    return simulate_realization(params, grid, path, f, solver, rule, opts, trajectory);
}

enum class TransformVariant { fbm_s1, brownian_ss1 };

struct TransformedRun {
    BlowupRecord record;           // of the reconstructed u = e^{sigma B} v
    std::vector<double> v_sup_history;
    Trajectory v_trajectory;       // populated when stride > 0
};

/// Step the Doss-Sussmann transformed random PDE (coefficients frozen at the
/// left endpoint) and reconstruct u = e^{sigma B(t)} v. brownian_ss1 uses the
/// Ito-corrected linear rate gamma - sigma^2/2 and requires an H = 1/2 path.
inline TransformedRun simulate_transformed(const ModelParams& params, const GridSpec& grid,
                                           const FbmPath& path, const Eigen::VectorXd& f,
                                           TransformVariant variant,
                                           const SimulateOptions& opts = {}) {
    params.validate();
    grid.validate();
    detail::check_path_grid(path, grid);
    if (params.noise_shape != NoiseShape::linear) {
        throw std::invalid_argument("simulate_transformed: requires the linear noise shape");
    }
    if (variant == TransformVariant::brownian_ss1 && path.hurst != 0.5) {
        throw std::invalid_argument("simulate_transformed: brownian_ss1 requires an H = 1/2 path");
    }
    const double gamma_eff = variant == TransformVariant::brownian_ss1
                                 ? params.gamma - 0.5 * params.sigma * params.sigma
                                 : params.gamma;

    const FracOperator op = build_fd_matrix(params.alpha, grid.M);
    const SemiImplicitSolver solver(op.stiffness, grid.dt());
    const SimpsonRule rule = SimpsonRule::build(grid.M, grid.dx());

    TransformedRun run;
    if (opts.trajectory_stride > 0) run.v_trajectory.stride = opts.trajectory_stride;
    detail::StepMonitor monitor{grid, run.record, nullptr, 0};

    const double dt = grid.dt();
    Eigen::VectorXd v = f;
    Eigen::VectorXd u_rec = f;  // e^{sigma B(0)} = 1
    run.v_sup_history.push_back(v.cwiseAbs().maxCoeff());
    if (opts.trajectory_stride > 0) {
        run.v_trajectory.times.push_back(0.0);
        run.v_trajectory.fields.push_back(v);
    }
    if (monitor.observe(u_rec, 0)) return run;

    Eigen::VectorXd vq, vp;
    for (int n = 0; n < grid.N; ++n) {
        const double B_left = path.values[n];
        const double wq = std::exp((params.q - 1.0) * params.sigma * B_left);
        const double wp = std::exp((params.p - 1.0) * params.sigma * B_left);
        if (!v.allFinite()) {
            run.record.blew_up = true;
            run.record.termination = Termination::overflow;
            run.record.tau_b = n * dt;
            return run;
        }
        detail::pow_field(v, params.q, vq);
        detail::pow_field(v, params.p, vp);
        const double iq = rule.integrate_interior(vq);
        Eigen::VectorXd rhs = v + dt * (gamma_eff * v +
                                        Eigen::VectorXd::Constant(v.size(), params.delta * wq * iq) -
                                        params.beta * wp * vp);
        v = solver.solve(rhs);
        u_rec = std::exp(params.sigma * path.values[n + 1]) * v;

        double vsup = 0.0;
        for (int j = 0; j < v.size(); ++j) vsup = std::max(vsup, std::abs(v[j]));
        run.v_sup_history.push_back(vsup);
        if (opts.trajectory_stride > 0 && (n + 1) % opts.trajectory_stride == 0) {
            run.v_trajectory.times.push_back((n + 1) * dt);
            run.v_trajectory.fields.push_back(v);
        }
        if (monitor.observe(u_rec, n + 1)) return run;
    }
    run.record.termination = Termination::completed;
    return run;
}

/// Max over steps of ||u_direct - e^{sigma B} v||_inf on the common window,
/// stopping when either run crosses the blow-up threshold.
struct ConsistencyResult {
    double max_discrepancy = 0.0;
    int steps_compared = 0;
    bool stopped_early = false;
};

inline ConsistencyResult compare_direct_vs_transformed(const ModelParams& params,
                                                       const GridSpec& grid, const FbmPath& path,
                                                       const Eigen::VectorXd& f,
                                                       TransformVariant variant) {
    params.validate();
    grid.validate();
    detail::check_path_grid(path, grid);
    if (params.noise_shape != NoiseShape::linear) {
        throw std::invalid_argument("compare_direct_vs_transformed: linear noise shape only");
    }
    const double gamma_eff = variant == TransformVariant::brownian_ss1
                                 ? params.gamma - 0.5 * params.sigma * params.sigma
                                 : params.gamma;

    const FracOperator op = build_fd_matrix(params.alpha, grid.M);
    const SemiImplicitSolver solver(op.stiffness, grid.dt());
    const SimpsonRule rule = SimpsonRule::build(grid.M, grid.dx());

    const double dt = grid.dt();
    Eigen::VectorXd u = f, v = f;
    ConsistencyResult res;
    Eigen::VectorXd vq, vp;
    for (int n = 0; n < grid.N; ++n) {
        u = solver.step(u, path.increments[n], params, rule);

        const double B_left = path.values[n];
        const double wq = std::exp((params.q - 1.0) * params.sigma * B_left);
        const double wp = std::exp((params.p - 1.0) * params.sigma * B_left);
        detail::pow_field(v, params.q, vq);
        detail::pow_field(v, params.p, vp);
        const double iq = rule.integrate_interior(vq);
        v = solver.solve(v + dt * (gamma_eff * v +
                                   Eigen::VectorXd::Constant(v.size(), params.delta * wq * iq) -
                                   params.beta * wp * vp));
        const Eigen::VectorXd u_rec = std::exp(params.sigma * path.values[n + 1]) * v;

        if (!u.allFinite() || !u_rec.allFinite() ||
            u.maxCoeff() >= grid.blowup_threshold || u_rec.maxCoeff() >= grid.blowup_threshold) {
            res.stopped_early = true;
            return res;
        }
        res.max_discrepancy = std::max(res.max_discrepancy, (u - u_rec).cwiseAbs().maxCoeff());
        res.steps_compared = n + 1;
    }
    return res;
}

}  // namespace fracspde
