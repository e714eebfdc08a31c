#pragma once

#include <Eigen/Dense>
#include <cmath>
#include <cstdint>
#include <optional>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "fracspde/fbm.hpp"
#include "fracspde/fd_operator.hpp"
#include "fracspde/model.hpp"
#include "fracspde/quadrature.hpp"
#include "fracspde/special.hpp"

namespace fracspde {

struct HitResult {
    bool hit = false;
    double time = std::numeric_limits<double>::quiet_NaN();  // first grid time with cum >= threshold
    double accumulated = 0.0;                                // integral over the full window when not hit
    double threshold = 0.0;
};

namespace detail {

inline void require_q_gt_1(double q, const char* who) {
    if (!(q > 1.0)) throw std::invalid_argument(std::string(who) + ": requires q > 1");
}

// phi_1 power integrals entering the upper bound and condition (B1).
struct PhiIntegrals {
    double q_over_qmp = 0.0;  // int phi^{q/(q-p)}
    double p_plus_1 = 0.0;    // int phi^{p+1}
    double squared = 0.0;     // int phi^2
};

inline PhiIntegrals phi_integrals(const EigenPair& eig, const ModelParams& params,
                                  const SimpsonRule& rule) {
    if (params.p == params.q) {
        throw std::invalid_argument("phi integrals: exponent q/(q-p) is undefined at p = q");
    }
    PhiIntegrals out;
    const double r = params.q / (params.q - params.p);
    Eigen::VectorXd tmp(eig.phi1.size());
    for (int j = 0; j < eig.phi1.size(); ++j) tmp[j] = std::pow(eig.phi1[j], r);
    out.q_over_qmp = rule.integrate_interior(tmp);
    for (int j = 0; j < eig.phi1.size(); ++j) tmp[j] = std::pow(eig.phi1[j], params.p + 1.0);
    out.p_plus_1 = rule.integrate_interior(tmp);
    out.squared = rule.integrate_interior(eig.phi1.cwiseProduct(eig.phi1));
    return out;
}

// C_phi = (int phi^{q/(q-p)})^{(p-q)/p}
inline double c_phi(const PhiIntegrals& ints, const ModelParams& params) {
    return std::pow(ints.q_over_qmp, (params.p - params.q) / params.p);
}

inline HitResult accumulate_until(const std::vector<double>& t, const std::vector<double>& g,
                                  double threshold) {
    HitResult res;
    res.threshold = threshold;
    double cum = 0.0;
    for (std::size_t k = 1; k < t.size(); ++k) {
        cum += 0.5 * (g[k] + g[k - 1]) * (t[k] - t[k - 1]);
        if (!res.hit && cum >= threshold) {
            res.hit = true;
            res.time = t[k];
        }
    }
    res.accumulated = cum;
    return res;
}

inline std::uint64_t fnv1a(const std::string& s) {
    std::uint64_t h = 1469598103934665603ULL;
    for (unsigned char c : s) {
        h ^= c;
        h *= 1099511628211ULL;
    }
    return h;
}

}  // namespace detail

/// Time grid and integrand of the lower-bound functional:
/// g(t) = e^{(q-1) sigma B(t)} ||e^{gamma t} S(t)||^{q-1}, threshold
/// 1/(delta |D| (q-1) ||f||^{q-1}).
inline HitResult tau_lower_bound(const FbmPath& path, const std::vector<double>& profile,
                                 const ModelParams& params, double f_sup, double T) {
    detail::require_q_gt_1(params.q, "tau_lower_bound");
    if (!(params.delta > 0.0)) throw std::invalid_argument("tau_lower_bound: requires delta > 0");
    if (!(f_sup > 0.0)) throw std::invalid_argument("tau_lower_bound: requires ||f||_inf > 0");
    const int n_end = static_cast<int>(std::floor(T / path.dt + 1e-9));
    if (n_end > path.steps() || profile.size() < static_cast<std::size_t>(n_end) + 1) {
        throw std::invalid_argument("tau_lower_bound: profile/path shorter than the horizon");
    }
    const double qm1 = params.q - 1.0;
    std::vector<double> t(n_end + 1), g(n_end + 1);
    for (int n = 0; n <= n_end; ++n) {
        t[n] = path.time(n);
        g[n] = std::exp(qm1 * params.sigma * path.values[n]) * std::pow(profile[n], qm1);
    }
    const double threshold = 1.0 / (params.delta * kDomainMeasure * qm1 * std::pow(f_sup, qm1));
    return detail::accumulate_until(t, g, threshold);
}

/// G(t) samples and the sup-norm upper envelope profile(t) * ||f|| * G(t) on
/// the prefix of the grid strictly before tau_lower.
struct GrowthEnvelope {
    std::vector<double> t;
    std::vector<double> G;
    std::vector<double> envelope;
};

inline GrowthEnvelope growth_envelope(const std::vector<double>& t_grid, const FbmPath& path,
                                      const std::vector<double>& profile, const ModelParams& params,
                                      double f_sup) {
    detail::require_q_gt_1(params.q, "growth_envelope");
    if (t_grid.size() > profile.size() || t_grid.size() > path.values.size()) {
        throw std::invalid_argument("growth_envelope: grid longer than profile/path");
    }
    const double qm1 = params.q - 1.0;
    const double pref = qm1 * params.delta * kDomainMeasure * std::pow(f_sup, qm1);

    GrowthEnvelope out;
    out.t = t_grid;
    out.G.resize(t_grid.size());
    out.envelope.resize(t_grid.size());
    double cum = 0.0, g_prev = std::pow(profile[0], qm1);  // e^{0} * 1
    for (std::size_t k = 0; k < t_grid.size(); ++k) {
        if (k > 0) {
            const double g_cur =
                std::exp(qm1 * params.sigma * path.values[k]) * std::pow(profile[k], qm1);
            cum += 0.5 * (g_cur + g_prev) * (t_grid[k] - t_grid[k - 1]);
            g_prev = g_cur;
        }
        const double bracket = 1.0 - pref * cum;
        if (!(bracket > 0.0)) {
            std::ostringstream msg;
            msg << "growth_envelope: requested t = " << t_grid[k]
                << " is not below tau_lower (bracket exhausted at or before this time)";
            throw std::domain_error(msg.str());
        }
        out.G[k] = std::pow(bracket, -1.0 / qm1);
        out.envelope[k] = profile[k] * f_sup * out.G[k];
    }
    return out;
}

/// Printed admissibility condition (B1) (and its Brownian twin (Bs1) via the
/// theta shift), evaluated with B* from the path at time t.
struct ConditionB1 {
    bool ok = false;
    double margin = 0.0;  // min multiplicative slack, >= 1 means satisfied
    double lhs1 = 0.0, rhs1 = 0.0;
    double lhs2 = 0.0, rhs2 = 0.0;
};

inline ConditionB1 check_condition_B1(double b, double t, const FbmPath& path,
                                      const ModelParams& params, const EigenPair& eig,
                                      const SimpsonRule& rule,
                                      std::optional<double> theta_shift = std::nullopt) {
    if (!(b > 1.0)) throw std::invalid_argument("check_condition_B1: requires b > 1");
    if (params.p == params.q) {
        throw std::invalid_argument("check_condition_B1: exponent q/(q-p) undefined at p = q");
    }
    const auto ints = detail::phi_integrals(eig, params, rule);
    const int idx = std::min(path.steps(), static_cast<int>(std::floor(t / path.dt + 1e-9)));
    double bstar = 0.0;
    for (int n = 0; n <= idx; ++n) bstar = std::max(bstar, std::abs(path.values[n]));

    const double m1 = eig.max_value();
    const double lam_term = theta_shift ? (*theta_shift) : 0.0;  // lambda1 + theta for (Bs1)
    const double lam1 = eig.lambda1 + lam_term;
    const double dpow = std::pow(kDomainMeasure, 1.0 - params.q);
    const double bqp = std::pow(b, params.q - params.p);

    ConditionB1 cond;
    cond.lhs1 = bqp * params.delta * std::exp(-params.sigma * (params.q - params.p) * bstar);
    cond.rhs1 = (params.beta * std::pow(m1, params.p) + lam1 * m1) / dpow;
    cond.lhs2 = bqp * params.delta * std::exp(-params.sigma * (params.q - 1.0) * bstar);
    const double e = (params.q - params.p) / params.p;
    cond.rhs2 = params.beta == 0.0
                    ? 0.0
                    : 2.0 * params.beta * std::pow(ints.q_over_qmp, e) / std::pow(ints.p_plus_1, e);

    const double m1r = cond.lhs1 / cond.rhs1;
    const double m2r = cond.rhs2 == 0.0 ? std::numeric_limits<double>::infinity()
                                        : cond.lhs2 / cond.rhs2;
    cond.margin = std::min(m1r, m2r);
    cond.ok = cond.margin >= 1.0;
    return cond;
}

/// Upper-bound hitting functional: integrand
/// e^{sigma (q-1) B(s) + (gamma - lambda1)(q-1) s}, threshold
/// 2 J(0)^{1-q} / (delta (q-1) C_phi).
struct TauUpperResult {
    HitResult hit;
    double J0 = 0.0;
    double c0 = 0.0;
    bool f_dominates_eigen = false;  // f >= b phi for some b > 1 (precondition report)
    double b_inferred = 0.0;
};

inline TauUpperResult tau_upper_bound(const FbmPath& path, const EigenPair& eig,
                                      const ModelParams& params, const Eigen::VectorXd& f, double T,
                                      const SimpsonRule& rule, double dx,
                                      std::optional<double> gamma_override = std::nullopt) {
    detail::require_q_gt_1(params.q, "tau_upper_bound");
    if (!(params.delta > 0.0)) throw std::invalid_argument("tau_upper_bound: requires delta > 0");
    if (f.size() != eig.phi1.size()) throw std::invalid_argument("tau_upper_bound: field size mismatch");

    TauUpperResult out;
    out.J0 = f.dot(eig.phi1) * dx;
    const auto ints = detail::phi_integrals(eig, params, rule);
    const double cphi = detail::c_phi(ints, params);
    out.c0 = 0.5 * params.delta * cphi;
    out.b_inferred = (f.cwiseQuotient(eig.phi1)).minCoeff();
    out.f_dominates_eigen = out.b_inferred > 1.0;

    const double gamma = gamma_override.value_or(params.gamma);
    const double qm1 = params.q - 1.0;
    const int n_end = std::min(path.steps(), static_cast<int>(std::floor(T / path.dt + 1e-9)));
    std::vector<double> t(n_end + 1), g(n_end + 1);
    for (int n = 0; n <= n_end; ++n) {
        t[n] = path.time(n);
        g[n] = std::exp(params.sigma * qm1 * path.values[n] + (gamma - eig.lambda1) * qm1 * t[n]);
    }
    const double threshold = 2.0 * std::pow(out.J0, 1.0 - params.q) / (params.delta * qm1 * cphi);
    out.hit = detail::accumulate_until(t, g, threshold);
    return out;
}

/// Bernoulli lower-growth profile for ||v(t)||_inf on a prefix of the grid:
/// e^{(gamma-lambda1) t} [J0^{1-q} - (q-1) c0 * cum(t)]^{-1/(q-1)}.
inline std::vector<double> bernoulli_lower_profile(const std::vector<double>& t_grid,
                                                   const FbmPath& path, const EigenPair& eig,
                                                   const ModelParams& params, double J0,
                                                   const SimpsonRule& rule) {
    detail::require_q_gt_1(params.q, "bernoulli_lower_profile");
    if (t_grid.size() > path.values.size()) {
        throw std::invalid_argument("bernoulli_lower_profile: grid longer than path");
    }
    const auto ints = detail::phi_integrals(eig, params, rule);
    const double c0 = 0.5 * params.delta * detail::c_phi(ints, params);
    const double qm1 = params.q - 1.0;
    const double J0pow = std::pow(J0, 1.0 - params.q);

    std::vector<double> out(t_grid.size());
    double cum = 0.0;
    double g_prev = 1.0;
    for (std::size_t k = 0; k < t_grid.size(); ++k) {
        if (k > 0) {
            const double g_cur = std::exp(params.sigma * qm1 * path.values[k] +
                                          (params.gamma - eig.lambda1) * qm1 * t_grid[k]);
            cum += 0.5 * (g_cur + g_prev) * (t_grid[k] - t_grid[k - 1]);
            g_prev = g_cur;
        }
        const double bracket = J0pow - qm1 * c0 * cum;
        if (!(bracket > 0.0)) {
            std::ostringstream msg;
            msg << "bernoulli_lower_profile: requested t = " << t_grid[k]
                << " is not below tau_upper (bracket exhausted)";
            throw std::domain_error(msg.str());
        }
        out[k] = std::exp((params.gamma - eig.lambda1) * t_grid[k]) * std::pow(bracket, -1.0 / qm1);
    }
    return out;
}

enum class TriState { yes, no, indeterminate };

inline std::string to_string(TriState t) {
    switch (t) {
        case TriState::yes: return "yes";
        case TriState::no: return "no";
        case TriState::indeterminate: return "indeterminate";
    }
    return "?";
}

/// Global-existence sufficient condition: true iff
/// delta |D| (q-1) * int_0^inf e^{(q-1) sigma B} ||e^{gamma r} S(r)||^{q-1} dr
/// * ||f||^{q-1} < 1, with the integral truncated at the path horizon and
/// the tail convergence reported three-valued.
struct GlobalExistenceResult {
    TriState verdict = TriState::indeterminate;
    double criterion_value = 0.0;  // must be < 1 for global existence
    bool tail_converged = false;
    double t_end = 0.0;
};

inline GlobalExistenceResult global_existence_criterion(const FbmPath& path,
                                                        const std::vector<double>& profile,
                                                        const ModelParams& params, double f_sup) {
    detail::require_q_gt_1(params.q, "global_existence_criterion");
    if (!(f_sup >= 0.0)) throw std::invalid_argument("global_existence_criterion: bad ||f||");
    GlobalExistenceResult out;
    if (params.delta == 0.0 || f_sup == 0.0) {
        out.verdict = TriState::yes;
        out.tail_converged = true;
        return out;
    }
    if (profile.size() < path.values.size()) {
        throw std::invalid_argument("global_existence_criterion: profile shorter than path");
    }
    const double qm1 = params.q - 1.0;
    double cum = 0.0, g_prev = 1.0, g_cur = 1.0;
    for (int n = 1; n <= path.steps(); ++n) {
        g_cur = std::exp(qm1 * params.sigma * path.values[n]) * std::pow(profile[n], qm1);
        cum += 0.5 * (g_cur + g_prev) * path.dt;
        g_prev = g_cur;
    }
    out.criterion_value = params.delta * kDomainMeasure * qm1 * cum * std::pow(f_sup, qm1);
    out.tail_converged = cum > 0.0 && g_cur < 1e-12 * cum;
    out.t_end = path.horizon();
    if (out.criterion_value >= 1.0) {
        out.verdict = TriState::no;
    } else {
        out.verdict = out.tail_converged ? TriState::yes : TriState::indeterminate;
    }
    return out;
}

/// Adaptive-truncation wrapper: doubles the horizon (resampling the path at
/// the same dt and seed) until the tail converges or the 64x cap is reached.
inline GlobalExistenceResult global_existence_adaptive(const FracOperator& op,
                                                       const ModelParams& params, double f_sup,
                                                       double T_base, int N_base,
                                                       std::uint64_t seed) {
    GlobalExistenceResult res;
    int factor = 1;
    while (true) {
        const double T = T_base * factor;
        const int N = N_base * factor;
        const FbmPath path = sample_fbm_path(params.hurst, T, N, seed);
        std::vector<double> t(N + 1);
        for (int n = 0; n <= N; ++n) t[n] = path.time(n);
        const auto profile = semigroup_sup_norm_profile(op, params.gamma, t);
        res = global_existence_criterion(path, profile, params, f_sup);
        if (res.verdict != TriState::indeterminate || factor >= 64) return res;
        factor *= 2;
    }
}

/// Monte-Carlo estimate of N(H): mean over paths of the sup (over the grid
/// and the t -> infinity limit value 1) of
///   [ln(1 + int_0^t e^{(gamma-lambda1)(q-1)s - rho^2/2 s^{2H} + rho B(s)} ds) + t^{a1}]
///   / [ln(1 + x) + t^{a1}],
/// with x the (ST1) threshold.
struct NHEstimate {
    double value = 1.0;
    double std_error = 0.0;
    int n_paths = 0;
};

inline NHEstimate estimate_NH(const ModelParams& params, double lambda1, double x_threshold,
                              double alpha1, int n_paths, double T_sup, int N_sup,
                              std::uint64_t seed) {
    detail::require_q_gt_1(params.q, "estimate_NH");
    if (!(alpha1 > params.hurst)) throw std::invalid_argument("estimate_NH: requires alpha1 > H");
    if (!(lambda1 > params.gamma)) {
        throw std::invalid_argument("estimate_NH: requires lambda1 > gamma "
                                    "(otherwise blow-up is a.s. and the bound is 1)");
    }
    if (n_paths < 1) throw std::invalid_argument("estimate_NH: n_paths must be >= 1");

    const double rho = params.sigma * (params.q - 1.0);
    const double a = (lambda1 - params.gamma) * (params.q - 1.0);
    const double log_x1 = std::log1p(x_threshold);
    const double two_h = 2.0 * params.hurst;

    double sum = 0.0, sumsq = 0.0;
    for (int i = 0; i < n_paths; ++i) {
        const FbmPath path = sample_fbm_path(params.hurst, T_sup, N_sup, detail::fnv1a("nh") ^
                                             fracspde::detail::derive_seed(seed, i));
        double cum = 0.0, g_prev = 1.0, sup = 1.0;  // includes the t->inf limit value 1
        for (int n = 1; n <= N_sup; ++n) {
            const double t = path.time(n);
            const double g = std::exp(rho * path.values[n] - a * t -
                                      0.5 * rho * rho * std::pow(t, two_h));
            cum += 0.5 * (g + g_prev) * path.dt;
            g_prev = g;
            const double ta = std::pow(t, alpha1);
            sup = std::max(sup, (std::log1p(cum) + ta) / (log_x1 + ta));
        }
        sum += sup;
        sumsq += sup * sup;
    }
    NHEstimate est;
    est.n_paths = n_paths;
    est.value = sum / n_paths;
    if (n_paths > 1) {
        const double var = (sumsq - sum * sum / n_paths) / (n_paths - 1);
        est.std_error = std::sqrt(std::max(0.0, var) / n_paths);
    }
    return est;
}

/// Lower bound on the blow-up probability in the fBm regime; short-circuits
/// to 1 when lambda1 < gamma (a.s. finite-time blow-up).
inline double blowup_prob_lower_bound_fbm(const ModelParams& params, double lambda1,
                                          double x_threshold, double alpha1, double NH) {
    if (lambda1 < params.gamma) return 1.0;
    detail::require_q_gt_1(params.q, "blowup_prob_lower_bound_fbm");
    if (!(alpha1 > params.hurst)) {
        throw std::invalid_argument("blowup_prob_lower_bound_fbm: requires alpha1 > H");
    }
    if (NH < 1.0) {
        throw std::invalid_argument("blowup_prob_lower_bound_fbm: N(H) < 1 violates the "
                                    "assumptions of the tail bound");
    }
    const double rho = params.sigma * (params.q - 1.0);
    if (!(rho > 0.0)) throw std::invalid_argument("blowup_prob_lower_bound_fbm: requires sigma (q-1) > 0");
    const double H = params.hurst;
    const double log_x1 = std::log1p(x_threshold);
    const double expo = -(1.0 / (2.0 * rho * rho)) * std::pow(log_x1, 2.0 * H / alpha1 - 2.0) *
                        std::pow((alpha1 - H) / alpha1, 2.0 - 2.0 * H / alpha1) *
                        (NH - 1.0) * (NH - 1.0);
    const double val = 1.0 - std::exp(expo);
    return std::min(std::max(val, 0.0), std::nextafter(1.0, 0.0));
}

/// Brownian-surrogate bounds (3/4 < H < 1 regime): Gamma-law blow-up
/// probability bracket and the tau_** threshold data.
struct BrownianBounds {
    double theta1 = 0.0;
    double nu = 0.0;
    double vartheta = 0.0;
    double tau_ss_threshold = 0.0;  // RHS of the tau_** hitting definition
    double tau_ss_rate = 0.0;       // (lambda1 + vartheta)(q-1), decay rate in the integrand
    double prob_lower = 0.0;        // Theorem on the Gamma lower bound
    double prob_upper = 0.0;        // explicit Gamma upper bound
};

inline BrownianBounds brownian_bounds(const ModelParams& params, const EigenPair& eig, double J0,
                                      double f_sup, const SimpsonRule& rule) {
    detail::require_q_gt_1(params.q, "brownian_bounds");
    if (params.p == params.q) throw std::invalid_argument("brownian_bounds: p = q is degenerate");
    const double rho = params.sigma * (params.q - 1.0);
    if (!(rho > 0.0)) throw std::invalid_argument("brownian_bounds: requires sigma (q-1) > 0");

    BrownianBounds out;
    out.vartheta = 0.5 * params.sigma * params.sigma - params.gamma;
    out.theta1 = 2.0 * (eig.lambda1 + out.vartheta) * (params.q - 1.0) / (rho * rho);
    out.nu = 2.0 * out.vartheta * (params.q - 1.0) / (rho * rho);
    if (!(out.theta1 > 0.0)) {
        throw std::invalid_argument("brownian_bounds: theta1 <= 0 (lambda1 + vartheta must be positive)");
    }

    const auto ints = detail::phi_integrals(eig, params, rule);
    const double cphi = detail::c_phi(ints, params);
    out.tau_ss_threshold = 2.0 * std::pow(J0, 1.0 - params.q) / (params.delta * (params.q - 1.0) * cphi);
    out.tau_ss_rate = (eig.lambda1 + out.vartheta) * (params.q - 1.0);

    // P(tau_b < inf) >= P(X(theta1,1) <= delta (q-1) C_phi / (rho^2 J0^{1-q}))
    const double g = params.delta * (params.q - 1.0) * cphi /
                     (rho * rho * std::pow(J0, 1.0 - params.q));
    out.prob_lower = regularized_gamma_p(out.theta1, g);

    if (!(out.nu > 0.0)) {
        throw std::invalid_argument("brownian_bounds: nu <= 0 (requires vartheta = sigma^2/2 - gamma > 0)");
    }
    const double n_tilde = 1.0 / (params.delta * kDomainMeasure * (params.q - 1.0) *
                                  std::pow(f_sup, params.q - 1.0));
    out.prob_upper = regularized_gamma_p(out.nu, 2.0 / (rho * rho * n_tilde));
    return out;
}

/// Everything §§5-6 offer for one (params, grid, path, f) tuple, with the
/// provenance digest of the inputs.
struct BoundsReport {
    double lambda1 = 0.0;
    double J0 = 0.0;
    double c0 = 0.0;
    double f_sup = 0.0;
    HitResult tau_lower;
    TauUpperResult tau_upper;
    ConditionB1 b_condition;
    double b_used = 0.0;
    GlobalExistenceResult global_existence;
    double prob_lower_fbm = std::numeric_limits<double>::quiet_NaN();
    NHEstimate nh;
    double nh_alpha1 = 0.0;
    std::optional<BrownianBounds> brownian;  // absent when hypotheses fail
    std::string brownian_error;
    std::string regime;  // "p>q", "q>p" or "p=q"
    std::uint64_t path_seed = 0;
    std::string inputs_digest;
};

struct BoundsOptions {
    double alpha1 = std::numeric_limits<double>::quiet_NaN();  // NaN: min(1, H + 0.2)
    int nh_paths = 200;
    double t_sup = 10.0;
    int n_sup = 2000;
    std::uint64_t nh_seed = 2024;
    double b_for_condition = std::numeric_limits<double>::quiet_NaN();  // NaN: inferred from f
};

inline BoundsReport assemble_bounds_report(const ModelParams& params, const GridSpec& grid,
                                           const EigenPair& eig, const FracOperator& op,
                                           const FbmPath& path, const Eigen::VectorXd& f,
                                           const BoundsOptions& opts = {}) {
    detail::require_q_gt_1(params.q, "assemble_bounds_report");
    const SimpsonRule rule = SimpsonRule::build(grid.M, grid.dx());

    BoundsReport rep;
    rep.lambda1 = eig.lambda1;
    rep.f_sup = f.cwiseAbs().maxCoeff();
    rep.path_seed = path.seed;
    rep.regime = params.p > params.q ? "p>q" : (params.q > params.p ? "q>p" : "p=q");

    std::vector<double> t(path.steps() + 1);
    for (int n = 0; n <= path.steps(); ++n) t[n] = path.time(n);
    const auto profile = semigroup_sup_norm_profile(op, params.gamma, t);

    rep.tau_lower = tau_lower_bound(path, profile, params, rep.f_sup, path.horizon());
    rep.global_existence = global_existence_criterion(path, profile, params, rep.f_sup);

    if (params.p != params.q) {
        rep.tau_upper = tau_upper_bound(path, eig, params, f, path.horizon(), rule, grid.dx());
        rep.J0 = rep.tau_upper.J0;
        rep.c0 = rep.tau_upper.c0;
        const double b = std::isnan(opts.b_for_condition)
                             ? std::max(rep.tau_upper.b_inferred, 1.0 + 1e-9)
                             : opts.b_for_condition;
        rep.b_used = b;
        rep.b_condition = check_condition_B1(b, path.horizon(), path, params, eig, rule);

        const double x = rep.tau_upper.hit.threshold;
        const double alpha1 = std::isnan(opts.alpha1) ? std::min(1.0, params.hurst + 0.2) : opts.alpha1;
        rep.nh_alpha1 = alpha1;
        if (eig.lambda1 > params.gamma && params.sigma > 0.0) {
            rep.nh = estimate_NH(params, eig.lambda1, x, alpha1, opts.nh_paths, opts.t_sup,
                                 opts.n_sup, opts.nh_seed);
            rep.prob_lower_fbm =
                blowup_prob_lower_bound_fbm(params, eig.lambda1, x, alpha1, rep.nh.value);
        } else if (eig.lambda1 < params.gamma) {
            rep.prob_lower_fbm = 1.0;
        }
        try {
            rep.brownian = brownian_bounds(params, eig, rep.J0, rep.f_sup, rule);
        } catch (const std::exception& e) {
            rep.brownian_error = e.what();
        }
    } else {
        rep.J0 = f.dot(eig.phi1) * grid.dx();
    }

    std::ostringstream key;
    key.precision(17);
    key << params.delta << '|' << params.gamma << '|' << params.beta << '|' << params.sigma << '|'
        << params.p << '|' << params.q << '|' << params.alpha << '|' << params.hurst << '|'
        << to_string(params.noise_shape) << '|' << grid.M << '|' << grid.N << '|' << grid.T << '|'
        << grid.blowup_threshold << '|' << path.seed;
    std::ostringstream hex;
    hex << std::hex << detail::fnv1a(key.str());
    rep.inputs_digest = hex.str();
    return rep;
}

}  // namespace fracspde
