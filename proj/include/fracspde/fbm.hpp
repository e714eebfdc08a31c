#pragma once

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <complex>
#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

#include "fracspde/detail/fft.hpp"
#include "fracspde/detail/rng.hpp"

namespace fracspde {

enum class FbmMethod { circulant, cholesky };

/// One sampled fractional Brownian motion trajectory on a uniform grid.
/// values[n] = B^H(n * dt), increments[n] = values[n+1] - values[n].
struct FbmPath {
    double hurst = 0.5;
    double dt = 0.0;
    std::vector<double> values;      // size N + 1, values[0] = 0
    std::vector<double> increments;  // size N
    std::uint64_t seed = 0;
    FbmMethod method = FbmMethod::circulant;
    std::size_t embedding_size = 0;

    int steps() const { return static_cast<int>(increments.size()); }
    double horizon() const { return dt * steps(); }
    double time(int n) const { return dt * n; }
};

/// Stationary fGn covariance implied by R_H:
///   gamma(k) = 1/2 (|k+1|^{2H} - 2|k|^{2H} + |k-1|^{2H}) * dt^{2H}.
inline std::vector<double> fgn_autocovariance(double hurst, int n_lags, double dt) {
    if (!(hurst > 0.0 && hurst < 1.0)) throw std::invalid_argument("fgn_autocovariance: H must lie in (0, 1)");
    if (!(dt > 0.0)) throw std::invalid_argument("fgn_autocovariance: dt must be > 0");
    if (n_lags < 0) throw std::invalid_argument("fgn_autocovariance: n_lags must be >= 0");
    const double two_h = 2.0 * hurst;
    const double scale = std::pow(dt, two_h);
    std::vector<double> g(n_lags + 1);
    for (int k = 0; k <= n_lags; ++k) {
        const double kp = std::pow(double(k + 1), two_h);
        const double k0 = k == 0 ? 0.0 : std::pow(double(k), two_h);
        const double km = k <= 1 ? std::pow(double(std::abs(k - 1)), two_h) : std::pow(double(k - 1), two_h);
        g[k] = 0.5 * (kp - 2.0 * k0 + km) * scale;
    }
    return g;
}

namespace detail {

// Davies-Harte sampling: embed the autocovariance into a circulant of
// power-of-two size >= 2(N+1) and synthesize via one FFT.
// Returns false if the embedding has a significantly negative eigenvalue.
inline bool sample_fgn_circulant(double hurst, double dt, int N, GaussianRng& rng,
                                 std::vector<double>& out, std::size_t& embed_size) {
    const std::size_t m = next_pow2(2 * static_cast<std::size_t>(N + 1));
    embed_size = m;
    const std::size_t half = m / 2;
    const auto g = fgn_autocovariance(hurst, static_cast<int>(half), dt);

    std::vector<std::complex<double>> c(m);
    for (std::size_t k = 0; k <= half; ++k) c[k] = g[k];
    for (std::size_t k = 1; k < half; ++k) c[m - k] = g[k];
    fft_inplace(c, false);

    double max_eig = 0.0, min_eig = 0.0;
    for (const auto& z : c) {
        max_eig = std::max(max_eig, z.real());
        min_eig = std::min(min_eig, z.real());
    }
    if (min_eig < -1e-10 * max_eig) return false;

    std::vector<std::complex<double>> a(m);
    const double inv_m = 1.0 / static_cast<double>(m);
    a[0] = std::sqrt(std::max(0.0, c[0].real()) * inv_m) * rng.normal();
    a[half] = std::sqrt(std::max(0.0, c[half].real()) * inv_m) * rng.normal();
    for (std::size_t k = 1; k < half; ++k) {
        const double amp = std::sqrt(std::max(0.0, c[k].real()) * inv_m * 0.5);
        const double gr = rng.normal();
        const double gi = rng.normal();
        a[k] = std::complex<double>(amp * gr, amp * gi);
        a[m - k] = std::conj(a[k]);
    }
    fft_inplace(a, false);

    out.resize(N);
    for (int n = 0; n < N; ++n) out[n] = a[n].real();
    return true;
}

inline void sample_fgn_cholesky(double hurst, double dt, int N, GaussianRng& rng,
                                std::vector<double>& out) {
    const auto g = fgn_autocovariance(hurst, N - 1, dt);
    Eigen::MatrixXd cov(N, N);
    for (int i = 0; i < N; ++i) {
        for (int j = 0; j < N; ++j) cov(i, j) = g[std::abs(i - j)];
    }
    Eigen::LLT<Eigen::MatrixXd> llt(cov);
    if (llt.info() != Eigen::Success) {
        throw std::runtime_error("sample_fbm_path: Cholesky fallback failed (covariance not PD)");
    }
    Eigen::VectorXd z(N);
    for (int i = 0; i < N; ++i) z[i] = rng.normal();
    Eigen::VectorXd inc = llt.matrixL() * z;
    out.assign(inc.data(), inc.data() + N);
}

}  // namespace detail

/// Exact-in-distribution fBm path via circulant embedding of the fGn
/// covariance (Cholesky fallback if the embedding fails). Deterministic in
/// (H, T, N, seed).
inline FbmPath sample_fbm_path(double hurst, double T, int N, std::uint64_t seed) {
    if (!(hurst > 0.0 && hurst < 1.0)) throw std::invalid_argument("sample_fbm_path: H must lie in (0, 1)");
    if (N < 2) throw std::invalid_argument("sample_fbm_path: N must be >= 2");
    if (!(T > 0.0)) throw std::invalid_argument("sample_fbm_path: T must be > 0");

    FbmPath path;
    path.hurst = hurst;
    path.dt = T / N;
    path.seed = seed;

    detail::GaussianRng rng(seed);
    if (!detail::sample_fgn_circulant(hurst, path.dt, N, rng, path.increments, path.embedding_size)) {
        detail::GaussianRng rng2(seed);
        detail::sample_fgn_cholesky(hurst, path.dt, N, rng2, path.increments);
        path.method = FbmMethod::cholesky;
    }

    path.values.resize(N + 1);
    path.values[0] = 0.0;
    for (int n = 0; n < N; ++n) path.values[n + 1] = path.values[n] + path.increments[n];
    // re-derive the increments from the cumulative sums so that
    // increments[n] == values[n+1] - values[n] holds bit-exactly
    for (int n = 0; n < N; ++n) path.increments[n] = path.values[n + 1] - path.values[n];
    return path;
}

/// Running supremum of |B^H|: B*(t_n) = max_{k<=n} |values[k]|.
inline std::vector<double> running_sup_abs(const FbmPath& path) {
    std::vector<double> out(path.values.size());
    double sup = 0.0;
    for (std::size_t n = 0; n < path.values.size(); ++n) {
        sup = std::max(sup, std::abs(path.values[n]));
        out[n] = sup;
    }
    return out;
}

/// Trapezoidal value of int_0^{T_cut} exp{rho B(s) - a s - [rho^2/2 s^{2H}]} ds
/// on the path grid, with a tail diagnostic for truncation assessment.
struct ExpFunctional {
    double value = 0.0;
    double last_integrand = 0.0;
    double t_end = 0.0;
    bool tail_converged = false;  // last integrand < 1e-12 * accumulated value
};

inline ExpFunctional exp_functional(const FbmPath& path, double rho, double a,
                                    bool gaussian_correction, double T_cut) {
    if (!(T_cut > 0.0)) throw std::invalid_argument("exp_functional: T_cut must be > 0");
    if (T_cut > path.horizon() * (1.0 + 1e-12) && !(a > 0.0)) {
        throw std::invalid_argument("exp_functional: a <= 0 with horizon beyond the sampled path "
                                    "diverges almost surely (Lemma on exponential functionals)");
    }
    const int n_end = std::min(path.steps(), static_cast<int>(std::floor(T_cut / path.dt + 1e-9)));
    const double two_h = 2.0 * path.hurst;

    ExpFunctional out;
    double prev = 1.0;  // integrand at t = 0
    for (int n = 1; n <= n_end; ++n) {
        const double t = path.time(n);
        double expo = rho * path.values[n] - a * t;
        if (gaussian_correction) expo -= 0.5 * rho * rho * std::pow(t, two_h);
        if (expo > 700.0) {
            throw std::overflow_error("exp_functional: integrand overflow at t = " + std::to_string(t));
        }
        const double cur = std::exp(expo);
        out.value += 0.5 * (prev + cur) * path.dt;
        prev = cur;
    }
    out.last_integrand = prev;
    out.t_end = path.time(n_end);
    out.tail_converged = out.value > 0.0 && prev < 1e-12 * out.value;
    return out;
}

}  // namespace fracspde
