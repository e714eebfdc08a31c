#pragma once

#include <cmath>
#include <stdexcept>
#include <string>

namespace fracspde {

enum class NoiseShape { linear, saturating };

inline std::string to_string(NoiseShape s) {
    return s == NoiseShape::linear ? "linear" : "saturating";
}

inline NoiseShape noise_shape_from_string(const std::string& s) {
    if (s == "linear") return NoiseShape::linear;
    if (s == "saturating") return NoiseShape::saturating;
    throw std::invalid_argument("noise_shape: expected 'linear' or 'saturating', got '" + s + "'");
}

// Coefficient tuple of the nonlocal stochastic reaction-diffusion model:
//   du - Delta_alpha u dt = [delta*Int u^q dy + gamma*u - beta*u^p] dt + sigma(u) dB^H.
struct ModelParams {
    double delta = 1.0;    // nonlocal gain, >= 0
    double gamma = 0.1;    // linear rate
    double beta = 1.0;     // damping, >= 0
    double sigma = 0.1;    // noise intensity, >= 0
    double p = 2.0;        // damping exponent, > 1
    double q = 2.0;        // nonlocal exponent, >= 1 (q = 1 makes the term linear)
    double alpha = 1.2;    // diffusion exponent, in (0, 2]
    double hurst = 0.6;    // Hurst index, in (0, 1)
    NoiseShape noise_shape = NoiseShape::linear;

    void validate() const {
        if (!(delta >= 0.0)) throw std::invalid_argument("model.delta: must be >= 0");
        if (!std::isfinite(gamma)) throw std::invalid_argument("model.gamma: must be finite");
        if (!(beta >= 0.0)) throw std::invalid_argument("model.beta: must be >= 0");
        if (!(sigma >= 0.0)) throw std::invalid_argument("model.sigma: must be >= 0");
        if (!(p > 1.0)) throw std::invalid_argument("model.p: must be > 1");
        if (!(q >= 1.0)) throw std::invalid_argument("model.q: must be >= 1");
        if (!(alpha > 0.0 && alpha <= 2.0)) throw std::invalid_argument("model.alpha: must lie in (0, 2]");
        if (!(hurst > 0.0 && hurst < 1.0)) throw std::invalid_argument("model.hurst: must lie in the open interval (0, 1)");
    }

    // sigma(u) evaluated pointwise.
    double noise_coefficient(double u) const {
        if (noise_shape == NoiseShape::linear) return sigma * u;
        return sigma * u / (1.0 + u);
    }
};

// Discretization of [0,T] x [-1,1]: x_j = -1 + j*dx, j = 0..M, dx = 2/M,
// interior nodes j = 1..M-1; t_n = n*dt, dt = T/N.
struct GridSpec {
    int M = 101;                       // spatial intervals (M-1 interior nodes)
    int N = 10000;                     // time steps
    double T = 1.0;                    // horizon
    double blowup_threshold = 4.5036e15;  // M_b

    double dx() const { return 2.0 / M; }
    double dt() const { return T / N; }
    int interior_nodes() const { return M - 1; }
    double x(int j) const { return -1.0 + j * dx(); }  // full-grid index j = 0..M

    void validate() const {
        if (M < 8) throw std::invalid_argument("grid.M: must be >= 8");
        if (N < 1) throw std::invalid_argument("grid.N: must be >= 1");
        if (!(T > 0.0)) throw std::invalid_argument("grid.T: must be > 0");
        if (!(blowup_threshold > 0.0)) throw std::invalid_argument("grid.blowup_threshold: must be > 0");
    }
};

inline constexpr double kDomainMeasure = 2.0;  // |D| for D = [-1, 1]

}  // namespace fracspde
