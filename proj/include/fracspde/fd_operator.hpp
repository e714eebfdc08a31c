#pragma once

#include <Eigen/Dense>
#include <cmath>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

namespace fracspde {

/// Finite-difference Dirichlet fractional Laplacian on [-1,1].
///
/// `stiffness` holds the dense symmetric Toeplitz matrix approximating
/// (-Delta)^{alpha/2} with zero exterior condition (positive definite,
/// positive diagonal, non-positive off-diagonals). The generator of the
/// semigroup is its negative, so the semi-implicit stepper solves
/// (I + dt * stiffness) u^{n+1} = rhs.
struct FracOperator {
    double alpha = 0.0;       // model diffusion exponent, in (0, 2]
    int m_interior = 0;       // number of interior nodes (M - 1)
    double dx = 0.0;          // grid spacing 2/M
    double rho_scheme = 0.0;  // quadrature splitting parameter of the scheme
    double c_norm = 0.0;      // per-entry normalising constant
    Eigen::MatrixXd stiffness;
};

/// Principal Dirichlet eigenpair of the discrete operator. phi1 lives on the
/// interior nodes, is strictly positive there, and satisfies
/// sum_j phi1_j * dx = 1 (quadrature normalisation of the unit integral).
struct EigenPair {
    double lambda1 = 0.0;
    Eigen::VectorXd phi1;
    double residual = 0.0;
    int iterations = 0;

    double max_value() const { return phi1.maxCoeff(); }  // M_1 = sup phi_1
};

namespace detail {

// Normalising constant of the 1-D integral fractional Laplacian (-Delta)^s,
// kernel |x-y|^{-1-2s}: 4^s * s * Gamma(s + 1/2) / (sqrt(pi) * Gamma(1 - s)).
inline double frac_laplacian_constant_1d(double s) {
    const double sqrt_pi = 1.7724538509055160272981674833411;
    return std::pow(4.0, s) * s * std::tgamma(s + 0.5) / (sqrt_pi * std::tgamma(1.0 - s));
}

}  // namespace detail

/// Build the dense FD matrix for (-Delta)^{alpha/2} on [-1,1] with zero
/// exterior condition, interpreting the scheme order as s = alpha/2.
/// rho defaults to 1 + s; admissible range is (2s, 2]. The first-panel
/// weight is kappa = (rho - 2s)/(1 - s), the exact weighted-trapezoid value
/// (it reduces to 1 at the default rho for every s). alpha = 2 degenerates
/// to the classical 3-point Laplacian.
inline FracOperator build_fd_matrix(double alpha, int M,
                                    std::optional<double> rho_opt = std::nullopt) {
    if (!(alpha > 0.0 && alpha <= 2.0)) {
        throw std::invalid_argument("build_fd_matrix: alpha must lie in (0, 2]");
    }
    if (M < 8) throw std::invalid_argument("build_fd_matrix: M must be >= 8");

    FracOperator op;
    op.alpha = alpha;
    op.m_interior = M - 1;
    op.dx = 2.0 / M;

    if (alpha == 2.0) {
        if (rho_opt) throw std::invalid_argument("build_fd_matrix: rho_scheme has no meaning at alpha = 2");
        op.rho_scheme = 2.0;
        op.c_norm = 1.0 / (op.dx * op.dx);
        op.stiffness = Eigen::MatrixXd::Zero(op.m_interior, op.m_interior);
        for (int i = 0; i < op.m_interior; ++i) {
            op.stiffness(i, i) = 2.0 * op.c_norm;
            if (i + 1 < op.m_interior) {
                op.stiffness(i, i + 1) = -op.c_norm;
                op.stiffness(i + 1, i) = -op.c_norm;
            }
        }
        return op;
    }

    const double s = alpha / 2.0;
    const double rho = rho_opt.value_or(1.0 + s);
    if (!(rho > 2.0 * s && rho <= 2.0)) {
        throw std::invalid_argument("build_fd_matrix: rho_scheme must lie in (2s, 2] with s = alpha/2");
    }
    op.rho_scheme = rho;

    const double chi = rho - 2.0 * s;
    const double kappa = (rho - 2.0 * s) / (1.0 - s);
    op.c_norm = detail::frac_laplacian_constant_1d(s) * std::pow(op.dx, -2.0 * s) / chi;

    const int m = op.m_interior;
    // entry as a function of the shift k = |i - j| (Toeplitz by construction)
    std::vector<double> entry(m, 0.0);
    double diag = std::pow(2.0, chi) + kappa - 1.0;
    for (int k = 2; k <= M - 1; ++k) {
        diag += (std::pow(k + 1.0, chi) - std::pow(k - 1.0, chi)) / std::pow(double(k), rho);
    }
    diag += (std::pow(M + 1.0, chi) - std::pow(M - 1.0, chi)) / std::pow(double(M), rho);
    diag += chi / (s * std::pow(double(M), 2.0 * s));
    entry[0] = diag;
    if (m > 1) entry[1] = -0.5 * (std::pow(2.0, chi) + kappa - 1.0);
    for (int k = 2; k < m; ++k) {
        entry[k] = -(std::pow(k + 1.0, chi) - std::pow(k - 1.0, chi)) / (2.0 * std::pow(double(k), rho));
    }

    op.stiffness.resize(m, m);
    for (int i = 0; i < m; ++i) {
        for (int j = 0; j < m; ++j) {
            op.stiffness(i, j) = op.c_norm * entry[std::abs(i - j)];
        }
    }
    return op;
}

/// Inverse power iteration for the smallest eigenpair of `stiffness`, with a
/// deterministic all-ones start. Stops when ||K v - lambda v|| <= tol * lambda.
inline EigenPair principal_eigenpair(const FracOperator& op, double eigen_tol = 1e-10,
                                     int max_iterations = 10000) {
    if (!(eigen_tol > 0.0)) throw std::invalid_argument("principal_eigenpair: eigen_tol must be > 0");
    const int m = op.m_interior;
    if (op.stiffness.rows() != m) throw std::invalid_argument("principal_eigenpair: malformed operator");

    Eigen::LLT<Eigen::MatrixXd> llt(op.stiffness);
    if (llt.info() != Eigen::Success) {
        throw std::runtime_error("principal_eigenpair: stiffness matrix is not positive definite");
    }

    Eigen::VectorXd v = Eigen::VectorXd::Ones(m) / std::sqrt(double(m));
    double lambda = 0.0, resid = 0.0;
    int it = 0;
    for (; it < max_iterations; ++it) {
        Eigen::VectorXd z = llt.solve(v);
        const double zn = z.norm();
        v = z / zn;
        lambda = v.dot(op.stiffness * v);
        resid = (op.stiffness * v - lambda * v).norm();
        if (resid <= eigen_tol * lambda) break;
    }
    if (resid > eigen_tol * lambda) {
        throw std::runtime_error("principal_eigenpair: no convergence after " +
                                 std::to_string(max_iterations) +
                                 " iterations (last residual " + std::to_string(resid) + ")");
    }

    if (v.sum() < 0.0) v = -v;
    if (v.minCoeff() <= 0.0) {
        throw std::runtime_error("principal_eigenpair: candidate eigenvector changes sign, "
                                 "contradicting simplicity of the principal eigenvalue");
    }
    // quadrature normalisation: sum phi * dx = 1
    v /= v.sum() * op.dx;

    EigenPair pair;
    pair.lambda1 = lambda;
    pair.phi1 = v;
    pair.residual = resid;
    pair.iterations = it + 1;
    return pair;
}

/// Sampled sup-norm profile t -> ||e^{gamma t} S_alpha(t)||_{inf->inf},
/// computed by evolving w_t = -K w from w = 1 with implicit Euler substeps
/// (size <= max(1e-3, requested)) and scaling by e^{gamma t} exactly.
inline std::vector<double> semigroup_sup_norm_profile(const FracOperator& op, double gamma,
                                                      const std::vector<double>& t_grid,
                                                      double substep = 1e-3) {
    if (t_grid.empty() || t_grid.front() != 0.0) {
        throw std::invalid_argument("semigroup_sup_norm_profile: t_grid must start at 0");
    }
    for (std::size_t k = 1; k < t_grid.size(); ++k) {
        if (!(t_grid[k] > t_grid[k - 1])) {
            throw std::invalid_argument("semigroup_sup_norm_profile: t_grid must be strictly increasing");
        }
    }
    std::vector<double> profile(t_grid.size());
    profile[0] = 1.0;

    Eigen::VectorXd w = Eigen::VectorXd::Ones(op.m_interior);
    double cached_h = -1.0;
    Eigen::LLT<Eigen::MatrixXd> llt;
    for (std::size_t k = 1; k < t_grid.size(); ++k) {
        const double len = t_grid[k] - t_grid[k - 1];
        const int nsub = std::max(1, static_cast<int>(std::ceil(len / substep)));
        const double h = len / nsub;
        if (h != cached_h) {
            llt.compute(Eigen::MatrixXd::Identity(op.m_interior, op.m_interior) + h * op.stiffness);
            cached_h = h;
        }
        for (int j = 0; j < nsub; ++j) w = llt.solve(w);
        const double sup = w.maxCoeff();
        if (!(sup > 0.0)) {
            throw std::runtime_error("semigroup_sup_norm_profile: non-positive profile value "
                                     "(positivity-preserving step violated)");
        }
        profile[k] = std::exp(gamma * t_grid[k]) * sup;
    }
    return profile;
}

struct AlphaSweepRow {
    double alpha = 0.0;
    double lambda1 = 0.0;
    bool ok = false;
    std::string message;
};

/// lambda_1 as a function of alpha on a fixed grid; failed rows carry the
/// error message and the sweep continues.
inline std::vector<AlphaSweepRow> eigenvalue_alpha_sweep(const std::vector<double>& alphas, int M) {
    std::vector<AlphaSweepRow> rows;
    rows.reserve(alphas.size());
    for (double a : alphas) {
        AlphaSweepRow row;
        row.alpha = a;
        try {
            if (!(a > 0.0 && a < 2.0)) throw std::invalid_argument("alpha must lie in (0, 2) for the sweep");
            const FracOperator op = build_fd_matrix(a, M);
            row.lambda1 = principal_eigenpair(op).lambda1;
            row.ok = true;
        } catch (const std::exception& e) {
            row.message = e.what();
        }
        rows.push_back(row);
    }
    return rows;
}

}  // namespace fracspde
