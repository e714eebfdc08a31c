#pragma once

#include <Eigen/Dense>
#include <stdexcept>
#include <vector>

namespace fracspde {

// Composite-Simpson weights on the full grid of M intervals (M+1 nodes).
// Odd M falls back to a trapezoidal last panel; the flag records that.
struct SimpsonRule {
    Eigen::VectorXd weights;  // size M+1
    bool trapezoid_tail = false;

    static SimpsonRule build(int M, double dx) {
        if (M < 2) throw std::invalid_argument("SimpsonRule: need at least 2 intervals");
        SimpsonRule rule;
        rule.weights = Eigen::VectorXd::Zero(M + 1);
        const int simpson_intervals = (M % 2 == 0) ? M : M - 1;
        for (int j = 0; j <= simpson_intervals; ++j) {
            double w = (j == 0 || j == simpson_intervals) ? 1.0 : (j % 2 == 1 ? 4.0 : 2.0);
            rule.weights[j] += w * dx / 3.0;
        }
        if (M % 2 != 0) {
            rule.weights[M - 1] += dx / 2.0;
            rule.weights[M] += dx / 2.0;
            rule.trapezoid_tail = true;
        }
        return rule;
    }

    // Integral of a field given on interior nodes only (zero exterior).
    double integrate_interior(const Eigen::VectorXd& interior) const {
        const int m = static_cast<int>(interior.size());
        if (m + 2 != weights.size()) throw std::invalid_argument("SimpsonRule: size mismatch");
        return weights.segment(1, m).dot(interior);
    }
};

// Cumulative trapezoid of samples f(t_k) on a sorted grid; out[0] = 0.
inline std::vector<double> cumulative_trapezoid(const std::vector<double>& t,
                                                const std::vector<double>& f) {
    if (t.size() != f.size()) throw std::invalid_argument("cumulative_trapezoid: size mismatch");
    std::vector<double> out(t.size(), 0.0);
    for (std::size_t k = 1; k < t.size(); ++k) {
        out[k] = out[k - 1] + 0.5 * (f[k] + f[k - 1]) * (t[k] - t[k - 1]);
    }
    return out;
}

}  // namespace fracspde
