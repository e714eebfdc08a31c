#include <catch_amalgamated.hpp>

#include <cmath>
#include <functional>

#include "fracspde/special.hpp"

using namespace fracspde;

namespace {

// Adaptive Simpson quadrature, used as an independent oracle for the
// incomplete gamma evaluations.
double adaptive_simpson(const std::function<double(double)>& f, double a, double b, double fa,
                        double fb, double fm, double eps, int depth) {
    const double m = 0.5 * (a + b);
    const double lm = 0.5 * (a + m), rm = 0.5 * (m + b);
    const double flm = f(lm), frm = f(rm);
    const double whole = (b - a) / 6.0 * (fa + 4 * fm + fb);
    const double left = (m - a) / 6.0 * (fa + 4 * flm + fm);
    const double right = (b - m) / 6.0 * (fm + 4 * frm + fb);
    if (depth <= 0 || std::abs(left + right - whole) < 15 * eps) {
        return left + right + (left + right - whole) / 15.0;
    }
    return adaptive_simpson(f, a, m, fa, fm, flm, eps / 2, depth - 1) +
           adaptive_simpson(f, m, b, fm, fb, frm, eps / 2, depth - 1);
}

double gamma_p_quadrature(double a, double x) {
    const auto density = [a](double t) {
        return t <= 0.0 ? 0.0 : std::exp((a - 1.0) * std::log(t) - t - std::lgamma(a));
    };
    const double lo = 1e-14;
    return adaptive_simpson(density, lo, x, density(lo), density(x), density(0.5 * (lo + x)),
                            1e-14, 40);
}

}  // namespace

TEST_CASE("regularized incomplete gamma") {
    SECTION("P(a, 0) = 0 and Q(a, 0) = 1") {
        for (double a : {0.3, 1.0, 2.5, 10.0}) {
            REQUIRE(regularized_gamma_p(a, 0.0) == 0.0);
            REQUIRE(regularized_gamma_q(a, 0.0) == 1.0);
        }
    }
    SECTION("exponential special case P(1, x) = 1 - e^{-x}") {
        REQUIRE(regularized_gamma_p(1.0, 0.5) ==
                Catch::Approx(1.0 - std::exp(-0.5)).margin(1e-13));
        REQUIRE(regularized_gamma_p(1.0, 0.5) == Catch::Approx(0.3934693402873666).margin(1e-12));
        for (double x : {0.1, 1.0, 3.0, 10.0}) {
            REQUIRE(regularized_gamma_p(1.0, x) == Catch::Approx(1.0 - std::exp(-x)).margin(1e-13));
        }
    }
    SECTION("erf relation: P(1/2, 1) = erf(1)") {
        REQUIRE(regularized_gamma_p(0.5, 1.0) == Catch::Approx(std::erf(1.0)).margin(1e-12));
        REQUIRE(regularized_gamma_p(0.5, 1.0) == Catch::Approx(0.8427007929497149).margin(1e-10));
    }
    SECTION("agrees with adaptive quadrature of the Gamma density") {
        for (double a : {0.5, 1.7, 4.2}) {
            for (double x : {0.2, 1.0, 2.5, 7.0}) {
                REQUIRE(regularized_gamma_p(a, x) ==
                        Catch::Approx(gamma_p_quadrature(a, x)).margin(1e-10));
            }
        }
    }
    SECTION("P + Q = 1 to 1e-12 and P is non-decreasing in x") {
        for (double a : {0.4, 1.0, 3.0, 12.0}) {
            double prev = -1.0;
            for (double x = 0.0; x <= 30.0; x += 0.25) {
                const double p = regularized_gamma_p(a, x);
                const double q = regularized_gamma_q(a, x);
                REQUIRE(std::abs(p + q - 1.0) <= 1e-12);
                REQUIRE(p >= prev - 1e-14);
                REQUIRE(p >= 0.0);
                REQUIRE(p <= 1.0);
                prev = p;
            }
        }
    }
    SECTION("rejects a <= 0 and x < 0") {
        REQUIRE_THROWS_AS(regularized_gamma_p(0.0, 1.0), std::invalid_argument);
        REQUIRE_THROWS_AS(regularized_gamma_p(-1.0, 1.0), std::invalid_argument);
        REQUIRE_THROWS_AS(regularized_gamma_p(1.0, -0.1), std::invalid_argument);
    }
}
