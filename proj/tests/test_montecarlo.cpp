#include <catch_amalgamated.hpp>

#include <cmath>

#include "fracspde/montecarlo.hpp"

using namespace fracspde;

namespace {

struct Fixture {
    GridSpec grid;
    FracOperator op;
    EigenPair eig;
    Fixture(int M = 64, int N = 300, double T = 1.0) {
        grid.M = M;
        grid.N = N;
        grid.T = T;
        op = build_fd_matrix(1.2, M);
        eig = principal_eigenpair(op);
    }
};

}  // namespace

TEST_CASE("run_ensemble basics") {
    Fixture fx;
    ModelParams mp;
    IcSpec ic;

    SECTION("same inputs and master seed give identical stats") {
        const auto a = run_ensemble(mp, fx.grid, ic, fx.eig, fx.op, 24, 42, 2);
        const auto b = run_ensemble(mp, fx.grid, ic, fx.eig, fx.op, 24, 42, 2);
        REQUIRE(a.stats.p_hat == b.stats.p_hat);
        REQUIRE(a.stats.n_blowup == b.stats.n_blowup);
        for (std::size_t i = 0; i < a.rows.size(); ++i) {
            REQUIRE(a.rows[i].seed == b.rows[i].seed);
            REQUIRE(a.rows[i].sup_final == b.rows[i].sup_final);
        }
    }

    SECTION("schedule independence across worker counts") {
        const auto w1 = run_ensemble(mp, fx.grid, ic, fx.eig, fx.op, 16, 7, 1);
        const auto w4 = run_ensemble(mp, fx.grid, ic, fx.eig, fx.op, 16, 7, 4);
        const auto w8 = run_ensemble(mp, fx.grid, ic, fx.eig, fx.op, 16, 7, 8);
        for (std::size_t i = 0; i < w1.rows.size(); ++i) {
            REQUIRE(w1.rows[i].sup_final == w4.rows[i].sup_final);
            REQUIRE(w1.rows[i].sup_final == w8.rows[i].sup_final);
            REQUIRE(w1.rows[i].blew_up == w4.rows[i].blew_up);
        }
        REQUIRE(w1.stats.p_hat == w4.stats.p_hat);
        REQUIRE(w1.stats.p_hat == w8.stats.p_hat);
    }

    SECTION("single non-blow-up realization: p_hat 0, moments undefined") {
        const auto res = run_ensemble(mp, fx.grid, ic, fx.eig, fx.op, 1, 11, 1);
        REQUIRE(res.stats.p_hat == 0.0);
        REQUIRE(std::isnan(res.stats.mean_tau));
        REQUIRE(std::isnan(res.stats.var_tau));
        REQUIRE(res.stats.se_phat == 0.0);
    }

    SECTION("N_R = 0 is rejected") {
        REQUIRE_THROWS_AS(run_ensemble(mp, fx.grid, ic, fx.eig, fx.op, 0, 1, 1),
                          std::invalid_argument);
    }

    SECTION("blow-up preset aggregates correctly") {
        ModelParams hot;
        hot.delta = 7.0;
        hot.sigma = 0.1;
        Fixture bx(64, 500, 1.0);
        const auto res = run_ensemble(hot, bx.grid, ic, bx.eig, bx.op, 20, 3, 2);
        REQUIRE(res.stats.n_blowup == 20);  // far supercritical
        REQUIRE(res.stats.p_hat == 1.0);
        REQUIRE(res.stats.mean_tau > 0.0);
        REQUIRE(res.stats.var_tau >= 0.0);
        REQUIRE(res.stats.se_phat == 0.0);
        int count = 0;
        double sum = 0.0;
        for (const auto& row : res.rows) {
            if (row.blew_up) {
                ++count;
                sum += row.tau_b;
            }
        }
        REQUIRE(count == res.stats.n_blowup);
        REQUIRE(res.stats.mean_tau == Catch::Approx(sum / count).epsilon(1e-15));
    }
}

TEST_CASE("estimator consistency near the stochastic threshold", "[stat]") {
    // delta close to the deterministic critical value with sizable noise
    // gives a genuinely fractional blow-up probability.
    Fixture fx(64, 400, 1.0);
    ModelParams mp;
    mp.delta = 2.3;
    mp.sigma = 0.3;
    IcSpec ic;
    const auto ref = run_ensemble(mp, fx.grid, ic, fx.eig, fx.op, 400, 1001, 2);
    REQUIRE(ref.stats.p_hat > 0.2);
    REQUIRE(ref.stats.p_hat < 0.8);
    const auto fresh = run_ensemble(mp, fx.grid, ic, fx.eig, fx.op, 200, 2002, 2);
    REQUIRE(std::abs(fresh.stats.p_hat - ref.stats.p_hat) <= 4.0 * fresh.stats.se_phat);
}

TEST_CASE("p_hat is non-decreasing in the initial amplitude", "[stat]") {
    Fixture fx(64, 400, 1.0);
    ModelParams mp;
    mp.delta = 2.3;
    mp.sigma = 0.3;
    IcSpec ic;
    const auto rows =
        parameter_sweep(mp, fx.grid, ic, SweepAxis::c, {0.01, 0.5, 1.5}, 150, 77, 2);
    for (std::size_t k = 1; k < rows.size(); ++k) {
        REQUIRE(rows[k].stats.p_hat >=
                rows[k - 1].stats.p_hat - rows[k - 1].stats.se_phat);
    }
    REQUIRE(rows.back().stats.p_hat > rows.front().stats.p_hat);
}

TEST_CASE("parameter sweep") {
    Fixture fx(64, 200, 0.5);
    ModelParams mp;
    IcSpec ic;

    SECTION("rows come back in input order with duplicates identical") {
        const std::vector<double> values = {0.5, 0.7, 0.5};
        const auto rows = parameter_sweep(mp, fx.grid, ic, SweepAxis::H, values, 8, 21, 2);
        REQUIRE(rows.size() == 3);
        REQUIRE(rows[0].axis_value == 0.5);
        REQUIRE(rows[1].axis_value == 0.7);
        REQUIRE(rows[0].stats.p_hat == rows[2].stats.p_hat);
        REQUIRE(rows[0].stats.n_blowup == rows[2].stats.n_blowup);
    }

    SECTION("failed rows are recorded and the sweep continues") {
        const std::vector<double> values = {1.2, 2.5, 1.0};  // alpha = 2.5 invalid
        const auto rows = parameter_sweep(mp, fx.grid, ic, SweepAxis::alpha, values, 4, 5, 1);
        REQUIRE(rows[0].ok);
        REQUIRE_FALSE(rows[1].ok);
        REQUIRE_FALSE(rows[1].message.empty());
        REQUIRE(rows[2].ok);
    }

    SECTION("empty values rejected") {
        REQUIRE_THROWS_AS(parameter_sweep(mp, fx.grid, ic, SweepAxis::q, {}, 4, 5, 1),
                          std::invalid_argument);
    }
}

TEST_CASE("pathwise comparison") {
    ModelParams mp;
    GridSpec grid;
    grid.M = 101;
    grid.N = 500;
    grid.T = 1.0;
    const auto op = build_fd_matrix(mp.alpha, grid.M);
    const auto eig = principal_eigenpair(op);
    const Eigen::VectorXd f_high =
        make_initial_condition(InitialConditionKind::bump_plus_eigen, 0.01, eig, grid);

    SECTION("equal data give zero violation") {
        REQUIRE(pathwise_comparison_test(mp, grid, 1, f_high, f_high) == 0.0);
    }
    SECTION("zero initial data give zero violation") {
        const Eigen::VectorXd zero = Eigen::VectorXd::Zero(f_high.size());
        REQUIRE(pathwise_comparison_test(mp, grid, 2, zero, f_high) == 0.0);
    }
    SECTION("half data stay below within tolerance across seeds") {
        for (std::uint64_t s = 0; s < 5; ++s) {
            REQUIRE(pathwise_comparison_test(mp, grid, 100 + s, 0.5 * f_high, f_high) <= 1e-6);
        }
    }
    SECTION("misordered data rejected") {
        REQUIRE_THROWS_AS(pathwise_comparison_test(mp, grid, 1, 2.0 * f_high, f_high),
                          std::invalid_argument);
    }
}

TEST_CASE("decay rate fit") {
    SECTION("exact exponential recovered to 1e-10") {
        std::vector<double> t, sup;
        for (int k = 0; k <= 100; ++k) {
            t.push_back(0.05 * k);
            sup.push_back(std::exp(-2.0 * 0.05 * k));
        }
        REQUIRE(decay_rate_fit(sup, t, 0.5) == Catch::Approx(-2.0).margin(1e-10));
    }
    SECTION("constant history fits rate 0") {
        std::vector<double> t, sup;
        for (int k = 0; k <= 50; ++k) {
            t.push_back(0.1 * k);
            sup.push_back(3.7);
        }
        REQUIRE(decay_rate_fit(sup, t, 1.0) == Catch::Approx(0.0).margin(1e-12));
    }
    SECTION("nonpositive values in the window are rejected") {
        std::vector<double> t = {0.0, 1.0, 2.0, 3.0};
        std::vector<double> sup = {1.0, 0.5, 0.0, 0.1};
        REQUIRE_THROWS_AS(decay_rate_fit(sup, t, 1.0), std::domain_error);
    }
    SECTION("decay preset rate lands near (lambda1 - gamma)") {
        GridSpec grid;
        grid.M = 101;
        grid.N = 1000;
        grid.T = 10.0;
        const auto op = build_fd_matrix(1.2, grid.M);
        const auto eig = principal_eigenpair(op);
        ModelParams mp;
        mp.delta = 1.0;
        mp.gamma = 0.01;
        mp.beta = 2.0;
        mp.sigma = 0.01;
        mp.p = 4.0;
        mp.q = 1.5;
        const auto f = make_initial_condition(InitialConditionKind::bump_plus_eigen, 0.01, eig, grid);
        const auto path = sample_fbm_path(mp.hurst, grid.T, grid.N, 55);
        const auto rec = simulate_realization(mp, grid, path, f, op);
        REQUIRE_FALSE(rec.blew_up);
        std::vector<double> t(rec.sup_history.size());
        for (std::size_t k = 0; k < t.size(); ++k) t[k] = k * grid.dt();
        const double rate = decay_rate_fit(rec.sup_history, t, 0.5);
        const double target = (eig.lambda1 - mp.gamma) / 2.0;
        REQUIRE(rate < 0.0);
        REQUIRE(std::abs(rate) >= 0.3 * target);
        REQUIRE(std::abs(rate) <= 3.0 * target);
    }
}
