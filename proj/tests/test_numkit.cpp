#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include "regpack/numkit.hpp"
#include "regpack/signals.hpp"
#include "support.hpp"

#include <cstring>

using namespace regpack;
using namespace regpack::numkit;

namespace {
constexpr double kPi = 3.14159265358979323846;

TimeVaryingMatrix sign_sin() {
    auto eval = [](double t) {
        double m = std::fmod(t, 2 * kPi);
        if (m < 0) m += 2 * kPi;
        return Eigen::MatrixXd::Constant(1, 1, m < kPi ? 1.0 : -1.0);
    };
    auto breaks = [](double ta, double tb) {
        std::vector<double> out;
        long k0 = static_cast<long>(std::floor(ta / kPi));
        for (long k = k0; k * kPi < tb; ++k)
            if (k * kPi > ta && k * kPi < tb) out.push_back(k * kPi);
        return out;
    };
    return TimeVaryingMatrix(1, 1, eval, breaks);
}
} // namespace

TEST_CASE("pinv basics") {
    SUBCASE("identity") {
        auto r = pinv(Eigen::MatrixXd::Identity(3, 3));
        CHECK(r.rank == 3);
        CHECK((r.pinv - Eigen::MatrixXd::Identity(3, 3)).norm() < 1e-12);
    }
    SUBCASE("zero matrix") {
        auto r = pinv(Eigen::MatrixXd::Zero(2, 3));
        CHECK(r.rank == 0);
        CHECK(r.pinv.rows() == 3);
        CHECK(r.pinv.cols() == 2);
        CHECK(r.pinv.norm() == 0.0);
    }
    SUBCASE("diagonal with null direction") {
        Eigen::MatrixXd M(2, 2);
        M << 2, 0, 0, 0;
        auto r = pinv(M);
        CHECK(r.rank == 1);
        CHECK(r.pinv(0, 0) == doctest::Approx(0.5).epsilon(1e-12));
        CHECK(std::abs(r.pinv(1, 1)) < 1e-15);
    }
    SUBCASE("non-finite rejected") {
        Eigen::MatrixXd M(1, 1);
        M(0, 0) = std::numeric_limits<double>::quiet_NaN();
        CHECK_THROWS_AS(pinv(M), InvalidInput);
    }
    SUBCASE("Penrose identity on random matrices") {
        std::mt19937 rng(11);
        for (int trial = 0; trial < 50; ++trial) {
            int r = 1 + static_cast<int>(rng() % 20);
            int c = 1 + static_cast<int>(rng() % 20);
            Eigen::MatrixXd M = testsupport::random_matrix(r, c, rng);
            if (trial % 3 == 0 && r > 1) M.row(0) = M.row(r - 1); // force rank deficiency
            auto pv = pinv(M);
            CHECK((M * pv.pinv * M - M).norm() <= 1e-8 * M.norm());
            CHECK((pv.pinv * M * pv.pinv - pv.pinv).norm() <= 1e-8 * pv.pinv.norm());
        }
    }
}

TEST_CASE("integrate_matrix_ode") {
    SUBCASE("scalar linear ODE hits the closed form") {
        Grid g{0.0, 10.0, 1e-3, {}};
        auto rhs = [](double, const Eigen::MatrixXd& x) {
            return Eigen::MatrixXd::Constant(1, 1, -x(0, 0) + 1.0);
        };
        auto traj = integrate_matrix_ode(rhs, Eigen::MatrixXd::Zero(1, 1), g);
        double expected = 1.0 - std::exp(-10.0);
        CHECK(traj.eval(10.0)(0, 0) == doctest::Approx(expected).epsilon(1e-6));
    }
    SUBCASE("zero dynamics stays put") {
        Grid g{0.0, 3.0, 1e-2, {1.0, 2.0}};
        Eigen::MatrixXd X0(2, 2);
        X0 << 1, 2, 3, 4;
        auto traj = integrate_matrix_ode(
            [](double, const Eigen::MatrixXd& X) { return (0.0 * X).eval(); }, X0, g);
        CHECK((traj.eval(3.0) - X0).norm() == 0.0);
    }
    SUBCASE("square wave integrates exactly with breakpoint splitting") {
        TimeVaryingMatrix sq = sign_sin();
        Grid g = make_grid(0.0, 2 * kPi, 1e-3, {&sq});
        REQUIRE(g.breakpoints.size() == 1);
        auto traj = integrate_matrix_ode(
            [&](double t, const Eigen::MatrixXd&) { return sq(t); }, Eigen::MatrixXd::Zero(1, 1),
            g);
        CHECK(std::abs(traj.eval(2 * kPi)(0, 0)) < 1e-8);
        // exact piecewise integration oracle: one half period of +1
        CHECK(traj.eval(kPi)(0, 0) == doctest::Approx(kPi).epsilon(1e-8));
    }
    SUBCASE("order-4 convergence inside smooth pieces") {
        auto terminal_error = [](double h) {
            Grid g{0.0, 2.0, h, {}};
            auto traj = integrate_matrix_ode(
                [](double, const Eigen::MatrixXd& x) {
                    return Eigen::MatrixXd::Constant(1, 1, -x(0, 0) + 1.0);
                },
                Eigen::MatrixXd::Zero(1, 1), g);
            return std::abs(traj.eval(2.0)(0, 0) - (1.0 - std::exp(-2.0)));
        };
        double e1 = terminal_error(0.1), e2 = terminal_error(0.05);
        CHECK(e1 / e2 >= 8.0);
    }
    SUBCASE("non-finite rhs reports the offending time") {
        Grid g{0.0, 1.0, 1e-2, {}};
        auto rhs = [](double t, const Eigen::MatrixXd& x) -> Eigen::MatrixXd {
            if (t > 0.5) return Eigen::MatrixXd::Constant(1, 1, std::nan(""));
            return x;
        };
        CHECK_THROWS_AS(integrate_matrix_ode(rhs, Eigen::MatrixXd::Ones(1, 1), g),
                        IntegrationBlowup);
    }
    SUBCASE("empty grid rejected") {
        Grid g{1.0, 1.0, 1e-3, {}};
        CHECK_THROWS_AS(integrate_matrix_ode(
                            [](double, const Eigen::MatrixXd& x) { return x; },
                            Eigen::MatrixXd::Ones(1, 1), g),
                        InvalidInput);
    }
}

TEST_CASE("repeated_integrals") {
    SUBCASE("polynomial antiderivatives are exact") {
        TimeVaryingMatrix one = tv_constant(Eigen::MatrixXd::Ones(1, 1));
        Grid g{0.0, 2.0, 1e-3, {}};
        auto levels = repeated_integrals(one, 2, 0.0, g);
        CHECK(levels[0].eval(2.0)(0, 0) == doctest::Approx(2.0).epsilon(1e-8));
        CHECK(levels[1].eval(2.0)(0, 0) == doctest::Approx(2.0).epsilon(1e-8));
        CHECK(levels[0].eval(0.0)(0, 0) == 0.0);
        CHECK(levels[1].eval(0.0)(0, 0) == 0.0);
    }
    SUBCASE("zero input gives zero levels") {
        TimeVaryingMatrix zero = tv_constant(Eigen::MatrixXd::Zero(2, 3));
        Grid g{0.0, 1.0, 1e-2, {}};
        auto levels = repeated_integrals(zero, 3, 0.0, g);
        for (const auto& l : levels) CHECK(l.sup_norm() == 0.0);
    }
    SUBCASE("square wave half-period area") {
        TimeVaryingMatrix sq = sign_sin();
        Grid g = make_grid(0.0, kPi + 0.5, 1e-3, {&sq});
        auto levels = repeated_integrals(sq, 1, 0.0, g);
        CHECK(levels[0].eval(kPi)(0, 0) == doctest::Approx(kPi).epsilon(1e-6));
    }
    SUBCASE("k = 0 rejected") {
        TimeVaryingMatrix one = tv_constant(Eigen::MatrixXd::Ones(1, 1));
        Grid g{0.0, 1.0, 1e-2, {}};
        CHECK_THROWS_AS(repeated_integrals(one, 0, 0.0, g), InvalidInput);
    }
    SUBCASE("level j+1 is the running integral of level j") {
        // re-integration sees level j through its piecewise-linear samples,
        // which is exact for square-wave inputs up to the second level
        TimeVaryingMatrix sq = sign_sin();
        Grid g = make_grid(0.0, 4.0, 1e-3, {&sq});
        auto levels = repeated_integrals(sq, 2, 0.0, g);
        auto reint = integrate_matrix_ode(
            [&](double t, const Eigen::MatrixXd&) { return levels[0].eval(t); },
            Eigen::MatrixXd::Zero(1, 1), g);
        double diff = 0.0;
        for (size_t i = 0; i < reint.size(); i += 17)
            diff = std::max(diff, (reint.value(i) - levels[1].value(i)).norm());
        CHECK(diff < 1e-10);
        // curved levels are interpolation-limited at O(step^2)
        exo::SignalParams p;
        p.period = 2.0;
        TimeVaryingMatrix f = exo::build_signal(exo::SignalKind::Triangle, p);
        Grid g2 = make_grid(0.0, 4.0, 1e-3, {&f});
        auto lev2 = repeated_integrals(f, 3, 0.0, g2);
        auto reint2 = integrate_matrix_ode(
            [&](double t, const Eigen::MatrixXd&) { return lev2[1].eval(t); },
            Eigen::MatrixXd::Zero(1, 1), g2);
        double diff2 = 0.0;
        for (size_t i = 0; i < reint2.size(); i += 17)
            diff2 = std::max(diff2, (reint2.value(i) - lev2[2].value(i)).norm());
        CHECK(diff2 < 5e-7);
    }
}

TEST_CASE("MatrixTrajectory breakpoint semantics") {
    // two samples at the same time: left then right
    std::vector<double> ts{0.0, 1.0, 1.0, 2.0};
    std::vector<Eigen::MatrixXd> vs{
        Eigen::MatrixXd::Constant(1, 1, 0.0), Eigen::MatrixXd::Constant(1, 1, 1.0),
        Eigen::MatrixXd::Constant(1, 1, 5.0), Eigen::MatrixXd::Constant(1, 1, 6.0)};
    MatrixTrajectory traj(ts, vs);
    CHECK(traj.eval(1.0)(0, 0) == 5.0);
    CHECK(traj.eval_left(1.0)(0, 0) == 1.0);
    CHECK(traj.eval(0.5)(0, 0) == doctest::Approx(0.5));
    CHECK(traj.eval(1.5)(0, 0) == doctest::Approx(5.5));
    CHECK(traj.is_left_sample(1));
    CHECK(!traj.is_left_sample(2));
}

TEST_CASE("determinism: identical inputs give bit-identical outputs") {
    auto run = []() {
        Grid g{0.0, 5.0, 1e-3, {1.234567, 2.5}};
        auto rhs = [](double t, const Eigen::MatrixXd& x) {
            return Eigen::MatrixXd::Constant(1, 1, std::sin(3.0 * t) - 0.5 * x(0, 0));
        };
        return integrate_matrix_ode(rhs, Eigen::MatrixXd::Zero(1, 1), g);
    };
    auto a = run();
    auto b = run();
    REQUIRE(a.size() == b.size());
    for (size_t i = 0; i < a.size(); ++i) {
        double va = a.value(i)(0, 0), vb = b.value(i)(0, 0);
        CHECK(std::memcmp(&va, &vb, sizeof(double)) == 0);
    }
}
