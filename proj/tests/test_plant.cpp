#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include "regpack/plant.hpp"
#include "regpack/rlc.hpp"
#include "support.hpp"

#include <random>

using namespace regpack;
using namespace regpack::plant;

namespace {

LtiPlant scalar_exo_plant(int n, const Eigen::MatrixXd& A, const Eigen::VectorXd& B,
                          const Eigen::RowVectorXd& C, double D) {
    LtiPlant pl;
    pl.A = A;
    pl.B = B;
    pl.C = C;
    pl.D = D;
    pl.P = Eigen::MatrixXd::Zero(n, 1);
    pl.Q = Eigen::RowVectorXd::Zero(1);
    return pl;
}

} // namespace

TEST_CASE("relative degree") {
    SUBCASE("feedforward present means r = 0") {
        Eigen::MatrixXd A = -Eigen::MatrixXd::Identity(1, 1);
        LtiPlant pl = scalar_exo_plant(1, A, Eigen::VectorXd::Ones(1),
                                       Eigen::RowVectorXd::Ones(1), 1.0);
        CHECK(relative_degree(pl) == 0);
    }
    SUBCASE("SVII circuit has unitary relative degree with CB = R_L R_th eps1") {
        auto pl = rlc::build_plant({});
        CHECK(relative_degree(pl) == 1);
        double cb = pl.C * pl.B;
        CHECK(cb == doctest::Approx(10.0 * 5.0 / ((0.5 + 5.0) * 0.1)).epsilon(1e-12));
        CHECK(cb == doctest::Approx(90.909090909).epsilon(1e-9));
    }
    SUBCASE("double integrator has r = 2") {
        Eigen::MatrixXd A(2, 2);
        A << 0, 1, 0, 0;
        Eigen::VectorXd B(2);
        B << 0, 1;
        Eigen::RowVectorXd C(2);
        C << 1, 0;
        LtiPlant pl = scalar_exo_plant(2, A, B, C, 0.0);
        CHECK(relative_degree(pl) == 2);
    }
    SUBCASE("invariance under similarity transformations") {
        std::mt19937 rng(17);
        for (int trial = 0; trial < 10; ++trial) {
            int n = 2 + static_cast<int>(rng() % 3);
            Eigen::MatrixXd A = testsupport::random_stable(n, rng);
            Eigen::VectorXd B = testsupport::random_matrix(n, 1, rng);
            Eigen::RowVectorXd C = testsupport::random_matrix(1, n, rng);
            LtiPlant pl = scalar_exo_plant(n, A, B, C, 0.0);
            int r;
            try {
                r = relative_degree(pl);
            } catch (const DegenerateRelativeDegree&) {
                continue;
            }
            Eigen::MatrixXd T = testsupport::random_matrix(n, n, rng) +
                                3.0 * Eigen::MatrixXd::Identity(n, n);
            LtiPlant plT = scalar_exo_plant(n, T * A * T.inverse(), T * B,
                                            C * T.inverse(), 0.0);
            CHECK(relative_degree(plT) == r);
        }
    }
}

TEST_CASE("normal form") {
    SUBCASE("SVII zero dynamics is the load pole -1/(R_L C_L)") {
        auto pl = rlc::build_plant({});
        NormalForm nf = normal_form(pl);
        REQUIRE(nf.zero_spectrum.size() == 1);
        CHECK(nf.zero_spectrum(0).real() == doctest::Approx(-1.0 / 3.0).epsilon(1e-9));
        CHECK(nf.minimum_phase);
        CHECK(nf.b == doctest::Approx(pl.C * pl.B));
        // the z-rows carry no input
        Eigen::VectorXd TB = nf.T * pl.B;
        CHECK(std::abs(TB(0)) < 1e-10);
    }
    SUBCASE("constructed non-minimum-phase instance") {
        Eigen::MatrixXd A = Eigen::MatrixXd::Zero(2, 2);
        A(0, 0) = -1.0;
        A(1, 1) = 1.0;
        Eigen::VectorXd B(2);
        B << 1, 1;
        Eigen::RowVectorXd C(2);
        C << 1, 0;
        LtiPlant pl = scalar_exo_plant(2, A, B, C, 0.0);
        NormalForm nf = normal_form(pl);
        CHECK(nf.zero_spectrum(0).real() == doctest::Approx(1.0).epsilon(1e-9));
        CHECK(!nf.minimum_phase);
    }
    SUBCASE("block reassembly reproduces A") {
        auto pl = rlc::build_plant({});
        NormalForm nf = normal_form(pl);
        Eigen::MatrixXd At(2, 2);
        At << nf.A11(0, 0), nf.A12(0, 0), nf.A21(0), nf.A22;
        CHECK((nf.T_inv * At * nf.T - pl.A).norm() < 1e-10);
    }
    SUBCASE("wrong relative degree rejected") {
        Eigen::MatrixXd A(2, 2);
        A << 0, 1, 0, 0;
        Eigen::VectorXd B(2);
        B << 0, 1;
        Eigen::RowVectorXd C(2);
        C << 1, 0;
        CHECK_THROWS_AS(normal_form(scalar_exo_plant(2, A, B, C, 0.0)), WrongRelativeDegree);
    }
    SUBCASE("zero spectrum matches the Rosenbrock-pencil zeros on random plants") {
        std::mt19937 rng(99);
        int done = 0;
        while (done < 6) {
            int n = 3;
            Eigen::MatrixXd A = testsupport::random_stable(n, rng);
            Eigen::VectorXd B = testsupport::random_matrix(n, 1, rng);
            Eigen::RowVectorXd C = testsupport::random_matrix(1, n, rng);
            LtiPlant pl = scalar_exo_plant(n, A, B, C, 0.0);
            try {
                if (relative_degree(pl) != 1) continue;
            } catch (const DegenerateRelativeDegree&) {
                continue;
            }
            NormalForm nf = normal_form(pl);
            auto zeros = testsupport::rosenbrock_zeros(A, B, C, 0.0);
            REQUIRE(zeros.size() == static_cast<size_t>(n - 1));
            // match eigenvalues as multisets
            std::vector<std::complex<double>> mine(nf.zero_spectrum.data(),
                                                   nf.zero_spectrum.data() + n - 1);
            for (const auto& z : zeros) {
                double best = 1e300;
                for (const auto& m : mine) best = std::min(best, std::abs(m - z));
                CHECK(best < 1e-8 * (1.0 + std::abs(z)));
            }
            ++done;
        }
    }
}

TEST_CASE("stabilizability validation") {
    // unstable and uncontrollable mode
    Eigen::MatrixXd A = Eigen::MatrixXd::Zero(2, 2);
    A(0, 0) = 1.0;
    A(1, 1) = -1.0;
    Eigen::VectorXd B(2);
    B << 0, 1;
    Eigen::RowVectorXd C(2);
    C << 1, 1;
    LtiPlant pl = scalar_exo_plant(2, A, B, C, 0.0);
    CHECK_THROWS_AS(pl.validate(), InvalidInput);
}

TEST_CASE("pole placement") {
    auto pl = rlc::build_plant({});
    Eigen::RowVectorXd K = place_poles(pl.A, pl.B, {{-5.0, 0.0}, {-6.0, 0.0}});
    Eigen::EigenSolver<Eigen::MatrixXd> es(pl.A + pl.B * K);
    std::vector<double> re{es.eigenvalues()(0).real(), es.eigenvalues()(1).real()};
    std::sort(re.begin(), re.end());
    CHECK(re[0] == doctest::Approx(-6.0).epsilon(1e-8));
    CHECK(re[1] == doctest::Approx(-5.0).epsilon(1e-8));
}

TEST_CASE("non-resonance diagnostic") {
    SUBCASE("minimum-phase SVII plant with the SVII generator passes") {
        auto pl = rlc::build_plant({});
        auto sys = rlc::build_exosystem();
        auto rep = nonresonance_check(pl, sys.exosystem, 30.0, 2e-3);
        CHECK(rep.pass);
        CHECK(rep.sup_omega_norm < 100.0);
    }
    SUBCASE("marginal zero with a constant generator grows linearly") {
        // transmission zero at the origin: C adj(sI - A) B = s
        Eigen::MatrixXd A(2, 2);
        A << 0, 1, 0, -3;
        Eigen::VectorXd B(2);
        B << 1, 1;
        Eigen::RowVectorXd C(2);
        C << 0, 1;
        LtiPlant pl = scalar_exo_plant(2, A, B, C, 0.0);
        NormalForm nf = normal_form(pl);
        REQUIRE(std::abs(nf.zero_spectrum(0).real()) < 1e-9);
        exo::ExplicitExosystem one{tv_constant(Eigen::MatrixXd::Identity(1, 1)), 0.0, 1, {}};
        auto rep = nonresonance_check(pl, one, 20.0, 1e-2);
        CHECK(!rep.pass);
        CHECK(rep.sup_omega_norm > 10.0);
    }
    SUBCASE("exponential generator reduces to the Kronecker non-singularity test") {
        // stable zero dynamics, neutral rotation generator: spectra disjoint
        Eigen::MatrixXd S(2, 2);
        S << 0, 1, -1, 0;
        exo::SignalParams p;
        p.S = S;
        exo::ExplicitExosystem sys{exo::build_signal(exo::SignalKind::MatrixExponential, p), 0.0,
                                   2, {}};
        Eigen::MatrixXd A(2, 2);
        A << -3, 1, 0, -4;
        Eigen::VectorXd B(2);
        B << 1, 0;
        Eigen::RowVectorXd C(2);
        C << 1, 0;
        LtiPlant pl = scalar_exo_plant(2, A, B, C, 0.0);
        pl.P = Eigen::MatrixXd::Zero(2, 2);
        pl.Q = Eigen::RowVectorXd::Zero(2);
        NormalForm nf = normal_form(pl);
        auto rep = nonresonance_check(pl, sys, 40.0, 2e-3);
        CHECK(rep.pass);
        // oracle: I (x) A_z - S^T (x) I nonsingular (A_z is 1x1 here)
        Eigen::MatrixXd K = nf.A11(0, 0) * Eigen::MatrixXd::Identity(2, 2) - S.transpose();
        CHECK(std::abs(K.determinant()) > 1e-6);
    }
}
