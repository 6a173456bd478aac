#include "regpack/plant.hpp"

#include <Eigen/Eigenvalues>
#include <Eigen/QR>
#include <Eigen/SVD>

namespace regpack::plant {

void LtiPlant::validate() const {
    const int nn = n();
    if (nn == 0 || A.cols() != nn) throw InvalidInput("LtiPlant: A must be square");
    if (B.size() != nn) throw InvalidInput("LtiPlant: B size mismatch");
    if (C.size() != nn) throw InvalidInput("LtiPlant: C size mismatch");
    if (P.rows() != nn) throw InvalidInput("LtiPlant: P rows mismatch");
    if (Q.size() != P.cols()) throw InvalidInput("LtiPlant: Q width must match P");
    if (!A.allFinite() || !B.allFinite() || !C.allFinite() || !P.allFinite() || !Q.allFinite() ||
        !std::isfinite(D))
        throw InvalidInput("LtiPlant: non-finite entries");

    // PBH: [A - lambda I, B] must keep full row rank at unstable eigenvalues
    Eigen::EigenSolver<Eigen::MatrixXd> es(A);
    for (Eigen::Index i = 0; i < es.eigenvalues().size(); ++i) {
        std::complex<double> lam = es.eigenvalues()(i);
        if (lam.real() < -1e-9) continue;
        Eigen::MatrixXcd pencil(nn, nn + 1);
        pencil.leftCols(nn) = A.cast<std::complex<double>>() -
                              lam * Eigen::MatrixXcd::Identity(nn, nn);
        pencil.col(nn) = B.cast<std::complex<double>>();
        Eigen::JacobiSVD<Eigen::MatrixXcd> svd(pencil);
        if (svd.singularValues()(nn - 1) <= 1e-8)
            throw InvalidInput("LtiPlant: (A,B) not stabilizable (PBH failure)");
    }
}

int relative_degree(const LtiPlant& plant) {
    if (plant.D != 0.0) return 0;
    const double scale = 1e-10 * plant.C.norm() * plant.B.norm();
    Eigen::VectorXd v = plant.B;
    for (int r = 1; r <= plant.n(); ++r) {
        double markov = plant.C * v;
        if (std::abs(markov) > scale) return r;
        v = plant.A * v;
    }
    throw DegenerateRelativeDegree("relative_degree: C A^i B vanishes for all i < n with D = 0");
}

NormalForm normal_form(const LtiPlant& plant) {
    if (relative_degree(plant) != 1)
        throw WrongRelativeDegree("normal_form: requires relative degree 1");
    const int n = plant.n();
    NormalForm nf;
    // orthonormal basis of span{B}^perp, deterministic via Householder QR
    Eigen::HouseholderQR<Eigen::MatrixXd> qr(plant.B);
    Eigen::MatrixXd Qfull = qr.householderQ();
    Eigen::MatrixXd T1 = Qfull.rightCols(n - 1).transpose();
    nf.T.resize(n, n);
    nf.T.topRows(n - 1) = T1;
    nf.T.bottomRows(1) = plant.C;
    Eigen::PartialPivLU<Eigen::MatrixXd> lu(nf.T);
    nf.T_inv = lu.solve(Eigen::MatrixXd::Identity(n, n));

    Eigen::MatrixXd At = nf.T * plant.A * nf.T_inv;
    nf.A11 = At.topLeftCorner(n - 1, n - 1);
    nf.A12 = At.topRightCorner(n - 1, 1);
    nf.A21 = At.bottomLeftCorner(1, n - 1);
    nf.A22 = At(n - 1, n - 1);
    nf.b = plant.C * plant.B;

    Eigen::MatrixXd TP = nf.T * plant.P;
    nf.P1 = TP.topRows(n - 1);
    nf.P2 = TP.bottomRows(1);
    nf.G1 = nf.P1 - nf.A12 * plant.Q;
    nf.G2 = nf.P2 - nf.A22 * plant.Q;

    Eigen::EigenSolver<Eigen::MatrixXd> es(nf.A11);
    nf.zero_spectrum = es.eigenvalues();
    nf.minimum_phase = true;
    for (Eigen::Index i = 0; i < nf.zero_spectrum.size(); ++i)
        nf.minimum_phase = nf.minimum_phase && nf.zero_spectrum(i).real() < -1e-9;
    return nf;
}

NonresonanceReport nonresonance_check(const LtiPlant& plant, const exo::ExplicitExosystem& exosys,
                                      double horizon, double step) {
    const int r = relative_degree(plant);
    Eigen::MatrixXd Az;
    if (r == 1) {
        Az = normal_form(plant).A11;
    } else if (r == 0) {
        Az = plant.A - plant.B * plant.C / plant.D;
    } else {
        throw Unsupported("nonresonance_check: relative degree must be 0 or 1");
    }
    const int g = static_cast<int>(Az.rows());
    const int nu = exosys.nu;
    TimeVaryingMatrix Lambda = exosys.Lambda;
    numkit::Grid grid = numkit::make_grid(exosys.t0, exosys.t0 + horizon, step, {&Lambda});

    // one moment sweep per basis matrix E_k; column k of Omega(t) is
    // vec(Psi_k(t) Lambda(t)^-1)
    std::vector<numkit::MatrixTrajectory> cols;
    for (int k = 0; k < g * nu; ++k) {
        Eigen::MatrixXd Ek = Eigen::MatrixXd::Zero(g, nu);
        Ek(k % g, k / g) = 1.0; // column-major unvec
        auto rhs = [&](double t, const Eigen::MatrixXd& X) {
            return (Az * X + Ek * Lambda(t)).eval();
        };
        cols.push_back(numkit::integrate_matrix_ode(rhs, Eigen::MatrixXd::Zero(g, nu), grid));
    }

    NonresonanceReport rep;
    const auto& ts = cols.front().times();
    size_t stride = std::max<size_t>(1, ts.size() / 600);
    for (size_t i = 0; i < ts.size(); i += stride) {
        Eigen::PartialPivLU<Eigen::MatrixXd> lu(Lambda(ts[i]).transpose());
        Eigen::MatrixXd Omega(g * nu, g * nu);
        for (int k = 0; k < g * nu; ++k) {
            Eigen::MatrixXd Pi = lu.solve(cols[static_cast<size_t>(k)].value(i).transpose())
                                     .transpose();
            Omega.col(k) = Eigen::Map<Eigen::VectorXd>(Pi.data(), g * nu);
        }
        rep.sample_times.push_back(ts[i]);
        rep.omega_norms.push_back(Omega.norm());
        rep.sup_omega_norm = std::max(rep.sup_omega_norm, Omega.norm());
    }
    size_t half = rep.sample_times.size() / 2;
    std::vector<double> xs(rep.sample_times.begin() + half, rep.sample_times.end());
    std::vector<double> ys(rep.omega_norms.begin() + half, rep.omega_norms.end());
    rep.tail_slope = numkit::fit_slope(xs, ys);
    rep.bounded_trend = rep.tail_slope < 1e-3;
    rep.pass = std::isfinite(rep.sup_omega_norm) && rep.bounded_trend;
    return rep;
}

Eigen::VectorXd poly_from_roots(const std::vector<std::complex<double>>& roots) {
    std::vector<std::complex<double>> coef{1.0};
    for (const auto& r : roots) {
        std::vector<std::complex<double>> next(coef.size() + 1, 0.0);
        for (size_t i = 0; i < coef.size(); ++i) {
            next[i] += coef[i];
            next[i + 1] -= coef[i] * r;
        }
        coef = std::move(next);
    }
    Eigen::VectorXd out(coef.size());
    for (size_t i = 0; i < coef.size(); ++i) {
        if (std::abs(coef[i].imag()) > 1e-9 * (1.0 + std::abs(coef[i].real())))
            throw InvalidInput("poly_from_roots: roots not conjugate-closed");
        out(static_cast<Eigen::Index>(i)) = coef[i].real();
    }
    return out;
}

Eigen::RowVectorXd place_poles(const Eigen::MatrixXd& A, const Eigen::VectorXd& B,
                               const std::vector<std::complex<double>>& poles) {
    const int n = static_cast<int>(A.rows());
    if (static_cast<int>(poles.size()) != n)
        throw InvalidInput("place_poles: need exactly n poles");
    Eigen::MatrixXd ctrb(n, n);
    Eigen::VectorXd v = B;
    for (int i = 0; i < n; ++i) {
        ctrb.col(i) = v;
        v = A * v;
    }
    Eigen::FullPivLU<Eigen::MatrixXd> lu(ctrb);
    if (lu.rank() < n) throw InvalidInput("place_poles: (A,B) not controllable");
    Eigen::VectorXd coef = poly_from_roots(poles); // coef(0)=1 multiplies s^n
    std::vector<Eigen::MatrixXd> powers;
    Eigen::MatrixXd Apow = Eigen::MatrixXd::Identity(n, n);
    for (int i = 0; i <= n; ++i) {
        powers.push_back(Apow);
        Apow = A * Apow;
    }
    Eigen::MatrixXd chi = Eigen::MatrixXd::Zero(n, n);
    for (int i = 0; i <= n; ++i) chi += coef(i) * powers[static_cast<size_t>(n - i)];

    Eigen::RowVectorXd last = Eigen::RowVectorXd::Zero(n);
    last(n - 1) = 1.0;
    Eigen::RowVectorXd K = -(last * lu.solve(chi));
    return K;
}

bool is_hurwitz(const Eigen::MatrixXd& M, double margin) {
    Eigen::EigenSolver<Eigen::MatrixXd> es(M);
    for (Eigen::Index i = 0; i < es.eigenvalues().size(); ++i)
        if (es.eigenvalues()(i).real() >= -margin) return false;
    return true;
}

} // namespace regpack::plant
