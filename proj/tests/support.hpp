#pragma once

// Test-only oracles, independent of the library's solution paths.

#include <Eigen/Dense>
#include <Eigen/Eigenvalues>
#include <functional>
#include <random>

namespace testsupport {

/// Solve A X - X S + Q0 = 0 by the Kronecker-product linear system.
inline Eigen::MatrixXd sylvester_solve(const Eigen::MatrixXd& A, const Eigen::MatrixXd& S,
                                       const Eigen::MatrixXd& Q0) {
    const Eigen::Index g = A.rows(), nu = S.rows();
    Eigen::MatrixXd K = Eigen::MatrixXd::Zero(g * nu, g * nu);
    Eigen::MatrixXd Ig = Eigen::MatrixXd::Identity(g, g);
    Eigen::MatrixXd Inu = Eigen::MatrixXd::Identity(nu, nu);
    // vec(AX) = (I (x) A) vec X, vec(XS) = (S^T (x) I) vec X
    for (Eigen::Index i = 0; i < nu; ++i)
        for (Eigen::Index j = 0; j < nu; ++j) {
            K.block(i * g, j * g, g, g) += Inu(i, j) * A;
            K.block(i * g, j * g, g, g) -= S(j, i) * Ig;
        }
    Eigen::VectorXd rhs = -Eigen::Map<const Eigen::VectorXd>(Q0.data(), g * nu);
    Eigen::VectorXd x = K.fullPivLu().solve(rhs);
    return Eigen::Map<const Eigen::MatrixXd>(x.data(), g, nu);
}

/// Classical constant regulator equations: Pi S = A Pi + B Gamma + P,
/// 0 = C Pi + D Gamma + Q. Solved columnwise as one dense linear system.
inline std::pair<Eigen::MatrixXd, Eigen::RowVectorXd> classical_regulator(
    const Eigen::MatrixXd& A, const Eigen::VectorXd& B, const Eigen::RowVectorXd& C, double D,
    const Eigen::MatrixXd& P, const Eigen::RowVectorXd& Q, const Eigen::MatrixXd& S) {
    const Eigen::Index n = A.rows(), nu = S.rows();
    Eigen::MatrixXd K = Eigen::MatrixXd::Zero((n + 1) * nu, (n + 1) * nu);
    Eigen::VectorXd rhs((n + 1) * nu);
    // unknowns: vec(Pi) (n*nu) then Gamma^T (nu)
    for (Eigen::Index i = 0; i < nu; ++i) {
        for (Eigen::Index j = 0; j < nu; ++j)
            K.block(i * n, j * n, n, n) =
                ((i == j ? 1.0 : 0.0) * A) - S(j, i) * Eigen::MatrixXd::Identity(n, n);
        K.block(i * n, n * nu + i, n, 1) = B;
        rhs.segment(i * n, n) = -P.col(i);
        K.block(n * nu + i, i * n, 1, n) = C;
        K(n * nu + i, n * nu + i) = D;
        rhs(n * nu + i) = -Q(i);
    }
    Eigen::VectorXd sol = K.fullPivLu().solve(rhs);
    Eigen::MatrixXd Pi = Eigen::Map<const Eigen::MatrixXd>(sol.data(), n, nu);
    Eigen::RowVectorXd Gamma = sol.tail(nu).transpose();
    return {Pi, Gamma};
}

/// Adaptive Simpson quadrature.
inline double quad(const std::function<double(double)>& f, double a, double b, double tol = 1e-10,
                   int depth = 24) {
    std::function<double(double, double, double, double, double, int)> rec =
        [&](double lo, double hi, double flo, double fhi, double fmid, int d) -> double {
        double mid = 0.5 * (lo + hi);
        double lmid = 0.5 * (lo + mid), rmid = 0.5 * (mid + hi);
        double flmid = f(lmid), frmid = f(rmid);
        double whole = (hi - lo) / 6.0 * (flo + 4 * fmid + fhi);
        double left = (mid - lo) / 6.0 * (flo + 4 * flmid + fmid);
        double right = (hi - mid) / 6.0 * (fmid + 4 * frmid + fhi);
        if (d <= 0 || std::abs(left + right - whole) < 15 * tol) return left + right;
        return rec(lo, mid, flo, fmid, flmid, d - 1) + rec(mid, hi, fmid, fhi, frmid, d - 1);
    };
    double mid = 0.5 * (a + b);
    return rec(a, b, f(a), f(b), f(mid), depth);
}

/// Transmission zeros from the Rosenbrock pencil via the generalized
/// eigenvalue problem (finite eigenvalues only).
inline std::vector<std::complex<double>> rosenbrock_zeros(const Eigen::MatrixXd& A,
                                                          const Eigen::VectorXd& B,
                                                          const Eigen::RowVectorXd& C, double D) {
    const Eigen::Index n = A.rows();
    Eigen::MatrixXd M(n + 1, n + 1), N = Eigen::MatrixXd::Zero(n + 1, n + 1);
    M.topLeftCorner(n, n) = A;
    M.topRightCorner(n, 1) = B;
    M.bottomLeftCorner(1, n) = C;
    M(n, n) = D;
    N.topLeftCorner(n, n).setIdentity();
    Eigen::GeneralizedEigenSolver<Eigen::MatrixXd> ges(M, N);
    std::vector<std::complex<double>> zeros;
    for (Eigen::Index i = 0; i < ges.alphas().size(); ++i) {
        if (std::abs(ges.betas()(i)) > 1e-8)
            zeros.push_back(ges.alphas()(i) / ges.betas()(i));
    }
    return zeros;
}

/// Deterministic random stable matrix (eigenvalues shifted left).
inline Eigen::MatrixXd random_stable(int n, std::mt19937& rng, double margin = 0.5) {
    std::normal_distribution<double> gauss(0.0, 1.0);
    Eigen::MatrixXd M(n, n);
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j) M(i, j) = gauss(rng);
    Eigen::EigenSolver<Eigen::MatrixXd> es(M);
    double maxre = -1e300;
    for (Eigen::Index i = 0; i < es.eigenvalues().size(); ++i)
        maxre = std::max(maxre, es.eigenvalues()(i).real());
    return M - (maxre + margin) * Eigen::MatrixXd::Identity(n, n);
}

inline Eigen::MatrixXd random_matrix(int r, int c, std::mt19937& rng) {
    std::normal_distribution<double> gauss(0.0, 1.0);
    Eigen::MatrixXd M(r, c);
    for (int i = 0; i < r; ++i)
        for (int j = 0; j < c; ++j) M(i, j) = gauss(rng);
    return M;
}

} // namespace testsupport
