#pragma once

#include "regpack/exo.hpp"
#include "regpack/numkit.hpp"

namespace regpack::plant {

/// SISO LTI plant driven by an exogenous signal:
///   x' = A x + B u + P omega,  e = C x + D u + Q omega.
struct LtiPlant {
    Eigen::MatrixXd A;     // n x n
    Eigen::VectorXd B;     // n
    Eigen::RowVectorXd C;  // 1 x n
    double D = 0.0;
    Eigen::MatrixXd P;     // n x nu
    Eigen::RowVectorXd Q;  // 1 x nu

    int n() const { return static_cast<int>(A.rows()); }
    int nu() const { return static_cast<int>(P.cols()); }

    /// Dimension consistency plus a PBH stabilizability check on the
    /// closed-right-half-plane eigenvalues of A.
    void validate() const;
};

/// Smallest r with C A^(r-1) B != 0; r = 0 when D != 0.
int relative_degree(const LtiPlant& plant);

/// Relative-degree-one coordinates theta = T x with T = [T1; C], T1 an
/// orthonormal basis of the orthogonal complement of B (so the z-rows carry
/// no input and A11 owns the transmission zeros).
struct NormalForm {
    Eigen::MatrixXd T;      // n x n, rows [T1; C]
    Eigen::MatrixXd T_inv;
    Eigen::MatrixXd A11;    // (n-1) x (n-1) zero dynamics
    Eigen::MatrixXd A12;    // (n-1) x 1
    Eigen::RowVectorXd A21; // 1 x (n-1)
    double A22 = 0.0;
    double b = 0.0;         // high-frequency gain C B
    Eigen::MatrixXd P1;     // (n-1) x nu
    Eigen::RowVectorXd P2;  // 1 x nu
    Eigen::MatrixXd G1;     // P1 - A12 Q
    Eigen::RowVectorXd G2;  // P2 - A22 Q
    Eigen::VectorXcd zero_spectrum; // eigenvalues of A11
    bool minimum_phase = false;
};

NormalForm normal_form(const LtiPlant& plant);

struct NonresonanceReport {
    double sup_omega_norm = 0.0;  // sup_t ||Omega(t)||_F over the horizon
    double tail_slope = 0.0;      // least-squares growth of ||Omega|| late in the horizon
    bool bounded_trend = false;
    bool pass = false;
    std::vector<double> sample_times;
    std::vector<double> omega_norms;
};

/// Finite-horizon diagnostic for the non-smooth non-resonance condition:
/// Omega(t) = int (Lambda(tau) Lambda(t)^-1)^T (x) exp(A_z (t-tau)) dtau must
/// stay bounded. Columns of Omega are moments of the zero-dynamics filter
/// driven through the generator, so one ODE sweep per basis matrix suffices.
NonresonanceReport nonresonance_check(const LtiPlant& plant, const exo::ExplicitExosystem& exosys,
                                      double horizon, double step = 1e-3);

/// State feedback K with sigma(A + B K) at the requested poles (Ackermann).
Eigen::RowVectorXd place_poles(const Eigen::MatrixXd& A, const Eigen::VectorXd& B,
                               const std::vector<std::complex<double>>& poles);

/// Real coefficients of prod (s - root_i); roots must be conjugate-closed.
Eigen::VectorXd poly_from_roots(const std::vector<std::complex<double>>& roots);

bool is_hurwitz(const Eigen::MatrixXd& M, double margin = 0.0);

} // namespace regpack::plant
