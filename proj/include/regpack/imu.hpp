#pragma once

#include "regpack/regeq.hpp"

namespace regpack::imu {

enum class PairForm { Explicit, Implicit };

/// Internal-model pair. Explicit pairs carry a generator-like Phi(t, t0)
/// (invertible, like Lambda); implicit pairs carry the bounded system matrix
/// of a differential realization.
struct InternalModelPair {
    PairForm form = PairForm::Explicit;
    TimeVaryingMatrix Phi; // s x s
    TimeVaryingMatrix Xi;  // 1 x s
    int s = 0;
};

/// Implementable triple (F_im, G_im, H_im(t)). The moment matrix (Pi_M for
/// explicit pairs, M for implicit ones) is kept with its per-sample rank so
/// the constant-rank certificate is auditable.
struct CanonicalRealization {
    Eigen::MatrixXd F_im;           // m x m, Hurwitz
    Eigen::VectorXd G_im;           // m
    numkit::MatrixTrajectory H_im;  // 1 x m
    int m = 0;
    numkit::MatrixTrajectory moment; // m x s (Pi_M or M)
    std::vector<int> rank_profile;   // per sample of `moment`
    int certified_rank = 0;
    double t_hat = 0.0;
    double cert_start = 0.0;         // t_hat + settle window
    double max_defect = 0.0;         // sup ||Xi - H_im * moment|| on the window
    PairForm form = PairForm::Explicit;
};

struct RealizeOptions {
    double pinv_rel_tol = 1e-10;
    /// Defect tolerance ||Xi - H_im * moment|| on the certification window.
    double defect_tol = 1e-6;
    /// Fraction of window samples that must share the modal rank.
    double rank_agreement = 0.99;
    /// H_im hold rule: samples whose rank differs from the certified rank or
    /// whose norm exceeds hold_factor times the certified sup are replaced by
    /// the previous accepted value (zero before the first accepted sample).
    double hold_factor = 10.0;
};

/// Controllable-canonical pair with the given Hurwitz spectrum.
std::pair<Eigen::MatrixXd, Eigen::VectorXd> build_companion(
    const std::vector<std::complex<double>>& eigenvalues);

/// Realize an explicit pair: integrate Psi_M' = F Psi_M + G Xi(t) Phi(t) from
/// Psi_M(t_hat) = 0, take Pi_M = Psi_M Phi^-1 and H_im = Xi Pi_M^+ wherever
/// the rank is the certified one.
CanonicalRealization realize_explicit(const InternalModelPair& pair, const Eigen::MatrixXd& F_im,
                                      const Eigen::VectorXd& G_im, const numkit::Grid& grid,
                                      double t_hat, const RealizeOptions& options = {});

/// Realize an implicit pair: integrate M' = F M - M Phi(t) + G Xi(t) from
/// M(t_hat) = 0; H_im = Xi M^+.
CanonicalRealization realize_implicit(const InternalModelPair& pair, const Eigen::MatrixXd& F_im,
                                      const Eigen::VectorXd& G_im, const numkit::Grid& grid,
                                      double t_hat, const RealizeOptions& options = {});

/// Augmentation-based robust internal model: Delta*(t, mu) = Delta'(t) U'(mu)
/// with the uncertainty span compressed into an orthonormal basis L.
struct AugmentationIM {
    int l = 0;              // columns of Delta'
    int l_prime = 0;        // retained basis size
    Eigen::MatrixXd L;      // (nu*l) x l'
    Eigen::MatrixXd Lbar;   // l x (nu*l')
    TimeVaryingMatrix Delta_prime;
    int q_min = 0;          // nu * l'
};

struct AugmentationResult {
    AugmentationIM im;
    InternalModelPair pair; // explicit: Phi = I_{l'} (x) Lambda, Xi = Delta' Lbar
};

/// Build the reduced augmented pair from sampled U'(mu) matrices (basis by
/// SVD of their vecs) or from an explicitly supplied basis L.
AugmentationResult build_augmented_im(const TimeVaryingMatrix& Delta_prime,
                                      const exo::ExplicitExosystem& exosys,
                                      const std::vector<Eigen::MatrixXd>& U_samples,
                                      const Eigen::MatrixXd* explicit_L = nullptr,
                                      double svd_cutoff = 1e-8);

/// Coordinates of vec(U') in the basis L; embedding initialization of the
/// reduced pair is omega_hat0 = (c (x) I_nu) omega0. Throws BasisIncomplete
/// if U' projects outside Im L.
Eigen::VectorXd augmentation_coordinates(const AugmentationIM& im, const Eigen::MatrixXd& U_prime,
                                         double residual_tol = 1e-6);
Eigen::VectorXd augmentation_embed(const AugmentationIM& im, const Eigen::VectorXd& c_mu,
                                   const Eigen::VectorXd& omega0);

/// Integral-based immersion: bounded coefficients a_1..a_d with
/// F(t) + sum_i a_i(t) I^[i][F](t) = 0 for t >= t_hat.
struct ImmersionIM {
    int d = 0;
    std::vector<numkit::MatrixTrajectory> a; // a_1..a_d, scalar trajectories
    double t_hat = 0.0;
    numkit::MatrixTrajectory residual;       // 1 x 1, relative defect of the identity
    InternalModelPair pair;                  // implicit companion pair
    std::vector<numkit::MatrixTrajectory> integrals; // I^[1]..I^[d] of F
};

struct ImmersionOptions {
    double pinv_rel_tol = 1e-10;
    double residual_tol = 1e-6;  // relative to 1 + ||F(t)||
    double coeff_cap = 1e4;      // boundedness monitor on the coefficients
};

ImmersionIM find_immersion(const TimeVaryingMatrix& F_basis, int d_max,
                           const std::vector<double>& t_hat_grid, const numkit::Grid& grid,
                           const ImmersionOptions& options = {});

/// High-gain error-feedback regulator
///   xi' = (F_im + G_im H_im(t)) xi - k G_im e,  u = H_im(t) xi - k e,
/// with H_im treated as zero before t_hat.
struct ErrorFeedbackRegulator {
    Eigen::MatrixXd F_im;
    Eigen::VectorXd G_im;
    numkit::MatrixTrajectory H_im;
    double k = 0.0;
    int q = 0;
    double t_hat = 0.0;

    Eigen::RowVectorXd H_at(double t) const {
        if (t < t_hat) return Eigen::RowVectorXd::Zero(q);
        return H_im.eval(t);
    }
};

ErrorFeedbackRegulator assemble_error_feedback(const CanonicalRealization& real, double k);

} // namespace regpack::imu
