#pragma once

#include <optional>

#include "regpack/numkit.hpp"
#include "regpack/signals.hpp"

namespace regpack::exo {

/// Explicit exogenous-signal generator: omega(t) = Lambda(t, t0) * omega0.
struct ExplicitExosystem {
    TimeVaryingMatrix Lambda; // nu x nu
    double t0 = 0.0;
    int nu = 0;
    std::optional<double> inverse_bound; // certified sup ||Lambda^-1|| when validated

    Eigen::VectorXd omega(double t, const Eigen::VectorXd& omega0) const {
        return Lambda(t) * omega0;
    }
};

struct InflateOptions {
    /// Right-normalize each block so Lambda(t0, t0) = I exactly; the initial
    /// condition embedding absorbs the block values at t0.
    bool normalize_at_t0 = true;
    double t0 = 0.0;
    /// Companion scaling (Proposition 1 leaves it free).
    double companion_scale = 1.0;
    /// Samples used to certify block determinants stay positive.
    double check_horizon = 30.0;
    int check_samples = 3000;
};

struct InflationResult {
    ExplicitExosystem exosystem;
    Eigen::RowVectorXd P_hat;      // 1 x nu, extends P_row with zeros
    std::vector<int> embedding;    // component i -> coordinate index in omega0
    Eigen::MatrixXd E;             // nu x nu_tilde, omega0 = E * omega_tilde0
};

/// Build an invertible generator from scalar components. Components that
/// vanish somewhere get the 2x2 rotation-like block with their companion;
/// never-vanishing components stay 1x1.
InflationResult inflate_to_invertible(const std::vector<TimeVaryingMatrix>& components,
                                      const std::vector<std::optional<TimeVaryingMatrix>>& companions,
                                      const Eigen::RowVectorXd& P_row,
                                      const InflateOptions& options = {});

struct ExoValidationReport {
    double min_singular_value = 0.0;
    double sup_lambda_norm = 0.0;
    double sup_lambda_inv_norm = 0.0;
    size_t breakpoint_count = 0;
    bool nonsingular = false;
    bool finite_time_bounded = false;
    bool inverse_bounded = false; // trend flag: ||Lambda^-1|| not growing
    bool pass = false;
};

/// Dense-sampling check of the Assumption-1 clauses over [t0, t0 + horizon].
ExoValidationReport validate_exosystem(const ExplicitExosystem& exo, double horizon,
                                       int samples_per_piece = 64);

struct QLambdaOptions {
    double fd_step = 1e-5;       // finite-difference step, clipped inside pieces
    double derivative_cap = 1e6; // beyond this within a piece -> AssumptionViolated
};

/// Q_Lambda(t) = Q * dLambda/dt * Lambda(t)^-1, the forcing row of the
/// output constraint. Uses the analytic piecewise derivative when the
/// generator has one, otherwise central finite differences with a stencil
/// that never crosses a breakpoint.
TimeVaryingMatrix q_lambda(const ExplicitExosystem& exo, const Eigen::RowVectorXd& Q,
                           const QLambdaOptions& options = {});

struct Assumption3Report {
    double sup_q_lambda = 0.0;
    bool bounded = false;
    bool pass = false;
};

Assumption3Report assumption3_report(const ExplicitExosystem& exo, const Eigen::RowVectorXd& Q,
                                     double horizon, double step = 1e-2);

} // namespace regpack::exo
