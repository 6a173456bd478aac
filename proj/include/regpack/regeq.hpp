#pragma once

#include "regpack/plant.hpp"

namespace regpack::regeq {

/// Bounded steady response of a stable system driven through the generator:
/// Psi_g solves Psi' = A_g Psi + B_g Lambda and Pi_g = Psi_g Lambda^-1.
struct MomentSolution {
    numkit::MatrixTrajectory Pi_g;
    numkit::MatrixTrajectory Psi_g;
    double decay_estimate = 0.0; // fitted rate of the unforced transition (positive = stable)
};

MomentSolution moment_solve(const TimeVaryingMatrix& A_g, const TimeVaryingMatrix& B_g,
                            const exo::ExplicitExosystem& exosys, const Eigen::MatrixXd& Psi0,
                            const numkit::Grid& grid);

/// Bounded solution of the regulator equations in differential-algebraic
/// form: Psi_x' = A Psi_x + (B Delta + P) Lambda, 0 = C Psi_x + (D Delta + Q) Lambda.
struct RegulatorSolution {
    numkit::MatrixTrajectory Pi_x;     // n x nu
    numkit::MatrixTrajectory Delta;    // 1 x nu
    numkit::MatrixTrajectory Psi_x;    // n x nu
    double t_hat = 0.0;
    numkit::MatrixTrajectory residual; // 1 x 1, normalized output-constraint defect
    double sup_Pi = 0.0;
    double sup_Delta = 0.0;
    int relative_degree = 0;
};

struct RegeqOptions {
    /// Skip the minimum-phase / non-resonance gate (used when the caller has
    /// already validated it).
    bool skip_solvability_gate = false;
    /// Growth threshold on ||Pi_x|| over the trailing half of the horizon.
    double growth_slope_tol = 1e-2;
};

RegulatorSolution solve_regulator_equations(const plant::LtiPlant& plant,
                                            const exo::ExplicitExosystem& exosys,
                                            const numkit::Grid& grid, double t_hat,
                                            const RegeqOptions& options = {});

/// Per-sample defects of the two regulator equations, normalized by
/// (1 + ||Q Lambda(t)||). The differential defect uses finite differences of
/// Psi_x with a stencil kept inside smooth pieces.
struct DaeResidual {
    numkit::MatrixTrajectory differential; // 1 x 1
    numkit::MatrixTrajectory algebraic;    // 1 x 1
};

DaeResidual dae_residual(const RegulatorSolution& sol, const plant::LtiPlant& plant,
                         const exo::ExplicitExosystem& exosys);

struct FeasibilityReport {
    // output-channel jump scan (a jump with D = 0 makes the problem infeasible)
    double max_q_lambda_jump = 0.0;
    double jump_breakpoint = 0.0;
    bool continuity_ok = false;
    // Assumption 3
    exo::Assumption3Report assumption3;
    // smoothness degree heuristic (derivative order at which the forced
    // output chain stays continuous across breakpoints)
    int j_star = 0;
    bool j_star_is_smooth_bound = false; // no breakpoints found: report "smooth"
    int relative_degree = 0;
    bool degree_ok = false; // r <= j* + 1
    bool feasible = false;
};

FeasibilityReport feasibility_report(const plant::LtiPlant& plant,
                                     const exo::ExplicitExosystem& exosys, double horizon);

} // namespace regpack::regeq
