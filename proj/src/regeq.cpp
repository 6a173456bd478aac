#include "regpack/regeq.hpp"

#include <Eigen/LU>
#include <cmath>

namespace regpack::regeq {

namespace {

using numkit::MatrixTrajectory;

// Pi = Psi * Lambda(t)^-1 by linear solve at each sample; left samples use
// the left-limit of Lambda.
MatrixTrajectory right_divide_by_lambda(const MatrixTrajectory& Psi,
                                        const TimeVaryingMatrix& Lambda) {
    return Psi.transform([&Lambda](double t, const Eigen::MatrixXd& X, bool left) {
        Eigen::MatrixXd L = left ? Lambda.left_value(t) : Lambda(t);
        Eigen::PartialPivLU<Eigen::MatrixXd> lu(L.transpose());
        return lu.solve(X.transpose()).transpose().eval();
    });
}

double unforced_decay_rate(const TimeVaryingMatrix& A_g, const numkit::Grid& grid) {
    const Eigen::Index g = A_g.rows();
    auto rhs = [&A_g](double t, const Eigen::MatrixXd& X) { return (A_g(t) * X).eval(); };
    MatrixTrajectory Phi =
        numkit::integrate_matrix_ode(rhs, Eigen::MatrixXd::Identity(g, g), grid);
    std::vector<double> ts, logn;
    for (size_t i = 0; i < Phi.size(); ++i) {
        ts.push_back(Phi.time(i));
        logn.push_back(std::log(std::max(Phi.value(i).norm(), 1e-300)));
    }
    size_t half = ts.size() / 2;
    std::vector<double> xs(ts.begin() + half, ts.end());
    std::vector<double> ys(logn.begin() + half, logn.end());
    return -numkit::fit_slope(xs, ys);
}

} // namespace

MomentSolution moment_solve(const TimeVaryingMatrix& A_g, const TimeVaryingMatrix& B_g,
                            const exo::ExplicitExosystem& exosys, const Eigen::MatrixXd& Psi0,
                            const numkit::Grid& grid) {
    if (A_g.rows() != A_g.cols()) throw InvalidInput("moment_solve: A_g must be square");
    if (B_g.rows() != A_g.rows() || B_g.cols() != exosys.nu)
        throw InvalidInput("moment_solve: B_g shape mismatch");
    if (Psi0.rows() != A_g.rows() || Psi0.cols() != exosys.nu)
        throw InvalidInput("moment_solve: Psi0 shape mismatch");

    MomentSolution out;
    out.decay_estimate = unforced_decay_rate(A_g, grid);
    if (out.decay_estimate <= 1e-6)
        throw StabilityViolation("moment_solve: unforced system is not decaying");

    TimeVaryingMatrix Lambda = exosys.Lambda;
    auto rhs = [&](double t, const Eigen::MatrixXd& X) {
        return (A_g(t) * X + B_g(t) * Lambda(t)).eval();
    };
    out.Psi_g = numkit::integrate_matrix_ode(rhs, Psi0, grid);
    out.Pi_g = right_divide_by_lambda(out.Psi_g, Lambda);
    return out;
}

RegulatorSolution solve_regulator_equations(const plant::LtiPlant& pl,
                                            const exo::ExplicitExosystem& exosys,
                                            const numkit::Grid& grid, double t_hat,
                                            const RegeqOptions& options) {
    pl.validate();
    if (pl.nu() != exosys.nu) throw InvalidInput("solve_regulator_equations: nu mismatch");
    if (std::abs(grid.t_start - t_hat) > 1e-12)
        throw InvalidInput("solve_regulator_equations: grid must start at t_hat");

    const int r = relative_degree(pl);
    if (r >= 2)
        throw Unsupported("solve_regulator_equations: relative degree >= 2 has no bounded "
                          "solution path for non-smooth forcing");

    TimeVaryingMatrix Lambda = exosys.Lambda;
    RegulatorSolution sol;
    sol.t_hat = t_hat;
    sol.relative_degree = r;

    if (r == 0) {
        // Psi' = A_pi Psi + P_pi Lambda with A_pi = A - B C / D, then
        // Delta = -(C Pi_x + Q)/D annihilates the output row.
        Eigen::MatrixXd A_pi = pl.A - pl.B * pl.C / pl.D;
        Eigen::MatrixXd P_pi = pl.P - pl.B * pl.Q / pl.D;
        auto rhs = [&](double t, const Eigen::MatrixXd& X) {
            return (A_pi * X + P_pi * Lambda(t)).eval();
        };
        sol.Psi_x = numkit::integrate_matrix_ode(
            rhs, Eigen::MatrixXd::Zero(pl.n(), pl.nu()), grid);
        sol.Pi_x = right_divide_by_lambda(sol.Psi_x, Lambda);
        sol.Delta = sol.Pi_x.transform([&pl](double, const Eigen::MatrixXd& Pi, bool) {
            return ((-1.0 / pl.D) * (pl.C * Pi + pl.Q)).eval();
        });
    } else {
        plant::NormalForm nf = normal_form(pl);
        if (!options.skip_solvability_gate && !nf.minimum_phase) {
            auto nr = plant::nonresonance_check(pl, exosys, grid.t_end - grid.t_start,
                                                grid.base_step);
            if (!nr.pass)
                throw NonResonanceSuspected(
                    "solve_regulator_equations: not minimum phase and non-resonance "
                    "diagnostic failed");
        }
        TimeVaryingMatrix QL = exo::q_lambda(exosys, pl.Q);

        Eigen::MatrixXd G1 = nf.G1;
        auto rhs = [&](double t, const Eigen::MatrixXd& X) {
            return (nf.A11 * X + G1 * Lambda(t)).eval();
        };
        MatrixTrajectory Psi_z = numkit::integrate_matrix_ode(
            rhs, Eigen::MatrixXd::Zero(pl.n() - 1, pl.nu()), grid);
        MatrixTrajectory Pi_z = right_divide_by_lambda(Psi_z, Lambda);

        // Delta = -(Q_Lambda + G2 + A21 Pi_z) / b
        sol.Delta = Pi_z.transform([&](double t, const Eigen::MatrixXd& Pz, bool left) {
            Eigen::MatrixXd ql = left ? QL.left_value(t) : QL(t);
            return ((-1.0 / nf.b) * (ql + nf.G2 + nf.A21 * Pz)).eval();
        });
        // Psi_x = T^-1 [Psi_z; -Q Lambda], Pi_x = T^-1 [Pi_z; -Q]
        sol.Psi_x = Psi_z.transform([&](double t, const Eigen::MatrixXd& Pz, bool left) {
            Eigen::MatrixXd L = left ? Lambda.left_value(t) : Lambda(t);
            Eigen::MatrixXd theta(pl.n(), pl.nu());
            theta.topRows(pl.n() - 1) = Pz;
            theta.bottomRows(1) = -pl.Q * L;
            return (nf.T_inv * theta).eval();
        });
        sol.Pi_x = Pi_z.transform([&](double, const Eigen::MatrixXd& Pz, bool) {
            Eigen::MatrixXd theta(pl.n(), pl.nu());
            theta.topRows(pl.n() - 1) = Pz;
            theta.bottomRows(1) = -pl.Q;
            return (nf.T_inv * theta).eval();
        });
    }

    // normalized output-constraint defect per sample
    {
        const MatrixTrajectory& Psi = sol.Psi_x;
        const MatrixTrajectory& Del = sol.Delta;
        std::vector<Eigen::MatrixXd> res(Psi.size());
        for (size_t i = 0; i < Psi.size(); ++i) {
            double t = Psi.time(i);
            bool left = Psi.is_left_sample(i);
            Eigen::MatrixXd L = left ? Lambda.left_value(t) : Lambda(t);
            Eigen::RowVectorXd defect =
                pl.C * Psi.value(i) + (pl.D * Del.value(i) + pl.Q) * L;
            Eigen::MatrixXd v(1, 1);
            v(0, 0) = defect.norm() / (1.0 + (pl.Q * L).norm());
            res[i] = v;
        }
        sol.residual = MatrixTrajectory(Psi.times(), std::move(res));
    }

    sol.sup_Pi = sol.Pi_x.sup_norm();
    sol.sup_Delta = sol.Delta.sup_norm();
    if (!std::isfinite(sol.sup_Pi) || !std::isfinite(sol.sup_Delta))
        throw NonResonanceSuspected("solve_regulator_equations: unbounded solution monitor");
    // growth monitor over the trailing half
    {
        std::vector<double> ts, ns;
        double mid = 0.5 * (grid.t_start + grid.t_end);
        for (size_t i = 0; i < sol.Pi_x.size(); ++i) {
            if (sol.Pi_x.time(i) >= mid) {
                ts.push_back(sol.Pi_x.time(i));
                ns.push_back(sol.Pi_x.value(i).norm());
            }
        }
        if (ts.size() >= 2 && numkit::fit_slope(ts, ns) >
                                  options.growth_slope_tol * std::max(1.0, sol.sup_Pi))
            throw NonResonanceSuspected("solve_regulator_equations: ||Pi_x|| keeps growing");
    }
    return sol;
}

DaeResidual dae_residual(const RegulatorSolution& sol, const plant::LtiPlant& pl,
                         const exo::ExplicitExosystem& exosys) {
    TimeVaryingMatrix Lambda = exosys.Lambda;
    const auto& Psi = sol.Psi_x;
    const auto& Del = sol.Delta;
    const auto& ts = Psi.times();
    const size_t n = ts.size();

    std::vector<Eigen::MatrixXd> alg(n), dif(n);
    for (size_t i = 0; i < n; ++i) {
        double t = ts[i];
        bool left = Psi.is_left_sample(i);
        Eigen::MatrixXd L = left ? Lambda.left_value(t) : Lambda(t);
        double qn = 1.0 + (pl.Q * L).norm();

        Eigen::RowVectorXd a = pl.C * Psi.value(i) + (pl.D * Del.value(i) + pl.Q) * L;
        Eigen::MatrixXd va(1, 1);
        va(0, 0) = a.norm() / qn;
        alg[i] = va;

        // 5-point (or shorter) finite-difference derivative of Psi_x using
        // only samples inside the same smooth piece
        Eigen::MatrixXd vd(1, 1);
        vd(0, 0) = 0.0;
        long lo1 = -1, lo2 = -1, hi1 = -1, hi2 = -1;
        if (i >= 1 && ts[i - 1] < t) lo1 = static_cast<long>(i - 1);
        if (lo1 > 0 && ts[lo1 - 1] < ts[lo1] && !Psi.is_left_sample(static_cast<size_t>(lo1 - 1)))
            lo2 = lo1 - 1;
        if (i + 1 < n && ts[i + 1] > t) hi1 = static_cast<long>(i + 1);
        if (hi1 > 0 && static_cast<size_t>(hi1) + 1 < n && ts[hi1 + 1] > ts[hi1] &&
            !Psi.is_left_sample(static_cast<size_t>(hi1)))
            hi2 = hi1 + 1;

        Eigen::MatrixXd dPsi;
        if (lo2 >= 0 && hi2 >= 0) {
            double h = ts[hi1] - t;
            dPsi = (-Psi.value(static_cast<size_t>(hi2)) + 8 * Psi.value(static_cast<size_t>(hi1)) -
                    8 * Psi.value(static_cast<size_t>(lo1)) + Psi.value(static_cast<size_t>(lo2))) /
                   (12 * h);
        } else if (lo1 >= 0 && hi1 >= 0) {
            dPsi = (Psi.value(static_cast<size_t>(hi1)) - Psi.value(static_cast<size_t>(lo1))) /
                   (ts[hi1] - ts[lo1]);
        } else {
            dif[i] = vd; // piece edge: skip the differential defect here
            continue;
        }
        Eigen::MatrixXd rhs = pl.A * Psi.value(i) + (pl.B * Del.value(i) + pl.P) * L;
        vd(0, 0) = (dPsi - rhs).norm() / qn;
        dif[i] = vd;
    }
    DaeResidual out;
    out.algebraic = numkit::MatrixTrajectory(ts, std::move(alg));
    out.differential = numkit::MatrixTrajectory(ts, std::move(dif));
    return out;
}

FeasibilityReport feasibility_report(const plant::LtiPlant& pl,
                                     const exo::ExplicitExosystem& exosys, double horizon) {
    FeasibilityReport rep;
    TimeVaryingMatrix Lambda = exosys.Lambda;
    const double t0 = exosys.t0, t1 = exosys.t0 + horizon;

    // (i) jump scan of the output forcing row Q Lambda across breakpoints
    std::vector<double> bps = Lambda.breakpoints_in(t0, t1);
    for (double b : bps) {
        Eigen::RowVectorXd jump = pl.Q * (Lambda(b) - Lambda.left_value(b));
        if (jump.norm() > rep.max_q_lambda_jump) {
            rep.max_q_lambda_jump = jump.norm();
            rep.jump_breakpoint = b;
        }
    }
    rep.continuity_ok = rep.max_q_lambda_jump <= 1e-9;

    // (ii) Assumption 3 boundedness of Q_Lambda
    rep.assumption3 = exo::assumption3_report(exosys, pl.Q, horizon);

    rep.relative_degree = relative_degree(pl);

    // (iii) smoothness degree j* of V_n = sum_i I^[i][C A^(i-1) P Lambda] + Q Lambda,
    // estimated from one-sided derivative jumps across breakpoints
    const int n = pl.n();
    numkit::Grid grid = numkit::make_grid(t0, t1, 1e-3, {&Lambda});
    TimeVaryingMatrix QLrow = tv_left_multiply(pl.Q, Lambda);
    numkit::MatrixTrajectory Vn = numkit::repeated_integrals(QLrow, 1, t0, grid)
                                      .front()
                                      .transform([&](double t, const Eigen::MatrixXd&, bool left) {
                                          return left ? QLrow.left_value(t) : QLrow(t);
                                      });
    {
        Eigen::RowVectorXd CAP = pl.C;
        for (int i = 1; i <= n; ++i) {
            TimeVaryingMatrix f = tv_left_multiply(CAP * pl.P, Lambda);
            const numkit::MatrixTrajectory top = numkit::repeated_integrals(f, i, t0, grid).back();
            std::vector<Eigen::MatrixXd> vals(Vn.size());
            for (size_t j = 0; j < Vn.size(); ++j) vals[j] = Vn.value(j) + top.value(j);
            Vn = numkit::MatrixTrajectory(Vn.times(), std::move(vals));
            CAP = CAP * pl.A;
        }
    }

    if (bps.empty()) {
        rep.j_star = n; // no non-smooth points on the horizon
        rep.j_star_is_smooth_bound = true;
    } else {
        // one-sided finite-difference derivatives of V_n of increasing order;
        // j* = highest order whose left/right limits agree at every breakpoint
        const int max_order = 3;
        const double h = grid.base_step;
        auto deriv_onesided = [&](double b, int order, int side) {
            std::vector<Eigen::RowVectorXd> f;
            for (int k = 0; k <= order; ++k) {
                double tq = b + side * (static_cast<double>(k) + 0.25) * h;
                f.push_back(side > 0 ? Eigen::RowVectorXd(Vn.eval(tq))
                                     : Eigen::RowVectorXd(Vn.eval_left(tq)));
            }
            for (int o = 0; o < order; ++o)
                for (size_t k = 0; k + 1 < f.size() - static_cast<size_t>(o); ++k)
                    f[k] = (f[k + 1] - f[k]) * (static_cast<double>(side) / h);
            return f[0];
        };
        int jstar = max_order;
        std::vector<double> guard = bps;
        guard.insert(guard.begin(), t0);
        guard.push_back(t1);
        for (size_t bi = 1; bi + 1 < guard.size(); ++bi) {
            double b = guard[bi];
            double room = std::min(b - guard[bi - 1], guard[bi + 1] - b);
            if (room < (max_order + 2) * h) continue; // stencil would leave the piece
            for (int order = 0; order <= max_order; ++order) {
                Eigen::RowVectorXd dr = deriv_onesided(b, order, +1);
                Eigen::RowVectorXd dl = deriv_onesided(b, order, -1);
                double scale = 1.0 + dr.norm() + dl.norm();
                double rel = (dr - dl).norm() / scale;
                double tol = order == 0 ? 1e-6 : 5e-2;
                if (rel > tol) {
                    jstar = std::min(jstar, order - 1);
                    break;
                }
            }
        }
        rep.j_star = jstar;
        rep.j_star_is_smooth_bound = jstar >= max_order;
    }
    rep.degree_ok = rep.j_star_is_smooth_bound || rep.relative_degree <= rep.j_star + 1;

    bool jump_gate = (pl.D != 0.0) || rep.continuity_ok;
    rep.feasible = jump_gate && rep.assumption3.pass && rep.degree_ok;
    return rep;
}

} // namespace regpack::regeq
