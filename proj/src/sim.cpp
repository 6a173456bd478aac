#include "regpack/sim.hpp"

#include <Eigen/Eigenvalues>
#include <random>

namespace regpack::sim {

namespace {

using numkit::MatrixTrajectory;

// Largest frozen-dynamics eigenvalue magnitude, sampled over the horizon.
double spectral_radius_estimate(const std::function<Eigen::MatrixXd(double)>& jac,
                                const numkit::Grid& grid) {
    double rho = 0.0;
    const int n_samples = 24;
    for (int i = 0; i <= n_samples; ++i) {
        double t = grid.t_start +
                   (grid.t_end - grid.t_start) * static_cast<double>(i) / n_samples + 1e-9;
        Eigen::EigenSolver<Eigen::MatrixXd> es(jac(std::min(t, grid.t_end - 1e-9)));
        for (Eigen::Index j = 0; j < es.eigenvalues().size(); ++j)
            rho = std::max(rho, std::abs(es.eigenvalues()(j)));
    }
    return rho;
}

struct VectorField {
    std::function<Eigen::VectorXd(double, const Eigen::VectorXd&)> rhs;
    std::function<Eigen::MatrixXd(double)> frozen_jacobian;
};

// RK4 with breakpoint splitting and stability-driven substepping: the output
// is sampled on the grid, the internal step honours the explicit stability
// bound of the stiffest frozen closed-loop matrix.
MatrixTrajectory integrate_loop(const VectorField& vf, const Eigen::VectorXd& z0,
                                const numkit::Grid& grid, const SimOptions& opt) {
    double rho = spectral_radius_estimate(vf.frozen_jacobian, grid);
    int nsub = static_cast<int>(
        std::ceil(grid.base_step * rho * opt.spectral_safety / opt.stability_margin));
    nsub = std::clamp(nsub, 1, opt.max_substeps);

    for (int attempt = 0;; ++attempt) {
        try {
            std::vector<double> times;
            std::vector<Eigen::MatrixXd> values;
            Eigen::VectorXd z = z0;
            times.push_back(grid.t_start);
            values.push_back(z);
            auto edges = grid.edges();
            for (size_t p = 0; p + 1 < edges.size(); ++p) {
                double e0 = edges[p], e1 = edges[p + 1];
                double span = e1 - e0;
                long nsteps =
                    std::max<long>(1, static_cast<long>(std::ceil(span / grid.base_step - 1e-12)));
                double h = span / static_cast<double>(nsteps);
                double nd = std::max(span * 1e-12, 1e-14);
                if (p > 0) {
                    times.push_back(e0);
                    values.push_back(z);
                }
                for (long i = 0; i < nsteps; ++i) {
                    double tg = e0 + static_cast<double>(i) * h;
                    double hs = h / nsub;
                    for (int s = 0; s < nsub; ++s) {
                        double t = tg + s * hs;
                        double ta = (i == 0 && s == 0) ? t + nd : t;
                        double tb = (i == nsteps - 1 && s == nsub - 1) ? e1 - nd : t + hs;
                        Eigen::VectorXd k1 = vf.rhs(ta, z);
                        Eigen::VectorXd k2 = vf.rhs(t + 0.5 * hs, z + 0.5 * hs * k1);
                        Eigen::VectorXd k3 = vf.rhs(t + 0.5 * hs, z + 0.5 * hs * k2);
                        Eigen::VectorXd k4 = vf.rhs(tb, z + hs * k3);
                        z = z + (hs / 6.0) * (k1 + 2 * k2 + 2 * k3 + k4);
                        if (!z.allFinite() || z.norm() > opt.blowup_norm)
                            throw IntegrationBlowup("closed-loop state blowup", t + hs);
                    }
                    times.push_back((i == nsteps - 1) ? e1 : tg + h);
                    values.push_back(z);
                }
            }
            return MatrixTrajectory(std::move(times), std::move(values));
        } catch (const IntegrationBlowup& ex) {
            if (opt.retry_halved && attempt == 0 && 2 * nsub <= opt.max_substeps) {
                nsub *= 2; // distinguishes step-size trouble from genuine instability
                continue;
            }
            throw IntegrationBlowup(
                std::string(ex.what()) +
                    " - substep retry exhausted; the regulator is likely not stabilizing "
                    "(k too small or realization invalid)",
                ex.time);
        }
    }
}

ClosedLoopTrajectory package(const MatrixTrajectory& zs, int n, int q,
                             const std::function<double(double, const Eigen::VectorXd&, bool)>& u_of,
                             const plant::LtiPlant& pl, const TimeVaryingMatrix& Lambda,
                             const Eigen::VectorXd& omega0) {
    ClosedLoopTrajectory out;
    out.t = zs.times();
    out.has_xi = q > 0;
    std::vector<Eigen::MatrixXd> xs(zs.size()), xis(zs.size()), us(zs.size()), es(zs.size()),
        oms(zs.size());
    for (size_t i = 0; i < zs.size(); ++i) {
        double t = zs.time(i);
        bool left = zs.is_left_sample(i);
        Eigen::VectorXd z = zs.value(i);
        Eigen::VectorXd x = z.head(n);
        Eigen::VectorXd om = (left ? Lambda.left_value(t) : Lambda(t)) * omega0;
        double u = u_of(t, z, left);
        double e = pl.C * x + pl.D * u + pl.Q * om;
        xs[i] = x;
        xis[i] = q > 0 ? Eigen::MatrixXd(z.tail(q)) : Eigen::MatrixXd::Zero(0, 1);
        us[i] = Eigen::MatrixXd::Constant(1, 1, u);
        es[i] = Eigen::MatrixXd::Constant(1, 1, e);
        oms[i] = om;
    }
    out.x = MatrixTrajectory(out.t, std::move(xs));
    if (q > 0) out.xi = MatrixTrajectory(out.t, std::move(xis));
    out.u = MatrixTrajectory(out.t, std::move(us));
    out.e = MatrixTrajectory(out.t, std::move(es));
    out.omega = MatrixTrajectory(out.t, std::move(oms));
    return out;
}

DecayReport run_probe(const std::function<Eigen::VectorXd(double, const Eigen::VectorXd&)>& rhs,
                      const std::function<Eigen::MatrixXd(double)>& jac, int dim,
                      const numkit::Grid& grid, int n_initial, unsigned seed,
                      const SimOptions& opt) {
    VectorField vf{rhs, jac};
    DecayReport rep;
    std::mt19937 rng(seed);
    std::normal_distribution<double> gauss(0.0, 1.0);
    rep.monotone = true;
    for (int trial = 0; trial < n_initial; ++trial) {
        Eigen::VectorXd z0(dim);
        for (int i = 0; i < dim; ++i) z0(i) = gauss(rng);
        z0.normalize();
        MatrixTrajectory zs;
        try {
            zs = integrate_loop(vf, z0, grid, opt);
        } catch (const IntegrationBlowup&) {
            rep.fitted_rates.push_back(std::numeric_limits<double>::infinity());
            rep.monotone = false;
            continue;
        }
        std::vector<double> ts, logn;
        for (size_t i = 0; i < zs.size(); ++i) {
            if (zs.time(i) < 0.5 * (grid.t_start + grid.t_end)) continue;
            ts.push_back(zs.time(i));
            logn.push_back(std::log(std::max(zs.value(i).norm(), 1e-300)));
        }
        rep.fitted_rates.push_back(numkit::fit_slope(ts, logn));
        // peak envelope over five tail windows must decrease
        const int windows = 5;
        double prev_peak = std::numeric_limits<double>::infinity();
        double w0 = ts.front(), w1 = ts.back();
        for (int w = 0; w < windows; ++w) {
            double a = w0 + (w1 - w0) * w / windows;
            double b = w0 + (w1 - w0) * (w + 1) / windows;
            double peak = 0.0;
            for (size_t i = 0; i < ts.size(); ++i)
                if (ts[i] >= a && ts[i] < b) peak = std::max(peak, std::exp(logn[i]));
            if (peak > prev_peak * (1.0 + 1e-9)) rep.monotone = false;
            prev_peak = peak;
        }
    }
    rep.pass = rep.monotone;
    for (double r : rep.fitted_rates) rep.pass = rep.pass && r <= -1e-3;
    return rep;
}

} // namespace

RegulationMetrics compute_metrics(const ClosedLoopTrajectory& traj, double tail_fraction,
                                  double settle_threshold, double measure_from) {
    RegulationMetrics m;
    m.settle_threshold = settle_threshold;
    double t0 = traj.t.front(), t1 = traj.t.back();
    m.tail_start = std::max(t1 - (t1 - t0) * tail_fraction, measure_from);
    double last_bad = t0 - 1.0;
    for (size_t i = 0; i < traj.t.size(); ++i) {
        double t = traj.t[i];
        double rel = std::abs(traj.e.value(i)(0, 0)) / (1.0 + traj.omega.value(i).norm());
        m.sup_state = std::max(m.sup_state, traj.x.value(i).norm());
        if (t >= m.tail_start) m.tail_relative_error = std::max(m.tail_relative_error, rel);
        if (t >= measure_from && rel > settle_threshold) last_bad = t;
    }
    m.settled_at = last_bad;
    return m;
}

ClosedLoopTrajectory simulate_full_information(const plant::LtiPlant& pl,
                                               const exo::ExplicitExosystem& exosys,
                                               const regeq::RegulatorSolution& sol,
                                               const Eigen::RowVectorXd& K,
                                               const Eigen::VectorXd& x0,
                                               const Eigen::VectorXd& omega0,
                                               const numkit::Grid& grid,
                                               const SimOptions& options) {
    pl.validate();
    Eigen::MatrixXd Ac = pl.A + pl.B * K;
    if (!plant::is_hurwitz(Ac))
        throw StabilityViolation("simulate_full_information: A + B K is not Hurwitz");

    TimeVaryingMatrix Lambda = exosys.Lambda;
    const int n = pl.n();
    auto feedforward = [&](double t, bool left) -> Eigen::RowVectorXd {
        Eigen::MatrixXd Pi = left ? sol.Pi_x.eval_left(t) : sol.Pi_x.eval(t);
        Eigen::MatrixXd Del = left ? sol.Delta.eval_left(t) : sol.Delta.eval(t);
        return Eigen::RowVectorXd(Del) - K * Pi;
    };
    auto u_of = [&](double t, const Eigen::VectorXd& z, bool left) {
        Eigen::VectorXd om = (left ? Lambda.left_value(t) : Lambda(t)) * omega0;
        return (K * z.head(n) + feedforward(t, left) * om)(0);
    };
    VectorField vf;
    vf.rhs = [&, n](double t, const Eigen::VectorXd& z) {
        Eigen::VectorXd om = Lambda(t) * omega0;
        double u = (K * z.head(n) + feedforward(t, false) * om)(0);
        return (pl.A * z.head(n) + pl.B * u + pl.P * om).eval();
    };
    vf.frozen_jacobian = [&Ac](double) { return Ac; };
    MatrixTrajectory zs = integrate_loop(vf, x0, grid, options);
    return package(zs, n, 0, u_of, pl, Lambda, omega0);
}

ClosedLoopTrajectory simulate_error_feedback(const plant::LtiPlant& pl,
                                             const exo::ExplicitExosystem& exosys,
                                             const imu::ErrorFeedbackRegulator& reg,
                                             const Eigen::VectorXd& x0,
                                             const Eigen::VectorXd& xi0,
                                             const Eigen::VectorXd& omega0,
                                             const numkit::Grid& grid,
                                             std::optional<double> u_zero_before,
                                             const SimOptions& options) {
    pl.validate();
    const int n = pl.n(), q = reg.q;
    if (xi0.size() != q) throw InvalidInput("simulate_error_feedback: xi0 size mismatch");
    TimeVaryingMatrix Lambda = exosys.Lambda;
    const double k = reg.k;

    // with D != 0 the error carries the input algebraically: e (1 + D k) = C x + D H xi + Q om
    auto u_and_e = [&](double t, const Eigen::VectorXd& z, bool left) {
        Eigen::RowVectorXd H = left && t > reg.t_hat ? Eigen::RowVectorXd(reg.H_im.eval_left(t))
                                                     : reg.H_at(t);
        double hxi = (H * z.tail(q))(0);
        Eigen::VectorXd om = (left ? Lambda.left_value(t) : Lambda(t)) * omega0;
        double raw = (pl.C * z.head(n))(0) + (pl.Q * om)(0);
        double e = (raw + pl.D * hxi) / (1.0 + pl.D * k);
        double u = hxi - k * e;
        if (u_zero_before && t < *u_zero_before) {
            u = 0.0;
            e = raw;
        }
        return std::pair<double, double>(u, e);
    };

    VectorField vf;
    vf.rhs = [&, n, q](double t, const Eigen::VectorXd& z) {
        auto [u, e] = u_and_e(t, z, false);
        Eigen::RowVectorXd H = reg.H_at(t);
        Eigen::VectorXd dz(n + q);
        Eigen::VectorXd om = Lambda(t) * omega0;
        dz.head(n) = pl.A * z.head(n) + pl.B * u + pl.P * om;
        dz.tail(q) = (reg.F_im + reg.G_im * H) * z.tail(q) - k * reg.G_im * e;
        return dz;
    };
    vf.frozen_jacobian = [&, n, q](double t) {
        Eigen::RowVectorXd H = reg.H_at(t);
        Eigen::MatrixXd J = Eigen::MatrixXd::Zero(n + q, n + q);
        double gain = 1.0 / (1.0 + pl.D * k);
        J.topLeftCorner(n, n) = pl.A - k * gain * pl.B * pl.C;
        J.topRightCorner(n, q) = pl.B * H * (1.0 - pl.D * k * gain);
        J.bottomLeftCorner(q, n) = -k * gain * reg.G_im * pl.C;
        J.bottomRightCorner(q, q) = reg.F_im + reg.G_im * H * (1.0 - pl.D * k * gain);
        return J;
    };
    Eigen::VectorXd z0(n + q);
    z0 << x0, xi0;
    MatrixTrajectory zs = integrate_loop(vf, z0, grid, options);
    auto u_of = [&](double t, const Eigen::VectorXd& z, bool left) {
        return u_and_e(t, z, left).first;
    };
    return package(zs, n, q, u_of, pl, Lambda, omega0);
}

DecayReport stability_probe(const plant::LtiPlant& pl, const imu::ErrorFeedbackRegulator& reg,
                            const numkit::Grid& grid, int n_initial, unsigned seed) {
    const int n = pl.n(), q = reg.q;
    const double k = reg.k;
    auto rhs = [&, n, q](double t, const Eigen::VectorXd& z) {
        Eigen::RowVectorXd H = reg.H_at(t);
        double hxi = (H * z.tail(q))(0);
        double raw = (pl.C * z.head(n))(0);
        double e = (raw + pl.D * hxi) / (1.0 + pl.D * k);
        double u = hxi - k * e;
        Eigen::VectorXd dz(n + q);
        dz.head(n) = pl.A * z.head(n) + pl.B * u;
        dz.tail(q) = (reg.F_im + reg.G_im * H) * z.tail(q) - k * reg.G_im * e;
        return dz;
    };
    auto jac = [&, n, q](double t) {
        Eigen::RowVectorXd H = reg.H_at(t);
        Eigen::MatrixXd J = Eigen::MatrixXd::Zero(n + q, n + q);
        double gain = 1.0 / (1.0 + pl.D * k);
        J.topLeftCorner(n, n) = pl.A - k * gain * pl.B * pl.C;
        J.topRightCorner(n, q) = pl.B * H * (1.0 - pl.D * k * gain);
        J.bottomLeftCorner(q, n) = -k * gain * reg.G_im * pl.C;
        J.bottomRightCorner(q, q) = reg.F_im + reg.G_im * H * (1.0 - pl.D * k * gain);
        return J;
    };
    SimOptions opt;
    opt.blowup_norm = 1e12; // a diverging probe is a finding, not an error
    opt.retry_halved = false;
    return run_probe(rhs, jac, n + q, grid, n_initial, seed, opt);
}

DecayReport stability_probe_full_information(const plant::LtiPlant& pl,
                                             const Eigen::RowVectorXd& K,
                                             const numkit::Grid& grid, int n_initial,
                                             unsigned seed) {
    Eigen::MatrixXd Ac = pl.A + pl.B * K;
    auto rhs = [Ac](double, const Eigen::VectorXd& z) { return (Ac * z).eval(); };
    auto jac = [Ac](double) { return Ac; };
    SimOptions opt;
    opt.blowup_norm = 1e12;
    opt.retry_halved = false;
    return run_probe(rhs, jac, pl.n(), grid, n_initial, seed, opt);
}

} // namespace regpack::sim
