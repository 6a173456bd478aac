#include "regpack/exo.hpp"

#include <Eigen/SVD>
#include <cmath>

namespace regpack::exo {

namespace {

// Dense per-piece sample times over [t0, t0+horizon].
std::vector<double> piece_samples(const TimeVaryingMatrix& f, double t0, double t1,
                                  int samples_per_piece) {
    std::vector<double> edges{t0};
    for (double b : f.breakpoints_in(t0, t1)) edges.push_back(b);
    edges.push_back(t1);
    std::vector<double> ts;
    for (size_t p = 0; p + 1 < edges.size(); ++p) {
        double a = edges[p], b = edges[p + 1];
        double nd = std::max((b - a) * 1e-9, 1e-12);
        for (int i = 0; i < samples_per_piece; ++i) {
            double w = static_cast<double>(i) / static_cast<double>(samples_per_piece - 1);
            ts.push_back(a + nd + w * (b - a - 2 * nd));
        }
    }
    return ts;
}

// smallest and largest |f| over dense samples; zeros generally fall between
// samples, so vanish detection below works with the min/max ratio
std::pair<double, double> abs_range_on(const TimeVaryingMatrix& f, double t0, double t1, int n) {
    double lo = std::numeric_limits<double>::infinity(), hi = 0.0;
    for (double t : piece_samples(f, t0, t1, std::max(2, n / 8))) {
        double a = std::abs(f(t)(0, 0));
        lo = std::min(lo, a);
        hi = std::max(hi, a);
    }
    return {lo, hi};
}

} // namespace

InflationResult inflate_to_invertible(const std::vector<TimeVaryingMatrix>& components,
                                      const std::vector<std::optional<TimeVaryingMatrix>>& companions,
                                      const Eigen::RowVectorXd& P_row,
                                      const InflateOptions& options) {
    if (components.empty()) throw InvalidInput("inflate_to_invertible: no components");
    if (companions.size() != components.size())
        throw InvalidInput("inflate_to_invertible: companions list length mismatch");
    if (P_row.size() != static_cast<Eigen::Index>(components.size()))
        throw InvalidInput("inflate_to_invertible: P_row length mismatch");
    for (const auto& c : components)
        if (c.rows() != 1 || c.cols() != 1)
            throw InvalidInput("inflate_to_invertible: components must be scalar signals");

    const double t0 = options.t0;
    const double t1 = t0 + options.check_horizon;
    const double vanish_rel = 1e-3; // fraction of the signal scale counting as "vanishes"

    std::vector<TimeVaryingMatrix> blocks;
    std::vector<int> embedding;
    int nu = 0;
    for (size_t i = 0; i < components.size(); ++i) {
        const auto& phi = components[i];
        auto [lo, hi] = abs_range_on(phi, t0, t1, options.check_samples);
        if (lo > vanish_rel * hi && hi > 0.0) {
            blocks.push_back(phi);
            embedding.push_back(nu);
            nu += 1;
            continue;
        }
        if (!companions[i])
            throw NotInvertible("inflate_to_invertible: component " + std::to_string(i) +
                                " vanishes and has no companion");
        TimeVaryingMatrix phat = tv_scale(*companions[i], options.companion_scale);
        // [[phi, -phat], [phat, phi]]
        std::vector<TimeVaryingMatrix> row0{phi, tv_scale(phat, -1.0)};
        std::vector<TimeVaryingMatrix> row1{phat, phi};
        TimeVaryingMatrix top = tv_hstack(row0), bot = tv_hstack(row1);
        auto eval = [top, bot](double t) {
            Eigen::MatrixXd out(2, 2);
            out.row(0) = top(t);
            out.row(1) = bot(t);
            return out;
        };
        TimeVaryingMatrix::Eval deriv;
        if (top.has_derivative() && bot.has_derivative())
            deriv = [top, bot](double t) {
                Eigen::MatrixXd out(2, 2);
                out.row(0) = top.derivative(t);
                out.row(1) = bot.derivative(t);
                return out;
            };
        TimeVaryingMatrix block(2, 2, eval,
                                [top](double ta, double tb) { return top.breakpoints_in(ta, tb); },
                                std::move(deriv));
        // block determinant phi^2 + phat^2 must stay away from zero
        double det_lo = std::numeric_limits<double>::infinity(), scale_hi = 0.0;
        for (double t : piece_samples(block, t0, t1, 64)) {
            Eigen::MatrixXd M = block(t);
            double det = M(0, 0) * M(0, 0) + M(1, 0) * M(1, 0);
            det_lo = std::min(det_lo, det);
            scale_hi = std::max(scale_hi, M.norm());
        }
        if (det_lo <= vanish_rel * vanish_rel * scale_hi * scale_hi)
            throw NotInvertible("inflate_to_invertible: companion vanishes with component " +
                                std::to_string(i));
        blocks.push_back(block);
        embedding.push_back(nu);
        nu += 2;
    }

    TimeVaryingMatrix Lambda = tv_block_diag(blocks);
    Eigen::MatrixXd E_raw = Eigen::MatrixXd::Zero(nu, static_cast<Eigen::Index>(components.size()));
    Eigen::RowVectorXd P_hat = Eigen::RowVectorXd::Zero(nu);
    for (size_t i = 0; i < components.size(); ++i) {
        E_raw(embedding[i], static_cast<Eigen::Index>(i)) = 1.0;
        P_hat(embedding[i]) = P_row(static_cast<Eigen::Index>(i));
    }

    Eigen::MatrixXd E = E_raw;
    if (options.normalize_at_t0) {
        Eigen::MatrixXd N = Lambda(t0);
        Eigen::PartialPivLU<Eigen::MatrixXd> lu(N);
        Eigen::MatrixXd Ninv = lu.solve(Eigen::MatrixXd::Identity(nu, nu));
        Lambda = tv_right_multiply(Lambda, Ninv);
        E = N * E_raw;
    }

    InflationResult out;
    out.exosystem = ExplicitExosystem{Lambda, t0, nu, std::nullopt};
    out.P_hat = P_hat;
    out.embedding = std::move(embedding);
    out.E = std::move(E);
    return out;
}

ExoValidationReport validate_exosystem(const ExplicitExosystem& exo, double horizon,
                                       int samples_per_piece) {
    if (!(horizon > 0)) throw InvalidInput("validate_exosystem: horizon must be positive");
    const double t0 = exo.t0, t1 = exo.t0 + horizon;
    ExoValidationReport rep;
    rep.breakpoint_count = exo.Lambda.breakpoints_in(t0, t1).size();

    std::vector<double> ts = piece_samples(exo.Lambda, t0, t1, std::max(2, samples_per_piece));
    std::vector<double> inv_ts, inv_log;
    rep.min_singular_value = std::numeric_limits<double>::infinity();
    for (double t : ts) {
        Eigen::JacobiSVD<Eigen::MatrixXd> svd(exo.Lambda(t));
        double smax = svd.singularValues()(0);
        double smin = svd.singularValues()(svd.singularValues().size() - 1);
        rep.sup_lambda_norm = std::max(rep.sup_lambda_norm, smax);
        rep.min_singular_value = std::min(rep.min_singular_value, smin);
        double inv_norm = smin > 0 ? 1.0 / smin : std::numeric_limits<double>::infinity();
        rep.sup_lambda_inv_norm = std::max(rep.sup_lambda_inv_norm, inv_norm);
        inv_ts.push_back(t);
        inv_log.push_back(std::log(std::max(inv_norm, 1e-300)));
    }
    rep.nonsingular = rep.min_singular_value > 1e-9;
    rep.finite_time_bounded = std::isfinite(rep.sup_lambda_norm);
    // growth trend of ||Lambda^-1|| over the last half of the horizon
    size_t half = inv_ts.size() / 2;
    std::vector<double> xs(inv_ts.begin() + half, inv_ts.end());
    std::vector<double> ys(inv_log.begin() + half, inv_log.end());
    double slope = numkit::fit_slope(xs, ys);
    rep.inverse_bounded = std::isfinite(rep.sup_lambda_inv_norm) && slope < 1e-3;
    rep.pass = rep.nonsingular && rep.finite_time_bounded && rep.inverse_bounded;
    return rep;
}

TimeVaryingMatrix q_lambda(const ExplicitExosystem& exo, const Eigen::RowVectorXd& Q,
                           const QLambdaOptions& options) {
    if (Q.size() != exo.nu) throw InvalidInput("q_lambda: Q has wrong width");
    TimeVaryingMatrix Lambda = exo.Lambda;
    Eigen::RowVectorXd Qc = Q;
    const double cap = options.derivative_cap;
    const double h = options.fd_step;

    auto qdl = [Lambda, Qc, h](double t) -> Eigen::RowVectorXd {
        if (Lambda.has_derivative()) return Qc * Lambda.derivative(t);
        // finite differences with a stencil that never crosses a breakpoint
        auto f = [&](double s) -> Eigen::RowVectorXd { return Qc * Lambda(s); };
        std::vector<double> near = Lambda.breakpoints_in(t - 2 * h, t + 2 * h);
        bool left_clear = true, right_clear = true;
        for (double b : near) {
            if (b <= t && b > t - 1.25 * h) left_clear = false;
            if (b > t && b <= t + 1.25 * h) right_clear = false;
        }
        if (left_clear && right_clear) return (f(t + h) - f(t - h)) / (2 * h);
        if (right_clear) return (f(t + h) - f(t)) / h;
        if (left_clear) return (f(t) - f(t - h)) / h;
        return Eigen::RowVectorXd::Zero(Qc.size()); // piece narrower than the stencil
    };

    auto eval = [Lambda, Qc, qdl, cap](double t) {
        Eigen::RowVectorXd num = qdl(t);
        Eigen::PartialPivLU<Eigen::MatrixXd> lu(Lambda(t).transpose());
        Eigen::RowVectorXd out = lu.solve(num.transpose()).transpose();
        if (!out.allFinite() || out.norm() > cap)
            throw AssumptionViolated("q_lambda: derivative estimate exceeds cap (Assumption 3)");
        return Eigen::MatrixXd(out);
    };
    return TimeVaryingMatrix(1, exo.nu, eval,
                             [Lambda](double ta, double tb) { return Lambda.breakpoints_in(ta, tb); });
}

Assumption3Report assumption3_report(const ExplicitExosystem& exo, const Eigen::RowVectorXd& Q,
                                     double horizon, double step) {
    Assumption3Report rep;
    TimeVaryingMatrix QL = q_lambda(exo, Q);
    try {
        for (double t : piece_samples(QL, exo.t0, exo.t0 + horizon,
                                      std::max(2, static_cast<int>(1.0 / step))))
            rep.sup_q_lambda = std::max(rep.sup_q_lambda, QL(t).norm());
        rep.bounded = std::isfinite(rep.sup_q_lambda);
    } catch (const AssumptionViolated&) {
        rep.bounded = false;
    }
    rep.pass = rep.bounded;
    return rep;
}

} // namespace regpack::exo
