#include "regpack/numkit.hpp"

#include <Eigen/SVD>
#include <algorithm>
#include <cmath>

namespace regpack::numkit {

void Grid::validate() const {
    if (!(t_end > t_start)) throw InvalidInput("Grid: t_end must exceed t_start");
    if (!(base_step > 0)) throw InvalidInput("Grid: base_step must be positive");
    double prev = t_start;
    for (double b : breakpoints) {
        if (!(b > prev) || !(b < t_end))
            throw InvalidInput("Grid: breakpoints must be strictly increasing and interior");
        prev = b;
    }
}

std::vector<double> Grid::edges() const {
    std::vector<double> e;
    e.reserve(breakpoints.size() + 2);
    e.push_back(t_start);
    e.insert(e.end(), breakpoints.begin(), breakpoints.end());
    e.push_back(t_end);
    return e;
}

Grid make_grid(double t0, double t1, double base_step,
               const std::vector<const TimeVaryingMatrix*>& sources) {
    Grid g;
    g.t_start = t0;
    g.t_end = t1;
    g.base_step = base_step;
    std::vector<double> bps;
    for (const auto* s : sources) {
        if (s && s->valid()) bps = merge_breakpoints(std::move(bps), s->breakpoints_in(t0, t1));
    }
    // keep strictly interior points only
    for (double b : bps) {
        if (b > t0 + 1e-12 && b < t1 - 1e-12) g.breakpoints.push_back(b);
    }
    g.validate();
    return g;
}

MatrixTrajectory::MatrixTrajectory(std::vector<double> times, std::vector<Eigen::MatrixXd> values)
    : times_(std::move(times)), values_(std::move(values)) {
    if (times_.size() != values_.size() || times_.empty())
        throw InvalidInput("MatrixTrajectory: times/values mismatch or empty");
    for (size_t i = 1; i < times_.size(); ++i) {
        if (times_[i] < times_[i - 1]) throw InvalidInput("MatrixTrajectory: times not sorted");
        if (values_[i].rows() != values_[0].rows() || values_[i].cols() != values_[0].cols())
            throw InvalidInput("MatrixTrajectory: inconsistent shapes");
    }
}

bool MatrixTrajectory::is_left_sample(size_t i) const {
    return i + 1 < times_.size() && times_[i + 1] == times_[i];
}

Eigen::MatrixXd MatrixTrajectory::eval(double t) const {
    if (t <= times_.front()) return values_.front();
    if (t >= times_.back()) return values_.back();
    // first index with time > t
    auto it = std::upper_bound(times_.begin(), times_.end(), t);
    size_t hi = static_cast<size_t>(it - times_.begin());
    size_t lo = hi - 1;
    // duplicated time at t: take the right copy (right-continuity)
    if (times_[lo] == t) return values_[lo];
    double t0 = times_[lo], t1 = times_[hi];
    if (t1 == t0) return values_[hi];
    double w = (t - t0) / (t1 - t0);
    return ((1.0 - w) * values_[lo] + w * values_[hi]).eval();
}

Eigen::MatrixXd MatrixTrajectory::eval_left(double t) const {
    if (t <= times_.front()) return values_.front();
    if (t >= times_.back()) {
        // left copy of a duplicated final sample, else the last value
        size_t i = times_.size() - 1;
        while (i > 0 && times_[i - 1] == times_.back()) --i;
        return values_[i];
    }
    auto it = std::lower_bound(times_.begin(), times_.end(), t);
    size_t i = static_cast<size_t>(it - times_.begin());
    if (i < times_.size() && times_[i] == t) return values_[i]; // first (left) copy
    return eval(t);
}

MatrixTrajectory MatrixTrajectory::transform(
    const std::function<Eigen::MatrixXd(double, const Eigen::MatrixXd&, bool)>& f) const {
    std::vector<Eigen::MatrixXd> out;
    out.reserve(values_.size());
    for (size_t i = 0; i < values_.size(); ++i)
        out.push_back(f(times_[i], values_[i], is_left_sample(i)));
    return MatrixTrajectory(times_, std::move(out));
}

double MatrixTrajectory::sup_norm(double from) const {
    double s = 0.0;
    for (size_t i = 0; i < times_.size(); ++i) {
        if (times_[i] >= from) s = std::max(s, values_[i].norm());
    }
    return s;
}

TimeVaryingMatrix MatrixTrajectory::as_time_varying() const {
    MatrixTrajectory self = *this;
    auto breaks = [self](double ta, double tb) {
        std::vector<double> out;
        const auto& ts = self.times();
        for (size_t i = 0; i + 1 < ts.size(); ++i) {
            if (ts[i + 1] == ts[i] && ts[i] > ta && ts[i] < tb) {
                if (out.empty() || ts[i] > out.back()) out.push_back(ts[i]);
            }
        }
        return out;
    };
    return TimeVaryingMatrix(
        rows(), cols(), [self](double t) { return self.eval(t); }, breaks);
}

PinvResult pinv(const Eigen::Ref<const Eigen::MatrixXd>& M, double rel_tol) {
    if (!M.allFinite()) throw InvalidInput("pinv: non-finite entries");
    if (!(rel_tol > 0.0 && rel_tol < 1.0)) throw InvalidInput("pinv: rel_tol must be in (0,1)");
    Eigen::JacobiSVD<Eigen::MatrixXd> svd(M, Eigen::ComputeThinU | Eigen::ComputeThinV);
    const Eigen::VectorXd& sv = svd.singularValues();
    PinvResult out;
    out.singular_values = sv;
    if (sv.size() == 0 || sv(0) <= 0.0) {
        out.pinv = Eigen::MatrixXd::Zero(M.cols(), M.rows());
        out.rank = 0;
        return out;
    }
    double cutoff = rel_tol * sv(0) * static_cast<double>(std::max(M.rows(), M.cols()));
    Eigen::VectorXd inv = Eigen::VectorXd::Zero(sv.size());
    for (Eigen::Index i = 0; i < sv.size(); ++i) {
        if (sv(i) > cutoff) {
            inv(i) = 1.0 / sv(i);
            ++out.rank;
        }
    }
    out.pinv = svd.matrixV() * inv.asDiagonal() * svd.matrixU().transpose();
    return out;
}

namespace {

// Nudge stage times off piece edges so discontinuous evaluators resolve to
// the correct side despite float noise in computed breakpoint times.
double nudge(double span) { return std::max(span * 1e-12, 1e-14); }

} // namespace

MatrixTrajectory integrate_matrix_ode(const MatrixRhs& rhs, const Eigen::MatrixXd& X0,
                                      const Grid& grid) {
    grid.validate();
    if (X0.size() == 0) throw InvalidInput("integrate_matrix_ode: empty initial state");

    std::vector<double> times;
    std::vector<Eigen::MatrixXd> values;
    Eigen::MatrixXd X = X0;
    times.push_back(grid.t_start);
    values.push_back(X);

    auto eval_rhs = [&](double t, const Eigen::MatrixXd& Xc) {
        Eigen::MatrixXd dX = rhs(t, Xc);
        if (!dX.allFinite()) throw IntegrationBlowup("integrate_matrix_ode: non-finite rhs", t);
        return dX;
    };

    const auto edges = grid.edges();
    for (size_t p = 0; p + 1 < edges.size(); ++p) {
        double e0 = edges[p], e1 = edges[p + 1];
        double span = e1 - e0;
        long nsteps = std::max<long>(1, static_cast<long>(std::ceil(span / grid.base_step - 1e-12)));
        double h = span / static_cast<double>(nsteps);
        double nd = nudge(span);
        if (p > 0) {
            // right-value copy at the breakpoint (state is continuous)
            times.push_back(e0);
            values.push_back(X);
        }
        for (long i = 0; i < nsteps; ++i) {
            double t = e0 + static_cast<double>(i) * h;
            double t0s = (i == 0) ? t + nd : t;
            double t1s = (i == nsteps - 1) ? e1 - nd : t + h;
            Eigen::MatrixXd k1 = eval_rhs(t0s, X);
            Eigen::MatrixXd k2 = eval_rhs(t + 0.5 * h, X + 0.5 * h * k1);
            Eigen::MatrixXd k3 = eval_rhs(t + 0.5 * h, X + 0.5 * h * k2);
            Eigen::MatrixXd k4 = eval_rhs(t1s, X + h * k3);
            X = X + (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
            if (!X.allFinite()) throw IntegrationBlowup("integrate_matrix_ode: state blowup", t + h);
            times.push_back((i == nsteps - 1) ? e1 : t + h);
            values.push_back(X);
        }
    }
    return MatrixTrajectory(std::move(times), std::move(values));
}

std::vector<MatrixTrajectory> repeated_integrals(const TimeVaryingMatrix& f, int k, double t0,
                                                 const Grid& grid) {
    if (k < 1) throw InvalidInput("repeated_integrals: k must be >= 1");
    if (std::abs(grid.t_start - t0) > 1e-12)
        throw InvalidInput("repeated_integrals: grid must start at t0");
    const Eigen::Index r = f.rows(), c = f.cols();
    auto rhs = [&f, k, r, c](double t, const Eigen::MatrixXd& X) {
        Eigen::MatrixXd dX(X.rows(), X.cols());
        dX.topRows(r) = f(t);
        for (int j = 1; j < k; ++j) dX.middleRows(j * r, r) = X.middleRows((j - 1) * r, r);
        return dX;
    };
    Eigen::MatrixXd X0 = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(k) * r, c);
    MatrixTrajectory stacked = integrate_matrix_ode(rhs, X0, grid);

    std::vector<MatrixTrajectory> levels;
    levels.reserve(static_cast<size_t>(k));
    for (int j = 0; j < k; ++j) {
        levels.push_back(stacked.transform([j, r](double, const Eigen::MatrixXd& X, bool) {
            return X.middleRows(j * r, r).eval();
        }));
    }
    return levels;
}

double fit_slope(const std::vector<double>& x, const std::vector<double>& y) {
    if (x.size() != y.size() || x.size() < 2) throw InvalidInput("fit_slope: need >= 2 points");
    double n = static_cast<double>(x.size());
    double sx = 0, sy = 0, sxx = 0, sxy = 0;
    for (size_t i = 0; i < x.size(); ++i) {
        sx += x[i];
        sy += y[i];
        sxx += x[i] * x[i];
        sxy += x[i] * y[i];
    }
    double denom = n * sxx - sx * sx;
    if (denom == 0.0) return 0.0;
    return (n * sxy - sx * sy) / denom;
}

} // namespace regpack::numkit
