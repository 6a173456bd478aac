#pragma once

#include <Eigen/Dense>
#include <functional>
#include <vector>

#include "regpack/errors.hpp"
#include "regpack/time_varying.hpp"

namespace regpack::numkit {

/// Integration grid: fixed base step plus the breakpoint times a step must
/// never straddle.
struct Grid {
    double t_start = 0.0;
    double t_end = 0.0;
    double base_step = 1e-3;
    std::vector<double> breakpoints; // strictly increasing, inside (t_start, t_end)

    void validate() const;
    /// t_start, interior breakpoints, t_end.
    std::vector<double> edges() const;
};

/// Grid over [t0, t1] whose breakpoints are collected from the given sources.
Grid make_grid(double t0, double t1, double base_step,
               const std::vector<const TimeVaryingMatrix*>& sources = {});

/// Sampled matrix-valued function. Sample times are non-decreasing; a
/// duplicated time marks a breakpoint, with the first copy holding the
/// left-limit and the second the right value. Evaluation is piecewise linear
/// within smooth pieces and right-continuous at breakpoints.
class MatrixTrajectory {
public:
    MatrixTrajectory() = default;
    MatrixTrajectory(std::vector<double> times, std::vector<Eigen::MatrixXd> values);

    Eigen::Index rows() const { return values_.empty() ? 0 : values_.front().rows(); }
    Eigen::Index cols() const { return values_.empty() ? 0 : values_.front().cols(); }
    size_t size() const { return times_.size(); }
    bool empty() const { return times_.empty(); }
    double t_front() const { return times_.front(); }
    double t_back() const { return times_.back(); }

    const std::vector<double>& times() const { return times_; }
    const Eigen::MatrixXd& value(size_t i) const { return values_[i]; }
    double time(size_t i) const { return times_[i]; }
    /// True for the first copy of a duplicated (breakpoint) time.
    bool is_left_sample(size_t i) const;

    Eigen::MatrixXd eval(double t) const;
    Eigen::MatrixXd eval_left(double t) const;

    /// New trajectory with f applied per sample. `left` tells f whether the
    /// sample is the left-limit copy at a breakpoint.
    MatrixTrajectory transform(
        const std::function<Eigen::MatrixXd(double, const Eigen::MatrixXd&, bool)>& f) const;

    /// Largest Frobenius norm over samples with t >= from.
    double sup_norm(double from = -std::numeric_limits<double>::infinity()) const;

    /// Interpolating TimeVaryingMatrix view; breakpoints are the duplicated
    /// sample times.
    TimeVaryingMatrix as_time_varying() const;

private:
    std::vector<double> times_;
    std::vector<Eigen::MatrixXd> values_;
};

struct PinvResult {
    Eigen::MatrixXd pinv;
    Eigen::Index rank = 0;
    Eigen::VectorXd singular_values;
};

/// Moore-Penrose pseudoinverse by SVD. Singular values below
/// rel_tol * sigma_max * max(rows, cols) are treated as zero.
PinvResult pinv(const Eigen::Ref<const Eigen::MatrixXd>& M, double rel_tol = 1e-10);

using MatrixRhs = std::function<Eigen::MatrixXd(double, const Eigen::MatrixXd&)>;

/// Fixed-step RK4 with mandatory breakpoint splitting; the returned
/// trajectory is the Caratheodory solution sampled at every step, with
/// duplicated samples at each interior breakpoint.
MatrixTrajectory integrate_matrix_ode(const MatrixRhs& rhs, const Eigen::MatrixXd& X0,
                                      const Grid& grid);

/// Repeated integrals I^[1]..I^[k] of f from t0, computed as one integrator
/// chain; all levels vanish at t0.
std::vector<MatrixTrajectory> repeated_integrals(const TimeVaryingMatrix& f, int k, double t0,
                                                 const Grid& grid);

/// Least-squares slope of y over x (used by the trend / decay monitors).
double fit_slope(const std::vector<double>& x, const std::vector<double>& y);

} // namespace regpack::numkit
