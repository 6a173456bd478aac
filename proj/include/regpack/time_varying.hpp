#pragma once

#include <Eigen/Dense>
#include <functional>
#include <vector>

#include "regpack/errors.hpp"

namespace regpack {

/// An evaluable, piecewise-continuous matrix-valued function of time.
///
/// Evaluation at a breakpoint returns the right-limit. The left-limit is
/// available through left_value(). breakpoints_in(ta, tb) enumerates the
/// discontinuity / non-differentiability times strictly inside (ta, tb).
/// An optional derivative evaluator is valid within smooth pieces only.
class TimeVaryingMatrix {
public:
    using Eval = std::function<Eigen::MatrixXd(double)>;
    using BreaksIn = std::function<std::vector<double>(double, double)>;

    TimeVaryingMatrix() = default;
    TimeVaryingMatrix(Eigen::Index rows, Eigen::Index cols, Eval eval,
                      BreaksIn breaks = {}, Eval deriv = {})
        : rows_(rows), cols_(cols), eval_(std::move(eval)),
          breaks_(std::move(breaks)), deriv_(std::move(deriv)) {
        if (rows_ <= 0 || cols_ <= 0 || !eval_)
            throw InvalidInput("TimeVaryingMatrix: empty shape or evaluator");
    }

    Eigen::Index rows() const { return rows_; }
    Eigen::Index cols() const { return cols_; }
    bool valid() const { return static_cast<bool>(eval_); }

    Eigen::MatrixXd operator()(double t) const {
        Eigen::MatrixXd v = eval_(t);
        if (v.rows() != rows_ || v.cols() != cols_)
            throw InvalidInput("TimeVaryingMatrix: evaluator shape mismatch");
        return v;
    }

    /// Left-limit approximation: evaluate just before t.
    Eigen::MatrixXd left_value(double t) const { return eval_(t - side_step(t)); }

    std::vector<double> breakpoints_in(double ta, double tb) const {
        if (!breaks_) return {};
        return breaks_(ta, tb);
    }

    bool has_derivative() const { return static_cast<bool>(deriv_); }

    /// Derivative within the current smooth piece (right-limit at edges).
    Eigen::MatrixXd derivative(double t) const {
        if (!deriv_) throw InvalidInput("TimeVaryingMatrix: no derivative evaluator");
        return deriv_(t);
    }

    Eigen::MatrixXd derivative_left(double t) const {
        if (!deriv_) throw InvalidInput("TimeVaryingMatrix: no derivative evaluator");
        return deriv_(t - side_step(t));
    }

    /// Offset used to take one-sided limits; small enough that slope * step
    /// stays below the jump-detection thresholds.
    static double side_step(double t) {
        double eps_scale = 8.0 * std::numeric_limits<double>::epsilon() * std::abs(t);
        return std::max(1e-12, eps_scale);
    }

private:
    Eigen::Index rows_ = 0, cols_ = 0;
    Eval eval_;
    BreaksIn breaks_;
    Eval deriv_;
};

/// Sorted union of two breakpoint lists; near-duplicates (within tol) merged.
std::vector<double> merge_breakpoints(std::vector<double> a, const std::vector<double>& b,
                                      double tol = 1e-10);

TimeVaryingMatrix tv_constant(const Eigen::MatrixXd& value);

/// Pointwise sum and product; breakpoints are unions, derivatives follow the
/// sum/product rule when both factors provide one.
TimeVaryingMatrix tv_sum(const TimeVaryingMatrix& a, const TimeVaryingMatrix& b);
TimeVaryingMatrix tv_product(const TimeVaryingMatrix& a, const TimeVaryingMatrix& b);
TimeVaryingMatrix tv_scale(const TimeVaryingMatrix& a, double s);
TimeVaryingMatrix tv_left_multiply(const Eigen::MatrixXd& M, const TimeVaryingMatrix& a);
TimeVaryingMatrix tv_right_multiply(const TimeVaryingMatrix& a, const Eigen::MatrixXd& M);

/// Horizontal concatenation of equal-height blocks.
TimeVaryingMatrix tv_hstack(const std::vector<TimeVaryingMatrix>& blocks);

/// Block-diagonal assembly.
TimeVaryingMatrix tv_block_diag(const std::vector<TimeVaryingMatrix>& blocks);

/// I_k (x) a(t)  (Kronecker product with a constant identity on the left).
TimeVaryingMatrix tv_kron_identity(int copies, const TimeVaryingMatrix& a);

} // namespace regpack
