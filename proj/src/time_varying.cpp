#include "regpack/time_varying.hpp"

#include <algorithm>

namespace regpack {

std::vector<double> merge_breakpoints(std::vector<double> a, const std::vector<double>& b,
                                      double tol) {
    a.insert(a.end(), b.begin(), b.end());
    std::sort(a.begin(), a.end());
    std::vector<double> out;
    for (double t : a) {
        if (out.empty() || t - out.back() > tol) out.push_back(t);
    }
    return out;
}

namespace {

TimeVaryingMatrix::BreaksIn merged_breaks(const TimeVaryingMatrix& a, const TimeVaryingMatrix& b) {
    return [a, b](double ta, double tb) {
        return merge_breakpoints(a.breakpoints_in(ta, tb), b.breakpoints_in(ta, tb));
    };
}

} // namespace

TimeVaryingMatrix tv_constant(const Eigen::MatrixXd& value) {
    Eigen::MatrixXd v = value;
    return TimeVaryingMatrix(
        v.rows(), v.cols(), [v](double) { return v; },
        [](double, double) { return std::vector<double>{}; },
        [z = Eigen::MatrixXd::Zero(v.rows(), v.cols()).eval()](double) { return z; });
}

TimeVaryingMatrix tv_sum(const TimeVaryingMatrix& a, const TimeVaryingMatrix& b) {
    if (a.rows() != b.rows() || a.cols() != b.cols())
        throw InvalidInput("tv_sum: shape mismatch");
    TimeVaryingMatrix::Eval deriv;
    if (a.has_derivative() && b.has_derivative())
        deriv = [a, b](double t) { return (a.derivative(t) + b.derivative(t)).eval(); };
    return TimeVaryingMatrix(
        a.rows(), a.cols(), [a, b](double t) { return (a(t) + b(t)).eval(); },
        merged_breaks(a, b), std::move(deriv));
}

TimeVaryingMatrix tv_product(const TimeVaryingMatrix& a, const TimeVaryingMatrix& b) {
    if (a.cols() != b.rows()) throw InvalidInput("tv_product: inner dimension mismatch");
    TimeVaryingMatrix::Eval deriv;
    if (a.has_derivative() && b.has_derivative())
        deriv = [a, b](double t) {
            return (a.derivative(t) * b(t) + a(t) * b.derivative(t)).eval();
        };
    return TimeVaryingMatrix(
        a.rows(), b.cols(), [a, b](double t) { return (a(t) * b(t)).eval(); },
        merged_breaks(a, b), std::move(deriv));
}

TimeVaryingMatrix tv_scale(const TimeVaryingMatrix& a, double s) {
    TimeVaryingMatrix::Eval deriv;
    if (a.has_derivative())
        deriv = [a, s](double t) { return (s * a.derivative(t)).eval(); };
    return TimeVaryingMatrix(
        a.rows(), a.cols(), [a, s](double t) { return (s * a(t)).eval(); },
        [a](double ta, double tb) { return a.breakpoints_in(ta, tb); }, std::move(deriv));
}

TimeVaryingMatrix tv_left_multiply(const Eigen::MatrixXd& M, const TimeVaryingMatrix& a) {
    if (M.cols() != a.rows()) throw InvalidInput("tv_left_multiply: dimension mismatch");
    Eigen::MatrixXd Mc = M;
    TimeVaryingMatrix::Eval deriv;
    if (a.has_derivative())
        deriv = [Mc, a](double t) { return (Mc * a.derivative(t)).eval(); };
    return TimeVaryingMatrix(
        M.rows(), a.cols(), [Mc, a](double t) { return (Mc * a(t)).eval(); },
        [a](double ta, double tb) { return a.breakpoints_in(ta, tb); }, std::move(deriv));
}

TimeVaryingMatrix tv_right_multiply(const TimeVaryingMatrix& a, const Eigen::MatrixXd& M) {
    if (a.cols() != M.rows()) throw InvalidInput("tv_right_multiply: dimension mismatch");
    Eigen::MatrixXd Mc = M;
    TimeVaryingMatrix::Eval deriv;
    if (a.has_derivative())
        deriv = [Mc, a](double t) { return (a.derivative(t) * Mc).eval(); };
    return TimeVaryingMatrix(
        a.rows(), M.cols(), [a, Mc](double t) { return (a(t) * Mc).eval(); },
        [a](double ta, double tb) { return a.breakpoints_in(ta, tb); }, std::move(deriv));
}

TimeVaryingMatrix tv_hstack(const std::vector<TimeVaryingMatrix>& blocks) {
    if (blocks.empty()) throw InvalidInput("tv_hstack: no blocks");
    Eigen::Index rows = blocks.front().rows(), cols = 0;
    bool all_deriv = true;
    for (const auto& b : blocks) {
        if (b.rows() != rows) throw InvalidInput("tv_hstack: row mismatch");
        cols += b.cols();
        all_deriv = all_deriv && b.has_derivative();
    }
    auto assemble = [blocks, rows, cols](double t, bool deriv) {
        Eigen::MatrixXd out(rows, cols);
        Eigen::Index c = 0;
        for (const auto& b : blocks) {
            out.middleCols(c, b.cols()) = deriv ? b.derivative(t) : b(t);
            c += b.cols();
        }
        return out;
    };
    TimeVaryingMatrix::Eval deriv;
    if (all_deriv) deriv = [assemble](double t) { return assemble(t, true); };
    return TimeVaryingMatrix(
        rows, cols, [assemble](double t) { return assemble(t, false); },
        [blocks](double ta, double tb) {
            std::vector<double> out;
            for (const auto& b : blocks) out = merge_breakpoints(std::move(out), b.breakpoints_in(ta, tb));
            return out;
        },
        std::move(deriv));
}

TimeVaryingMatrix tv_block_diag(const std::vector<TimeVaryingMatrix>& blocks) {
    if (blocks.empty()) throw InvalidInput("tv_block_diag: no blocks");
    Eigen::Index rows = 0, cols = 0;
    bool all_deriv = true;
    for (const auto& b : blocks) {
        rows += b.rows();
        cols += b.cols();
        all_deriv = all_deriv && b.has_derivative();
    }
    auto assemble = [blocks, rows, cols](double t, bool deriv) {
        Eigen::MatrixXd out = Eigen::MatrixXd::Zero(rows, cols);
        Eigen::Index r = 0, c = 0;
        for (const auto& b : blocks) {
            out.block(r, c, b.rows(), b.cols()) = deriv ? b.derivative(t) : b(t);
            r += b.rows();
            c += b.cols();
        }
        return out;
    };
    TimeVaryingMatrix::Eval deriv;
    if (all_deriv) deriv = [assemble](double t) { return assemble(t, true); };
    return TimeVaryingMatrix(
        rows, cols, [assemble](double t) { return assemble(t, false); },
        [blocks](double ta, double tb) {
            std::vector<double> out;
            for (const auto& b : blocks) out = merge_breakpoints(std::move(out), b.breakpoints_in(ta, tb));
            return out;
        },
        std::move(deriv));
}

TimeVaryingMatrix tv_kron_identity(int copies, const TimeVaryingMatrix& a) {
    if (copies < 1) throw InvalidInput("tv_kron_identity: copies must be >= 1");
    std::vector<TimeVaryingMatrix> blocks(static_cast<size_t>(copies), a);
    return tv_block_diag(blocks);
}

} // namespace regpack
