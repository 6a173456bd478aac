#include "regpack/signals.hpp"

#include <unsupported/Eigen/MatrixFunctions>
#include <cmath>

namespace regpack::exo {

namespace {
constexpr double kPi = 3.14159265358979323846;
constexpr double kTwoPi = 2.0 * kPi;

double wrap_two_pi(double s) {
    double m = std::fmod(s, kTwoPi);
    if (m < 0) m += kTwoPi;
    return m;
}
} // namespace

double square_wave(double arg) { return wrap_two_pi(arg) < kPi ? 1.0 : -1.0; }

double triangle_wave(double arg) {
    double m = wrap_two_pi(arg);
    return m <= kPi ? -1.0 + (2.0 / kPi) * m : 1.0 - (2.0 / kPi) * (m - kPi);
}

SignalKind signal_kind_from_string(const std::string& s) {
    if (s == "square") return SignalKind::Square;
    if (s == "triangle") return SignalKind::Triangle;
    if (s == "warped_square") return SignalKind::WarpedSquare;
    if (s == "diverging_triangle") return SignalKind::DivergingTriangle;
    if (s == "sinusoid_warped") return SignalKind::SinusoidWarped;
    if (s == "constant") return SignalKind::Constant;
    if (s == "matrix_exponential") return SignalKind::MatrixExponential;
    throw InvalidInput("unknown signal kind: " + s);
}

std::string to_string(SignalKind k) {
    switch (k) {
        case SignalKind::Square: return "square";
        case SignalKind::Triangle: return "triangle";
        case SignalKind::WarpedSquare: return "warped_square";
        case SignalKind::DivergingTriangle: return "diverging_triangle";
        case SignalKind::SinusoidWarped: return "sinusoid_warped";
        case SignalKind::Constant: return "constant";
        case SignalKind::MatrixExponential: return "matrix_exponential";
    }
    return "?";
}

namespace {

struct ScalarSpec {
    double rate;   // 2*pi / period
    double phase;
    double p;      // warp exponent
    double amp;
    double offset;
    double env0;
    double env1;
    int wave;      // 0 square, 1 triangle, 2 sine
};

double arg_of(const ScalarSpec& s, double t) { return s.rate * std::pow(t, s.p) + s.phase; }

double darg_of(const ScalarSpec& s, double t) {
    if (s.p == 1.0) return s.rate;
    return s.rate * s.p * std::pow(t, s.p - 1.0);
}

double wave_of(const ScalarSpec& s, double a) {
    switch (s.wave) {
        case 0: return square_wave(a);
        case 1: return triangle_wave(a);
        default: return std::sin(a);
    }
}

double dwave_of(const ScalarSpec& s, double a) {
    switch (s.wave) {
        case 0: return 0.0;
        case 1: return wrap_two_pi(a) < kPi ? 2.0 / kPi : -2.0 / kPi;
        default: return std::cos(a);
    }
}

double eval_scalar(const ScalarSpec& s, double t) {
    double env = s.env0 + s.env1 * t;
    return env * s.amp * wave_of(s, arg_of(s, t)) + s.offset;
}

double deriv_scalar(const ScalarSpec& s, double t) {
    double a = arg_of(s, t);
    double env = s.env0 + s.env1 * t;
    return s.env1 * s.amp * wave_of(s, a) + env * s.amp * dwave_of(s, a) * darg_of(s, t);
}

// Times in (ta, tb) where the argument crosses a multiple of pi. The argument
// is strictly increasing for t >= 0, so the crossings invert in closed form.
std::vector<double> scalar_breaks(const ScalarSpec& s, double ta, double tb) {
    if (s.wave == 2) return {}; // smooth
    std::vector<double> out;
    auto t_of_k = [&](long k) {
        double target = static_cast<double>(k) * kPi - s.phase;
        if (target / s.rate <= 0.0) return -1.0;
        return std::pow(target / s.rate, 1.0 / s.p);
    };
    double lo = std::max(ta, 0.0);
    double a_lo = arg_of(s, lo), a_hi = arg_of(s, std::max(tb, lo));
    long k0 = static_cast<long>(std::floor(a_lo / kPi)) - 1;
    long k1 = static_cast<long>(std::ceil(a_hi / kPi)) + 1;
    for (long k = k0; k <= k1; ++k) {
        double t = t_of_k(k);
        if (t > ta && t < tb) out.push_back(t);
    }
    std::sort(out.begin(), out.end());
    return out;
}

TimeVaryingMatrix make_scalar(const ScalarSpec& spec) {
    auto eval = [spec](double t) {
        Eigen::MatrixXd v(1, 1);
        v(0, 0) = eval_scalar(spec, t);
        return v;
    };
    auto breaks = [spec](double ta, double tb) { return scalar_breaks(spec, ta, tb); };
    auto deriv = [spec](double t) {
        Eigen::MatrixXd v(1, 1);
        v(0, 0) = deriv_scalar(spec, t);
        return v;
    };
    return TimeVaryingMatrix(1, 1, eval, breaks, deriv);
}

} // namespace

TimeVaryingMatrix build_signal(SignalKind kind, const SignalParams& params) {
    if (kind == SignalKind::Constant) {
        Eigen::MatrixXd v(1, 1);
        v(0, 0) = params.value;
        return tv_constant(v);
    }
    if (kind == SignalKind::MatrixExponential) {
        if (!params.S) throw InvalidInput("matrix_exponential signal needs S");
        Eigen::MatrixXd S = *params.S;
        if (S.rows() != S.cols() || S.rows() == 0)
            throw InvalidInput("matrix_exponential: S must be square");
        double t0 = params.t0;
        auto eval = [S, t0](double t) { return (S * (t - t0)).exp().eval(); };
        auto deriv = [S, t0](double t) { return (S * (S * (t - t0)).exp()).eval(); };
        return TimeVaryingMatrix(S.rows(), S.cols(), eval,
                                 [](double, double) { return std::vector<double>{}; }, deriv);
    }

    if (!(params.period > 0.0)) throw InvalidInput("signal: period must be positive");
    if (!(params.warp_exponent > 0.0)) throw InvalidInput("signal: warp exponent must be positive");
    ScalarSpec s;
    s.rate = kTwoPi / params.period;
    s.phase = params.phase;
    s.p = params.warp_exponent;
    s.amp = params.amplitude;
    s.offset = params.offset;
    s.env0 = params.envelope_offset;
    s.env1 = params.envelope_slope;
    switch (kind) {
        case SignalKind::Square:
            if (params.warp_exponent != 1.0)
                throw InvalidInput("square: use warped_square for warp_exponent != 1");
            s.wave = 0;
            break;
        case SignalKind::WarpedSquare: s.wave = 0; break;
        case SignalKind::Triangle:
            if (params.warp_exponent != 1.0)
                throw InvalidInput("triangle: warp_exponent must be 1");
            s.wave = 1;
            break;
        case SignalKind::DivergingTriangle: s.wave = 1; break;
        case SignalKind::SinusoidWarped: s.wave = 2; break;
        default: throw InvalidInput("build_signal: unhandled kind");
    }
    return make_scalar(s);
}

} // namespace regpack::exo
