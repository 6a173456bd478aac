#pragma once

#include <optional>

#include "regpack/time_varying.hpp"

namespace regpack::exo {

enum class SignalKind {
    Square,
    Triangle,
    WarpedSquare,
    DivergingTriangle,
    SinusoidWarped,
    Constant,
    MatrixExponential,
};

/// Parameters of the scalar signal families. The scalar kinds evaluate
///   (envelope_offset + envelope_slope * t) * amplitude * wave(arg(t)) + offset
/// with arg(t) = (2*pi/period) * t^warp_exponent + phase. The square wave is
/// sign-of-sine of the argument (right-continuous at jumps); the triangle is
/// its normalized running integral, a unit triangle wave.
struct SignalParams {
    double period = 2.0 * 3.14159265358979323846;
    double phase = 0.0;
    double warp_exponent = 1.0;
    double amplitude = 1.0;
    double offset = 0.0;
    double envelope_offset = 1.0;
    double envelope_slope = 0.0;
    double value = 0.0;                    // Constant kind
    std::optional<Eigen::MatrixXd> S;      // MatrixExponential kind
    double t0 = 0.0;                       // MatrixExponential kind
};

SignalKind signal_kind_from_string(const std::string& s);
std::string to_string(SignalKind k);

/// Closed-form signal constructor; jump/kink times are enumerated exactly.
/// Scalar kinds are valid on t >= 0 when warp_exponent != 1.
TimeVaryingMatrix build_signal(SignalKind kind, const SignalParams& params);

/// Unit square wave of an angular argument: +1 on [0,pi) mod 2pi, -1 after.
double square_wave(double arg);
/// Unit triangle wave: continuous, -1 at 0, +1 at pi, slope +-2/pi.
double triangle_wave(double arg);

} // namespace regpack::exo
