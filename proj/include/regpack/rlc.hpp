#pragma once

#include "regpack/plant.hpp"

namespace regpack::rlc {

/// Series RLC circuit behind an input resistor, with a Thevenin-equivalent
/// disturbance source. States are the inductor current and capacitor
/// voltage; the regulated output is the load voltage R_L i_L + v_C.
struct CircuitParams {
    double R_in = 0.5; // Ohm
    double R_th = 5.0; // Ohm
    double L_r = 0.1;  // H
    double C_L = 0.3;  // F
    double R_L = 10.0; // Ohm
};

/// Plant matrices for the circuit driven by omega = generator state of the
/// (d_th, r_f) exosystem built by build_exosystem (nu = 3).
plant::LtiPlant build_plant(const CircuitParams& p);

struct RlcExosystem {
    exo::ExplicitExosystem exosystem;
    Eigen::MatrixXd E; // omega0 = E * [d_hat0, r_hat0]
};

/// Exogenous generator: disturbance d_th(t) = (square(2pi/3 t^1.5 + pi/2) + 2) d_hat0
/// and diverging triangular reference r_f(t) = (t+1) tri(2pi/3 t + pi/2) r_hat0,
/// inflated to an invertible 3x3 generator with the quarter-period-shifted
/// triangle as companion.
RlcExosystem build_exosystem(bool normalize_at_t0 = true);

/// Reference values used by the published experiments.
struct Defaults {
    static constexpr double d_hat0 = 0.8481;
    static constexpr double r_hat0 = -0.5202;
    static constexpr double x0_0 = 1.0562;
    static constexpr double x0_1 = -0.2586;
    static constexpr double k = 100.0;
    static constexpr double perturbed_C_L = 0.156;
    static constexpr double perturbed_R_L = 7.891;
};

std::vector<std::complex<double>> augmentation_eigenvalues(); // 16 values
std::vector<std::complex<double>> immersion_eigenvalues();    // 5 values

} // namespace regpack::rlc
