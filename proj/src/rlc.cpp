#include "regpack/rlc.hpp"

namespace regpack::rlc {

namespace {
constexpr double kPi = 3.14159265358979323846;
}

plant::LtiPlant build_plant(const CircuitParams& p) {
    const double eps1 = 1.0 / ((p.R_in + p.R_th) * p.L_r);
    const double eps2 = -p.R_L / p.L_r - p.R_in * p.R_th * eps1;
    plant::LtiPlant pl;
    pl.A.resize(2, 2);
    pl.A << eps2, -1.0 / p.L_r, 1.0 / p.C_L, 0.0;
    pl.B.resize(2);
    pl.B << p.R_th * eps1, 0.0;
    pl.C.resize(2);
    pl.C << p.R_L, 1.0;
    pl.D = 0.0;
    pl.P = Eigen::MatrixXd::Zero(2, 3);
    pl.P(0, 0) = p.R_in * eps1;
    pl.Q.resize(3);
    pl.Q << 0.0, -1.0, 0.0;
    pl.validate();
    return pl;
}

RlcExosystem build_exosystem(bool normalize_at_t0) {
    using exo::SignalKind;
    exo::SignalParams dist;
    dist.period = 3.0;
    dist.phase = kPi / 2.0;
    dist.warp_exponent = 1.5;
    dist.offset = 2.0;
    TimeVaryingMatrix lambda_d = exo::build_signal(SignalKind::WarpedSquare, dist);

    exo::SignalParams ref;
    ref.period = 3.0;
    ref.phase = kPi / 2.0;
    ref.envelope_offset = 1.0;
    ref.envelope_slope = 1.0;
    TimeVaryingMatrix lambda_r = exo::build_signal(SignalKind::DivergingTriangle, ref);

    exo::SignalParams comp = ref;
    comp.phase = 0.0; // quarter-period shift keeps the block determinant positive
    TimeVaryingMatrix lambda_r_tilde = exo::build_signal(SignalKind::DivergingTriangle, comp);

    exo::InflateOptions opt;
    opt.normalize_at_t0 = normalize_at_t0;
    Eigen::RowVectorXd P_row(2);
    P_row << 1.0, 1.0;
    auto inflated = exo::inflate_to_invertible(
        {lambda_d, lambda_r}, {std::nullopt, lambda_r_tilde}, P_row, opt);

    RlcExosystem out;
    out.exosystem = inflated.exosystem;
    out.E = inflated.E;
    return out;
}

std::vector<std::complex<double>> augmentation_eigenvalues() {
    using C = std::complex<double>;
    std::vector<C> eigs;
    const double re[] = {-0.5, -1.2, -1.5, -2.0, -2.5, -0.3, -0.8, -1.0};
    const double im[] = {0.5, 1.0, 1.2, 1.8, 2.0, 1.5, 0.4, 1.2};
    for (int i = 0; i < 8; ++i) {
        eigs.emplace_back(re[i], im[i]);
        eigs.emplace_back(re[i], -im[i]);
    }
    return eigs;
}

std::vector<std::complex<double>> immersion_eigenvalues() {
    using C = std::complex<double>;
    return {C(-5, 4), C(-5, -4), C(-3, 2), C(-3, -2), C(-6, 0)};
}

} // namespace regpack::rlc
