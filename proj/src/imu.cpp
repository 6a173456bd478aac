#include "regpack/imu.hpp"

#include <Eigen/Eigenvalues>
#include <Eigen/SVD>
#include <map>
#include <sstream>

namespace regpack::imu {

namespace {

using numkit::MatrixTrajectory;

double settle_window(const Eigen::MatrixXd& F) {
    Eigen::EigenSolver<Eigen::MatrixXd> es(F);
    double slowest = 0.0;
    for (Eigen::Index i = 0; i < es.eigenvalues().size(); ++i)
        slowest = std::max(slowest, 1.0 / std::max(1e-12, -es.eigenvalues()(i).real()));
    return 5.0 * slowest;
}

void check_pair_matrices(const Eigen::MatrixXd& F, const Eigen::VectorXd& G, int s) {
    const int m = static_cast<int>(F.rows());
    if (F.cols() != m || G.size() != m) throw InvalidInput("realization: F/G shape mismatch");
    if (m < s) throw InvalidInput("realization: m must be at least the pair dimension");
    if (!plant::is_hurwitz(F)) throw NotHurwitz("realization: F_im must be Hurwitz");
    Eigen::MatrixXd ctrb(m, m);
    Eigen::VectorXd v = G;
    for (int i = 0; i < m; ++i) {
        ctrb.col(i) = v;
        v = F * v;
    }
    if (numkit::pinv(ctrb).rank < m)
        throw InvalidInput("realization: (F_im, G_im) must be controllable");
}

// Shared tail of both realizations: per-sample pseudoinverse, rank
// certification, and the bounded H_im with the hold rule applied.
CanonicalRealization certify(MatrixTrajectory moment, const TimeVaryingMatrix& Xi,
                             const Eigen::MatrixXd& F, const Eigen::VectorXd& G, double t_hat,
                             PairForm form, const RealizeOptions& opt) {
    CanonicalRealization out;
    out.F_im = F;
    out.G_im = G;
    out.m = static_cast<int>(F.rows());
    out.t_hat = t_hat;
    out.form = form;
    out.cert_start = t_hat + settle_window(F);
    if (out.cert_start >= moment.t_back())
        throw InvalidInput("realization: horizon shorter than the settle window");

    const size_t n = moment.size();
    std::vector<Eigen::RowVectorXd> H_raw(n);
    std::vector<int> ranks(n);
    std::vector<double> Hnorm(n);
    for (size_t i = 0; i < n; ++i) {
        auto pv = numkit::pinv(moment.value(i), opt.pinv_rel_tol);
        ranks[i] = static_cast<int>(pv.rank);
        double t = moment.time(i);
        Eigen::MatrixXd xi = moment.is_left_sample(i) ? Xi.left_value(t) : Xi(t);
        H_raw[i] = xi * pv.pinv;
        Hnorm[i] = H_raw[i].norm();
    }
    out.rank_profile = ranks;

    // modal rank over the certification window
    std::map<int, size_t> hist;
    size_t window_count = 0;
    for (size_t i = 0; i < n; ++i) {
        if (moment.time(i) >= out.cert_start) {
            ++hist[ranks[i]];
            ++window_count;
        }
    }
    if (window_count == 0) throw InvalidInput("realization: empty certification window");
    int modal = 0;
    size_t best = 0;
    for (auto& [r, c] : hist)
        if (c > best) {
            best = c;
            modal = r;
        }
    if (modal == 0) throw RankDrift("realization: moment matrix has zero certified rank");
    double agreement = static_cast<double>(best) / static_cast<double>(window_count);
    if (agreement < opt.rank_agreement)
        throw RankDrift("realization: rank profile drifts on the certification window "
                        "(agreement " +
                        std::to_string(agreement) + "); a larger m may be needed");
    // breakpoint-adjacent samples inside the window must agree too
    for (size_t i = 0; i + 1 < n; ++i) {
        if (moment.time(i) == moment.time(i + 1) && moment.time(i) >= out.cert_start) {
            if (ranks[i] != modal || ranks[i + 1] != modal)
                throw RankDrift("realization: rank changes at a breakpoint inside the window");
        }
    }
    out.certified_rank = modal;

    double sup_window = 0.0;
    for (size_t i = 0; i < n; ++i)
        if (moment.time(i) >= out.cert_start && ranks[i] == modal)
            sup_window = std::max(sup_window, Hnorm[i]);
    const double cap = opt.hold_factor * std::max(sup_window, 1e-12);

    // hold rule: out-of-family samples keep the previous accepted value
    std::vector<Eigen::MatrixXd> H(n);
    Eigen::RowVectorXd held = Eigen::RowVectorXd::Zero(out.m);
    for (size_t i = 0; i < n; ++i) {
        if (ranks[i] == modal && Hnorm[i] <= cap) held = H_raw[i];
        H[i] = held;
    }
    out.H_im = MatrixTrajectory(moment.times(), std::move(H));

    for (size_t i = 0; i < n; ++i) {
        double t = moment.time(i);
        if (t < out.cert_start) continue;
        Eigen::MatrixXd xi = moment.is_left_sample(i) ? Xi.left_value(t) : Xi(t);
        double defect = (xi - out.H_im.value(i) * moment.value(i)).norm();
        out.max_defect = std::max(out.max_defect, defect);
    }
    if (out.max_defect > opt.defect_tol)
        throw RankDrift("realization: identity defect " + std::to_string(out.max_defect) +
                        " exceeds tolerance on the certification window");
    out.moment = std::move(moment);
    return out;
}

} // namespace

std::pair<Eigen::MatrixXd, Eigen::VectorXd> build_companion(
    const std::vector<std::complex<double>>& eigenvalues) {
    if (eigenvalues.empty()) throw InvalidInput("build_companion: no eigenvalues");
    for (const auto& e : eigenvalues)
        if (e.real() >= 0.0) throw NotHurwitz("build_companion: eigenvalue with Re >= 0");
    Eigen::VectorXd coef = plant::poly_from_roots(eigenvalues);
    const int m = static_cast<int>(eigenvalues.size());
    Eigen::MatrixXd F = Eigen::MatrixXd::Zero(m, m);
    F.topRightCorner(m - 1, m - 1).setIdentity();
    for (int j = 0; j < m; ++j) F(m - 1, j) = -coef(m - j); // -a_0 ... -a_{m-1}
    Eigen::VectorXd G = Eigen::VectorXd::Zero(m);
    G(m - 1) = 1.0;
    return {F, G};
}

CanonicalRealization realize_explicit(const InternalModelPair& pair, const Eigen::MatrixXd& F_im,
                                      const Eigen::VectorXd& G_im, const numkit::Grid& grid,
                                      double t_hat, const RealizeOptions& options) {
    if (pair.form != PairForm::Explicit) throw InvalidInput("realize_explicit: pair is implicit");
    if (std::abs(grid.t_start - t_hat) > 1e-12)
        throw InvalidInput("realize_explicit: grid must start at t_hat");
    check_pair_matrices(F_im, G_im, pair.s);

    TimeVaryingMatrix Phi = pair.Phi, Xi = pair.Xi;
    auto rhs = [&](double t, const Eigen::MatrixXd& X) {
        return (F_im * X + G_im * (Xi(t) * Phi(t))).eval();
    };
    MatrixTrajectory Psi_M = numkit::integrate_matrix_ode(
        rhs, Eigen::MatrixXd::Zero(F_im.rows(), pair.s), grid);
    MatrixTrajectory Pi_M = Psi_M.transform([&Phi](double t, const Eigen::MatrixXd& X, bool left) {
        Eigen::MatrixXd L = left ? Phi.left_value(t) : Phi(t);
        Eigen::PartialPivLU<Eigen::MatrixXd> lu(L.transpose());
        return lu.solve(X.transpose()).transpose().eval();
    });
    return certify(std::move(Pi_M), Xi, F_im, G_im, t_hat, PairForm::Explicit, options);
}

CanonicalRealization realize_implicit(const InternalModelPair& pair, const Eigen::MatrixXd& F_im,
                                      const Eigen::VectorXd& G_im, const numkit::Grid& grid,
                                      double t_hat, const RealizeOptions& options) {
    if (pair.form != PairForm::Implicit) throw InvalidInput("realize_implicit: pair is explicit");
    if (std::abs(grid.t_start - t_hat) > 1e-12)
        throw InvalidInput("realize_implicit: grid must start at t_hat");
    check_pair_matrices(F_im, G_im, pair.s);

    TimeVaryingMatrix Phi = pair.Phi, Xi = pair.Xi;
    auto rhs = [&](double t, const Eigen::MatrixXd& X) {
        return (F_im * X - X * Phi(t) + G_im * Xi(t)).eval();
    };
    MatrixTrajectory M = numkit::integrate_matrix_ode(
        rhs, Eigen::MatrixXd::Zero(F_im.rows(), pair.s), grid);
    return certify(std::move(M), Xi, F_im, G_im, t_hat, PairForm::Implicit, options);
}

AugmentationResult build_augmented_im(const TimeVaryingMatrix& Delta_prime,
                                      const exo::ExplicitExosystem& exosys,
                                      const std::vector<Eigen::MatrixXd>& U_samples,
                                      const Eigen::MatrixXd* explicit_L, double svd_cutoff) {
    if (Delta_prime.rows() != 1) throw InvalidInput("build_augmented_im: Delta' must be a row");
    const int l = static_cast<int>(Delta_prime.cols());
    const int nu = exosys.nu;

    AugmentationResult out;
    out.im.l = l;
    out.im.Delta_prime = Delta_prime;

    if (explicit_L != nullptr) {
        if (explicit_L->rows() != static_cast<Eigen::Index>(l) * nu)
            throw InvalidInput("build_augmented_im: L has wrong height");
        out.im.L = *explicit_L;
    } else {
        if (U_samples.empty()) throw InvalidInput("build_augmented_im: no U' samples and no L");
        Eigen::MatrixXd V(static_cast<Eigen::Index>(l) * nu,
                          static_cast<Eigen::Index>(U_samples.size()));
        for (size_t i = 0; i < U_samples.size(); ++i) {
            const auto& U = U_samples[i];
            if (U.rows() != l || U.cols() != nu)
                throw InvalidInput("build_augmented_im: U' sample has wrong shape");
            V.col(static_cast<Eigen::Index>(i)) =
                Eigen::Map<const Eigen::VectorXd>(U.data(), U.size());
        }
        Eigen::JacobiSVD<Eigen::MatrixXd> svd(V, Eigen::ComputeThinU);
        const auto& sv = svd.singularValues();
        Eigen::Index rank = 0;
        for (Eigen::Index i = 0; i < sv.size(); ++i)
            if (sv(i) > svd_cutoff * sv(0)) ++rank;
        out.im.L = svd.matrixU().leftCols(rank);
    }
    out.im.l_prime = static_cast<int>(out.im.L.cols());
    out.im.q_min = nu * out.im.l_prime;

    // Lbar stacks the unvec'd basis columns: U'(mu) = Lbar (c_mu (x) I_nu)
    out.im.Lbar.resize(l, static_cast<Eigen::Index>(nu) * out.im.l_prime);
    for (int j = 0; j < out.im.l_prime; ++j) {
        Eigen::Map<const Eigen::MatrixXd> Uj(out.im.L.col(j).data(), l, nu);
        out.im.Lbar.middleCols(static_cast<Eigen::Index>(j) * nu, nu) = Uj;
    }

    for (const auto& U : U_samples) (void)augmentation_coordinates(out.im, U);

    out.pair.form = PairForm::Explicit;
    out.pair.s = out.im.q_min;
    out.pair.Phi = tv_kron_identity(out.im.l_prime, exosys.Lambda);
    out.pair.Xi = tv_right_multiply(Delta_prime, out.im.Lbar);
    return out;
}

Eigen::VectorXd augmentation_coordinates(const AugmentationIM& im, const Eigen::MatrixXd& U_prime,
                                         double residual_tol) {
    Eigen::VectorXd v = Eigen::Map<const Eigen::VectorXd>(U_prime.data(), U_prime.size());
    // least squares in L (the basis need not be orthonormal when user-supplied)
    Eigen::VectorXd c = numkit::pinv(im.L).pinv * v;
    double rel = (im.L * c - v).norm() / std::max(1.0, v.norm());
    if (rel > residual_tol)
        throw BasisIncomplete("augmentation: vec(U') projects outside Im L (residual " +
                              std::to_string(rel) + ")");
    return c;
}

Eigen::VectorXd augmentation_embed(const AugmentationIM& im, const Eigen::VectorXd& c_mu,
                                   const Eigen::VectorXd& omega0) {
    const Eigen::Index nu = omega0.size();
    Eigen::VectorXd out(c_mu.size() * nu);
    for (Eigen::Index j = 0; j < c_mu.size(); ++j) out.segment(j * nu, nu) = c_mu(j) * omega0;
    return out;
}

ImmersionIM find_immersion(const TimeVaryingMatrix& F_basis, int d_max,
                           const std::vector<double>& t_hat_grid, const numkit::Grid& grid,
                           const ImmersionOptions& options) {
    if (F_basis.rows() != 1) throw InvalidInput("find_immersion: F_basis must be a row");
    if (d_max < 1) throw InvalidInput("find_immersion: d_max must be >= 1");
    if (t_hat_grid.empty()) throw InvalidInput("find_immersion: empty t_hat grid");
    const Eigen::Index w = F_basis.cols();

    std::vector<MatrixTrajectory> levels =
        numkit::repeated_integrals(F_basis, d_max, grid.t_start, grid);
    const auto& ts = levels.front().times();

    std::ostringstream diag;
    for (int d = 1; d <= d_max; ++d) {
        for (double t_hat : t_hat_grid) {
            if (t_hat < grid.t_start || t_hat >= grid.t_end)
                throw InvalidInput("find_immersion: t_hat outside grid");
            double max_res = 0.0, max_coeff = 0.0;
            std::vector<Eigen::MatrixXd> vs(ts.size()), res(ts.size());
            bool ok = true;
            for (size_t i = 0; i < ts.size(); ++i) {
                Eigen::MatrixXd v0(d, 1), r0(1, 1);
                v0.setZero();
                r0.setZero();
                if (ts[i] >= t_hat) {
                    // Psi_hat rows are I^[d], ..., I^[1]; solve Psi_hat^T v = -F^T
                    Eigen::MatrixXd PsiT(w, d);
                    for (int j = 0; j < d; ++j) PsiT.col(j) = levels[static_cast<size_t>(d - 1 - j)]
                                                                  .value(i)
                                                                  .transpose();
                    Eigen::MatrixXd F =
                        levels.front().is_left_sample(i) ? F_basis.left_value(ts[i]) : F_basis(ts[i]);
                    auto pv = numkit::pinv(PsiT, options.pinv_rel_tol);
                    Eigen::VectorXd v = -(pv.pinv * F.transpose());
                    double rnorm = (PsiT * v + F.transpose()).norm() / (1.0 + F.norm());
                    v0 = v;
                    r0(0, 0) = rnorm;
                    max_res = std::max(max_res, rnorm);
                    max_coeff = std::max(max_coeff, v.lpNorm<Eigen::Infinity>());
                    if (max_res > options.residual_tol || max_coeff > options.coeff_cap) {
                        ok = false;
                        break;
                    }
                }
                vs[i] = v0;
                res[i] = r0;
            }
            if (!ok || max_res > options.residual_tol || max_coeff > options.coeff_cap) {
                diag << "  d=" << d << " t_hat=" << t_hat << ": residual " << max_res
                     << ", max coefficient " << max_coeff << "\n";
                continue;
            }

            ImmersionIM out;
            out.d = d;
            out.t_hat = t_hat;
            MatrixTrajectory vtraj(ts, std::move(vs));
            out.residual = MatrixTrajectory(ts, std::move(res));
            // v = col(a_d, ..., a_1)
            for (int i = d; i >= 1; --i) {
                int row = d - i;
                out.a.push_back(vtraj.transform([row](double, const Eigen::MatrixXd& V, bool) {
                    Eigen::MatrixXd s(1, 1);
                    s(0, 0) = V(row, 0);
                    return s;
                }));
            }
            std::reverse(out.a.begin(), out.a.end()); // a[0] = a_1, ..., a[d-1] = a_d
            for (int i = 0; i < d_max; ++i)
                if (i < d) out.integrals.push_back(levels[static_cast<size_t>(i)]);

            // companion implicit pair: shift structure with last row (-a_d ... -a_1)
            TimeVaryingMatrix vfun = vtraj.as_time_varying();
            const int dd = d;
            auto phi_eval = [vfun, dd](double t) {
                Eigen::MatrixXd M = Eigen::MatrixXd::Zero(dd, dd);
                M.topRightCorner(dd - 1, dd - 1).setIdentity();
                M.row(dd - 1) = -vfun(t).transpose();
                return M;
            };
            auto xi_eval = [vfun, dd](double t) {
                return Eigen::MatrixXd(-vfun(t).transpose());
            };
            out.pair.form = PairForm::Implicit;
            out.pair.s = d;
            out.pair.Phi = TimeVaryingMatrix(
                d, d, phi_eval,
                [vfun](double ta, double tb) { return vfun.breakpoints_in(ta, tb); });
            out.pair.Xi = TimeVaryingMatrix(
                1, d, xi_eval,
                [vfun](double ta, double tb) { return vfun.breakpoints_in(ta, tb); });
            return out;
        }
    }
    throw NoImmersionFound("find_immersion: no (d, t_hat) candidate passed; tried:\n" +
                           diag.str());
}

ErrorFeedbackRegulator assemble_error_feedback(const CanonicalRealization& real, double k) {
    if (!(k > 0)) throw InvalidInput("assemble_error_feedback: k must be positive");
    ErrorFeedbackRegulator reg;
    reg.F_im = real.F_im;
    reg.G_im = real.G_im;
    reg.H_im = real.H_im;
    reg.k = k;
    reg.q = real.m;
    reg.t_hat = real.t_hat;
    return reg;
}

} // namespace regpack::imu
