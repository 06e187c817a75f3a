#include "satstab/synthesis.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include <Eigen/Eigenvalues>

#include "satstab/errors.hpp"
#include "satstab/linalg.hpp"

namespace satstab {

namespace {

bool is_diagonal(const Eigen::MatrixXd& A) {
    for (Eigen::Index i = 0; i < A.rows(); ++i) {
        for (Eigen::Index j = 0; j < A.cols(); ++j) {
            if (i != j && A(i, j) != 0.0) {
                return false;
            }
        }
    }
    return true;
}

int pbh_rank(const Eigen::MatrixXd& A, const Eigen::MatrixXd& B, std::complex<double> mu) {
    const Eigen::Index n = A.rows();
    Eigen::MatrixXcd M(n, n + B.cols());
    M.leftCols(n) = A.cast<std::complex<double>>() - mu * Eigen::MatrixXcd::Identity(n, n);
    M.rightCols(B.cols()) = B.cast<std::complex<double>>();
    Eigen::JacobiSVD<Eigen::MatrixXcd> svd(M);
    const auto& s = svd.singularValues();
    const double scale = std::max({1.0, A.cwiseAbs().maxCoeff(), B.cwiseAbs().maxCoeff()});
    int r = 0;
    for (Eigen::Index i = 0; i < s.size(); ++i) {
        if (s(i) > 1e-10 * scale) {
            ++r;
        }
    }
    return r;
}

} // namespace

KalmanReport kalman_diagnose(const Eigen::MatrixXd& A, const Eigen::MatrixXd& B) {
    require(A.rows() == A.cols() && B.rows() == A.rows(), "kalman_diagnose: dimension mismatch");
    KalmanReport rep;
    rep.dim = static_cast<int>(A.rows());
    if (rep.dim == 0) {
        rep.controllable = rep.stabilizable = true;
        return rep;
    }
    const Eigen::MatrixXd Kal = linalg::kalman_matrix(A, B);
    rep.rank = linalg::rank(Kal);
    rep.controllable = rep.rank == rep.dim;
    if (B.cols() == 1) {
        rep.kalman_determinant = Kal.determinant();
        if (is_diagonal(A)) {
            double v = 1.0;
            for (Eigen::Index j = 0; j < A.rows(); ++j) {
                v *= B(j, 0);
                for (Eigen::Index i = 0; i < j; ++i) {
                    v *= A(j, j) - A(i, i);
                }
            }
            rep.vandermonde_value = v;
        }
    }
    // Repeated eigenvalues are tested once.
    std::vector<std::complex<double>> seen;
    for (const auto& mu : linalg::eigenvalues(A)) {
        const bool dup = std::any_of(seen.begin(), seen.end(), [&](auto s) {
            return std::abs(s - mu) <= 1e-9 * std::max(1.0, std::abs(mu));
        });
        if (dup) {
            continue;
        }
        seen.push_back(mu);
        if (pbh_rank(A, B, mu) < rep.dim) {
            rep.pbh_failures.push_back(mu);
        }
    }
    rep.stabilizable = std::all_of(rep.pbh_failures.begin(), rep.pbh_failures.end(),
                                   [](auto mu) { return mu.real() < 0.0; });
    return rep;
}

KalmanReport kalman_diagnose(const ModalSystem& ms) { return kalman_diagnose(ms.A, ms.B); }

Gain make_gain(const Eigen::MatrixXd& A, const Eigen::MatrixXd& B, Eigen::MatrixXd K) {
    require(K.rows() == B.cols() && K.cols() == A.rows(), "gain has the wrong shape");
    Gain g;
    g.K = std::move(K);
    g.closed_loop_spectrum = linalg::eigenvalues(A + B * g.K);
    return g;
}

Eigen::MatrixXd ackermann(const Eigen::MatrixXd& A, const Eigen::MatrixXd& B, std::span<const double> poles) {
    const Eigen::Index n = A.rows();
    require(B.cols() == 1, "ackermann needs a single input");
    require(static_cast<Eigen::Index>(poles.size()) == n, "need one pole per state");
    // p(A) = prod (A - p_i I)
    Eigen::MatrixXd pA = Eigen::MatrixXd::Identity(n, n);
    for (double p : poles) {
        pA = pA * (A - p * Eigen::MatrixXd::Identity(n, n));
    }
    const Eigen::MatrixXd Kal = linalg::kalman_matrix(A, B);
    Eigen::RowVectorXd en = Eigen::RowVectorXd::Zero(n);
    en(n - 1) = 1.0;
    const Eigen::RowVectorXd row = Kal.transpose().fullPivLu().solve(en.transpose()).transpose();
    return -(row * pA);
}

Eigen::MatrixXd care(const Eigen::MatrixXd& A, const Eigen::MatrixXd& B, const Eigen::MatrixXd& Q,
                     const Eigen::MatrixXd& R) {
    const Eigen::Index n = A.rows();
    const Eigen::MatrixXd Rinv = R.inverse();
    Eigen::MatrixXd H(2 * n, 2 * n);
    H << A, -B * Rinv * B.transpose(), -Q, -A.transpose();
    Eigen::ComplexEigenSolver<Eigen::MatrixXd> es(H);
    Eigen::MatrixXcd X(2 * n, n);
    Eigen::Index c = 0;
    for (Eigen::Index i = 0; i < 2 * n && c < n; ++i) {
        if (es.eigenvalues()(i).real() < 0.0) {
            X.col(c++) = es.eigenvectors().col(i);
        }
    }
    if (c != n) {
        throw Error(ErrorKind::NotStabilizable, "hamiltonian has eigenvalues on the imaginary axis");
    }
    const Eigen::MatrixXcd U1 = X.topRows(n);
    const Eigen::MatrixXcd U2 = X.bottomRows(n);
    Eigen::MatrixXd P = (U2 * U1.fullPivLu().inverse()).real();
    P = 0.5 * (P + P.transpose());

    // Kleinman iteration from the Hamiltonian guess.
    for (int it = 0; it < 8; ++it) {
        const Eigen::MatrixXd K = -Rinv * B.transpose() * P;
        const Eigen::MatrixXd Ak = A + B * K;
        if (linalg::spectral_abscissa(Ak) >= 0.0) {
            break;
        }
        const Eigen::MatrixXd Pn = linalg::solve_lyapunov(Ak, Q + K.transpose() * R * K);
        const double change = (Pn - P).norm();
        P = Pn;
        if (change <= 1e-14 * std::max(1.0, P.norm())) {
            break;
        }
    }
    return P;
}

Gain design_gain(const Eigen::MatrixXd& A, const Eigen::MatrixXd& B, const GainTarget& target, double eta) {
    const Eigen::Index n = A.rows();
    const Eigen::Index m = B.cols();
    if (n == 0) {
        return make_gain(A, B, Eigen::MatrixXd::Zero(m, 0));
    }
    const KalmanReport rep = kalman_diagnose(A, B);
    if (!rep.stabilizable) {
        std::string list;
        for (auto mu : rep.pbh_failures) {
            if (mu.real() >= 0.0) {
                list += (list.empty() ? "" : ", ") + std::to_string(mu.real());
            }
        }
        throw Error(ErrorKind::NotStabilizable,
                    "not controllable: unstable eigenvalue(s) " + list + " fail the PBH test (Kalman rank " +
                        std::to_string(rep.rank) + " of " + std::to_string(rep.dim) + ")");
    }
    Eigen::MatrixXd K;
    if (m == 1 && !target.lqr && rep.controllable) {
        std::vector<double> poles = target.poles;
        if (poles.empty()) {
            for (Eigen::Index i = 0; i < n; ++i) {
                poles.push_back(-eta * static_cast<double>(i + 1));
            }
        }
        require(static_cast<Eigen::Index>(poles.size()) == n,
                "expected " + std::to_string(n) + " poles, got " + std::to_string(poles.size()));
        for (double p : poles) {
            require(p < 0.0, "closed-loop poles must be negative");
        }
        K = ackermann(A, B, poles);
    } else {
        require(target.q > 0.0 && target.r > 0.0, "quadratic weights must be positive");
        const Eigen::MatrixXd Q = target.q * Eigen::MatrixXd::Identity(n, n);
        const Eigen::MatrixXd R = target.r * Eigen::MatrixXd::Identity(m, m);
        const Eigen::MatrixXd P = care(A, B, Q, R);
        K = -R.inverse() * B.transpose() * P;
    }
    Gain g = make_gain(A, B, std::move(K));
    const double abscissa = linalg::spectral_abscissa(A + B * g.K);
    if (!(abscissa < 0.0)) {
        throw Error(ErrorKind::ConvergenceFailure,
                    "designed gain is not Hurwitz (spectral abscissa " + std::to_string(abscissa) + ")");
    }
    return g;
}

Gain design_gain(const ModalSystem& ms, const GainTarget& target) {
    return design_gain(ms.A, ms.B, target, ms.eta);
}

Eigen::MatrixXd lmi_m1(const Eigen::MatrixXd& A, const Eigen::MatrixXd& B, const Eigen::MatrixXd& K,
                       const Eigen::MatrixXd& P, const Eigen::VectorXd& D, const Eigen::MatrixXd& C) {
    const Eigen::Index n = A.rows();
    const Eigen::Index m = B.cols();
    const Eigen::MatrixXd Acl = A + B * K;
    const Eigen::MatrixXd off = P * B - (D.asDiagonal() * C).transpose();
    Eigen::MatrixXd M1(n + m, n + m);
    M1.topLeftCorner(n, n) = Acl.transpose() * P + P * Acl;
    M1.topRightCorner(n, m) = off;
    M1.bottomLeftCorner(m, n) = off.transpose();
    M1.bottomRightCorner(m, m) = -2.0 * Eigen::MatrixXd(D.asDiagonal());
    return M1;
}

Eigen::MatrixXd lmi_m2(const Eigen::MatrixXd& K, const Eigen::MatrixXd& P, const Eigen::MatrixXd& C,
                       SaturationLevel ell) {
    if (ell.is_infinite()) {
        return P;
    }
    const Eigen::Index n = P.rows();
    const Eigen::Index m = K.rows();
    const Eigen::MatrixXd KC = K - C;
    Eigen::MatrixXd M2(n + m, n + m);
    M2.topLeftCorner(n, n) = P;
    M2.topRightCorner(n, m) = KC.transpose();
    M2.bottomLeftCorner(m, n) = KC;
    M2.bottomRightCorner(m, m) = ell.ell * ell.ell * Eigen::MatrixXd::Identity(m, m);
    return M2;
}

namespace {

void check_shapes(const Eigen::MatrixXd& A, const Eigen::MatrixXd& B, const Eigen::MatrixXd& K,
                  const Eigen::MatrixXd& P, const Eigen::VectorXd& D, const Eigen::MatrixXd& C) {
    const Eigen::Index n = A.rows();
    const Eigen::Index m = B.cols();
    require(A.cols() == n && B.rows() == n, "certificate: A and B do not match");
    require(K.rows() == m && K.cols() == n, "certificate: K has the wrong shape");
    require(P.rows() == n && P.cols() == n, "certificate: P has the wrong shape");
    require(D.size() == m, "certificate: D has the wrong size");
    require(C.rows() == m && C.cols() == n, "certificate: C has the wrong shape");
    require((P - P.transpose()).cwiseAbs().maxCoeff() <= 1e-9 * std::max(1.0, P.cwiseAbs().maxCoeff()),
            "certificate: P must be symmetric");
    require((D.array() > 0.0).all(), "certificate: D must be positive definite");
}

} // namespace

Certificate make_certificate(const Eigen::MatrixXd& A, const Eigen::MatrixXd& B, const Gain& gain,
                             Eigen::MatrixXd P, Eigen::VectorXd D, Eigen::MatrixXd C, SaturationLevel ell) {
    ell.validate();
    check_shapes(A, B, gain.K, P, D, C);
    Certificate cert;
    cert.P = 0.5 * (P + P.transpose());
    cert.D = std::move(D);
    cert.C = std::move(C);
    cert.ell = ell;
    if (A.rows() > 0) {
        cert.alpha = -linalg::lambda_max_sym(lmi_m1(A, B, gain.K, cert.P, cert.D, cert.C));
        cert.beta_min = linalg::lambda_min_sym(cert.P);
        cert.beta_max = linalg::lambda_max_sym(cert.P);
    }
    return cert;
}

Certificate build_certificate(const Eigen::MatrixXd& A, const Eigen::MatrixXd& B, const Gain& gain,
                              SaturationLevel ell, const CertificateOptions& opts) {
    ell.validate();
    const Eigen::Index n = A.rows();
    const Eigen::Index m = B.cols();
    const Eigen::MatrixXd& K = gain.K;
    require(K.rows() == m && K.cols() == n, "certificate: K has the wrong shape");
    if (n == 0) {
        Certificate c;
        c.P = Eigen::MatrixXd(0, 0);
        c.D = Eigen::VectorXd::Ones(m);
        c.C = Eigen::MatrixXd(m, 0);
        c.alpha = std::numeric_limits<double>::infinity();
        c.ell = ell;
        return c;
    }
    const Eigen::MatrixXd Acl = A + B * K;
    require(linalg::spectral_abscissa(Acl) < 0.0, "certificate: A + BK must be Hurwitz");

    const Eigen::MatrixXd P0 = linalg::solve_lyapunov(Acl, Eigen::MatrixXd::Identity(n, n));
    const double p0min = linalg::lambda_min_sym(P0);
    if (!(p0min > 0.0)) {
        throw Error(ErrorKind::CertificateFailure, "Lyapunov solution is not positive definite");
    }
    double c = 1.0;
    if (!ell.is_infinite()) {
        const double kk = linalg::lambda_max_sym(K.transpose() * K);
        c = std::max(1.0, (1.0 + opts.theta) * kk / (ell.ell * ell.ell * p0min));
    }
    const Eigen::MatrixXd P = c * P0;
    const Eigen::MatrixXd C = Eigen::MatrixXd::Zero(m, n);

    // With C = 0 the Schur complement of the -2D block is
    // -c I + (PB)(PB)^T / (2d), negative definite once d exceeds the bound.
    const Eigen::MatrixXd PB = P * B;
    const double pbb = linalg::lambda_max_sym(PB * PB.transpose());
    double d = std::max(1e-300, (1.0 + opts.theta) * pbb / (2.0 * c));
    auto lmax = [&](double dd) {
        return linalg::lambda_max_sym(lmi_m1(A, B, K, P, Eigen::VectorXd::Constant(m, dd), C));
    };
    int it = 0;
    while (!(lmax(d) < 0.0)) {
        if (++it > opts.max_doublings) {
            throw Error(ErrorKind::CertificateFailure, "no D found that makes M1 negative definite");
        }
        d *= 2.0;
    }
    // lambda_max(M1) is convex in d, so a golden-section search over a
    // bracket around the feasible d maximises alpha.
    if (opts.refine_iterations > 0) {
        double lo = std::log(d) - std::log(1e3);
        double hi = std::log(d) + std::log(1e6);
        const double g = (std::sqrt(5.0) - 1.0) / 2.0;
        double x1 = hi - g * (hi - lo);
        double x2 = lo + g * (hi - lo);
        double f1 = lmax(std::exp(x1));
        double f2 = lmax(std::exp(x2));
        for (int k = 0; k < opts.refine_iterations; ++k) {
            if (f1 < f2) {
                hi = x2;
                x2 = x1;
                f2 = f1;
                x1 = hi - g * (hi - lo);
                f1 = lmax(std::exp(x1));
            } else {
                lo = x1;
                x1 = x2;
                f1 = f2;
                x2 = lo + g * (hi - lo);
                f2 = lmax(std::exp(x2));
            }
        }
        const double best = std::exp(f1 < f2 ? x1 : x2);
        if (lmax(best) < lmax(d)) {
            d = best;
        }
    }
    return make_certificate(A, B, gain, P, Eigen::VectorXd::Constant(m, d), C, ell);
}

Certificate build_certificate(const ModalSystem& ms, const Gain& gain, SaturationLevel ell,
                              const CertificateOptions& opts) {
    return build_certificate(ms.A, ms.B, gain, ell, opts);
}

CertificateCheck check_certificate(const Certificate& cert, const Eigen::MatrixXd& A, const Eigen::MatrixXd& B,
                                   const Gain& gain, double m2_tol) {
    check_shapes(A, B, gain.K, cert.P, cert.D, cert.C);
    CertificateCheck out;
    if (A.rows() == 0) {
        out.ok = true;
        return out;
    }
    out.lambda_max_m1 = linalg::lambda_max_sym(lmi_m1(A, B, gain.K, cert.P, cert.D, cert.C));
    out.lambda_min_m2 = linalg::lambda_min_sym(lmi_m2(gain.K, cert.P, cert.C, cert.ell));
    const Eigen::MatrixXd KC = gain.K - cert.C;
    const double inv = cert.ell.is_infinite() ? 0.0 : 1.0 / (cert.ell.ell * cert.ell.ell);
    out.lambda_min_schur = linalg::lambda_min_sym(cert.P - inv * KC.transpose() * KC);
    out.lambda_min_p = linalg::lambda_min_sym(cert.P);
    out.ok = out.lambda_max_m1 < 0.0 && out.lambda_min_m2 >= -m2_tol && out.lambda_min_p > 0.0;
    return out;
}

CertificateCheck check_certificate(const Certificate& cert, const ModalSystem& ms, const Gain& gain,
                                   double m2_tol) {
    return check_certificate(cert, ms.A, ms.B, gain, m2_tol);
}

bool ellipsoid_contains(const Certificate& cert, const Eigen::VectorXd& z) {
    require(z.size() == cert.P.rows(), "ellipsoid_contains: dimension mismatch");
    return z.dot(cert.P * z) <= 1.0;
}

H2Constants select_h2_constants(const Certificate& cert, const ModalSystem& ms, const Gain& gain,
                                double theta) {
    if (ms.n >= ms.modes() || ms.sigma[ms.n] >= 0.0) {
        throw Error(ErrorKind::GapTooSmall, "sigma_{n+1} must be negative; the unstable count is wrong");
    }
    require(cert.alpha > 0.0 && std::isfinite(cert.alpha), "H2 constants need a finite positive alpha");
    const double sn1 = ms.sigma[ms.n];
    const double s1 = ms.sigma.front();
    const double lambda = ms.es ? ms.es->params().lambda : 0.0;
    double bsum = 0.0;
    for (double v : ms.actuator_norm_sq) {
        bsum += v;
    }
    const double knorm = linalg::frobenius(gain.K);

    H2Constants h;
    h.C3 = 1.0 / cert.alpha;
    const double room = cert.alpha - 1.0 / (2.0 * h.C3);
    const double lower = std::max({-1.0 / sn1, 2.0 * h.C3 * cert.beta_max, knorm * knorm * bsum / room,
                                   // keeps C1 > 0 and makes the lower sandwich bound hold
                                   (2.0 * std::max(s1, 0.0) + 1.5) / cert.beta_min});
    h.M = (1.0 + theta) * lower;
    h.C1 = std::min((h.M * cert.beta_min - s1) / 2.0, 0.5);
    h.C2 = std::max(lambda * lambda, 2.0 - lambda * lambda / sn1);
    h.C4 = std::max(0.5, h.M * cert.beta_max / 2.0);
    h.a = 1.0 / (2.0 * h.C3 * cert.beta_max);
    const auto bad = h2_violations(h, cert, ms, gain);
    if (!bad.empty()) {
        throw Error(ErrorKind::CertificateFailure, "H2 constants violate: " + bad.front());
    }
    return h;
}

std::vector<std::string> h2_violations(const H2Constants& h, const Certificate& cert, const ModalSystem& ms,
                                       const Gain& gain) {
    std::vector<std::string> out;
    const double sn1 = ms.sigma.at(ms.n);
    double bsum = 0.0;
    for (double v : ms.actuator_norm_sq) {
        bsum += v;
    }
    const double kn = linalg::frobenius(gain.K);
    if (!(h.M >= -1.0 / sn1)) out.emplace_back("M >= -1/sigma_{n+1}");
    if (!(h.C3 > 1.0 / (2.0 * cert.alpha))) out.emplace_back("C3 > 1/(2 alpha)");
    if (!(kn * kn * bsum - cert.alpha * h.M < -h.M / (2.0 * h.C3))) out.emplace_back("|K|^2 sum|b|^2 - alpha M < -M/(2 C3)");
    if (!(h.M >= 2.0 * h.C3 * cert.beta_max)) out.emplace_back("M >= 2 C3 beta_max");
    if (!(h.C1 > 0.0)) out.emplace_back("C1 > 0");
    if (!(h.C2 > 0.0)) out.emplace_back("C2 > 0");
    return out;
}

} // namespace satstab
