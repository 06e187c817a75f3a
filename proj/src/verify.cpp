#include <cmath>
#include <random>
#include <sstream>

#include "satstab/commands.hpp"
#include "satstab/gronwall.hpp"
#include "satstab/linalg.hpp"

namespace satstab::cli {

namespace {

class Suite {
public:
    explicit Suite(std::string name) { r_.name = std::move(name); }

    void check(bool ok, const std::string& what) {
        ++r_.checks;
        if (!ok && r_.failures.size() < 20) {
            r_.failures.push_back(what);
        }
    }
    SuiteResult done() { return std::move(r_); }

private:
    SuiteResult r_;
};

std::string num(double v) { return format_double(v); }

Eigen::VectorXd gaussian(std::mt19937_64& rng, Eigen::Index n) {
    std::normal_distribution<double> g(0.0, 1.0);
    Eigen::VectorXd v(n);
    for (Eigen::Index i = 0; i < n; ++i) v(i) = g(rng);
    return v;
}

SuiteResult spectral_suite(const EigenSystem& es) {
    Suite s("spectral");
    const auto v = es.values();
    for (std::size_t j = 1; j < v.size(); ++j) {
        s.check(v[j] <= v[j - 1], "eigenvalues not sorted at j = " + std::to_string(j + 1));
    }
    const double orth = orthonormality_error(es);
    s.check(orth <= 1e-10, "orthonormality error " + num(orth));
    for (std::size_t j = 0; j < es.count(); ++j) {
        const double er = eigen_residual(es, j);
        const double br = bc_residual(es, j);
        s.check(er <= 1e-6, "eigen residual of mode " + std::to_string(j + 1) + " is " + num(er));
        s.check(br <= 1e-7, "boundary residual of mode " + std::to_string(j + 1) + " is " + num(br));
    }
    return s.done();
}

SuiteResult modal_suite(const ModalSystem& ms, std::mt19937_64& rng) {
    Suite s("modal");
    if (ms.mode == ModalMode::Internal) {
        const Eigen::MatrixXd tail = ms.b_tail();
        for (Eigen::Index k = 0; k < tail.cols(); ++k) {
            const double t = tail.col(k).squaredNorm();
            const double b = ms.actuator_norm_sq[static_cast<std::size_t>(k)];
            s.check(t <= b * (1.0 + 1e-10), "Bessel fails for channel " + std::to_string(k + 1) + ": " + num(t) +
                                                " > " + num(b));
        }
        for (std::size_t i = 0; i < ms.n; ++i) {
            s.check(ms.A(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(i)) == ms.sigma[i],
                    "A is not diag(sigma)");
        }
    } else {
        s.check(ms.A.row(0).cwiseAbs().maxCoeff() == 0.0, "boundary A first row is not zero");
        s.check(ms.B(0, 0) == 1.0, "boundary B does not start with 1");
        const Lifting& L = ms.lifting;
        s.check(L.d(0.0) == 0.0 && std::abs(L.d(L.length)) <= 1e-15 * L.length, "d(0) = d(L) = 0 fails");
        s.check(L.d(0.0, 1) == 1.0 && std::abs(L.d(L.length, 1)) <= 1e-15, "d'(0) = 1, d'(L) = 0 fails");
        bool zero = false;
        for (auto z : linalg::eigenvalues(ms.A)) {
            zero = zero || std::abs(z) <= 1e-12 * std::max(1.0, ms.A.norm());
        }
        s.check(zero, "boundary A lacks the integrator eigenvalue 0");
    }
    const Eigen::VectorXd state = gaussian(rng, static_cast<Eigen::Index>(ms.modes()));
    std::vector<double> sv(state.begin(), state.end());
    const auto [z, tail] = project(sv, ms.n);
    double nz = 0.0, nt = 0.0;
    for (double x : z) nz += x * x;
    for (double x : tail) nt += x * x;
    s.check(std::abs(nz + nt - state.squaredNorm()) <= 1e-12 * state.squaredNorm(), "Parseval split fails");
    return s.done();
}

SuiteResult saturation_suite(std::mt19937_64& rng) {
    Suite s("saturation");
    std::uniform_real_distribution<double> U(0.0, 1.0);
    std::uniform_int_distribution<int> dim(1, 4);
    int violations = 0;
    double worst = -1.0;
    const int samples = 10000;
    for (int i = 0; i < samples; ++i) {
        const int n = dim(rng);
        const int m = dim(rng);
        const SaturationLevel ell{0.1 + 2.0 * U(rng)};
        const Eigen::VectorXd z = 3.0 * gaussian(rng, n);
        Eigen::MatrixXd K(m, n), G(m, n);
        for (int r = 0; r < m; ++r) {
            K.row(r) = 3.0 * gaussian(rng, n).transpose();
            G.row(r) = gaussian(rng, n).transpose();
        }
        // Scale G so that |(G z)_j| <= ell, then C = K - G meets the hypothesis.
        const double gz = (G * z).cwiseAbs().maxCoeff();
        if (gz > 0.0) G *= ell.ell * U(rng) / gz;
        const Eigen::MatrixXd C = K - G;
        Eigen::VectorXd D(m);
        for (int r = 0; r < m; ++r) D(r) = 0.01 + 10.0 * U(rng);
        const SectorCheck sc = sector_holds(z, K, C, D, ell);
        if (sc.hypothesis && !sc.inequality) {
            ++violations;
            worst = std::max(worst, sc.value);
        }
        const double a = 4.0 * (U(rng) - 0.5), b = 4.0 * (U(rng) - 0.5);
        s.check(std::abs(sat(a, ell) - sat(b, ell)) <= std::abs(a - b), "sat is not 1-Lipschitz");
        s.check(std::abs(sat(a, ell)) <= std::min(std::abs(a), ell.ell), "|sat(s)| > min(|s|, ell)");
    }
    s.check(violations == 0,
            "sector inequality violated " + std::to_string(violations) + " times (worst " + num(worst) + ")");
    return s.done();
}

SuiteResult certificate_suite(const ModalSystem& ms, const Gain& gain, const Certificate& cert,
                              const std::optional<H2Constants>& h2, std::mt19937_64& rng) {
    Suite s("certificate");
    const Eigen::Index n = ms.A.rows();
    if (n == 0) {
        s.check(true, "");
        return s.done();
    }
    const double asym = (cert.P - cert.P.transpose()).cwiseAbs().maxCoeff();
    s.check(asym <= 1e-9 * std::max(1.0, cert.P.cwiseAbs().maxCoeff()), "P symmetric: asymmetry " + num(asym));
    s.check((cert.D.array() > 0.0).all(), "D positive diagonal");
    const double pmin = linalg::lambda_min_sym(0.5 * (cert.P + cert.P.transpose()));
    s.check(pmin > 0.0, "P positive definite: lambda_min(P) = " + num(pmin));
    if (pmin <= 0.0 || !(cert.D.array() > 0.0).all() || asym > 1e-6) {
        return s.done();
    }
    const CertificateCheck chk = check_certificate(cert, ms, gain);
    s.check(chk.lambda_max_m1 < 0.0, "M1 negative definite: lambda_max(M1) = " + num(chk.lambda_max_m1));
    s.check(chk.lambda_min_m2 >= -1e-9, "M2 positive semidefinite: lambda_min(M2) = " + num(chk.lambda_min_m2));
    s.check((chk.lambda_min_schur >= -1e-9) == (chk.lambda_min_m2 >= -1e-9), "Schur complement equivalence");

    const Eigen::MatrixXd Acl = ms.A + ms.B * gain.K;
    const Eigen::MatrixXd Lyap = Acl.transpose() * cert.P + cert.P * Acl;
    int bad = 0;
    for (int i = 0; i < 1000; ++i) {
        const Eigen::VectorXd z = gaussian(rng, n);
        bad += z.dot(Lyap * z) < 0.0 ? 0 : 1;
    }
    s.check(bad == 0, "z^T (Acl^T P + P Acl) z < 0 failed for " + std::to_string(bad) + " of 1000 samples");

    if (!cert.ell.is_infinite()) {
        // Points on the boundary of the ellipsoid via the Cholesky factor.
        const Eigen::LLT<Eigen::MatrixXd> llt(cert.P);
        const Eigen::MatrixXd KC = gain.K - cert.C;
        int out = 0;
        for (int i = 0; i < 10000; ++i) {
            Eigen::VectorXd v = gaussian(rng, n);
            v /= v.norm();
            const Eigen::VectorXd z = llt.matrixU().solve(v);
            out += (KC * z).cwiseAbs().maxCoeff() <= cert.ell.ell * (1.0 + 1e-9) ? 0 : 1;
        }
        s.check(out == 0, "sector inclusion failed on " + std::to_string(out) + " boundary points of R");
    }
    if (h2) {
        for (const auto& v : h2_violations(*h2, cert, ms, gain)) {
            s.check(false, "H2 constant condition " + v);
        }
    }
    return s.done();
}

SuiteResult simulation_suite(const ModalSystem& ms, const Gain& gain, const Certificate& cert,
                             const std::optional<H2Constants>& h2, const ExperimentConfig& cfg) {
    Suite s("simulation");
    SimConfig sc;
    sc.dt = cfg.dt;
    sc.T = std::min(cfg.T, 1.0);
    sc.delta = cfg.delta;
    sc.nu = cfg.nu;
    Simulator sim(ms, gain, cfg.ell, sc, &cert, h2 ? &*h2 : nullptr);
    std::vector<double> y0 = cfg.initial.modal.empty()
                                 ? preset_initial(*ms.es, cfg.initial.preset, cfg.initial.amplitude, ms.n)
                                 : cfg.initial.modal;
    const Trajectory tr = sim.run(y0);
    const EigenSystem& es = *ms.es;
    std::vector<double> grid(es.stride());
    const auto w = es.quadrature().weights();
    for (std::size_t i = 0; i < tr.samples(); i += std::max<std::size_t>(1, tr.samples() / 20)) {
        es.synthesize(tr.states[i], 0, grid);
        double q = 0.0;
        for (std::size_t k = 0; k < grid.size(); ++k) q += w[k] * grid[k] * grid[k];
        const double p = tr.l2[i] * tr.l2[i];
        s.check(std::abs(q - p) <= 1e-12 * std::max(p, 1e-300) + 1e-300,
                "Parseval at t = " + num(tr.times[i]) + ": " + num(q) + " vs " + num(p));
    }
    if (h2) {
        for (std::size_t i = 0; i < tr.samples(); ++i) {
            s.check(tr.v2[i] >= tr.v2_lower[i] * (1.0 - 1e-12),
                    "V2 sandwich lower bound at t = " + num(tr.times[i]));
        }
    }
    if (ms.mode == ModalMode::Boundary) {
        for (std::size_t i = 0; i < tr.samples(); ++i) {
            const double u = tr.controls[i][0];
            s.check(tr.recon_l2[i] <= tr.l2[i] + std::abs(u) * tr.d_norm + 1e-12,
                    "reconstruction bound at t = " + num(tr.times[i]));
        }
    }
    s.check(tr.exit_reason != ExitReason::BlowUp, "run blew up");
    return s.done();
}

SuiteResult identities_suite(const EigenSystem& es, std::mt19937_64& rng) {
    Suite s("nonlinear identities");
    const std::size_t J = std::min<std::size_t>(es.count(), 16);
    const std::size_t Q = es.stride();
    std::vector<double> y(Q), yx(Q), yxx(Q);
    const auto w = es.quadrature().weights();
    std::normal_distribution<double> g(0.0, 1.0);
    for (int trial = 0; trial < 20; ++trial) {
        std::vector<double> c(J);
        for (std::size_t j = 0; j < J; ++j) c[j] = g(rng) / static_cast<double>((j + 1) * (j + 1));
        es.synthesize(c, 0, y);
        es.synthesize(c, 1, yx);
        es.synthesize(c, 2, yxx);
        double flux = 0.0, fscale = 0.0, ch = 0.0, cscale = 0.0;
        for (std::size_t q = 0; q < Q; ++q) {
            flux += w[q] * y[q] * y[q] * yx[q];
            fscale += w[q] * std::abs(y[q] * y[q] * yx[q]);
            const double t = (6.0 * y[q] * yx[q] * yx[q] + 3.0 * y[q] * y[q] * yxx[q]) * y[q];
            ch += w[q] * t;
            cscale += w[q] * std::abs(t);
        }
        if (es.bc() != BoundaryCondition::NeumannCH) {
            s.check(std::abs(flux) <= 1e-10 * std::max(1.0, fscale), "flux cancellation: " + num(flux));
        }
        s.check(ch <= 1e-12 * std::max(1.0, cscale), "CH dissipativity: <(y^3)'', y> = " + num(ch));
    }
    return s.done();
}

SuiteResult gronwall_suite() {
    Suite s("gronwall");
    std::vector<double> grid(101);
    for (std::size_t i = 0; i < grid.size(); ++i) grid[i] = 0.05 * static_cast<double>(i);
    const auto r = gronwall_bound(0.5, [](double) { return -1.0; }, [](double) { return 1.0; }, 2.0, grid);
    for (std::size_t i = 0; i < grid.size(); ++i) {
        const double e = std::exp(-grid[i]);
        s.check(std::abs(r.bound[i] - e / (1.0 + e)) <= 1e-8, "logistic oracle at t = " + num(grid[i]));
    }
    return s.done();
}

} // namespace

std::vector<SuiteResult> run_verification(const Pipeline& p, const ExperimentConfig& cfg,
                                          const std::optional<LoadedCertificate>& external) {
    std::mt19937_64 rng(cfg.seed);
    const Gain& gain = external ? external->gain : *p.gain;
    const Certificate& cert = external ? external->cert : *p.cert;
    const std::optional<H2Constants> h2 = external ? external->h2 : p.h2;
    std::vector<SuiteResult> out;
    out.push_back(spectral_suite(*p.es));
    out.push_back(modal_suite(*p.ms, rng));
    out.push_back(saturation_suite(rng));
    out.push_back(certificate_suite(*p.ms, gain, cert, h2, rng));
    const bool cert_ok = out.back().failures.empty();
    if (cert_ok) {
        out.push_back(simulation_suite(*p.ms, gain, cert, h2, cfg));
    }
    out.push_back(identities_suite(*p.es, rng));
    out.push_back(gronwall_suite());
    return out;
}

} // namespace satstab::cli
