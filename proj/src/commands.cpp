#include "satstab/commands.hpp"

#include <charconv>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <limits>
#include <ostream>
#include <sstream>

#include "json.hpp"

#include "satstab/gronwall.hpp"
#include "satstab/linalg.hpp"

namespace satstab::cli {

using nlohmann::json;
namespace fs = std::filesystem;

int exit_code(ErrorKind kind) noexcept {
    switch (kind) {
    case ErrorKind::InvalidArgument:
    case ErrorKind::AllModesUnstable:
        return ConfigError;
    case ErrorKind::CriticalLength:
    case ErrorKind::NotStabilizable:
    case ErrorKind::BoundExpired:
        return Infeasible;
    case ErrorKind::ConvergenceFailure:
    case ErrorKind::CertificateFailure:
    case ErrorKind::GapTooSmall:
    case ErrorKind::BlowUp:
    case ErrorKind::NonPositiveChannel:
        return NumericalFailure;
    }
    return NumericalFailure;
}

std::string format_double(double v) {
    char buf[64];
    const auto res = std::to_chars(buf, buf + sizeof buf, v);
    return std::string(buf, res.ptr);
}

namespace {

constexpr std::size_t probe_modes = 64;

json matrix_json(const Eigen::MatrixXd& M) {
    json out = json::array();
    for (Eigen::Index i = 0; i < M.rows(); ++i) {
        json row = json::array();
        for (Eigen::Index j = 0; j < M.cols(); ++j) {
            row.push_back(M(i, j));
        }
        out.push_back(row);
    }
    return out;
}

Eigen::MatrixXd json_matrix(const json& v, std::string_view name, Eigen::Index rows, Eigen::Index cols) {
    require(v.is_array() && static_cast<Eigen::Index>(v.size()) == rows,
            "certificate: " + std::string(name) + " must have " + std::to_string(rows) + " rows");
    Eigen::MatrixXd M(rows, cols);
    for (Eigen::Index i = 0; i < rows; ++i) {
        const json& r = v[static_cast<std::size_t>(i)];
        require(r.is_array() && static_cast<Eigen::Index>(r.size()) == cols,
                "certificate: " + std::string(name) + " must have " + std::to_string(cols) + " columns");
        for (Eigen::Index j = 0; j < cols; ++j) {
            require(r[static_cast<std::size_t>(j)].is_number(), "certificate: non-numeric entry");
            M(i, j) = r[static_cast<std::size_t>(j)].get<double>();
        }
    }
    return M;
}

void write_matrix_csv(const fs::path& path, const Eigen::MatrixXd& M) {
    std::ofstream os(path);
    require(static_cast<bool>(os), "cannot write " + path.string());
    for (Eigen::Index i = 0; i < M.rows(); ++i) {
        for (Eigen::Index j = 0; j < M.cols(); ++j) {
            os << (j ? "," : "") << format_double(M(i, j));
        }
        os << '\n';
    }
}

fs::path output_dir(const ExperimentConfig& cfg) {
    fs::path dir(cfg.output_dir);
    std::error_code ec;
    fs::create_directories(dir, ec);
    require(!ec, "cannot create output directory '" + cfg.output_dir + "': " + ec.message());
    return dir;
}

void write_text(const fs::path& path, const std::string& text) {
    std::ofstream os(path);
    require(static_cast<bool>(os), "cannot write " + path.string());
    os << text;
}

template <class F>
int guarded(std::ostream& err, F&& body) {
    try {
        return body();
    } catch (const Error& e) {
        err << "error: " << e.what() << '\n';
        return exit_code(e.kind());
    } catch (const json::exception& e) {
        err << "error: malformed JSON: " << e.what() << '\n';
        return ConfigError;
    } catch (const std::exception& e) {
        err << "error: " << e.what() << '\n';
        return NumericalFailure;
    }
}

std::vector<double> initial_state(const ExperimentConfig& cfg, const Pipeline& p) {
    if (!cfg.initial.modal.empty()) {
        require(cfg.initial.modal.size() <= p.es->count(),
                "initial.modal has more entries than retained modes (" + std::to_string(p.es->count()) + ")");
        return cfg.initial.modal;
    }
    return preset_initial(*p.es, cfg.initial.preset, cfg.initial.amplitude, p.unstable.n);
}

} // namespace

Pipeline build_pipeline(const ExperimentConfig& cfg, Pipeline::Stage stage) {
    cfg.validate();
    if (stage != Pipeline::Stage::Spectrum) {
        require(cfg.lambda > 0.0, "lambda must be > 0 for control (got " + format_double(cfg.lambda) + ")");
    }
    const OperatorParams params{cfg.lambda, cfg.length};
    Pipeline p;
    std::size_t J = cfg.J;
    if (J == 0) {
        auto probe = std::make_shared<const EigenSystem>(eigen_system(params, cfg.bc, probe_modes));
        const auto uc = unstable_count(*probe);
        J = std::max<std::size_t>(probe_modes, 8 * uc.n);
        p.es = J == probe_modes ? probe : std::make_shared<const EigenSystem>(eigen_system(params, cfg.bc, J));
    } else {
        p.es = std::make_shared<const EigenSystem>(eigen_system(params, cfg.bc, J));
    }
    p.unstable = unstable_count(*p.es);
    if (stage == Pipeline::Stage::Spectrum) {
        return p;
    }
    if (cfg.mode == ModalMode::Boundary) {
        p.ms = assemble_boundary(p.es, p.unstable.n);
    } else {
        require(!cfg.actuators.empty(), "internal control needs at least one actuator");
        p.ms = assemble_internal(p.es, cfg.actuators);
    }
    if (stage == Pipeline::Stage::Modal) {
        return p;
    }
    const ModalSystem& ms = *p.ms;
    p.kalman = kalman_diagnose(ms);
    GainTarget target;
    target.poles = cfg.synthesis.poles;
    target.lqr = cfg.synthesis.lqr;
    target.q = cfg.synthesis.q;
    target.r = cfg.synthesis.r;
    p.gain = design_gain(ms, target);
    if (cfg.synthesis.P) {
        const Eigen::Index n = ms.A.rows();
        const Eigen::Index m = ms.B.cols();
        Eigen::MatrixXd C = cfg.synthesis.C ? *cfg.synthesis.C : Eigen::MatrixXd::Zero(m, n);
        require(cfg.synthesis.P->rows() == n && cfg.synthesis.P->cols() == n,
                "synthesis.P must be " + std::to_string(n) + "x" + std::to_string(n));
        require(cfg.synthesis.D->size() == m, "synthesis.D must have " + std::to_string(m) + " entries");
        require(C.rows() == m && C.cols() == n, "synthesis.C has the wrong shape");
        p.cert = make_certificate(ms.A, ms.B, *p.gain, *cfg.synthesis.P, *cfg.synthesis.D, C, cfg.ell);
        const auto chk = check_certificate(*p.cert, ms, *p.gain);
        if (!chk.ok) {
            throw Error(ErrorKind::CertificateFailure,
                        "supplied certificate is invalid: lambda_max(M1) = " + format_double(chk.lambda_max_m1) +
                            ", lambda_min(M2) = " + format_double(chk.lambda_min_m2) +
                            ", lambda_min(P) = " + format_double(chk.lambda_min_p));
        }
    } else {
        p.cert = build_certificate(ms, *p.gain, cfg.ell);
    }
    if (ms.state_dim() > 0) {
        p.h2 = select_h2_constants(*p.cert, ms, *p.gain);
    }
    return p;
}

std::string certificate_json(const Pipeline& p, const ExperimentConfig& cfg) {
    const ModalSystem& ms = *p.ms;
    json doc;
    doc["mode"] = ms.mode == ModalMode::Internal ? "internal" : "boundary";
    doc["n"] = ms.n;
    doc["eta"] = ms.eta;
    doc["K"] = matrix_json(p.gain->K);
    json spec = json::array();
    for (auto z : p.gain->closed_loop_spectrum) {
        spec.push_back({z.real(), z.imag()});
    }
    doc["closed_loop_spectrum"] = spec;
    const Certificate& c = *p.cert;
    doc["P"] = matrix_json(c.P);
    doc["D"] = std::vector<double>(c.D.begin(), c.D.end());
    doc["C"] = matrix_json(c.C);
    if (std::isfinite(c.alpha)) {
        doc["alpha"] = c.alpha;
    } else {
        doc["alpha"] = nullptr;
    }
    doc["beta_min"] = c.beta_min;
    doc["beta_max"] = c.beta_max;
    if (cfg.ell.is_infinite()) {
        doc["ell"] = "inf";
    } else {
        doc["ell"] = cfg.ell.ell;
    }
    if (p.h2) {
        doc["M"] = p.h2->M;
        doc["C1"] = p.h2->C1;
        doc["C2"] = p.h2->C2;
        doc["C3"] = p.h2->C3;
        doc["C4"] = p.h2->C4;
        doc["a"] = p.h2->a;
    }
    const KalmanReport& k = *p.kalman;
    json kj{{"rank", k.rank}, {"dim", k.dim}, {"controllable", k.controllable}, {"stabilizable", k.stabilizable}};
    if (k.vandermonde_value) kj["vandermonde_value"] = *k.vandermonde_value;
    if (k.kalman_determinant) kj["kalman_determinant"] = *k.kalman_determinant;
    doc["kalman"] = kj;
    return doc.dump(2);
}

LoadedCertificate load_certificate(const std::string& path, const ModalSystem& ms) {
    std::ifstream in(path);
    require(static_cast<bool>(in), "cannot open certificate file '" + path + "'");
    json doc;
    try {
        doc = json::parse(in);
    } catch (const json::parse_error& e) {
        throw Error(ErrorKind::InvalidArgument, std::string("certificate is not valid JSON: ") + e.what());
    }
    require(doc.is_object(), "certificate must be a JSON object");
    for (auto key : {"K", "P", "D", "C"}) {
        require(doc.contains(key), std::string("certificate: missing ") + key);
    }
    const auto n = static_cast<Eigen::Index>(ms.state_dim());
    const auto m = static_cast<Eigen::Index>(ms.channels());
    LoadedCertificate out;
    out.gain = make_gain(ms.A, ms.B, json_matrix(doc["K"], "K", m, n));
    Eigen::MatrixXd P = n > 0 ? json_matrix(doc["P"], "P", n, n) : Eigen::MatrixXd(0, 0);
    Eigen::MatrixXd C = n > 0 ? json_matrix(doc["C"], "C", m, n) : Eigen::MatrixXd(m, 0);
    require(doc["D"].is_array() && static_cast<Eigen::Index>(doc["D"].size()) == m,
            "certificate: D must have " + std::to_string(m) + " entries");
    Eigen::VectorXd D(m);
    for (Eigen::Index i = 0; i < m; ++i) {
        D(i) = doc["D"][static_cast<std::size_t>(i)].get<double>();
    }
    SaturationLevel ell;
    if (doc.contains("ell") && doc["ell"].is_number()) {
        ell.ell = doc["ell"].get<double>();
    }
    out.cert.P = P;
    out.cert.D = D;
    out.cert.C = C;
    out.cert.ell = ell;
    if (n > 0) {
        out.cert.alpha = -linalg::lambda_max_sym(lmi_m1(ms.A, ms.B, out.gain.K, P, D, C));
        out.cert.beta_min = linalg::lambda_min_sym(P);
        out.cert.beta_max = linalg::lambda_max_sym(P);
    }
    if (doc.contains("M")) {
        H2Constants h;
        h.M = doc["M"].get<double>();
        h.C1 = doc["C1"].get<double>();
        h.C2 = doc["C2"].get<double>();
        h.C3 = doc["C3"].get<double>();
        h.C4 = doc["C4"].get<double>();
        h.a = doc["a"].get<double>();
        out.h2 = h;
    }
    return out;
}

void write_trajectory_csv(std::ostream& os, const Trajectory& tr) {
    const std::size_t J = tr.states.empty() ? 0 : tr.states.front().size();
    const std::size_t m = tr.controls.empty() ? 0 : tr.controls.front().size();
    os << "t";
    for (std::size_t j = 1; j <= J; ++j) os << ",y_" << j;
    for (std::size_t k = 1; k <= m; ++k) os << ",u_" << k;
    for (std::size_t k = 1; k <= m; ++k) os << ",sat_active_" << k;
    os << ",l2,h1,h2,v1,v2\n";
    for (std::size_t i = 0; i < tr.samples(); ++i) {
        os << format_double(tr.times[i]);
        for (double v : tr.states[i]) os << ',' << format_double(v);
        for (double v : tr.controls[i]) os << ',' << format_double(v);
        for (auto a : tr.sat_active[i]) os << ',' << static_cast<int>(a);
        os << ',' << format_double(tr.l2[i]) << ',' << format_double(tr.h1[i]) << ','
           << format_double(tr.h2[i]) << ',' << format_double(tr.v1[i]) << ',' << format_double(tr.v2[i])
           << '\n';
    }
}

int cmd_spectrum(const ExperimentConfig& cfg, std::ostream& out, std::ostream& err) {
    return guarded(err, [&] {
        const Pipeline p = build_pipeline(cfg, Pipeline::Stage::Spectrum);
        const EigenSystem& es = *p.es;
        const fs::path dir = output_dir(cfg);
        std::ofstream csv(dir / "spectrum.csv");
        require(static_cast<bool>(csv), "cannot write spectrum.csv");
        csv << "index,label,sigma,bc_residual,norm_error,eigen_residual\n";
        double worst = 0.0;
        for (std::size_t j = 0; j < es.count(); ++j) {
            const double er = eigen_residual(es, j);
            const double br = bc_residual(es, j);
            worst = std::max({worst, er, br});
            csv << j + 1 << ',' << es.labels()[j] << ',' << format_double(es.values()[j]) << ','
                << format_double(br) << ',' << format_double(norm_error(es, j)) << ',' << format_double(er)
                << '\n';
        }
        json summary{{"bc", std::string(to_string(es.bc()))},
                     {"lambda", cfg.lambda},
                     {"length", cfg.length},
                     {"J", es.count()},
                     {"n", p.unstable.n},
                     {"eta", p.unstable.eta},
                     {"orthonormality_error", orthonormality_error(es)},
                     {"max_residual", worst}};
        write_text(dir / "spectrum.json", summary.dump(2) + "\n");
        out << "n = " << p.unstable.n << ", eta = " << format_double(p.unstable.eta) << '\n';
        for (std::size_t j = 0; j < std::min<std::size_t>(es.count(), 8); ++j) {
            out << "sigma_" << j + 1 << " = " << format_double(es.values()[j]) << '\n';
        }
        return static_cast<int>(Ok);
    });
}

int cmd_modal(const ExperimentConfig& cfg, std::ostream& out, std::ostream& err) {
    return guarded(err, [&] {
        const Pipeline p = build_pipeline(cfg, Pipeline::Stage::Modal);
        const ModalSystem& ms = *p.ms;
        const fs::path dir = output_dir(cfg);
        write_matrix_csv(dir / "A.csv", ms.A);
        write_matrix_csv(dir / "B.csv", ms.B);
        write_matrix_csv(dir / "b_tail.csv", ms.b_tail());
        json summary{{"n", ms.n},
                     {"eta", ms.eta},
                     {"mode", ms.mode == ModalMode::Internal ? "internal" : "boundary"},
                     {"J", ms.modes()},
                     {"channels", ms.channels()}};
        write_text(dir / "modal.json", summary.dump(2) + "\n");
        out << summary.dump(2) << '\n';
        return static_cast<int>(Ok);
    });
}

int cmd_synth(const ExperimentConfig& cfg, std::ostream& out, std::ostream& err) {
    return guarded(err, [&] {
        const Pipeline p = build_pipeline(cfg, Pipeline::Stage::Synthesis);
        const fs::path dir = output_dir(cfg);
        write_text(dir / "certificate.json", certificate_json(p, cfg) + "\n");
        const auto chk = check_certificate(*p.cert, *p.ms, *p.gain);
        out << "unstable modes: " << p.ms->n << " (eta = " << format_double(p.ms->eta) << ")\n";
        out << "kalman rank: " << p.kalman->rank << " / " << p.kalman->dim << '\n';
        out << "alpha = " << format_double(p.cert->alpha) << '\n';
        out << "lambda_max(M1) = " << format_double(chk.lambda_max_m1)
            << ", lambda_min(M2) = " << format_double(chk.lambda_min_m2) << '\n';
        if (p.h2) {
            out << "M = " << format_double(p.h2->M) << ", a = " << format_double(p.h2->a) << '\n';
        }
        out << "certificate " << (chk.ok ? "ok" : "FAILED") << " -> " << (dir / "certificate.json").string()
            << '\n';
        return static_cast<int>(chk.ok ? Ok : NumericalFailure);
    });
}

int cmd_simulate(const ExperimentConfig& cfg, const SimulateOptions& opts, std::ostream& out, std::ostream& err) {
    return guarded(err, [&] {
        Pipeline p = build_pipeline(cfg, Pipeline::Stage::Synthesis);
        if (opts.certificate) {
            LoadedCertificate lc = load_certificate(*opts.certificate, *p.ms);
            p.gain = lc.gain;
            p.cert = lc.cert;
            p.h2 = lc.h2;
        }
        const ModalSystem& ms = *p.ms;
        SimConfig sc;
        sc.dt = cfg.dt;
        sc.T = cfg.T;
        sc.delta = cfg.delta;
        sc.nu = cfg.nu;
        const auto steps = static_cast<std::size_t>(std::llround(cfg.T / cfg.dt));
        sc.sample_every = std::max<std::size_t>(1, steps / 2000);
        Simulator sim(ms, *p.gain, cfg.ell, sc, &*p.cert, p.h2 ? &*p.h2 : nullptr);
        const auto y0 = initial_state(cfg, p);
        const Trajectory tr = sim.run(y0);

        const fs::path dir = output_dir(cfg);
        {
            std::ofstream csv(dir / "trajectory.csv");
            require(static_cast<bool>(csv), "cannot write trajectory.csv");
            write_trajectory_csv(csv, tr);
        }
        json summary;
        summary["exit_reason"] = std::string(to_string(tr.exit_reason));
        summary["samples"] = tr.samples();
        summary["left_region"] = tr.left_region;
        auto fit = [&](std::span<const double> ch) -> json {
            try {
                const DecayFit f = fit_decay_rate(tr.times, ch, 0.0);
                return json{{"rate", f.rate}, {"prefactor", f.prefactor}, {"r_squared", f.r_squared}};
            } catch (const Error&) {
                return nullptr;
            }
        };
        const json l2fit = fit(tr.l2);
        summary["rate"] = l2fit.is_null() ? json(nullptr) : l2fit["rate"];
        summary["l2_fit"] = l2fit;
        std::vector<double> h2norm(tr.samples());
        for (std::size_t i = 0; i < tr.samples(); ++i) {
            h2norm[i] = std::sqrt(tr.l2[i] * tr.l2[i] + tr.h1[i] * tr.h1[i] + tr.h2[i] * tr.h2[i]);
        }
        const json h2fit = fit(h2norm);
        summary["h2_rate"] = h2fit.is_null() ? json(nullptr) : h2fit["rate"];
        std::size_t active = 0;
        for (const auto& a : tr.sat_active) {
            bool any = false;
            for (auto v : a) any = any || v != 0;
            active += any ? 1 : 0;
        }
        summary["sat_duty_cycle"] = tr.samples() ? static_cast<double>(active) / static_cast<double>(tr.samples()) : 0.0;
        summary["l2_initial"] = tr.l2.front();
        summary["l2_final"] = tr.l2.back();
        if (ms.mode == ModalMode::Boundary) {
            std::vector<double> uw(tr.samples());
            bool recon_ok = true;
            for (std::size_t i = 0; i < tr.samples(); ++i) {
                const double u = tr.controls[i][0];
                uw[i] = std::abs(u) + tr.l2[i];
                recon_ok = recon_ok && tr.recon_l2[i] <= tr.l2[i] + std::abs(u) * tr.d_norm + 1e-12;
            }
            const json bf = fit(uw);
            summary["boundary_rate"] = bf.is_null() ? json(nullptr) : bf["rate"];
            summary["reconstruction_bound_ok"] = recon_ok;
        }
        if (opts.sweep) {
            std::vector<double> profile = y0;
            const double scale = l2_norm(profile);
            require(scale > 0.0, "basin sweep needs nonzero initial data");
            for (double& v : profile) v /= scale;
            SimConfig quiet = sc;
            const BasinEstimate b = estimate_basin(ms, *p.gain, cfg.ell, quiet, profile, opts.sweep->first,
                                                   opts.sweep->second, opts.sweep_iterations);
            json probes = json::array();
            for (const auto& [amp, ok] : b.probes) {
                probes.push_back({{"amplitude", amp}, {"decays", ok}});
            }
            summary["basin"] = {{"epsilon", b.epsilon},
                                {"first_failure", std::isfinite(b.first_failure) ? json(b.first_failure) : json(nullptr)},
                                {"probes", probes}};
        }
        write_text(dir / "summary.json", summary.dump(2) + "\n");
        out << summary.dump(2) << '\n';
        return static_cast<int>(tr.exit_reason == ExitReason::BlowUp ? NumericalFailure : Ok);
    });
}

int cmd_verify(const ExperimentConfig& cfg, const std::optional<std::string>& certificate, std::ostream& out,
               std::ostream& err) {
    return guarded(err, [&] {
        const Pipeline p = build_pipeline(cfg, Pipeline::Stage::Synthesis);
        std::optional<LoadedCertificate> ext;
        if (certificate) {
            ext = load_certificate(*certificate, *p.ms);
        }
        out << "seed = " << cfg.seed << '\n';
        const auto results = run_verification(p, cfg, ext);
        bool all = true;
        for (const auto& r : results) {
            const bool ok = r.failures.empty();
            all = all && ok;
            out << (ok ? "PASS " : "FAIL ") << r.name << " (" << r.checks << " checks)\n";
            for (const auto& f : r.failures) {
                out << "  - " << f << '\n';
            }
        }
        out << (all ? "all suites passed" : "verification failed") << '\n';
        return static_cast<int>(all ? Ok : NumericalFailure);
    });
}

int cmd_gronwall(const GronwallArgs& args, std::ostream& out, std::ostream& err) {
    return guarded(err, [&] {
        require(args.T > 0.0 && args.steps >= 1, "gronwall: need T > 0 and steps >= 1");
        std::vector<double> grid(args.steps + 1);
        for (std::size_t i = 0; i <= args.steps; ++i) {
            grid[i] = args.T * static_cast<double>(i) / static_cast<double>(args.steps);
        }
        const double b = args.b;
        const double k = args.k;
        const GronwallResult r = gronwall_bound(
            args.v0, [b](double) { return b; }, [k](double) { return k; }, args.p, grid);
        std::ofstream csv(args.output);
        require(static_cast<bool>(csv), "cannot write " + args.output);
        csv << "t,w,bound\n";
        for (std::size_t i = 0; i < r.times.size(); ++i) {
            csv << format_double(r.times[i]) << ',' << format_double(r.w[i]) << ',' << format_double(r.bound[i])
                << '\n';
        }
        out << "bound(T) = " << format_double(r.bound.back()) << '\n';
        r.require_valid();
        return static_cast<int>(Ok);
    });
}

} // namespace satstab::cli
