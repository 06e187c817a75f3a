#include "satstab/simulate.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "satstab/errors.hpp"
#include "satstab/kernels.hpp"

namespace satstab {

void SimConfig::validate() const {
    require(std::isfinite(dt) && dt > 0.0, "dt must be positive");
    require(std::isfinite(T) && T >= 0.0, "T must be nonnegative");
    require(delta >= 0.0 && nu >= 0.0, "delta and nu must be nonnegative");
    require(sample_every >= 1, "sample_every must be at least 1");
    require(blowup_threshold > 0.0, "blow-up threshold must be positive");
}

std::string_view to_string(ExitReason r) {
    switch (r) {
    case ExitReason::Horizon: return "horizon";
    case ExitReason::BlowUp: return "blowup";
    case ExitReason::LeftRegion: return "left_region";
    }
    return "?";
}

std::span<const double> Trajectory::channel(std::string_view name) const {
    if (name == "l2") return l2;
    if (name == "h1") return h1;
    if (name == "h2") return h2;
    if (name == "v1") return v1;
    if (name == "v2") return v2;
    if (name == "recon_l2") return recon_l2;
    throw Error(ErrorKind::InvalidArgument, "unknown monitor channel '" + std::string(name) + "'");
}

double phi1(double h) noexcept {
    if (h == 0.0) {
        return 1.0;
    }
    return std::expm1(h) / h;
}

double l2_norm(std::span<const double> y) { return std::sqrt(kernels::dot(y, y)); }

double seminorm(const EigenSystem& es, std::span<const double> y, int derivative) {
    const Eigen::MatrixXd& G = derivative == 1 ? es.gram1() : es.gram2();
    const auto J = static_cast<Eigen::Index>(y.size());
    const Eigen::Map<const Eigen::VectorXd> v(y.data(), J);
    const double q = v.dot(G.topLeftCorner(J, J) * v);
    return std::sqrt(std::max(q, 0.0));
}

namespace {

double full_h2(const ModalSystem& ms, std::span<const double> y) {
    const double l = l2_norm(y);
    if (!ms.es) {
        return l;
    }
    const double a = seminorm(*ms.es, y, 1);
    const double b = seminorm(*ms.es, y, 2);
    return std::sqrt(l * l + a * a + b * b);
}

} // namespace

Simulator::Simulator(const ModalSystem& ms, const Gain& gain, SaturationLevel level, SimConfig config,
                     const Certificate* cert, const H2Constants* constants)
    : ms_(ms), K_(gain.K), level_(level), cfg_(config), cert_(cert), h2_(constants) {
    cfg_.validate();
    level_.validate();
    require(static_cast<std::size_t>(K_.cols()) == ms_.state_dim() &&
                static_cast<std::size_t>(K_.rows()) == ms_.channels(),
            "gain does not match the modal system");
    if (cfg_.delta > 0.0 || cfg_.nu > 0.0) {
        require(ms_.es != nullptr, "the nonlinear term needs eigenfunctions");
        require(ms_.mode == ModalMode::Internal, "the nonlinear term is only supported for internal control");
    }
    const std::size_t J = ms_.modes();
    decay_.resize(J);
    phi_.resize(J);
    for (std::size_t j = 0; j < J; ++j) {
        const double h = ms_.sigma[j] * cfg_.dt;
        decay_[j] = std::exp(h);
        phi_[j] = phi1(h) * cfg_.dt;
    }
    forcing_.assign(J, 0.0);
    scratch_.assign(J, 0.0);
    if (ms_.es) {
        for (auto& g : grid_) {
            g.assign(ms_.es->stride(), 0.0);
        }
    }
}

void Simulator::control(std::span<const double> z, std::span<double> applied,
                        std::span<std::uint8_t> active) const {
    const Eigen::Index m = K_.rows();
    for (Eigen::Index k = 0; k < m; ++k) {
        double h = 0.0;
        for (Eigen::Index i = 0; i < K_.cols(); ++i) {
            h += K_(k, i) * z[static_cast<std::size_t>(i)];
        }
        const double s = sat(h, level_);
        applied[static_cast<std::size_t>(k)] = s;
        active[static_cast<std::size_t>(k)] = static_cast<std::uint8_t>(s != h);
    }
}

void Simulator::step_linear(std::span<double> y, std::span<double> applied, std::span<std::uint8_t> active) {
    const std::size_t J = ms_.modes();
    require(y.size() == J, "state must have one coefficient per retained mode");
    control(y.first(ms_.n), applied, active);
    for (std::size_t j = 0; j < J; ++j) {
        double f = 0.0;
        for (std::size_t k = 0; k < applied.size(); ++k) {
            f += ms_.coeffs(static_cast<Eigen::Index>(j), static_cast<Eigen::Index>(k)) * applied[k];
        }
        forcing_[j] = f;
    }
    kernels::exp_euler(y, decay_, phi_, forcing_);
}

void Simulator::step_nonlinear(std::span<double> y, std::span<double> applied, std::span<std::uint8_t> active) {
    const std::size_t J = ms_.modes();
    require(y.size() == J, "state must have one coefficient per retained mode");
    control(y.first(ms_.n), applied, active);
    nonlinear_forcing(y, scratch_);
    for (std::size_t j = 0; j < J; ++j) {
        double f = scratch_[j];
        for (std::size_t k = 0; k < applied.size(); ++k) {
            f += ms_.coeffs(static_cast<Eigen::Index>(j), static_cast<Eigen::Index>(k)) * applied[k];
        }
        forcing_[j] = f;
    }
    kernels::exp_euler(y, decay_, phi_, forcing_);
}

void Simulator::step_boundary(double& u, std::span<double> w, double& applied, std::uint8_t& active) {
    const std::size_t J = ms_.modes();
    require(ms_.mode == ModalMode::Boundary, "step_boundary needs a boundary modal system");
    require(w.size() == J, "state must have one coefficient per retained mode");
    double h = K_(0, 0) * u;
    for (std::size_t i = 0; i < ms_.n; ++i) {
        h += K_(0, static_cast<Eigen::Index>(i + 1)) * w[i];
    }
    const double s = sat(h, level_);
    applied = s;
    active = static_cast<std::uint8_t>(s != h);
    for (std::size_t j = 0; j < J; ++j) {
        const auto jj = static_cast<Eigen::Index>(j);
        forcing_[j] = ms_.lift_coeffs(jj) * u + ms_.coeffs(jj, 0) * s;
    }
    kernels::exp_euler(w, decay_, phi_, forcing_);
    u += cfg_.dt * s;
}

void Simulator::nonlinear_forcing(std::span<const double> y, std::span<double> f) const {
    const EigenSystem& es = *ms_.es;
    const std::size_t Q = es.stride();
    auto& g0 = grid_[0];
    auto& g1 = grid_[1];
    auto& g2 = grid_[2];
    auto& g = grid_[3];
    es.synthesize(y, 0, g0);
    es.synthesize(y, 1, g1);
    es.synthesize(y, 2, g2);
    const auto w = es.quadrature().weights();
    const double delta = cfg_.delta;
    const double nu = cfg_.nu;
    for (std::size_t q = 0; q < Q; ++q) {
        const double v = g0[q];
        const double vx = g1[q];
        const double vxx = g2[q];
        // (y^3)'' = 6 y y_x^2 + 3 y^2 y_xx
        const double N = delta * v * vx - nu * (6.0 * v * vx * vx + 3.0 * v * v * vxx);
        g[q] = -N * w[q];
    }
    kernels::project(es.table(0).first(y.size() * Q), Q, g, f.first(y.size()));
}

void Simulator::record(Trajectory& tr, double t, std::span<const double> y, double u,
                       std::span<const double> applied, std::span<const std::uint8_t> active) const {
    tr.times.push_back(t);
    tr.states.emplace_back(y.begin(), y.end());
    if (ms_.mode == ModalMode::Boundary) {
        tr.controls.push_back({u});
    } else {
        tr.controls.emplace_back(applied.begin(), applied.end());
    }
    tr.sat_active.emplace_back(active.begin(), active.end());
    const double l2 = l2_norm(y);
    tr.l2.push_back(l2);
    if (ms_.es) {
        tr.h1.push_back(seminorm(*ms_.es, y, 1));
        tr.h2.push_back(seminorm(*ms_.es, y, 2));
    } else {
        tr.h1.push_back(std::numeric_limits<double>::quiet_NaN());
        tr.h2.push_back(std::numeric_limits<double>::quiet_NaN());
    }
    std::vector<double> z;
    if (ms_.mode == ModalMode::Boundary) {
        z.push_back(u);
    }
    z.insert(z.end(), y.begin(), y.begin() + static_cast<std::ptrdiff_t>(ms_.n));
    if (cert_ != nullptr && cert_->P.rows() == static_cast<Eigen::Index>(z.size())) {
        const Eigen::Map<const Eigen::VectorXd> zv(z.data(), static_cast<Eigen::Index>(z.size()));
        tr.v1.push_back(zv.dot(cert_->P * zv));
        if (h2_ != nullptr) {
            const auto v = monitor_v2(y, z, *cert_, *h2_, ms_);
            tr.v2.push_back(v.v2);
            tr.v2_lower.push_back(v.lower);
        } else {
            tr.v2.push_back(std::numeric_limits<double>::quiet_NaN());
            tr.v2_lower.push_back(std::numeric_limits<double>::quiet_NaN());
        }
    } else {
        tr.v1.push_back(std::numeric_limits<double>::quiet_NaN());
        tr.v2.push_back(std::numeric_limits<double>::quiet_NaN());
        tr.v2_lower.push_back(std::numeric_limits<double>::quiet_NaN());
    }
    if (ms_.mode == ModalMode::Boundary) {
        double wd = 0.0;
        for (std::size_t j = 0; j < y.size(); ++j) {
            wd += y[j] * ms_.d_coeffs(static_cast<Eigen::Index>(j));
        }
        const double dd = ms_.lifting.d_norm_squared();
        tr.recon_l2.push_back(std::sqrt(std::max(0.0, l2 * l2 + 2.0 * u * wd + u * u * dd)));
    }
}

Trajectory Simulator::run(std::span<const double> initial) {
    const std::size_t J = ms_.modes();
    require(initial.size() <= J, "initial data has more coefficients than retained modes");
    std::vector<double> y(J, 0.0);
    std::copy(initial.begin(), initial.end(), y.begin());
    double u = 0.0;  // boundary mode starts with u(0) = 0, so w(0) = y0
    const std::size_t m = ms_.channels();
    std::vector<double> applied(m, 0.0);
    std::vector<std::uint8_t> active(m, 0);

    Trajectory tr;
    if (ms_.mode == ModalMode::Boundary) {
        tr.d_norm = std::sqrt(ms_.lifting.d_norm_squared());
    }
    const bool nonlinear = cfg_.delta > 0.0 || cfg_.nu > 0.0;
    const bool watch_region = cert_ != nullptr && ms_.state_dim() > 0 &&
                              cert_->P.rows() == static_cast<Eigen::Index>(ms_.state_dim());

    auto zvec = [&]() {
        Eigen::VectorXd z(static_cast<Eigen::Index>(ms_.state_dim()));
        Eigen::Index o = 0;
        if (ms_.mode == ModalMode::Boundary) {
            z(o++) = u;
        }
        for (std::size_t i = 0; i < ms_.n; ++i) {
            z(o++) = y[i];
        }
        return z;
    };
    auto current_control = [&]() {
        if (ms_.mode == ModalMode::Boundary) {
            const Eigen::VectorXd z = zvec();
            const double h = (K_ * z)(0);
            applied[0] = sat(h, level_);
            active[0] = static_cast<std::uint8_t>(applied[0] != h);
        } else {
            control(std::span<const double>(y).first(ms_.n), applied, active);
        }
    };

    current_control();
    record(tr, 0.0, y, u, applied, active);
    if (watch_region && !ellipsoid_contains(*cert_, zvec())) {
        tr.left_region = true;
    }

    const auto steps = static_cast<std::size_t>(std::llround(cfg_.T / cfg_.dt));
    for (std::size_t i = 1; i <= steps; ++i) {
        if (ms_.mode == ModalMode::Boundary) {
            double a = 0.0;
            std::uint8_t act = 0;
            step_boundary(u, y, a, act);
        } else if (nonlinear) {
            step_nonlinear(y, applied, active);
        } else {
            step_linear(y, applied, active);
        }
        const double t = static_cast<double>(i) * cfg_.dt;
        const double size = full_h2(ms_, y) + std::abs(u);
        if (!std::isfinite(size) || size > cfg_.blowup_threshold) {
            current_control();
            record(tr, t, y, u, applied, active);
            tr.exit_reason = ExitReason::BlowUp;
            return tr;
        }
        bool exited = false;
        if (watch_region && !ellipsoid_contains(*cert_, zvec())) {
            tr.left_region = true;
            exited = cfg_.stop_on_region_exit;
        }
        if (i % cfg_.sample_every == 0 || i == steps || exited) {
            current_control();
            record(tr, t, y, u, applied, active);
        }
        if (exited) {
            tr.exit_reason = ExitReason::LeftRegion;
            return tr;
        }
    }
    return tr;
}

V2Value monitor_v2(std::span<const double> y, std::span<const double> z, const Certificate& cert,
                   const H2Constants& h, const ModalSystem& ms) {
    require(static_cast<Eigen::Index>(z.size()) == cert.P.rows(), "monitor_v2: z does not match P");
    require(y.size() <= ms.modes(), "monitor_v2: too many coefficients");
    const Eigen::Map<const Eigen::VectorXd> zv(z.data(), static_cast<Eigen::Index>(z.size()));
    const double zpz = zv.dot(cert.P * zv);
    double s = 0.0;
    for (std::size_t j = 0; j < y.size(); ++j) {
        s += -ms.sigma[j] * y[j] * y[j];
    }
    V2Value out;
    out.v2 = 0.5 * h.M * zpz + s;
    const double yxx = ms.es ? seminorm(*ms.es, y, 2) : 0.0;
    out.lower = 0.5 * h.C1 * zv.squaredNorm() + h.C1 / (2.0 * h.C2) * yxx * yxx;
    return out;
}

DecayFit fit_decay_rate(std::span<const double> times, std::span<const double> values, double t_start) {
    require(times.size() == values.size(), "fit_decay_rate: times and values differ in length");
    double st = 0.0, sy = 0.0, stt = 0.0, sty = 0.0;
    std::size_t cnt = 0;
    std::vector<std::pair<double, double>> pts;
    for (std::size_t i = 0; i < times.size(); ++i) {
        if (times[i] < t_start) {
            continue;
        }
        if (!(values[i] > 0.0) || !std::isfinite(values[i])) {
            throw Error(ErrorKind::NonPositiveChannel,
                        "channel is not positive at t = " + std::to_string(times[i]));
        }
        const double ly = std::log(values[i]);
        pts.emplace_back(times[i], ly);
        st += times[i];
        sy += ly;
        stt += times[i] * times[i];
        sty += times[i] * ly;
        ++cnt;
    }
    require(cnt >= 2, "fit_decay_rate needs at least two samples after t_start");
    const double nn = static_cast<double>(cnt);
    const double den = nn * stt - st * st;
    require(den > 0.0, "fit_decay_rate needs distinct sample times");
    const double slope = (nn * sty - st * sy) / den;
    const double icpt = (sy - slope * st) / nn;
    double ss_res = 0.0, ss_tot = 0.0;
    const double mean = sy / nn;
    for (const auto& [t, ly] : pts) {
        const double r = ly - (icpt + slope * t);
        ss_res += r * r;
        ss_tot += (ly - mean) * (ly - mean);
    }
    DecayFit fit;
    fit.rate = -slope;
    fit.prefactor = std::exp(icpt);
    fit.r_squared = ss_tot > 0.0 ? 1.0 - ss_res / ss_tot : 1.0;
    return fit;
}

DecayFit fit_decay_rate(const Trajectory& tr, std::string_view channel, double t_start) {
    return fit_decay_rate(tr.times, tr.channel(channel), t_start);
}

std::vector<Eigen::VectorXd> simulate_finite(const Eigen::MatrixXd& A, const Eigen::MatrixXd& B,
                                             const Eigen::MatrixXd& K, SaturationLevel level,
                                             const Eigen::VectorXd& z0, double dt, std::size_t steps) {
    require(A.rows() == z0.size() && B.rows() == z0.size() && K.cols() == z0.size() && K.rows() == B.cols(),
            "simulate_finite: dimension mismatch");
    auto f = [&](const Eigen::VectorXd& z) -> Eigen::VectorXd { return A * z + B * sat(K * z, level); };
    std::vector<Eigen::VectorXd> out;
    out.reserve(steps + 1);
    out.push_back(z0);
    Eigen::VectorXd z = z0;
    for (std::size_t i = 0; i < steps; ++i) {
        const Eigen::VectorXd k1 = f(z);
        const Eigen::VectorXd k2 = f(z + 0.5 * dt * k1);
        const Eigen::VectorXd k3 = f(z + 0.5 * dt * k2);
        const Eigen::VectorXd k4 = f(z + dt * k3);
        z += dt / 6.0 * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
        out.push_back(z);
    }
    return out;
}

std::vector<double> preset_initial(const EigenSystem& es, std::string_view name, double amplitude,
                                   std::size_t n) {
    std::vector<double> y(es.count(), 0.0);
    if (name == "mode1") {
        y[0] = amplitude;
    } else if (name == "unstable") {
        if (n == 0) {
            y[0] = amplitude;
        } else {
            for (std::size_t j = 0; j < n; ++j) {
                y[j] = amplitude / std::sqrt(static_cast<double>(n));
            }
        }
    } else if (name == "bump") {
        const double L = es.params().length;
        y = es.project([&](double x) {
            const double s = x * (L - x);
            return amplitude * 16.0 * s * s / (L * L * L * L);
        });
    } else {
        throw Error(ErrorKind::InvalidArgument,
                    "unknown initial preset '" + std::string(name) + "' (expected mode1, unstable or bump)");
    }
    return y;
}

BasinEstimate estimate_basin(const ModalSystem& ms, const Gain& gain, SaturationLevel level, const SimConfig& cfg,
                             std::span<const double> profile, double lo, double hi, int iterations,
                             double shrink) {
    require(lo > 0.0 && hi > lo, "basin bracket must satisfy 0 < lo < hi");
    const double p0 = full_h2(ms, std::vector<double>(profile.begin(), profile.end()));
    require(p0 > 0.0, "basin profile must be nonzero");
    BasinEstimate out;
    auto decays = [&](double amp) {
        std::vector<double> init(profile.begin(), profile.end());
        for (double& v : init) {
            v *= amp;
        }
        Simulator sim(ms, gain, level, cfg);
        const Trajectory tr = sim.run(init);
        bool ok = tr.exit_reason == ExitReason::Horizon;
        if (ok) {
            ok = full_h2(ms, tr.states.back()) < shrink * amp * p0;
        }
        out.probes.emplace_back(amp, ok);
        return ok;
    };
    out.first_failure = std::numeric_limits<double>::infinity();
    if (!decays(lo)) {
        out.epsilon = 0.0;
        out.first_failure = lo;
        return out;
    }
    if (decays(hi)) {
        out.epsilon = hi;
        return out;
    }
    double a = lo, b = hi;
    for (int i = 0; i < iterations; ++i) {
        const double mid = std::sqrt(a * b);
        if (decays(mid)) {
            a = mid;
        } else {
            b = mid;
        }
    }
    out.epsilon = a;
    out.first_failure = b;
    return out;
}

} // namespace satstab
