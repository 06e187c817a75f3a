#include <cmath>
#include <memory>
#include <random>
#include <vector>

#include "doctest.h"
#include "oracles.hpp"

#include "satstab/errors.hpp"
#include "satstab/simulate.hpp"

using namespace satstab;
using oracle::pi;

namespace {

Eigen::MatrixXd m11(double v) { return Eigen::MatrixXd::Constant(1, 1, v); }

// Hinged lambda = 2 on (0, pi) with one full-length indicator.
struct Baseline {
    std::shared_ptr<const EigenSystem> es;
    ModalSystem ms;
    Gain gain;

    explicit Baseline(std::size_t J = 32, double pole = -2.0)
        : es(std::make_shared<const EigenSystem>(eigen_closed_form({2.0, pi}, BoundaryCondition::Hinged, J))),
          ms(assemble_internal(es, std::vector{ActuatorShape::indicator(0.0, pi)})),
          gain(design_gain(ms, GainTarget{{pole}})) {}
};

} // namespace

TEST_SUITE("simulate") {

TEST_CASE("phi1") {
    CHECK(phi1(0.0) == 1.0);
    CHECK(phi1(1e-20) == doctest::Approx(1.0));
    CHECK(phi1(1.0) == doctest::Approx(std::exp(1.0) - 1.0).epsilon(1e-15));
    CHECK(phi1(-40.0) == doctest::Approx(1.0 / 40.0).epsilon(1e-12));
}

TEST_CASE("one step of a free stable mode is exact") {
    const auto ms = modal_from_matrices({-8.0}, Eigen::MatrixXd::Zero(1, 1), 0);
    const auto gain = make_gain(ms.A, ms.B, Eigen::MatrixXd::Zero(1, 0));
    Simulator sim(ms, gain, SaturationLevel{1.0}, SimConfig{.dt = 0.1, .T = 0.1});
    std::vector<double> y{1.0}, applied(1);
    std::vector<std::uint8_t> active(1);
    sim.step_linear(y, applied, active);
    CHECK(y[0] == doctest::Approx(std::exp(-0.8)).epsilon(1e-15));
}

TEST_CASE("a zero eigenvalue integrates the input") {
    Eigen::MatrixXd c(2, 1);
    c << 1.0, 0.0;
    const auto ms = modal_from_matrices({0.0, -1.0}, c, 1);
    const auto gain = make_gain(ms.A, ms.B, m11(-1.0));
    Simulator sim(ms, gain, SaturationLevel::unbounded(), SimConfig{.dt = 0.01, .T = 0.01});
    std::vector<double> y{1.0, 0.0}, applied(1);
    std::vector<std::uint8_t> active(1);
    sim.step_linear(y, applied, active);
    CHECK(y[0] == doctest::Approx(1.0 - 0.01).epsilon(1e-15));
    CHECK(applied[0] == -1.0);
}

TEST_CASE("scalar loop converges at first order to the exact decay") {
    Eigen::MatrixXd c(2, 1);
    c << 1.0, 0.0;
    const auto ms = modal_from_matrices({1.0, -8.0}, c, 1);
    const auto gain = make_gain(ms.A, ms.B, m11(-3.0));
    auto err = [&](double dt) {
        Simulator sim(ms, gain, SaturationLevel{1.0}, SimConfig{.dt = dt, .T = 1.0});
        const auto tr = sim.run(std::vector<double>{0.1});
        CHECK(tr.exit_reason == ExitReason::Horizon);
        return std::abs(tr.states.back()[0] - 0.1 * std::exp(-2.0));
    };
    const double e1 = err(1e-3), e2 = err(5e-4);
    CHECK(e1 < 1e-3 * 0.1);
    CHECK(e1 / e2 == doctest::Approx(2.0).epsilon(0.02));
}

TEST_CASE("flux cancellation and dissipativity of the nonlinear projections") {
    std::mt19937_64 rng(4);
    std::normal_distribution<double> g(0.0, 1.0);
    {
        Baseline b(24);
        Simulator sim(b.ms, b.gain, SaturationLevel{1.0}, SimConfig{.delta = 1.0});
        for (int trial = 0; trial < 20; ++trial) {
            std::vector<double> y(24), f(24);
            for (std::size_t j = 0; j < 24; ++j) y[j] = g(rng) / (1.0 + j * j);
            sim.nonlinear_forcing(y, f);
            double flux = 0.0, scale = 0.0;
            for (std::size_t j = 0; j < 24; ++j) flux += f[j] * y[j], scale += std::abs(f[j] * y[j]);
            CHECK(std::abs(flux) <= 1e-12 * std::max(scale, 1e-300));
        }
    }
    {
        const auto es = std::make_shared<const EigenSystem>(eigen_closed_form({2.0, pi}, BoundaryCondition::NeumannCH, 24));
        const auto ms = assemble_internal(es, std::vector{ActuatorShape::indicator(0.0, pi / 2)});
        const auto gain = design_gain(ms);
        Simulator sim(ms, gain, SaturationLevel{1.0}, SimConfig{.nu = 1.0});
        for (int trial = 0; trial < 20; ++trial) {
            std::vector<double> y(24), f(24);
            for (std::size_t j = 0; j < 24; ++j) y[j] = g(rng) / (1.0 + j * j);
            sim.nonlinear_forcing(y, f);
            double s = 0.0;
            for (std::size_t j = 0; j < 24; ++j) s += f[j] * y[j];
            // <(y^3)_xx, y> = -3 int y^2 y_x^2
            CHECK(s <= 1e-12);
        }
    }
}

TEST_CASE("KS forcing matches a direct quadrature of -y y_x") {
    Baseline b(16);
    Simulator sim(b.ms, b.gain, SaturationLevel{1.0}, SimConfig{.delta = 1.0});
    std::vector<double> y(16, 0.0), f(16);
    y[0] = 0.3;
    y[1] = -0.2;
    y[3] = 0.05;
    sim.nonlinear_forcing(y, f);
    auto field = [&](double x, int d) {
        double s = 0.0;
        for (std::size_t j = 0; j < 16; ++j) s += y[j] * b.es->mode(j).eval(x, d);
        return s;
    };
    for (std::size_t j = 0; j < 8; ++j) {
        const double ref = oracle::simpson(
            [&](double x) { return -field(x, 0) * field(x, 1) * b.es->mode(j).eval(x); }, 0.0, pi, 4000);
        CHECK(std::abs(f[j] - ref) < 1e-11);
    }
}

TEST_CASE("nonlinear stepper with delta = nu = 0 is the linear stepper") {
    Baseline b(16);
    Simulator lin(b.ms, b.gain, SaturationLevel{0.5}, SimConfig{.dt = 1e-3});
    Simulator non(b.ms, b.gain, SaturationLevel{0.5}, SimConfig{.dt = 1e-3});
    std::vector<double> y1(16, 0.0), y2, a1(1), a2(1);
    std::vector<std::uint8_t> s1(1), s2(1);
    y1[0] = 0.4;
    y1[2] = -0.1;
    y2 = y1;
    for (int i = 0; i < 200; ++i) {
        lin.step_linear(y1, a1, s1);
        non.step_nonlinear(y2, a2, s2);
    }
    CHECK(y1 == y2);
}

TEST_CASE("boundary loop with zero gain leaves u at zero") {
    const auto es = std::make_shared<const EigenSystem>(eigen_clamped({45.0, 1.0}, 16));
    const auto ms = assemble_boundary(es, unstable_count(*es).n);
    const auto gain = make_gain(ms.A, ms.B, Eigen::MatrixXd::Zero(1, 2));
    Simulator sim(ms, gain, SaturationLevel{1.0}, SimConfig{.dt = 1e-4, .T = 0.01});
    std::vector<double> w(16, 0.0);
    w[1] = 0.01;
    double u = 0.0, applied = 1.0;
    std::uint8_t active = 1;
    for (int i = 0; i < 100; ++i) sim.step_boundary(u, w, applied, active);
    CHECK(u == 0.0);
    CHECK(applied == 0.0);
    CHECK(w[1] == doctest::Approx(0.01 * std::exp(ms.sigma[1] * 0.01)).epsilon(1e-12));
    CHECK(w[0] == 0.0);
}

TEST_CASE("zero horizon records exactly one sample") {
    Baseline b(8);
    Simulator sim(b.ms, b.gain, SaturationLevel{1.0}, SimConfig{.dt = 1e-3, .T = 0.0});
    const auto tr = sim.run(std::vector<double>{0.1});
    CHECK(tr.samples() == 1);
    CHECK(tr.times[0] == 0.0);
    CHECK(tr.l2[0] == doctest::Approx(0.1));
}

TEST_CASE("saturated unstable scalar loop blows up") {
    Eigen::MatrixXd c(2, 1);
    c << 1.0, 0.0;
    const auto ms = modal_from_matrices({1.0, -8.0}, c, 1);
    const auto gain = make_gain(ms.A, ms.B, m11(-3.0));
    Simulator sim(ms, gain, SaturationLevel{1.0}, SimConfig{.dt = 1e-2, .T = 40.0, .sample_every = 10});
    const auto tr = sim.run(std::vector<double>{2.0});
    CHECK(tr.exit_reason == ExitReason::BlowUp);
    CHECK(tr.l2.back() > 1e6);
    CHECK(tr.times.back() < 40.0);
}

TEST_CASE("fitting decay rates") {
    std::vector<double> t, v, c;
    for (int i = 0; i <= 50; ++i) {
        t.push_back(0.02 * i);
        v.push_back(3.0 * std::exp(-8.0 * t.back()));
        c.push_back(0.7);
    }
    auto fit = fit_decay_rate(t, v);
    CHECK(fit.rate == doctest::Approx(8.0).epsilon(1e-12));
    CHECK(fit.prefactor == doctest::Approx(3.0).epsilon(1e-12));
    CHECK(fit.r_squared == doctest::Approx(1.0));
    fit = fit_decay_rate(t, c);
    CHECK(std::abs(fit.rate) < 1e-14);
    v[10] = 0.0;
    try {
        fit_decay_rate(t, v);
        FAIL("expected NonPositiveChannel");
    } catch (const Error& e) {
        CHECK(e.kind() == ErrorKind::NonPositiveChannel);
    }
    // samples before t_start are ignored
    CHECK(fit_decay_rate(t, v, 0.5).rate == doctest::Approx(8.0));
}

TEST_CASE("V2 monitor on hand-worked states") {
    Eigen::MatrixXd coeffs(2, 1);
    coeffs << 1.0, 1.0;
    const auto ms = modal_from_matrices({1.0, -8.0}, coeffs, 1);
    const auto gain = make_gain(ms.A, ms.B, m11(-3.0));
    const auto cert = make_certificate(ms.A, ms.B, gain, m11(9.0), Eigen::VectorXd::Constant(1, 2.0), m11(0.0),
                                       SaturationLevel{1.0});
    const auto h = select_h2_constants(cert, ms, gain);
    const std::vector<double> zero{0.0, 0.0}, tail{0.0, 1.0}, head{0.5, 0.0};
    CHECK(monitor_v2(zero, std::vector<double>{0.0}, cert, h, ms).v2 == 0.0);
    CHECK(monitor_v2(tail, std::vector<double>{0.0}, cert, h, ms).v2 == doctest::Approx(8.0));
    const auto v = monitor_v2(head, std::vector<double>{0.5}, cert, h, ms);
    CHECK(v.v2 == doctest::Approx(0.5 * h.M * 9.0 * 0.25 - 0.25));
    CHECK(v.lower <= v.v2);
}

TEST_CASE("baseline run: sandwich bound, V2 at time zero, tail estimate") {
    Baseline b(32);
    const SaturationLevel lvl{1.0};
    const auto cert = build_certificate(b.ms, b.gain, lvl);
    const auto h = select_h2_constants(cert, b.ms, b.gain);
    Simulator sim(b.ms, b.gain, lvl, SimConfig{.dt = 1e-3, .T = 3.0, .sample_every = 10}, &cert, &h);
    std::vector<double> y0(32, 0.0);
    y0[0] = 0.9 / std::sqrt(cert.P(0, 0));
    y0[1] = 0.05;
    y0[2] = -0.02;
    const auto tr = sim.run(y0);
    REQUIRE(tr.exit_reason == ExitReason::Horizon);
    CHECK_FALSE(tr.left_region);
    for (std::size_t i = 0; i < tr.samples(); ++i) CHECK(tr.v2_lower[i] <= tr.v2[i]);
    const double h2sq = tr.l2[0] * tr.l2[0] + tr.h1[0] * tr.h1[0] + tr.h2[0] * tr.h2[0];
    CHECK(tr.v2[0] <= h.C4 * h2sq);

    // each tail coefficient obeys the Duhamel bound with |input| <= ell
    for (std::size_t i = 0; i < tr.samples(); ++i) {
        const double t = tr.times[i];
        for (std::size_t j = 1; j < 32; ++j) {
            const double s = b.ms.sigma[j];
            const double bj = std::abs(b.ms.coeffs(static_cast<Eigen::Index>(j), 0));
            const double bound = std::exp(s * t) * std::abs(y0[j]) + bj * lvl.ell * (1.0 - std::exp(s * t)) / -s;
            CHECK(std::abs(tr.states[i][j]) <= bound * (1 + 1e-9) + 1e-15);
        }
    }
}

TEST_CASE("retained modes do not depend on the truncation") {
    Baseline a(32), b(64);
    std::vector<double> y0{0.05, 0.01, 0.0, 0.02};
    Simulator sa(a.ms, a.gain, SaturationLevel{1.0}, SimConfig{.dt = 1e-3, .T = 1.0});
    Simulator sb(b.ms, b.gain, SaturationLevel{1.0}, SimConfig{.dt = 1e-3, .T = 1.0});
    const auto ta = sa.run(y0), tb = sb.run(y0);
    for (std::size_t j = 0; j < 32; ++j) CHECK(ta.states.back()[j] == tb.states.back()[j]);
}

TEST_CASE("unstable block matches RK4 on the finite-dimensional loop") {
    Baseline b(16);
    const SaturationLevel lvl{0.3};
    const double z0 = 0.4;  // starts saturated
    Simulator sim(b.ms, b.gain, lvl, SimConfig{.dt = 1e-5, .T = 1.0, .sample_every = 1000});
    const auto tr = sim.run(std::vector<double>{z0});
    const auto rk = simulate_finite(b.ms.A, b.ms.B, b.gain.K, lvl, Eigen::VectorXd::Constant(1, z0), 1e-4, 10000);
    CHECK(tr.states.back()[0] == doctest::Approx(rk.back()(0)).epsilon(1e-3));
}

TEST_CASE("linear energy identity") {
    // open loop on stable modes: d/dt |y|^2 = 2 sum sigma_j y_j^2
    const auto ms = modal_from_matrices({-1.0, -4.0, -9.0}, Eigen::MatrixXd::Zero(3, 1), 0);
    const auto gain = make_gain(ms.A, ms.B, Eigen::MatrixXd::Zero(1, 0));
    Simulator sim(ms, gain, SaturationLevel{1.0}, SimConfig{.dt = 1e-3, .T = 1.0});
    const std::vector<double> y0{1.0, 1.0, 1.0};
    const auto tr = sim.run(y0);
    const double e = std::exp(-2.0) + std::exp(-8.0) + std::exp(-18.0);
    CHECK(tr.l2.back() * tr.l2.back() == doctest::Approx(e).epsilon(1e-12));
}

TEST_CASE("presets and basin estimate") {
    const auto es = eigen_closed_form({2.0, pi}, BoundaryCondition::Hinged, 16);
    auto y = preset_initial(es, "mode1", 0.2, 1);
    CHECK(y[0] == 0.2);
    y = preset_initial(es, "bump", 1.0, 1);
    CHECK(y[1] == doctest::Approx(0.0).scale(1.0));
    CHECK(y[0] > 0.0);
    CHECK_THROWS_AS(preset_initial(es, "nope", 1.0, 1), Error);

    Eigen::MatrixXd c(2, 1);
    c << 1.0, 0.0;
    const auto ms = modal_from_matrices({1.0, -8.0}, c, 1);
    const auto gain = make_gain(ms.A, ms.B, m11(-3.0));
    // z' = z + sat(-3z): the basin is |z| < 1
    const auto basin = estimate_basin(ms, gain, SaturationLevel{1.0}, SimConfig{.dt = 1e-2, .T = 30.0},
                                      std::vector<double>{1.0}, 0.1, 3.0, 30);
    CHECK(basin.epsilon == doctest::Approx(1.0).epsilon(1e-3));
    CHECK(basin.first_failure >= basin.epsilon);
}


TEST_CASE("uncontrolled hinged energy identity and Parseval along the run") {
    // d/dt (|y|^2 / 2) = -|y_xx|^2 + lambda |y_x|^2
    Baseline b(32);
    const auto zero = make_gain(b.ms.A, b.ms.B, Eigen::MatrixXd::Zero(1, 1));
    const double dt = 1e-4;
    Simulator sim(b.ms, zero, SaturationLevel{1.0}, SimConfig{.dt = dt, .T = 0.05});
    std::vector<double> y0(32, 0.0);
    y0[0] = 0.3;
    y0[1] = 0.2;
    y0[4] = -0.05;
    const auto tr = sim.run(y0);
    const auto& es = *b.es;
    std::vector<double> field(es.stride());
    for (std::size_t i = 0; i + 1 < tr.samples(); ++i) {
        const double lhs = 0.5 * (tr.l2[i + 1] * tr.l2[i + 1] - tr.l2[i] * tr.l2[i]) / dt;
        auto power = [&](std::size_t k) { return -tr.h2[k] * tr.h2[k] + 2.0 * tr.h1[k] * tr.h1[k]; };
        // trapezoid in time: second order
        const double rhs = 0.5 * (power(i) + power(i + 1));
        CHECK(std::abs(lhs - rhs) <= 1e-2 * std::abs(rhs) + 1e-12);

        es.synthesize(tr.states[i], 0, field);
        const double q = es.quadrature().inner(field, field);
        CHECK(std::abs(q - tr.l2[i] * tr.l2[i]) <= 1e-12 * tr.l2[i] * tr.l2[i]);
    }
}

}
