#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include <Eigen/Dense>

#include "satstab/modal.hpp"
#include "satstab/saturation.hpp"
#include "satstab/synthesis.hpp"

namespace satstab {

struct SimConfig {
    double dt = 1e-3;
    double T = 1.0;
    double delta = 0.0;  // y y_x
    double nu = 0.0;     // -(y^3)_xx
    std::size_t sample_every = 1;
    // Abort once sqrt(|y|^2 + |y_x|^2 + |y_xx|^2) exceeds this (or |y| when
    // the system has no eigenfunctions attached).
    double blowup_threshold = 1e6;
    bool stop_on_region_exit = false;

    void validate() const;
};

enum class ExitReason { Horizon, BlowUp, LeftRegion };
std::string_view to_string(ExitReason r);

struct Trajectory {
    std::vector<double> times;
    std::vector<std::vector<double>> states;     // J modal coefficients (w in boundary mode)
    std::vector<std::vector<double>> controls;   // sat(Kz) per channel; boundary: u(t)
    std::vector<std::vector<std::uint8_t>> sat_active;
    std::vector<double> l2, h1, h2;  // |y|, |y_x|, |y_xx|
    std::vector<double> v1, v2, v2_lower;
    // Boundary mode: |y| of the reconstruction y = w + d u and |d|.
    std::vector<double> recon_l2;
    double d_norm = 0.0;
    bool left_region = false;
    ExitReason exit_reason = ExitReason::Horizon;

    [[nodiscard]] std::size_t samples() const noexcept { return times.size(); }
    [[nodiscard]] std::span<const double> channel(std::string_view name) const;
};

// Stepping plan for one ModalSystem: precomputed decay factors, gain,
// certificate and monitor constants.
class Simulator {
public:
    Simulator(const ModalSystem& ms, const Gain& gain, SaturationLevel level, SimConfig config,
              const Certificate* cert = nullptr, const H2Constants* constants = nullptr);

    // In-place steps; the saturated input actually applied is written to
    // `applied` (size m) and returned through `active`.
    void step_linear(std::span<double> y, std::span<double> applied, std::span<std::uint8_t> active);
    void step_nonlinear(std::span<double> y, std::span<double> applied, std::span<std::uint8_t> active);
    // u is the boundary slope y_x(t, 0); y holds the w coefficients.
    void step_boundary(double& u, std::span<double> w, double& applied, std::uint8_t& active);

    // f_j = <-N(y), e_j> with N(y) = delta y y_x - nu (y^3)_xx.
    void nonlinear_forcing(std::span<const double> y, std::span<double> f) const;

    Trajectory run(std::span<const double> initial);

    [[nodiscard]] const SimConfig& config() const noexcept { return cfg_; }

private:
    void control(std::span<const double> z, std::span<double> applied, std::span<std::uint8_t> active) const;
    void record(Trajectory& tr, double t, std::span<const double> y, double u, std::span<const double> applied,
                std::span<const std::uint8_t> active) const;

    const ModalSystem& ms_;
    Eigen::MatrixXd K_;
    SaturationLevel level_;
    SimConfig cfg_;
    const Certificate* cert_;
    const H2Constants* h2_;
    std::vector<double> decay_;
    std::vector<double> phi_;
    std::vector<double> forcing_;
    std::vector<double> scratch_;
    mutable std::vector<double> grid_[4];
};

double phi1(double h) noexcept;

// Monitors for one modal state; z is the unstable coordinate vector
// (boundary: (u, w_1..w_n)).
struct V2Value {
    double v2 = 0.0;
    double lower = 0.0;  // (C1/2)|z|^2 + (C1/(2 C2)) |y_xx|^2
};
V2Value monitor_v2(std::span<const double> y, std::span<const double> z, const Certificate& cert,
                   const H2Constants& h, const ModalSystem& ms);

double l2_norm(std::span<const double> y);
// sqrt(y^T G y) with the Gram matrix of first or second derivatives.
double seminorm(const EigenSystem& es, std::span<const double> y, int derivative);

struct DecayFit {
    double rate = 0.0;
    double prefactor = 0.0;
    double r_squared = 0.0;
};

// Least squares on log(values) against t over t >= t_start.
DecayFit fit_decay_rate(std::span<const double> times, std::span<const double> values, double t_start = 0.0);
DecayFit fit_decay_rate(const Trajectory& tr, std::string_view channel, double t_start = 0.0);

// Classical RK4 on z' = A z + B sat(K z); returns every state including z0.
std::vector<Eigen::VectorXd> simulate_finite(const Eigen::MatrixXd& A, const Eigen::MatrixXd& B,
                                             const Eigen::MatrixXd& K, SaturationLevel level,
                                             const Eigen::VectorXd& z0, double dt, std::size_t steps);

// Modal initial data of a named profile scaled by amplitude:
// "mode1" = e_1, "unstable" = equal weight on the unstable modes,
// "bump" = projection of 16 x^2 (L - x)^2 / L^4.
std::vector<double> preset_initial(const EigenSystem& es, std::string_view name, double amplitude,
                                   std::size_t n);

struct BasinEstimate {
    double epsilon = 0.0;        // largest amplitude seen to decay
    double first_failure = 0.0;  // smallest amplitude seen to fail (inf if none)
    std::vector<std::pair<double, bool>> probes;
};

// Bisection on the amplitude of `profile`: a run decays when it reaches
// the horizon and its final H2 norm is below `shrink` times the initial one.
BasinEstimate estimate_basin(const ModalSystem& ms, const Gain& gain, SaturationLevel level, const SimConfig& cfg,
                             std::span<const double> profile, double lo, double hi, int iterations,
                             double shrink = 0.5);

} // namespace satstab
