#pragma once

#include <cstddef>
#include <memory>
#include <span>
#include <utility>
#include <vector>

#include <Eigen/Dense>

#include "satstab/spectral.hpp"

namespace satstab {

// Spatial profile b_k(x) of one control channel.
struct ActuatorShape {
    enum class Kind { Indicator, ModeCombination };

    Kind kind = Kind::Indicator;
    double a = 0.0;
    double b = 0.0;
    // Coefficients on e_1, e_2, ... of the eigenbasis the shape is used with.
    std::vector<double> coefficients;

    static ActuatorShape indicator(double a, double b);
    static ActuatorShape mode_combination(std::vector<double> coefficients);

    void validate(double length) const;
    [[nodiscard]] double norm_squared() const;
};

// d(x) = x^3/L^2 - 2x^2/L + x moves the boundary input y_x(t,0) = u(t) into
// the interior: w = y - d u satisfies homogeneous clamped conditions.
struct Lifting {
    double length = 1.0;
    double lambda = 0.0;

    [[nodiscard]] double d(double x, int derivative = 0) const;
    // a(x) = -lambda d''(x), b(x) = -d(x)
    [[nodiscard]] double a(double x) const;
    [[nodiscard]] double b(double x) const;
    // ||d||^2_{L2} = L^3 / 105
    [[nodiscard]] double d_norm_squared() const;
};

enum class ModalMode { Internal, Boundary };

// Finite-dimensional unstable block plus everything the stepper needs for
// the remaining retained modes.
struct ModalSystem {
    ModalMode mode = ModalMode::Internal;
    std::size_t n = 0;   // unstable modes
    double eta = 0.0;    // tail gap
    Eigen::MatrixXd A;   // n x n or (n+1) x (n+1)
    Eigen::MatrixXd B;   // n x m or (n+1) x 1
    // All retained modes j < J:
    std::vector<double> sigma;
    Eigen::MatrixXd coeffs;       // J x m actuator coefficients (boundary: <b, e_j>)
    Eigen::VectorXd lift_coeffs;  // boundary only: <a, e_j>
    Eigen::VectorXd d_coeffs;     // boundary only: <d, e_j>
    std::vector<double> actuator_norm_sq;  // ||b_k||^2_{L2}
    std::shared_ptr<const EigenSystem> es; // null for systems built from raw matrices
    Lifting lifting;

    [[nodiscard]] std::size_t modes() const noexcept { return sigma.size(); }
    [[nodiscard]] std::size_t channels() const noexcept { return static_cast<std::size_t>(B.cols()); }
    [[nodiscard]] std::size_t state_dim() const noexcept { return static_cast<std::size_t>(A.rows()); }
    // Rows n..J-1 of coeffs.
    [[nodiscard]] Eigen::MatrixXd b_tail() const;
};

// b_{jk} = <b_k, e_j>, j < count.
Eigen::MatrixXd actuator_coefficients(const EigenSystem& es, std::span<const ActuatorShape> shapes,
                                      std::size_t count);

// Hinged/Neumann indicator coefficient in closed form.
double indicator_coefficient_closed_form(const EigenSystem& es, std::size_t j, double a, double b);
// Gauss-Legendre over [a, b]; the general path for clamped modes.
double indicator_coefficient_by_quadrature(const EigenSystem& es, std::size_t j, double a, double b);

ModalSystem assemble_internal(std::shared_ptr<const EigenSystem> es, const Eigen::MatrixXd& coeffs,
                              std::size_t n, std::vector<double> actuator_norm_sq);

ModalSystem assemble_internal(std::shared_ptr<const EigenSystem> es, std::span<const ActuatorShape> shapes);

// Internal system from a raw diagonal spectrum; used by the scalar
// examples and finite-dimensional checks.
ModalSystem modal_from_matrices(std::vector<double> sigma, Eigen::MatrixXd coeffs, std::size_t n);

ModalSystem assemble_boundary(std::shared_ptr<const EigenSystem> es, std::size_t n,
                              double critical_tol = 1e-6);

// Pi_n followed by iota^{-1}: the first n coefficients and the rest.
std::pair<std::vector<double>, std::vector<double>> project(std::span<const double> state, std::size_t n);

// Extra indicator channels when the Kalman rank is deficient; N0 is the
// largest algebraic multiplicity among the unstable eigenvalues.
std::size_t max_multiplicity(std::span<const double> unstable, double tol = 1e-9);
std::vector<ActuatorShape> suggest_actuators(const EigenSystem& es, std::vector<ActuatorShape> shapes,
                                             std::size_t n);

} // namespace satstab
