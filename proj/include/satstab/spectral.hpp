#pragma once

#include <cstddef>
#include <functional>
#include <memory>
#include <span>
#include <string_view>
#include <vector>

#include <Eigen/Dense>

#include "satstab/quadrature.hpp"

namespace satstab {

enum class BoundaryCondition { Clamped, Hinged, NeumannCH };

std::string_view to_string(BoundaryCondition bc);
BoundaryCondition parse_boundary_condition(std::string_view name);

// A y = -y'''' - lambda y'' on (0, length).
struct OperatorParams {
    double lambda = 0.0;
    double length = 1.0;

    // lambda = 0 is accepted: it is the pure biharmonic (beam) limit.
    void validate() const;
};

// One L2-normalised eigenfunction, evaluated analytically together with its
// derivatives. Closed-form families are plain sines/cosines; the clamped
// family is a two-term combination of even (or odd) functions about L/2.
class Mode {
public:
    enum class Kind { Sine, Cosine, Constant, ParityPair };

    static Mode sine(double amplitude, double frequency);
    static Mode cosine(double amplitude, double frequency);
    static Mode constant(double amplitude);
    // c1 * F(s1, x - center) + c2 * F(s2, x - center), F = even or odd
    // fundamental solution of y'''' + lambda y'' + sigma y = 0 with
    // characteristic root r^2 = s.
    static Mode parity_pair(bool even, double center, double s1, double s2, double c1, double c2);

    [[nodiscard]] Kind kind() const noexcept { return kind_; }
    [[nodiscard]] double amplitude() const noexcept { return amp_; }
    [[nodiscard]] double frequency() const noexcept { return freq_; }
    [[nodiscard]] bool even() const noexcept { return even_; }

    // d-th derivative at x, 0 <= d <= 4.
    [[nodiscard]] double eval(double x, int d = 0) const;

    [[nodiscard]] Mode scaled(double factor) const;

private:
    Kind kind_ = Kind::Constant;
    double amp_ = 0.0;
    double freq_ = 0.0;
    bool even_ = true;
    double center_ = 0.0;
    double s1_ = 0.0;
    double s2_ = 0.0;
    double c1_ = 0.0;
    double c2_ = 0.0;
};

// Even/odd fundamental solution with characteristic parameter s (r^2 = s),
// normalised so that it is continuous in s through 0 and bounded on
// |xi| <= half. d-th derivative in xi.
double parity_basis(bool even, double s, double xi, double half, int d);

// Basis used by clamped modes: which = 0 gives F(s1), which = 1 the divided
// difference (F(s2) - F(s1)) / (s2 - s1), which stays independent of F(s1)
// when the two roots merge.
double parity_pair_basis(bool even, double s1, double s2, double xi, double half, int d, int which);

// Ordered eigenpairs of A for one boundary-condition family. Immutable.
class EigenSystem {
public:
    EigenSystem(OperatorParams params, BoundaryCondition bc, std::vector<double> values,
                std::vector<int> labels, std::vector<Mode> modes);

    [[nodiscard]] const OperatorParams& params() const noexcept { return params_; }
    [[nodiscard]] BoundaryCondition bc() const noexcept { return bc_; }
    [[nodiscard]] std::size_t count() const noexcept { return values_.size(); }
    [[nodiscard]] std::span<const double> values() const noexcept { return values_; }
    // Wavenumber k for closed forms, 1-based rank for the clamped family.
    [[nodiscard]] std::span<const int> labels() const noexcept { return labels_; }
    [[nodiscard]] const Mode& mode(std::size_t j) const { return modes_.at(j); }
    [[nodiscard]] const Quadrature& quadrature() const noexcept { return quad_; }

    // Row-major count() x quadrature().size() tables of e_j, e_j', e_j''.
    [[nodiscard]] std::span<const double> table(int derivative) const;
    [[nodiscard]] std::size_t stride() const noexcept { return quad_.size(); }

    // <e_i', e_j'> and <e_i'', e_j''>.
    [[nodiscard]] const Eigen::MatrixXd& gram1() const noexcept { return gram1_; }
    [[nodiscard]] const Eigen::MatrixXd& gram2() const noexcept { return gram2_; }

    // <f, e_j> for j < count() by quadrature.
    [[nodiscard]] std::vector<double> project(const std::function<double(double)>& f) const;

    // Field values (derivative d <= 2) of sum_j coeffs_j e_j on the quadrature grid.
    void synthesize(std::span<const double> coeffs, int derivative, std::span<double> out) const;

private:
    OperatorParams params_;
    BoundaryCondition bc_;
    std::vector<double> values_;
    std::vector<int> labels_;
    std::vector<Mode> modes_;
    Quadrature quad_;
    std::vector<double> tables_[3];
    Eigen::MatrixXd gram1_;
    Eigen::MatrixXd gram2_;
};

EigenSystem eigen_closed_form(const OperatorParams& params, BoundaryCondition bc, std::size_t count);

struct ClampedOptions {
    // Relative agreement required between successive Richardson estimates.
    double tolerance = 1e-5;
    std::size_t initial_grid = 0; // 0: chosen from count
    int max_refinements = 4;
};

// Finite-difference eigenvalues of the clamped (or hinged) stencil at `grid`
// interior points: the `count` largest, sorted nonincreasing.
std::vector<double> fd_eigenvalues(const OperatorParams& params, BoundaryCondition stencil,
                                   std::size_t count, std::size_t grid);

// Second-order FD at N and 2N points, Richardson extrapolation, then each
// value is polished against the exact even/odd boundary determinant and the
// eigenfunction is built from the fundamental solutions. `stencil` selects
// the BC set (Clamped for production, Hinged for cross-validation).
EigenSystem eigen_fd_family(const OperatorParams& params, BoundaryCondition stencil,
                            std::size_t count, const ClampedOptions& opts = {});

EigenSystem eigen_clamped(const OperatorParams& params, std::size_t count,
                          const ClampedOptions& opts = {});

// Dispatches on bc.
EigenSystem eigen_system(const OperatorParams& params, BoundaryCondition bc, std::size_t count);

struct UnstableCount {
    std::size_t n = 0;
    double eta = 0.0;
};

// n = #{sigma_j >= 0}; eta = -sigma_{n+1}/2.
UnstableCount unstable_count(const EigenSystem& es);
UnstableCount unstable_count(std::span<const double> sorted_values);

// lambda in {pi^2 (k^2 + l^2) : 1 <= k < l, k = l mod 2} within tol.
bool critical_set_member(double lambda, double tol = 1e-9);

// Diagnostics used by the spectrum subcommand and the invariant suites.
double eigen_residual(const EigenSystem& es, std::size_t j);
double bc_residual(const EigenSystem& es, std::size_t j);
double orthonormality_error(const EigenSystem& es);
double norm_error(const EigenSystem& es, std::size_t j);

} // namespace satstab
