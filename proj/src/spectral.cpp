#include "satstab/spectral.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <limits>
#include <numeric>
#include <string>

#include <boost/math/tools/roots.hpp>
#include <lapacke.h>

#include "satstab/errors.hpp"
#include "satstab/kernels.hpp"

namespace satstab {

using std::numbers::pi;

std::string_view to_string(BoundaryCondition bc) {
    switch (bc) {
    case BoundaryCondition::Clamped: return "clamped";
    case BoundaryCondition::Hinged: return "hinged";
    case BoundaryCondition::NeumannCH: return "neumann";
    }
    return "unknown";
}

BoundaryCondition parse_boundary_condition(std::string_view name) {
    if (name == "clamped") return BoundaryCondition::Clamped;
    if (name == "hinged") return BoundaryCondition::Hinged;
    if (name == "neumann" || name == "neumann_ch" || name == "ch") return BoundaryCondition::NeumannCH;
    throw Error(ErrorKind::InvalidArgument, "unknown boundary condition '" + std::string(name) + "'");
}

void OperatorParams::validate() const {
    require(std::isfinite(lambda) && lambda >= 0.0, "lambda must be >= 0");
    require(std::isfinite(length) && length > 0.0, "length must be > 0");
}

// ============================================================================
// Mode
// ============================================================================

namespace {

// cos(theta + d*pi/2)
double cos_shift(double theta, int d) {
    switch (((d % 4) + 4) % 4) {
    case 0: return std::cos(theta);
    case 1: return -std::sin(theta);
    case 2: return -std::cos(theta);
    default: return std::sin(theta);
    }
}

double sin_shift(double theta, int d) {
    switch (((d % 4) + 4) % 4) {
    case 0: return std::sin(theta);
    case 1: return std::cos(theta);
    case 2: return -std::sin(theta);
    default: return -std::cos(theta);
    }
}

} // namespace

double parity_basis(bool even, double s, double xi, double half, int d) {
    if (s < 0.0) {
        const double w = std::sqrt(-s);
        if (even) {
            return std::pow(w, d) * cos_shift(w * xi, d);
        }
        return std::pow(w, d - 1) * sin_shift(w * xi, d);
    }
    if (s > 0.0) {
        const double r = std::sqrt(s);
        const double ep = std::exp(r * (xi - half));
        const double em = std::exp(-r * (xi + half));
        const double den = 1.0 + std::exp(-2.0 * r * half);
        const double sgn = (d % 2 == 0) ? 1.0 : -1.0;
        if (even) {
            return std::pow(r, d) * (ep + sgn * em) / den;
        }
        return std::pow(r, d - 1) * (ep - sgn * em) / den;
    }
    if (even) {
        return d == 0 ? 1.0 : 0.0;
    }
    return d == 0 ? xi : (d == 1 ? 1.0 : 0.0);
}

double parity_pair_basis(bool even, double s1, double s2, double xi, double half, int d, int which) {
    if (which == 0) {
        return parity_basis(even, s1, xi, half, d);
    }
    if (std::abs(s2 - s1) > 1e-5 * std::max(1.0, std::abs(s1))) {
        return (parity_basis(even, s2, xi, half, d) - parity_basis(even, s1, xi, half, d)) / (s2 - s1);
    }
    // Confluent roots: the divided difference becomes dF/ds at the midpoint,
    // which is always on the oscillatory side (s < 0).
    const double s = 0.5 * (s1 + s2);
    const double w = std::sqrt(-s);
    const double dw = -0.5 / w;
    const double th = w * xi;
    if (even) {
        return dw * (d * std::pow(w, d - 1) * cos_shift(th, d) - std::pow(w, d) * xi * sin_shift(th, d));
    }
    return dw * ((d - 1) * std::pow(w, d - 2) * sin_shift(th, d) + std::pow(w, d - 1) * xi * cos_shift(th, d));
}

Mode Mode::sine(double amplitude, double frequency) {
    Mode m;
    m.kind_ = Kind::Sine;
    m.amp_ = amplitude;
    m.freq_ = frequency;
    return m;
}

Mode Mode::cosine(double amplitude, double frequency) {
    Mode m;
    m.kind_ = Kind::Cosine;
    m.amp_ = amplitude;
    m.freq_ = frequency;
    return m;
}

Mode Mode::constant(double amplitude) {
    Mode m;
    m.kind_ = Kind::Constant;
    m.amp_ = amplitude;
    return m;
}

Mode Mode::parity_pair(bool even, double center, double s1, double s2, double c1, double c2) {
    Mode m;
    m.kind_ = Kind::ParityPair;
    m.even_ = even;
    m.center_ = center;
    m.s1_ = s1;
    m.s2_ = s2;
    m.c1_ = c1;
    m.c2_ = c2;
    m.amp_ = 1.0;
    m.freq_ = std::sqrt(std::max(0.0, -s1));
    return m;
}

double Mode::eval(double x, int d) const {
    switch (kind_) {
    case Kind::Sine: return amp_ * std::pow(freq_, d) * sin_shift(freq_ * x, d);
    case Kind::Cosine: return amp_ * std::pow(freq_, d) * cos_shift(freq_ * x, d);
    case Kind::Constant: return d == 0 ? amp_ : 0.0;
    case Kind::ParityPair: {
        const double xi = x - center_;
        return amp_ * (c1_ * parity_pair_basis(even_, s1_, s2_, xi, center_, d, 0) +
                       c2_ * parity_pair_basis(even_, s1_, s2_, xi, center_, d, 1));
    }
    }
    return 0.0;
}

Mode Mode::scaled(double factor) const {
    Mode m = *this;
    m.amp_ *= factor;
    return m;
}

// ============================================================================
// EigenSystem
// ============================================================================

namespace {

double max_wavenumber(const OperatorParams& p, std::span<const Mode> modes) {
    double k = 1.0;
    for (const Mode& m : modes) {
        k = std::max(k, m.frequency() * p.length / pi);
    }
    return k;
}

} // namespace

EigenSystem::EigenSystem(OperatorParams params, BoundaryCondition bc, std::vector<double> values,
                         std::vector<int> labels, std::vector<Mode> modes)
    : params_(params), bc_(bc), values_(std::move(values)), labels_(std::move(labels)),
      modes_(std::move(modes)) {
    params_.validate();
    require(!values_.empty(), "EigenSystem: need at least one mode");
    require(values_.size() == labels_.size() && values_.size() == modes_.size(),
            "EigenSystem: values/labels/modes length mismatch");
    for (std::size_t j = 1; j < values_.size(); ++j) {
        require(values_[j] <= values_[j - 1], "EigenSystem: values must be nonincreasing");
    }
    // Quartic products (cubic nonlinearity against a mode) must integrate exactly.
    const auto kmax = static_cast<std::size_t>(std::ceil(max_wavenumber(params_, modes_)));
    quad_ = Quadrature::for_wavenumber(params_.length, 4 * (kmax + 1));

    const std::size_t J = values_.size();
    const std::size_t Q = quad_.size();
    for (int d = 0; d < 3; ++d) {
        tables_[d].resize(J * Q);
        for (std::size_t j = 0; j < J; ++j) {
            for (std::size_t q = 0; q < Q; ++q) {
                tables_[d][j * Q + q] = modes_[j].eval(quad_.nodes()[q], d);
            }
        }
    }
    using RowMajor = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
    const Eigen::Map<const Eigen::VectorXd> w(quad_.weights().data(), static_cast<Eigen::Index>(Q));
    const auto Ji = static_cast<Eigen::Index>(J);
    const auto Qi = static_cast<Eigen::Index>(Q);
    const Eigen::Map<const RowMajor> E1(tables_[1].data(), Ji, Qi);
    const Eigen::Map<const RowMajor> E2(tables_[2].data(), Ji, Qi);
    gram1_ = E1 * w.asDiagonal() * E1.transpose();
    gram2_ = E2 * w.asDiagonal() * E2.transpose();
}

std::span<const double> EigenSystem::table(int derivative) const {
    require(derivative >= 0 && derivative <= 2, "EigenSystem::table: derivative must be 0..2");
    return tables_[derivative];
}

std::vector<double> EigenSystem::project(const std::function<double(double)>& f) const {
    std::vector<double> g(quad_.size());
    for (std::size_t q = 0; q < g.size(); ++q) {
        g[q] = quad_.weights()[q] * f(quad_.nodes()[q]);
    }
    std::vector<double> out(count());
    kernels::project(tables_[0], stride(), g, out);
    return out;
}

void EigenSystem::synthesize(std::span<const double> coeffs, int derivative, std::span<double> out) const {
    require(coeffs.size() <= count(), "EigenSystem::synthesize: too many coefficients");
    require(out.size() == quad_.size(), "EigenSystem::synthesize: output must match the grid");
    kernels::synthesize(table(derivative), stride(), coeffs, out);
}

// ============================================================================
// Closed forms (hinged, Neumann)
// ============================================================================

EigenSystem eigen_closed_form(const OperatorParams& params, BoundaryCondition bc, std::size_t count) {
    params.validate();
    require(count >= 1, "mode count must be >= 1");
    require(bc != BoundaryCondition::Clamped, "eigen_closed_form: clamped has no closed form");

    const double L = params.length;
    const int k0 = bc == BoundaryCondition::NeumannCH ? 0 : 1;
    // sigma_k is unimodal in k with its peak near k = L sqrt(lambda/2)/pi, so
    // the `count` largest values are among the first count + peak wavenumbers.
    const int peak = static_cast<int>(std::ceil(L * std::sqrt(params.lambda / 2.0) / pi));
    const int kend = k0 + static_cast<int>(count) + peak + 2;

    struct Entry {
        double sigma;
        int k;
    };
    std::vector<Entry> entries;
    for (int k = k0; k < kend; ++k) {
        const double mu = (k * pi / L) * (k * pi / L);
        entries.push_back({mu * (params.lambda - mu), k});
    }
    std::stable_sort(entries.begin(), entries.end(), [](const Entry& a, const Entry& b) {
        return a.sigma > b.sigma;
    });
    entries.resize(count);

    std::vector<double> values;
    std::vector<int> labels;
    std::vector<Mode> modes;
    const double amp = std::sqrt(2.0 / L);
    for (const Entry& e : entries) {
        values.push_back(e.sigma);
        labels.push_back(e.k);
        const double freq = e.k * pi / L;
        if (bc == BoundaryCondition::Hinged) {
            modes.push_back(Mode::sine(amp, freq));
        } else if (e.k == 0) {
            modes.push_back(Mode::constant(std::sqrt(1.0 / L)));
        } else {
            modes.push_back(Mode::cosine(amp, freq));
        }
    }
    return EigenSystem(params, bc, std::move(values), std::move(labels), std::move(modes));
}

// ============================================================================
// Finite differences + polishing (clamped, hinged cross-check)
// ============================================================================

std::vector<double> fd_eigenvalues(const OperatorParams& params, BoundaryCondition stencil,
                                   std::size_t count, std::size_t grid) {
    params.validate();
    require(stencil == BoundaryCondition::Clamped || stencil == BoundaryCondition::Hinged,
            "fd_eigenvalues: stencil must be clamped or hinged");
    require(grid >= count + 4, "fd_eigenvalues: grid too coarse for the requested count");

    const auto N = static_cast<lapack_int>(grid);
    const double h = params.length / static_cast<double>(grid + 1);
    const double h2 = h * h;
    const double h4 = h2 * h2;
    // Ghost-point closure: clamped y_{-1} = y_1, hinged y_{-1} = -y_1.
    const double corner = stencil == BoundaryCondition::Clamped ? 7.0 : 5.0;

    // Upper band storage, column-major, kd = 2: ab[(kd + i - j) + j * ldab].
    const lapack_int kd = 2;
    const lapack_int ldab = kd + 1;
    std::vector<double> ab(static_cast<std::size_t>(ldab * N), 0.0);
    auto at = [&](lapack_int i, lapack_int j) -> double& {
        return ab[static_cast<std::size_t>((kd + i - j) + j * ldab)];
    };
    for (lapack_int i = 0; i < N; ++i) {
        const double d4 = (i == 0 || i == N - 1) ? corner : 6.0;
        at(i, i) = -d4 / h4 + 2.0 * params.lambda / h2;
        if (i + 1 < N) {
            at(i, i + 1) = 4.0 / h4 - params.lambda / h2;
        }
        if (i + 2 < N) {
            at(i, i + 2) = -1.0 / h4;
        }
    }

    std::vector<double> w(static_cast<std::size_t>(N));
    std::vector<lapack_int> ifail(static_cast<std::size_t>(N));
    lapack_int found = 0;
    double q_dummy = 0.0;
    double z_dummy = 0.0;
    const auto il = static_cast<lapack_int>(grid - count + 1);
    const lapack_int info = LAPACKE_dsbevx(LAPACK_COL_MAJOR, 'N', 'I', 'U', N, kd, ab.data(), ldab,
                                           &q_dummy, 1, 0.0, 0.0, il, N, 0.0, &found, w.data(),
                                           &z_dummy, 1, ifail.data());
    if (info != 0 || found != static_cast<lapack_int>(count)) {
        throw Error(ErrorKind::ConvergenceFailure,
                    "banded eigensolver failed (info=" + std::to_string(info) + ")");
    }
    std::vector<double> out(w.begin(), w.begin() + found);
    std::sort(out.begin(), out.end(), std::greater<>());
    return out;
}

namespace {

struct Roots {
    double s1;
    double s2;
};

Roots characteristic_roots(double lambda, double sigma) {
    double disc = lambda * lambda - 4.0 * sigma;
    if (disc < 0.0 && disc > -1e-13 * std::max(1.0, lambda * lambda)) {
        disc = 0.0;
    }
    if (!(disc >= 0.0) || (lambda == 0.0 && sigma == 0.0)) {
        throw Error(ErrorKind::ConvergenceFailure, "complex characteristic roots (sigma > lambda^2/4)");
    }
    const double sq = std::sqrt(disc);
    const double s1 = -(lambda + sq) / 2.0;
    // s1 * s2 = sigma, written to avoid cancellation for small sigma.
    const double s2 = sigma / s1;
    return {s1, s2};
}

// BC derivative order besides the value: y' for clamped, y'' for hinged.
int bc_order(BoundaryCondition stencil) { return stencil == BoundaryCondition::Clamped ? 1 : 2; }

double bc_determinant(bool even, double lambda, double sigma, double half, int dbc) {
    const Roots r = characteristic_roots(lambda, sigma);
    const double a0 = parity_pair_basis(even, r.s1, r.s2, half, half, 0, 0);
    const double b0 = parity_pair_basis(even, r.s1, r.s2, half, half, 0, 1);
    const double a1 = parity_pair_basis(even, r.s1, r.s2, half, half, dbc, 0);
    const double b1 = parity_pair_basis(even, r.s1, r.s2, half, half, dbc, 1);
    const double scale = (std::abs(a0) + std::abs(a1)) * (std::abs(b0) + std::abs(b1));
    return (a0 * b1 - b0 * a1) / (scale > 0.0 ? scale : 1.0);
}

Mode build_parity_mode(bool even, const OperatorParams& p, double sigma, int dbc) {
    const double half = p.length / 2.0;
    const Roots r = characteristic_roots(p.lambda, sigma);
    const double a0 = parity_pair_basis(even, r.s1, r.s2, half, half, 0, 0);
    const double b0 = parity_pair_basis(even, r.s1, r.s2, half, half, 0, 1);
    const double a1 = parity_pair_basis(even, r.s1, r.s2, half, half, dbc, 0);
    const double b1 = parity_pair_basis(even, r.s1, r.s2, half, half, dbc, 1);
    const double scale1 = std::pow(std::max({1.0, std::sqrt(-r.s1), std::sqrt(std::abs(r.s2))}), dbc);
    const double n0 = std::hypot(a0, b0);
    const double n1 = std::hypot(a1, b1) / scale1;
    double c1 = 0.0;
    double c2 = 0.0;
    if (n0 >= n1) {
        c1 = b0;
        c2 = -a0;
    } else {
        c1 = b1;
        c2 = -a1;
    }
    return Mode::parity_pair(even, half, r.s1, r.s2, c1, c2);
}

Mode normalise(const Mode& m, const Quadrature& quad) {
    const double nrm2 = quad.integrate([&](double x) {
        const double v = m.eval(x);
        return v * v;
    });
    if (!(nrm2 > 0.0)) {
        throw Error(ErrorKind::ConvergenceFailure, "degenerate eigenfunction");
    }
    double sign = 1.0;
    for (int d = 1; d <= 3; ++d) {
        const double v = m.eval(0.0, d);
        if (std::abs(v) > 1e-8 * std::pow(std::max(1.0, m.frequency()), d) * std::sqrt(nrm2)) {
            sign = v > 0.0 ? 1.0 : -1.0;
            break;
        }
    }
    return m.scaled(sign / std::sqrt(nrm2));
}

struct Polished {
    double sigma;
    bool even;
    bool ok;
};

// Root of the parity determinant near `guess`, bracketed within +-delta.
Polished polish_parity(bool even, const OperatorParams& p, double guess, double delta, int dbc) {
    const double half = p.length / 2.0;
    const double cap = p.lambda * p.lambda / 4.0;
    auto g = [&](double s) { return bc_determinant(even, p.lambda, s, half, dbc); };
    double lo = guess - delta;
    double hi = std::min(guess + delta, cap - 1e-12 * std::max(1.0, std::abs(cap)));
    if (!(hi > lo)) {
        return {guess, even, false};
    }
    const double glo = g(lo);
    const double ghi = g(hi);
    if (glo == 0.0) return {lo, even, true};
    if (ghi == 0.0) return {hi, even, true};
    if ((glo > 0.0) == (ghi > 0.0)) {
        // The top of the spectrum can sit exactly on lambda^2/4 (confluent roots).
        if (guess + delta >= cap && std::abs(g(cap)) <= 1e-10) {
            return {cap, even, true};
        }
        return {guess, even, false};
    }
    boost::uintmax_t iters = 200;
    const auto tol = boost::math::tools::eps_tolerance<double>(50);
    const auto [a, b] = boost::math::tools::toms748_solve(g, lo, hi, glo, ghi, tol, iters);
    return {0.5 * (a + b), even, true};
}

} // namespace

EigenSystem eigen_fd_family(const OperatorParams& params, BoundaryCondition stencil, std::size_t count,
                            const ClampedOptions& opts) {
    params.validate();
    require(count >= 1, "mode count must be >= 1");
    require(stencil == BoundaryCondition::Clamped || stencil == BoundaryCondition::Hinged,
            "eigen_fd_family: stencil must be clamped or hinged");

    std::size_t N = opts.initial_grid != 0 ? opts.initial_grid : std::max<std::size_t>(128, 8 * (count + 2));
    auto richardson = [&](std::size_t grid) {
        const auto coarse = fd_eigenvalues(params, stencil, count, grid);
        const auto fine = fd_eigenvalues(params, stencil, count, 2 * grid + 1);
        std::vector<double> r(count);
        for (std::size_t j = 0; j < count; ++j) {
            r[j] = (4.0 * fine[j] - coarse[j]) / 3.0;
        }
        return r;
    };
    // Rounding floor of the banded eigensolve: its backward error is
    // eps * ||A_h|| ~ eps * 16 / h^4, which swamps small |sigma| on fine grids.
    auto noise_floor = [&](std::size_t grid) {
        const double h = params.length / static_cast<double>(2 * grid + 2);
        return 1e2 * std::numeric_limits<double>::epsilon() * (16.0 / (h * h * h * h) + 4.0 * params.lambda / (h * h));
    };

    // Grids N and 2N+1 share nodes (h halves exactly).
    std::vector<double> prev = richardson(N);
    std::vector<double> est;
    bool converged = false;
    double floor = 0.0;
    for (int it = 0; it < opts.max_refinements; ++it) {
        N = 2 * N + 1;
        est = richardson(N);
        floor = noise_floor(N);
        converged = true;
        for (std::size_t j = 0; j < count; ++j) {
            if (std::abs(est[j] - prev[j]) > opts.tolerance * std::max(1.0, std::abs(est[j])) + floor) {
                converged = false;
            }
        }
        if (converged) {
            break;
        }
        prev = est;
    }
    if (!converged) {
        throw Error(ErrorKind::ConvergenceFailure,
                    "Richardson estimates did not stabilise to the requested tolerance");
    }

    const int dbc = bc_order(stencil);
    std::vector<Polished> picked(count);
    for (std::size_t j = 0; j < count; ++j) {
        const double scale = std::max(1.0, std::abs(est[j]));
        double delta = std::max(10.0 * std::abs(est[j] - prev[j]) + floor, 1e-9 * scale);
        Polished best{est[j], true, false};
        for (int expand = 0; expand < 8 && !best.ok; ++expand, delta *= 4.0) {
            const Polished e = polish_parity(true, params, est[j], delta, dbc);
            const Polished o = polish_parity(false, params, est[j], delta, dbc);
            if (e.ok && o.ok) {
                best = std::abs(e.sigma - est[j]) <= std::abs(o.sigma - est[j]) ? e : o;
            } else if (e.ok) {
                best = e;
            } else if (o.ok) {
                best = o;
            }
        }
        if (!best.ok) {
            throw Error(ErrorKind::ConvergenceFailure,
                        "could not polish eigenvalue " + std::to_string(j + 1));
        }
        if (std::abs(best.sigma - est[j]) > std::max(1e3 * opts.tolerance * scale, 100.0 * std::abs(est[j] - prev[j]) + 100.0 * floor)) {
            throw Error(ErrorKind::ConvergenceFailure,
                        "polished eigenvalue " + std::to_string(j + 1) + " moved away from the FD estimate");
        }
        picked[j] = best;
    }
    // Two FD values landing on the same root: the pair is a cross-parity
    // near-degeneracy, so move one of them to the other parity.
    for (std::size_t j = 1; j < count; ++j) {
        const Polished& a = picked[j - 1];
        Polished& b = picked[j];
        if (a.even == b.even && std::abs(a.sigma - b.sigma) <= 1e-9 * std::max(1.0, std::abs(a.sigma))) {
            const double delta = std::max(10.0 * std::abs(est[j] - prev[j]), 1e-6 * std::max(1.0, std::abs(est[j])));
            const Polished other = polish_parity(!b.even, params, est[j], delta, dbc);
            if (!other.ok) {
                throw Error(ErrorKind::ConvergenceFailure, "degenerate eigenvalue within one parity class");
            }
            b = other;
        }
    }
    std::stable_sort(picked.begin(), picked.end(),
                     [](const Polished& a, const Polished& b) { return a.sigma > b.sigma; });

    const double kmax = static_cast<double>(count + 2);
    const Quadrature norm_quad = Quadrature::for_wavenumber(params.length, static_cast<std::size_t>(4 * kmax));
    std::vector<double> values;
    std::vector<int> labels;
    std::vector<Mode> modes;
    for (std::size_t j = 0; j < count; ++j) {
        values.push_back(picked[j].sigma);
        labels.push_back(static_cast<int>(j + 1));
        modes.push_back(normalise(build_parity_mode(picked[j].even, params, picked[j].sigma, dbc), norm_quad));
    }
    EigenSystem es(params, stencil, std::move(values), std::move(labels), std::move(modes));

    // Residual acceptance.
    for (std::size_t j = 0; j < count; ++j) {
        if (eigen_residual(es, j) > 1e-6 || bc_residual(es, j) > 1e-7) {
            throw Error(ErrorKind::ConvergenceFailure,
                        "eigenpair " + std::to_string(j + 1) + " failed the residual acceptance test");
        }
    }
    return es;
}

EigenSystem eigen_clamped(const OperatorParams& params, std::size_t count, const ClampedOptions& opts) {
    return eigen_fd_family(params, BoundaryCondition::Clamped, count, opts);
}

EigenSystem eigen_system(const OperatorParams& params, BoundaryCondition bc, std::size_t count) {
    if (bc == BoundaryCondition::Clamped) {
        return eigen_clamped(params, count);
    }
    return eigen_closed_form(params, bc, count);
}

// ============================================================================
// Derived quantities
// ============================================================================

UnstableCount unstable_count(std::span<const double> values) {
    UnstableCount out;
    while (out.n < values.size() && values[out.n] >= 0.0) {
        ++out.n;
    }
    if (out.n == values.size()) {
        throw Error(ErrorKind::AllModesUnstable,
                    "no negative eigenvalue among the " + std::to_string(values.size()) +
                        " computed modes; increase the mode count");
    }
    out.eta = -values[out.n] / 2.0;
    return out;
}

UnstableCount unstable_count(const EigenSystem& es) { return unstable_count(es.values()); }

bool critical_set_member(double lambda, double tol) {
    const double pi2 = pi * pi;
    const double bound = lambda / pi2 + 1.0;
    for (long k = 1; 2 * k * k <= static_cast<long>(std::ceil(bound)) + 1; ++k) {
        for (long l = k + 2; static_cast<double>(k * k + l * l) <= bound; l += 2) {
            if (std::abs(lambda - pi2 * static_cast<double>(k * k + l * l)) <= tol) {
                return true;
            }
        }
    }
    return false;
}

double eigen_residual(const EigenSystem& es, std::size_t j) {
    const Mode& m = es.mode(j);
    const double sigma = es.values()[j];
    const double lambda = es.params().lambda;
    const double r2 = es.quadrature().integrate([&](double x) {
        const double v = m.eval(x, 4) + lambda * m.eval(x, 2) + sigma * m.eval(x, 0);
        return v * v;
    });
    return std::sqrt(r2) / std::max(1.0, std::abs(sigma));
}

double bc_residual(const EigenSystem& es, std::size_t j) {
    const Mode& m = es.mode(j);
    const double L = es.params().length;
    const double scale = std::max(1.0, std::pow(std::abs(es.values()[j]), 0.25));
    int orders[2] = {0, 1};
    switch (es.bc()) {
    case BoundaryCondition::Clamped: orders[0] = 0; orders[1] = 1; break;
    case BoundaryCondition::Hinged: orders[0] = 0; orders[1] = 2; break;
    case BoundaryCondition::NeumannCH: orders[0] = 1; orders[1] = 3; break;
    }
    double r = 0.0;
    for (int d : orders) {
        const double s = std::pow(scale, d);
        r = std::max({r, std::abs(m.eval(0.0, d)) / s, std::abs(m.eval(L, d)) / s});
    }
    return r;
}

double orthonormality_error(const EigenSystem& es) {
    const std::size_t J = es.count();
    const std::size_t Q = es.stride();
    const auto E = es.table(0);
    double err = 0.0;
    std::vector<double> g(Q);
    for (std::size_t i = 0; i < J; ++i) {
        kernels::mul(E.subspan(i * Q, Q), es.quadrature().weights(), g);
        for (std::size_t j = i; j < J; ++j) {
            const double ip = kernels::dot(g, E.subspan(j * Q, Q));
            err = std::max(err, std::abs(ip - (i == j ? 1.0 : 0.0)));
        }
    }
    return err;
}

double norm_error(const EigenSystem& es, std::size_t j) {
    const std::size_t Q = es.stride();
    const auto e = es.table(0).subspan(j * Q, Q);
    return std::abs(es.quadrature().inner(e, e) - 1.0);
}

} // namespace satstab
