#pragma once

#include <limits>

#include <Eigen/Dense>

namespace satstab {

// One level shared by all channels. Infinity means no saturation.
struct SaturationLevel {
    double ell = std::numeric_limits<double>::infinity();

    static SaturationLevel unbounded() { return {}; }
    [[nodiscard]] bool is_infinite() const noexcept { return ell == std::numeric_limits<double>::infinity(); }
    void validate() const;
};

double sat(double s, SaturationLevel level) noexcept;
Eigen::VectorXd sat(const Eigen::VectorXd& s, SaturationLevel level);

// phi(u) = sat(u) - u
Eigen::VectorXd deadzone(const Eigen::VectorXd& u, SaturationLevel level);

struct SectorCheck {
    bool hypothesis = false;  // |((K - C) z)_j| <= ell for every j
    bool inequality = false;  // phi(Kz)^T D (phi(Kz) + Cz) <= 1e-12
    double value = 0.0;       // phi(Kz)^T D (phi(Kz) + Cz)
};

SectorCheck sector_holds(const Eigen::VectorXd& z, const Eigen::MatrixXd& K, const Eigen::MatrixXd& C,
                         const Eigen::VectorXd& D_diag, SaturationLevel level);

} // namespace satstab
