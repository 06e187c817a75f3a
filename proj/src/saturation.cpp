#include "satstab/saturation.hpp"

#include <algorithm>
#include <cmath>

#include "satstab/errors.hpp"

namespace satstab {

void SaturationLevel::validate() const {
    require(!std::isnan(ell) && ell > 0.0, "saturation level must be positive (or inf)");
}

double sat(double s, SaturationLevel level) noexcept {
    return std::clamp(s, -level.ell, level.ell);
}

Eigen::VectorXd sat(const Eigen::VectorXd& s, SaturationLevel level) {
    return s.unaryExpr([level](double v) { return sat(v, level); });
}

Eigen::VectorXd deadzone(const Eigen::VectorXd& u, SaturationLevel level) {
    return sat(u, level) - u;
}

SectorCheck sector_holds(const Eigen::VectorXd& z, const Eigen::MatrixXd& K, const Eigen::MatrixXd& C,
                         const Eigen::VectorXd& D_diag, SaturationLevel level) {
    require(K.cols() == z.size() && C.cols() == z.size() && C.rows() == K.rows() &&
                D_diag.size() == K.rows(),
            "sector check: inconsistent dimensions");
    SectorCheck out;
    const Eigen::VectorXd kc = (K - C) * z;
    out.hypothesis = (kc.array().abs() <= level.ell).all();
    const Eigen::VectorXd phi = deadzone(K * z, level);
    out.value = phi.dot(D_diag.asDiagonal() * (phi + C * z));
    out.inequality = out.value <= 1e-12;
    return out;
}

} // namespace satstab
