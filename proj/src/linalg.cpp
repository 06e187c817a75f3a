#include "satstab/linalg.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include <Eigen/Eigenvalues>
#include <Eigen/SVD>

#include "satstab/errors.hpp"

namespace satstab::linalg {

double lambda_max_sym(const Eigen::MatrixXd& S) {
    require(S.rows() == S.cols() && S.rows() > 0, "lambda_max: square nonempty matrix required");
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(0.5 * (S + S.transpose()), Eigen::EigenvaluesOnly);
    return es.eigenvalues().maxCoeff();
}

double lambda_min_sym(const Eigen::MatrixXd& S) {
    require(S.rows() == S.cols() && S.rows() > 0, "lambda_min: square nonempty matrix required");
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(0.5 * (S + S.transpose()), Eigen::EigenvaluesOnly);
    return es.eigenvalues().minCoeff();
}

std::vector<std::complex<double>> eigenvalues(const Eigen::MatrixXd& M) {
    if (M.size() == 0) {
        return {};
    }
    Eigen::EigenSolver<Eigen::MatrixXd> es(M, false);
    const auto& ev = es.eigenvalues();
    return {ev.data(), ev.data() + ev.size()};
}

double spectral_abscissa(const Eigen::MatrixXd& M) {
    double best = -std::numeric_limits<double>::infinity();
    for (const auto& z : eigenvalues(M)) {
        best = std::max(best, z.real());
    }
    return best;
}

Eigen::MatrixXd solve_lyapunov(const Eigen::MatrixXd& A, const Eigen::MatrixXd& Q) {
    const Eigen::Index n = A.rows();
    require(A.cols() == n && Q.rows() == n && Q.cols() == n, "lyapunov: dimension mismatch");
    if (n == 0) {
        return Eigen::MatrixXd(0, 0);
    }
    // A = U T U^H turns A^T X + X A = -Q into T^H Y + Y T = -U^H Q U,
    // which is solved entry by entry in increasing (i, j).
    Eigen::ComplexSchur<Eigen::MatrixXd> schur(A);
    const Eigen::MatrixXcd& T = schur.matrixT();
    const Eigen::MatrixXcd& U = schur.matrixU();
    const Eigen::MatrixXcd Qt = U.adjoint() * Q.cast<std::complex<double>>() * U;
    Eigen::MatrixXcd Y = Eigen::MatrixXcd::Zero(n, n);
    const double scale = std::max(1.0, T.cwiseAbs().maxCoeff());
    for (Eigen::Index j = 0; j < n; ++j) {
        for (Eigen::Index i = 0; i < n; ++i) {
            std::complex<double> rhs = -Qt(i, j);
            for (Eigen::Index k = 0; k < i; ++k) {
                rhs -= std::conj(T(k, i)) * Y(k, j);
            }
            for (Eigen::Index k = 0; k < j; ++k) {
                rhs -= Y(i, k) * T(k, j);
            }
            const std::complex<double> d = std::conj(T(i, i)) + T(j, j);
            if (std::abs(d) <= 1e-13 * scale) {
                throw Error(ErrorKind::ConvergenceFailure,
                            "lyapunov equation is singular (eigenvalues symmetric about the imaginary axis)");
            }
            Y(i, j) = rhs / d;
        }
    }
    Eigen::MatrixXd X = (U * Y * U.adjoint()).real();
    return 0.5 * (X + X.transpose());
}

Eigen::MatrixXd kalman_matrix(const Eigen::MatrixXd& A, const Eigen::MatrixXd& B) {
    const Eigen::Index n = A.rows();
    require(A.cols() == n && B.rows() == n, "kalman matrix: dimension mismatch");
    const Eigen::Index m = B.cols();
    Eigen::MatrixXd K(n, n * m);
    Eigen::MatrixXd block = B;
    for (Eigen::Index i = 0; i < n; ++i) {
        K.middleCols(i * m, m) = block;
        block = A * block;
    }
    return K;
}

int rank(const Eigen::MatrixXd& M, double rel_tol) {
    if (M.size() == 0) {
        return 0;
    }
    Eigen::JacobiSVD<Eigen::MatrixXd> svd(M);
    const auto& s = svd.singularValues();
    if (s.size() == 0 || s(0) == 0.0) {
        return 0;
    }
    int r = 0;
    for (Eigen::Index i = 0; i < s.size(); ++i) {
        if (s(i) > rel_tol * s(0)) {
            ++r;
        }
    }
    return r;
}

double frobenius(const Eigen::MatrixXd& M) { return M.norm(); }

} // namespace satstab::linalg
