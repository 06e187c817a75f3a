#pragma once

#include <complex>
#include <vector>

#include <Eigen/Dense>

// Small dense helpers shared by synthesis and the invariant checks.
namespace satstab::linalg {

double lambda_max_sym(const Eigen::MatrixXd& S);
double lambda_min_sym(const Eigen::MatrixXd& S);

std::vector<std::complex<double>> eigenvalues(const Eigen::MatrixXd& M);
double spectral_abscissa(const Eigen::MatrixXd& M);

// Solves A^T X + X A = -Q by Bartels-Stewart on the complex Schur form of A.
// A must have no pair of eigenvalues with mu_i + conj(mu_j) = 0.
Eigen::MatrixXd solve_lyapunov(const Eigen::MatrixXd& A, const Eigen::MatrixXd& Q);

// [B | AB | ... | A^{n-1} B]
Eigen::MatrixXd kalman_matrix(const Eigen::MatrixXd& A, const Eigen::MatrixXd& B);

int rank(const Eigen::MatrixXd& M, double rel_tol = 1e-10);

double frobenius(const Eigen::MatrixXd& M);

} // namespace satstab::linalg
