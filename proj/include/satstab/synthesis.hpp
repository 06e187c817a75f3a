#pragma once

#include <complex>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "satstab/modal.hpp"
#include "satstab/saturation.hpp"

namespace satstab {

struct KalmanReport {
    int rank = 0;
    int dim = 0;
    bool controllable = false;
    // Uncontrollable eigenvalues are all in the open left half-plane.
    bool stabilizable = false;
    // m = 1, diagonal A: prod b_j * prod_{i<k} (sigma_k - sigma_i).
    std::optional<double> vandermonde_value;
    // m = 1: det of the square Kalman matrix.
    std::optional<double> kalman_determinant;
    // Eigenvalues mu of A with rank [A - mu I, B] < dim.
    std::vector<std::complex<double>> pbh_failures;
};

KalmanReport kalman_diagnose(const Eigen::MatrixXd& A, const Eigen::MatrixXd& B);
KalmanReport kalman_diagnose(const ModalSystem& ms);

struct GainTarget {
    // Closed-loop poles for m = 1. Empty: -eta (1, 2, ..., dim).
    std::vector<double> poles;
    // Weights of the quadratic cost used when m > 1 (or when requested).
    bool lqr = false;
    double q = 1.0;
    double r = 1.0;
};

struct Gain {
    Eigen::MatrixXd K;  // m x dim, control u = K z
    std::vector<std::complex<double>> closed_loop_spectrum;
};

Gain make_gain(const Eigen::MatrixXd& A, const Eigen::MatrixXd& B, Eigen::MatrixXd K);

// u = K z with A + BK having the characteristic polynomial of `poles`.
Eigen::MatrixXd ackermann(const Eigen::MatrixXd& A, const Eigen::MatrixXd& B, std::span<const double> poles);

// Stabilizing solution of A^T P + P A - P B R^{-1} B^T P + Q = 0 from the
// stable invariant subspace of the Hamiltonian, polished by Kleinman steps.
Eigen::MatrixXd care(const Eigen::MatrixXd& A, const Eigen::MatrixXd& B, const Eigen::MatrixXd& Q,
                     const Eigen::MatrixXd& R);

Gain design_gain(const ModalSystem& ms, const GainTarget& target = {});
Gain design_gain(const Eigen::MatrixXd& A, const Eigen::MatrixXd& B, const GainTarget& target, double eta);

struct Certificate {
    Eigen::MatrixXd P;
    Eigen::VectorXd D;  // diagonal of D
    Eigen::MatrixXd C;
    double alpha = 0.0;
    double beta_min = 0.0;
    double beta_max = 0.0;
    SaturationLevel ell;
};

Eigen::MatrixXd lmi_m1(const Eigen::MatrixXd& A, const Eigen::MatrixXd& B, const Eigen::MatrixXd& K,
                       const Eigen::MatrixXd& P, const Eigen::VectorXd& D, const Eigen::MatrixXd& C);
// Infinite ell has no finite M2; the Schur complement P is used instead.
Eigen::MatrixXd lmi_m2(const Eigen::MatrixXd& K, const Eigen::MatrixXd& P, const Eigen::MatrixXd& C,
                       SaturationLevel ell);

struct CertificateOptions {
    double theta = 0.1;
    int max_doublings = 200;
    // Golden-section refinement of d after feasibility; 0 disables it.
    int refine_iterations = 60;
};

Certificate build_certificate(const Eigen::MatrixXd& A, const Eigen::MatrixXd& B, const Gain& gain,
                              SaturationLevel ell, const CertificateOptions& opts = {});
Certificate build_certificate(const ModalSystem& ms, const Gain& gain, SaturationLevel ell,
                              const CertificateOptions& opts = {});

// Certificate from user-supplied (P, D, C); alpha = -lambda_max(M1).
Certificate make_certificate(const Eigen::MatrixXd& A, const Eigen::MatrixXd& B, const Gain& gain,
                             Eigen::MatrixXd P, Eigen::VectorXd D, Eigen::MatrixXd C, SaturationLevel ell);

struct CertificateCheck {
    double lambda_max_m1 = 0.0;
    double lambda_min_m2 = 0.0;
    double lambda_min_schur = 0.0;  // P - (K - C)^T (K - C) / ell^2
    double lambda_min_p = 0.0;
    bool ok = false;
};

CertificateCheck check_certificate(const Certificate& cert, const Eigen::MatrixXd& A, const Eigen::MatrixXd& B,
                                   const Gain& gain, double m2_tol = 1e-9);
CertificateCheck check_certificate(const Certificate& cert, const ModalSystem& ms, const Gain& gain,
                                   double m2_tol = 1e-9);

bool ellipsoid_contains(const Certificate& cert, const Eigen::VectorXd& z);

struct H2Constants {
    double M = 0.0;
    double C1 = 0.0;
    double C2 = 0.0;
    double C3 = 0.0;
    double C4 = 0.0;
    double a = 0.0;
};

H2Constants select_h2_constants(const Certificate& cert, const ModalSystem& ms, const Gain& gain,
                                double theta = 0.1);

// Every constraint the constants must satisfy; empty when all hold.
std::vector<std::string> h2_violations(const H2Constants& h, const Certificate& cert, const ModalSystem& ms,
                                       const Gain& gain);

} // namespace satstab
