#pragma once

#include <Eigen/Dense>

namespace ness {

enum class LyapunovMethod { Auto, Kronecker, BartelsStewart };

/// Dimension at or below which Auto picks the Kronecker route.
inline constexpr Eigen::Index kKroneckerMaxDim = 8;

/// Solves X Z + Z X^T = C for Z (real, dense). The Kronecker route vectorises
/// the equation into an n^2 x n^2 LU solve; the Bartels-Stewart route reduces X
/// to real Schur form and back-substitutes on the quasi-triangular factor.
Eigen::MatrixXd solve_continuous_lyapunov(const Eigen::MatrixXd& X, const Eigen::MatrixXd& C,
                                          LyapunovMethod method = LyapunovMethod::Auto);

/// max |X Z + Z X^T - C|
double lyapunov_residual(const Eigen::MatrixXd& X, const Eigen::MatrixXd& Z, const Eigen::MatrixXd& C);

struct RealSchur {
  Eigen::MatrixXd T;  // quasi upper triangular
  Eigen::MatrixXd Q;  // orthogonal, X = Q T Q^T
};

/// Real Schur factorisation backed by LAPACK dgees. The result is probed for
/// consistency and recomputed with real_schur_portable if the BLAS is faulty.
RealSchur real_schur(const Eigen::MatrixXd& X);
/// BLAS-free factorisation (Eigen's QR iteration), in the same standardised
/// form: every 2x2 diagonal block holds a complex-conjugate pair.
RealSchur real_schur_portable(const Eigen::MatrixXd& X);

/// Eigenvalues read off the 1x1 and 2x2 diagonal blocks of T.
Eigen::VectorXcd schur_eigenvalues(const RealSchur& schur);

/// Bartels-Stewart solve reusing an existing factorisation of X.
Eigen::MatrixXd solve_continuous_lyapunov(const RealSchur& schur, const Eigen::MatrixXd& C);

}  // namespace ness
