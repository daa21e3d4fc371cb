#include "ness/lyapunov.hpp"

#include <lapacke.h>

#include <Eigen/Eigenvalues>
#include <cmath>
#include <complex>
#include <vector>

#include "ness/error.hpp"

namespace ness {

namespace {

using Eigen::Index;
using Eigen::MatrixXd;

// Block sizes (1 or 2) of the diagonal of a real quasi-triangular matrix.
std::vector<Index> block_starts(const MatrixXd& T) {
  std::vector<Index> starts;
  const Index n = T.rows();
  for (Index i = 0; i < n;) {
    starts.push_back(i);
    i += (i + 1 < n && T(i + 1, i) != 0.0) ? 2 : 1;
  }
  return starts;
}

// Solves A Z + Z B = R for tiny A (p x p) and B (q x q) via the Kronecker form.
MatrixXd small_sylvester(const MatrixXd& A, const MatrixXd& B, const MatrixXd& R) {
  const Index p = A.rows(), q = B.rows();
  MatrixXd K = MatrixXd::Zero(p * q, p * q);
  for (Index c = 0; c < q; ++c) {
    K.block(c * p, c * p, p, p) += A;
    for (Index r = 0; r < q; ++r) K.block(r * p, c * p, p, p).diagonal().array() += B(c, r);
  }
  const Eigen::VectorXd rhs = Eigen::Map<const Eigen::VectorXd>(R.data(), p * q);
  const Eigen::VectorXd z = K.fullPivLu().solve(rhs);
  return Eigen::Map<const MatrixXd>(z.data(), p, q);
}

// T Z + Z T^T = C with T quasi upper triangular.
MatrixXd solve_quasi_triangular(const MatrixXd& T, MatrixXd C) {
  const Index n = T.rows();
  const std::vector<Index> starts = block_starts(T);
  auto block_size = [&](std::size_t b) { return (b + 1 < starts.size() ? starts[b + 1] : n) - starts[b]; };

  MatrixXd Z = MatrixXd::Zero(n, n);
  for (std::size_t cb = starts.size(); cb-- > 0;) {
    const Index j0 = starts[cb];
    const Index q = block_size(cb);
    const MatrixXd S = T.block(j0, j0, q, q).transpose();

    // Column block: T Z_J + Z_J S = R, back-substituted over row blocks.
    MatrixXd R = C.middleCols(j0, q);
    for (std::size_t rb = starts.size(); rb-- > 0;) {
      const Index i0 = starts[rb];
      const Index p = block_size(rb);
      const MatrixXd Zi = small_sylvester(T.block(i0, i0, p, p), S, R.middleRows(i0, p));
      Z.block(i0, j0, p, q) = Zi;
      if (i0 > 0) R.topRows(i0).noalias() -= T.block(0, i0, i0, p) * Zi;
    }
    if (j0 > 0) C.leftCols(j0).noalias() -= Z.middleCols(j0, q) * T.block(0, j0, j0, q).transpose();
  }
  return Z;
}

MatrixXd solve_kronecker(const MatrixXd& X, const MatrixXd& C) {
  const Index n = X.rows();
  MatrixXd K = MatrixXd::Zero(n * n, n * n);
  for (Index b = 0; b < n; ++b) {
    K.block(b * n, b * n, n, n) += X;
    for (Index a = 0; a < n; ++a) {
      if (X(b, a) != 0.0) K.block(b * n, a * n, n, n).diagonal().array() += X(b, a);
    }
  }
  const Eigen::VectorXd rhs = Eigen::Map<const Eigen::VectorXd>(C.data(), n * n);
  const Eigen::VectorXd z = K.partialPivLu().solve(rhs);
  return Eigen::Map<const MatrixXd>(z.data(), n, n);
}

// Cheap O(n^2) consistency probe of X = Q T Q^T with Q orthogonal.
bool schur_consistent(const MatrixXd& X, const RealSchur& s) {
  const Index n = X.rows();
  Eigen::VectorXd v(n);
  for (Index i = 0; i < n; ++i) v(i) = std::sin(1.0 + 0.618 * static_cast<double>(i));
  const Eigen::VectorXd w = s.Q.transpose() * v;
  const double scale = std::max(1.0, X.cwiseAbs().maxCoeff()) * static_cast<double>(n);
  const double recon = (s.Q * (s.T * w) - X * v).cwiseAbs().maxCoeff();
  const double orth = (s.Q * w - v).cwiseAbs().maxCoeff();
  return recon <= 1e-10 * scale && orth <= 1e-10 * static_cast<double>(n);
}

}  // namespace

RealSchur real_schur_portable(const MatrixXd& X) {
  Eigen::RealSchur<MatrixXd> rs(X);
  if (rs.info() != Eigen::Success) throw Error(ErrorKind::SolveFailed, "real_schur", "QR iteration did not converge");
  RealSchur out{rs.matrixT(), rs.matrixU()};
  const Index n = X.rows();
  for (Index j = 0; j < n; ++j)
    for (Index i = j + 2; i < n; ++i) out.T(i, j) = 0.0;
  // Eigen may leave 2x2 blocks with real eigenvalues; split them so that every
  // 2x2 block carries a complex pair, as LAPACK's standardised form does.
  for (Index i = 0; i + 1 < n; ++i) {
    if (out.T(i + 1, i) == 0.0) continue;
    const double a = out.T(i, i), b = out.T(i, i + 1), c = out.T(i + 1, i), d = out.T(i + 1, i + 1);
    const double disc = 0.25 * (a - d) * (a - d) + b * c;
    if (disc < 0.0) {
      ++i;
      continue;
    }
    // Rotate so that the lower-left entry vanishes.
    const double lambda = 0.5 * (a + d) + std::sqrt(disc);
    double x = b, y = lambda - a;
    if (std::abs(x) + std::abs(y) == 0.0) {
      x = lambda - d;
      y = c;
    }
    const double r = std::hypot(x, y);
    const double cs = x / r, sn = y / r;
    Eigen::Matrix2d G;
    G << cs, -sn, sn, cs;
    out.T.middleRows(i, 2) = G.transpose() * out.T.middleRows(i, 2);
    out.T.middleCols(i, 2) = out.T.middleCols(i, 2) * G;
    out.Q.middleCols(i, 2) = out.Q.middleCols(i, 2) * G;
    out.T(i + 1, i) = 0.0;
  }
  return out;
}

RealSchur real_schur(const MatrixXd& X) {
  const Index n = X.rows();
  RealSchur out{X, MatrixXd(n, n)};
  std::vector<double> wr(static_cast<std::size_t>(n)), wi(static_cast<std::size_t>(n));
  lapack_int sdim = 0;
  const lapack_int info =
      LAPACKE_dgees(LAPACK_COL_MAJOR, 'V', 'N', nullptr, static_cast<lapack_int>(n), out.T.data(),
                    static_cast<lapack_int>(n), &sdim, wr.data(), wi.data(), out.Q.data(), static_cast<lapack_int>(n));
  if (info != 0) throw Error(ErrorKind::SolveFailed, "real_schur", "dgees failed with info " + std::to_string(info));
  // dgees leaves junk below the first subdiagonal.
  for (Index j = 0; j < n; ++j)
    for (Index i = j + 2; i < n; ++i) out.T(i, j) = 0.0;
  if (!schur_consistent(X, out)) {
    // A miscompiled or mis-dispatched BLAS kernel; see blas_guard.hpp.
    out = real_schur_portable(X);
    if (!schur_consistent(X, out)) throw Error(ErrorKind::SolveFailed, "real_schur", "inconsistent factorisation");
  }
  return out;
}

MatrixXd solve_continuous_lyapunov(const MatrixXd& X, const MatrixXd& C, LyapunovMethod method) {
  if (X.rows() != X.cols() || C.rows() != X.rows() || C.cols() != X.cols())
    throw Error(ErrorKind::InvalidArgument, "solve_continuous_lyapunov", "dimension mismatch");
  if (X.rows() == 0) return MatrixXd(0, 0);
  if (method == LyapunovMethod::Auto)
    method = X.rows() <= kKroneckerMaxDim ? LyapunovMethod::Kronecker : LyapunovMethod::BartelsStewart;
  if (method == LyapunovMethod::Kronecker) return solve_kronecker(X, C);

  return solve_continuous_lyapunov(real_schur(X), C);
}

MatrixXd solve_continuous_lyapunov(const RealSchur& schur, const MatrixXd& C) {
  const MatrixXd Ct = schur.Q.transpose() * C * schur.Q;
  const MatrixXd Zt = solve_quasi_triangular(schur.T, Ct);
  return schur.Q * Zt * schur.Q.transpose();
}

Eigen::VectorXcd schur_eigenvalues(const RealSchur& schur) {
  const MatrixXd& T = schur.T;
  const Index n = T.rows();
  Eigen::VectorXcd ev(n);
  for (Index i = 0; i < n;) {
    if (i + 1 < n && T(i + 1, i) != 0.0) {
      const double a = T(i, i), b = T(i, i + 1), c = T(i + 1, i), d = T(i + 1, i + 1);
      const double mean = 0.5 * (a + d);
      const std::complex<double> disc = std::sqrt(std::complex<double>(0.25 * (a - d) * (a - d) + b * c));
      ev(i) = mean + disc;
      ev(i + 1) = mean - disc;
      i += 2;
    } else {
      ev(i) = T(i, i);
      i += 1;
    }
  }
  return ev;
}

double lyapunov_residual(const MatrixXd& X, const MatrixXd& Z, const MatrixXd& C) {
  MatrixXd R = -C;
  R.noalias() += X * Z;
  R.noalias() += Z * X.transpose();
  return R.cwiseAbs().maxCoeff();
}

}  // namespace ness
