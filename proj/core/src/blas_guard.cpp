#include "ness/blas_guard.hpp"

#include <unistd.h>

#include <Eigen/Dense>
#include <cmath>
#include <cstdio>
#include <cstdlib>

extern "C" void dgemm_(const char* ta, const char* tb, const int* m, const int* n, const int* k, const double* alpha,
                       const double* a, const int* lda, const double* b, const int* ldb, const double* beta, double* c,
                       const int* ldc);

namespace ness {

namespace {

constexpr const char* kFallbackCore = "Haswell";

}  // namespace

bool blas_self_test() {
  const int n = 256;
  Eigen::MatrixXd A(n, n), B(n, n), C = Eigen::MatrixXd::Zero(n, n);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) {
      A(i, j) = std::sin(0.37 * i + 1.3 * j);
      B(i, j) = std::cos(0.71 * i - 0.2 * j);
    }
  const double one = 1.0, zero = 0.0;
  dgemm_("N", "N", &n, &n, &n, &one, A.data(), &n, B.data(), &n, &zero, C.data(), &n);
  const Eigen::MatrixXd ref = A * B;
  return (C - ref).cwiseAbs().maxCoeff() <= 1e-10 * n;
}

void ensure_blas_kernel(char** argv) {
  if (blas_self_test()) return;
  if (std::getenv("OPENBLAS_CORETYPE") != nullptr) {
    std::fprintf(stderr, "warning: BLAS self test failed; using the slower built-in Schur path\n");
    return;
  }
  setenv("OPENBLAS_CORETYPE", kFallbackCore, 1);
  execv("/proc/self/exe", argv);
  std::fprintf(stderr, "warning: BLAS self test failed and re-exec was not possible\n");
}

}  // namespace ness
