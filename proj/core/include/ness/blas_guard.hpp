#pragma once

namespace ness {

/// True when the linked BLAS multiplies a 256x256 pair correctly.
bool blas_self_test();

/// OpenBLAS builds with runtime kernel dispatch can select a kernel that
/// computes wrong products on some (virtualised) CPUs. Call first thing in
/// main: if the self test fails and OPENBLAS_CORETYPE is unset, the program
/// re-executes itself with a conservative kernel. Otherwise it returns and
/// real_schur falls back to a slower BLAS-free path when it detects damage.
void ensure_blas_kernel(char** argv);

}  // namespace ness
