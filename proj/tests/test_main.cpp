#define DOCTEST_CONFIG_IMPLEMENT
#include "doctest.h"
#include "ness/blas_guard.hpp"

int main(int argc, char** argv) {
  ness::ensure_blas_kernel(argv);
  return doctest::Context(argc, argv).run();
}
