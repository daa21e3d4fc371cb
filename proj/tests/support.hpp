#pragma once

#include <random>

#include "ness/dense_oracle.hpp"
#include "ness/model.hpp"

namespace ness::testing {

inline ModelSpec random_spec(std::mt19937_64& rng, int L) { return oracle::random_model(rng, L); }

template <typename A, typename B>
double max_abs_diff(const A& a, const B& b) {
  return (a - b).cwiseAbs().maxCoeff();
}

}  // namespace ness::testing
