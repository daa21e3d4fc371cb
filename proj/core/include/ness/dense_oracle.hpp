#pragma once

#include <random>
#include <vector>

#include "ness/gaussian_lindblad.hpp"
#include "ness/model.hpp"

// Brute-force Lindblad dynamics on the full Fock space of tiny chains. The
// many-body operators are written directly from the second-quantised model,
// independently of the BdG builders, so agreement with the Gaussian solver
// checks both the single-particle reduction and the covariance equations.
namespace ness::oracle {

inline constexpr int kMaxModes = 6;

enum class Frame { Lab, Rotating };

/// Jordan-Wigner creation/annihilation operators for N Dirac modes; mode m
/// occupies bit m of the basis index, strings run over modes k < m.
class FockOperators {
 public:
  explicit FockOperators(int modes);

  int modes() const { return modes_; }
  Eigen::Index dim() const { return Eigen::Index{1} << modes_; }
  const CMatrix& c(int m) const { return annihilators_[static_cast<std::size_t>(m)]; }
  CMatrix cdag(int m) const { return c(m).adjoint(); }
  CMatrix n(int m) const { return cdag(m) * c(m); }
  /// w_{2m} = c + c^dag, w_{2m+1} = i (c - c^dag)
  CMatrix majorana(int a) const;

 private:
  int modes_;
  std::vector<CMatrix> annihilators_;
};

struct DenseJump {
  double rate;
  CMatrix op;
};

CMatrix many_body_hamiltonian(const ModelSpec& spec, const FockOperators& ops, Frame frame, double time = 0.0);
std::vector<DenseJump> many_body_jumps(const ModelSpec& spec, const FockOperators& ops);

/// -i [H, rho] + sum Gamma (2 L rho L^dag - {L^dag L, rho}). Throws TooLarge
/// beyond kMaxModes Dirac modes.
CMatrix liouvillian_apply(const ModelSpec& spec, const CMatrix& rho, double time, Frame frame);

/// Column-major vectorised generator (dim^2 x dim^2).
CMatrix liouvillian_matrix(const ModelSpec& spec, Frame frame, double time = 0.0);

struct OracleSteadyState {
  CMatrix rho;
  double residual;  // max |L(rho)|
};

/// Null vector of the rotating-frame Liouvillian, normalised to unit trace.
/// Throws DegenerateNess when a second singular value falls below 1e-8.
OracleSteadyState oracle_steady_state(const ModelSpec& spec, Frame frame = Frame::Rotating);

/// G_ab = Tr[rho w_a w_b] packaged as a Majorana covariance.
MajoranaCovariance covariance_of(const CMatrix& rho, const FockOperators& ops);
/// Tr[rho c_m^dag c_n]
CMatrix normal_correlations_of(const CMatrix& rho, const FockOperators& ops);

struct OracleAverage {
  CMatrix correlations;            // period average of <c_m^dag c_n>
  std::vector<cplx> up_down_trace; // <c_{1u}^dag c_{1d}>(t) over the last period
  double periodicity_error;
  int periods_run;
};

/// RK4 propagation of the lab-frame master equation from the maximally mixed
/// state until stroboscopic snapshots agree to `tolerance`, then averages one
/// period. Limited to 4 Dirac modes.
OracleAverage oracle_time_average(const ModelSpec& spec, int n_periods, int samples, double tolerance = 1e-11);

/// Random model within the ranges used by the cross-checks: F in [0,5],
/// omega in [1,10], gamma in [0,1], h in [0,3], rates in [0,1] with at least
/// one above 0.1.
ModelSpec random_model(std::mt19937_64& rng, int L);

}  // namespace ness::oracle
