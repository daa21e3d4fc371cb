#pragma once

#include <complex>
#include <vector>

#include "ness/lyapunov.hpp"
#include "ness/model.hpp"

namespace ness {

/// Single-particle data of a quadratic Lindbladian with linear jump operators.
/// `hamiltonian` is the real antisymmetric h of H = (i/4) sum h_ab w_a w_b.
struct QuadraticLindbladian {
  RMatrix hamiltonian;
  CMatrix bath;  // M = sum_mu Gamma_mu l_mu l_mu^dag
  BasisLayout layout;
};

QuadraticLindbladian make_lindbladian(const CMatrix& bdg, const Bath& bath, const BasisLayout& layout);
/// Time-independent generator in the co-rotating frame.
QuadraticLindbladian rotating_frame_lindbladian(const ModelSpec& spec);
QuadraticLindbladian lab_frame_lindbladian(const ModelSpec& spec, double time);

/// Majorana two-point function G_ab = <w_a w_b> = delta_ab + i Omega_ab.
struct MajoranaCovariance {
  RMatrix omega;  // real antisymmetric

  static MajoranaCovariance maximally_mixed(int majoranas);
  /// Fock vacuum of every Dirac mode.
  static MajoranaCovariance vacuum(const BasisLayout& layout);

  Eigen::Index size() const { return omega.rows(); }
  CMatrix G() const;
  /// <c_m^dag c_n> over all 2L Dirac modes.
  CMatrix normal_correlations(const BasisLayout& layout) const;
  /// <c_m c_n> over all 2L Dirac modes.
  CMatrix anomalous_correlations(const BasisLayout& layout) const;
  /// Eigenvalues of i Omega, all in [-1, 1] for a physical state.
  Eigen::VectorXd spectrum() const;
};

/// dOmega/dt = -(X Omega + Omega X^T) + Y
struct DynamicalSystem {
  RMatrix drift;   // X
  RMatrix source;  // Y, real antisymmetric

  RMatrix derivative(const RMatrix& omega) const;
};

DynamicalSystem assemble_dynamics(const QuadraticLindbladian& lind);

struct SteadyState {
  MajoranaCovariance covariance;
  double residual;  // max |X Omega + Omega X^T - Y|
  double gap;       // slowest rapidity, see rapidity_spectrum
};

/// Unique fixed point of the covariance flow. Throws NotRelaxing when an
/// eigenvalue of X has real part <= 1e-12 and SolveFailed when the residual
/// exceeds 1e-9 * max|Y|.
SteadyState steady_state(const DynamicalSystem& dyn, LyapunovMethod method = LyapunovMethod::Auto);

/// Largest stable RK4 step used by default: 0.4 / ||X||_1.
double default_time_step(const DynamicalSystem& dyn);

/// Fixed-step RK4; the last step is shortened to land on t_final.
MajoranaCovariance propagate(const DynamicalSystem& dyn, const MajoranaCovariance& initial, double t_final,
                             double dt);

struct PeriodicTrajectory {
  double period;
  std::vector<MajoranaCovariance> samples;  // at t0 + k T / steps, k = 0..steps-1
  double periodicity_error;                 // max |Omega(t0 + T) - Omega(t0)|
  int periods_run;
};

/// Integrates the lab-frame covariance flow with the explicitly time-dependent
/// drive until successive stroboscopic snapshots agree to `tolerance`, then
/// records one further period. Throws NotConverged after `n_periods`.
PeriodicTrajectory propagate_periodic(const ModelSpec& spec, const MajoranaCovariance& initial, int n_periods,
                                      int steps_per_period, double tolerance = 1e-6);

/// Period average of <c_m^dag c_n> over the recorded samples (2L x 2L).
CMatrix period_average(const PeriodicTrajectory& traj, const BasisLayout& layout);

/// Eigenvalues of X scaled by two (the decay rates of the elementary
/// covariance modes), sorted by real part.
std::vector<std::complex<double>> rapidity_spectrum(const DynamicalSystem& dyn);
double relaxation_gap(const DynamicalSystem& dyn);

}  // namespace ness
