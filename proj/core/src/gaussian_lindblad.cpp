#include "ness/gaussian_lindblad.hpp"

#include <algorithm>
#include <cmath>

#include "ness/error.hpp"

namespace ness {

namespace {

constexpr cplx I{0.0, 1.0};
constexpr double kRelaxTol = 1e-12;
constexpr double kResidualTol = 1e-9;
constexpr double kDivergence = 1e3;

RMatrix antisymmetrize(const RMatrix& m) { return 0.5 * (m - m.transpose()); }

void check_finite(const RMatrix& omega, const char* where) {
  if (!omega.allFinite() || omega.cwiseAbs().maxCoeff() > kDivergence)
    throw Error(ErrorKind::StepTooLarge, where, "covariance diverged; reduce dt");
}

RMatrix rk4_step(const DynamicalSystem& dyn, const RMatrix& omega, double dt) {
  const RMatrix k1 = dyn.derivative(omega);
  const RMatrix k2 = dyn.derivative(omega + 0.5 * dt * k1);
  const RMatrix k3 = dyn.derivative(omega + 0.5 * dt * k2);
  const RMatrix k4 = dyn.derivative(omega + dt * k3);
  return antisymmetrize(omega + (dt / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4));
}

// h(t) = h0 + cos(wt) hc + sin(wt) hs, exact because the drive enters linearly.
struct LabDrift {
  RMatrix static_part;
  RMatrix h0, hc, hs;
  RMatrix source;
  double omega;

  explicit LabDrift(const ModelSpec& spec) : omega(spec.drive.omega) {
    const Bath bath = build_dissipator(spec);
    ModelSpec undriven = spec;
    undriven.drive.F = 0.0;
    h0 = bdg_to_majorana(build_lab_frame_hamiltonian(undriven, 0.0));
    hc = bdg_to_majorana(build_lab_frame_hamiltonian(spec, 0.0)) - h0;
    hs = bdg_to_majorana(build_lab_frame_hamiltonian(spec, 0.25 * spec.drive.period())) - h0;
    static_part = 4.0 * bath.M.real();
    source = -8.0 * bath.M.imag();
  }

  DynamicalSystem at(double t) const {
    return {static_part - h0 - std::cos(omega * t) * hc - std::sin(omega * t) * hs, source};
  }
};

}  // namespace

QuadraticLindbladian make_lindbladian(const CMatrix& bdg, const Bath& bath, const BasisLayout& layout) {
  return {bdg_to_majorana(bdg), bath.M, layout};
}

QuadraticLindbladian rotating_frame_lindbladian(const ModelSpec& spec) {
  spec.validate();
  return make_lindbladian(build_effective_hamiltonian(spec), build_dissipator(spec), BasisLayout(spec.L));
}

QuadraticLindbladian lab_frame_lindbladian(const ModelSpec& spec, double time) {
  spec.validate();
  return make_lindbladian(build_lab_frame_hamiltonian(spec, time), build_dissipator(spec), BasisLayout(spec.L));
}

MajoranaCovariance MajoranaCovariance::maximally_mixed(int majoranas) {
  return {RMatrix::Zero(majoranas, majoranas)};
}

MajoranaCovariance MajoranaCovariance::vacuum(const BasisLayout& layout) {
  RMatrix omega = RMatrix::Zero(layout.majoranas(), layout.majoranas());
  for (int m = 0; m < layout.modes(); ++m) {
    // <w_x w_p> = i (2 n - 1)
    omega(BasisLayout::majorana_x(m), BasisLayout::majorana_p(m)) = -1.0;
    omega(BasisLayout::majorana_p(m), BasisLayout::majorana_x(m)) = 1.0;
  }
  return {omega};
}

CMatrix MajoranaCovariance::G() const {
  return CMatrix::Identity(omega.rows(), omega.cols()) + I * omega.cast<cplx>();
}

CMatrix MajoranaCovariance::normal_correlations(const BasisLayout& layout) const {
  const int N = layout.modes();
  const CMatrix g = G();
  CMatrix c(N, N);
  for (int m = 0; m < N; ++m) {
    const int xm = BasisLayout::majorana_x(m), pm = BasisLayout::majorana_p(m);
    for (int n = 0; n < N; ++n) {
      const int xn = BasisLayout::majorana_x(n), pn = BasisLayout::majorana_p(n);
      c(m, n) = 0.25 * (g(xm, xn) - I * g(xm, pn) + I * g(pm, xn) + g(pm, pn));
    }
  }
  return c;
}

CMatrix MajoranaCovariance::anomalous_correlations(const BasisLayout& layout) const {
  const int N = layout.modes();
  const CMatrix g = G();
  CMatrix c(N, N);
  for (int m = 0; m < N; ++m) {
    const int xm = BasisLayout::majorana_x(m), pm = BasisLayout::majorana_p(m);
    for (int n = 0; n < N; ++n) {
      const int xn = BasisLayout::majorana_x(n), pn = BasisLayout::majorana_p(n);
      c(m, n) = 0.25 * (g(xm, xn) - I * g(xm, pn) - I * g(pm, xn) - g(pm, pn));
    }
  }
  return c;
}

Eigen::VectorXd MajoranaCovariance::spectrum() const {
  const CMatrix iomega = I * omega.cast<cplx>();
  return Eigen::SelfAdjointEigenSolver<CMatrix>(iomega, Eigen::EigenvaluesOnly).eigenvalues();
}

RMatrix DynamicalSystem::derivative(const RMatrix& omega) const {
  RMatrix d = source;
  d.noalias() -= drift * omega;
  d.noalias() -= omega * drift.transpose();
  return d;
}

DynamicalSystem assemble_dynamics(const QuadraticLindbladian& lind) {
  // Heisenberg flow dw/dt = h w from the Hamiltonian; the adjoint dissipator
  // contributes -4 (Re M Omega + Omega Re M) - 8 Im M to dOmega/dt.
  return {-lind.hamiltonian + 4.0 * lind.bath.real(), -8.0 * lind.bath.imag()};
}

SteadyState steady_state(const DynamicalSystem& dyn, LyapunovMethod method) {
  const Eigen::Index n = dyn.drift.rows();
  if (method == LyapunovMethod::Auto)
    method = n <= kKroneckerMaxDim ? LyapunovMethod::Kronecker : LyapunovMethod::BartelsStewart;

  RMatrix omega;
  double min_re;
  if (method == LyapunovMethod::Kronecker) {
    const Eigen::VectorXcd ev = Eigen::EigenSolver<RMatrix>(dyn.drift, false).eigenvalues();
    min_re = ev.real().minCoeff();
    if (min_re <= kRelaxTol)
      throw Error(ErrorKind::NotRelaxing, "steady_state",
                  "drift eigenvalue with real part " + std::to_string(min_re) + " (no unique steady state)");
    omega = solve_continuous_lyapunov(dyn.drift, dyn.source, LyapunovMethod::Kronecker);
  } else {
    const RealSchur schur = real_schur(dyn.drift);
    min_re = schur_eigenvalues(schur).real().minCoeff();
    if (min_re <= kRelaxTol)
      throw Error(ErrorKind::NotRelaxing, "steady_state",
                  "drift eigenvalue with real part " + std::to_string(min_re) + " (no unique steady state)");
    omega = solve_continuous_lyapunov(schur, dyn.source);
  }
  omega = antisymmetrize(omega);
  const double residual = lyapunov_residual(dyn.drift, omega, dyn.source);
  const double scale = std::max(dyn.source.cwiseAbs().maxCoeff(), 1e-300);
  if (!(residual <= kResidualTol * scale))
    throw Error(ErrorKind::SolveFailed, "steady_state", "Lyapunov residual " + std::to_string(residual));
  return {{omega}, residual, 2.0 * min_re};
}

double default_time_step(const DynamicalSystem& dyn) {
  const double norm1 = dyn.drift.cwiseAbs().colwise().sum().maxCoeff();
  return norm1 > 0.0 ? 0.4 / norm1 : 0.1;
}

MajoranaCovariance propagate(const DynamicalSystem& dyn, const MajoranaCovariance& initial, double t_final,
                             double dt) {
  if (!(dt > 0.0) || !(t_final >= 0.0))
    throw Error(ErrorKind::InvalidArgument, "propagate", "need dt > 0 and t_final >= 0");
  RMatrix omega = initial.omega;
  double t = 0.0;
  while (t < t_final) {
    const double step = std::min(dt, t_final - t);
    omega = rk4_step(dyn, omega, step);
    check_finite(omega, "propagate");
    t = (t_final - t - step <= 1e-12 * t_final) ? t_final : t + step;
  }
  return {omega};
}

PeriodicTrajectory propagate_periodic(const ModelSpec& spec, const MajoranaCovariance& initial, int n_periods,
                                      int steps_per_period, double tolerance) {
  spec.validate();
  if (steps_per_period < 64)
    throw Error(ErrorKind::InvalidArgument, "propagate_periodic", "steps_per_period must be >= 64");
  if (n_periods < 1) throw Error(ErrorKind::InvalidArgument, "propagate_periodic", "n_periods must be >= 1");

  const LabDrift drift(spec);
  const double T = spec.drive.period();
  const double dt = T / steps_per_period;

  // Classic RK4 with stage times t, t + dt/2, t + dt.
  auto step = [&](const RMatrix& omega, double t) {
    const DynamicalSystem d0 = drift.at(t);
    const DynamicalSystem dh = drift.at(t + 0.5 * dt);
    const DynamicalSystem d1 = drift.at(t + dt);
    const RMatrix k1 = d0.derivative(omega);
    const RMatrix k2 = dh.derivative(omega + 0.5 * dt * k1);
    const RMatrix k3 = dh.derivative(omega + 0.5 * dt * k2);
    const RMatrix k4 = d1.derivative(omega + dt * k3);
    return antisymmetrize(omega + (dt / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4));
  };

  RMatrix omega = initial.omega;
  for (int period = 0; period < n_periods; ++period) {
    const RMatrix start = omega;
    PeriodicTrajectory traj{T, {}, 0.0, period + 1};
    traj.samples.reserve(static_cast<std::size_t>(steps_per_period));
    for (int k = 0; k < steps_per_period; ++k) {
      traj.samples.push_back({omega});
      // Integer step index keeps the drive phase exact over many periods.
      omega = step(omega, k * dt);
    }
    check_finite(omega, "propagate_periodic");
    traj.periodicity_error = (omega - start).cwiseAbs().maxCoeff();
    if (traj.periodicity_error <= tolerance) return traj;
  }
  throw Error(ErrorKind::NotConverged, "propagate_periodic",
              "no periodic regime within " + std::to_string(n_periods) + " periods");
}

CMatrix period_average(const PeriodicTrajectory& traj, const BasisLayout& layout) {
  CMatrix avg = CMatrix::Zero(layout.modes(), layout.modes());
  for (const auto& s : traj.samples) avg += s.normal_correlations(layout);
  return avg / static_cast<double>(traj.samples.size());
}

std::vector<std::complex<double>> rapidity_spectrum(const DynamicalSystem& dyn) {
  const Eigen::VectorXcd ev = schur_eigenvalues(real_schur(dyn.drift));
  std::vector<std::complex<double>> out(ev.data(), ev.data() + ev.size());
  for (auto& z : out) z *= 2.0;
  std::stable_sort(out.begin(), out.end(), [](const auto& a, const auto& b) {
    return a.real() < b.real() || (a.real() == b.real() && a.imag() < b.imag());
  });
  return out;
}

double relaxation_gap(const DynamicalSystem& dyn) { return rapidity_spectrum(dyn).front().real(); }

}  // namespace ness
