#include "ness/gaussian_lindblad.hpp"

#include <cmath>
#include <filesystem>

#include "doctest.h"
#include "ness/dense_oracle.hpp"
#include "ness/error.hpp"
#include "ness/io.hpp"
#include "ness/observables.hpp"
#include "support.hpp"

using namespace ness;
using ness::testing::max_abs_diff;
using ness::testing::random_spec;

namespace {

// L = 1, no Hamiltonian: each chain is a single mode with gain 0.3 and loss
// 0.5 (spin down: gain 0.5, loss 0.3).
ModelSpec bare_mode() {
  ModelSpec s;
  s.L = 1;
  s.chain.h_up = 0.0;
  s.drive = {0.0, 1.0};
  s.rates = {0.3, 0.5, 0.0, 0.0};
  return s;
}

double occupation(const MajoranaCovariance& G, const BasisLayout& layout, int mode) {
  return G.normal_correlations(layout)(mode, mode).real();
}

}  // namespace

TEST_CASE("single-mode steady state") {
  const ModelSpec s = bare_mode();
  const BasisLayout layout(1);
  for (auto m : {LyapunovMethod::Kronecker, LyapunovMethod::BartelsStewart}) {
    const SteadyState ss = steady_state(assemble_dynamics(lab_frame_lindbladian(s, 0.0)), m);
    CHECK(occupation(ss.covariance, layout, 0) == doctest::Approx(0.375).epsilon(1e-12));
    CHECK(occupation(ss.covariance, layout, 1) == doctest::Approx(0.625).epsilon(1e-12));
    CHECK(ss.gap == doctest::Approx(1.6));
    CHECK(ss.residual < 1e-14);
  }
}

TEST_CASE("single-mode transient and rapidities") {
  const ModelSpec s = bare_mode();
  const BasisLayout layout(1);
  const DynamicalSystem dyn = assemble_dynamics(lab_frame_lindbladian(s, 0.0));

  const auto vac = MajoranaCovariance::vacuum(layout);
  CHECK(max_abs_diff(propagate(dyn, vac, 0.0, 1e-3).omega, vac.omega) == 0.0);
  const auto G1 = propagate(dyn, vac, 1.0, 1e-3);
  CHECK(std::abs(occupation(G1, layout, 0) - 0.375 * (1.0 - std::exp(-1.6))) < 1e-6);

  for (const auto& z : rapidity_spectrum(dyn)) {
    CHECK(z.real() == doctest::Approx(1.6).epsilon(1e-12));
    CHECK(std::abs(z.imag()) < 1e-12);
  }
  CHECK(relaxation_gap(dyn) == doctest::Approx(1.6));
}

TEST_CASE("unitary limit has a purely imaginary spectrum") {
  std::mt19937_64 rng(12);
  const ModelSpec s = random_spec(rng, 6);
  QuadraticLindbladian lind = rotating_frame_lindbladian(s);
  lind.bath.setZero();
  const DynamicalSystem dyn = assemble_dynamics(lind);
  CHECK(dyn.source.cwiseAbs().maxCoeff() == 0.0);
  for (const auto& z : rapidity_spectrum(dyn)) CHECK(std::abs(z.real()) <= 1e-12);
  CHECK_THROWS_AS(steady_state(dyn), Error);
}

TEST_CASE("drift and source structure") {
  std::mt19937_64 rng(13);
  const ModelSpec s = random_spec(rng, 5);
  const QuadraticLindbladian lind = rotating_frame_lindbladian(s);
  CHECK(max_abs_diff(lind.hamiltonian, RMatrix(-lind.hamiltonian.transpose())) == 0.0);
  const DynamicalSystem dyn = assemble_dynamics(lind);
  CHECK(max_abs_diff(dyn.source, RMatrix(-dyn.source.transpose())) < 1e-15);
  // The flow preserves antisymmetry.
  const RMatrix omega = MajoranaCovariance::vacuum(lind.layout).omega;
  const RMatrix d = dyn.derivative(omega);
  CHECK(max_abs_diff(d, RMatrix(-d.transpose())) < 1e-13);
}

TEST_CASE("steady state agrees with the dense oracle") {
  std::mt19937_64 rng(21);
  for (int L : {1, 2}) {
    const oracle::FockOperators ops(2 * L);
    for (int trial = 0; trial < 20; ++trial) {
      const ModelSpec s = random_spec(rng, L);
      const auto gauss = steady_state(assemble_dynamics(rotating_frame_lindbladian(s)));
      const auto dense = oracle::oracle_steady_state(s);
      CHECK(max_abs_diff(gauss.covariance.omega, oracle::covariance_of(dense.rho, ops).omega) < 1e-8);
    }
  }
}

TEST_CASE("undriven L = 16 chain relaxes to the Lyapunov solution") {
  ModelSpec s;
  s.L = 16;
  s.drive.F = 0.0;
  const BasisLayout layout(s.L);
  const DynamicalSystem dyn = assemble_dynamics(rotating_frame_lindbladian(s));
  const SteadyState ss = steady_state(dyn);
  CHECK(ss.gap > 0.0);

  const Eigen::VectorXd spec = ss.covariance.spectrum();
  CHECK(spec.cwiseAbs().maxCoeff() <= 1.0 + 1e-9);
  const CMatrix C = ss.covariance.normal_correlations(layout);
  for (int m = 0; m < layout.modes(); ++m) {
    CHECK(C(m, m).real() >= -1e-9);
    CHECK(C(m, m).real() <= 1.0 + 1e-9);
  }
  // Correlations decay away from the diagonal.
  CHECK(std::abs(C(0, 15)) < std::abs(C(0, 1)));

  const double t_final = 50.0 / ss.gap;
  const auto late = propagate(dyn, MajoranaCovariance::maximally_mixed(layout.majoranas()), t_final,
                              default_time_step(dyn));
  CHECK(max_abs_diff(late.omega, ss.covariance.omega) < 1e-6);
}

TEST_CASE("L = 8 transient converges monotonically in envelope") {
  ModelSpec s;
  s.L = 8;
  const BasisLayout layout(s.L);
  const DynamicalSystem dyn = assemble_dynamics(rotating_frame_lindbladian(s));
  const SteadyState ss = steady_state(dyn);
  const double dt = default_time_step(dyn);
  MajoranaCovariance G = MajoranaCovariance::vacuum(layout);
  const double chunk = 5.0 / ss.gap;
  double previous = INFINITY;
  for (int i = 0; i < 8; ++i) {
    G = propagate(dyn, G, chunk, dt);
    const double err = max_abs_diff(G.omega, ss.covariance.omega);
    CHECK(err < previous);
    previous = err;
  }
  G = propagate(dyn, G, 40.0 / ss.gap, dt);
  CHECK(max_abs_diff(G.omega, ss.covariance.omega) < 1e-8);
}

TEST_CASE("consistency of steady state and long propagation on random instances") {
  std::mt19937_64 rng(31);
  for (int trial = 0; trial < 5; ++trial) {
    const ModelSpec s = random_spec(rng, 3);
    const DynamicalSystem dyn = assemble_dynamics(rotating_frame_lindbladian(s));
    const SteadyState ss = steady_state(dyn);
    const auto late = propagate(dyn, MajoranaCovariance::maximally_mixed(12), 50.0 / ss.gap, default_time_step(dyn));
    CHECK(max_abs_diff(late.omega, ss.covariance.omega) < 1e-6);
  }
}

TEST_CASE("covariance stays physical under propagation") {
  ModelSpec s;
  s.L = 4;
  const BasisLayout layout(s.L);
  const DynamicalSystem dyn = assemble_dynamics(rotating_frame_lindbladian(s));
  MajoranaCovariance G = MajoranaCovariance::vacuum(layout);
  for (int i = 0; i < 10; ++i) {
    G = propagate(dyn, G, 0.5, default_time_step(dyn));
    const CMatrix g = G.G();
    CHECK(max_abs_diff(CMatrix(0.5 * (g + g.transpose())), CMatrix::Identity(g.rows(), g.cols())) < 1e-12);
    CHECK(G.spectrum().cwiseAbs().maxCoeff() <= 1.0 + 1e-9);
  }
}

TEST_CASE("relaxing model is detected") {
  // Site 2 decouples from site 1 and carries no bath: no unique steady state.
  ModelSpec s;
  s.L = 2;
  s.chain = {0.0, 0.0, 1.0};
  s.drive = {1.0, 2.0};
  s.rates = {0.3, 0.5, 0.0, 0.0};
  const DynamicalSystem dyn = assemble_dynamics(rotating_frame_lindbladian(s));
  try {
    steady_state(dyn);
    FAIL("expected NotRelaxing");
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::NotRelaxing);
  }
  CHECK(std::abs(relaxation_gap(dyn)) < 1e-12);
  CHECK_THROWS_AS(propagate(dyn, MajoranaCovariance::maximally_mixed(8), 1.0, -1.0), Error);
}

TEST_CASE("unstable step is reported") {
  ModelSpec s;
  s.L = 4;
  const DynamicalSystem dyn = assemble_dynamics(rotating_frame_lindbladian(s));
  try {
    propagate(dyn, MajoranaCovariance::maximally_mixed(16), 200.0, 50.0 * default_time_step(dyn));
    FAIL("expected StepTooLarge");
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::StepTooLarge);
  }
}

TEST_CASE("undriven periodic propagation is stationary") {
  ModelSpec s;
  s.L = 4;
  s.drive = {0.0, 4.0};
  const BasisLayout layout(s.L);
  const SteadyState ss = steady_state(assemble_dynamics(lab_frame_lindbladian(s, 0.0)));
  const auto traj = propagate_periodic(s, ss.covariance, 5, 64, 1e-10);
  CHECK(traj.periods_run == 1);
  for (const auto& G : traj.samples) CHECK(max_abs_diff(G.omega, ss.covariance.omega) < 1e-10);
  CHECK_THROWS_AS(propagate_periodic(s, ss.covariance, 5, 32), Error);
}

TEST_CASE("lab-frame period average matches the rotating-frame prediction") {
  ModelSpec s;
  s.L = 4;
  s.drive = {3.0, 4.0};
  const BasisLayout layout(s.L);
  const SteadyState ss = steady_state(assemble_dynamics(rotating_frame_lindbladian(s)));
  const LabCorrelations predicted = rotating_to_lab(ss.covariance, layout);
  const auto traj = propagate_periodic(s, MajoranaCovariance::maximally_mixed(layout.majoranas()), 20000, 256, 1e-11);
  const LabCorrelations measured = split_blocks(period_average(traj, layout), layout);
  CHECK(max_abs_diff(measured.up_up, predicted.up_up) < 1e-6);
  CHECK(max_abs_diff(measured.down_down, predicted.down_down) < 1e-6);
  CHECK(max_abs_diff(measured.up_down, predicted.up_down) < 1e-6);
}

TEST_CASE("lab-frame trajectory matches dense evolution at L = 2") {
  ModelSpec s;
  s.L = 2;
  s.drive = {2.0, 5.0};
  const BasisLayout layout(s.L);
  const auto traj = propagate_periodic(s, MajoranaCovariance::maximally_mixed(8), 20000, 256, 1e-12);
  const auto dense = oracle::oracle_time_average(s, 20000, 256, 1e-12);
  CHECK(max_abs_diff(period_average(traj, layout), dense.correlations) < 1e-8);
}

TEST_CASE("covariance dump round trip") {
  std::mt19937_64 rng(41);
  const ModelSpec s = random_spec(rng, 3);
  const SteadyState ss = steady_state(assemble_dynamics(rotating_frame_lindbladian(s)));
  const auto path = std::filesystem::temp_directory_path() / "ness_cov_roundtrip.bin";
  io::write_covariance(path, ss.covariance);
  CHECK(std::filesystem::file_size(path) == 16 + 8 * 12 * 12);
  const MajoranaCovariance back = io::read_covariance(path);
  CHECK(max_abs_diff(back.omega, ss.covariance.omega) == 0.0);
  std::filesystem::remove(path);
  CHECK_THROWS_AS(io::read_covariance(path), Error);
}
