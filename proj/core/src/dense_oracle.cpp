#include "ness/dense_oracle.hpp"

#include <algorithm>
#include <bit>
#include <cmath>

#include "ness/error.hpp"

namespace ness::oracle {

namespace {

constexpr cplx I{0.0, 1.0};

void require_modes(int modes, int limit, const char* where) {
  if (modes > limit)
    throw Error(ErrorKind::TooLarge, where,
                std::to_string(modes) + " Dirac modes exceeds the dense limit of " + std::to_string(limit));
}

CMatrix kron(const CMatrix& a, const CMatrix& b) {
  CMatrix out(a.rows() * b.rows(), a.cols() * b.cols());
  for (Eigen::Index i = 0; i < a.rows(); ++i)
    for (Eigen::Index j = 0; j < a.cols(); ++j) out.block(i * b.rows(), j * b.cols(), b.rows(), b.cols()) = a(i, j) * b;
  return out;
}

CMatrix commutator_rhs(const CMatrix& H, const std::vector<DenseJump>& jumps, const CMatrix& rho) {
  CMatrix out = -I * (H * rho - rho * H);
  for (const auto& j : jumps) {
    if (j.rate == 0.0) continue;
    const CMatrix Ld = j.op.adjoint();
    const CMatrix LdL = Ld * j.op;
    out += j.rate * (2.0 * j.op * rho * Ld - LdL * rho - rho * LdL);
  }
  return out;
}

}  // namespace

FockOperators::FockOperators(int modes) : modes_(modes) {
  if (modes < 1) throw Error(ErrorKind::InvalidArgument, "FockOperators", "need at least one mode");
  require_modes(modes, kMaxModes, "FockOperators");
  const Eigen::Index d = dim();
  for (int m = 0; m < modes; ++m) {
    CMatrix c = CMatrix::Zero(d, d);
    for (Eigen::Index s = 0; s < d; ++s) {
      if (!((s >> m) & 1)) continue;
      const auto below = static_cast<unsigned>(s & ((Eigen::Index{1} << m) - 1));
      const double sign = (std::popcount(below) % 2) ? -1.0 : 1.0;
      c(s & ~(Eigen::Index{1} << m), s) = sign;
    }
    annihilators_.push_back(std::move(c));
  }
}

CMatrix FockOperators::majorana(int a) const {
  const CMatrix& cm = c(a / 2);
  return (a % 2 == 0) ? CMatrix(cm + cm.adjoint()) : CMatrix(I * (cm - cm.adjoint()));
}

CMatrix many_body_hamiltonian(const ModelSpec& spec, const FockOperators& ops, Frame frame, double time) {
  const int L = spec.L;
  const auto up = [&](int j) { return j; };
  const auto dn = [&](int j) { return L + j; };
  const Eigen::Index d = ops.dim();
  const CMatrix id = CMatrix::Identity(d, d);
  CMatrix H = CMatrix::Zero(d, d);

  for (Spin s : {Spin::Up, Spin::Down}) {
    const double t = spec.chain.t(s), g = spec.chain.gamma(s), h = spec.chain.h(s);
    const auto mode = [&](int j) { return s == Spin::Up ? up(j) : dn(j); };
    for (int j = 0; j + 1 < L; ++j) {
      const CMatrix hop = t * ops.cdag(mode(j + 1)) * ops.c(mode(j));
      const CMatrix pair = g * ops.cdag(mode(j + 1)) * ops.cdag(mode(j));
      H += hop + hop.adjoint() + pair + pair.adjoint();
    }
    for (int j = 0; j < L; ++j) H += h * (2.0 * ops.n(mode(j)) - id);
  }

  const double F = spec.drive.F, w = spec.drive.omega;
  if (frame == Frame::Lab) {
    const CMatrix diag = ops.n(up(0)) - ops.c(dn(0)) * ops.cdag(dn(0));
    const CMatrix pair = ops.cdag(up(0)) * ops.cdag(dn(0)) + ops.c(dn(0)) * ops.c(up(0));
    H += F * (std::cos(w * time) * diag + std::sin(w * time) * pair);
  } else {
    H += F * (ops.n(up(0)) + ops.n(dn(0)));
    CMatrix K = CMatrix::Zero(d, d);
    for (int j = 0; j < L; ++j) K += -I * (ops.cdag(up(j)) * ops.cdag(dn(j)) + ops.c(up(j)) * ops.c(dn(j)));
    H -= 0.5 * w * K;
  }
  return H;
}

std::vector<DenseJump> many_body_jumps(const ModelSpec& spec, const FockOperators& ops) {
  std::vector<DenseJump> jumps;
  const int sites[2] = {0, spec.L - 1};
  for (int b = 0; b < 2; ++b) {
    for (Spin s : {Spin::Up, Spin::Down}) {
      const int m = s == Spin::Up ? sites[b] : spec.L + sites[b];
      jumps.push_back({spec.rates.gain(b, s), ops.cdag(m)});
      jumps.push_back({spec.rates.loss(b, s), ops.c(m)});
    }
  }
  return jumps;
}

CMatrix liouvillian_apply(const ModelSpec& spec, const CMatrix& rho, double time, Frame frame) {
  require_modes(spec.modes(), kMaxModes, "liouvillian_apply");
  const FockOperators ops(spec.modes());
  return commutator_rhs(many_body_hamiltonian(spec, ops, frame, time), many_body_jumps(spec, ops), rho);
}

CMatrix liouvillian_matrix(const ModelSpec& spec, Frame frame, double time) {
  require_modes(spec.modes(), kMaxModes, "liouvillian_matrix");
  const FockOperators ops(spec.modes());
  const CMatrix H = many_body_hamiltonian(spec, ops, frame, time);
  const Eigen::Index d = ops.dim();
  const CMatrix id = CMatrix::Identity(d, d);
  // vec(A rho B) = (B^T kron A) vec(rho)
  CMatrix L = -I * kron(id, H) + I * kron(H.transpose(), id);
  for (const auto& j : many_body_jumps(spec, ops)) {
    if (j.rate == 0.0) continue;
    const CMatrix LdL = j.op.adjoint() * j.op;
    L += j.rate * (2.0 * kron(j.op.conjugate(), j.op) - kron(id, LdL) - kron(LdL.transpose(), id));
  }
  return L;
}

OracleSteadyState oracle_steady_state(const ModelSpec& spec, Frame frame) {
  spec.validate();
  if (frame != Frame::Rotating)
    throw Error(ErrorKind::InvalidArgument, "oracle_steady_state",
                "the lab-frame generator is time dependent; use oracle_time_average");
  const CMatrix L = liouvillian_matrix(spec, frame);
  const Eigen::Index d = Eigen::Index{1} << spec.modes();

  Eigen::BDCSVD<CMatrix> svd(L, Eigen::ComputeFullV);
  const Eigen::VectorXd& sv = svd.singularValues();  // descending
  const Eigen::Index n = sv.size();
  if (n >= 2 && sv(n - 2) < 1e-8)
    throw Error(ErrorKind::DegenerateNess, "oracle_steady_state", "Liouvillian null space has dimension > 1");

  const CVector v = svd.matrixV().col(n - 1);
  CMatrix rho = Eigen::Map<const CMatrix>(v.data(), d, d);
  rho /= rho.trace();
  rho = 0.5 * (rho + rho.adjoint());
  const CVector image = L * Eigen::Map<const CVector>(rho.data(), d * d);
  return {rho, image.cwiseAbs().maxCoeff()};
}

MajoranaCovariance covariance_of(const CMatrix& rho, const FockOperators& ops) {
  const int n = 2 * ops.modes();
  std::vector<CMatrix> w;
  for (int a = 0; a < n; ++a) w.push_back(ops.majorana(a));
  RMatrix omega = RMatrix::Zero(n, n);
  for (int a = 0; a < n; ++a)
    for (int b = 0; b < n; ++b)
      if (a != b) omega(a, b) = (rho * w[static_cast<std::size_t>(a)] * w[static_cast<std::size_t>(b)]).trace().imag();
  return {omega};
}

CMatrix normal_correlations_of(const CMatrix& rho, const FockOperators& ops) {
  const int N = ops.modes();
  CMatrix c(N, N);
  for (int m = 0; m < N; ++m)
    for (int n = 0; n < N; ++n) c(m, n) = (rho * ops.cdag(m) * ops.c(n)).trace();
  return c;
}

OracleAverage oracle_time_average(const ModelSpec& spec, int n_periods, int samples, double tolerance) {
  spec.validate();
  require_modes(spec.modes(), 4, "oracle_time_average");
  if (samples < 16 || n_periods < 1)
    throw Error(ErrorKind::InvalidArgument, "oracle_time_average", "need samples >= 16 and n_periods >= 1");

  const FockOperators ops(spec.modes());
  const auto jumps = many_body_jumps(spec, ops);
  const double T = spec.drive.period();
  const double dt = T / samples;
  const Eigen::Index d = ops.dim();
  // H(t) = H(0)|_{F=0} + cos(wt) Hc + sin(wt) Hs exactly.
  ModelSpec undriven = spec;
  undriven.drive.F = 0.0;
  const CMatrix h0 = many_body_hamiltonian(undriven, ops, Frame::Lab, 0.0);
  const CMatrix hc = many_body_hamiltonian(spec, ops, Frame::Lab, 0.0) - h0;
  const CMatrix hs = many_body_hamiltonian(spec, ops, Frame::Lab, 0.25 * T) - h0;
  const double w = spec.drive.omega;
  auto rhs = [&](const CMatrix& rho, double t) {
    return commutator_rhs(h0 + std::cos(w * t) * hc + std::sin(w * t) * hs, jumps, rho);
  };

  CMatrix rho = CMatrix::Identity(d, d) / static_cast<double>(d);
  const CMatrix probe = ops.cdag(0) * ops.c(spec.L);  // c_{1u}^dag c_{1d}
  for (int period = 0; period < n_periods; ++period) {
    const CMatrix start = rho;
    OracleAverage avg{CMatrix::Zero(ops.modes(), ops.modes()), {}, 0.0, period + 1};
    for (int k = 0; k < samples; ++k) {
      const double t = k * dt;
      avg.correlations += normal_correlations_of(rho, ops);
      avg.up_down_trace.push_back((rho * probe).trace());
      const CMatrix k1 = rhs(rho, t);
      const CMatrix k2 = rhs(rho + 0.5 * dt * k1, t + 0.5 * dt);
      const CMatrix k3 = rhs(rho + 0.5 * dt * k2, t + 0.5 * dt);
      const CMatrix k4 = rhs(rho + dt * k3, t + dt);
      rho += (dt / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
      rho = 0.5 * (rho + rho.adjoint());
    }
    avg.correlations /= static_cast<double>(samples);
    avg.periodicity_error = (rho - start).cwiseAbs().maxCoeff();
    if (avg.periodicity_error <= tolerance) return avg;
  }
  throw Error(ErrorKind::NotConverged, "oracle_time_average",
              "no periodic regime within " + std::to_string(n_periods) + " periods");
}

ModelSpec random_model(std::mt19937_64& rng, int L) {
  std::uniform_real_distribution<double> u(0.0, 1.0);
  ModelSpec s;
  s.L = L;
  s.chain.gamma_up = u(rng);
  s.chain.h_up = 3.0 * u(rng);
  s.drive.F = 5.0 * u(rng);
  s.drive.omega = 1.0 + 9.0 * u(rng);
  do {
    s.rates = {u(rng), u(rng), u(rng), u(rng)};
  } while (std::max({s.rates.g1, s.rates.l1, s.rates.gL, s.rates.lL}) <= 0.1);
  return s;
}

}  // namespace ness::oracle
