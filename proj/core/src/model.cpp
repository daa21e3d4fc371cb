#include "ness/model.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include "json.hpp"
#include "ness/error.hpp"

namespace ness {

namespace {

constexpr cplx I{0.0, 1.0};

void check(bool ok, const std::string& what) {
  if (!ok) throw Error(ErrorKind::InvalidArgument, "model", what);
}

// Holds the normal (A) and anomalous (B) parts of a quadratic Hamiltonian
//   H = sum_mn A_mn c_m^dag c_n + 1/2 sum_mn (B_mn c_m^dag c_n^dag + h.c.)
struct Quadratic {
  CMatrix A;
  CMatrix B;

  explicit Quadratic(int modes) : A(CMatrix::Zero(modes, modes)), B(CMatrix::Zero(modes, modes)) {}

  void hop(int m, int n, cplx v) {  // v c_m^dag c_n + h.c.
    A(m, n) += v;
    A(n, m) += std::conj(v);
  }
  void onsite(int m, double v) { A(m, m) += v; }
  void pair(int m, int n, cplx v) {  // v c_m^dag c_n^dag + h.c.
    B(m, n) += v;
    B(n, m) -= v;
  }

  CMatrix bdg() const {
    const auto N = A.rows();
    CMatrix H(2 * N, 2 * N);
    H.topLeftCorner(N, N) = A;
    H.topRightCorner(N, N) = B;
    H.bottomLeftCorner(N, N) = B.adjoint();
    H.bottomRightCorner(N, N) = -A.transpose();
    return H;
  }
};

void add_chains(const ModelSpec& spec, const BasisLayout& layout, Quadratic& q) {
  for (Spin s : {Spin::Up, Spin::Down}) {
    const double t = spec.chain.t(s);
    const double g = spec.chain.gamma(s);
    const double h = spec.chain.h(s);
    for (int j = 0; j + 1 < spec.L; ++j) {
      const int a = layout.mode(j, s);
      const int b = layout.mode(j + 1, s);
      q.hop(b, a, t);   // t c_{j+1}^dag c_j + h.c.
      q.pair(b, a, g);  // gamma c_{j+1}^dag c_j^dag + h.c.
    }
    for (int j = 0; j < spec.L; ++j) q.onsite(layout.mode(j, s), 2.0 * h);
  }
}

double positive_band(const ChainParams& c, double k) { return bulk_spectrum(c, k).plus; }

// Golden-section refinement of an extremum bracketed by [a, b].
double golden_extremum(const ChainParams& c, double a, double b, bool maximize) {
  const double invphi = (std::sqrt(5.0) - 1.0) / 2.0;
  auto f = [&](double k) { return maximize ? -positive_band(c, k) : positive_band(c, k); };
  double x1 = b - invphi * (b - a);
  double x2 = a + invphi * (b - a);
  double f1 = f(x1), f2 = f(x2);
  while (b - a > 1e-10) {
    if (f1 < f2) {
      b = x2;
      x2 = x1;
      f2 = f1;
      x1 = b - invphi * (b - a);
      f1 = f(x1);
    } else {
      a = x1;
      x1 = x2;
      f1 = f2;
      x2 = a + invphi * (b - a);
      f2 = f(x2);
    }
  }
  return positive_band(c, 0.5 * (a + b));
}

double band_extremum(const ChainParams& c, bool maximize) {
  constexpr int kGrid = 4096;
  const double pi = std::numbers::pi;
  const double dk = 2.0 * pi / kGrid;
  int best = 0;
  double best_val = positive_band(c, -pi);
  for (int i = 1; i <= kGrid; ++i) {
    const double v = positive_band(c, -pi + i * dk);
    if (maximize ? v > best_val : v < best_val) {
      best_val = v;
      best = i;
    }
  }
  const double k0 = -pi + best * dk;
  const double refined = golden_extremum(c, k0 - dk, k0 + dk, maximize);
  return maximize ? std::max(refined, best_val) : std::min(refined, best_val);
}

}  // namespace

double DriveParams::period() const { return 2.0 * std::numbers::pi / omega; }

double DissipationRates::gain(int boundary_site, Spin s) const {
  const double up_gain = boundary_site == 0 ? g1 : gL;
  const double up_loss = boundary_site == 0 ? l1 : lL;
  return s == Spin::Up ? up_gain : up_loss;
}

double DissipationRates::loss(int boundary_site, Spin s) const {
  const double up_gain = boundary_site == 0 ? g1 : gL;
  const double up_loss = boundary_site == 0 ? l1 : lL;
  return s == Spin::Up ? up_loss : up_gain;
}

void ModelSpec::validate() const {
  check(L >= 1, "L must be >= 1");
  check(std::isfinite(chain.t_up) && std::isfinite(chain.gamma_up) && std::isfinite(chain.h_up),
        "chain parameters must be finite");
  check(std::isfinite(drive.F) && drive.F >= 0.0, "F must be >= 0");
  check(std::isfinite(drive.omega) && drive.omega > 0.0,
        "omega must be > 0 (the rotating frame is undefined for a static drive)");
  for (double r : {rates.g1, rates.l1, rates.gL, rates.lL})
    check(std::isfinite(r) && r >= 0.0, "dissipation rates must be >= 0");
  check(rates.g1 + rates.l1 + rates.gL + rates.lL > 0.0,
        "at least one dissipation rate must be positive");
}

std::string to_json(const ModelSpec& spec) {
  nlohmann::ordered_json j;
  j["L"] = spec.L;
  j["t"] = spec.chain.t_up;
  j["gamma"] = spec.chain.gamma_up;
  j["h"] = spec.chain.h_up;
  j["F"] = spec.drive.F;
  j["omega"] = spec.drive.omega;
  j["rates"] = {{"g1", spec.rates.g1}, {"l1", spec.rates.l1}, {"gL", spec.rates.gL}, {"lL", spec.rates.lL}};
  return j.dump();
}

ModelSpec model_from_json(const std::string& text, const ModelSpec& defaults) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(text);
  } catch (const nlohmann::json::parse_error& e) {
    throw Error(ErrorKind::InvalidArgument, "model_from_json", e.what());
  }
  check(j.is_object(), "model document must be a JSON object");
  ModelSpec spec = defaults;
  auto number = [](const nlohmann::json& v, const std::string& key) {
    if (!v.is_number()) throw Error(ErrorKind::InvalidArgument, "model_from_json", key + " must be a number");
    return v.get<double>();
  };
  for (const auto& [key, value] : j.items()) {
    if (key == "L") {
      if (!value.is_number_integer())
        throw Error(ErrorKind::InvalidArgument, "model_from_json", "L must be an integer");
      spec.L = value.get<int>();
    } else if (key == "t") {
      spec.chain.t_up = number(value, key);
    } else if (key == "gamma") {
      spec.chain.gamma_up = number(value, key);
    } else if (key == "h") {
      spec.chain.h_up = number(value, key);
    } else if (key == "F") {
      spec.drive.F = number(value, key);
    } else if (key == "omega") {
      spec.drive.omega = number(value, key);
    } else if (key == "rates") {
      check(value.is_object(), "rates must be an object");
      for (const auto& [rk, rv] : value.items()) {
        if (rk == "g1") spec.rates.g1 = number(rv, rk);
        else if (rk == "l1") spec.rates.l1 = number(rv, rk);
        else if (rk == "gL") spec.rates.gL = number(rv, rk);
        else if (rk == "lL") spec.rates.lL = number(rv, rk);
        else throw Error(ErrorKind::InvalidArgument, "model_from_json", "unknown rate key '" + rk + "'");
      }
    } else {
      throw Error(ErrorKind::InvalidArgument, "model_from_json", "unknown key '" + key + "'");
    }
  }
  return spec;
}

BasisLayout::BasisLayout(int L) : L_(L) { check(L >= 1, "BasisLayout needs L >= 1"); }

CVector BasisLayout::annihilator(int mode) const {
  CVector l = CVector::Zero(majoranas());
  l(majorana_x(mode)) = 0.5;
  l(majorana_p(mode)) = -0.5 * I;
  return l;
}

CVector BasisLayout::creator(int mode) const {
  CVector l = CVector::Zero(majoranas());
  l(majorana_x(mode)) = 0.5;
  l(majorana_p(mode)) = 0.5 * I;
  return l;
}

BandEnergies bulk_spectrum(const ChainParams& c, double k) {
  const double a = c.h_up + c.t_up * std::cos(k);
  const double b = c.gamma_up * std::sin(k);
  const double e = 2.0 * std::sqrt(a * a + b * b);
  return {e, -e};
}

ResonanceWindows resonance_windows(const ChainParams& chain) {
  const double e_min = band_extremum(chain, false);
  const double e_max = band_extremum(chain, true);
  return {{0.0, e_max - e_min}, {2.0 * e_min, 2.0 * e_max}, e_min, e_max};
}

CMatrix build_static_hamiltonian(const ModelSpec& spec) {
  const BasisLayout layout(spec.L);
  Quadratic q(layout.modes());
  add_chains(spec, layout, q);
  return q.bdg();
}

CMatrix build_effective_hamiltonian(const ModelSpec& spec) {
  const BasisLayout layout(spec.L);
  Quadratic q(layout.modes());
  add_chains(spec, layout, q);
  const int up1 = layout.mode(0, Spin::Up);
  const int dn1 = layout.mode(0, Spin::Down);
  q.onsite(up1, spec.drive.F);
  q.onsite(dn1, spec.drive.F);
  // -(omega/2) K with K = -i sum_j (c_ju^dag c_jd^dag + c_ju c_jd); c_ju c_jd is
  // minus the conjugate of c_ju^dag c_jd^dag, so this is a pairing term of
  // amplitude i omega/2.
  const cplx amp = 0.5 * spec.drive.omega * I;
  for (int j = 0; j < spec.L; ++j) q.pair(layout.mode(j, Spin::Up), layout.mode(j, Spin::Down), amp);
  return q.bdg();
}

CMatrix build_lab_frame_hamiltonian(const ModelSpec& spec, double time) {
  const BasisLayout layout(spec.L);
  Quadratic q(layout.modes());
  add_chains(spec, layout, q);
  const int up1 = layout.mode(0, Spin::Up);
  const int dn1 = layout.mode(0, Spin::Down);
  const double c = spec.drive.F * std::cos(spec.drive.omega * time);
  const double s = spec.drive.F * std::sin(spec.drive.omega * time);
  // c_1d c_1d^dag = 1 - n_1d, so the cosine term is cos(wt) (n_1u + n_1d) + const.
  q.onsite(up1, c);
  q.onsite(dn1, c);
  q.pair(up1, dn1, s);
  return q.bdg();
}

CMatrix particle_hole_operator(int modes) {
  CMatrix P = CMatrix::Zero(2 * modes, 2 * modes);
  P.topRightCorner(modes, modes).setIdentity();
  P.bottomLeftCorner(modes, modes).setIdentity();
  return P;
}

Bath build_dissipator(const ModelSpec& spec) {
  spec.validate();
  const BasisLayout layout(spec.L);
  Bath bath;
  bath.M = CMatrix::Zero(layout.majoranas(), layout.majoranas());
  const int boundary_sites[2] = {0, spec.L - 1};
  for (int b = 0; b < 2; ++b) {
    for (Spin s : {Spin::Up, Spin::Down}) {
      const int m = layout.mode(boundary_sites[b], s);
      bath.jumps.push_back({m, true, spec.rates.gain(b, s), layout.creator(m)});
      bath.jumps.push_back({m, false, spec.rates.loss(b, s), layout.annihilator(m)});
    }
  }
  for (const auto& jump : bath.jumps) bath.M.noalias() += jump.rate * jump.coeffs * jump.coeffs.adjoint();
  return bath;
}

RMatrix bdg_to_majorana(const CMatrix& bdg) {
  const auto two_n = bdg.rows();
  const auto N = two_n / 2;
  CMatrix T = CMatrix::Zero(two_n, two_n);
  for (Eigen::Index m = 0; m < N; ++m) {
    T(m, 2 * m) = 0.5;
    T(m, 2 * m + 1) = -0.5 * I;
    T(N + m, 2 * m) = 0.5;
    T(N + m, 2 * m + 1) = 0.5 * I;
  }
  const CMatrix S = T.adjoint() * bdg * T;
  RMatrix h = 2.0 * S.imag();
  return 0.5 * (h - h.transpose());
}

}  // namespace ness
