#pragma once

#include <Eigen/Dense>
#include <complex>
#include <string>
#include <vector>

namespace ness {

using cplx = std::complex<double>;
using RMatrix = Eigen::MatrixXd;
using CMatrix = Eigen::MatrixXcd;
using CVector = Eigen::VectorXcd;

enum class Spin { Up, Down };

/// Kitaev-chain parameters of the spin-up chain. The spin-down chain always
/// carries the negated values; it has no independent storage.
struct ChainParams {
  double t_up = 1.0;
  double gamma_up = 0.5;
  double h_up = 3.0;

  double t(Spin s) const { return s == Spin::Up ? t_up : -t_up; }
  double gamma(Spin s) const { return s == Spin::Up ? gamma_up : -gamma_up; }
  double h(Spin s) const { return s == Spin::Up ? h_up : -h_up; }
};

struct DriveParams {
  double F = 3.0;
  double omega = 4.0;

  double period() const;
};

/// Boundary gain/loss rates of the spin-up chain at sites 1 and L. The
/// spin-down rates follow from gain <-> loss exchange.
struct DissipationRates {
  double g1 = 0.3;
  double l1 = 0.5;
  double gL = 0.1;
  double lL = 0.5;

  double gain(int boundary_site, Spin s) const;  // boundary_site: 0 -> site 1, 1 -> site L
  double loss(int boundary_site, Spin s) const;
};

struct ModelSpec {
  int L = 64;
  ChainParams chain;
  DriveParams drive;
  DissipationRates rates;

  int modes() const { return 2 * L; }
  int majoranas() const { return 4 * L; }

  /// Throws Error(InvalidArgument) when an invariant is violated.
  void validate() const;
};

std::string to_json(const ModelSpec& spec);
/// Parses {L, t, gamma, h, F, omega, rates:{g1,l1,gL,lL}}. Missing keys keep
/// the values of `defaults`; unknown keys are rejected.
ModelSpec model_from_json(const std::string& text, const ModelSpec& defaults = {});

/// Dirac mode m = site + L*spin (spin-major), Majoranas (2m, 2m+1) with
/// w_{2m} = c_m + c_m^dag and w_{2m+1} = i (c_m - c_m^dag). Sites are 0-based.
class BasisLayout {
 public:
  explicit BasisLayout(int L);

  int sites() const { return L_; }
  int modes() const { return 2 * L_; }
  int majoranas() const { return 4 * L_; }

  int mode(int site, Spin s) const { return s == Spin::Up ? site : L_ + site; }
  int site_of(int mode) const { return mode % L_; }
  Spin spin_of(int mode) const { return mode < L_ ? Spin::Up : Spin::Down; }
  static int majorana_x(int mode) { return 2 * mode; }
  static int majorana_p(int mode) { return 2 * mode + 1; }

  /// Majorana coefficients l with c_m = sum_a l_a w_a (annihilation) or
  /// c_m^dag = sum_a l_a w_a (creation).
  CVector annihilator(int mode) const;
  CVector creator(int mode) const;

 private:
  int L_;
};

struct BandEnergies {
  double plus;
  double minus;
};

/// Bulk (periodic-chain) quasiparticle bands of the spin-up chain.
BandEnergies bulk_spectrum(const ChainParams& chain, double k);

struct Interval {
  double lo;
  double hi;
  bool contains(double x) const { return x >= lo && x <= hi; }
};

struct ResonanceWindows {
  Interval intra;  // [0, bandwidth]
  Interval inter;  // [2 E_min, 2 E_max]
  double e_min;
  double e_max;
};

ResonanceWindows resonance_windows(const ChainParams& chain);

/// Bogoliubov-de Gennes matrices act on the Nambu vector (c_1..c_N, c_1^dag..c_N^dag)
/// with H = 1/2 Psi^dag H_BdG Psi + const, H_BdG = [[A, B], [B^dag, -A^T]].
CMatrix build_static_hamiltonian(const ModelSpec& spec);
CMatrix build_effective_hamiltonian(const ModelSpec& spec);
CMatrix build_lab_frame_hamiltonian(const ModelSpec& spec, double time);

/// Nambu particle-hole conjugation P = [[0, I], [I, 0]]; H_BdG obeys P conj(H) P = -H.
CMatrix particle_hole_operator(int modes);

struct JumpOperator {
  int mode;
  bool gain;  // c^dag if true, c otherwise
  double rate;
  CVector coeffs;  // Majorana expansion
};

struct Bath {
  std::vector<JumpOperator> jumps;
  CMatrix M;  // sum_mu rate_mu l_mu l_mu^dag, 4L x 4L
};

/// Eight boundary channels (gain/loss on sites 1 and L of both chains).
/// Dissipator convention: D rho = sum_mu Gamma_mu (2 L rho L^dag - {L^dag L, rho}).
Bath build_dissipator(const ModelSpec& spec);

/// Real antisymmetric h with H = (i/4) sum_ab h_ab w_a w_b + const.
RMatrix bdg_to_majorana(const CMatrix& bdg);

}  // namespace ness
