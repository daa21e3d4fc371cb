#pragma once

#include <string>
#include <utility>
#include <vector>

#include "ness/gaussian_lindblad.hpp"
#include "ness/model.hpp"

namespace ness {

/// Lab-frame, period-averaged correlations C^{ss'}_{jk} = <c_{j s}^dag c_{k s'}>.
struct LabCorrelations {
  CMatrix up_up;
  CMatrix down_down;
  CMatrix up_down;

  int sites() const { return static_cast<int>(up_up.rows()); }
};

enum class Block { UpUp, DownDown, UpDown };

const CMatrix& select(const LabCorrelations& c, Block block);

/// Applies the period-averaging identities of the co-rotating frame to a
/// rotating-frame steady state.
LabCorrelations rotating_to_lab(const MajoranaCovariance& G, const BasisLayout& layout);

/// Splits a full 2L x 2L <c_m^dag c_n> matrix into spin blocks.
LabCorrelations split_blocks(const CMatrix& normal, const BasisLayout& layout);

/// chi = 4/L^2 sum over ordered pairs with |j - k| > L/2 of |C_jk|.
double chi_index(const CMatrix& C);
double chi_index(const LabCorrelations& C, Block block = Block::UpUp);

struct ProfilePoint {
  int r;
  double value;
};

using CorrelationProfile = std::vector<ProfilePoint>;

/// |C_jk| along j + k = L (1-based), r = j - k > 0.
CorrelationProfile antidiagonal_profile(const CMatrix& C);
CorrelationProfile antidiagonal_profile(const LabCorrelations& C, Block block = Block::UpUp);

struct PowerLawFit {
  double exponent;   // value ~ amplitude * r^-exponent
  double amplitude;
  double r_min;
  double r_max;
  double r_squared;
  int n_points;
  int n_dropped;  // non-positive values inside the window
};

/// [L/32, 3L/8]
std::pair<double, double> default_fit_window(int L);

/// Least squares on (log r, log value). Throws InsufficientPoints with fewer
/// than 8 usable points in the window.
PowerLawFit fit_power_law(const CorrelationProfile& profile, double r_min, double r_max);

/// Ordinary least squares y = a + b x with coefficient of determination.
struct LineFit {
  double intercept;
  double slope;
  double r_squared;
};
LineFit fit_line(const std::vector<double>& x, const std::vector<double>& y);

struct SizedProfile {
  int L;
  CorrelationProfile profile;
};

inline constexpr int kCollapseGrid = 64;

/// Mean over a 64-point log-spaced grid of r/L of the RMS spread of
/// log(|C| L^nu) across sizes, with piecewise-linear interpolation in log r/L.
double scaling_collapse(const std::vector<SizedProfile>& profiles, double nu);

struct CollapseCurve {
  std::vector<double> x;               // r / L
  std::vector<std::vector<double>> y;  // per grid point, one log(|C| L^nu) per size
};
CollapseCurve collapse_curves(const std::vector<SizedProfile>& profiles, double nu);

struct ScanPoint {
  double omega;
  double value;
};

/// Central differences inside, second-order one-sided stencils at the ends.
std::vector<ScanPoint> chi_derivative(const std::vector<ScanPoint>& scan);

/// CSV/JSON emitters for profiles and fits.
std::string profile_csv(const CorrelationProfile& profile);
std::string fit_report_json(const PowerLawFit& fit);
std::string collapse_csv(const CollapseCurve& curve, const std::vector<int>& sizes);

}  // namespace ness
