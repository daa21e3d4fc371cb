#include "ness/observables.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <numeric>
#include <sstream>

#include "json.hpp"
#include "ness/error.hpp"

namespace ness {

namespace {

std::string fmt(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

// Derivative at `at` of the quadratic through three points.
double quadratic_slope(const double x[3], const double f[3], double at) {
  double d = 0.0;
  for (int i = 0; i < 3; ++i) {
    double denom = 1.0;
    for (int l = 0; l < 3; ++l)
      if (l != i) denom *= x[i] - x[l];
    double num = 0.0;
    for (int m = 0; m < 3; ++m) {
      if (m == i) continue;
      double prod = 1.0;
      for (int l = 0; l < 3; ++l)
        if (l != i && l != m) prod *= at - x[l];
      num += prod;
    }
    d += f[i] * num / denom;
  }
  return d;
}

struct LogCurve {
  std::vector<double> x;  // log(r/L)
  std::vector<double> y;  // log(|C| L^nu)

  double at(double q) const {
    auto it = std::lower_bound(x.begin(), x.end(), q);
    if (it == x.begin()) return y.front();
    if (it == x.end()) return y.back();
    const auto i = static_cast<std::size_t>(it - x.begin());
    const double w = (q - x[i - 1]) / (x[i] - x[i - 1]);
    return (1.0 - w) * y[i - 1] + w * y[i];
  }
};

std::vector<LogCurve> log_curves(const std::vector<SizedProfile>& profiles, double nu) {
  std::vector<LogCurve> curves;
  for (const auto& sp : profiles) {
    LogCurve c;
    for (const auto& p : sp.profile) {
      if (!(p.value > 0.0)) continue;
      c.x.push_back(std::log(static_cast<double>(p.r) / sp.L));
      c.y.push_back(std::log(p.value) + nu * std::log(static_cast<double>(sp.L)));
    }
    if (c.x.size() < 2)
      throw Error(ErrorKind::InsufficientPoints, "scaling_collapse",
                  "profile at L=" + std::to_string(sp.L) + " has fewer than 2 positive points");
    curves.push_back(std::move(c));
  }
  return curves;
}

std::vector<double> common_grid(const std::vector<LogCurve>& curves) {
  double lo = -INFINITY, hi = INFINITY;
  for (const auto& c : curves) {
    lo = std::max(lo, c.x.front());
    hi = std::min(hi, c.x.back());
  }
  if (!(hi > lo)) throw Error(ErrorKind::InsufficientPoints, "scaling_collapse", "profiles do not overlap in r/L");
  std::vector<double> grid(kCollapseGrid);
  for (int i = 0; i < kCollapseGrid; ++i) grid[static_cast<std::size_t>(i)] = lo + (hi - lo) * i / (kCollapseGrid - 1);
  return grid;
}

}  // namespace

const CMatrix& select(const LabCorrelations& c, Block block) {
  switch (block) {
    case Block::UpUp: return c.up_up;
    case Block::DownDown: return c.down_down;
    case Block::UpDown: return c.up_down;
  }
  return c.up_up;
}

LabCorrelations rotating_to_lab(const MajoranaCovariance& G, const BasisLayout& layout) {
  const CMatrix R = G.normal_correlations(layout);
  const int L = layout.sites();
  LabCorrelations out{CMatrix(L, L), CMatrix(L, L), CMatrix(L, L)};
  for (int j = 0; j < L; ++j) {
    const int uj = layout.mode(j, Spin::Up), dj = layout.mode(j, Spin::Down);
    for (int k = 0; k < L; ++k) {
      const int uk = layout.mode(k, Spin::Up), dk = layout.mode(k, Spin::Down);
      const double delta = j == k ? 1.0 : 0.0;
      out.up_up(j, k) = 0.5 * (R(uj, uk) - R(dk, dj) + delta);
      out.down_down(j, k) = 0.5 * (R(dj, dk) - R(uk, uj) + delta);
      out.up_down(j, k) = 0.5 * (R(uj, dk) + R(uk, dj));
    }
  }
  return out;
}

LabCorrelations split_blocks(const CMatrix& normal, const BasisLayout& layout) {
  const int L = layout.sites();
  return {normal.topLeftCorner(L, L), normal.bottomRightCorner(L, L), normal.topRightCorner(L, L)};
}

double chi_index(const CMatrix& C) {
  const auto L = C.rows();
  double sum = 0.0;
  for (Eigen::Index j = 0; j < L; ++j)
    for (Eigen::Index k = 0; k < L; ++k)
      if (2 * std::abs(j - k) > L) sum += std::abs(C(j, k));
  return 4.0 * sum / static_cast<double>(L * L);
}

double chi_index(const LabCorrelations& C, Block block) { return chi_index(select(C, block)); }

CorrelationProfile antidiagonal_profile(const CMatrix& C) {
  const int L = static_cast<int>(C.rows());
  CorrelationProfile out;
  // 1-based j = (L + r)/2, k = (L - r)/2 with k >= 1.
  for (int r = (L % 2 == 0) ? 2 : 1; r <= L - 2; r += 2) {
    const int j = (L + r) / 2, k = (L - r) / 2;
    out.push_back({r, std::abs(C(j - 1, k - 1))});
  }
  return out;
}

CorrelationProfile antidiagonal_profile(const LabCorrelations& C, Block block) {
  return antidiagonal_profile(select(C, block));
}

std::pair<double, double> default_fit_window(int L) { return {L / 32.0, 3.0 * L / 8.0}; }

LineFit fit_line(const std::vector<double>& x, const std::vector<double>& y) {
  const auto n = static_cast<double>(x.size());
  const double mx = std::accumulate(x.begin(), x.end(), 0.0) / n;
  const double my = std::accumulate(y.begin(), y.end(), 0.0) / n;
  double sxx = 0.0, sxy = 0.0, syy = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    sxx += (x[i] - mx) * (x[i] - mx);
    sxy += (x[i] - mx) * (y[i] - my);
    syy += (y[i] - my) * (y[i] - my);
  }
  const double slope = sxy / sxx;
  double ss_res = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double e = y[i] - (my + slope * (x[i] - mx));
    ss_res += e * e;
  }
  const double r2 = syy > 0.0 ? std::clamp(1.0 - ss_res / syy, 0.0, 1.0) : 1.0;
  return {my - slope * mx, slope, r2};
}

PowerLawFit fit_power_law(const CorrelationProfile& profile, double r_min, double r_max) {
  std::vector<double> x, y;
  int dropped = 0;
  for (const auto& p : profile) {
    if (p.r < r_min || p.r > r_max) continue;
    if (!(p.value > 0.0)) {
      ++dropped;
      continue;
    }
    x.push_back(std::log(static_cast<double>(p.r)));
    y.push_back(std::log(p.value));
  }
  if (x.size() < 8)
    throw Error(ErrorKind::InsufficientPoints, "fit_power_law",
                std::to_string(x.size()) + " usable points in [" + fmt(r_min) + ", " + fmt(r_max) + "], need 8");
  const LineFit line = fit_line(x, y);
  return {-line.slope, std::exp(line.intercept), r_min, r_max, line.r_squared, static_cast<int>(x.size()), dropped};
}

double scaling_collapse(const std::vector<SizedProfile>& profiles, double nu) {
  if (profiles.size() < 2)
    throw Error(ErrorKind::InvalidArgument, "scaling_collapse", "need at least two system sizes");
  const auto curves = log_curves(profiles, nu);
  const auto grid = common_grid(curves);
  double total = 0.0;
  for (double q : grid) {
    double mean = 0.0;
    for (const auto& c : curves) mean += c.at(q);
    mean /= static_cast<double>(curves.size());
    double var = 0.0;
    for (const auto& c : curves) var += (c.at(q) - mean) * (c.at(q) - mean);
    total += std::sqrt(var / static_cast<double>(curves.size()));
  }
  return total / static_cast<double>(grid.size());
}

CollapseCurve collapse_curves(const std::vector<SizedProfile>& profiles, double nu) {
  const auto curves = log_curves(profiles, nu);
  const auto grid = common_grid(curves);
  CollapseCurve out;
  for (double q : grid) {
    out.x.push_back(std::exp(q));
    std::vector<double> row;
    for (const auto& c : curves) row.push_back(c.at(q));
    out.y.push_back(std::move(row));
  }
  return out;
}

std::vector<ScanPoint> chi_derivative(const std::vector<ScanPoint>& scan) {
  const std::size_t n = scan.size();
  if (n < 3) throw Error(ErrorKind::InsufficientPoints, "chi_derivative", "need at least 3 scan points");
  for (std::size_t i = 1; i < n; ++i)
    if (!(scan[i].omega > scan[i - 1].omega))
      throw Error(ErrorKind::InvalidArgument, "chi_derivative", "scan must be strictly increasing in omega");
  std::vector<ScanPoint> out;
  out.reserve(n);
  for (std::size_t i = 0; i < n; ++i) {
    const std::size_t c = std::clamp<std::size_t>(i, 1, n - 2);
    const double x[3] = {scan[c - 1].omega, scan[c].omega, scan[c + 1].omega};
    const double f[3] = {scan[c - 1].value, scan[c].value, scan[c + 1].value};
    out.push_back({scan[i].omega, quadratic_slope(x, f, scan[i].omega)});
  }
  return out;
}

std::string profile_csv(const CorrelationProfile& profile) {
  std::ostringstream os;
  os << "r,value\n";
  for (const auto& p : profile) os << p.r << ',' << fmt(p.value) << '\n';
  return os.str();
}

std::string fit_report_json(const PowerLawFit& fit) {
  nlohmann::ordered_json j;
  j["exponent"] = fit.exponent;
  j["amplitude"] = fit.amplitude;
  j["window"] = {fit.r_min, fit.r_max};
  j["r_squared"] = fit.r_squared;
  j["n_points"] = fit.n_points;
  j["n_dropped"] = fit.n_dropped;
  return j.dump(2);
}

std::string collapse_csv(const CollapseCurve& curve, const std::vector<int>& sizes) {
  std::ostringstream os;
  os << 'x';
  for (int L : sizes) os << ",y_L" << L;
  os << '\n';
  for (std::size_t i = 0; i < curve.x.size(); ++i) {
    os << fmt(curve.x[i]);
    for (double v : curve.y[i]) os << ',' << fmt(v);
    os << '\n';
  }
  return os.str();
}

}  // namespace ness
