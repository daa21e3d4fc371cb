// ness: command-line front end of the NESS engine. Every command writes its
// data as CSV plus a gnuplot script under --out and prints a one-line summary.
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <functional>
#include <iostream>
#include <numbers>
#include <optional>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"
#include "ness/blas_guard.hpp"
#include "ness/dense_oracle.hpp"
#include "ness/error.hpp"
#include "ness/io.hpp"
#include "ness/model.hpp"
#include "ness/observables.hpp"
#include "ness/sweep.hpp"

namespace fs = std::filesystem;
using nlohmann::json;
using namespace ness;

namespace {

enum ExitCode { kOk = 0, kUsage = 1, kNumerical = 2, kIo = 3 };

// Grid resolutions per preset. "ci" matches the defaults.
struct Preset {
  std::string name = "ci";
  int L = 128;
  int omega_count = 61;
  int F_count = 31;
  int scan_L = 256;
};

Preset preset_named(const std::string& name) {
  Preset p;
  p.name = name;
  if (name == "paper") {
    p.L = 512;
    p.omega_count = 91;
    p.F_count = 31;
    p.scan_L = 512;
  } else if (name != "ci") {
    throw Error(ErrorKind::InvalidArgument, "cli", "unknown preset '" + name + "' (expected ci or paper)");
  }
  return p;
}

struct ModelFlags {
  std::optional<int> L;
  std::optional<double> t, gamma, h, F, omega, g1, l1, gL, lL;
};

struct Common {
  ModelFlags flags;
  std::string out = "ness_out";
  std::optional<int> jobs;
  std::optional<std::string> preset;
  std::optional<std::string> config;
  std::uint64_t seed = 2024;
};

void add_model_flags(CLI::App* app, Common& c) {
  auto& f = c.flags;
  app->add_option("--L", f.L, "Sites per chain")->check(CLI::PositiveNumber);
  app->add_option("--t", f.t, "Hopping (spin-up chain)");
  app->add_option("--gamma", f.gamma, "Pairing (spin-up chain)");
  app->add_option("--h", f.h, "On-site energy (spin-up chain)");
  app->add_option("--F", f.F, "Drive amplitude");
  app->add_option("--omega", f.omega, "Drive frequency");
  app->add_option("--g1", f.g1, "Gain at site 1");
  app->add_option("--l1", f.l1, "Loss at site 1");
  app->add_option("--gL", f.gL, "Gain at site L");
  app->add_option("--lL", f.lL, "Loss at site L");
  app->add_option("--out", c.out, "Output directory")->capture_default_str();
  app->add_option("--jobs", c.jobs, "Concurrent sweep points (env NESS_JOBS)")->check(CLI::PositiveNumber);
  app->add_option("--preset", c.preset, "Grid/size preset")->check(CLI::IsMember({"ci", "paper"}));
  app->add_option("--config", c.config, "Model JSON; flags override it")->check(CLI::ExistingFile);
  app->add_option("--seed", c.seed, "Seed for randomized checks")->capture_default_str();
}

struct Context {
  ModelSpec spec;
  Preset preset;
  fs::path out;
  int jobs = 1;
  std::uint64_t seed = 0;
  json config;  // effective configuration, echoed into manifests
};

// Precedence: flags > config file > preset > built-in defaults.
Context resolve(const Common& c, const std::string& command, int preset_L) {
  Context ctx;
  ctx.preset = preset_named(c.preset.value_or("ci"));
  ctx.spec.L = c.preset ? preset_L : ModelSpec{}.L;
  if (c.config) ctx.spec = model_from_json(io::read_text(*c.config), ctx.spec);
  const auto& f = c.flags;
  if (f.L) ctx.spec.L = *f.L;
  if (f.t) ctx.spec.chain.t_up = *f.t;
  if (f.gamma) ctx.spec.chain.gamma_up = *f.gamma;
  if (f.h) ctx.spec.chain.h_up = *f.h;
  if (f.F) ctx.spec.drive.F = *f.F;
  if (f.omega) ctx.spec.drive.omega = *f.omega;
  if (f.g1) ctx.spec.rates.g1 = *f.g1;
  if (f.l1) ctx.spec.rates.l1 = *f.l1;
  if (f.gL) ctx.spec.rates.gL = *f.gL;
  if (f.lL) ctx.spec.rates.lL = *f.lL;
  ctx.spec.validate();

  ctx.jobs = 1;
  if (c.jobs) {
    ctx.jobs = *c.jobs;
  } else if (const char* env = std::getenv("NESS_JOBS")) {
    try {
      ctx.jobs = std::max(1, std::stoi(env));
    } catch (const std::exception&) {
      throw Error(ErrorKind::InvalidArgument, "cli", std::string("NESS_JOBS is not an integer: ") + env);
    }
  }
  ctx.out = c.out;
  ctx.seed = c.seed;
  ctx.config = {{"command", command},
                {"model", json::parse(to_json(ctx.spec))},
                {"preset", ctx.preset.name},
                {"jobs", ctx.jobs},
                {"seed", ctx.seed},
                {"out", ctx.out.string()}};
  if (c.config) ctx.config["config_file"] = *c.config;
  return ctx;
}

std::string fmt(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.6g", v);
  return buf;
}

// Writes a file under the output directory and returns its path.
fs::path emit(const Context& ctx, const std::string& name, const std::string& text) {
  const fs::path p = ctx.out / name;
  io::write_text(p, text);
  return p;
}

void write_manifest(const Context& ctx, const json& extra, const std::vector<fs::path>& files) {
  json m = {{"config", ctx.config}};
  m.update(extra);
  json list = json::array();
  for (const auto& f : files) list.push_back(fs::relative(f, ctx.out).string());
  m["files"] = list;
  io::write_text(ctx.out / "manifest.json", m.dump(2) + "\n");
}

std::string join_paths(const std::vector<fs::path>& files) {
  std::string s;
  for (const auto& f : files) s += (s.empty() ? "" : " ") + f.string();
  return s;
}

std::string title(const ModelSpec& s) {
  return "L=" + std::to_string(s.L) + ", gamma=" + fmt(s.chain.gamma_up) + ", h=" + fmt(s.chain.h_up) +
         ", F=" + fmt(s.drive.F) + ", omega=" + fmt(s.drive.omega);
}

std::string gp_header(const std::string& png) {
  return "set datafile separator ','\nset terminal pngcairo size 900,650\nset output '" + png + "'\n";
}

std::string profile_gp(const std::string& csv, const std::string& png, const ModelSpec& s) {
  return gp_header(png) + "set logscale xy\nset xlabel 'r = j - k (j + k = L)'\nset ylabel '|C(r)|'\n" +
         "set title '" + title(s) + "'\n" + "plot '" + csv + "' using 1:2 skip 1 with linespoints title '|C(r)|', " +
         "1/x**2 dashed title 'r^{-2}'\n";
}

// --- commands -----------------------------------------------------------------

int cmd_spectrum(const Context& ctx, int points) {
  std::string csv = "k,e_plus,e_minus\n";
  for (int i = 0; i < points; ++i) {
    const double k = -std::numbers::pi + 2.0 * std::numbers::pi * i / (points - 1);
    const auto e = bulk_spectrum(ctx.spec.chain, k);
    csv += io::format_double(k) + "," + io::format_double(e.plus) + "," + io::format_double(e.minus) + "\n";
  }
  const auto w = resonance_windows(ctx.spec.chain);
  const fs::path data = emit(ctx, "spectrum.csv", csv);
  const fs::path gp = emit(ctx, "spectrum.gp",
                           gp_header("spectrum.png") + "set xlabel 'k'\nset ylabel 'E(k)'\nset title '" +
                               title(ctx.spec) + "'\nplot 'spectrum.csv' using 1:2 skip 1 with lines title 'E_+', " +
                               "'' using 1:3 skip 1 with lines title 'E_-'\n");
  write_manifest(ctx, {{"e_min", w.e_min}, {"e_max", w.e_max}}, {data, gp});
  std::cout << "band [" << fmt(w.e_min) << "," << fmt(w.e_max) << "] " << join_paths({data, gp}) << "\n";
  return kOk;
}

int cmd_windows(const Context& ctx) {
  const auto w = resonance_windows(ctx.spec.chain);
  std::cout << "intra [" << fmt(w.intra.lo) << "," << fmt(w.intra.hi) << "] inter [" << fmt(w.inter.lo) << ","
            << fmt(w.inter.hi) << "]\n";
  return kOk;
}

std::string matrix_csv(const LabCorrelations& lab) {
  std::string s = "j,k,abs_uu,abs_dd,abs_ud,re_uu,im_uu,re_ud,im_ud\n";
  const int L = lab.sites();
  for (int j = 0; j < L; ++j)
    for (int k = 0; k < L; ++k) {
      const cplx uu = lab.up_up(j, k), ud = lab.up_down(j, k);
      s += std::to_string(j + 1) + "," + std::to_string(k + 1) + "," + io::format_double(std::abs(uu)) + "," +
           io::format_double(std::abs(lab.down_down(j, k))) + "," + io::format_double(std::abs(ud)) + "," +
           io::format_double(uu.real()) + "," + io::format_double(uu.imag()) + "," + io::format_double(ud.real()) +
           "," + io::format_double(ud.imag()) + "\n";
    }
  return s;
}

int cmd_ness(const Context& ctx) {
  const BasisLayout layout(ctx.spec.L);
  const DynamicalSystem dyn = assemble_dynamics(rotating_frame_lindbladian(ctx.spec));
  const SteadyState ss = steady_state(dyn);
  const LabCorrelations lab = rotating_to_lab(ss.covariance, layout);
  const double chi = chi_index(lab);
  io::write_covariance(ctx.out / "covariance.bin", ss.covariance);
  const fs::path cov = ctx.out / "covariance.bin";
  const fs::path data = emit(ctx, "correlations.csv", matrix_csv(lab));
  const fs::path gp = emit(ctx, "correlations.gp",
                           gp_header("correlations.png") +
                               "set size ratio -1\nset yrange [*:*] reverse\nset xlabel 'k'\nset ylabel 'j'\n"
                               "set cbrange [-16:0]\nset cblabel 'log10 |C_{jk}|'\nset title '" +
                               title(ctx.spec) +
                               "'\nplot 'correlations.csv' using 2:1:(log10($3 + 1e-300)) skip 1 with image "
                               "notitle\n");
  write_manifest(ctx, {{"chi", chi}, {"gap", ss.gap}, {"residual", ss.residual}}, {cov, data, gp});
  std::cout << "chi " << fmt(chi) << " gap " << fmt(ss.gap) << " residual " << fmt(ss.residual) << " "
            << join_paths({cov, data, gp}) << "\n";
  return kOk;
}

int cmd_chi(const Context& ctx) {
  const PointResult r = evaluate_point(ctx.spec);
  write_manifest(ctx, {{"chi", r.chi}, {"gap", r.gap}, {"residual", r.residual}}, {});
  std::cout << "chi " << io::format_double(r.chi) << " gap " << fmt(r.gap) << "\n";
  return kOk;
}

int cmd_profile(const Context& ctx, std::optional<double> r_min, std::optional<double> r_max, bool fit) {
  const PointResult r = evaluate_point(ctx.spec);
  const CorrelationProfile profile = antidiagonal_profile(r.lab);
  std::vector<fs::path> files{emit(ctx, "profile.csv", profile_csv(profile)),
                              emit(ctx, "profile.gp", profile_gp("profile.csv", "profile.png", ctx.spec))};
  json extra = {{"chi", r.chi}};
  std::string summary = "chi " + fmt(r.chi);
  if (fit) {
    const auto def = default_fit_window(ctx.spec.L);
    const PowerLawFit f = fit_power_law(profile, r_min.value_or(def.first), r_max.value_or(def.second));
    files.push_back(emit(ctx, "fit.json", fit_report_json(f)));
    extra["fit"] = json::parse(fit_report_json(f));
    summary = "exponent " + fmt(f.exponent) + " r_squared " + fmt(f.r_squared);
  }
  write_manifest(ctx, extra, files);
  std::cout << summary << " " << join_paths(files) << "\n";
  return kOk;
}

int cmd_collapse(const Context& ctx, const std::vector<int>& sizes, double nu, const std::vector<double>& nu_scan) {
  if (sizes.size() < 2) throw Error(ErrorKind::InvalidArgument, "cli", "collapse needs at least two sizes");
  std::vector<SizedProfile> profiles;
  std::vector<fs::path> files;
  std::string plot = "plot ";
  for (int L : sizes) {
    const ModelSpec s = with_axis(ctx.spec, Axis::L, L);
    profiles.push_back({L, antidiagonal_profile(evaluate_point(s).lab)});
    const std::string name = "profile_L" + std::to_string(L) + ".csv";
    files.push_back(emit(ctx, name, profile_csv(profiles.back().profile)));
    plot += std::string(plot.size() > 5 ? ", " : "") + "'" + name + "' using 1:2 skip 1 with lines title 'L=" +
            std::to_string(L) + "'";
  }
  files.push_back(emit(ctx, "profiles.gp",
                       gp_header("profiles.png") + "set logscale xy\nset xlabel 'r'\nset ylabel '|C(r)|'\n" + plot +
                           ", 1/x**2 dashed title 'r^{-2}'\n"));

  const CollapseCurve curve = collapse_curves(profiles, nu);
  files.push_back(emit(ctx, "collapse.csv", collapse_csv(curve, sizes)));
  std::string cplot = "plot ";
  for (std::size_t i = 0; i < sizes.size(); ++i)
    cplot += std::string(i ? ", " : "") + "'collapse.csv' using 1:" + std::to_string(i + 2) +
             " skip 1 with lines title 'L=" + std::to_string(sizes[i]) + "'";
  files.push_back(emit(ctx, "collapse.gp",
                       gp_header("collapse.png") + "set logscale x\nset xlabel 'r/L'\nset ylabel 'log(|C| L^{nu})'\n" +
                           "set title 'nu = " + fmt(nu) + "'\n" + cplot + "\n"));

  std::string scan = "nu,residual\n";
  double best_nu = nu, best = INFINITY;
  for (double v : nu_scan) {
    const double res = scaling_collapse(profiles, v);
    scan += io::format_double(v) + "," + io::format_double(res) + "\n";
    if (res < best) best = res, best_nu = v;
  }
  const double residual = scaling_collapse(profiles, nu);
  files.push_back(emit(ctx, "collapse_scan.csv", scan));
  write_manifest(ctx, {{"nu", nu}, {"residual", residual}, {"best_nu", best_nu}, {"sizes", sizes}}, files);
  std::cout << "residual " << fmt(residual) << " at nu " << fmt(nu) << ", best nu " << fmt(best_nu) << " "
            << join_paths(files) << "\n";
  return kOk;
}

SweepResult run(const Context& ctx, SweepPlan plan) {
  plan.output_dir = ctx.out;
  plan.config_json = ctx.config.dump();
  plan.validate();
  return run_sweep(plan, ctx.jobs);
}

std::size_t count_failed(const SweepResult& r) {
  std::size_t n = 0;
  for (const auto& row : r.rows) n += row.status != "ok";
  return n;
}

int sweep_exit(const SweepResult& r) { return count_failed(r) == r.rows.size() ? kNumerical : kOk; }

struct Range {
  std::optional<double> lo, hi;
  std::optional<int> count;
};

std::vector<double> grid(const Range& r, double lo, double hi, int count) {
  return linspace(r.lo.value_or(lo), r.hi.value_or(hi), r.count.value_or(count));
}

int cmd_phase_diagram(const Context& ctx, const Range& F, const Range& omega) {
  SweepPlan plan;
  plan.base = ctx.spec;
  plan.axes = {{Axis::F, grid(F, 0.0, 6.0, ctx.preset.F_count)},
               {Axis::Omega, grid(omega, 0.3, 18.3, ctx.preset.omega_count)}};
  const SweepResult r = run(ctx, plan);
  const fs::path gp = emit(ctx, "phase_diagram.gp",
                           gp_header("phase_diagram.png") +
                               "set xlabel 'omega'\nset ylabel 'F'\nset cblabel 'log10 chi'\nset title '" +
                               title(ctx.spec) +
                               "'\nset view map\nsplot 'sweep.csv' using 2:1:(log10($3 + 1e-300)) skip 1 "
                               "with points pt 5 ps 1 palette notitle\n");
  double chi_max = 0.0;
  for (const auto& row : r.rows)
    if (row.status == "ok") chi_max = std::max(chi_max, row.chi);
  std::cout << "points " << r.rows.size() << " failed " << count_failed(r) << " max chi " << fmt(chi_max) << " "
            << join_paths({r.csv, r.manifest, gp}) << "\n";
  return sweep_exit(r);
}

int cmd_scan_omega(const Context& ctx, double center, int n_max, bool with_center, const Range& range) {
  SweepPlan plan;
  plan.base = ctx.spec;
  std::vector<double> omegas;
  if (range.lo || range.hi || range.count) {
    omegas = grid(range, 1.0, 18.0, 69);
  } else {
    for (double w : dyadic_detuning(center, n_max))
      if (with_center || w != center) omegas.push_back(w);
  }
  plan.axes = {{Axis::Omega, omegas}};
  plan.outputs.profile = true;
  plan.outputs.fit = true;
  const SweepResult r = run(ctx, plan);

  std::vector<ScanPoint> scan;
  for (const auto& row : r.rows)
    if (row.status == "ok") scan.push_back({row.coords[0], row.chi});
  std::vector<fs::path> files{r.csv, r.manifest};
  if (scan.size() >= 3) {
    std::string csv = "omega,dchi_domega\n";
    for (const auto& d : chi_derivative(scan)) csv += io::format_double(d.omega) + "," + io::format_double(d.value) + "\n";
    files.push_back(emit(ctx, "chi_derivative.csv", csv));
  }
  std::string plot = "plot ";
  for (std::size_t i = 0; i < r.rows.size(); ++i) {
    if (r.rows[i].status != "ok") continue;
    const double w = r.rows[i].coords[0];
    const std::string color = w < center ? "red" : (w > center ? "blue" : "black");
    plot += std::string(plot.size() > 5 ? ", " : "") + "'" + r.rows[i].profile_file +
            "' using 1:2 skip 1 with lines lc rgb '" + color + "' title 'omega=" + fmt(w) + "'";
  }
  files.push_back(emit(ctx, "profiles.gp",
                       gp_header("profiles.png") + "set logscale xy\nset key outside\nset xlabel 'r'\n" +
                           "set ylabel '|C(r)|'\nset title '" + title(ctx.spec) + "'\n" + plot + "\n"));
  files.push_back(emit(ctx, "chi.gp",
                       gp_header("chi.png") + "set multiplot layout 1,2\nset xlabel 'omega'\nset ylabel 'chi'\n" +
                           "plot 'sweep.csv' using 1:2 skip 1 with linespoints notitle\n" +
                           "set ylabel 'd chi / d omega'\n" +
                           "plot 'chi_derivative.csv' using 1:2 skip 1 with linespoints notitle\n" +
                           "unset multiplot\n"));
  std::cout << "points " << r.rows.size() << " failed " << count_failed(r) << " " << join_paths(files) << "\n";
  return sweep_exit(r);
}

int cmd_scan_gamma(const Context& ctx, const Range& range) {
  SweepPlan plan;
  plan.base = ctx.spec;
  plan.axes = {{Axis::Gamma, logspace(range.lo.value_or(0.02), range.hi.value_or(0.5), range.count.value_or(16))}};
  const SweepResult r = run(ctx, plan);
  std::vector<double> x, y;
  for (const auto& row : r.rows)
    if (row.status == "ok" && row.chi > 0.0) {
      x.push_back(std::log(row.coords[0]));
      y.push_back(std::log(row.chi));
    }
  std::vector<fs::path> files{r.csv, r.manifest};
  std::string summary = "insufficient points for a fit";
  if (x.size() >= 2) {
    const LineFit f = fit_line(x, y);
    json j = {{"slope", f.slope}, {"intercept", f.intercept}, {"r_squared", f.r_squared}, {"n_points", x.size()}};
    files.push_back(emit(ctx, "gamma_fit.json", j.dump(2) + "\n"));
    files.push_back(emit(ctx, "scan_gamma.gp",
                         gp_header("scan_gamma.png") + "set logscale xy\nset xlabel 'gamma'\nset ylabel 'chi'\n" +
                             "set title '" + title(ctx.spec) + "'\nplot 'sweep.csv' using 1:2 skip 1 with points " +
                             "pt 7 title 'chi', exp(" + io::format_double(f.intercept) + ")*x**" +
                             io::format_double(f.slope) + " title 'slope " + fmt(f.slope) + "'\n"));
    summary = "slope " + fmt(f.slope) + " r_squared " + fmt(f.r_squared);
  }
  std::cout << summary << " " << join_paths(files) << "\n";
  return x.size() >= 2 ? kOk : kNumerical;
}

int cmd_oracle_check(const Context& ctx, int trials) {
  if (ctx.spec.L > 2) throw Error(ErrorKind::InvalidArgument, "cli", "oracle-check supports --L 1 or 2");
  std::mt19937_64 rng(ctx.seed);
  const oracle::FockOperators ops(ctx.spec.modes());
  double worst = 0.0;
  std::string csv = "trial,L,gamma,h,F,omega,g1,l1,gL,lL,max_deviation\n";
  for (int i = 0; i < trials; ++i) {
    const ModelSpec s = oracle::random_model(rng, ctx.spec.L);
    const auto gauss = steady_state(assemble_dynamics(rotating_frame_lindbladian(s)));
    const auto dense = oracle::oracle_steady_state(s);
    const double dev = (gauss.covariance.omega - oracle::covariance_of(dense.rho, ops).omega).cwiseAbs().maxCoeff();
    worst = std::max(worst, dev);
    csv += std::to_string(i) + "," + std::to_string(s.L);
    for (double v : {s.chain.gamma_up, s.chain.h_up, s.drive.F, s.drive.omega, s.rates.g1, s.rates.l1, s.rates.gL,
                     s.rates.lL, dev})
      csv += "," + io::format_double(v);
    csv += "\n";
  }
  const fs::path data = emit(ctx, "oracle_check.csv", csv);
  write_manifest(ctx, {{"max_deviation", worst}, {"trials", trials}}, {data});
  std::cout << "max deviation " << fmt(worst) << " over " << trials << " models " << data.string() << "\n";
  return worst <= 1e-8 ? kOk : kNumerical;
}

}  // namespace

int main(int argc, char** argv) {
  ensure_blas_kernel(argv);

  CLI::App app{"Non-equilibrium steady states of the boundary-driven double Kitaev chain"};
  app.require_subcommand(1);
  app.set_help_flag("--help", "Print this help message and exit");  // -h would shadow --h
  Common common;

  auto sub = [&](const std::string& name, const std::string& help) {
    CLI::App* s = app.add_subcommand(name, help);
    s->set_help_flag("--help", "Print this help message and exit");
    add_model_flags(s, common);
    return s;
  };

  CLI::App* spectrum = sub("spectrum", "Bulk quasiparticle bands");
  int k_points = 513;
  spectrum->add_option("--points", k_points, "k-grid size")->check(CLI::Range(2, 1 << 20));
  CLI::App* windows = sub("windows", "Intra- and inter-band resonance windows");
  CLI::App* ness_cmd = sub("ness", "Steady state: covariance dump and lab correlations");
  CLI::App* chi = sub("chi", "Long-range correlation index");
  CLI::App* profile = sub("profile", "Anti-diagonal correlation profile");
  CLI::App* fit = sub("fit", "Power-law fit of the anti-diagonal profile");
  std::optional<double> r_min, r_max;
  for (CLI::App* a : {profile, fit}) {
    a->add_option("--r-min", r_min, "Fit window start (default L/32)");
    a->add_option("--r-max", r_max, "Fit window end (default 3L/8)");
  }
  bool profile_fit = false;
  profile->add_flag("--fit", profile_fit, "Also fit a power law");

  CLI::App* collapse = sub("collapse", "Finite-size scaling collapse");
  std::vector<int> sizes{64, 128, 256, 512};
  double nu = 2.0;
  std::vector<double> nu_scan{1.0, 1.5, 2.0, 2.5, 3.0};
  collapse->add_option("--sizes", sizes, "System sizes")->delimiter(',')->capture_default_str();
  collapse->add_option("--nu", nu, "Scaling exponent")->capture_default_str();
  collapse->add_option("--nu-scan", nu_scan, "Exponents to compare")->delimiter(',')->capture_default_str();

  Range F_range, omega_range, gamma_range;
  auto add_range = [](CLI::App* a, Range& r, const std::string& name) {
    a->add_option("--" + name + "-min", r.lo, "Lower end of the " + name + " grid");
    a->add_option("--" + name + "-max", r.hi, "Upper end of the " + name + " grid");
    a->add_option("--" + name + "-count", r.count, "Points of the " + name + " grid")->check(CLI::PositiveNumber);
  };
  CLI::App* phase = sub("phase-diagram", "chi over the F-omega plane");
  add_range(phase, F_range, "F");
  add_range(phase, omega_range, "omega");

  CLI::App* scan_omega = sub("scan-omega", "chi and profiles across a frequency scan");
  double center = 4.0;
  int n_max = 8;
  bool with_center = false;
  scan_omega->add_option("--center", center, "Dyadic scan centre")->capture_default_str();
  scan_omega->add_option("--n-max", n_max, "Finest detuning 2^-n_max")->check(CLI::NonNegativeNumber);
  scan_omega->add_flag("--include-center", with_center, "Also evaluate the centre itself");
  add_range(scan_omega, omega_range, "omega");

  CLI::App* scan_gamma = sub("scan-gamma", "chi versus pairing, log-log slope");
  add_range(scan_gamma, gamma_range, "gamma");

  CLI::App* oracle_check = sub("oracle-check", "Dense-oracle cross-check on random models");
  int trials = 20;
  oracle_check->add_option("--trials", trials, "Random models")->check(CLI::PositiveNumber)->capture_default_str();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kOk : kUsage;
  }

  try {
    const CLI::App* cmd = app.get_subcommands().front();
    const std::string name = cmd->get_name();
    const Preset probe = preset_named(common.preset.value_or("ci"));
    int preset_L = probe.L;
    if (name == "scan-omega" || name == "scan-gamma") preset_L = probe.scan_L;
    Context ctx = resolve(common, name, preset_L);
    // Command-specific defaults where no flag, config or preset sets them.
    if (name == "scan-gamma") {
      if (!common.flags.L && !common.config && !common.preset) ctx.spec.L = 256;
      if (!common.flags.h) ctx.spec.chain.h_up = 2.0;
      if (!common.flags.F) ctx.spec.drive.F = 5.0;
      if (!common.flags.omega) ctx.spec.drive.omega = 6.0;
      ctx.config["model"] = json::parse(to_json(ctx.spec));
    }
    if (name == "scan-omega" && !common.flags.L && !common.config && !common.preset) {
      ctx.spec.L = 256;
      ctx.config["model"] = json::parse(to_json(ctx.spec));
    }
    if (name == "oracle-check" && !common.flags.L) {
      ctx.spec.L = 2;
      ctx.config["model"] = json::parse(to_json(ctx.spec));
    }
    if (name != "windows") fs::create_directories(ctx.out);

    if (name == "spectrum") return cmd_spectrum(ctx, k_points);
    if (name == "windows") return cmd_windows(ctx);
    if (name == "ness") return cmd_ness(ctx);
    if (name == "chi") return cmd_chi(ctx);
    if (name == "profile") return cmd_profile(ctx, r_min, r_max, profile_fit);
    if (name == "fit") return cmd_profile(ctx, r_min, r_max, true);
    if (name == "collapse") return cmd_collapse(ctx, sizes, nu, nu_scan);
    if (name == "phase-diagram") return cmd_phase_diagram(ctx, F_range, omega_range);
    if (name == "scan-omega") return cmd_scan_omega(ctx, center, n_max, with_center, omega_range);
    if (name == "scan-gamma") return cmd_scan_gamma(ctx, gamma_range);
    if (name == "oracle-check") return cmd_oracle_check(ctx, trials);
    return kUsage;
  } catch (const Error& e) {
    std::cerr << "ness: " << e.what() << "\n";
    if (e.kind() == ErrorKind::InvalidArgument) return kUsage;
    if (e.kind() == ErrorKind::Io) return kIo;
    return kNumerical;
  } catch (const fs::filesystem_error& e) {
    std::cerr << "ness: " << e.what() << "\n";
    return kIo;
  }
}
