#include "ness/sweep.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <condition_variable>
#include <cstdio>
#include <fstream>
#include <map>
#include <mutex>
#include <set>
#include <sstream>
#include <thread>

#include "json.hpp"
#include "ness/error.hpp"
#include "ness/gaussian_lindblad.hpp"
#include "ness/io.hpp"

namespace ness {

namespace {

using nlohmann::json;
namespace fs = std::filesystem;

void invalid(const std::string& what) { throw Error(ErrorKind::InvalidArgument, "sweep", what); }

std::vector<std::string> split_csv(const std::string& line) {
  std::vector<std::string> out;
  std::string cell;
  std::istringstream is(line);
  while (std::getline(is, cell, ',')) out.push_back(cell);
  if (!line.empty() && line.back() == ',') out.emplace_back();
  return out;
}

std::string header(const SweepPlan& plan) {
  std::string h;
  for (const auto& a : plan.axes) h += axis_name(a.axis) + ",";
  h += "chi,gap,residual,status";
  if (plan.outputs.fit) h += ",fit_exponent,fit_r_squared";
  h += ",wall_time";
  return h;
}

std::string coords_key(const std::vector<double>& coords) {
  std::string key;
  for (double c : coords) key += io::format_double(c) + ",";
  return key;
}

std::string row_line(const SweepRow& row, const SweepPlan& plan) {
  std::string line = coords_key(row.coords);
  line += io::format_double(row.chi) + "," + io::format_double(row.gap) + "," + io::format_double(row.residual) + "," +
          row.status;
  if (plan.outputs.fit) {
    const double nan = std::nan("");
    line += "," + io::format_double(row.fit ? row.fit->exponent : nan) + "," +
            io::format_double(row.fit ? row.fit->r_squared : nan);
  }
  char wall[32];
  std::snprintf(wall, sizeof wall, "%.3f", row.wall_time);
  return line + "," + wall;
}

SweepRow parse_row(const std::string& line, const SweepPlan& plan) {
  const auto cells = split_csv(line);
  const std::size_t na = plan.axes.size();
  const std::size_t expected = na + 5 + (plan.outputs.fit ? 2 : 0);
  if (cells.size() != expected) throw Error(ErrorKind::Io, "run_sweep", "malformed row in existing output: " + line);
  SweepRow row{};
  for (std::size_t i = 0; i < na; ++i) row.coords.push_back(std::stod(cells[i]));
  row.chi = std::stod(cells[na]);
  row.gap = std::stod(cells[na + 1]);
  row.residual = std::stod(cells[na + 2]);
  row.status = cells[na + 3];
  if (plan.outputs.fit) {
    const double e = std::stod(cells[na + 4]), r2 = std::stod(cells[na + 5]);
    if (std::isfinite(e)) row.fit = PowerLawFit{e, NAN, NAN, NAN, r2, 0, 0};
  }
  row.wall_time = std::stod(cells.back());
  row.resumed = true;
  return row;
}

SweepRow compute_row(const SweepPlan& plan, std::size_t index, const fs::path& profile_dir) {
  const auto start = std::chrono::steady_clock::now();
  SweepRow row{};
  row.coords = plan.coordinates(index);
  row.chi = row.gap = row.residual = std::nan("");
  try {
    const ModelSpec spec = plan.point(index);
    const PointResult r = evaluate_point(spec);
    row.chi = r.chi;
    row.gap = r.gap;
    row.residual = r.residual;
    row.status = "ok";
    if (plan.outputs.profile || plan.outputs.fit) {
      const CorrelationProfile profile = antidiagonal_profile(r.lab);
      if (plan.outputs.profile) {
        row.profile_file = (fs::path("profiles") / ("profile_" + point_hash(spec) + ".csv")).string();
        io::write_text(profile_dir.parent_path() / row.profile_file, profile_csv(profile));
      }
      if (plan.outputs.fit) {
        const auto window = plan.fit_window.value_or(default_fit_window(spec.L));
        try {
          row.fit = fit_power_law(profile, window.first, window.second);
        } catch (const Error& e) {
          if (e.kind() != ErrorKind::InsufficientPoints) throw;
        }
      }
    }
  } catch (const Error& e) {
    if (e.kind() == ErrorKind::Io) throw;
    row.status = std::string(to_string(e.kind()));
  }
  row.wall_time = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  return row;
}

std::uint64_t fnv1a(const std::string& s) {
  std::uint64_t h = 0xcbf29ce484222325ull;
  for (unsigned char c : s) {
    h ^= c;
    h *= 0x100000001b3ull;
  }
  return h;
}

}  // namespace

PointResult evaluate_point(const ModelSpec& spec) {
  const BasisLayout layout(spec.L);
  const DynamicalSystem dyn = assemble_dynamics(rotating_frame_lindbladian(spec));
  const SteadyState ss = steady_state(dyn);
  LabCorrelations lab = rotating_to_lab(ss.covariance, layout);
  const double chi = chi_index(lab, Block::UpUp);
  return {std::move(lab), chi, ss.gap, ss.residual};
}

std::string axis_name(Axis axis) {
  switch (axis) {
    case Axis::F: return "F";
    case Axis::Omega: return "omega";
    case Axis::Gamma: return "gamma";
    case Axis::H: return "h";
    case Axis::L: return "L";
  }
  return "?";
}

Axis axis_from_name(const std::string& name) {
  for (Axis a : {Axis::F, Axis::Omega, Axis::Gamma, Axis::H, Axis::L})
    if (axis_name(a) == name) return a;
  invalid("unknown axis '" + name + "' (expected F, omega, gamma, h or L)");
  return Axis::F;
}

ModelSpec with_axis(const ModelSpec& base, Axis axis, double value) {
  ModelSpec s = base;
  switch (axis) {
    case Axis::F: s.drive.F = value; break;
    case Axis::Omega: s.drive.omega = value; break;
    case Axis::Gamma: s.chain.gamma_up = value; break;
    case Axis::H: s.chain.h_up = value; break;
    case Axis::L: s.L = static_cast<int>(std::lround(value)); break;
  }
  return s;
}

std::size_t SweepPlan::size() const {
  std::size_t n = 1;
  for (const auto& a : axes) n *= a.values.size();
  return axes.empty() ? 0 : n;
}

void SweepPlan::validate() const {
  if (axes.empty() || axes.size() > 2) invalid("a plan needs one or two axes");
  if (axes.size() == 2 && axes[0].axis == axes[1].axis) invalid("axes must differ");
  for (const auto& a : axes) {
    if (a.values.empty()) invalid("axis " + axis_name(a.axis) + " has no values");
    for (double v : a.values)
      if (!std::isfinite(v)) invalid("axis " + axis_name(a.axis) + " has a non-finite value");
    if (!std::is_sorted(a.values.begin(), a.values.end())) invalid("axis " + axis_name(a.axis) + " must be sorted");
  }
  if (size() > budget)
    invalid("grid has " + std::to_string(size()) + " points, over the budget of " + std::to_string(budget));
  base.validate();
}

std::vector<double> SweepPlan::coordinates(std::size_t i) const {
  std::vector<double> c(axes.size());
  for (std::size_t a = axes.size(); a-- > 0;) {
    const std::size_t n = axes[a].values.size();
    c[a] = axes[a].values[i % n];
    i /= n;
  }
  return c;
}

ModelSpec SweepPlan::point(std::size_t i) const {
  ModelSpec s = base;
  const auto c = coordinates(i);
  for (std::size_t a = 0; a < axes.size(); ++a) s = with_axis(s, axes[a].axis, c[a]);
  return s;
}

std::string to_json(const SweepPlan& plan) {
  json j;
  j["base"] = json::parse(to_json(plan.base));
  j["axes"] = json::array();
  for (const auto& a : plan.axes) j["axes"].push_back({{"name", axis_name(a.axis)}, {"values", a.values}});
  std::vector<std::string> outs;
  if (plan.outputs.chi) outs.push_back("chi");
  if (plan.outputs.profile) outs.push_back("profile");
  if (plan.outputs.fit) outs.push_back("fit");
  if (plan.outputs.gap) outs.push_back("spectrum-gap");
  j["outputs"] = outs;
  j["output_dir"] = plan.output_dir.string();
  j["budget"] = plan.budget;
  if (plan.fit_window) j["fit_window"] = {plan.fit_window->first, plan.fit_window->second};
  return j.dump(2);
}

SweepPlan plan_from_json(const std::string& text) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::parse_error& e) {
    invalid(std::string("plan is not valid JSON: ") + e.what());
  }
  if (!j.is_object()) invalid("plan must be a JSON object");
  SweepPlan plan;
  plan.outputs = {false, false, false, false};
  bool saw_outputs = false;
  try {
    for (const auto& [key, value] : j.items()) {
      if (key == "base") {
        plan.base = model_from_json(value.dump());
      } else if (key == "axes") {
        for (const auto& a : value) {
          for (const auto& [ak, av] : a.items())
            if (ak != "name" && ak != "values") invalid("unknown axis key '" + ak + "'");
          plan.axes.push_back({axis_from_name(a.at("name").get<std::string>()), a.at("values").get<std::vector<double>>()});
        }
      } else if (key == "outputs") {
        saw_outputs = true;
        for (const auto& o : value) {
          const auto name = o.get<std::string>();
          if (name == "chi") plan.outputs.chi = true;
          else if (name == "profile") plan.outputs.profile = true;
          else if (name == "fit") plan.outputs.fit = true;
          else if (name == "spectrum-gap" || name == "gap") plan.outputs.gap = true;
          else invalid("unknown output '" + name + "'");
        }
      } else if (key == "output_dir") {
        plan.output_dir = value.get<std::string>();
      } else if (key == "budget") {
        plan.budget = value.get<std::size_t>();
      } else if (key == "fit_window") {
        const auto w = value.get<std::vector<double>>();
        if (w.size() != 2) invalid("fit_window needs two numbers");
        plan.fit_window = std::make_pair(w[0], w[1]);
      } else {
        invalid("unknown plan key '" + key + "'");
      }
    }
  } catch (const json::exception& e) {
    invalid(std::string("malformed plan: ") + e.what());
  }
  if (!saw_outputs) plan.outputs = SweepOutputs{};
  return plan;
}

SweepResult run_sweep(const SweepPlan& plan, int jobs) {
  plan.validate();
  if (jobs < 1) invalid("jobs must be >= 1");
  const fs::path dir = plan.output_dir.empty() ? fs::path(".") : plan.output_dir;
  const fs::path profile_dir = dir / "profiles";
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (plan.outputs.profile) fs::create_directories(profile_dir, ec);
  if (ec) throw Error(ErrorKind::Io, "run_sweep", "cannot create " + dir.string() + ": " + ec.message());

  SweepResult result{{}, dir / "sweep.csv", dir / "manifest.json", 0};
  const std::string head = header(plan);
  const std::size_t n = plan.size();

  // Resume: keep the raw lines of points that are already on disk.
  std::map<std::string, std::string> existing;
  std::vector<std::string> existing_order;
  if (fs::exists(result.csv)) {
    std::istringstream in(io::read_text(result.csv));
    std::string line;
    if (std::getline(in, line) && line != head)
      throw Error(ErrorKind::Io, "run_sweep", result.csv.string() + " was written by a different plan");
    while (std::getline(in, line)) {
      if (line.empty()) continue;
      const SweepRow row = parse_row(line, plan);
      const std::string key = coords_key(row.coords);
      if (existing.emplace(key, line).second) existing_order.push_back(key);
    }
  }

  std::vector<std::string> keys(n);
  std::vector<std::size_t> todo;
  for (std::size_t i = 0; i < n; ++i) {
    keys[i] = coords_key(plan.coordinates(i));
    if (!existing.count(keys[i])) todo.push_back(i);
  }

  // Grid order is already on disk iff the existing rows form a grid-order prefix
  // of the planned points; then new rows can simply be appended.
  bool prefix = existing_order.size() <= n;
  for (std::size_t i = 0; prefix && i < existing_order.size(); ++i) prefix = existing_order[i] == keys[i];
  std::set<std::string> planned(keys.begin(), keys.end());
  for (const auto& k : existing_order) prefix = prefix && planned.count(k);

  std::vector<std::optional<SweepRow>> rows(n);
  std::mutex mu;
  std::condition_variable cv;
  const auto workers = static_cast<std::size_t>(std::min<std::size_t>(static_cast<std::size_t>(jobs), std::max<std::size_t>(todo.size(), 1)));
  std::exception_ptr failure;
  std::vector<std::thread> pool;
  for (std::size_t w = 0; w < workers; ++w) {
    pool.emplace_back([&, w] {
      for (std::size_t t = w; t < todo.size(); t += workers) {
        std::optional<SweepRow> row;
        try {
          row = compute_row(plan, todo[t], profile_dir);
        } catch (...) {
          std::lock_guard lock(mu);
          if (!failure) failure = std::current_exception();
          cv.notify_all();
          return;
        }
        std::lock_guard lock(mu);
        rows[todo[t]] = std::move(row);
        cv.notify_all();
      }
    });
  }

  std::ofstream out;
  if (prefix) {
    const bool fresh = existing_order.empty();
    out.open(result.csv, fresh ? std::ios::trunc : std::ios::app);
    if (!out) throw Error(ErrorKind::Io, "run_sweep", "cannot open " + result.csv.string());
    if (fresh) out << head << '\n' << std::flush;
  }

  std::vector<std::string> lines(n);
  for (std::size_t i = 0; i < n; ++i) {
    if (auto it = existing.find(keys[i]); it != existing.end()) {
      lines[i] = it->second;
      result.rows.push_back(parse_row(it->second, plan));
      if (plan.outputs.profile && result.rows.back().status == "ok")
        result.rows.back().profile_file =
            (fs::path("profiles") / ("profile_" + point_hash(plan.point(i)) + ".csv")).string();
      continue;
    }
    std::unique_lock lock(mu);
    cv.wait(lock, [&] { return rows[i].has_value() || failure; });
    if (failure) break;
    SweepRow row = std::move(*rows[i]);
    lock.unlock();
    lines[i] = row_line(row, plan);
    if (prefix) {
      out << lines[i] << '\n' << std::flush;
      if (!out) throw Error(ErrorKind::Io, "run_sweep", "write to " + result.csv.string() + " failed");
    }
    result.rows.push_back(std::move(row));
    ++result.computed;
  }
  for (auto& t : pool) t.join();
  if (failure) std::rethrow_exception(failure);

  if (!prefix) {
    // Rewrite in grid order through a temporary so the old rows survive a crash.
    std::string text = head + "\n";
    for (const auto& l : lines) text += l + "\n";
    const fs::path tmp = result.csv.string() + ".tmp";
    io::write_text(tmp, text);
    fs::rename(tmp, result.csv, ec);
    if (ec) throw Error(ErrorKind::Io, "run_sweep", "cannot replace " + result.csv.string() + ": " + ec.message());
  }

  json manifest;
  manifest["plan"] = json::parse(to_json(plan));
  manifest["config"] = json::parse(plan.config_json);
  manifest["csv"] = result.csv.filename().string();
  manifest["columns"] = split_csv(head);
  manifest["points"] = n;
  std::size_t failed = 0;
  json profiles = json::array();
  for (const auto& r : result.rows) {
    if (r.status != "ok") ++failed;
    if (!r.profile_file.empty()) profiles.push_back(r.profile_file);
  }
  manifest["failed"] = failed;
  manifest["profiles"] = profiles;
  io::write_text(result.manifest, manifest.dump(2) + "\n");
  return result;
}

std::string point_hash(const ModelSpec& spec) {
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(fnv1a(to_json(spec))));
  return buf;
}

std::vector<double> dyadic_detuning(double center, int n_max) {
  if (n_max < 0) invalid("n_max must be >= 0");
  std::vector<double> v{center};
  for (int n = 0; n <= n_max; ++n) {
    const double d = std::ldexp(1.0, -n);
    v.push_back(center - d);
    v.push_back(center + d);
  }
  std::sort(v.begin(), v.end());
  v.erase(std::unique(v.begin(), v.end()), v.end());
  return v;
}

std::vector<double> linspace(double lo, double hi, int count) {
  if (count < 1) invalid("linspace needs count >= 1");
  if (count == 1) return {lo};
  std::vector<double> v(static_cast<std::size_t>(count));
  for (int i = 0; i < count; ++i) v[static_cast<std::size_t>(i)] = lo + (hi - lo) * i / (count - 1);
  return v;
}

std::vector<double> logspace(double lo, double hi, int count) {
  if (!(lo > 0.0 && hi > 0.0)) invalid("logspace needs positive bounds");
  auto v = linspace(std::log(lo), std::log(hi), count);
  for (auto& x : v) x = std::exp(x);
  if (count > 1) {
    v.front() = lo;
    v.back() = hi;
  }
  return v;
}

}  // namespace ness
