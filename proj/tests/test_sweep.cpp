#include "ness/sweep.hpp"

#include <cmath>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "doctest.h"
#include "ness/error.hpp"
#include "ness/io.hpp"

using namespace ness;
namespace fs = std::filesystem;

namespace {

struct TempDir {
  fs::path path;
  explicit TempDir(const std::string& name) : path(fs::temp_directory_path() / ("ness_sweep_" + name)) {
    fs::remove_all(path);
  }
  ~TempDir() { fs::remove_all(path); }
};

SweepPlan small_plan(const fs::path& out) {
  SweepPlan plan;
  plan.base.L = 8;
  plan.axes = {{Axis::F, {0.0, 1.5, 3.0}}, {Axis::Omega, {2.0, 4.0}}};
  plan.output_dir = out;
  return plan;
}

// CSV rows with the trailing wall_time column removed.
std::vector<std::string> stable_rows(const fs::path& csv) {
  std::istringstream in(io::read_text(csv));
  std::vector<std::string> rows;
  for (std::string line; std::getline(in, line);) rows.push_back(line.substr(0, line.rfind(',')));
  return rows;
}

}  // namespace

TEST_CASE("dyadic detuning") {
  CHECK(dyadic_detuning(4.0, 0) == std::vector<double>{3.0, 4.0, 5.0});
  CHECK(dyadic_detuning(4.0, 2) == std::vector<double>{3.0, 3.5, 3.75, 4.0, 4.25, 4.5, 5.0});
  const auto v = dyadic_detuning(4.0, 8);
  CHECK(v.size() == 19u);
  double min_gap = INFINITY;
  for (std::size_t i = 1; i < v.size(); ++i) min_gap = std::min(min_gap, v[i] - v[i - 1]);
  CHECK(min_gap == std::ldexp(1.0, -8));
  CHECK_THROWS_AS(dyadic_detuning(4.0, -1), Error);
}

TEST_CASE("grids") {
  CHECK(linspace(0.0, 1.0, 5) == std::vector<double>{0.0, 0.25, 0.5, 0.75, 1.0});
  const auto l = logspace(0.02, 0.5, 16);
  CHECK(l.size() == 16u);
  CHECK(l.front() == doctest::Approx(0.02));
  CHECK(l.back() == doctest::Approx(0.5));
  CHECK(l[1] / l[0] == doctest::Approx(l[15] / l[14]));
}

TEST_CASE("plan indexing and validation") {
  SweepPlan plan = small_plan("unused");
  CHECK(plan.size() == 6u);
  CHECK_NOTHROW(plan.validate());
  CHECK(plan.coordinates(0) == std::vector<double>{0.0, 2.0});
  CHECK(plan.coordinates(1) == std::vector<double>{0.0, 4.0});
  CHECK(plan.coordinates(5) == std::vector<double>{3.0, 4.0});
  CHECK(plan.point(3).drive.F == 1.5);
  CHECK(plan.point(3).drive.omega == 4.0);
  CHECK(with_axis(plan.base, Axis::L, 12.0).L == 12);
  CHECK(axis_from_name(axis_name(Axis::Gamma)) == Axis::Gamma);
  CHECK_THROWS_AS(axis_from_name("zeta"), Error);

  SweepPlan bad = plan;
  bad.budget = 5;
  CHECK_THROWS_AS(bad.validate(), Error);
  bad = plan;
  bad.axes[0].values = {1.0, 0.0};
  CHECK_THROWS_AS(bad.validate(), Error);
  bad = plan;
  bad.axes[1].values = {};
  CHECK_THROWS_AS(bad.validate(), Error);
  bad = plan;
  bad.axes[1].values = {1.0, NAN};
  CHECK_THROWS_AS(bad.validate(), Error);
  bad = plan;
  bad.axes.clear();
  CHECK_THROWS_AS(bad.validate(), Error);
}

TEST_CASE("plan JSON round trip") {
  SweepPlan plan = small_plan("some/dir");
  plan.outputs.fit = true;
  plan.fit_window = std::pair{2.0, 6.0};
  const SweepPlan back = plan_from_json(to_json(plan));
  CHECK(back.size() == plan.size());
  CHECK(back.axes[1].values == plan.axes[1].values);
  CHECK(back.outputs.fit);
  CHECK(back.fit_window->second == 6.0);
  CHECK(back.output_dir == plan.output_dir);
  CHECK(to_json(back) == to_json(plan));
  CHECK_THROWS_AS(plan_from_json(R"({"axes": [], "speed": 1})"), Error);
}

TEST_CASE("one-point undriven plan") {
  TempDir dir("single");
  SweepPlan plan;
  plan.base.L = 32;
  plan.axes = {{Axis::F, {0.0}}};
  plan.output_dir = dir.path;
  const SweepResult r = run_sweep(plan);
  REQUIRE(r.rows.size() == 1u);
  CHECK(r.rows[0].status == "ok");
  CHECK(r.rows[0].chi < 1e-8);
  CHECK(r.rows[0].gap > 0.0);
  CHECK(fs::exists(r.manifest));
  const std::string header = stable_rows(r.csv).front();
  CHECK(header == "F,chi,gap,residual,status");
}

TEST_CASE("resume, idempotence and determinism") {
  TempDir dir("resume");
  SweepPlan plan = small_plan(dir.path);
  plan.outputs.profile = true;
  const SweepResult first = run_sweep(plan);
  CHECK(first.computed == 6u);
  const auto rows = stable_rows(first.csv);
  CHECK(rows.size() == 7u);
  const std::string full = io::read_text(first.csv);

  // Idempotent: a finished run is left byte-identical.
  const SweepResult again = run_sweep(plan);
  CHECK(again.computed == 0u);
  CHECK(io::read_text(first.csv) == full);
  for (std::size_t i = 0; i < 6; ++i) CHECK(again.rows[i].chi == first.rows[i].chi);

  // Interrupted run: keep the header and two rows, then resume.
  {
    std::istringstream in(full);
    std::string line, kept;
    for (int i = 0; i < 3 && std::getline(in, line); ++i) kept += line + "\n";
    io::write_text(first.csv, kept);
  }
  const SweepResult resumed = run_sweep(plan);
  CHECK(resumed.computed == 4u);
  CHECK(resumed.rows[0].resumed);
  CHECK(!resumed.rows[5].resumed);
  CHECK(stable_rows(resumed.csv) == rows);

  // Profiles are named by point hash and listed in the manifest.
  for (const auto& row : resumed.rows) CHECK(fs::exists(dir.path / row.profile_file));
  CHECK(io::read_text(resumed.manifest).find(first.rows[0].profile_file) != std::string::npos);

  // A fresh run elsewhere is bit-identical apart from wall time.
  TempDir other("resume_other");
  SweepPlan copy = plan;
  copy.output_dir = other.path;
  CHECK(stable_rows(run_sweep(copy).csv) == rows);
}

TEST_CASE("parallel execution equals serial execution") {
  TempDir serial("serial"), parallel("parallel");
  SweepPlan a = small_plan(serial.path), b = small_plan(parallel.path);
  a.outputs.fit = b.outputs.fit = true;
  a.base.L = b.base.L = 64;
  a.axes[1].values = b.axes[1].values = {4.0};
  const auto rs = run_sweep(a, 1);
  const auto rp = run_sweep(b, 3);
  CHECK(stable_rows(rs.csv) == stable_rows(rp.csv));
}

TEST_CASE("per-point failures are labelled, not dropped") {
  TempDir dir("failures");
  SweepPlan plan;
  plan.base.L = 2;
  plan.base.chain = {0.0, 0.0, 1.0};  // site 2 decouples from the bath
  plan.base.rates = {0.3, 0.5, 0.0, 0.0};
  plan.axes = {{Axis::F, {0.0, 1.0}}};
  plan.output_dir = dir.path;
  const SweepResult r = run_sweep(plan);
  REQUIRE(r.rows.size() == 2u);
  for (const auto& row : r.rows) CHECK(row.status == "NotRelaxing");
  CHECK(io::read_text(r.manifest).find("\"failed\": 2") != std::string::npos);
}

TEST_CASE("point hash") {
  ModelSpec a, b;
  CHECK(point_hash(a) == point_hash(b));
  CHECK(point_hash(a).size() == 16u);
  b.drive.omega = 4.0 + 1e-12;
  CHECK(point_hash(a) != point_hash(b));
}
