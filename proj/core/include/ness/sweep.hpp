#pragma once

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "ness/model.hpp"
#include "ness/observables.hpp"

namespace ness {

/// Everything the pipeline derives from one model: rotating-frame steady state
/// -> lab-frame averaged correlations -> chi.
struct PointResult {
  LabCorrelations lab;
  double chi;
  double gap;
  double residual;
};

PointResult evaluate_point(const ModelSpec& spec);

enum class Axis { F, Omega, Gamma, H, L };

std::string axis_name(Axis axis);
Axis axis_from_name(const std::string& name);
/// Copy of `base` with one parameter replaced (L is rounded to an integer).
ModelSpec with_axis(const ModelSpec& base, Axis axis, double value);

struct SweepAxis {
  Axis axis;
  std::vector<double> values;
};

struct SweepOutputs {
  bool chi = true;
  bool profile = false;
  bool fit = false;
  bool gap = true;
};

struct SweepPlan {
  ModelSpec base;
  std::vector<SweepAxis> axes;  // 1 or 2; the first axis is the outer loop
  SweepOutputs outputs;
  std::filesystem::path output_dir;
  std::size_t budget = 100000;
  std::optional<std::pair<double, double>> fit_window;  // default_fit_window(L) when unset
  std::string config_json = "{}";                       // echoed into the manifest

  std::size_t size() const;
  /// Throws Error(InvalidArgument) on empty, unsorted or non-finite axes or
  /// when the grid exceeds the budget.
  void validate() const;
  /// Model for the grid point with row-major index `i`.
  ModelSpec point(std::size_t i) const;
  std::vector<double> coordinates(std::size_t i) const;
};

std::string to_json(const SweepPlan& plan);
SweepPlan plan_from_json(const std::string& text);

struct SweepRow {
  std::vector<double> coords;
  double chi;
  double gap;
  double residual;
  std::string status;  // "ok" or the error kind
  std::optional<PowerLawFit> fit;
  std::string profile_file;  // relative to the output directory
  double wall_time;
  bool resumed;  // read back from an existing output file
};

struct SweepResult {
  std::vector<SweepRow> rows;  // grid order
  std::filesystem::path csv;
  std::filesystem::path manifest;
  std::size_t computed;  // rows evaluated in this run (the rest were resumed)
};

/// Evaluates every grid point on `jobs` workers. Rows reach `sweep.csv` in
/// grid order; points already present in that file are skipped, so an
/// interrupted run resumes and a finished run is left untouched.
SweepResult run_sweep(const SweepPlan& plan, int jobs = 1);

/// 64-bit FNV-1a of the canonical model JSON, as 16 hex digits.
std::string point_hash(const ModelSpec& spec);

/// {center} U {center +- 2^-n : n = 0..n_max}, sorted.
std::vector<double> dyadic_detuning(double center, int n_max);

std::vector<double> linspace(double lo, double hi, int count);
std::vector<double> logspace(double lo, double hi, int count);

}  // namespace ness
