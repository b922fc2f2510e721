#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "fotd/integrators.hpp"

namespace fotd {

enum class CaseKind { rossler, ks, reactive };

std::string to_string(CaseKind kind);
CaseKind parse_case(const std::string& name);

/// Everything needed to reproduce one experiment. Unset optionals take the
/// preset's value.
struct RunConfig {
  CaseKind kind = CaseKind::rossler;
  std::string preset = "desk";
  std::vector<int> ranks{2};
  std::optional<double> dt;
  std::optional<double> horizon;
  std::optional<Integrator> integrator;
  long stride = 10;
  /// Extra oracle singular values written beyond r.
  int extra_singulars = 2;
  std::uint64_t seed = 7;
  std::uint64_t padding_seed = 20210401;
  double regularization = 1e-12;
  double init_resolution = 1e-5;
  bool oracle = true;
  bool otd_baseline = false;
  bool fd_check = false;
  /// Times at which ranked coefficients are written; the final time when empty.
  std::vector<double> coeff_times;
  std::string output = "runs";
  /// KS grid size and reactive grid overrides.
  std::optional<long> ks_n;
  std::optional<long> grid_n1;
  std::optional<long> grid_n2;
  std::string velocity_file;
  /// Worker threads for a rank sweep; 0 picks min(members, hardware threads).
  int threads = 0;
};

/// Itemized violations; empty when the configuration is runnable.
std::vector<std::string> validate(const RunConfig& config);

/// Output directory after applying the FOTD_OUTPUT_ROOT override to
/// relative paths.
std::string resolve_output(const RunConfig& config);

struct RunResult {
  int exit_code = 0;
  std::string output_dir;
  std::string message;
};

/// Runs the sweep and writes errors.csv, singulars.csv and coefficient
/// snapshots per rank under r<k>/, plus manifest.json. On failure writes
/// error.json and returns exit code 2 (configuration) or 3 (numerical).
RunResult run(const RunConfig& config);

}  // namespace fotd
