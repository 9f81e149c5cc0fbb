#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "fcir/drift.hpp"
#include "fcir/limit.hpp"

namespace fcir {

enum class SamplerKind { circulant, cholesky };
enum class DriftSelection { indicator, max, both };

/// Flat key=value experiment description. Blank lines and `#` comments are
/// ignored; unknown keys are rejected.
struct ExperimentConfig {
  double initial_value_Y0 = 1.0;
  double mean_level_k = 1.0;
  double reversion_speed_a = 1.0;
  double volatility_sigma = 1.0;
  double hurst_H = 0.3;
  std::optional<Convention> convention;  // unset: chosen per command
  double horizon_T = 5.0;
  long step_count_n = 50000;
  std::vector<double> epsilon_schedule = {0.1, 0.05, 0.025, 0.0125, 0.00625, 0.003125, 0.0015625};
  DriftSelection drift_kind = DriftSelection::indicator;
  std::uint64_t master_seed = 1;
  long ensemble_size = 20;
  double tol_limit = 0.02;
  std::optional<double> threshold_theta;  // unset: max(achieved_tol, 1e-8)
  double transform_rel_tol = 0.05;
  double transform_pass_fraction = 0.9;
  double residual_pass_fraction = 0.9;
  std::optional<LimitEstimate> limit_estimate;  // unset: chosen per command
  long min_interval_nodes = 3;
  SamplerKind sampler = SamplerKind::circulant;
  long selftest_paths = 2000;
  std::optional<double> holder_gamma;  // unset: H / 2
  std::optional<std::filesystem::path> input_path;
  std::filesystem::path output_dir = "out";

  Grid<double> grid() const { return Grid<double>(horizon_T, step_count_n); }
  CirParams<double> params(Convention fallback) const;

  /// Structural checks independent of the command: ranges, schedule order,
  /// sampler size and theta >= tol_limit when theta is given.
  void validate() const;

  /// Stability guard of every schedule level under `convention`; throws
  /// StabilityError past the abort ratio and returns the worst ratio.
  double check_stability(Convention convention) const;
};

ExperimentConfig parse_config(const std::string& text);
ExperimentConfig load_config(const std::filesystem::path& path);
std::string to_text(const ExperimentConfig& config);

}  // namespace fcir
