#pragma once

#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

namespace nlab {

/// Every setting an experiment can take, with defaults.
///
/// Text form: one `section.key = value` per line, '#' starts a comment,
/// lists are comma separated. Unknown or repeated keys are errors.
struct ExperimentConfig {
  std::string kind = "simulate";
  std::string output_dir = "out";

  std::string kernel_family = "bump";
  double kernel_d = 1.0;
  int kernel_quad_resolution = 512;

  double p = 1.5;

  int dim = 1;
  double L = 40.0;
  double h = 0.05;
  std::string domain_mode = "truncated";

  std::string datum_kind = "bump";  // bump | power_tail | constant | zero
  double datum_amplitude = 1.0;
  double datum_radius = 1.0;
  double datum_A = 1.0;
  double datum_c = 1.0;

  std::string conv_engine = "direct";
  bool conv_check_oracle = false;

  double dt = 1e-2;
  double t_end = 10.0;
  double t_first = 1.0;
  double checkpoint_ratio = 2.0;
  bool positivity_guard = true;
  std::string scheme = "etd1";
  double picard_tol = 1e-12;
  int picard_max_iter = 100;

  std::vector<double> snapshots;
  std::vector<double> K_list = {2.0};
  std::vector<double> lambda_list = {1.0, 2.0, 4.0};
  double t_ref = 1.0;
  double R = 5.0;
  std::vector<double> window = {10.0, 100.0};
  std::vector<double> t_list = {0.1, 1.0, 5.0};

  double barrier_c2_fraction = 0.5;
  double barrier_A = -1.0;  // negative: take A from the datum
  double barrier_B = 0.0;   // zero: measure from the datum

  double compare_amplitude_high = -1.0;  // negative: datum amplitude + 0.1

  std::string profile_mode = "vss";  // vss | ua
  double profile_A = 1.0;
  double profile_alpha = 0.0;        // zero: from the kernel
  double profile_bisect_tol = 1e-10;
  std::string profile_cache_dir;     // empty: no cache

  std::string input_trajectory;
  std::string input_profile;
};

ExperimentConfig parse_config(std::string_view text, std::string_view source = "<config>");
ExperimentConfig load_config(const std::filesystem::path& path);

/// Apply one `key=value` assignment (as in a config line).
void set_config_value(ExperimentConfig& cfg, std::string_view key, std::string_view value);

/// Every key with its value in a fixed order; parse_config reads it back.
std::string normalized_config(const ExperimentConfig& cfg);

/// FNV-1a 64 of the normalized config without output.dir, as 16 hex digits.
std::string config_hash(const ExperimentConfig& cfg);

std::vector<std::string> config_keys();

}  // namespace nlab
