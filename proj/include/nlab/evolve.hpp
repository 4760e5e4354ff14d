#pragma once

#include "nlab/field.hpp"
#include "nlab/kernels.hpp"
#include "nlab/nonlocal_op.hpp"

#include <Eigen/Core>

#include <functional>
#include <optional>
#include <variant>
#include <vector>

namespace nlab {

/// Exponential Euler: linear decay exact, J*u - u^p frozen over the step.
struct Etd1 {};

/// Trapezoidal fixed point of the in-step Duhamel map.
struct PicardStep {
  double tol = 1e-12;
  int max_iter = 100;
};

using Scheme = std::variant<Etd1, PicardStep>;

struct EvolveParams {
  double p = 1.5;
  double dt = 1e-2;
  double t_end = 1.0;
  double t_first = 1.0;
  double checkpoint_ratio = 2.0;
  /// Checkpoints at which the full field is kept in Trajectory::snapshots.
  std::vector<double> snapshot_times;
  Scheme scheme = Etd1{};
  bool positivity_guard = true;
  Engine engine = Engine::Direct;
  bool check_oracle = false;

  /// Throws ConfigError unless 1 < p < 1 + 2/dim and the schedule is sane.
  void validate(int dim) const;
};

struct CheckpointRecord {
  double t = 0.0;
  double sup_norm = 0.0;
  double l1_mass = 0.0;
  double weighted_sup = 0.0;  // (1+|x|)^{2/(p-1)} u
  double absorbed_mass = 0.0; // \int_0^t \int u^p
  double tail_A_eff = 0.0;
};

struct Trajectory {
  double p = 0.0;
  std::vector<CheckpointRecord> records;
  std::vector<Field> snapshots;
  Field final_state;

  std::vector<double> times() const;
};

/// |w|^{p-1} w, with cheap paths for p = 1.5 and p = 2.
Eigen::ArrayXd signed_power(const Eigen::ArrayXd& w, double p);

/// Largest dt with (1 - e^{-dt}) sup^{p-1} <= e^{-dt}.
double positivity_dt_limit(double sup_norm, double p);

/// Largest dt allowed by the in-step contraction test (1 + p (2 sup)^{p-1}) dt <= 1/2.
double picard_dt_limit(double sup_norm, double p);

/// Sorted union of 0, t_first * ratio^k (< t_end), snapshot times and t_end.
std::vector<double> checkpoint_times(const EvolveParams& params);

/// Refit the amplitude of a power tail by least squares of log u + q log|x|
/// on the outer tenth of the box. No-op for zero tails.
void refit_tail(Field& field);

Field step_etd1(const Field& field, ConvolutionPlan& plan, double p, double dt,
                bool positivity_guard = true);

struct PicardOutcome {
  Field field;
  int iterations = 0;
  /// Largest ratio of successive iterate differences.
  double contraction = 0.0;
};

PicardOutcome step_picard(const Field& field, ConvolutionPlan& plan, double p, double dt,
                          double tol, int max_iter);

/// Called with every field reaching a checkpoint.
using CheckpointObserver = std::function<void(const Field&)>;

Trajectory run(const DatumSpec& datum, const KernelSpec& kernel, const Grid& grid,
               const EvolveParams& params, const CheckpointObserver& observer = {});

Trajectory run(Field initial, const KernelSpec& kernel, const EvolveParams& params,
               const CheckpointObserver& observer = {});

/// Overwrite u_high by fixed values on |x| <= radius after every step.
struct HighClamp {
  double radius = 0.0;
  Eigen::ArrayXd values;
};

struct PairCompareResult {
  Trajectory low;
  Trajectory high;
  std::vector<double> times;
  std::vector<double> min_gap;  // min over nodes of u_high - u_low, per checkpoint
  double overall_min_gap = 0.0;
  /// Whether (1 - e^{-dt}) p sup^{p-1} <= e^{-dt} held for both runs; this is
  /// what makes each step order preserving.
  bool monotone_step_condition = true;

  bool ordered(double tol = 1e-10) const { return overall_min_gap >= -tol; }
};

PairCompareResult evolve_pair_compare(const Field& low, const Field& high,
                                      const KernelSpec& kernel, const EvolveParams& params,
                                      const std::optional<HighClamp>& clamp = {});

PairCompareResult evolve_pair_compare(const DatumSpec& low, const DatumSpec& high,
                                      const KernelSpec& kernel, const Grid& grid,
                                      const EvolveParams& params,
                                      const std::optional<HighClamp>& clamp = {});

}  // namespace nlab
