#pragma once

#include "nlab/evolve.hpp"
#include "nlab/field.hpp"
#include "nlab/limits.hpp"

#include <optional>
#include <utility>
#include <vector>

namespace nlab {

/// 1 - N(p-1)/2; DomainError unless 1 < p < 1 + 2/N.
double gamma(double p, int N);

/// u_lambda(x) = lambda^{2/(p-1)} u(lambda x) resampled onto `target` by
/// linear interpolation. When t_ref is given the snapshot must sit at
/// lambda^2 t_ref (SchedulingError otherwise).
Field rescale_field(const Field& snapshot, double lambda, double p, const Grid& target,
                    std::optional<double> t_ref = {});

struct RateFit {
  double exponent = 0.0;
  double intercept = 0.0;  // log of the prefactor
  double residual_rms = 0.0;
  double t_lo = 0.0;
  double t_hi = 0.0;
  int points = 0;
};

/// Least squares of log v against log t over samples with t in [lo, hi].
/// Needs at least 4 samples and hi >= 10 lo.
RateFit fit_power_law(const std::vector<double>& times, const std::vector<double>& values,
                      std::pair<double, double> window);

/// t^{1/(p-1)} max over |x| <= K sqrt(t) of |u - U(x, t)| with U from the profile.
double convergence_metric(const Field& snapshot, const ProfileSolution& profile, double K);

/// sum of u h^N over nodes with |x| <= R.
double truncated_mass(const Field& field, double R);

struct MassDivergenceRow {
  double lambda = 0.0;
  double t = 0.0;               // lambda^2 t_ref
  double rescaled_mass = 0.0;   // \int_{B_R} u_lambda(., t_ref)
};

struct MassDivergenceReport {
  std::vector<MassDivergenceRow> rows;
  bool nondecreasing = true;  // within 1% relative noise
};

/// lambda^{2/(p-1)-N} \int_{|y| <= lambda R} u(y, lambda^2 t_ref) dy per lambda,
/// from snapshots of one run.
MassDivergenceReport check_mass_divergence(const std::vector<Field>& snapshots,
                                           const std::vector<double>& lambdas, double R,
                                           double t_ref, double p);

/// |M(T) - M(0) + absorbed(T)| / M(0); absolute when M(0) = 0.
double mass_balance_residual(const Trajectory& trajectory);

}  // namespace nlab
