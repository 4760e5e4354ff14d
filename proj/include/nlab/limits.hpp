#pragma once

#include "nlab/field.hpp"
#include "nlab/kernels.hpp"

#include <filesystem>
#include <limits>
#include <optional>
#include <string_view>
#include <utility>
#include <vector>

namespace nlab {

/// ((p-1) t)^{-1/(p-1)}, the x-independent solution of u_t = -u^p.
double flat_solution(double t, double p);

/// (4 pi alpha t)^{-N/2} exp(-|x|^2 / (4 alpha t)).
double heat_kernel(double r, double t, double alpha, int N);

/// (p-1)^{-1/(p-1)}.
double flat_constant(double p);

/// F'' from alpha F'' + alpha (N-1) F'/xi + (xi/2) F' + F/(p-1) - F^p = 0, xi > 0.
double profile_rhs(double xi, double F, double dF, double p, int N, double alpha);

/// F''(0) from the regular series start.
double profile_curvature_at_origin(double a0, double p, int N, double alpha);

enum class TailClass {
  HitsZero,       // F crosses zero at xi_cross
  AlgebraicTail,  // xi^{2/(p-1)} F -> A_tail > 0
  FastDecay,      // xi^{2/(p-1)} F(xi_max) below threshold
  Diverges,       // F grows without bound (a0 above the flat constant)
  Flat,           // a0 on the constant ray
  Unresolved,
};

std::string_view to_string(TailClass c);
TailClass parse_tail_class(std::string_view name);

struct ProfileOptions {
  double abs_tol = 1e-12;
  double rel_tol = 1e-10;
  double xi_max = 40.0;
  double xi_start = 1e-4;
  /// FastDecay when xi_max^{2/(p-1)} F(xi_max) < fast_decay_ratio * a0.
  double fast_decay_ratio = 1e-6;
  /// AlgebraicTail needs the fit residual of xi^q F = A + B xi^-2 below this.
  double plateau_tol = 0.01;
};

/// Radial self-similar profile F(xi), sampled at every accepted ODE step.
struct ProfileSolution {
  double p = 0.0;
  int N = 1;
  double alpha = 0.0;
  double a0 = 0.0;
  std::vector<double> xi, F, dF;
  TailClass tail_class = TailClass::Unresolved;
  double xi_cross = std::numeric_limits<double>::quiet_NaN();
  /// Fit xi^q F = A_tail + B_tail xi^-2 over [xi_max/10, xi_max].
  double A_tail = 0.0;
  double B_tail = 0.0;
  double fit_residual = std::numeric_limits<double>::infinity();
  ProfileOptions options;
  /// Shooting bracket (HitsZero end, positive end) when produced by shoot_vss.
  std::optional<std::pair<double, double>> bracket;

  double q() const { return 2.0 / (p - 1.0); }
  /// F with cubic Hermite interpolation, continued by the tail law past the samples.
  double operator()(double xi) const;
  double derivative(double xi) const;
};

ProfileSolution integrate_profile(double a0, double p, int N, double alpha,
                                  const ProfileOptions& opts = {});

/// True for outcomes where F stays positive and decays (the side above a*).
bool is_positive_decay(TailClass c);

/// Positive decay or unresolved: F stayed positive and bounded up to xi_max.
bool stays_positive(TailClass c);

/// Probe a0 = C_p k / n for k = 1..n-1 and return the unique adjacent pair
/// (HitsZero, stays positive). AmbiguousError if the outcomes are not split once.
std::pair<double, double> vss_bracket(double p, int N, double alpha,
                                      const ProfileOptions& opts = {}, int n = 64);

/// Bisection on a0 between a HitsZero end and a positive-decay end.
ProfileSolution shoot_vss(double p, int N, double alpha, double bracket_lo, double bracket_hi,
                          double bisect_tol, const ProfileOptions& opts = {});

struct UAProbe {
  double a0 = 0.0;
  TailClass tail_class = TailClass::Unresolved;
  double A_tail = 0.0;
};

/// Profile with algebraic tail constant A, shot between a* and C_p.
/// a_star defaults to a fresh VSS shot.
ProfileSolution shoot_UA(double A, double p, int N, double alpha,
                         const ProfileOptions& opts = {},
                         std::optional<double> a_star = {},
                         std::vector<UAProbe>* probes = nullptr);

/// t^{-1/(p-1)} F(|x| t^{-1/2}).
double eval_profile(const ProfileSolution& profile, double r, double t);

/// max |U_t - alpha Delta U + U^p| / max U over the radial samples r in
/// [0, r_max] at time t, by fourth-order centered differences.
double profile_pde_residual(const ProfileSolution& profile, double t, double r_max,
                            int samples = 400, double step = 2e-3);

/// Plain-text profile cache: '# key=value' header lines then xi,F,dF rows.
void save_profile(const ProfileSolution& profile, const std::filesystem::path& path);
ProfileSolution load_profile(const std::filesystem::path& path);

/// VSS profile from cache_dir when a file with a matching key exists,
/// otherwise shot on the probe ladder bracket and saved.
ProfileSolution cached_vss(const std::filesystem::path& cache_dir, double p, int N,
                           double alpha, double bisect_tol = 1e-10,
                           const ProfileOptions& opts = {});

// Regular part of the nonlocal fundamental solution.

/// Smallest K with sum_{k>K} e^{-t} t^k / k! < 1e-12.
int w_series_terms(double t);

/// W(., t) = e^{-t} sum_{k=1..K} t^k/k! J^{*k} on the grid (zero far field).
/// K_terms = 0 selects w_series_terms(t). CoverageError unless K d + h <= L.
Field w_series(const KernelSpec& kernel, double t, const Grid& grid, int K_terms = 0);

/// sup |dW/dt - (J*W - W + e^{-t} J)| with dW/dt by centered difference.
double w_residual(const KernelSpec& kernel, double t, const Grid& grid, double dt = 1e-4);

struct WBoundsRow {
  double t = 0.0;
  double h = 0.0;
  double c1 = 0.0;  // max W / t
  double c2 = 0.0;  // max over |x| >= d of W |x|^{N+2} / t
  double c3 = 0.0;  // max W t^{N/2}
  double mass = 0.0;
  double mass_expected = 0.0;
  double residual = 0.0;
};

struct WBoundsReport {
  std::vector<WBoundsRow> rows;  // one per (t, grid), coarse grid first
  double c1 = 0.0, c2 = 0.0, c3 = 0.0;
  double c1_fine = 0.0, c2_fine = 0.0, c3_fine = 0.0;
  bool finite = true;
  bool stable = true;
  bool pass() const { return finite && stable; }
};

WBoundsRow measure_w(const KernelSpec& kernel, double t, const Grid& grid);

/// Constants on grid and on the grid with spacing halved; stable when each
/// pair differs by at most a factor 2.
WBoundsReport check_w_bounds(const KernelSpec& kernel, const std::vector<double>& t_list,
                             const Grid& grid);

}  // namespace nlab
