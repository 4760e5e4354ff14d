#include "nlab/error.hpp"
#include "nlab/limits.hpp"
#include "nlab/nonlocal_op.hpp"

#include <cmath>
#include <string>

namespace nlab {

int w_series_terms(double t) {
  if (t < 0.0) throw DomainError("W series needs t >= 0");
  if (t == 0.0) return 0;
  // term = e^{-t} t^k / k!; the tail past K is bounded by a geometric series
  // once K + 2 > t.
  double term = std::exp(-t);
  for (int K = 0; K < 100000; ++K) {
    const double next = term * t / (K + 1);
    const double ratio = t / (K + 2);
    if (ratio < 1.0 && next / (1.0 - ratio) < 1e-12) return K;
    term = next;
  }
  throw ConvergenceError("W series term count did not settle");
}

namespace {

Field kernel_on_nodes(const KernelSpec& kernel, const Grid& grid) {
  Field j = Field::zeros(grid);
  for (Eigen::Index k = 0; k < grid.size(); ++k) j.values(k) = kernel(grid.radius(k));
  j.values /= j.values.sum() * grid.cell_volume();
  return j;
}

}  // namespace

Field w_series(const KernelSpec& kernel, double t, const Grid& grid, int K_terms) {
  if (kernel.dim != grid.dim) throw UsageError("kernel and grid dimensions differ");
  if (grid.mode != DomainMode::TruncatedFullSpace)
    throw UsageError("W series is assembled on the truncated full-space box");
  const int K = K_terms > 0 ? K_terms : w_series_terms(t);
  Field w = Field::zeros(grid);
  w.time = t;
  if (K == 0) return w;
  if (K * kernel.support_radius + grid.spacing > grid.half_width)
    throw CoverageError("box half-width " + std::to_string(grid.half_width) +
                        " cannot hold the support of J^{*" + std::to_string(K) + "}");

  const Engine engine = grid.dim == 1 ? Engine::Direct : Engine::FastCyclic;
  ConvolutionPlan plan(grid, sample_on_grid(kernel, grid.spacing), engine);
  Field power = kernel_on_nodes(kernel, grid);
  double coef = std::exp(-t);
  for (int k = 1; k <= K; ++k) {
    coef *= t / k;
    w.values += coef * power.values;
    if (k < K) power.values = plan.apply(power);
  }
  return w;
}

double w_residual(const KernelSpec& kernel, double t, const Grid& grid, double dt) {
  if (!(t > dt)) throw DomainError("W residual needs t > dt");
  const int K = w_series_terms(t + dt);
  const Field plus = w_series(kernel, t + dt, grid, K);
  const Field minus = w_series(kernel, t - dt, grid, K);
  const Field mid = w_series(kernel, t, grid, K);
  const Engine engine = grid.dim == 1 ? Engine::Direct : Engine::FastCyclic;
  ConvolutionPlan plan(grid, sample_on_grid(kernel, grid.spacing), engine);
  const Eigen::ArrayXd dwdt = (plus.values - minus.values) / (2.0 * dt);
  const Eigen::ArrayXd rhs =
      plan.apply(mid) - mid.values + std::exp(-t) * kernel_on_nodes(kernel, grid).values;
  return (dwdt - rhs).abs().maxCoeff();
}

WBoundsRow measure_w(const KernelSpec& kernel, double t, const Grid& grid) {
  if (!(t > 0.0)) throw DomainError("W bounds need t > 0");
  const Field w = w_series(kernel, t, grid);
  WBoundsRow row;
  row.t = t;
  row.h = grid.spacing;
  const double d = kernel.support_radius;
  for (Eigen::Index k = 0; k < grid.size(); ++k) {
    const double v = w.values(k);
    const double r = grid.radius(k);
    row.c1 = std::max(row.c1, v / t);
    if (r >= d) row.c2 = std::max(row.c2, v * std::pow(r, grid.dim + 2) / t);
    row.c3 = std::max(row.c3, v * std::pow(t, 0.5 * grid.dim));
  }
  row.mass = w.values.sum() * grid.cell_volume();
  row.mass_expected = -std::expm1(-t);
  row.residual = t > 1e-3 ? w_residual(kernel, t, grid) : 0.0;
  return row;
}

WBoundsReport check_w_bounds(const KernelSpec& kernel, const std::vector<double>& t_list,
                             const Grid& grid) {
  WBoundsReport rep;
  const Grid fine = Grid::make(grid.dim, grid.mode, grid.half_width, 0.5 * grid.spacing);
  for (const Grid* g : {&grid, &fine}) {
    const bool is_fine = g == &fine;
    for (double t : t_list) {
      const WBoundsRow row = measure_w(kernel, t, *g);
      rep.rows.push_back(row);
      double& c1 = is_fine ? rep.c1_fine : rep.c1;
      double& c2 = is_fine ? rep.c2_fine : rep.c2;
      double& c3 = is_fine ? rep.c3_fine : rep.c3;
      c1 = std::max(c1, row.c1);
      c2 = std::max(c2, row.c2);
      c3 = std::max(c3, row.c3);
    }
  }
  auto within2 = [](double a, double b) { return a > 0.0 && b > 0.0 && a <= 2 * b && b <= 2 * a; };
  for (double c : {rep.c1, rep.c2, rep.c3, rep.c1_fine, rep.c2_fine, rep.c3_fine})
    if (!std::isfinite(c)) rep.finite = false;
  rep.stable = within2(rep.c1, rep.c1_fine) && within2(rep.c2, rep.c2_fine) &&
               within2(rep.c3, rep.c3_fine);
  return rep;
}

}  // namespace nlab
