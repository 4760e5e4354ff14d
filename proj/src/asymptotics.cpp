#include "nlab/asymptotics.hpp"

#include "nlab/error.hpp"

#include <Eigen/Dense>

#include <cmath>
#include <string>

namespace nlab {

double gamma(double p, int N) {
  if (N < 1 || !(p > 1.0) || !(p < 1.0 + 2.0 / N))
    throw DomainError("gamma needs 1 < p < 1 + 2/N");
  return 1.0 - 0.5 * N * (p - 1.0);
}

namespace {

// Linear interpolation along one axis of node values; positions outside the
// node range take the nearest end node.
struct AxisWeights {
  Eigen::Index i0, i1;
  double w1;
};

AxisWeights axis_weights(const Grid& g, double x) {
  const double s = (x + g.half_width) / g.spacing - 0.5;
  const Eigen::Index n = g.nodes_per_axis;
  if (s <= 0.0) return {0, 0, 0.0};
  if (s >= static_cast<double>(n - 1)) return {n - 1, n - 1, 0.0};
  const auto i0 = static_cast<Eigen::Index>(std::floor(s));
  return {i0, i0 + 1, s - static_cast<double>(i0)};
}

double sample_linear(const Field& f, double x, double y) {
  const Grid& g = f.grid;
  const AxisWeights ax = axis_weights(g, x);
  if (g.dim == 1) return (1.0 - ax.w1) * f.values(ax.i0) + ax.w1 * f.values(ax.i1);
  const AxisWeights ay = axis_weights(g, y);
  const Eigen::Index n = g.nodes_per_axis;
  auto v = [&](Eigen::Index i, Eigen::Index j) { return f.values(i * n + j); };
  return (1.0 - ax.w1) * ((1.0 - ay.w1) * v(ax.i0, ay.i0) + ay.w1 * v(ax.i0, ay.i1)) +
         ax.w1 * ((1.0 - ay.w1) * v(ax.i1, ay.i0) + ay.w1 * v(ax.i1, ay.i1));
}

}  // namespace

Field rescale_field(const Field& snapshot, double lambda, double p, const Grid& target,
                    std::optional<double> t_ref) {
  if (!(lambda >= 1.0)) throw DomainError("rescaling needs lambda >= 1");
  if (target.dim != snapshot.grid.dim) throw UsageError("rescale target dimension differs");
  if (lambda * target.half_width > snapshot.grid.half_width * (1.0 + 1e-12))
    throw CoverageError("rescaled target box exceeds the source box / lambda");
  if (t_ref) {
    const double want = lambda * lambda * *t_ref;
    if (std::abs(snapshot.time - want) > 1e-9 * std::max(1.0, want))
      throw SchedulingError("snapshot at t=" + std::to_string(snapshot.time) +
                            " does not match lambda^2 t_ref=" + std::to_string(want));
  }
  const double factor = std::pow(lambda, 2.0 / (p - 1.0));
  Field out = Field::zeros(target);
  out.time = snapshot.time / (lambda * lambda);
  for (Eigen::Index k = 0; k < target.size(); ++k) {
    const auto x = target.position(k);
    out.values(k) = factor * sample_linear(snapshot, lambda * x[0], lambda * x[1]);
  }
  // A |x|^{-2/(p-1)} is invariant under the scaling.
  out.tail = snapshot.tail;
  return out;
}

RateFit fit_power_law(const std::vector<double>& times, const std::vector<double>& values,
                      std::pair<double, double> window) {
  if (times.size() != values.size()) throw UsageError("times and values differ in length");
  const auto [lo, hi] = window;
  if (!(lo > 0.0) || !(hi >= 10.0 * lo * (1.0 - 1e-12)))
    throw DomainError("rate window must be positive and span at least one decade");
  std::vector<double> lt, lv;
  for (std::size_t i = 0; i < times.size(); ++i) {
    const double t = times[i];
    if (t < lo * (1.0 - 1e-12) || t > hi * (1.0 + 1e-12)) continue;
    if (!(values[i] > 0.0)) throw DomainError("power-law fit needs positive values");
    lt.push_back(std::log(t));
    lv.push_back(std::log(values[i]));
  }
  if (lt.size() < 4) throw DomainError("power-law fit needs at least 4 samples in the window");
  const auto n = static_cast<Eigen::Index>(lt.size());
  Eigen::MatrixXd M(n, 2);
  Eigen::VectorXd y(n);
  for (Eigen::Index i = 0; i < n; ++i) {
    M(i, 0) = 1.0;
    M(i, 1) = lt[i];
    y(i) = lv[i];
  }
  const Eigen::Vector2d c = M.colPivHouseholderQr().solve(y);
  RateFit fit;
  fit.intercept = c(0);
  fit.exponent = c(1);
  fit.residual_rms = std::sqrt((M * c - y).squaredNorm() / static_cast<double>(n));
  fit.t_lo = lo;
  fit.t_hi = hi;
  fit.points = static_cast<int>(n);
  return fit;
}

double convergence_metric(const Field& snapshot, const ProfileSolution& profile, double K) {
  const double t = snapshot.time;
  if (!(t > 0.0)) throw DomainError("convergence metric needs t > 0");
  const double radius = K * std::sqrt(t);
  if (radius > snapshot.grid.half_width)
    throw CoverageError("ball of radius K sqrt(t) = " + std::to_string(radius) +
                        " leaves the box");
  double worst = 0.0;
  for (Eigen::Index k = 0; k < snapshot.grid.size(); ++k) {
    const double r = snapshot.grid.radius(k);
    if (r > radius) continue;
    worst = std::max(worst, std::abs(snapshot.values(k) - eval_profile(profile, r, t)));
  }
  return std::pow(t, 1.0 / (profile.p - 1.0)) * worst;
}

double truncated_mass(const Field& field, double R) {
  double acc = 0.0;
  for (Eigen::Index k = 0; k < field.grid.size(); ++k)
    if (field.grid.radius(k) <= R) acc += field.values(k);
  return acc * field.grid.cell_volume();
}

MassDivergenceReport check_mass_divergence(const std::vector<Field>& snapshots,
                                           const std::vector<double>& lambdas, double R,
                                           double t_ref, double p) {
  MassDivergenceReport rep;
  for (double lambda : lambdas) {
    if (!(lambda > 0.0)) throw DomainError("lambda must be positive");
    const double t = lambda * lambda * t_ref;
    const Field* snap = nullptr;
    for (const auto& s : snapshots)
      if (std::abs(s.time - t) <= 1e-9 * std::max(1.0, t)) snap = &s;
    if (!snap) throw SchedulingError("no snapshot at t = lambda^2 t_ref = " + std::to_string(t));
    if (lambda * R > snap->grid.half_width)
      throw CoverageError("ball of radius lambda R leaves the box");
    const int N = snap->grid.dim;
    MassDivergenceRow row;
    row.lambda = lambda;
    row.t = t;
    row.rescaled_mass = std::pow(lambda, 2.0 / (p - 1.0) - N) * truncated_mass(*snap, lambda * R);
    if (!rep.rows.empty() && row.rescaled_mass < rep.rows.back().rescaled_mass * (1.0 - 0.01))
      rep.nondecreasing = false;
    rep.rows.push_back(row);
  }
  return rep;
}

double mass_balance_residual(const Trajectory& trajectory) {
  if (trajectory.records.empty()) throw UsageError("empty trajectory");
  const auto& first = trajectory.records.front();
  const auto& last = trajectory.records.back();
  const double res = std::abs(last.l1_mass - first.l1_mass + last.absorbed_mass);
  return first.l1_mass > 0.0 ? res / first.l1_mass : res;
}

}  // namespace nlab
