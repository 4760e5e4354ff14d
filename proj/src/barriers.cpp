#include "nlab/barriers.hpp"

#include "nlab/error.hpp"

#include <algorithm>
#include <string>

namespace nlab {

double admissible_C2(const KernelSpec& kernel, double p) {
  const double q = p - 1.0;
  return q * q / (2.0 * p * std::pow(4.0, p / q) * kernel.second_moment);
}

SupersolutionReport verify_supersolution(const KernelSpec& kernel, const BarrierPhi& phi,
                                         const Grid& grid) {
  const DiscreteStencil st = sample_on_grid(kernel, grid.spacing);
  const double d = kernel.support_radius;
  const double p = phi.p;
  const double vol = st.cell_volume();
  const Eigen::Index w = st.width();
  const double m2_gap = std::abs(st.second_moment() - kernel.second_moment);
  const double coef = 4.0 * p / ((p - 1.0) * (p - 1.0)) * phi.C2;

  SupersolutionReport rep;
  for (Eigen::Index k = 0; k < grid.size(); ++k) {
    const auto x = grid.position(k);
    const double r = std::hypot(x[0], x[1]);
    const double edge = grid.half_width - std::max(std::abs(x[0]), std::abs(x[1]));
    if (r < 2.0 * d || edge <= d) continue;

    double conv = 0.0;
    if (grid.dim == 1) {
      for (Eigen::Index a = 0; a < w; ++a) {
        const double z = static_cast<double>(a - st.radius) * grid.spacing;
        conv += st.weights(a) * phi(std::abs(x[0] - z));
      }
    } else {
      for (Eigen::Index a = 0; a < w; ++a)
        for (Eigen::Index b = 0; b < w; ++b) {
          const double zx = static_cast<double>(a - st.radius) * grid.spacing;
          const double zy = static_cast<double>(b - st.radius) * grid.spacing;
          conv += st.weights(a * w + b) * phi(std::hypot(x[0] - zx, x[1] - zy));
        }
    }
    SupersolutionRow row;
    row.node = k;
    row.r = r;
    const double phi_x = phi(r);
    row.L_phi = conv * vol - phi_x;
    row.phi_p = std::pow(phi_x, p);
    row.margin = row.phi_p - row.L_phi;
    row.tolerance = 1e-12 + 0.5 * m2_gap * coef *
                                std::pow(phi.C1 + phi.C2 * r * r / 4.0, -p / (p - 1.0));
    rep.max_excess = std::max(rep.max_excess, -row.margin);
    if (row.margin < -row.tolerance) rep.pass = false;
    rep.rows.push_back(row);
  }
  return rep;
}

double tail_onset_radius(const Field& datum, double A, double p, double d) {
  const double q = 2.0 / (p - 1.0);
  const double bound = A + 1.0;
  if (const auto* pt = std::get_if<PowerTail>(&datum.tail); pt && pt->amplitude > bound)
    throw ConstraintError("far-field amplitude exceeds A+1; no tail-onset radius exists");

  const Grid& g = datum.grid;
  std::vector<std::pair<double, double>> samples;  // (r, |x|^q u0)
  samples.reserve(g.size());
  for (Eigen::Index k = 0; k < g.size(); ++k) {
    const double r = g.radius(k);
    samples.emplace_back(r, std::pow(r, q) * datum.values(k));
  }
  std::sort(samples.begin(), samples.end());
  // Walk inwards while the bound holds; B is the radius of the last violator.
  double onset = 0.0;
  for (auto it = samples.rbegin(); it != samples.rend(); ++it) {
    if (it->second > bound) {
      if (it == samples.rbegin())
        throw ConstraintError("datum exceeds (A+1)|x|^{-2/(p-1)} at the box edge");
      onset = it->first;
      break;
    }
  }
  const double floor = std::max(1.0, 2.0 * d);
  return std::max(onset, floor * (1.0 + 1e-9));
}

BarrierPhi choose_constants(const KernelSpec& kernel, double p, const DatumBounds& b,
                            double c2_fraction) {
  const double c2_max = admissible_C2(kernel, p);
  if (b.sup_norm <= 0.0) return {c2_max, c2_max, p};
  if (!(c2_fraction > 0.0) || c2_fraction > 1.0)
    throw ConstraintError("c2_fraction must lie in (0, 1]");
  if (b.A < 0.0) throw ConstraintError("tail constant A must be nonnegative");
  const double floor = std::max(1.0, 2.0 * kernel.support_radius);
  if (!(b.B > floor)) throw ConstraintError("tail-onset radius must exceed max(1, 2d)");

  const double S = std::pow(b.sup_norm, -(p - 1.0));
  double C2 = std::min(c2_fraction * c2_max, 0.5 * std::pow(b.A + 1.0, -(p - 1.0)));
  if (C2 * b.B * b.B >= S) C2 = S / (2.0 * b.B * b.B);
  const double C1 = std::min(C2, S - C2 * b.B * b.B);
  if (!(C1 > 0.0)) throw ConstraintError("no positive C1 satisfies the barrier constraints");
  return {C1, C2, p};
}

double barrier_gap(const BarrierPhi& phi, const Field& field) {
  double gap = std::numeric_limits<double>::infinity();
  for (Eigen::Index k = 0; k < field.values.size(); ++k)
    gap = std::min(gap, phi(field.grid.radius(k)) - field.values(k));
  return gap;
}

BarrierPhi choose_constants(const KernelSpec& kernel, double p, const Field& datum, double A,
                            std::optional<double> B, double c2_fraction) {
  DatumBounds b;
  b.sup_norm = datum.values.size() ? datum.values.maxCoeff() : 0.0;
  b.A = A;
  b.B = B ? *B : tail_onset_radius(datum, A, p, kernel.support_radius);
  const BarrierPhi phi = choose_constants(kernel, p, b, c2_fraction);
  const double gap = barrier_gap(phi, datum);
  if (gap < 0.0)
    throw ConstraintError("barrier fails to dominate the datum (min gap " +
                          std::to_string(gap) + ")");
  return phi;
}

TimeBarrierReport time_barrier_check(const Trajectory& trajectory, double p) {
  TimeBarrierReport rep;
  rep.C_p = TimeBarrier{p, 0.0}.C_p();
  for (const auto& r : trajectory.records)
    if (r.t > 0.0)
      rep.max_ratio = std::max(rep.max_ratio, std::pow(r.t, 1.0 / (p - 1.0)) * r.sup_norm);
  rep.pass = rep.max_ratio <= rep.C_p * (1.0 + 1e-6);
  return rep;
}

}  // namespace nlab
