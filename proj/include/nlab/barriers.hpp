#pragma once

#include "nlab/evolve.hpp"
#include "nlab/field.hpp"
#include "nlab/kernels.hpp"

#include <cmath>
#include <optional>
#include <vector>

namespace nlab {

/// phi(x) = (C1 + C2 |x|^2)^{-1/(p-1)}.
struct BarrierPhi {
  double C1 = 0.0;
  double C2 = 0.0;
  double p = 2.0;

  template <typename Scalar>
  Scalar operator()(Scalar r) const {
    using std::pow;
    return pow(Scalar(C1) + Scalar(C2) * r * r, Scalar(-1.0 / (p - 1.0)));
  }
};

/// g(t) = C_p (t + t0)^{-1/(p-1)}, the solution of g' = -g^p blowing up at -t0.
struct TimeBarrier {
  double p = 2.0;
  double t0 = 0.0;

  double C_p() const { return std::pow(p - 1.0, -1.0 / (p - 1.0)); }
  double operator()(double t) const { return C_p() * std::pow(t + t0, -1.0 / (p - 1.0)); }
  double derivative(double t) const {
    return -C_p() / (p - 1.0) * std::pow(t + t0, -p / (p - 1.0));
  }
};

/// Largest C2 for which phi is a supersolution on |x| >= 2d.
double admissible_C2(const KernelSpec& kernel, double p);

struct SupersolutionRow {
  Eigen::Index node = 0;
  double r = 0.0;
  double L_phi = 0.0;
  double phi_p = 0.0;
  double margin = 0.0;     // phi^p - L phi
  double tolerance = 0.0;  // allowed negative margin
};

struct SupersolutionReport {
  std::vector<SupersolutionRow> rows;
  double max_excess = -std::numeric_limits<double>::infinity();  // max of L phi - phi^p
  bool pass = true;
};

/// Check L phi <= phi^p at grid nodes with |x| >= 2d lying more than d inside
/// the box. phi is evaluated in closed form at every stencil point.
SupersolutionReport verify_supersolution(const KernelSpec& kernel, const BarrierPhi& phi,
                                         const Grid& grid);

/// What choose_constants needs to know about a datum.
struct DatumBounds {
  double sup_norm = 0.0;
  double A = 0.0;  // limit of |x|^{2/(p-1)} u0
  double B = 0.0;  // |x|^{2/(p-1)} u0 <= A + 1 for |x| >= B; B > max(1, 2d)
};

/// Smallest radius past which |x|^{2/(p-1)} u0 <= A + 1 at every node, bumped
/// above max(1, 2d). Throws ConstraintError when the outermost nodes or the
/// far-field law already violate the bound.
double tail_onset_radius(const Field& datum, double A, double p, double d);

/// Closed-form constants: C2 <= c2_fraction * C2_max, (2 C2)^{-1/(p-1)} >= A + 1,
/// (C1 + C2 B^2)^{-1/(p-1)} >= sup u0 and C1 <= C2.
BarrierPhi choose_constants(const KernelSpec& kernel, double p, const DatumBounds& bounds,
                            double c2_fraction = 0.5);

/// As above with bounds measured from the gridded datum, then phi >= u0 is
/// checked at every node (ConstraintError otherwise).
BarrierPhi choose_constants(const KernelSpec& kernel, double p, const Field& datum, double A,
                            std::optional<double> B = {}, double c2_fraction = 0.5);

/// min over nodes of phi - u; nonnegative when phi dominates the field.
double barrier_gap(const BarrierPhi& phi, const Field& field);

struct TimeBarrierReport {
  double max_ratio = 0.0;  // max over checkpoints t > 0 of t^{1/(p-1)} sup u
  double C_p = 0.0;
  bool pass = true;
};

TimeBarrierReport time_barrier_check(const Trajectory& trajectory, double p);

}  // namespace nlab
