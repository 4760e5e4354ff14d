#pragma once

#include <Eigen/Core>

#include <cmath>
#include <string_view>

namespace nlab {

enum class KernelFamily { Bump };

KernelFamily parse_kernel_family(std::string_view name);
std::string_view to_string(KernelFamily family);

/// Unnormalized bump exp(-1/(1-s^2)) in the scaled radius s = r/d.
template <typename Scalar>
Scalar bump_shape(Scalar s) {
  using std::exp;
  const Scalar s2 = s * s;
  if (s2 >= Scalar(1)) return Scalar(0);
  return exp(Scalar(-1) / (Scalar(1) - s2));
}

/// A smooth, radial, compactly supported dispersal kernel of unit mass.
///
/// J(x) = normalization * bump_shape(|x| / support_radius). The constant and
/// the second moment m2 = \int J(z)|z|^2 dz are computed once by composite
/// midpoint quadrature over [-d, d]^N.
struct KernelSpec {
  KernelFamily family = KernelFamily::Bump;
  int dim = 1;
  double support_radius = 1.0;
  double normalization = 0.0;
  double second_moment = 0.0;
  /// Midpoint nodes per axis across the diameter of the support.
  int quad_resolution = 512;

  double operator()(double r) const {
    return normalization * bump_shape(r / support_radius);
  }
};

KernelSpec build_kernel(KernelFamily family, double support_radius, int dim,
                        int quad_resolution = 512);

/// Diffusivity of the local limit, m2 / (2N).
inline double alpha(const KernelSpec& kernel) {
  return kernel.second_moment / (2.0 * kernel.dim);
}

/// J_lambda(z) = lambda^N J(lambda z): support d/lambda, second moment m2/lambda^2.
KernelSpec scaled_kernel(const KernelSpec& kernel, double lambda);

/// Kernel samples on integer multiples of the grid spacing.
///
/// weights has (2 radius + 1)^dim entries, row-major over offsets
/// (-radius..radius) per axis, and is renormalized so that
/// weights.sum() * spacing^dim == 1.
struct DiscreteStencil {
  int dim = 1;
  double spacing = 0.0;
  Eigen::Index radius = 0;
  Eigen::ArrayXd weights;

  Eigen::Index width() const { return 2 * radius + 1; }
  double cell_volume() const { return std::pow(spacing, dim); }

  /// Discrete second moment sum_i s_i |z_i|^2 h^N.
  double second_moment() const;
};

DiscreteStencil sample_on_grid(const KernelSpec& kernel, double spacing);

}  // namespace nlab
