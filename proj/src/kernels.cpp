#include "nlab/kernels.hpp"

#include "nlab/error.hpp"

#include <string>

namespace nlab {

KernelFamily parse_kernel_family(std::string_view name) {
  if (name == "bump") return KernelFamily::Bump;
  throw ConfigError("unsupported kernel family '" + std::string(name) + "'");
}

std::string_view to_string(KernelFamily family) {
  switch (family) {
    case KernelFamily::Bump:
      return "bump";
  }
  return "unknown";
}

KernelSpec build_kernel(KernelFamily family, double support_radius, int dim,
                        int quad_resolution) {
  if (family != KernelFamily::Bump)
    throw ConfigError("unsupported kernel family");
  if (dim != 1 && dim != 2)
    throw ConfigError("kernel dimension must be 1 or 2, got " + std::to_string(dim));
  if (!(support_radius > 0.0))
    throw ConfigError("kernel support radius must be positive");
  if (quad_resolution < 64)
    throw ConfigError("kernel quadrature needs at least 64 points across the support");

  const double d = support_radius;
  const double h = 2.0 * d / quad_resolution;
  double mass = 0.0;
  double moment = 0.0;
  if (dim == 1) {
    for (int i = 0; i < quad_resolution; ++i) {
      const double x = -d + (i + 0.5) * h;
      const double f = bump_shape(std::abs(x) / d);
      mass += f;
      moment += f * x * x;
    }
    mass *= h;
    moment *= h;
  } else {
    for (int i = 0; i < quad_resolution; ++i) {
      const double x = -d + (i + 0.5) * h;
      double row_mass = 0.0;
      double row_moment = 0.0;
      for (int j = 0; j < quad_resolution; ++j) {
        const double y = -d + (j + 0.5) * h;
        const double r2 = x * x + y * y;
        const double f = bump_shape(std::sqrt(r2) / d);
        row_mass += f;
        row_moment += f * r2;
      }
      mass += row_mass;
      moment += row_moment;
    }
    mass *= h * h;
    moment *= h * h;
  }

  KernelSpec k;
  k.family = family;
  k.dim = dim;
  k.support_radius = d;
  k.normalization = 1.0 / mass;
  k.second_moment = moment / mass;
  k.quad_resolution = quad_resolution;
  return k;
}

KernelSpec scaled_kernel(const KernelSpec& kernel, double lambda) {
  if (!(lambda > 0.0)) throw DomainError("kernel scale factor must be positive");
  KernelSpec k = kernel;
  k.support_radius = kernel.support_radius / lambda;
  k.normalization = kernel.normalization * std::pow(lambda, kernel.dim);
  k.second_moment = kernel.second_moment / (lambda * lambda);
  return k;
}

double DiscreteStencil::second_moment() const {
  const Eigen::Index w = width();
  double acc = 0.0;
  if (dim == 1) {
    for (Eigen::Index a = 0; a < w; ++a) {
      const double z = static_cast<double>(a - radius) * spacing;
      acc += weights(a) * z * z;
    }
  } else {
    for (Eigen::Index a = 0; a < w; ++a)
      for (Eigen::Index b = 0; b < w; ++b) {
        const double zx = static_cast<double>(a - radius) * spacing;
        const double zy = static_cast<double>(b - radius) * spacing;
        acc += weights(a * w + b) * (zx * zx + zy * zy);
      }
  }
  return acc * cell_volume();
}

DiscreteStencil sample_on_grid(const KernelSpec& kernel, double spacing) {
  const double d = kernel.support_radius;
  if (!(spacing > 0.0) || spacing > d / 4.0 * (1.0 + 1e-12))
    throw ResolutionError("stencil spacing " + std::to_string(spacing) +
                          " does not resolve kernel support " + std::to_string(d) +
                          " (need h <= d/4)");

  DiscreteStencil s;
  s.dim = kernel.dim;
  s.spacing = spacing;
  // Largest offset strictly inside the support.
  Eigen::Index radius = static_cast<Eigen::Index>(std::floor(d / spacing));
  if (static_cast<double>(radius) * spacing >= d) --radius;
  s.radius = radius;

  const Eigen::Index w = s.width();
  if (kernel.dim == 1) {
    s.weights.resize(w);
    for (Eigen::Index a = 0; a < w; ++a)
      s.weights(a) = kernel(std::abs(static_cast<double>(a - radius)) * spacing);
  } else {
    s.weights.resize(w * w);
    for (Eigen::Index a = 0; a < w; ++a)
      for (Eigen::Index b = 0; b < w; ++b) {
        const double zx = static_cast<double>(a - radius) * spacing;
        const double zy = static_cast<double>(b - radius) * spacing;
        s.weights(a * w + b) = kernel(std::sqrt(zx * zx + zy * zy));
      }
  }
  s.weights /= s.weights.sum() * s.cell_volume();
  return s;
}

}  // namespace nlab
