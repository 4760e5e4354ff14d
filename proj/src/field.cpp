#include "nlab/field.hpp"

#include "nlab/error.hpp"

#include <limits>
#include <numbers>
#include <string>

namespace nlab {

DomainMode parse_domain_mode(std::string_view name) {
  if (name == "truncated" || name == "full") return DomainMode::TruncatedFullSpace;
  if (name == "periodic") return DomainMode::Periodic;
  throw ConfigError("unknown domain mode '" + std::string(name) + "'");
}

std::string_view to_string(DomainMode mode) {
  return mode == DomainMode::Periodic ? "periodic" : "truncated";
}

Grid Grid::make(int dim, DomainMode mode, double half_width, double spacing) {
  if (dim != 1 && dim != 2) throw ConfigError("grid dimension must be 1 or 2");
  if (!(half_width > 0.0) || !(spacing > 0.0))
    throw ConfigError("grid half-width and spacing must be positive");
  const double n = 2.0 * half_width / spacing;
  const double rounded = std::round(n);
  if (rounded < 1.0 || std::abs(n - rounded) > 1e-9 * n)
    throw ConfigError("2L/h must be an integer (L=" + std::to_string(half_width) +
                      ", h=" + std::to_string(spacing) + ")");
  Grid g;
  g.dim = dim;
  g.mode = mode;
  g.half_width = half_width;
  g.spacing = spacing;
  g.nodes_per_axis = static_cast<Eigen::Index>(rounded);
  return g;
}

double tail_value(const TailLaw& tail, double r) {
  if (const auto* pt = std::get_if<PowerTail>(&tail))
    return pt->amplitude * std::pow(r, -pt->exponent);
  return 0.0;
}

namespace {

double bump_datum(const CompactBump& b, double r) {
  if (b.radius <= 0.0 || r >= b.radius) return 0.0;
  const double s2 = (r / b.radius) * (r / b.radius);
  return b.amplitude * std::exp(1.0 - 1.0 / (1.0 - s2));
}

}  // namespace

Field sample_datum(const DatumSpec& spec, const Grid& grid) {
  Field f = Field::zeros(grid);
  const Eigen::Index n = grid.size();

  std::visit(
      [&](const auto& d) {
        using T = std::decay_t<decltype(d)>;
        if constexpr (std::is_same_v<T, CompactBump>) {
          if (d.amplitude < 0.0 || d.radius < 0.0)
            throw ConfigError("bump amplitude and radius must be nonnegative");
          for (Eigen::Index k = 0; k < n; ++k) f.values(k) = bump_datum(d, grid.radius(k));
        } else if constexpr (std::is_same_v<T, PowerTailDatum>) {
          if (d.A < 0.0) throw ConfigError("power-tail datum needs A >= 0");
          if (!(d.p > 1.0)) throw ConfigError("power-tail datum needs p > 1");
          const double e = -1.0 / (d.p - 1.0);
          for (Eigen::Index k = 0; k < n; ++k) {
            const double r = grid.radius(k);
            f.values(k) = d.A * std::pow(1.0 + r * r, e);
          }
          if (grid.mode == DomainMode::TruncatedFullSpace)
            f.tail = PowerTail{d.A, 2.0 / (d.p - 1.0)};
        } else if constexpr (std::is_same_v<T, ConstantDatum>) {
          if (d.c < 0.0) throw ConfigError("constant datum must be nonnegative");
          if (grid.mode != DomainMode::Periodic)
            throw ConfigError("constant datum is only admissible on the periodic torus");
          f.values.setConstant(d.c);
        } else {
          if (!d.sampler) throw ConfigError("custom datum without sampler");
          for (Eigen::Index k = 0; k < n; ++k) {
            const auto x = grid.position(k);
            f.values(k) = d.sampler(x[0], x[1]);
          }
          if (grid.mode == DomainMode::TruncatedFullSpace) f.tail = d.tail;
        }
      },
      spec);
  return f;
}

double power_tail_integral(int dim, double half_width, double q) {
  if (q <= dim) return std::numeric_limits<double>::infinity();
  if (dim == 1) return 2.0 * std::pow(half_width, 1.0 - q) / (q - 1.0);
  // Outside the square: 8 L^{2-q}/(q-2) \int_0^{pi/4} cos(theta)^{q-2} dtheta.
  // Composite Simpson in theta.
  constexpr int n = 2048;
  const double dth = (std::numbers::pi / 4.0) / n;
  auto f = [q](double th) { return std::pow(std::cos(th), q - 2.0); };
  double acc = f(0.0) + f(n * dth);
  for (int i = 1; i < n; ++i) acc += (i % 2 ? 4.0 : 2.0) * f(i * dth);
  return 8.0 * std::pow(half_width, 2.0 - q) / (q - 2.0) * acc * dth / 3.0;
}

Norms norms(const Field& field) {
  Norms out;
  if (field.values.size() == 0) return out;
  out.sup_norm = field.values.maxCoeff();
  out.l1_mass = field.values.sum() * field.grid.cell_volume();
  if (const auto* pt = std::get_if<PowerTail>(&field.tail)) {
    if (pt->amplitude != 0.0)
      out.l1_mass += pt->amplitude *
                     power_tail_integral(field.grid.dim, field.grid.half_width, pt->exponent);
  }
  return out;
}

double weighted_sup(const Field& field, double exponent) {
  double best = 0.0;
  for (Eigen::Index k = 0; k < field.values.size(); ++k) {
    const double w = std::pow(1.0 + field.grid.radius(k), exponent) * field.values(k);
    if (k == 0 || w > best) best = w;
  }
  return best;
}

}  // namespace nlab
