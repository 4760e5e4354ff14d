#pragma once

#include <Eigen/Core>

#include <array>
#include <cmath>
#include <functional>
#include <string_view>
#include <variant>

namespace nlab {

enum class DomainMode { TruncatedFullSpace, Periodic };

DomainMode parse_domain_mode(std::string_view name);
std::string_view to_string(DomainMode mode);

/// Uniform cell-centred grid on [-L, L]^N.
///
/// Node i along an axis sits at (i + 1/2) h - L; there are 2L/h nodes per
/// axis and 2D values are stored row-major (first axis slowest).
struct Grid {
  int dim = 1;
  DomainMode mode = DomainMode::TruncatedFullSpace;
  double half_width = 0.0;
  double spacing = 0.0;
  Eigen::Index nodes_per_axis = 0;

  static Grid make(int dim, DomainMode mode, double half_width, double spacing);

  Eigen::Index size() const {
    return dim == 1 ? nodes_per_axis : nodes_per_axis * nodes_per_axis;
  }
  double axis_coord(Eigen::Index i) const {
    return (static_cast<double>(i) + 0.5) * spacing - half_width;
  }
  std::array<double, 2> position(Eigen::Index k) const {
    if (dim == 1) return {axis_coord(k), 0.0};
    return {axis_coord(k / nodes_per_axis), axis_coord(k % nodes_per_axis)};
  }
  double radius(Eigen::Index k) const {
    const auto x = position(k);
    return std::hypot(x[0], x[1]);
  }
  double cell_volume() const { return std::pow(spacing, dim); }

  friend bool operator==(const Grid&, const Grid&) = default;
};

/// Far field outside the box is zero.
struct ZeroTail {
  friend bool operator==(const ZeroTail&, const ZeroTail&) = default;
};

/// Far field u(x) = amplitude * |x|^-exponent for |x| beyond the box.
struct PowerTail {
  double amplitude = 0.0;
  double exponent = 0.0;
  friend bool operator==(const PowerTail&, const PowerTail&) = default;
};

using TailLaw = std::variant<ZeroTail, PowerTail>;

double tail_value(const TailLaw& tail, double r);

/// Gridded state u(., t) together with its far-field law.
struct Field {
  Grid grid;
  Eigen::ArrayXd values;
  double time = 0.0;
  TailLaw tail = ZeroTail{};

  static Field zeros(const Grid& grid) {
    return Field{grid, Eigen::ArrayXd::Zero(grid.size()), 0.0, ZeroTail{}};
  }
};

/// amplitude * exp(1 - 1/(1 - |x|^2/radius^2)) on |x| < radius.
struct CompactBump {
  double amplitude = 1.0;
  double radius = 1.0;
};

/// A (1 + |x|^2)^{-1/(p-1)}; |x|^{2/(p-1)} u0 -> A at infinity.
struct PowerTailDatum {
  double A = 1.0;
  double p = 1.5;
};

struct ConstantDatum {
  double c = 0.0;
};

struct CustomDatum {
  std::function<double(double, double)> sampler;
  TailLaw tail = ZeroTail{};
};

using DatumSpec = std::variant<CompactBump, PowerTailDatum, ConstantDatum, CustomDatum>;

Field sample_datum(const DatumSpec& spec, const Grid& grid);

struct Norms {
  double sup_norm = 0.0;
  double l1_mass = 0.0;
};

/// Sup norm and Riemann-sum mass, the latter including the analytic mass of
/// a power tail outside the box (+infinity when the tail is not integrable).
Norms norms(const Field& field);

/// max over nodes of (1 + |x|)^exponent * u(x).
double weighted_sup(const Field& field, double exponent);

/// \int_{outside box} |x|^-q dx for the box [-L, L]^N (q > N).
double power_tail_integral(int dim, double half_width, double q);

}  // namespace nlab
