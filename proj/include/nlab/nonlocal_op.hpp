#pragma once

#include "nlab/field.hpp"
#include "nlab/kernels.hpp"

#include <Eigen/Core>
#include <unsupported/Eigen/FFT>

#include <complex>
#include <functional>
#include <string_view>
#include <vector>

namespace nlab {

enum class Engine { Direct, FastCyclic };

Engine parse_engine(std::string_view name);
std::string_view to_string(Engine engine);

/// Convolution of gridded fields with a fixed discrete stencil.
///
/// Direct sums the stencil in lexicographic order and is the oracle.
/// FastCyclic embeds the padded box in a cyclic FFT workspace whose pad is
/// wider than the stencil radius, so wraparound never reaches physical nodes.
/// The workspace is mutated by every application: one plan per thread.
class ConvolutionPlan {
 public:
  ConvolutionPlan(const Grid& grid, DiscreteStencil stencil,
                  Engine engine = Engine::FastCyclic, bool check_oracle = false);

  const Grid& grid() const { return grid_; }
  const DiscreteStencil& stencil() const { return stencil_; }
  Engine engine() const { return engine_; }
  Eigen::Index pad_width() const { return pad_; }
  bool checks_oracle() const { return check_oracle_; }

  /// Values of J*u at the grid nodes (out-of-box values from the tail law).
  Eigen::ArrayXd apply(const Field& field);
  Eigen::ArrayXd apply(const Field& field, Engine engine);

 private:
  void fill_padded(const Field& field);
  Eigen::ArrayXd apply_direct();
  Eigen::ArrayXd apply_fast(const Field& field);
  void fft2(std::vector<std::complex<double>>& data, bool forward);

  Grid grid_;
  DiscreteStencil stencil_;
  Engine engine_;
  bool check_oracle_;
  Eigen::Index pad_;
  Eigen::Index padded_n_;
  Eigen::ArrayXd weights_;  // stencil weights times h^N
  Eigen::ArrayXd padded_;

  Eigen::Index fft_n_ = 0;
  Eigen::FFT<double> fft_;
  std::vector<std::complex<double>> kernel_hat_;
  std::vector<std::complex<double>> spectrum_;
  std::vector<double> real_line_;
  std::vector<std::complex<double>> line_, line_out_;
};

/// (J*u)(x_i) = sum_j s_j u(x_i - z_j) h^N on the field's grid.
Field convolve(ConvolutionPlan& plan, const Field& field);

/// L u = J*u - u.
Field apply_L(ConvolutionPlan& plan, const Field& field);

/// L_lambda u = lambda^2 (J_lambda*u - u) with J_lambda(z) = lambda^N J(lambda z).
Field apply_L_scaled(const KernelSpec& kernel, double lambda, const Field& field,
                     Engine engine = Engine::Direct);

/// Closed-form test function with its Laplacian, evaluated at (x, y).
struct TestFunction {
  std::function<double(double, double)> value;
  std::function<double(double, double)> laplacian;
};

/// max over interior nodes of |L_lambda g - alpha Delta g|.
///
/// Only nodes whose full stencil footprint lies inside the box are tested, so
/// the result does not depend on any far-field law.
double local_limit_residual(const KernelSpec& kernel, double lambda, const TestFunction& g,
                            double alpha, const Grid& grid);

}  // namespace nlab
