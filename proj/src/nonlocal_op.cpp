#include "nlab/nonlocal_op.hpp"

#include "nlab/error.hpp"

#include <string>

namespace nlab {

Engine parse_engine(std::string_view name) {
  if (name == "direct") return Engine::Direct;
  if (name == "fast") return Engine::FastCyclic;
  throw ConfigError("unknown convolution engine '" + std::string(name) + "'");
}

std::string_view to_string(Engine engine) {
  return engine == Engine::Direct ? "direct" : "fast";
}

namespace {

// Smallest even 2-3-5 smooth integer >= n.
Eigen::Index smooth_fft_size(Eigen::Index n) {
  for (Eigen::Index m = std::max<Eigen::Index>(n, 2);; ++m) {
    if (m % 2) continue;
    Eigen::Index r = m;
    for (Eigen::Index f : {2, 3, 5})
      while (r % f == 0) r /= f;
    if (r == 1) return m;
  }
}

Eigen::Index wrap(Eigen::Index i, Eigen::Index n) {
  const Eigen::Index r = i % n;
  return r < 0 ? r + n : r;
}

}  // namespace

ConvolutionPlan::ConvolutionPlan(const Grid& grid, DiscreteStencil stencil, Engine engine,
                                 bool check_oracle)
    : grid_(grid),
      stencil_(std::move(stencil)),
      engine_(engine),
      check_oracle_(check_oracle) {
  if (stencil_.dim != grid_.dim) throw UsageError("stencil and grid dimensions differ");
  if (std::abs(stencil_.spacing - grid_.spacing) > 1e-12 * grid_.spacing)
    throw UsageError("stencil spacing does not match the grid spacing");

  const Eigen::Index n = grid_.nodes_per_axis;
  const Eigen::Index r = stencil_.radius;
  pad_ = r + 1;
  if (grid_.mode == DomainMode::Periodic && n < 2 * r + 1)
    throw UsageError("kernel is wider than the periodic box");
  padded_n_ = n + 2 * pad_;
  weights_ = stencil_.weights * stencil_.cell_volume();
  padded_.resize(grid_.dim == 1 ? padded_n_ : padded_n_ * padded_n_);

  fft_n_ = grid_.mode == DomainMode::Periodic ? n : smooth_fft_size(padded_n_);
  const Eigen::Index m = fft_n_;
  const Eigen::Index w = stencil_.width();
  if (grid_.dim == 1) {
    if (m % 2 == 0) fft_.SetFlag(Eigen::FFT<double>::HalfSpectrum);
    std::vector<double> k(m, 0.0);
    for (Eigen::Index a = 0; a < w; ++a) k[wrap(a - r, m)] += weights_(a);
    if (m % 2 == 0) {
      fft_.fwd(kernel_hat_, k);
    } else {
      std::vector<std::complex<double>> kc(k.begin(), k.end());
      fft_.fwd(kernel_hat_, kc);
    }
  } else {
    kernel_hat_.assign(m * m, {0.0, 0.0});
    for (Eigen::Index a = 0; a < w; ++a)
      for (Eigen::Index b = 0; b < w; ++b)
        kernel_hat_[wrap(a - r, m) * m + wrap(b - r, m)] += weights_(a * w + b);
    fft2(kernel_hat_, true);
  }
}

void ConvolutionPlan::fill_padded(const Field& field) {
  const Eigen::Index n = grid_.nodes_per_axis;
  const bool periodic = grid_.mode == DomainMode::Periodic;
  auto outside = [&](Eigen::Index i, Eigen::Index j) {
    const double x = grid_.axis_coord(i);
    const double y = grid_.dim == 1 ? 0.0 : grid_.axis_coord(j);
    return tail_value(field.tail, std::hypot(x, y));
  };
  if (grid_.dim == 1) {
    for (Eigen::Index a = 0; a < padded_n_; ++a) {
      const Eigen::Index i = a - pad_;
      if (i >= 0 && i < n)
        padded_(a) = field.values(i);
      else
        padded_(a) = periodic ? field.values(wrap(i, n)) : outside(i, 0);
    }
  } else {
    for (Eigen::Index a = 0; a < padded_n_; ++a) {
      const Eigen::Index i = a - pad_;
      for (Eigen::Index b = 0; b < padded_n_; ++b) {
        const Eigen::Index j = b - pad_;
        double& dst = padded_(a * padded_n_ + b);
        if (i >= 0 && i < n && j >= 0 && j < n)
          dst = field.values(i * n + j);
        else if (periodic)
          dst = field.values(wrap(i, n) * n + wrap(j, n));
        else
          dst = outside(i, j);
      }
    }
  }
}

Eigen::ArrayXd ConvolutionPlan::apply_direct() {
  const Eigen::Index n = grid_.nodes_per_axis;
  const Eigen::Index r = stencil_.radius;
  const Eigen::Index w = stencil_.width();
  Eigen::ArrayXd out(grid_.size());
  if (grid_.dim == 1) {
    for (Eigen::Index i = 0; i < n; ++i) {
      const Eigen::Index base = i + pad_ + r;
      double acc = 0.0;
      for (Eigen::Index a = 0; a < w; ++a) acc += weights_(a) * padded_(base - a);
      out(i) = acc;
    }
  } else {
    for (Eigen::Index i = 0; i < n; ++i)
      for (Eigen::Index j = 0; j < n; ++j) {
        const Eigen::Index bi = i + pad_ + r;
        const Eigen::Index bj = j + pad_ + r;
        double acc = 0.0;
        for (Eigen::Index a = 0; a < w; ++a) {
          const double* row = padded_.data() + (bi - a) * padded_n_;
          const double* wa = weights_.data() + a * w;
          for (Eigen::Index b = 0; b < w; ++b) acc += wa[b] * row[bj - b];
        }
        out(i * n + j) = acc;
      }
  }
  return out;
}

void ConvolutionPlan::fft2(std::vector<std::complex<double>>& data, bool forward) {
  const Eigen::Index m = fft_n_;
  line_.resize(m);
  for (Eigen::Index row = 0; row < m; ++row) {
    std::copy_n(data.begin() + row * m, m, line_.begin());
    if (forward)
      fft_.fwd(line_out_, line_);
    else
      fft_.inv(line_out_, line_);
    std::copy_n(line_out_.begin(), m, data.begin() + row * m);
  }
  for (Eigen::Index col = 0; col < m; ++col) {
    for (Eigen::Index row = 0; row < m; ++row) line_[row] = data[row * m + col];
    if (forward)
      fft_.fwd(line_out_, line_);
    else
      fft_.inv(line_out_, line_);
    for (Eigen::Index row = 0; row < m; ++row) data[row * m + col] = line_out_[row];
  }
}

Eigen::ArrayXd ConvolutionPlan::apply_fast(const Field& field) {
  const Eigen::Index n = grid_.nodes_per_axis;
  const Eigen::Index m = fft_n_;
  const bool periodic = grid_.mode == DomainMode::Periodic;
  const Eigen::Index src_n = periodic ? n : padded_n_;
  const Eigen::Index offset = periodic ? 0 : pad_;
  Eigen::ArrayXd out(grid_.size());

  if (grid_.dim == 1) {
    const double* src = periodic ? field.values.data() : padded_.data();
    if (m % 2 == 0) {
      real_line_.assign(m, 0.0);
      std::copy_n(src, src_n, real_line_.begin());
      fft_.fwd(spectrum_, real_line_);
      for (std::size_t k = 0; k < spectrum_.size(); ++k) spectrum_[k] *= kernel_hat_[k];
      fft_.inv(real_line_, spectrum_, m);
      for (Eigen::Index i = 0; i < n; ++i) out(i) = real_line_[i + offset];
    } else {
      line_.assign(m, {0.0, 0.0});
      for (Eigen::Index i = 0; i < src_n; ++i) line_[i] = src[i];
      fft_.fwd(spectrum_, line_);
      for (std::size_t k = 0; k < spectrum_.size(); ++k) spectrum_[k] *= kernel_hat_[k];
      fft_.inv(line_, spectrum_);
      for (Eigen::Index i = 0; i < n; ++i) out(i) = line_[i + offset].real();
    }
    return out;
  }

  spectrum_.assign(m * m, {0.0, 0.0});
  for (Eigen::Index a = 0; a < src_n; ++a)
    for (Eigen::Index b = 0; b < src_n; ++b)
      spectrum_[a * m + b] =
          periodic ? field.values(a * n + b) : padded_(a * padded_n_ + b);
  fft2(spectrum_, true);
  for (std::size_t k = 0; k < spectrum_.size(); ++k) spectrum_[k] *= kernel_hat_[k];
  fft2(spectrum_, false);
  for (Eigen::Index i = 0; i < n; ++i)
    for (Eigen::Index j = 0; j < n; ++j)
      out(i * n + j) = spectrum_[(i + offset) * m + (j + offset)].real();
  return out;
}

Eigen::ArrayXd ConvolutionPlan::apply(const Field& field, Engine engine) {
  if (!(field.grid == grid_)) throw UsageError("field grid does not match the plan");
  if (engine == Engine::FastCyclic) {
    if (grid_.mode != DomainMode::Periodic) fill_padded(field);
    return apply_fast(field);
  }
  fill_padded(field);
  return apply_direct();
}

Eigen::ArrayXd ConvolutionPlan::apply(const Field& field) {
  Eigen::ArrayXd out = apply(field, engine_);
  if (check_oracle_) {
    const Engine other = engine_ == Engine::Direct ? Engine::FastCyclic : Engine::Direct;
    const double diff = (out - apply(field, other)).abs().maxCoeff();
    if (diff > 1e-12)
      throw OracleMismatch("convolution engines disagree by " + std::to_string(diff));
  }
  return out;
}

Field convolve(ConvolutionPlan& plan, const Field& field) {
  Field out = field;
  out.values = plan.apply(field);
  return out;
}

Field apply_L(ConvolutionPlan& plan, const Field& field) {
  Field out = field;
  out.values = plan.apply(field) - field.values;
  return out;
}

Field apply_L_scaled(const KernelSpec& kernel, double lambda, const Field& field,
                     Engine engine) {
  const KernelSpec scaled = scaled_kernel(kernel, lambda);
  ConvolutionPlan plan(field.grid, sample_on_grid(scaled, field.grid.spacing), engine);
  Field out = field;
  out.values = lambda * lambda * (plan.apply(field) - field.values);
  return out;
}

double local_limit_residual(const KernelSpec& kernel, double lambda, const TestFunction& g,
                            double alpha, const Grid& grid) {
  Field f = Field::zeros(grid);
  for (Eigen::Index k = 0; k < grid.size(); ++k) {
    const auto x = grid.position(k);
    f.values(k) = g.value(x[0], x[1]);
  }
  const Field lg = apply_L_scaled(kernel, lambda, f, Engine::Direct);
  const Eigen::Index r = sample_on_grid(scaled_kernel(kernel, lambda), grid.spacing).radius;
  const Eigen::Index n = grid.nodes_per_axis;
  auto interior = [&](Eigen::Index i) { return i - r >= 0 && i + r <= n - 1; };

  double worst = 0.0;
  for (Eigen::Index k = 0; k < grid.size(); ++k) {
    const Eigen::Index i = grid.dim == 1 ? k : k / n;
    const Eigen::Index j = grid.dim == 1 ? r : k % n;
    if (!interior(i) || !interior(j)) continue;
    const auto x = grid.position(k);
    worst = std::max(worst, std::abs(lg.values(k) - alpha * g.laplacian(x[0], x[1])));
  }
  return worst;
}

}  // namespace nlab
