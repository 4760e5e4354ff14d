#include "nlab/error.hpp"
#include "nlab/kernels.hpp"
#include "oracles.hpp"

#include <doctest.h>

using namespace nlab;

TEST_CASE("bump kernel has unit mass and the quadrature second moment") {
  for (int dim : {1, 2}) {
    for (double d : {1.0, 2.0, 0.5}) {
      CAPTURE(dim);
      CAPTURE(d);
      const KernelSpec k = build_kernel(KernelFamily::Bump, d, dim);
      CHECK(k.normalization == doctest::Approx(oracle::bump_normalization(dim) / std::pow(d, dim))
                                   .epsilon(1e-10));
      CHECK(k.second_moment == doctest::Approx(oracle::bump_second_moment(dim, d)).epsilon(1e-10));
    }
  }
}

TEST_CASE("1D constants") {
  const KernelSpec k = build_kernel(KernelFamily::Bump, 1.0, 1);
  CHECK(k.normalization == doctest::Approx(2.2522836210435813).epsilon(1e-12));
  CHECK(k.second_moment == doctest::Approx(0.15811363626379826).epsilon(1e-10));
  CHECK(alpha(k) == doctest::Approx(k.second_moment / 2.0));
}

TEST_CASE("kernel is radial, nonnegative and supported on the ball") {
  const KernelSpec k = build_kernel(KernelFamily::Bump, 1.5, 2);
  CHECK(k(1.5) == 0.0);
  CHECK(k(2.0) == 0.0);
  CHECK(k(0.0) > k(0.5));
  CHECK(k(0.5) > k(1.4));
  CHECK(k(1.4999) >= 0.0);
}

TEST_CASE("scaled kernel shrinks support and second moment") {
  const KernelSpec k = build_kernel(KernelFamily::Bump, 1.0, 2);
  for (double lambda : {2.0, 4.0, 16.0}) {
    const KernelSpec s = scaled_kernel(k, lambda);
    CHECK(s.support_radius == doctest::Approx(1.0 / lambda));
    CHECK(s.second_moment == doctest::Approx(k.second_moment / (lambda * lambda)));
    CHECK(s(0.3 / lambda) == doctest::Approx(lambda * lambda * k(0.3)));
  }
  CHECK_THROWS_AS(scaled_kernel(k, 0.0), DomainError);
}

TEST_CASE("stencil is symmetric and normalized") {
  for (int dim : {1, 2}) {
    const KernelSpec k = build_kernel(KernelFamily::Bump, 1.0, dim);
    const DiscreteStencil s = sample_on_grid(k, 0.1);
    CHECK(s.radius == 9);  // J vanishes at |z| = d
    CHECK(s.weights.sum() * s.cell_volume() == doctest::Approx(1.0).epsilon(1e-14));
    const auto n = s.weights.size();
    for (Eigen::Index i = 0; i < n; ++i) CHECK(s.weights(i) == doctest::Approx(s.weights(n - 1 - i)));
    CHECK(s.second_moment() == doctest::Approx(k.second_moment).epsilon(1e-3));
  }
}

TEST_CASE("stencil too coarse for the kernel") {
  const KernelSpec k = build_kernel(KernelFamily::Bump, 1.0, 1);
  CHECK_THROWS_AS(sample_on_grid(k, 2.0), ResolutionError);
}

TEST_CASE("kernel configuration errors") {
  CHECK(parse_kernel_family("bump") == KernelFamily::Bump);
  CHECK(to_string(KernelFamily::Bump) == "bump");
  CHECK_THROWS_AS(parse_kernel_family("gauss"), ConfigError);
  CHECK_THROWS_AS(build_kernel(KernelFamily::Bump, 1.0, 3), ConfigError);
  CHECK_THROWS_AS(build_kernel(KernelFamily::Bump, -1.0, 1), ConfigError);
  CHECK_THROWS_AS(build_kernel(KernelFamily::Bump, 1.0, 1, 8), ConfigError);
}

TEST_CASE("first moment vanishes and alpha scales with d^2") {
  const KernelSpec k = build_kernel(KernelFamily::Bump, 1.0, 1);
  CHECK(std::abs(oracle::simpson([&](double z) { return z * k(std::abs(z)); }, -1.0, 1.0)) < 1e-15);
  const KernelSpec k2 = build_kernel(KernelFamily::Bump, 2.0, 1);
  CHECK(alpha(k2) == doctest::Approx(4.0 * alpha(k)).epsilon(1e-12));
  KernelSpec hyp = k;
  hyp.second_moment = 2.0;
  CHECK(alpha(hyp) == 1.0);
}

TEST_CASE("unit scaling is the identity") {
  const KernelSpec k = build_kernel(KernelFamily::Bump, 1.3, 2);
  const KernelSpec s = scaled_kernel(k, 1.0);
  CHECK(s.support_radius == k.support_radius);
  CHECK(s.normalization == doctest::Approx(k.normalization));
  CHECK(s.second_moment == doctest::Approx(k.second_moment));
}

TEST_CASE("scaled kernel second moment against direct quadrature") {
  const KernelSpec s = scaled_kernel(build_kernel(KernelFamily::Bump, 1.0, 1), 2.0);
  const double m2 = oracle::simpson([&](double z) { return z * z * s(std::abs(z)); }, -0.5, 0.5);
  CHECK(s.second_moment == doctest::Approx(m2).epsilon(1e-10));
}

TEST_CASE("discrete second moment converges under refinement") {
  const KernelSpec k = build_kernel(KernelFamily::Bump, 1.0, 1);
  double prev = std::abs(sample_on_grid(k, 0.25).second_moment() - k.second_moment);
  for (double h : {0.125, 0.0625}) {
    const double err = std::abs(sample_on_grid(k, h).second_moment() - k.second_moment);
    CHECK(err <= std::max(prev / 4.0, 1e-13));
    prev = err;
  }
}
