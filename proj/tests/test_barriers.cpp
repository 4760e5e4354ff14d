#include "nlab/barriers.hpp"
#include "nlab/error.hpp"
#include "oracles.hpp"

#include <doctest.h>

using namespace nlab;

namespace {

const KernelSpec& k1() {
  static const KernelSpec k = build_kernel(KernelFamily::Bump, 1.0, 1);
  return k;
}

}  // namespace

TEST_CASE("admissible C2") {
  const double m2 = k1().second_moment;
  CHECK(admissible_C2(k1(), 1.5) == doctest::Approx(0.25 / (3.0 * 64.0 * m2)));
  CHECK(admissible_C2(k1(), 2.0) == doctest::Approx(1.0 / (4.0 * 16.0 * m2)));
}

TEST_CASE("time barrier solves g' = -g^p") {
  for (double p : {1.5, 2.0, 2.7}) {
    const TimeBarrier g{p, 0.3};
    for (double t : {0.1, 1.0, 10.0}) {
      CHECK(g.derivative(t) == doctest::Approx(-std::pow(g(t), p)).epsilon(1e-12));
      const double fd = (g(t + 1e-5) - g(t - 1e-5)) / 2e-5;
      CHECK(g.derivative(t) == doctest::Approx(fd).epsilon(1e-6));
    }
  }
  CHECK(TimeBarrier{1.5, 0.0}.C_p() == doctest::Approx(4.0));
}

TEST_CASE("barrier phi shape") {
  const BarrierPhi phi{0.2, 0.1, 1.5};
  CHECK(phi(0.0) == doctest::Approx(std::pow(0.2, -2.0)));
  CHECK(phi(3.0) == doctest::Approx(std::pow(0.2 + 0.9, -2.0)));
  CHECK(phi(10.0) < phi(5.0));
}

TEST_CASE("L phi rows agree with the continuous integral") {
  const BarrierPhi phi{0.01, 0.004, 1.5};
  const Grid g = Grid::make(1, DomainMode::TruncatedFullSpace, 10.0, 0.05);
  const SupersolutionReport rep = verify_supersolution(k1(), phi, g);
  REQUIRE(!rep.rows.empty());
  for (std::size_t i = 0; i < rep.rows.size(); i += 37) {
    const double r = rep.rows[i].r;
    const double Jphi = oracle::simpson(
        [&](double z) { return k1()(std::abs(z)) * phi(std::abs(r - z)); }, -1.0, 1.0);
    CHECK(rep.rows[i].L_phi == doctest::Approx(Jphi - phi(r)).epsilon(1e-4));
  }
}

TEST_CASE("phi with admissible constants is a supersolution away from the origin") {
  for (double p : {1.5, 1.8, 2.5}) {
    const double c2 = 0.5 * admissible_C2(k1(), p);
    for (double c1 : {0.01 * c2, c2}) {
      const Grid g = Grid::make(1, DomainMode::TruncatedFullSpace, 30.0, 0.05);
      const SupersolutionReport rep = verify_supersolution(k1(), BarrierPhi{c1, c2, p}, g);
      CAPTURE(p);
      CHECK(rep.pass);
      for (const auto& row : rep.rows) {
        CHECK(row.r >= 2.0);
        CHECK(row.r < 29.0);
      }
    }
  }
  const KernelSpec k2 = build_kernel(KernelFamily::Bump, 1.0, 2);
  const double c2 = 0.5 * admissible_C2(k2, 1.5);
  const SupersolutionReport rep =
      verify_supersolution(k2, BarrierPhi{c2, c2, 1.5}, Grid::make(2, DomainMode::TruncatedFullSpace, 6.0, 0.1));
  CHECK(rep.pass);
  CHECK(!rep.rows.empty());
}

TEST_CASE("steep phi is not a supersolution") {
  const double c2 = 1e4 * admissible_C2(k1(), 1.5);
  const Grid g = Grid::make(1, DomainMode::TruncatedFullSpace, 10.0, 0.05);
  const SupersolutionReport rep = verify_supersolution(k1(), BarrierPhi{1e-6, c2, 1.5}, g);
  CHECK_FALSE(rep.pass);
  CHECK(rep.max_excess > 0.0);
}

TEST_CASE("chosen constants satisfy their constraints") {
  const double p = 1.5;
  const double c2_max = admissible_C2(k1(), p);
  for (double sup : {0.1, 1.0, 10.0})
    for (double A : {0.0, 1.0, 5.0})
      for (double B : {2.5, 5.0}) {
        const BarrierPhi phi = choose_constants(k1(), p, DatumBounds{sup, A, B}, 0.5);
        CAPTURE(sup);
        CAPTURE(A);
        CAPTURE(B);
        CHECK(phi.C2 <= 0.5 * c2_max * (1.0 + 1e-12));
        CHECK(phi.C1 <= phi.C2 * (1.0 + 1e-12));
        CHECK(phi.C1 > 0.0);
        CHECK(std::pow(2.0 * phi.C2, -1.0 / (p - 1.0)) >= (A + 1.0) * (1.0 - 1e-12));
        CHECK(phi(B) >= sup * (1.0 - 1e-12));
      }
  const BarrierPhi zero = choose_constants(k1(), p, DatumBounds{0.0, 0.0, 3.0});
  CHECK(zero.C1 == doctest::Approx(c2_max));
  CHECK_THROWS_AS(choose_constants(k1(), p, DatumBounds{1.0, 0.0, 1.5}), ConstraintError);
  CHECK_THROWS_AS(choose_constants(k1(), p, DatumBounds{1.0, -1.0, 3.0}), ConstraintError);
  CHECK_THROWS_AS(choose_constants(k1(), p, DatumBounds{1.0, 0.0, 3.0}, 1.5), ConstraintError);
}

TEST_CASE("constants from a gridded datum dominate it") {
  const Grid g = Grid::make(1, DomainMode::TruncatedFullSpace, 20.0, 0.05);
  const Field bump = sample_datum(CompactBump{3.0, 2.0}, g);
  const BarrierPhi phi = choose_constants(k1(), 1.5, bump, 0.0);
  CHECK(barrier_gap(phi, bump) >= 0.0);

  const Field tail = sample_datum(PowerTailDatum{1.0, 1.5}, g);
  const BarrierPhi phi2 = choose_constants(k1(), 1.5, tail, 1.0);
  CHECK(barrier_gap(phi2, tail) >= 0.0);
  const Field heavy = sample_datum(PowerTailDatum{3.0, 1.5}, g);
  CHECK_THROWS_AS(choose_constants(k1(), 1.5, heavy, 0.0), ConstraintError);
}

TEST_CASE("tail onset radius") {
  const Grid g = Grid::make(1, DomainMode::TruncatedFullSpace, 20.0, 0.05);
  const Field bump = sample_datum(CompactBump{3.0, 5.0}, g);
  const double B = tail_onset_radius(bump, 0.0, 1.5, 1.0);
  CHECK(B > 2.0);
  CHECK(B < 5.0);
  for (Eigen::Index k = 0; k < g.size(); ++k)
    if (g.radius(k) > B) CHECK(std::pow(g.radius(k), 4.0) * bump.values(k) <= 1.0);
  CHECK(tail_onset_radius(sample_datum(CompactBump{0.0, 1.0}, g), 0.0, 1.5, 1.0) ==
        doctest::Approx(2.0));
}

TEST_CASE("time barrier check on a trajectory") {
  Trajectory t;
  t.records = {{0.0, 9.0}, {1.0, 3.9}, {4.0, 0.24}};
  const TimeBarrierReport ok = time_barrier_check(t, 1.5);
  CHECK(ok.pass);
  CHECK(ok.max_ratio == doctest::Approx(3.9));
  t.records.push_back({10.0, 0.05});
  CHECK_FALSE(time_barrier_check(t, 1.5).pass);
}

TEST_CASE("admissible C2 scales inversely with m2") {
  const KernelSpec k2 = build_kernel(KernelFamily::Bump, 2.0, 1);
  CHECK(admissible_C2(k2, 1.5) == doctest::Approx(admissible_C2(k1(), 1.5) / 4.0));
}

TEST_CASE("tiny C2 passes trivially, huge C2 fails") {
  const Grid g = Grid::make(1, DomainMode::TruncatedFullSpace, 10.0, 0.05);
  const double c2 = admissible_C2(k1(), 1.5);
  CHECK(verify_supersolution(k1(), BarrierPhi{0.5, 1e-9 * c2, 1.5}, g).pass);
  CHECK_FALSE(verify_supersolution(k1(), BarrierPhi{c2, 1000.0 * c2, 1.5}, g).pass);
}

TEST_CASE("doubling a binding sup norm shrinks C1 + C2 B^2 by 2^(p-1)") {
  for (double p : {1.5, 2.0}) {
    const BarrierPhi a = choose_constants(k1(), p, DatumBounds{1e4, 0.0, 2.5});
    const BarrierPhi b = choose_constants(k1(), p, DatumBounds{2e4, 0.0, 2.5});
    const double sa = a.C1 + a.C2 * 6.25, sb = b.C1 + b.C2 * 6.25;
    CHECK(sa / sb == doctest::Approx(std::pow(2.0, p - 1.0)));
  }
}

TEST_CASE("time barrier on exact trajectories") {
  Trajectory zero;
  zero.records = {{0.0, 0.0}, {1.0, 0.0}};
  CHECK(time_barrier_check(zero, 1.5).pass);
  const Grid g = Grid::make(1, DomainMode::Periodic, 3.0, 0.1);
  EvolveParams ep;
  ep.p = 2.0;
  ep.dt = 0.01;
  ep.t_end = 20.0;
  const TimeBarrierReport rep = time_barrier_check(run(ConstantDatum{1.0}, k1(), g, ep), 2.0);
  CHECK(rep.pass);
  CHECK(rep.C_p == 1.0);
  CHECK(rep.max_ratio < 1.0);
}
