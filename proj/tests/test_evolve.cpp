#include "nlab/error.hpp"
#include "nlab/evolve.hpp"

#include <doctest.h>

#include <random>

using namespace nlab;

namespace {

const KernelSpec& k1() {
  static const KernelSpec k = build_kernel(KernelFamily::Bump, 1.0, 1);
  return k;
}

EvolveParams params(double p, double dt, double t_end) {
  EvolveParams ep;
  ep.p = p;
  ep.dt = dt;
  ep.t_end = t_end;
  return ep;
}

Field random_datum(const Grid& g, std::uint64_t seed, double scale = 1.0) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> unif(0.0, scale);
  Field f = Field::zeros(g);
  for (Eigen::Index k = 0; k < g.size(); ++k)
    if (std::abs(g.position(k)[0]) < 3.0) f.values(k) = unif(rng);
  return f;
}

}  // namespace

TEST_CASE("signed power") {
  Eigen::ArrayXd w(4);
  w << -4.0, 0.0, 1.0, 9.0;
  for (double p : {1.5, 2.0, 1.3}) {
    const Eigen::ArrayXd s = signed_power(w, p);
    for (int i = 0; i < 4; ++i)
      CHECK(s(i) == doctest::Approx((w(i) < 0 ? -1.0 : 1.0) * std::pow(std::abs(w(i)), p)));
  }
}

TEST_CASE("checkpoint ladder") {
  EvolveParams ep = params(1.5, 0.1, 10.0);
  ep.snapshot_times = {3.0, 10.0};
  const std::vector<double> t = checkpoint_times(ep);
  const std::vector<double> want = {0.0, 1.0, 2.0, 3.0, 4.0, 8.0, 10.0};
  REQUIRE(t.size() == want.size());
  for (std::size_t i = 0; i < t.size(); ++i) CHECK(t[i] == doctest::Approx(want[i]));
}

TEST_CASE("parameter validation") {
  CHECK_THROWS_AS(params(3.5, 0.1, 1.0).validate(1), ConfigError);
  CHECK_THROWS_AS(params(2.0, 0.1, 1.0).validate(2), ConfigError);
  CHECK_NOTHROW(params(1.9, 0.1, 1.0).validate(2));
  CHECK_THROWS_AS(params(1.5, 0.0, 1.0).validate(1), ConfigError);
  EvolveParams ep = params(1.5, 0.1, 1.0);
  ep.snapshot_times = {2.0};
  CHECK_THROWS_AS(ep.validate(1), ConfigError);
}

TEST_CASE("zero datum stays zero") {
  const Grid g = Grid::make(1, DomainMode::TruncatedFullSpace, 10.0, 0.1);
  const Trajectory t = run(CompactBump{0.0, 1.0}, k1(), g, params(1.5, 0.1, 5.0));
  REQUIRE(t.records.size() >= 3);
  for (const auto& r : t.records) {
    CHECK(r.sup_norm == 0.0);
    CHECK(r.l1_mass == 0.0);
    CHECK(r.absorbed_mass == 0.0);
  }
  CHECK(t.final_state.time == doctest::Approx(5.0));
}

TEST_CASE("ETD1 step against the explicit formula") {
  const Grid g = Grid::make(1, DomainMode::TruncatedFullSpace, 6.0, 0.1);
  const Field u = random_datum(g, 3);
  ConvolutionPlan plan(g, sample_on_grid(k1(), 0.1), Engine::Direct);
  const double dt = 0.05, p = 1.5;
  const Field next = step_etd1(u, plan, p, dt);
  const Eigen::ArrayXd Ju = plan.apply(u);
  const Eigen::ArrayXd want =
      std::exp(-dt) * u.values + (1.0 - std::exp(-dt)) * (Ju - u.values.pow(p));
  CHECK((next.values - want).abs().maxCoeff() < 1e-14);
  CHECK(next.time == doctest::Approx(dt));
}

TEST_CASE("constant state on the torus follows the scalar recurrence") {
  const Grid g = Grid::make(1, DomainMode::Periodic, 3.0, 0.1);
  const double dt = 0.01, p = 2.0;
  const Trajectory t = run(ConstantDatum{1.0}, k1(), g, params(p, dt, 2.0));
  double v = 1.0;
  for (int n = 0; n < 200; ++n) v -= (1.0 - std::exp(-dt)) * v * v;
  CHECK(t.records.back().sup_norm == doctest::Approx(v).epsilon(1e-12));
  CHECK(t.final_state.values.minCoeff() == doctest::Approx(v).epsilon(1e-12));
}

TEST_CASE("Picard tracks the exact flat decay") {
  const Grid g = Grid::make(1, DomainMode::Periodic, 3.0, 0.1);
  EvolveParams ep = params(1.5, 0.002, 4.0);
  ep.scheme = PicardStep{1e-13, 50};
  const Trajectory t = run(ConstantDatum{1.0}, k1(), g, ep);
  for (const auto& r : t.records) {
    const double exact = std::pow(1.0 + 0.5 * r.t, -2.0);
    CHECK(r.sup_norm == doctest::Approx(exact).epsilon(1e-6));
  }
}

TEST_CASE("positivity guard rejects large steps with a usable suggestion") {
  const Grid g = Grid::make(1, DomainMode::TruncatedFullSpace, 6.0, 0.1);
  const Field u = sample_datum(CompactBump{100.0, 1.0}, g);
  ConvolutionPlan plan(g, sample_on_grid(k1(), 0.1), Engine::Direct);
  double suggested = 0.0;
  try {
    step_etd1(u, plan, 1.5, 1.0);
    FAIL("expected StepRejected");
  } catch (const StepRejected& e) {
    suggested = e.suggested_dt();
  }
  CHECK(suggested == doctest::Approx(positivity_dt_limit(u.values.maxCoeff(), 1.5)).epsilon(1e-6));
  const Field ok = step_etd1(u, plan, 1.5, suggested);
  CHECK(ok.values.minCoeff() >= 0.0);
  CHECK_NOTHROW(step_etd1(u, plan, 1.5, 1.0, false));
}

TEST_CASE("Picard precondition and iteration budget") {
  const Grid g = Grid::make(1, DomainMode::Periodic, 3.0, 0.1);
  const Field u = sample_datum(ConstantDatum{1.0}, g);
  ConvolutionPlan plan(g, sample_on_grid(k1(), 0.1), Engine::Direct);
  CHECK(picard_dt_limit(1.0, 2.0) == doctest::Approx(0.1));
  CHECK_THROWS_AS(step_picard(u, plan, 2.0, 0.2, 1e-12, 50), StepRejected);
  CHECK_THROWS_AS(step_picard(u, plan, 2.0, 0.05, 1e-15, 1), ConvergenceError);
  const PicardOutcome o = step_picard(u, plan, 2.0, 0.05, 1e-13, 50);
  CHECK(o.iterations > 1);
  CHECK(o.contraction < 1.0);
}

TEST_CASE("tail refit recovers the amplitude") {
  const Grid g = Grid::make(1, DomainMode::TruncatedFullSpace, 20.0, 0.1);
  Field f = sample_datum(CustomDatum{[](double x, double) { return 0.3 * std::pow(std::abs(x), -4.0); },
                                     PowerTail{1.0, 4.0}},
                         g);
  refit_tail(f);
  CHECK(std::get<PowerTail>(f.tail).amplitude == doctest::Approx(0.3).epsilon(1e-12));
}

TEST_CASE("snapshots and observer see every checkpoint") {
  const Grid g = Grid::make(1, DomainMode::TruncatedFullSpace, 10.0, 0.1);
  EvolveParams ep = params(1.5, 0.05, 4.0);
  ep.snapshot_times = {1.5, 4.0};
  int calls = 0;
  const Trajectory t = run(CompactBump{1.0, 1.0}, k1(), g, ep, [&](const Field&) { ++calls; });
  CHECK(calls == static_cast<int>(t.records.size()));
  REQUIRE(t.snapshots.size() == 2);
  CHECK(t.snapshots[0].time == doctest::Approx(1.5));
  CHECK(t.snapshots[1].time == doctest::Approx(4.0));
}

TEST_CASE("discrete maximum principle, positivity and mass loss") {
  const Grid g = Grid::make(1, DomainMode::TruncatedFullSpace, 10.0, 0.1);
  for (std::uint64_t seed = 1; seed <= 5; ++seed) {
    const Field u0 = random_datum(g, seed, 2.0);
    EvolveParams ep = params(1.5, 0.05, 5.0);
    ep.t_first = 0.25;
    ep.checkpoint_ratio = 1.5;
    std::vector<Field> seen;
    const Trajectory t = run(u0, k1(), ep, [&](const Field& f) { seen.push_back(f); });
    for (std::size_t i = 1; i < t.records.size(); ++i) {
      CHECK(t.records[i].sup_norm <= t.records[i - 1].sup_norm);
      CHECK(t.records[i].l1_mass <= t.records[i - 1].l1_mass);
      CHECK(t.records[i].absorbed_mass >= t.records[i - 1].absorbed_mass);
    }
    for (const Field& f : seen) CHECK(f.values.minCoeff() >= 0.0);
  }
}

TEST_CASE("ordered data stay ordered") {
  const Grid g = Grid::make(1, DomainMode::TruncatedFullSpace, 10.0, 0.1);
  for (std::uint64_t seed = 1; seed <= 5; ++seed) {
    const Field low = random_datum(g, seed);
    Field high = random_datum(g, seed + 100);
    high.values += low.values;
    const PairCompareResult r = evolve_pair_compare(low, high, k1(), params(1.5, 0.05, 5.0));
    CHECK(r.ordered());
    CHECK(r.monotone_step_condition);
    CHECK(r.times.size() == r.min_gap.size());
  }
}

TEST_CASE("clamped upper solution stays above") {
  const Grid g = Grid::make(1, DomainMode::TruncatedFullSpace, 10.0, 0.1);
  const Field low = sample_datum(CompactBump{1.0, 1.0}, g);
  const Field high = sample_datum(CompactBump{1.5, 1.5}, g);
  HighClamp clamp{0.5, high.values};
  const PairCompareResult r = evolve_pair_compare(low, high, k1(), params(1.5, 0.05, 3.0), clamp);
  CHECK(r.ordered());
  for (Eigen::Index k = 0; k < g.size(); ++k)
    if (g.radius(k) <= 0.5) CHECK(r.high.final_state.values(k) == high.values(k));
}

TEST_CASE("fast engine trajectory matches the direct one") {
  const Grid g = Grid::make(2, DomainMode::TruncatedFullSpace, 4.0, 0.25);
  const KernelSpec k = build_kernel(KernelFamily::Bump, 1.0, 2);
  EvolveParams ep = params(1.5, 0.05, 1.0);
  const Trajectory a = run(CompactBump{1.0, 1.5}, k, g, ep);
  ep.engine = Engine::FastCyclic;
  ep.check_oracle = true;
  const Trajectory b = run(CompactBump{1.0, 1.5}, k, g, ep);
  CHECK((a.final_state.values - b.final_state.values).abs().maxCoeff() < 1e-12);
}

TEST_CASE("one ETD1 step on a constant matches the ODE to second order") {
  const Grid g = Grid::make(1, DomainMode::Periodic, 3.0, 0.1);
  ConvolutionPlan plan(g, sample_on_grid(k1(), 0.1), Engine::Direct);
  const double c = 0.8;
  const Field u = sample_datum(ConstantDatum{c}, g);
  double prev = 0.0;
  for (double dt : {0.04, 0.02, 0.01}) {
    const Field next = step_etd1(u, plan, 2.0, dt);
    CHECK(next.values(0) == doctest::Approx(std::exp(-dt) * c + (1.0 - std::exp(-dt)) * (c - c * c)));
    const double err = std::abs(next.values(0) - c / (1.0 + c * dt));
    if (prev > 0.0) CHECK(prev / err == doctest::Approx(4.0).epsilon(0.1));
    prev = err;
  }
}

TEST_CASE("one ETD1 step agrees with Picard to second order") {
  const Grid g = Grid::make(1, DomainMode::TruncatedFullSpace, 6.0, 0.05);
  ConvolutionPlan plan(g, sample_on_grid(k1(), 0.05), Engine::Direct);
  const Field u = sample_datum(CompactBump{1.0, 1.0}, g);
  double prev = 0.0;
  for (double dt : {0.02, 0.01, 0.005}) {
    const Field a = step_etd1(u, plan, 1.5, dt);
    const Field b = step_picard(u, plan, 1.5, dt, 1e-12, 100).field;
    const double err = (a.values - b.values).abs().maxCoeff();
    if (prev > 0.0) CHECK(prev / err == doctest::Approx(4.0).epsilon(0.15));
    prev = err;
  }
}

TEST_CASE("Picard on zero and its contraction factor") {
  const Grid g = Grid::make(1, DomainMode::TruncatedFullSpace, 6.0, 0.05);
  ConvolutionPlan plan(g, sample_on_grid(k1(), 0.05), Engine::Direct);
  const PicardOutcome z = step_picard(Field::zeros(g), plan, 1.5, 0.1, 1e-12, 10);
  CHECK(z.iterations == 1);
  CHECK(z.field.values.abs().maxCoeff() == 0.0);
  const Field u = sample_datum(CompactBump{2.0, 1.0}, g);
  const double dt = picard_dt_limit(2.0, 1.5);
  const PicardOutcome o = step_picard(u, plan, 1.5, dt, 1e-12, 100);
  CHECK(o.contraction <= 0.5);
}

TEST_CASE("trivial comparison pairs") {
  const Grid g = Grid::make(1, DomainMode::TruncatedFullSpace, 8.0, 0.1);
  const EvolveParams ep = params(1.5, 0.05, 2.0);
  const PairCompareResult same =
      evolve_pair_compare(CompactBump{1.0, 1.0}, CompactBump{1.0, 1.0}, k1(), g, ep);
  for (double gap : same.min_gap) CHECK(gap == 0.0);
  const PairCompareResult zero =
      evolve_pair_compare(CompactBump{0.0, 1.0}, CompactBump{1.0, 1.0}, k1(), g, ep);
  CHECK(zero.ordered(0.0));
  CHECK(zero.min_gap.back() == doctest::Approx(zero.high.final_state.values.minCoeff()));
}
