#include "nlab/evolve.hpp"

#include "nlab/error.hpp"

#include <algorithm>
#include <cmath>
#include <string>

namespace nlab {

void EvolveParams::validate(int dim) const {
  if (!(p > 1.0) || !(p < 1.0 + 2.0 / dim))
    throw ConfigError("absorption exponent p=" + std::to_string(p) + " outside (1, 1+2/N)");
  if (!(dt > 0.0)) throw ConfigError("time step must be positive");
  if (!(t_end > 0.0)) throw ConfigError("t_end must be positive");
  if (!(t_first > 0.0)) throw ConfigError("first checkpoint time must be positive");
  if (!(checkpoint_ratio > 1.0)) throw ConfigError("checkpoint ratio must exceed 1");
  for (double s : snapshot_times)
    if (!(s > 0.0) || s > t_end * (1.0 + 1e-12))
      throw ConfigError("snapshot time " + std::to_string(s) + " outside (0, t_end]");
  if (const auto* pic = std::get_if<PicardStep>(&scheme)) {
    if (!(pic->tol > 0.0)) throw ConfigError("picard tolerance must be positive");
    if (pic->max_iter < 1) throw ConfigError("picard max_iter must be at least 1");
  }
}

std::vector<double> Trajectory::times() const {
  std::vector<double> t;
  t.reserve(records.size());
  for (const auto& r : records) t.push_back(r.t);
  return t;
}

Eigen::ArrayXd signed_power(const Eigen::ArrayXd& w, double p) {
  if (p == 2.0) return w * w.abs();
  if (p == 1.5) return w * w.abs().sqrt();
  return w.sign() * w.abs().pow(p);
}

double positivity_dt_limit(double sup_norm, double p) {
  if (sup_norm <= 0.0) return std::numeric_limits<double>::infinity();
  return std::log1p(std::pow(sup_norm, 1.0 - p));
}

double picard_dt_limit(double sup_norm, double p) {
  return 0.5 / (1.0 + p * std::pow(2.0 * std::max(sup_norm, 0.0), p - 1.0));
}

std::vector<double> checkpoint_times(const EvolveParams& params) {
  std::vector<double> t{0.0};
  const double stop = params.t_end * (1.0 - 1e-12);
  for (double s = params.t_first; s < stop; s *= params.checkpoint_ratio) t.push_back(s);
  for (double s : params.snapshot_times) t.push_back(std::min(s, params.t_end));
  t.push_back(params.t_end);
  std::sort(t.begin(), t.end());
  std::vector<double> out;
  for (double s : t)
    if (out.empty() || s - out.back() > 1e-12 * std::max(1.0, s)) out.push_back(s);
  // Keep t_end exact when a snapshot time landed within rounding of it.
  out.back() = params.t_end;
  return out;
}

void refit_tail(Field& field) {
  auto* pt = std::get_if<PowerTail>(&field.tail);
  if (!pt) return;
  const Grid& g = field.grid;
  const double inner = 0.9 * g.half_width;
  double acc = 0.0;
  int count = 0;
  for (Eigen::Index k = 0; k < g.size(); ++k) {
    const double r = g.radius(k);
    const double u = field.values(k);
    if (r < inner || r > g.half_width || !(u > 0.0)) continue;
    acc += std::log(u) + pt->exponent * std::log(r);
    ++count;
  }
  if (count > 0) pt->amplitude = std::exp(acc / count);
}

namespace {

double sup_abs(const Field& f) {
  return f.values.size() ? f.values.abs().maxCoeff() : 0.0;
}

// \int |u|^p over the box plus the analytic tail contribution.
double absorption_density(const Field& f, double p) {
  double acc = signed_power(f.values.abs(), p).sum() * f.grid.cell_volume();
  if (const auto* pt = std::get_if<PowerTail>(&f.tail)) {
    if (pt->amplitude != 0.0)
      acc += std::pow(std::abs(pt->amplitude), p) *
             power_tail_integral(f.grid.dim, f.grid.half_width, pt->exponent * p);
  }
  return acc;
}

bool is_zero_state(const Field& f) {
  if ((f.values != 0.0).any()) return false;
  const auto* pt = std::get_if<PowerTail>(&f.tail);
  return !pt || pt->amplitude == 0.0;
}

double tail_amplitude(const Field& f) {
  const auto* pt = std::get_if<PowerTail>(&f.tail);
  return pt ? pt->amplitude : 0.0;
}

Eigen::ArrayXd drift(ConvolutionPlan& plan, const Field& w, double p) {
  return plan.apply(w) - signed_power(w.values, p);
}

struct Lane {
  Field field;
  Trajectory traj;
  double absorbed = 0.0;
  double density = 0.0;
  bool frozen = false;
};

CheckpointRecord make_record(const Lane& lane, double p) {
  const Norms n = norms(lane.field);
  CheckpointRecord r;
  r.t = lane.field.time;
  r.sup_norm = n.sup_norm;
  r.l1_mass = n.l1_mass;
  r.weighted_sup = weighted_sup(lane.field, 2.0 / (p - 1.0));
  r.absorbed_mass = lane.absorbed;
  r.tail_A_eff = tail_amplitude(lane.field);
  return r;
}

bool is_snapshot_time(const EvolveParams& params, double t) {
  return std::any_of(params.snapshot_times.begin(), params.snapshot_times.end(), [&](double s) {
    return std::abs(std::min(s, params.t_end) - t) <= 1e-12 * std::max(1.0, t);
  });
}

Field advance(const Field& f, ConvolutionPlan& plan, const EvolveParams& params, double dt) {
  if (const auto* pic = std::get_if<PicardStep>(&params.scheme))
    return step_picard(f, plan, params.p, dt, pic->tol, pic->max_iter).field;
  return step_etd1(f, plan, params.p, dt, params.positivity_guard);
}

using PostStep = std::function<void(std::vector<Lane>&, double dt)>;
using AtCheckpoint = std::function<void(std::vector<Lane>&)>;

void march(std::vector<Lane>& lanes, const KernelSpec& kernel, const EvolveParams& params,
           const PostStep& post_step, const AtCheckpoint& at_checkpoint) {
  const Grid& grid = lanes.front().field.grid;
  params.validate(grid.dim);
  if (kernel.dim != grid.dim) throw UsageError("kernel and grid dimensions differ");
  ConvolutionPlan plan(grid, sample_on_grid(kernel, grid.spacing), params.engine,
                       params.check_oracle);

  const auto times = checkpoint_times(params);
  auto record = [&]() {
    for (auto& lane : lanes) {
      lane.traj.records.push_back(make_record(lane, params.p));
      if (lane.field.time > 0.0 && is_snapshot_time(params, lane.field.time))
        lane.traj.snapshots.push_back(lane.field);
    }
    if (at_checkpoint) at_checkpoint(lanes);
  };

  for (auto& lane : lanes) {
    if (!(lane.field.grid == grid)) throw UsageError("lanes must share one grid");
    lane.traj.p = params.p;
    lane.field.time = 0.0;
    lane.frozen = is_zero_state(lane.field);
    lane.density = absorption_density(lane.field, params.p);
  }
  record();

  for (std::size_t k = 0; k + 1 < times.size(); ++k) {
    const double span = times[k + 1] - times[k];
    const long n_sub = std::max(1L, static_cast<long>(std::ceil(span / params.dt - 1e-9)));
    const double dt = span / static_cast<double>(n_sub);
    for (long s = 0; s < n_sub; ++s) {
      const double t = s + 1 == n_sub ? times[k + 1] : times[k] + (s + 1) * dt;
      for (auto& lane : lanes) {
        if (!lane.frozen) {
          lane.field = advance(lane.field, plan, params, dt);
          refit_tail(lane.field);
        }
        lane.field.time = t;
      }
      if (post_step) post_step(lanes, dt);
      for (auto& lane : lanes) {
        const double density = absorption_density(lane.field, params.p);
        lane.absorbed += 0.5 * dt * (lane.density + density);
        lane.density = density;
      }
    }
    record();
  }
  for (auto& lane : lanes) lane.traj.final_state = lane.field;
}

}  // namespace

Field step_etd1(const Field& field, ConvolutionPlan& plan, double p, double dt,
                bool positivity_guard) {
  const double decay = std::exp(-dt);
  const double gain = -std::expm1(-dt);
  const double sup = sup_abs(field);
  if (positivity_guard && sup > 0.0 &&
      gain * std::pow(sup, p - 1.0) > decay * (1.0 + 1e-12))
    throw StepRejected("time step " + std::to_string(dt) +
                           " violates the positivity condition",
                       positivity_dt_limit(sup, p));
  Field out = field;
  out.values = decay * field.values + gain * drift(plan, field, p);
  out.time = field.time + dt;
  return out;
}

PicardOutcome step_picard(const Field& field, ConvolutionPlan& plan, double p, double dt,
                          double tol, int max_iter) {
  const double sup = sup_abs(field);
  if (dt > picard_dt_limit(sup, p) * (1.0 + 1e-12))
    throw StepRejected("time step " + std::to_string(dt) +
                           " fails the in-step contraction test",
                       picard_dt_limit(sup, p));
  const double decay = std::exp(-dt);
  const Eigen::ArrayXd frozen =
      decay * field.values + 0.5 * dt * decay * drift(plan, field, p);

  PicardOutcome out{field, 0, 0.0};
  Field v = field;
  double prev_diff = 0.0;
  const double noise = 1e-13 * std::max(1.0, sup);
  for (int it = 1; it <= max_iter; ++it) {
    Eigen::ArrayXd next = frozen + 0.5 * dt * drift(plan, v, p);
    const double diff = (next - v.values).abs().maxCoeff();
    if (it > 1 && prev_diff > noise)
      out.contraction = std::max(out.contraction, diff / prev_diff);
    v.values = std::move(next);
    prev_diff = diff;
    out.iterations = it;
    if (diff < tol) {
      v.time = field.time + dt;
      out.field = std::move(v);
      return out;
    }
  }
  throw ConvergenceError("picard step did not converge in " + std::to_string(max_iter) +
                         " iterations (dt too large?)");
}

Trajectory run(Field initial, const KernelSpec& kernel, const EvolveParams& params,
               const CheckpointObserver& observer) {
  std::vector<Lane> lanes(1);
  lanes[0].field = std::move(initial);
  AtCheckpoint hook;
  if (observer) hook = [&](std::vector<Lane>& l) { observer(l[0].field); };
  march(lanes, kernel, params, {}, hook);
  return std::move(lanes[0].traj);
}

Trajectory run(const DatumSpec& datum, const KernelSpec& kernel, const Grid& grid,
               const EvolveParams& params, const CheckpointObserver& observer) {
  return run(sample_datum(datum, grid), kernel, params, observer);
}

PairCompareResult evolve_pair_compare(const Field& low, const Field& high,
                                      const KernelSpec& kernel, const EvolveParams& params,
                                      const std::optional<HighClamp>& clamp) {
  std::vector<Lane> lanes(2);
  lanes[0].field = low;
  lanes[1].field = high;

  std::vector<Eigen::Index> clamped;
  if (clamp) {
    const Grid& g = high.grid;
    if (clamp->values.size() != g.size()) throw UsageError("clamp values do not match grid");
    for (Eigen::Index k = 0; k < g.size(); ++k)
      if (g.radius(k) <= clamp->radius) clamped.push_back(k);
    for (Eigen::Index k : clamped) lanes[1].field.values(k) = clamp->values(k);
  }

  PairCompareResult res;
  PostStep post = [&](std::vector<Lane>& l, double dt) {
    for (Eigen::Index k : clamped) l[1].field.values(k) = clamp->values(k);
    const double gain = -std::expm1(-dt);
    for (const auto& lane : l) {
      const double sup = sup_abs(lane.field);
      if (gain * params.p * std::pow(sup, params.p - 1.0) > std::exp(-dt))
        res.monotone_step_condition = false;
    }
  };
  AtCheckpoint gap = [&](std::vector<Lane>& l) {
    res.times.push_back(l[0].field.time);
    res.min_gap.push_back((l[1].field.values - l[0].field.values).minCoeff());
  };
  march(lanes, kernel, params, post, gap);

  res.low = std::move(lanes[0].traj);
  res.high = std::move(lanes[1].traj);
  res.overall_min_gap = *std::min_element(res.min_gap.begin(), res.min_gap.end());
  return res;
}

PairCompareResult evolve_pair_compare(const DatumSpec& low, const DatumSpec& high,
                                      const KernelSpec& kernel, const Grid& grid,
                                      const EvolveParams& params,
                                      const std::optional<HighClamp>& clamp) {
  return evolve_pair_compare(sample_datum(low, grid), sample_datum(high, grid), kernel, params,
                             clamp);
}

}  // namespace nlab
