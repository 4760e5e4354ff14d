#include "nlab/experiment.hpp"

#include "nlab/asymptotics.hpp"
#include "nlab/barriers.hpp"
#include "nlab/csv.hpp"
#include "nlab/error.hpp"
#include "nlab/nonlocal_op.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <set>

namespace nlab {

namespace fs = std::filesystem;

KernelSpec kernel_from(const ExperimentConfig& cfg) {
  return build_kernel(parse_kernel_family(cfg.kernel_family), cfg.kernel_d, cfg.dim,
                      cfg.kernel_quad_resolution);
}

Grid grid_from(const ExperimentConfig& cfg) {
  return Grid::make(cfg.dim, parse_domain_mode(cfg.domain_mode), cfg.L, cfg.h);
}

DatumSpec datum_from(const ExperimentConfig& cfg) {
  if (cfg.datum_kind == "bump") return CompactBump{cfg.datum_amplitude, cfg.datum_radius};
  if (cfg.datum_kind == "power_tail") return PowerTailDatum{cfg.datum_A, cfg.p};
  if (cfg.datum_kind == "constant") return ConstantDatum{cfg.datum_c};
  if (cfg.datum_kind == "zero") return CompactBump{0.0, cfg.datum_radius};
  throw ConfigError("unknown datum kind '" + cfg.datum_kind + "'");
}

EvolveParams params_from(const ExperimentConfig& cfg) {
  EvolveParams ep;
  ep.p = cfg.p;
  ep.dt = cfg.dt;
  ep.t_end = cfg.t_end;
  ep.t_first = cfg.t_first;
  ep.checkpoint_ratio = cfg.checkpoint_ratio;
  ep.snapshot_times = cfg.snapshots;
  if (cfg.scheme == "picard")
    ep.scheme = PicardStep{cfg.picard_tol, cfg.picard_max_iter};
  else
    ep.scheme = Etd1{};
  ep.positivity_guard = cfg.positivity_guard;
  ep.engine = parse_engine(cfg.conv_engine);
  ep.check_oracle = cfg.conv_check_oracle;
  return ep;
}

void write_trajectory_csv(const fs::path& path, const Trajectory& traj) {
  CsvWriter w(path, {"t", "sup_norm", "l1_mass", "weighted_sup", "absorbed_mass", "tail_A_eff"});
  for (const auto& r : traj.records) {
    w.cell(r.t).cell(r.sup_norm).cell(r.l1_mass).cell(r.weighted_sup).cell(r.absorbed_mass)
        .cell(r.tail_A_eff);
    w.end_row();
  }
}

Trajectory read_trajectory_csv(const fs::path& path) {
  const CsvTable t = read_csv(path);
  const auto tt = t.column("t"), sup = t.column("sup_norm"), l1 = t.column("l1_mass"),
             ws = t.column("weighted_sup"), ab = t.column("absorbed_mass"),
             ta = t.column("tail_A_eff");
  Trajectory traj;
  for (std::size_t i = 0; i < tt.size(); ++i)
    traj.records.push_back({tt[i], sup[i], l1[i], ws[i], ab[i], ta[i]});
  return traj;
}

void write_snapshot_csv(const fs::path& path, const Field& f) {
  const bool two = f.grid.dim == 2;
  CsvWriter w(path, two ? std::vector<std::string>{"x", "y", "u"}
                        : std::vector<std::string>{"x", "u"},
              {{"L", format_double(f.grid.half_width)}, {"h", format_double(f.grid.spacing)}});
  for (Eigen::Index k = 0; k < f.grid.size(); ++k) {
    const auto x = f.grid.position(k);
    w.cell(x[0]);
    if (two) w.cell(x[1]);
    w.cell(f.values(k));
    w.end_row();
  }
}

Field read_snapshot_csv(const fs::path& path, double time, TailLaw tail) {
  const CsvTable t = read_csv(path);
  const bool two = t.header.size() == 3;
  const auto xs = t.column("x");
  const auto us = t.column("u");
  const std::size_t rows = xs.size();
  Eigen::Index n;
  double h;
  if (two) {
    const auto ys = t.column("y");
    n = static_cast<Eigen::Index>(std::lround(std::sqrt(static_cast<double>(rows))));
    if (static_cast<std::size_t>(n * n) != rows || n < 2)
      throw ConfigError(path.string() + ": 2D snapshot is not a square grid");
    h = (ys[n - 1] - ys[0]) / static_cast<double>(n - 1);
  } else {
    n = static_cast<Eigen::Index>(rows);
    if (n < 2) throw ConfigError(path.string() + ": snapshot has fewer than 2 nodes");
    h = (xs[n - 1] - xs[0]) / static_cast<double>(n - 1);
  }
  double L = 0.5 * static_cast<double>(n) * h;
  // Exact box parameters when the writer recorded them.
  if (t.meta.count("L") && t.meta.count("h")) {
    L = parse_double(t.meta.at("L"), "snapshot L");
    h = parse_double(t.meta.at("h"), "snapshot h");
  }
  Field f = Field::zeros(Grid::make(two ? 2 : 1, DomainMode::TruncatedFullSpace, L, h));
  if (static_cast<std::size_t>(f.grid.size()) != rows ||
      std::abs(f.grid.axis_coord(0) - xs[0]) > 1e-9 * L)
    throw ConfigError(path.string() + ": snapshot nodes are not centred on the origin");
  for (std::size_t k = 0; k < rows; ++k) f.values(static_cast<Eigen::Index>(k)) = us[k];
  f.time = time;
  f.tail = tail;
  return f;
}

std::vector<Field> read_snapshot_index(const fs::path& trajectory_csv) {
  const fs::path dir = trajectory_csv.parent_path();
  const CsvTable idx = read_csv(dir / "snapshots.csv");
  const auto ts = idx.column("t"), amp = idx.column("tail_A_eff"),
             ex = idx.column("tail_exponent");
  const std::size_t file_col = idx.column_index("file");
  std::vector<Field> out;
  for (std::size_t i = 0; i < ts.size(); ++i) {
    TailLaw tail = ZeroTail{};
    if (ex[i] > 0.0) tail = PowerTail{amp[i], ex[i]};
    out.push_back(read_snapshot_csv(dir / idx.rows[i][file_col], ts[i], tail));
  }
  return out;
}

void write_profile_csv(const fs::path& path, const ProfileSolution& s) {
  CsvWriter w(path, {"xi", "F"},
              {{"p", format_double(s.p)},
               {"N", std::to_string(s.N)},
               {"alpha", format_double(s.alpha)},
               {"a0", format_double(s.a0)},
               {"class", std::string(to_string(s.tail_class))}});
  for (std::size_t i = 0; i < s.xi.size(); ++i) {
    w.cell(s.xi[i]).cell(s.F[i]);
    w.end_row();
  }
}

namespace {

struct Outputs {
  fs::path dir;
  std::vector<std::string> files;

  fs::path add(const std::string& name) {
    files.push_back(name);
    return dir / name;
  }
};

std::vector<double> merged(std::vector<double> a, const std::vector<double>& b) {
  a.insert(a.end(), b.begin(), b.end());
  std::sort(a.begin(), a.end());
  a.erase(std::unique(a.begin(), a.end()), a.end());
  return a;
}

Trajectory simulate(const ExperimentConfig& cfg, const std::vector<double>& extra_snapshots,
                    Outputs& out) {
  EvolveParams ep = params_from(cfg);
  ep.snapshot_times = merged(ep.snapshot_times, extra_snapshots);
  Trajectory traj = run(datum_from(cfg), kernel_from(cfg), grid_from(cfg), ep);
  write_trajectory_csv(out.add("trajectory.csv"), traj);
  CsvWriter idx(out.add("snapshots.csv"), {"t", "file", "tail_A_eff", "tail_exponent"});
  for (std::size_t i = 0; i < traj.snapshots.size(); ++i) {
    const Field& s = traj.snapshots[i];
    char name[32];
    std::snprintf(name, sizeof name, "snapshot_%03zu.csv", i);
    write_snapshot_csv(out.add(name), s);
    const auto* pt = std::get_if<PowerTail>(&s.tail);
    idx.cell(s.time).cell(std::string_view(name)).cell(pt ? pt->amplitude : 0.0)
        .cell(pt ? pt->exponent : 0.0);
    idx.end_row();
  }
  return traj;
}

double profile_alpha(const ExperimentConfig& cfg) {
  return cfg.profile_alpha > 0.0 ? cfg.profile_alpha : alpha(kernel_from(cfg));
}

ProfileSolution make_vss(const ExperimentConfig& cfg) {
  const double a = profile_alpha(cfg);
  if (!cfg.profile_cache_dir.empty())
    return cached_vss(cfg.profile_cache_dir, cfg.p, cfg.dim, a, cfg.profile_bisect_tol);
  const auto [lo, hi] = vss_bracket(cfg.p, cfg.dim, a);
  return shoot_vss(cfg.p, cfg.dim, a, lo, hi, cfg.profile_bisect_tol);
}

ProfileSolution make_profile(const ExperimentConfig& cfg, bool ua, double A) {
  const ProfileSolution vss = make_vss(cfg);
  if (!ua) return vss;
  return shoot_UA(A, cfg.p, cfg.dim, vss.alpha, {}, vss.a0);
}

void exp_profile(const ExperimentConfig& cfg, Outputs& out) {
  const ProfileSolution s = make_profile(cfg, cfg.profile_mode == "ua", cfg.profile_A);
  write_profile_csv(out.add("profile.csv"), s);
  save_profile(s, out.add("profile_cache.csv"));
}

void exp_barrier(const ExperimentConfig& cfg, Outputs& out) {
  const KernelSpec k = kernel_from(cfg);
  const Grid g = grid_from(cfg);
  const Field u0 = sample_datum(datum_from(cfg), g);
  const double A = cfg.barrier_A >= 0.0 ? cfg.barrier_A
                                        : (cfg.datum_kind == "power_tail" ? cfg.datum_A : 0.0);
  std::optional<double> B;
  if (cfg.barrier_B > 0.0) B = cfg.barrier_B;
  const BarrierPhi phi = choose_constants(k, cfg.p, u0, A, B, cfg.barrier_c2_fraction);
  const SupersolutionReport rep = verify_supersolution(k, phi, g);
  CsvWriter w(out.add("barrier.csv"), {"node", "r", "L_phi", "phi_p", "margin"},
              {{"C1", format_double(phi.C1)},
               {"C2", format_double(phi.C2)},
               {"C2_max", format_double(admissible_C2(k, cfg.p))},
               {"p", format_double(cfg.p)},
               {"pass", rep.pass ? "true" : "false"}});
  for (const auto& r : rep.rows) {
    w.cell(static_cast<long long>(r.node)).cell(r.r).cell(r.L_phi).cell(r.phi_p).cell(r.margin);
    w.end_row();
  }
}

void exp_wcheck(const ExperimentConfig& cfg, Outputs& out) {
  const WBoundsReport rep = check_w_bounds(kernel_from(cfg), cfg.t_list, grid_from(cfg));
  CsvWriter w(out.add("wcheck.csv"),
              {"t", "h", "c1", "c2", "c3", "mass", "mass_expected", "residual"},
              {{"finite", rep.finite ? "true" : "false"},
               {"stable", rep.stable ? "true" : "false"}});
  for (const auto& r : rep.rows) {
    w.cell(r.t).cell(r.h).cell(r.c1).cell(r.c2).cell(r.c3).cell(r.mass).cell(r.mass_expected)
        .cell(r.residual);
    w.end_row();
  }
}

std::pair<double, double> window_of(const ExperimentConfig& cfg) {
  if (cfg.window.size() != 2) throw ConfigError("diag.window needs two values a,b");
  return {cfg.window[0], cfg.window[1]};
}

void exp_rates(const ExperimentConfig& cfg, Outputs& out) {
  const Trajectory traj = cfg.input_trajectory.empty()
                              ? simulate(cfg, {}, out)
                              : read_trajectory_csv(cfg.input_trajectory);
  const auto win = window_of(cfg);
  const std::string label = format_double(win.first) + ":" + format_double(win.second);
  CsvWriter w(out.add("rates.csv"), {"quantity", "window", "exponent", "residual"});
  const auto t = traj.times();
  for (const char* q : {"sup_norm", "l1_mass", "weighted_sup"}) {
    std::vector<double> v;
    for (const auto& r : traj.records)
      v.push_back(q[0] == 's' ? r.sup_norm : q[0] == 'l' ? r.l1_mass : r.weighted_sup);
    RateFit fit;
    try {
      fit = fit_power_law(t, v, win);
    } catch (const DomainError&) {
      fit.exponent = fit.residual_rms = std::nan("");
    }
    w.cell(std::string_view(q)).cell(std::string_view(label)).cell(fit.exponent)
        .cell(fit.residual_rms);
    w.end_row();
  }
}

void exp_converge(const ExperimentConfig& cfg, Outputs& out) {
  std::vector<Field> snaps;
  ProfileSolution profile;
  if (!cfg.input_trajectory.empty()) {
    if (cfg.input_profile.empty()) throw ConfigError("converge needs input.profile");
    snaps = read_snapshot_index(cfg.input_trajectory);
    profile = load_profile(cfg.input_profile);
  } else {
    const std::vector<double> ladder =
        cfg.snapshots.empty() ? std::vector<double>{10, 20, 40, 80} : cfg.snapshots;
    snaps = simulate(cfg, ladder, out).snapshots;
    const bool ua = cfg.datum_kind == "power_tail";
    profile = make_profile(cfg, ua, cfg.datum_A);
    save_profile(profile, out.add("profile_cache.csv"));
  }
  const bool ua = profile.tail_class == TailClass::AlgebraicTail;
  CsvWriter w(out.add("convergence.csv"), {"t", ua ? "metric_UA" : "metric_vss", "K", "p"});
  for (const Field& s : snaps) {
    if (!(s.time > 0.0)) continue;
    for (double K : cfg.K_list) {
      w.cell(s.time).cell(convergence_metric(s, profile, K)).cell(K).cell(profile.p);
      w.end_row();
    }
  }
}

void exp_oplimit(const ExperimentConfig& cfg, Outputs& out) {
  if (cfg.lambda_list.empty()) throw ConfigError("diag.lambda_list is empty");
  const KernelSpec k = kernel_from(cfg);
  const double lmax = *std::max_element(cfg.lambda_list.begin(), cfg.lambda_list.end());
  // Resolve the narrowest scaled kernel with 32 nodes per support radius.
  const double target = std::min(cfg.h, cfg.kernel_d / (32.0 * lmax));
  const double h = 2.0 * cfg.L / std::ceil(2.0 * cfg.L / target);
  const Grid g = Grid::make(cfg.dim, DomainMode::TruncatedFullSpace, cfg.L, h);
  const TestFunction gauss{
      [](double x, double y) { return std::exp(-(x * x + y * y)); },
      [dim = cfg.dim](double x, double y) {
        const double r2 = x * x + y * y;
        return (4.0 * r2 - 2.0 * dim) * std::exp(-r2);
      }};
  CsvWriter w(out.add("oplimit.csv"), {"lambda", "residual", "order"}, {{"h", format_double(h)}});
  double prev_l = 0.0, prev_r = 0.0;
  for (double l : cfg.lambda_list) {
    const double r = local_limit_residual(k, l, gauss, alpha(k), g);
    const double order = prev_l > 0.0 ? std::log(prev_r / r) / std::log(l / prev_l) : std::nan("");
    w.cell(l).cell(r).cell(order);
    w.end_row();
    prev_l = l;
    prev_r = r;
  }
}

void exp_compare(const ExperimentConfig& cfg, Outputs& out) {
  if (cfg.datum_kind != "bump") throw ConfigError("compare needs datum.kind=bump");
  const double high = cfg.compare_amplitude_high >= 0.0 ? cfg.compare_amplitude_high
                                                        : cfg.datum_amplitude + 0.1;
  const PairCompareResult res =
      evolve_pair_compare(CompactBump{cfg.datum_amplitude, cfg.datum_radius},
                          CompactBump{high, cfg.datum_radius}, kernel_from(cfg), grid_from(cfg),
                          params_from(cfg));
  CsvWriter w(out.add("compare.csv"), {"t", "min_gap"},
              {{"ordered", res.ordered() ? "true" : "false"},
               {"monotone_step_condition", res.monotone_step_condition ? "true" : "false"}});
  for (std::size_t i = 0; i < res.times.size(); ++i) {
    w.cell(res.times[i]).cell(res.min_gap[i]);
    w.end_row();
  }
}

void exp_massdiv(const ExperimentConfig& cfg, Outputs& out) {
  std::vector<double> times;
  for (double l : cfg.lambda_list) times.push_back(l * l * cfg.t_ref);
  ExperimentConfig c = cfg;
  c.t_end = std::max(cfg.t_end, *std::max_element(times.begin(), times.end()));
  const Trajectory traj = simulate(c, times, out);
  const MassDivergenceReport rep =
      check_mass_divergence(traj.snapshots, cfg.lambda_list, cfg.R, cfg.t_ref, cfg.p);
  CsvWriter w(out.add("massdiv.csv"), {"lambda", "t", "rescaled_mass"},
              {{"nondecreasing", rep.nondecreasing ? "true" : "false"}});
  for (const auto& r : rep.rows) {
    w.cell(r.lambda).cell(r.t).cell(r.rescaled_mass);
    w.end_row();
  }
}

}  // namespace

ExperimentResult run_experiment(const ExperimentConfig& cfg) {
  Outputs out;
  out.dir = cfg.output_dir;
  fs::create_directories(out.dir);

  if (cfg.kind == "simulate")
    simulate(cfg, {}, out);
  else if (cfg.kind == "profile")
    exp_profile(cfg, out);
  else if (cfg.kind == "barrier")
    exp_barrier(cfg, out);
  else if (cfg.kind == "wcheck")
    exp_wcheck(cfg, out);
  else if (cfg.kind == "rates")
    exp_rates(cfg, out);
  else if (cfg.kind == "converge")
    exp_converge(cfg, out);
  else if (cfg.kind == "oplimit")
    exp_oplimit(cfg, out);
  else if (cfg.kind == "compare")
    exp_compare(cfg, out);
  else if (cfg.kind == "massdiv")
    exp_massdiv(cfg, out);
  else
    throw ConfigError("unknown experiment kind '" + cfg.kind + "'");

  ExperimentResult res;
  res.output_dir = out.dir;
  res.artifacts = out.files;
  res.config_hash = config_hash(cfg);
  std::ofstream m(out.dir / "manifest.txt");
  m << "# config_hash=" << res.config_hash << '\n';
  for (const auto& f : out.files) m << "# artifact=" << f << '\n';
  m << normalized_config(cfg);
  if (!m) throw ConfigError("cannot write manifest in " + out.dir.string());
  return res;
}

}  // namespace nlab
