#include "nlab/limits.hpp"

#include "nlab/csv.hpp"
#include "nlab/error.hpp"
#include "nlab/ode.hpp"

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <numbers>
#include <sstream>
#include <string>

namespace nlab {

double flat_solution(double t, double p) {
  if (!(t > 0.0)) throw DomainError("flat solution needs t > 0");
  return std::pow((p - 1.0) * t, -1.0 / (p - 1.0));
}

double heat_kernel(double r, double t, double alpha, int N) {
  if (!(t > 0.0)) throw DomainError("heat kernel needs t > 0");
  if (!(alpha > 0.0)) throw DomainError("heat kernel needs alpha > 0");
  return std::pow(4.0 * std::numbers::pi * alpha * t, -0.5 * N) *
         std::exp(-r * r / (4.0 * alpha * t));
}

double flat_constant(double p) { return std::pow(p - 1.0, -1.0 / (p - 1.0)); }

namespace {

double spow(double F, double p) {
  if (p == 1.5) return F * std::sqrt(std::abs(F));
  if (p == 2.0) return F * std::abs(F);
  return std::copysign(std::pow(std::abs(F), p), F);
}

}  // namespace

double profile_rhs(double xi, double F, double dF, double p, int N, double alpha) {
  if (!(xi > 0.0)) throw DomainError("profile_rhs needs xi > 0; use the series start");
  return (spow(F, p) - F / (p - 1.0) - 0.5 * xi * dF - alpha * (N - 1) * dF / xi) / alpha;
}

double profile_curvature_at_origin(double a0, double p, int N, double alpha) {
  return (spow(a0, p) - a0 / (p - 1.0)) / (alpha * N);
}

std::string_view to_string(TailClass c) {
  switch (c) {
    case TailClass::HitsZero: return "hits_zero";
    case TailClass::AlgebraicTail: return "algebraic_tail";
    case TailClass::FastDecay: return "fast_decay";
    case TailClass::Diverges: return "diverges";
    case TailClass::Flat: return "flat";
    case TailClass::Unresolved: return "unresolved";
  }
  return "unresolved";
}

TailClass parse_tail_class(std::string_view name) {
  for (TailClass c : {TailClass::HitsZero, TailClass::AlgebraicTail, TailClass::FastDecay,
                      TailClass::Diverges, TailClass::Flat, TailClass::Unresolved})
    if (to_string(c) == name) return c;
  throw ConfigError("unknown tail class '" + std::string(name) + "'");
}

bool is_positive_decay(TailClass c) {
  return c == TailClass::AlgebraicTail || c == TailClass::FastDecay;
}

bool stays_positive(TailClass c) { return is_positive_decay(c) || c == TailClass::Unresolved; }

namespace {

struct Hermite {
  double value, slope;
};

Hermite hermite(double x0, double f0, double d0, double x1, double f1, double d1, double x) {
  const double h = x1 - x0;
  const double s = (x - x0) / h;
  const double s2 = s * s, s3 = s2 * s;
  const double h00 = 2 * s3 - 3 * s2 + 1, h10 = s3 - 2 * s2 + s;
  const double h01 = -2 * s3 + 3 * s2, h11 = s3 - s2;
  const double value = h00 * f0 + h10 * h * d0 + h01 * f1 + h11 * h * d1;
  const double slope = ((6 * s2 - 6 * s) * f0 + (3 * s2 - 4 * s + 1) * h * d0 +
                        (-6 * s2 + 6 * s) * f1 + (3 * s2 - 2 * s) * h * d1) /
                       h;
  return {value, slope};
}

// Least squares of xi^q F = A + B xi^-2 on the last decade of samples.
void fit_tail(ProfileSolution& s) {
  const double q = s.q();
  const double lo = s.options.xi_max / 10.0;
  std::vector<std::size_t> idx;
  for (std::size_t i = 0; i < s.xi.size(); ++i)
    if (s.xi[i] >= lo) idx.push_back(i);
  if (idx.size() < 3) return;
  Eigen::MatrixXd M(idx.size(), 2);
  Eigen::VectorXd y(idx.size());
  for (std::size_t r = 0; r < idx.size(); ++r) {
    const double x = s.xi[idx[r]];
    M(r, 0) = 1.0;
    M(r, 1) = 1.0 / (x * x);
    y(r) = std::pow(x, q) * s.F[idx[r]];
  }
  const Eigen::Vector2d c = M.colPivHouseholderQr().solve(y);
  s.A_tail = c(0);
  s.B_tail = c(1);
  s.fit_residual = c(0) > 0.0 ? ((M * c - y).cwiseAbs().maxCoeff() / c(0))
                              : std::numeric_limits<double>::infinity();
}

}  // namespace

ProfileSolution integrate_profile(double a0, double p, int N, double alpha,
                                  const ProfileOptions& opts) {
  if (!(a0 > 0.0)) throw DomainError("profile shooting needs a0 > 0");
  if (!(p > 1.0)) throw DomainError("profile needs p > 1");
  if (N < 1) throw DomainError("profile needs N >= 1");
  if (!(alpha > 0.0)) throw DomainError("profile needs alpha > 0");
  if (!(opts.xi_max > 10.0 * opts.xi_start)) throw DomainError("xi_max too small");

  ProfileSolution s;
  s.p = p;
  s.N = N;
  s.alpha = alpha;
  s.a0 = a0;
  s.options = opts;
  const double Cp = flat_constant(p);
  const double F2 = profile_curvature_at_origin(a0, p, N, alpha);
  const double x0 = opts.xi_start;

  s.xi = {0.0, x0};
  s.F = {a0, a0 + 0.5 * F2 * x0 * x0};
  s.dF = {0.0, F2 * x0};

  using Solver = Dopri5<double, 2>;
  Solver::Options so;
  so.abs_tol = opts.abs_tol;
  so.rel_tol = opts.rel_tol;
  so.h_max = 0.01 * std::sqrt(alpha);
  so.h_init = std::min(1e-4, so.h_max);
  const Solver solver(so);

  auto rhs = [&](double xi, const Solver::State& y) {
    return Solver::State(y(1), profile_rhs(xi, y(0), y(1), p, N, alpha));
  };
  const double blow_up = 2.0 * std::max(a0, Cp);
  bool crossed = false, diverged = false;
  auto on_step = [&](double xi, const Solver::State& y, const Solver::State& dy) {
    if (y(0) < 0.0) {
      // Root of the Hermite interpolant on the last step.
      const double xa = s.xi.back(), fa = s.F.back(), da = s.dF.back();
      double lo = xa, hi = xi;
      for (int it = 0; it < 200 && hi - lo > 1e-15 * hi; ++it) {
        const double mid = 0.5 * (lo + hi);
        (hermite(xa, fa, da, xi, y(0), dy(0), mid).value > 0.0 ? lo : hi) = mid;
      }
      s.xi_cross = 0.5 * (lo + hi);
      s.xi.push_back(s.xi_cross);
      s.F.push_back(0.0);
      s.dF.push_back(hermite(xa, fa, da, xi, y(0), dy(0), s.xi_cross).slope);
      crossed = true;
      return false;
    }
    s.xi.push_back(xi);
    s.F.push_back(y(0));
    s.dF.push_back(y(1));
    if (y(0) > blow_up) {
      diverged = true;
      return false;
    }
    return true;
  };
  solver.integrate(rhs, x0, Solver::State(s.F.back(), s.dF.back()), opts.xi_max, on_step);

  if (crossed) {
    s.tail_class = TailClass::HitsZero;
    return s;
  }
  if (diverged) {
    s.tail_class = TailClass::Diverges;
    return s;
  }
  fit_tail(s);
  const double q = s.q();
  if (std::abs(a0 - Cp) <= 1e-12 * Cp)
    s.tail_class = TailClass::Flat;
  else if (std::pow(s.xi.back(), q) * s.F.back() < opts.fast_decay_ratio * a0)
    s.tail_class = TailClass::FastDecay;
  else if (s.A_tail > 0.0 && s.fit_residual < opts.plateau_tol)
    s.tail_class = TailClass::AlgebraicTail;
  else
    s.tail_class = TailClass::Unresolved;
  return s;
}

double ProfileSolution::operator()(double x) const {
  x = std::abs(x);
  if (xi.empty()) throw UsageError("empty profile");
  if (x <= xi.back()) {
    const auto it = std::upper_bound(xi.begin(), xi.end(), x);
    const std::size_t j = std::min<std::size_t>(it - xi.begin(), xi.size() - 1);
    const std::size_t i = j - 1;
    return hermite(xi[i], F[i], dF[i], xi[j], F[j], dF[j], x).value;
  }
  const double xe = xi.back(), fe = F.back();
  switch (tail_class) {
    case TailClass::HitsZero: return 0.0;
    case TailClass::Flat: return fe;
    case TailClass::AlgebraicTail: return std::pow(x, -q()) * (A_tail + B_tail / (x * x));
    case TailClass::FastDecay:
      return fe * std::pow(x / xe, q() - N) * std::exp(-(x * x - xe * xe) / (4.0 * alpha));
    case TailClass::Unresolved: return fe * std::pow(xe / x, q());
    case TailClass::Diverges: break;
  }
  throw DomainError("diverging profile has no value past its last sample");
}

double ProfileSolution::derivative(double x) const {
  const double sign = x < 0.0 ? -1.0 : 1.0;
  x = std::abs(x);
  if (x <= xi.back()) {
    const auto it = std::upper_bound(xi.begin(), xi.end(), x);
    const std::size_t j = std::min<std::size_t>(it - xi.begin(), xi.size() - 1);
    const std::size_t i = j - 1;
    return sign * hermite(xi[i], F[i], dF[i], xi[j], F[j], dF[j], x).slope;
  }
  const double v = (*this)(x);
  switch (tail_class) {
    case TailClass::HitsZero:
    case TailClass::Flat: return 0.0;
    case TailClass::AlgebraicTail:
      return sign * std::pow(x, -q() - 1.0) * (-q() * A_tail - (q() + 2.0) * B_tail / (x * x));
    case TailClass::FastDecay: return sign * v * ((q() - N) / x - x / (2.0 * alpha));
    case TailClass::Unresolved: return sign * v * (-q() / x);
    case TailClass::Diverges: break;
  }
  throw DomainError("diverging profile has no value past its last sample");
}

std::pair<double, double> vss_bracket(double p, int N, double alpha, const ProfileOptions& opts,
                                      int n) {
  const double Cp = flat_constant(p);
  std::vector<std::pair<double, TailClass>> probes;
  for (int k = 1; k < n; ++k) {
    const double a = Cp * k / n;
    probes.emplace_back(a, integrate_profile(a, p, N, alpha, opts).tail_class);
  }
  int changes = 0;
  std::size_t at = 0;
  bool valid = probes.front().second == TailClass::HitsZero;
  for (std::size_t i = 0; i < probes.size(); ++i) {
    const bool hz = probes[i].second == TailClass::HitsZero;
    if (probes[i].second == TailClass::Diverges || probes[i].second == TailClass::Flat)
      valid = false;
    if (i > 0 && hz != (probes[i - 1].second == TailClass::HitsZero)) {
      ++changes;
      at = i;
    }
  }
  if (!valid || changes != 1) {
    std::ostringstream msg;
    msg << "shooting outcomes do not split once along the a0 ladder:";
    for (const auto& [a, c] : probes) msg << ' ' << format_double(a) << ':' << to_string(c);
    throw AmbiguousError(msg.str());
  }
  return {probes[at - 1].first, probes[at].first};
}

ProfileSolution shoot_vss(double p, int N, double alpha, double bracket_lo, double bracket_hi,
                          double bisect_tol, const ProfileOptions& opts) {
  if (!(bisect_tol > 0.0)) throw DomainError("bisection tolerance must be positive");
  const ProfileSolution lo = integrate_profile(bracket_lo, p, N, alpha, opts);
  const ProfileSolution hi = integrate_profile(bracket_hi, p, N, alpha, opts);
  double zero_end, pos_end;
  ProfileSolution pos_profile;
  if (lo.tail_class == TailClass::HitsZero && stays_positive(hi.tail_class)) {
    zero_end = bracket_lo;
    pos_end = bracket_hi;
    pos_profile = hi;
  } else if (hi.tail_class == TailClass::HitsZero && stays_positive(lo.tail_class)) {
    zero_end = bracket_hi;
    pos_end = bracket_lo;
    pos_profile = lo;
  } else {
    throw BracketError("VSS bracket [" + format_double(bracket_lo) + ", " +
                       format_double(bracket_hi) + "] classifies as " +
                       std::string(to_string(lo.tail_class)) + " / " +
                       std::string(to_string(hi.tail_class)));
  }

  while (std::abs(pos_end - zero_end) > bisect_tol) {
    const double mid = 0.5 * (zero_end + pos_end);
    if (mid == zero_end || mid == pos_end) break;
    ProfileSolution m = integrate_profile(mid, p, N, alpha, opts);
    switch (m.tail_class) {
      case TailClass::HitsZero: zero_end = mid; break;
      case TailClass::Diverges:
      case TailClass::Flat:
        throw AmbiguousError("VSS bisection met a non-decaying profile at a0=" +
                             format_double(mid));
      default:
        pos_end = mid;
        pos_profile = std::move(m);
    }
  }
  ProfileSolution out = integrate_profile(0.5 * (zero_end + pos_end), p, N, alpha, opts);
  if (out.tail_class == TailClass::HitsZero) out = std::move(pos_profile);
  out.bracket = std::make_pair(zero_end, pos_end);
  return out;
}

ProfileSolution shoot_UA(double A, double p, int N, double alpha, const ProfileOptions& opts,
                         std::optional<double> a_star, std::vector<UAProbe>* probes_out) {
  if (!(A > 0.0)) throw DomainError("U_A needs A > 0");
  if (!a_star) {
    const auto [lo, hi] = vss_bracket(p, N, alpha, opts);
    a_star = shoot_vss(p, N, alpha, lo, hi, 1e-10, opts).a0;
  }
  const double Cp = flat_constant(p);
  const double as = *a_star;
  if (!(as > 0.0 && as < Cp)) throw DomainError("a* must lie in (0, C_p)");

  std::vector<UAProbe> probes;
  auto measured = [](const ProfileSolution& s) {
    switch (s.tail_class) {
      case TailClass::HitsZero:
      case TailClass::FastDecay: return 0.0;
      case TailClass::AlgebraicTail:
      case TailClass::Unresolved: return s.A_tail;
      default: break;
    }
    throw AmbiguousError("U_A shooting met a non-decaying profile at a0=" + format_double(s.a0));
  };
  auto probe = [&](double a) {
    ProfileSolution s = integrate_profile(a, p, N, alpha, opts);
    probes.push_back({a, s.tail_class, measured(s)});
    return s;
  };
  auto check_monotone = [&]() {
    auto sorted = probes;
    std::sort(sorted.begin(), sorted.end(),
              [](const UAProbe& x, const UAProbe& y) { return x.a0 < y.a0; });
    for (std::size_t i = 1; i < sorted.size(); ++i)
      if (sorted[i].A_tail < sorted[i - 1].A_tail * (1.0 - 1e-9) - 1e-15) {
        std::ostringstream msg;
        msg << "measured tail constant is not monotone in a0:";
        for (const auto& pr : sorted)
          msg << ' ' << format_double(pr.a0) << "->" << format_double(pr.A_tail);
        throw AmbiguousError(msg.str());
      }
  };

  double lo = as, hi = as;
  ProfileSolution best;
  bool found = false;
  for (int k = 1; k <= 50; ++k) {
    hi = Cp - (Cp - as) * std::ldexp(1.0, -k);
    best = probe(hi);
    if (probes.back().A_tail >= A) {
      found = true;
      break;
    }
    lo = hi;
  }
  check_monotone();
  if (!found) throw BracketError("no a0 below C_p reaches tail constant " + format_double(A));

  for (int it = 0; it < 200; ++it) {
    const double mid = 0.5 * (lo + hi);
    if (mid == lo || mid == hi) break;
    ProfileSolution s = probe(mid);
    const double a_tail = probes.back().A_tail;
    if (std::abs(a_tail - A) < std::abs(measured(best) - A)) best = s;
    if (std::abs(a_tail - A) <= 1e-9 * A) break;
    (a_tail < A ? lo : hi) = mid;
  }
  check_monotone();
  if (probes_out) *probes_out = probes;
  return best;
}

double eval_profile(const ProfileSolution& profile, double r, double t) {
  if (!(t > 0.0)) throw DomainError("profile evaluation needs t > 0");
  return std::pow(t, -1.0 / (profile.p - 1.0)) * profile(r / std::sqrt(t));
}

double profile_pde_residual(const ProfileSolution& profile, double t, double r_max,
                            int samples, double step) {
  const double p = profile.p;
  const double a = profile.alpha;
  const int N = profile.N;
  auto U = [&](double r, double s) { return eval_profile(profile, std::abs(r), s); };
  const double dt = step * t;
  double worst = 0.0, peak = 0.0;
  for (int i = 0; i <= samples; ++i) {
    const double r = r_max * i / samples;
    if (N > 1 && r < 10.0 * step) continue;
    const double u = U(r, t);
    const double urr = (-U(r + 2 * step, t) + 16 * U(r + step, t) - 30 * u +
                        16 * U(r - step, t) - U(r - 2 * step, t)) /
                       (12 * step * step);
    const double ur = (-U(r + 2 * step, t) + 8 * U(r + step, t) - 8 * U(r - step, t) +
                       U(r - 2 * step, t)) /
                      (12 * step);
    const double ut = (-U(r, t + 2 * dt) + 8 * U(r, t + dt) - 8 * U(r, t - dt) +
                       U(r, t - 2 * dt)) /
                      (12 * dt);
    const double lap = N > 1 ? urr + (N - 1) * ur / r : urr;
    worst = std::max(worst, std::abs(ut - a * lap + spow(u, p)));
    peak = std::max(peak, std::abs(u));
  }
  return peak > 0.0 ? worst / peak : worst;
}

void save_profile(const ProfileSolution& s, const std::filesystem::path& path) {
  std::vector<std::pair<std::string, std::string>> meta = {
      {"p", format_double(s.p)},
      {"N", std::to_string(s.N)},
      {"alpha", format_double(s.alpha)},
      {"a0", format_double(s.a0)},
      {"class", std::string(to_string(s.tail_class))},
      {"A_tail", format_double(s.A_tail)},
      {"B_tail", format_double(s.B_tail)},
      {"fit_residual", format_double(s.fit_residual)},
      {"xi_cross", format_double(s.xi_cross)},
      {"abs_tol", format_double(s.options.abs_tol)},
      {"rel_tol", format_double(s.options.rel_tol)},
      {"xi_max", format_double(s.options.xi_max)},
      {"xi_start", format_double(s.options.xi_start)},
  };
  if (s.bracket) {
    meta.emplace_back("bracket_lo", format_double(s.bracket->first));
    meta.emplace_back("bracket_hi", format_double(s.bracket->second));
  }
  CsvWriter w(path, {"xi", "F", "dF"}, meta);
  for (std::size_t i = 0; i < s.xi.size(); ++i) {
    w.cell(s.xi[i]).cell(s.F[i]).cell(s.dF[i]);
    w.end_row();
  }
}

ProfileSolution load_profile(const std::filesystem::path& path) {
  const CsvTable t = read_csv(path);
  auto meta = [&](const std::string& k) {
    const auto it = t.meta.find(k);
    if (it == t.meta.end()) throw ConfigError(path.string() + ": missing header key " + k);
    return it->second;
  };
  ProfileSolution s;
  s.p = parse_double(meta("p"), "p");
  s.N = static_cast<int>(parse_double(meta("N"), "N"));
  s.alpha = parse_double(meta("alpha"), "alpha");
  s.a0 = parse_double(meta("a0"), "a0");
  s.tail_class = parse_tail_class(meta("class"));
  s.A_tail = parse_double(meta("A_tail"), "A_tail");
  s.B_tail = parse_double(meta("B_tail"), "B_tail");
  s.fit_residual = parse_double(meta("fit_residual"), "fit_residual");
  s.xi_cross = parse_double(meta("xi_cross"), "xi_cross");
  s.options.abs_tol = parse_double(meta("abs_tol"), "abs_tol");
  s.options.rel_tol = parse_double(meta("rel_tol"), "rel_tol");
  s.options.xi_max = parse_double(meta("xi_max"), "xi_max");
  s.options.xi_start = parse_double(meta("xi_start"), "xi_start");
  if (t.meta.count("bracket_lo"))
    s.bracket = std::make_pair(parse_double(meta("bracket_lo")), parse_double(meta("bracket_hi")));
  s.xi = t.column("xi");
  s.F = t.column("F");
  s.dF = t.column("dF");
  if (s.xi.size() < 2) throw ConfigError(path.string() + ": profile has fewer than 2 samples");
  return s;
}

ProfileSolution cached_vss(const std::filesystem::path& cache_dir, double p, int N,
                           double alpha, double bisect_tol, const ProfileOptions& opts) {
  std::ostringstream key;
  key << "vss;p=" << format_double(p) << ";N=" << N << ";alpha=" << format_double(alpha)
      << ";abs_tol=" << format_double(opts.abs_tol) << ";rel_tol=" << format_double(opts.rel_tol)
      << ";xi_max=" << format_double(opts.xi_max) << ";xi_start=" << format_double(opts.xi_start)
      << ";fast=" << format_double(opts.fast_decay_ratio)
      << ";plateau=" << format_double(opts.plateau_tol)
      << ";bisect_tol=" << format_double(bisect_tol);
  char name[64];
  std::snprintf(name, sizeof name, "vss_%016llx.csv",
                static_cast<unsigned long long>(fnv1a64(key.str())));
  const auto path = cache_dir / name;
  if (std::filesystem::exists(path)) return load_profile(path);
  const auto [lo, hi] = vss_bracket(p, N, alpha, opts);
  ProfileSolution s = shoot_vss(p, N, alpha, lo, hi, bisect_tol, opts);
  save_profile(s, path);
  return s;
}

}  // namespace nlab
