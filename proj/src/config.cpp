#include "nlab/config.hpp"

#include "nlab/csv.hpp"
#include "nlab/error.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <functional>
#include <set>
#include <sstream>

namespace nlab {

namespace {

std::string_view trim(std::string_view s) {
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.front()))) s.remove_prefix(1);
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.back()))) s.remove_suffix(1);
  return s;
}

int parse_int(std::string_view v, std::string_view key) {
  const double d = parse_double(v, key);
  if (d != std::floor(d) || std::abs(d) > 1e9)
    throw ConfigError("key '" + std::string(key) + "' expects an integer, got '" +
                      std::string(v) + "'");
  return static_cast<int>(d);
}

bool parse_bool(std::string_view v, std::string_view key) {
  if (v == "true" || v == "1" || v == "yes" || v == "on") return true;
  if (v == "false" || v == "0" || v == "no" || v == "off") return false;
  throw ConfigError("key '" + std::string(key) + "' expects a boolean, got '" +
                    std::string(v) + "'");
}

std::vector<double> parse_list(std::string_view v, std::string_view key) {
  std::vector<double> out;
  v = trim(v);
  if (v.empty()) return out;
  std::size_t start = 0;
  while (start <= v.size()) {
    const std::size_t comma = v.find(',', start);
    const std::size_t end = comma == std::string_view::npos ? v.size() : comma;
    out.push_back(parse_double(v.substr(start, end - start), key));
    if (comma == std::string_view::npos) break;
    start = comma + 1;
  }
  return out;
}

std::string format_list(const std::vector<double>& v) {
  std::string s;
  for (std::size_t i = 0; i < v.size(); ++i) s += (i ? "," : "") + format_double(v[i]);
  return s;
}

std::string one_of(std::string_view v, std::string_view key,
                   std::initializer_list<std::string_view> allowed) {
  for (auto a : allowed)
    if (v == a) return std::string(v);
  std::string msg = "key '" + std::string(key) + "' must be one of";
  for (auto a : allowed) msg += " " + std::string(a);
  throw ConfigError(msg + ", got '" + std::string(v) + "'");
}

struct Entry {
  std::string_view key;
  std::function<void(ExperimentConfig&, std::string_view)> set;
  std::function<std::string(const ExperimentConfig&)> get;
};

#define NLAB_DOUBLE(name, member)                                                       \
  Entry{name, [](ExperimentConfig& c, std::string_view v) { c.member = parse_double(v, name); }, \
        [](const ExperimentConfig& c) { return format_double(c.member); }}
#define NLAB_INT(name, member)                                                          \
  Entry{name, [](ExperimentConfig& c, std::string_view v) { c.member = parse_int(v, name); },    \
        [](const ExperimentConfig& c) { return std::to_string(c.member); }}
#define NLAB_BOOL(name, member)                                                         \
  Entry{name, [](ExperimentConfig& c, std::string_view v) { c.member = parse_bool(v, name); },   \
        [](const ExperimentConfig& c) { return std::string(c.member ? "true" : "false"); }}
#define NLAB_LIST(name, member)                                                         \
  Entry{name, [](ExperimentConfig& c, std::string_view v) { c.member = parse_list(v, name); },   \
        [](const ExperimentConfig& c) { return format_list(c.member); }}
#define NLAB_STRING(name, member)                                                       \
  Entry{name, [](ExperimentConfig& c, std::string_view v) { c.member = std::string(v); },        \
        [](const ExperimentConfig& c) { return c.member; }}
#define NLAB_CHOICE(name, member, ...)                                                  \
  Entry{name,                                                                           \
        [](ExperimentConfig& c, std::string_view v) { c.member = one_of(v, name, {__VA_ARGS__}); }, \
        [](const ExperimentConfig& c) { return c.member; }}

const std::vector<Entry>& entries() {
  static const std::vector<Entry> table = {
      NLAB_CHOICE("experiment.kind", kind, "simulate", "profile", "barrier", "wcheck", "rates",
                  "converge", "oplimit", "compare", "massdiv"),
      NLAB_STRING("output.dir", output_dir),
      NLAB_CHOICE("kernel.family", kernel_family, "bump"),
      NLAB_DOUBLE("kernel.d", kernel_d),
      NLAB_INT("kernel.quad_resolution", kernel_quad_resolution),
      NLAB_DOUBLE("model.p", p),
      NLAB_INT("grid.N", dim),
      NLAB_DOUBLE("grid.L", L),
      NLAB_DOUBLE("grid.h", h),
      NLAB_CHOICE("domain.mode", domain_mode, "truncated", "full", "periodic"),
      NLAB_CHOICE("datum.kind", datum_kind, "bump", "power_tail", "constant", "zero"),
      NLAB_DOUBLE("datum.amplitude", datum_amplitude),
      NLAB_DOUBLE("datum.radius", datum_radius),
      NLAB_DOUBLE("datum.A", datum_A),
      NLAB_DOUBLE("datum.c", datum_c),
      NLAB_CHOICE("conv.engine", conv_engine, "direct", "fast"),
      NLAB_BOOL("conv.check_oracle", conv_check_oracle),
      NLAB_DOUBLE("time.dt", dt),
      NLAB_DOUBLE("time.t_end", t_end),
      NLAB_DOUBLE("time.t_first", t_first),
      NLAB_DOUBLE("time.checkpoint_ratio", checkpoint_ratio),
      NLAB_BOOL("time.positivity_guard", positivity_guard),
      NLAB_CHOICE("scheme", scheme, "etd1", "picard"),
      NLAB_DOUBLE("picard.tol", picard_tol),
      NLAB_INT("picard.max_iter", picard_max_iter),
      NLAB_LIST("diag.snapshots", snapshots),
      NLAB_LIST("diag.K", K_list),
      NLAB_LIST("diag.lambda_list", lambda_list),
      NLAB_DOUBLE("diag.t_ref", t_ref),
      NLAB_DOUBLE("diag.R", R),
      NLAB_LIST("diag.window", window),
      NLAB_LIST("diag.t_list", t_list),
      NLAB_DOUBLE("barrier.c2_fraction", barrier_c2_fraction),
      NLAB_DOUBLE("barrier.A", barrier_A),
      NLAB_DOUBLE("barrier.B", barrier_B),
      NLAB_DOUBLE("compare.amplitude_high", compare_amplitude_high),
      NLAB_CHOICE("profile.mode", profile_mode, "vss", "ua"),
      NLAB_DOUBLE("profile.A", profile_A),
      NLAB_DOUBLE("profile.alpha", profile_alpha),
      NLAB_DOUBLE("profile.bisect_tol", profile_bisect_tol),
      NLAB_STRING("profile.cache_dir", profile_cache_dir),
      NLAB_STRING("input.trajectory", input_trajectory),
      NLAB_STRING("input.profile", input_profile),
  };
  return table;
}

#undef NLAB_DOUBLE
#undef NLAB_INT
#undef NLAB_BOOL
#undef NLAB_LIST
#undef NLAB_STRING
#undef NLAB_CHOICE

const Entry* find_entry(std::string_view key) {
  for (const auto& e : entries())
    if (e.key == key) return &e;
  return nullptr;
}

}  // namespace

void set_config_value(ExperimentConfig& cfg, std::string_view key, std::string_view value) {
  const Entry* e = find_entry(trim(key));
  if (!e) throw ConfigError("unknown key '" + std::string(trim(key)) + "'");
  e->set(cfg, trim(value));
}

ExperimentConfig parse_config(std::string_view text, std::string_view source) {
  ExperimentConfig cfg;
  std::set<std::string, std::less<>> seen;
  std::istringstream in{std::string(text)};
  std::string raw;
  int line_no = 0;
  while (std::getline(in, raw)) {
    ++line_no;
    std::string_view line = raw;
    if (const auto hash = line.find('#'); hash != std::string_view::npos)
      line = line.substr(0, hash);
    line = trim(line);
    if (line.empty()) continue;
    const std::string where = std::string(source) + ":" + std::to_string(line_no) + ": ";
    const auto eq = line.find('=');
    if (eq == std::string_view::npos) throw ConfigError(where + "expected key=value");
    const std::string_view key = trim(line.substr(0, eq));
    if (seen.count(key)) throw ConfigError(where + "duplicate key '" + std::string(key) + "'");
    seen.emplace(key);
    try {
      set_config_value(cfg, key, line.substr(eq + 1));
    } catch (const ConfigError& err) {
      throw ConfigError(where + err.what());
    }
  }
  return cfg;
}

ExperimentConfig load_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config " + path.string());
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_config(ss.str(), path.string());
}

std::string normalized_config(const ExperimentConfig& cfg) {
  std::string out;
  for (const auto& e : entries()) out += std::string(e.key) + "=" + e.get(cfg) + "\n";
  return out;
}

std::string config_hash(const ExperimentConfig& cfg) {
  // Where the outputs go does not change them.
  ExperimentConfig c = cfg;
  c.output_dir.clear();
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx",
                static_cast<unsigned long long>(fnv1a64(normalized_config(c))));
  return buf;
}

std::vector<std::string> config_keys() {
  std::vector<std::string> keys;
  for (const auto& e : entries()) keys.emplace_back(e.key);
  return keys;
}

}  // namespace nlab
