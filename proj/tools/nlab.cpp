// Command line front end: one experiment per invocation.
#include "nlab/config.hpp"
#include "nlab/csv.hpp"
#include "nlab/error.hpp"
#include "nlab/experiment.hpp"

#include <CLI11.hpp>

#include <cstdlib>
#include <iostream>

namespace {

std::string join(const std::vector<double>& v) {
  std::string s;
  for (std::size_t i = 0; i < v.size(); ++i) s += (i ? "," : "") + nlab::format_double(v[i]);
  return s;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"nlab: nonlocal diffusion-absorption lab"};
  app.require_subcommand(1);

  std::string config_path;
  std::vector<std::string> overrides;
  std::string out_dir;

  auto add_common = [&](CLI::App* sub, bool need_config) {
    auto* opt = sub->add_option("--config", config_path, "key=value config file");
    if (need_config) opt->required()->check(CLI::ExistingFile);
    sub->add_option("--set", overrides, "extra key=value assignments");
    sub->add_option("--out", out_dir, "output directory");
  };

  auto* run = app.add_subcommand("run", "run the experiment kind named in the config");
  add_common(run, true);
  auto* simulate = app.add_subcommand("simulate", "evolve a datum and record diagnostics");
  add_common(simulate, true);
  auto* barrier = app.add_subcommand("barrier", "check the stationary supersolution");
  add_common(barrier, true);
  auto* compare = app.add_subcommand("compare", "evolve an ordered pair of data");
  add_common(compare, true);

  auto* profile = app.add_subcommand("profile", "shoot a self-similar profile");
  add_common(profile, false);
  double p = 1.5, alpha = 0.0, A = 1.0;
  int N = 1;
  profile->add_option("--p", p)->required();
  profile->add_option("--N", N)->required();
  profile->add_option("--alpha", alpha)->required();
  auto* a_opt = profile->add_option("--A", A, "far-field amplitude (U_A mode)");
  auto* vss_flag = profile->add_flag("--vss", "very singular solution mode");
  a_opt->excludes(vss_flag);

  auto* wcheck = app.add_subcommand("wcheck", "check the W-series bounds");
  add_common(wcheck, false);
  std::vector<double> t_list;
  wcheck->add_option("--t", t_list)->required()->delimiter(',');

  auto* rates = app.add_subcommand("rates", "fit decay exponents of a trajectory");
  add_common(rates, false);
  std::string traj;
  std::vector<double> window;
  rates->add_option("--traj", traj)->required()->check(CLI::ExistingFile);
  rates->add_option("--window", window)->required()->delimiter(',')->expected(2);

  auto* converge = app.add_subcommand("converge", "distance of snapshots from a profile");
  add_common(converge, false);
  std::string profile_path;
  std::vector<double> K_list;
  converge->add_option("--traj", traj)->required()->check(CLI::ExistingFile);
  converge->add_option("--profile", profile_path)->required()->check(CLI::ExistingFile);
  converge->add_option("--K", K_list)->required()->delimiter(',');

  auto* oplimit = app.add_subcommand("oplimit", "rescaled operator against alpha Laplacian");
  add_common(oplimit, false);
  std::vector<double> lambda_list;
  oplimit->add_option("--lambda-list", lambda_list)->required()->delimiter(',');

  CLI11_PARSE(app, argc, argv);

  try {
    nlab::ExperimentConfig cfg;
    if (!config_path.empty()) cfg = nlab::load_config(config_path);
    for (const auto& kv : overrides) {
      const auto eq = kv.find('=');
      if (eq == std::string::npos) throw nlab::ConfigError("--set expects key=value: " + kv);
      nlab::set_config_value(cfg, kv.substr(0, eq), kv.substr(eq + 1));
    }

    CLI::App* sub = app.get_subcommands().front();
    const std::string name = sub->get_name();
    if (name != "run") nlab::set_config_value(cfg, "experiment.kind", name);
    if (sub == profile) {
      nlab::set_config_value(cfg, "model.p", nlab::format_double(p));
      nlab::set_config_value(cfg, "grid.N", std::to_string(N));
      nlab::set_config_value(cfg, "profile.alpha", nlab::format_double(alpha));
      const bool ua = a_opt->count() > 0;
      nlab::set_config_value(cfg, "profile.mode", ua ? "ua" : "vss");
      if (ua) nlab::set_config_value(cfg, "profile.A", nlab::format_double(A));
    } else if (sub == wcheck) {
      nlab::set_config_value(cfg, "diag.t_list", join(t_list));
    } else if (sub == rates) {
      nlab::set_config_value(cfg, "input.trajectory", traj);
      nlab::set_config_value(cfg, "diag.window", join(window));
    } else if (sub == converge) {
      nlab::set_config_value(cfg, "input.trajectory", traj);
      nlab::set_config_value(cfg, "input.profile", profile_path);
      nlab::set_config_value(cfg, "diag.K", join(K_list));
    } else if (sub == oplimit) {
      nlab::set_config_value(cfg, "diag.lambda_list", join(lambda_list));
    }

    if (const char* env = std::getenv("OUTPUT_DIR"); env && *env) cfg.output_dir = env;
    if (!out_dir.empty()) cfg.output_dir = out_dir;

    const nlab::ExperimentResult res = nlab::run_experiment(cfg);
    std::cout << "config_hash " << res.config_hash << '\n';
    for (const auto& a : res.artifacts) std::cout << (res.output_dir / a).string() << '\n';
    return 0;
  } catch (const std::exception& e) {
    std::cerr << "nlab: " << e.what() << '\n';
    return 1;
  }
}
