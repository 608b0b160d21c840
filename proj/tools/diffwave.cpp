// Command-line entry point: scenario simulation, property-check commands, and
// the sweep runner. Exit code 0 only when every requested verdict passes.

#include <CLI11.hpp>

#include <cstdio>
#include <fstream>
#include <iostream>
#include <sstream>

#include "diffwave/pipeline.hpp"

namespace {

std::string read_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot read config file: " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

diffwave::RunConfig load_config(const std::string& config_path, const std::string& preset,
                                const std::string& out_dir) {
  diffwave::RunConfig cfg;
  if (!config_path.empty() && !preset.empty())
    throw std::runtime_error("give either --config or --preset, not both");
  if (!config_path.empty())
    cfg = diffwave::parse_config(read_file(config_path));
  else if (!preset.empty())
    cfg = diffwave::preset_config(preset);
  else
    throw std::runtime_error("need --config PATH or --preset NAME");
  if (!out_dir.empty()) cfg.out_dir = out_dir;
  return cfg;
}

void print_fit_line(const diffwave::DecayFit& f) {
  const std::string tag = f.gated ? diffwave::to_string(f.verdict) : "report";
  std::printf("  [%s] %-22s expected % .4f  fitted % .4f  R2 %.6f\n", tag.c_str(),
              f.quantity.c_str(), f.expected_exponent, f.fitted_exponent, f.r_squared);
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"diffwave: damped p-system / M1 diffusion-wave laboratory"};
  app.require_subcommand(1);

  std::string config_path, preset, out_dir;
  unsigned long long seed = 0;
  int threads = 1;
  std::vector<std::string> sweep_configs;

  auto* simulate = app.add_subcommand("simulate", "run the full pipeline and write reports");
  simulate->add_option("--config", config_path, "scenario config file");
  simulate->add_option("--preset", preset, "bundled preset name");
  simulate->add_option("--out", out_dir, "output directory (overrides config)");
  simulate->add_option("--seed", seed, "seed for randomized sub-checks");

  auto* closure = app.add_subcommand("closure-check", "closure algebra property suite");
  closure->add_option("--seed", seed, "seed for random samples");

  auto* greens = app.add_subcommand("greens-check", "kernel scaling and J1 decay checks");

  auto* profile = app.add_subcommand("profile-check", "diffusion-wave rate checks");
  profile->add_option("--config", config_path, "scenario config file");
  profile->add_option("--preset", preset, "bundled preset name");
  profile->add_option("--out", out_dir, "output directory (overrides config)");

  auto* sweep = app.add_subcommand("sweep", "run several configs concurrently");
  sweep->add_option("--config", sweep_configs, "config files (repeatable)")->required();
  sweep->add_option("--threads", threads, "worker threads");

  CLI11_PARSE(app, argc, argv);

  try {
    if (simulate->parsed()) {
      diffwave::RunConfig cfg = load_config(config_path, preset, out_dir);
      diffwave::SimulationData sim = diffwave::cmd_simulate(cfg);
      std::printf("simulate: %s, grid L=%g N=%d, delta0=%.6g, %ld steps\n",
                  cfg.model_type.c_str(), sim.grid.length, sim.grid.cells, sim.delta0,
                  sim.traj.steps);
      std::printf("hypotheses: u+=0:%d L1-data:%d zero-mass:%d W0-L1:%d -> %s %s\n",
                  sim.flags.u_plus_zero, sim.flags.l1_data, sim.flags.zero_mass_w,
                  sim.flags.w0_l1, cfg.theorem.c_str(),
                  sim.flags.applicable(cfg.theorem) ? "applicable" : "NOT applicable");
      for (const auto& f : sim.fits) print_fit_line(f);
      std::printf("artifacts in %s\n", cfg.out_dir.c_str());
      std::printf("simulate: %s\n", sim.all_pass ? "PASS" : "FAIL");
      return sim.all_pass ? 0 : 1;
    }
    if (closure->parsed()) {
      auto r = diffwave::cmd_closure_check(seed);
      std::printf("closure.identity_max = %.3e : %s\n", r.identity_max,
                  r.identity_max <= 1e-12 ? "pass" : "fail");
      std::printf("closure.chi_bounds = %s\n", r.chi_bounds_ok ? "pass" : "fail");
      std::printf("closure.chi_monotone = %s\n", r.chi_monotone_ok ? "pass" : "fail");
      std::printf("closure.g_deriv_origin = %.3e : %s\n", r.g_deriv_origin,
                  r.g_deriv_origin <= 1e-14 ? "pass" : "fail");
      std::printf("closure.pressure_decreasing = %s\n", r.pressure_ok ? "pass" : "fail");
      std::printf("closure-check: %s\n", r.pass ? "PASS" : "FAIL");
      return r.pass ? 0 : 1;
    }
    if (greens->parsed()) {
      auto r = diffwave::cmd_greens_check();
      for (const auto& f : r.kernel_fits) print_fit_line(f);
      print_fit_line(r.j1_fit);
      std::printf("greens-check: %s\n", r.pass ? "PASS" : "FAIL");
      return r.pass ? 0 : 1;
    }
    if (profile->parsed()) {
      diffwave::RunConfig cfg = load_config(config_path, preset, out_dir);
      std::filesystem::create_directories(cfg.out_dir);
      auto r = diffwave::cmd_profile_check(
          cfg, (std::filesystem::path(cfg.out_dir) / "profile_decay.csv").string());
      std::printf("profile-check: delta0=%.6g\n", r.delta0);
      for (const auto& f : r.fits) print_fit_line(f);
      std::printf("correction e^{-at} ratio error = %.3e : %s\n", r.correction_rel_err,
                  r.correction_rel_err <= 1e-12 ? "pass" : "fail");
      std::printf("excess-mass drift = %.3e\n", r.conservation_drift);
      std::printf("profile-check: %s\n", r.pass ? "PASS" : "FAIL");
      return r.pass ? 0 : 1;
    }
    if (sweep->parsed()) {
      std::vector<diffwave::RunConfig> cfgs;
      for (const auto& p : sweep_configs) cfgs.push_back(diffwave::parse_config(read_file(p)));
      const bool ok = diffwave::run_sweep(cfgs, threads);
      std::printf("sweep: %s\n", ok ? "PASS" : "FAIL");
      return ok ? 0 : 1;
    }
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 2;
  }
  return 2;
}
