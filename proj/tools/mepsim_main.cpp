#include <CLI11.hpp>

#include <chrono>
#include <fstream>
#include <iostream>

#include "mep/experiments.hpp"

namespace {

void add_common(CLI::App* sub, std::filesystem::path& out_dir,
                std::uint64_t& seed, std::string& config_path) {
  sub->add_option("--config", config_path,
                  "TOML config; command-line flags override")
      ->check(CLI::ExistingFile);
  sub->allow_config_extras(false);
  sub->add_option("--out", out_dir, "output directory");
  sub->add_option("--seed", seed, "PRNG seed");
}

void add_grid(CLI::App* sub, double& x_min, double& x_max, int& n_points) {
  sub->add_option("--x-min,--x_min", x_min, "grid left edge");
  sub->add_option("--x-max,--x_max", x_max, "grid right edge");
  sub->add_option("--n-points,--n_points", n_points, "grid size (power of two)")
      ->check(CLI::PositiveNumber);
}

void add_moments(CLI::App* sub, double& q, double& p, double& dq, double& dp,
                 double& hbar) {
  sub->add_option("--q", q, "mean position");
  sub->add_option("--p", p, "mean momentum");
  sub->add_option("--dq", dq, "position spread")->check(CLI::PositiveNumber);
  sub->add_option("--dp", dp, "momentum spread")->check(CLI::PositiveNumber);
  sub->add_option("--hbar", hbar, "Planck constant")
      ->check(CLI::PositiveNumber);
}

void add_region(CLI::App* sub, double& l, double& r) {
  sub->add_option("--region-l,--region_l", l, "region left endpoint");
  sub->add_option("--region-r,--region_r", r, "region right endpoint");
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"packet entropy, classical-limit, and identical-particle "
               "experiment runner"};
  app.set_version_flag("--version", mep::tool_version);
  app.require_subcommand(1);

  std::filesystem::path out_dir{"."};
  std::uint64_t seed = 0;
  std::string config_path;

  mep::PacketReportConfig pr;
  auto* s_pr = app.add_subcommand(
      "mepacket-report",
      "build the spread-matched packet, report moments, entropy, purity");
  add_common(s_pr, out_dir, seed, config_path);
  add_moments(s_pr, pr.q, pr.p, pr.dq, pr.dp, pr.hbar);
  s_pr->add_option("--dim", pr.dim, "basis truncation (0: automatic)");

  mep::MaxEntVerifyConfig mv;
  auto* s_mv = app.add_subcommand(
      "maxent-verify",
      "solve the constrained entropy maximization, compare with the packet");
  add_common(s_mv, out_dir, seed, config_path);
  add_moments(s_mv, mv.q, mv.p, mv.dq, mv.dp, mv.hbar);
  s_mv->add_option("--dim", mv.dim, "basis truncation (0: automatic)");
  s_mv->add_option("--tol", mv.tol, "moment residual tolerance")
      ->check(CLI::PositiveNumber);
  s_mv->add_option("--max-iter,--max_iter", mv.max_iter, "iteration budget")
      ->check(CLI::PositiveNumber);
  s_mv->add_option("--td-tol,--td_tol", mv.td_tol, "trace-distance pass threshold")
      ->check(CLI::PositiveNumber);

  mep::ClassicalLimitConfig cl;
  auto* s_cl = app.add_subcommand(
      "classical-limit",
      "sweep hbar or spreads, record quantum vs classical moment gaps");
  add_common(s_cl, out_dir, seed, config_path);
  add_grid(s_cl, cl.x_min, cl.x_max, cl.n_points);
  add_moments(s_cl, cl.q, cl.p, cl.dq, cl.dp, cl.hbar);
  s_cl->add_option("--potential", cl.potential,
                   "free|harmonic|quartic|double_well");
  s_cl->add_option("--omega", cl.omega, "harmonic frequency")
      ->check(CLI::PositiveNumber);
  s_cl->add_option("--lambda4", cl.lambda4, "quartic coefficient")
      ->check(CLI::PositiveNumber);
  s_cl->add_option("--well-a,--well_a", cl.well_a, "double-well strength")
      ->check(CLI::PositiveNumber);
  s_cl->add_option("--well-b,--well_b", cl.well_b, "double-well minimum at sqrt(b)")
      ->check(CLI::PositiveNumber);
  s_cl->add_option("--mass", cl.mass, "particle mass")
      ->check(CLI::PositiveNumber);
  s_cl->add_option("--mode", cl.mode, "shrink_hbar|grow_spreads");
  s_cl->add_option("--levels", cl.levels, "sweep levels");
  s_cl->add_option("--t-end,--t_end", cl.t_end, "final time")
      ->check(CLI::PositiveNumber);
  s_cl->add_option("--dt", cl.dt, "classical integrator step")
      ->check(CLI::PositiveNumber);
  s_cl->add_option("--n-samples,--n_samples", cl.n_samples, "ensemble size")
      ->check(CLI::PositiveNumber);
  s_cl->add_option("--n-records,--n_records", cl.n_records, "recorded times")
      ->check(CLI::PositiveNumber);

  mep::DisturbanceConfig di;
  auto* s_di = app.add_subcommand(
      "disturbance",
      "registration shift from a remote identical companion, global vs "
      "region-restricted observable");
  add_common(s_di, out_dir, seed, config_path);
  add_grid(s_di, di.x_min, di.x_max, di.n_points);
  add_region(s_di, di.region_l, di.region_r);
  s_di->add_option("--psi-center,--psi_center", di.psi_center, "registered packet center");
  s_di->add_option("--phi-center,--phi_center", di.phi_center, "companion center");
  s_di->add_option("--width", di.width, "packet position spread")
      ->check(CLI::PositiveNumber);
  s_di->add_option("--hbar", di.hbar, "Planck constant")
      ->check(CLI::PositiveNumber);
  s_di->add_option("--restricted-tol,--restricted_tol", di.restricted_tol,
                   "pass threshold for the restricted observable")
      ->check(CLI::PositiveNumber);

  mep::DlocalCheckConfig dl;
  auto* s_dl = app.add_subcommand(
      "dlocal-check", "verify which kernels act only inside a region");
  add_common(s_dl, out_dir, seed, config_path);
  add_grid(s_dl, dl.x_min, dl.x_max, dl.n_points);
  add_region(s_dl, dl.region_l, dl.region_r);
  s_dl->add_option("--tol", dl.tol, "locality tolerance")
      ->check(CLI::PositiveNumber);

  mep::SeparationStatusConfig se;
  auto* s_se = app.add_subcommand(
      "separation-status",
      "evaluate the separation criteria against identical companions");
  add_common(s_se, out_dir, seed, config_path);
  add_grid(s_se, se.x_min, se.x_max, se.n_points);
  add_region(s_se, se.region_l, se.region_r);
  s_se->add_option("--psi-center,--psi_center", se.psi_center, "registered packet center");
  s_se->add_option("--width", se.width, "registered packet spread")
      ->check(CLI::PositiveNumber);
  s_se->add_option("--hbar", se.hbar, "Planck constant")
      ->check(CLI::PositiveNumber);
  s_se->add_option("--other-centers,--other_centers", se.other_centers, "companion centers");
  s_se->add_option("--other-width,--other_width", se.other_width, "companion spread")
      ->check(CLI::PositiveNumber);
  s_se->add_option("--epsilon", se.epsilon, "probability threshold")
      ->check(CLI::PositiveNumber);
  s_se->add_option("--epsilon-prime,--epsilon_prime", se.epsilon_prime,
                   "disturbance threshold")
      ->check(CLI::PositiveNumber);

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForVersion& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return 2;
  }

  // config values fill in only the options not given on the command line;
  // unknown keys are hard errors
  if (!config_path.empty()) {
    CLI::App* active = app.get_subcommands().front();
    std::ifstream in(config_path);
    if (!in) {
      std::cerr << "cannot read config " << config_path << "\n";
      return 2;
    }
    try {
      active->parse_from_stream(in);
    } catch (const CLI::ParseError& e) {
      active->exit(e);
      return 2;
    }
  }

  mep::ExperimentConfig cfg;
  if (app.got_subcommand(s_pr)) cfg = {"mepacket-report", pr, out_dir, seed};
  if (app.got_subcommand(s_mv)) cfg = {"maxent-verify", mv, out_dir, seed};
  if (app.got_subcommand(s_cl)) cfg = {"classical-limit", cl, out_dir, seed};
  if (app.got_subcommand(s_di)) cfg = {"disturbance", di, out_dir, seed};
  if (app.got_subcommand(s_dl)) cfg = {"dlocal-check", dl, out_dir, seed};
  if (app.got_subcommand(s_se)) cfg = {"separation-status", se, out_dir, seed};

  mep::RunResult result;
  std::string error;
  int code = 0;
  const auto t0 = std::chrono::steady_clock::now();
  try {
    result = mep::run_experiment(cfg);
  } catch (const mep::Error& e) {
    error = e.what();
    code = mep::exit_code_for(e);
  }
  const double wall =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - t0)
          .count();

  try {
    std::filesystem::create_directories(cfg.out_dir);
    mep::write_manifest(cfg, result, wall, error,
                        cfg.out_dir / "manifest.json");
  } catch (const mep::Error& e) {
    std::cerr << e.what() << "\n";
    if (code == 0) code = mep::exit_code_for(e);
  }

  for (const auto& c : result.checks)
    std::cout << (c.pass ? "[pass] " : "[FAIL] ") << c.label << ": "
              << mep::format_full(c.value) << " vs "
              << mep::format_full(c.threshold) << "\n";
  if (!error.empty())
    std::cerr << cfg.kind << " failed: " << error << "\n";
  else
    std::cout << cfg.kind << (result.pass ? ": PASS" : ": FAIL") << "\n";
  return code;
}
