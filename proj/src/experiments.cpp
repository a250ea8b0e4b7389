#include "mep/experiments.hpp"

#include <json.hpp>

#include <cstdio>
#include <fstream>
#include <sstream>

namespace mep {

using json = nlohmann::ordered_json;

std::string format_full(double v) {
  char buf[48];
  std::snprintf(buf, sizeof buf, "%.16e", v);
  return buf;
}

void write_atomic(const std::filesystem::path& path, const std::string& bytes) {
  std::filesystem::path tmp = path;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out)
      throw Error(Errc::io_error, "cannot open " + tmp.string());
    out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
    out.flush();
    if (!out)
      throw Error(Errc::io_error, "short write to " + tmp.string());
  }
  std::error_code ec;
  std::filesystem::rename(tmp, path, ec);
  if (ec)
    throw Error(Errc::io_error,
                "cannot move " + tmp.string() + " into place: " + ec.message());
}

void emit_sweep_csv(const SweepCsv& table, const std::filesystem::path& path) {
  if (table.header.empty() || table.rows.empty())
    throw Error(Errc::domain_violation, "refusing to emit an empty table");
  std::ostringstream out;
  for (std::size_t k = 0; k < table.header.size(); ++k)
    out << (k ? "," : "") << table.header[k];
  out << "\n";
  for (const auto& row : table.rows) {
    if (row.size() != table.header.size())
      throw Error(Errc::domain_violation, "row width != header width");
    for (std::size_t k = 0; k < row.size(); ++k)
      out << (k ? "," : "") << format_full(row[k]);
    out << "\n";
  }
  for (const auto& line : table.footers) out << line << "\n";
  write_atomic(path, out.str());
}

namespace {

json basis_to_json(const Basis& b) {
  json j;
  if (const auto* g = std::get_if<GridBasis>(&b)) {
    j["type"] = "grid";
    j["x_min"] = g->x_min;
    j["x_max"] = g->x_max;
    j["n_points"] = g->n_points;
  } else if (const auto* f = std::get_if<FockBasis>(&b)) {
    j["type"] = "fock";
    j["dim"] = f->dim;
    j["center_q"] = f->center_q;
    j["center_p"] = f->center_p;
    j["mass_scale"] = f->mass_scale;
    j["hbar"] = f->hbar;
  } else {
    const auto& p = std::get<ProductBasis>(b);
    j["type"] = "product";
    j["factors"] = json::array();
    for (const auto& f : p.factors)
      j["factors"].push_back(basis_to_json(Basis(f)));
  }
  return j;
}

Basis basis_from_json(const json& j) {
  const std::string type = j.at("type");
  if (type == "grid")
    return GridBasis{j.at("x_min"), j.at("x_max"), j.at("n_points")};
  if (type == "fock")
    return FockBasis{j.at("dim"), j.at("center_q"), j.at("center_p"),
                     j.at("mass_scale"), j.at("hbar")};
  if (type == "product") {
    ProductBasis p;
    for (const auto& f : j.at("factors"))
      p.factors.push_back(std::get<FockBasis>(basis_from_json(f)));
    return p;
  }
  throw Error(Errc::io_error, "unknown basis type '" + type + "'");
}

double basis_hbar_or(const Basis& b, double fallback) {
  if (const auto* f = std::get_if<FockBasis>(&b)) return f->hbar;
  if (const auto* p = std::get_if<ProductBasis>(&b))
    if (!p->factors.empty()) return p->factors[0].hbar;
  return fallback;
}

}  // namespace

void dump_state(const StateOperator& rho, const std::filesystem::path& path,
                double hbar) {
  const double h = basis_hbar_or(rho.basis, hbar);
  const auto m = moments_of_state(rho, h);

  json j;
  j["basis"] = basis_to_json(rho.basis);
  j["dim"] = static_cast<int>(rho.mat.rows());
  j["hbar"] = h;
  j["moments"] = json::array();
  for (const auto& mode : m.modes)
    j["moments"].push_back(
        json{{"q", mode.Q}, {"p", mode.P}, {"dq", mode.dQ}, {"dp", mode.dP}});
  j["entropy"] = von_neumann_entropy(rho);
  j["purity"] = purity(rho);
  j["matrix"] = json::array();
  for (Eigen::Index r = 0; r < rho.mat.rows(); ++r)
    for (Eigen::Index c = 0; c < rho.mat.cols(); ++c)
      j["matrix"].push_back(
          json::array({rho.mat(r, c).real(), rho.mat(r, c).imag()}));
  write_atomic(path, j.dump(2) + "\n");
}

StateOperator load_state(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in)
    throw Error(Errc::io_error, "cannot read " + path.string());
  json j;
  try {
    in >> j;
    const Basis basis = basis_from_json(j.at("basis"));
    const int dim = j.at("dim");
    const auto& entries = j.at("matrix");
    if (static_cast<int>(entries.size()) != dim * dim)
      throw Error(Errc::io_error, "matrix entry count != dim^2");
    MatrixXC<double> mat(dim, dim);
    for (int r = 0; r < dim; ++r)
      for (int c = 0; c < dim; ++c) {
        const auto& e = entries[r * dim + c];
        mat(r, c) = {e.at(0), e.at(1)};
      }
    return make_state(basis, std::move(mat));
  } catch (const json::exception& e) {
    throw Error(Errc::io_error, "malformed state file: " + std::string(e.what()));
  }
}

namespace {

json params_to_json(const ExperimentParams& p) {
  json j;
  std::visit(
      [&j](const auto& c) {
        using T = std::decay_t<decltype(c)>;
        if constexpr (std::is_same_v<T, PacketReportConfig>) {
          j = {{"q", c.q},       {"p", c.p},   {"dq", c.dq},
               {"dp", c.dp},     {"hbar", c.hbar}, {"dim", c.dim}};
        } else if constexpr (std::is_same_v<T, MaxEntVerifyConfig>) {
          j = {{"q", c.q},           {"p", c.p},
               {"dq", c.dq},         {"dp", c.dp},
               {"hbar", c.hbar},     {"dim", c.dim},
               {"tol", c.tol},       {"max_iter", c.max_iter},
               {"td_tol", c.td_tol}};
        } else if constexpr (std::is_same_v<T, ClassicalLimitConfig>) {
          j = {{"potential", c.potential},
               {"omega", c.omega},
               {"lambda4", c.lambda4},
               {"well_a", c.well_a},
               {"well_b", c.well_b},
               {"mass", c.mass},
               {"x_min", c.x_min},
               {"x_max", c.x_max},
               {"n_points", c.n_points},
               {"q", c.q},
               {"p", c.p},
               {"dq", c.dq},
               {"dp", c.dp},
               {"hbar", c.hbar},
               {"mode", c.mode},
               {"levels", c.levels},
               {"t_end", c.t_end},
               {"dt", c.dt},
               {"n_samples", c.n_samples},
               {"n_records", c.n_records}};
        } else if constexpr (std::is_same_v<T, DisturbanceConfig>) {
          j = {{"x_min", c.x_min},
               {"x_max", c.x_max},
               {"n_points", c.n_points},
               {"psi_center", c.psi_center},
               {"phi_center", c.phi_center},
               {"width", c.width},
               {"hbar", c.hbar},
               {"region_l", c.region_l},
               {"region_r", c.region_r},
               {"restricted_tol", c.restricted_tol}};
        } else if constexpr (std::is_same_v<T, DlocalCheckConfig>) {
          j = {{"x_min", c.x_min},   {"x_max", c.x_max},
               {"n_points", c.n_points}, {"region_l", c.region_l},
               {"region_r", c.region_r}, {"tol", c.tol}};
        } else {
          j = {{"x_min", c.x_min},
               {"x_max", c.x_max},
               {"n_points", c.n_points},
               {"psi_center", c.psi_center},
               {"width", c.width},
               {"hbar", c.hbar},
               {"other_centers", c.other_centers},
               {"other_width", c.other_width},
               {"region_l", c.region_l},
               {"region_r", c.region_r},
               {"epsilon", c.epsilon},
               {"epsilon_prime", c.epsilon_prime}};
        }
      },
      p);
  return j;
}

WaveFunction gaussian_state(const GridBasis& g, double center, double width) {
  if (!(width > 0))
    throw Error(Errc::domain_violation, "gaussian width must be positive");
  const VectorX<double> x = g.points();
  VectorXC<double> v(g.n_points);
  for (int j = 0; j < g.n_points; ++j) {
    const double d = x[j] - center;
    v[j] = std::exp(-d * d / (4 * width * width));
  }
  return make_wavefunction(Basis(g), std::move(v));
}

double exterior_action(const KernelOperator& a, const Region& d) {
  const VectorX<double> x = a.basis.points();
  const double w = a.basis.weight();
  double worst = 0;
  for (int j = 0; j < a.basis.n_points; ++j) {
    if (region_contains(d, x[j])) continue;
    worst = std::max(worst, w * a.kernel.col(j).norm());
    worst = std::max(worst, w * a.kernel.row(j).norm());
  }
  return worst;
}

void add_check(RunResult& r, std::string label, double value, double threshold,
               bool pass) {
  r.checks.push_back(CheckResult{std::move(label), value, threshold, pass});
  r.pass = r.pass && pass;
}

RunResult run_packet_report(const PacketReportConfig& c,
                            const std::filesystem::path& out) {
  const auto m = single_mode(c.q, c.p, c.dq, c.dp, c.hbar);
  const double nu = nu_from_moments(c.dq, c.dp, c.hbar);
  const int dim = c.dim > 0 ? c.dim : recommended_dim(nu);
  const Basis basis(matched_fock_basis(m.modes[0], c.hbar, dim));
  const auto rho = me_packet(m, basis);
  const auto got = moments_of_state(rho, c.hbar);

  RunResult r;
  const auto& g = got.modes[0];
  add_check(r, "mean position reproduced", std::abs(g.Q - c.q), 1e-6,
            std::abs(g.Q - c.q) < 1e-6);
  add_check(r, "mean momentum reproduced", std::abs(g.P - c.p), 1e-6,
            std::abs(g.P - c.p) < 1e-6);
  add_check(r, "position spread reproduced", std::abs(g.dQ - c.dq), 1e-6,
            std::abs(g.dQ - c.dq) < 1e-6);
  add_check(r, "momentum spread reproduced", std::abs(g.dP - c.dp), 1e-6,
            std::abs(g.dP - c.dp) < 1e-6);

  const double ent = von_neumann_entropy(rho);
  const double closed = me_entropy_closed_form(nu);
  add_check(r, "entropy matches closed form", std::abs(ent - closed), 1e-6,
            std::abs(ent - closed) < 1e-6);
  const double pur = purity(rho);
  add_check(r, "purity matches 1/nu", std::abs(pur - 1 / nu), 1e-6,
            std::abs(pur - 1 / nu) < 1e-6);

  dump_state(rho, out / "state.json", c.hbar);
  emit_sweep_csv(SweepCsv{{"nu", "entropy", "purity", "q", "p", "dq", "dp"},
                          {{nu, ent, pur, g.Q, g.P, g.dQ, g.dP}},
                          {}},
                 out / "report.csv");
  r.artifacts = {out / "state.json", out / "report.csv"};
  return r;
}

RunResult run_maxent_verify(const MaxEntVerifyConfig& c,
                            const std::filesystem::path& out) {
  const auto target = single_mode(c.q, c.p, c.dq, c.dp, c.hbar);
  const double nu = nu_from_moments(c.dq, c.dp, c.hbar);
  const int dim = c.dim > 0 ? c.dim : recommended_dim(nu);
  const auto sol =
      solve_maxent(MaxEntProblem{target, dim, c.tol, c.max_iter});

  const auto ref =
      me_packet(target, Basis(matched_fock_basis(target.modes[0], c.hbar, dim)));
  const double td = trace_distance(sol.state, ref);
  double res = 0;
  for (const double v : sol.residuals) res = std::max(res, std::abs(v));

  RunResult r;
  add_check(r, "trace distance to the packet", td, c.td_tol, td < c.td_tol);
  add_check(r, "max moment residual", res, c.tol, res <= c.tol);
  add_check(r, "iterations within budget", sol.iterations, c.max_iter,
            sol.iterations <= c.max_iter);

  dump_state(sol.state, out / "maxent_state.json", c.hbar);
  emit_sweep_csv(
      SweepCsv{{"nu", "trace_distance", "iterations", "res_q", "res_p",
                "res_qq", "res_pp"},
               {{nu, td, double(sol.iterations), sol.residuals[0],
                 sol.residuals[1], sol.residuals[2], sol.residuals[3]}},
               {}},
      out / "verify.csv");
  r.artifacts = {out / "maxent_state.json", out / "verify.csv"};
  return r;
}

PotentialSpec potential_from(const ClassicalLimitConfig& c) {
  if (c.potential == "free") return free_potential(c.mass);
  if (c.potential == "harmonic") return harmonic_potential(c.omega, c.mass);
  if (c.potential == "quartic") return quartic_potential(c.lambda4, c.mass);
  if (c.potential == "double_well")
    return double_well_potential(c.well_a, c.well_b, c.mass);
  throw Error(Errc::config_error,
              "unknown potential '" + c.potential +
                  "' (free|harmonic|quartic|double_well)");
}

RunResult run_classical_limit(const ClassicalLimitConfig& c,
                              const std::filesystem::path& out,
                              std::uint64_t seed) {
  SweepMode mode;
  if (c.mode == "shrink_hbar") mode = SweepMode::shrink_hbar;
  else if (c.mode == "grow_spreads") mode = SweepMode::grow_spreads;
  else
    throw Error(Errc::config_error,
                "unknown mode '" + c.mode + "' (shrink_hbar|grow_spreads)");

  const auto grid = build_grid(c.x_min, c.x_max, c.n_points);
  const auto v = potential_from(c);
  const auto m = single_mode(c.q, c.p, c.dq, c.dp, c.hbar);
  const auto table = hbar_sweep(grid, v, m, c.levels, mode, c.t_end, c.dt,
                                c.n_samples, seed, c.n_records);

  SweepCsv csv;
  csv.header = {"hbar", "nu", "dQ_disc", "dP_disc", "Q_disc", "P_disc",
                "aggregate"};
  for (const auto& row : table.rows)
    csv.rows.push_back({row.hbar, row.nu, row.max_dq, row.max_dp, row.max_q,
                        row.max_p, row.aggregate});
  csv.footers = {"# fitted_order=" + format_full(table.fitted_order),
                 "# order_stderr=" + format_full(table.order_stderr)};
  emit_sweep_csv(csv, out / "sweep.csv");

  RunResult r;
  if (table.rows.size() > 1) {
    double worst_ratio = 0;
    for (std::size_t i = 1; i < table.rows.size(); ++i)
      worst_ratio = std::max(
          worst_ratio, table.rows[i].aggregate / table.rows[i - 1].aggregate);
    add_check(r, "aggregate strictly decreasing", worst_ratio, 1.0,
              worst_ratio < 1.0);
    add_check(r, "fitted convergence order", table.fitted_order, 0.0, true);
  }
  r.artifacts = {out / "sweep.csv"};
  return r;
}

RunResult run_disturbance(const DisturbanceConfig& c,
                          const std::filesystem::path& out) {
  const auto grid = build_grid(c.x_min, c.x_max, c.n_points);
  const auto psi = gaussian_state(grid, c.psi_center, c.width);
  const auto phi = gaussian_state(grid, c.phi_center, c.width);
  const auto q = position_kernel(grid);
  const auto d = make_region<double>({{c.region_l, c.region_r}});
  const auto qd = restrict_to_region(q, d);

  RunResult r;
  SweepCsv csv;
  csv.header = {"sign", "global", "restricted"};
  for (const int sign : {+1, -1}) {
    const double glob = disturbance(psi, phi, sign, q);
    const double rest = disturbance(psi, phi, sign, qd);
    csv.rows.push_back({double(sign), glob, rest});
    add_check(r,
              std::string("restricted disturbance vanishes (") +
                  (sign > 0 ? "bosonic)" : "fermionic)"),
              rest, c.restricted_tol, rest < c.restricted_tol);
  }
  emit_sweep_csv(csv, out / "disturbance.csv");
  r.artifacts = {out / "disturbance.csv"};
  return r;
}

RunResult run_dlocal_check(const DlocalCheckConfig& c,
                           const std::filesystem::path& out) {
  const auto grid = build_grid(c.x_min, c.x_max, c.n_points);
  const auto d = make_region<double>({{c.region_l, c.region_r}});
  const std::vector<std::pair<std::string, KernelOperator>> probes = {
      {"identity", identity_kernel(grid)},
      {"position", position_kernel(grid)},
      {"position squared",
       multiplication_kernel(grid, [](double x) { return x * x; })}};

  RunResult r;
  SweepCsv csv;
  csv.header = {"probe", "raw_exterior_action", "restricted_exterior_action"};
  for (std::size_t k = 0; k < probes.size(); ++k) {
    const auto& [label, raw] = probes[k];
    const auto restricted = restrict_to_region(raw, d);
    const double raw_act = exterior_action(raw, d);
    const double res_act = exterior_action(restricted, d);
    csv.rows.push_back({double(k), raw_act, res_act});
    add_check(r, "raw " + label + " kernel leaks outside the region", raw_act,
              c.tol, !is_d_local(raw, d, c.tol));
    add_check(r, "restricted " + label + " kernel is region-local", res_act,
              c.tol, is_d_local(restricted, d, c.tol));
  }
  emit_sweep_csv(csv, out / "dlocal.csv");
  r.artifacts = {out / "dlocal.csv"};
  return r;
}

RunResult run_separation_status(const SeparationStatusConfig& c,
                                const std::filesystem::path& out) {
  const auto grid = build_grid(c.x_min, c.x_max, c.n_points);
  const auto d = make_region<double>({{c.region_l, c.region_r}});
  const auto psi = gaussian_state(grid, c.psi_center, c.width);
  std::vector<WaveFunction> others;
  for (const double center : c.other_centers)
    others.push_back(gaussian_state(grid, center, c.other_width));

  const SeparationCriteria crit{c.epsilon, c.epsilon_prime,
                                default_probes(grid, d)};
  const auto report = separation_status_check(psi, others, d, crit);

  RunResult r;
  SweepCsv csv;
  csv.header = {"check", "value", "threshold", "pass"};
  for (std::size_t k = 0; k < report.checks.size(); ++k) {
    const auto& chk = report.checks[k];
    csv.rows.push_back(
        {double(k), chk.value, chk.threshold, chk.pass ? 1.0 : 0.0});
    add_check(r, chk.label, chk.value, chk.threshold, chk.pass);
  }
  emit_sweep_csv(csv, out / "separation.csv");
  r.artifacts = {out / "separation.csv"};
  return r;
}

}  // namespace

RunResult run_experiment(const ExperimentConfig& cfg) {
  std::error_code ec;
  std::filesystem::create_directories(cfg.out_dir, ec);
  if (ec)
    throw Error(Errc::io_error, "cannot create output directory " +
                                    cfg.out_dir.string() + ": " + ec.message());

  return std::visit(
      [&cfg](const auto& params) -> RunResult {
        using T = std::decay_t<decltype(params)>;
        if constexpr (std::is_same_v<T, PacketReportConfig>)
          return run_packet_report(params, cfg.out_dir);
        else if constexpr (std::is_same_v<T, MaxEntVerifyConfig>)
          return run_maxent_verify(params, cfg.out_dir);
        else if constexpr (std::is_same_v<T, ClassicalLimitConfig>)
          return run_classical_limit(params, cfg.out_dir, cfg.seed);
        else if constexpr (std::is_same_v<T, DisturbanceConfig>)
          return run_disturbance(params, cfg.out_dir);
        else if constexpr (std::is_same_v<T, DlocalCheckConfig>)
          return run_dlocal_check(params, cfg.out_dir);
        else
          return run_separation_status(params, cfg.out_dir);
      },
      cfg.params);
}

void write_manifest(const ExperimentConfig& cfg, const RunResult& result,
                    double wall_seconds, const std::string& error,
                    const std::filesystem::path& path) {
  json j;
  j["kind"] = cfg.kind;
  j["tool_version"] = tool_version;
  j["seed"] = cfg.seed;
  j["wall_time_s"] = wall_seconds;
  j["config"] = params_to_json(cfg.params);
  j["artifacts"] = json::array();
  for (const auto& a : result.artifacts)
    j["artifacts"].push_back(a.filename().string());
  j["checks"] = json::array();
  for (const auto& c : result.checks)
    j["checks"].push_back(json{{"label", c.label},
                               {"value", c.value},
                               {"threshold", c.threshold},
                               {"pass", c.pass}});
  j["pass"] = result.pass && error.empty();
  if (!error.empty()) j["error"] = error;
  write_atomic(path, j.dump(2) + "\n");
}

}  // namespace mep
