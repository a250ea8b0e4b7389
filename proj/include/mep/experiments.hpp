#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <variant>
#include <vector>

#include "mep/dynamics.hpp"
#include "mep/identicals.hpp"
#include "mep/maxent.hpp"
#include "mep/mepacket.hpp"

namespace mep {

inline constexpr const char* tool_version = "1.0.0";

// Kind-specific parameter blocks; CLI flags and config-file keys map onto
// these fields one to one.

struct PacketReportConfig {
  double q{0}, p{0}, dq{1}, dp{1}, hbar{1};
  int dim{0};  // 0: use recommended_dim(nu)
};

struct MaxEntVerifyConfig {
  double q{0}, p{0}, dq{1}, dp{1}, hbar{1};
  int dim{0};
  double tol{1e-9};
  int max_iter{200};
  double td_tol{1e-6};
};

struct ClassicalLimitConfig {
  std::string potential{"quartic"};  // free|harmonic|quartic|double_well
  double omega{1}, lambda4{0.1}, well_a{1}, well_b{1}, mass{1};
  double x_min{-6}, x_max{6};
  int n_points{1024};
  double q{0}, p{0}, dq{1}, dp{1}, hbar{1};
  std::string mode{"shrink_hbar"};  // or grow_spreads
  std::vector<double> levels{1.0, 0.5, 0.25};
  double t_end{1.0}, dt{1e-3};
  long n_samples{100000};
  int n_records{31};
};

struct DisturbanceConfig {
  double x_min{-16}, x_max{24};
  int n_points{512};
  double psi_center{0}, phi_center{8}, width{0.5}, hbar{1};
  double region_l{-4}, region_r{4};
  double restricted_tol{1e-9};
};

struct DlocalCheckConfig {
  double x_min{-16}, x_max{24};
  int n_points{512};
  double region_l{-4}, region_r{4};
  double tol{1e-12};
};

struct SeparationStatusConfig {
  double x_min{-16}, x_max{24};
  int n_points{512};
  double psi_center{0}, width{0.5}, hbar{1};
  std::vector<double> other_centers{8.0};
  double other_width{0.5};
  double region_l{-4}, region_r{4};
  double epsilon{1e-6}, epsilon_prime{1e-6};
};

using ExperimentParams =
    std::variant<PacketReportConfig, MaxEntVerifyConfig, ClassicalLimitConfig,
                 DisturbanceConfig, DlocalCheckConfig, SeparationStatusConfig>;

struct ExperimentConfig {
  std::string kind;
  ExperimentParams params;
  std::filesystem::path out_dir{"."};
  std::uint64_t seed{0};
};

struct CheckResult {
  std::string label;
  double value{};
  double threshold{};
  bool pass{};
};

struct RunResult {
  std::vector<std::filesystem::path> artifacts;
  std::vector<CheckResult> checks;
  bool pass{true};
};

// numeric table with a fixed header and verbatim trailing comment lines
struct SweepCsv {
  std::vector<std::string> header;
  std::vector<std::vector<double>> rows;
  std::vector<std::string> footers;
};

// 17-significant-digit scientific notation, the format used in every artifact
std::string format_full(double v);

void write_atomic(const std::filesystem::path& path, const std::string& bytes);

void emit_sweep_csv(const SweepCsv& table, const std::filesystem::path& path);

// hbar tags the moment evaluation; fock-family bases carry their own and
// override it
void dump_state(const StateOperator& rho, const std::filesystem::path& path,
                double hbar = 1.0);
StateOperator load_state(const std::filesystem::path& path);

RunResult run_experiment(const ExperimentConfig& cfg);

// written for every run that starts, success or failure; wall time and the
// error slot are the only fields that may differ between identical runs
void write_manifest(const ExperimentConfig& cfg, const RunResult& result,
                    double wall_seconds, const std::string& error,
                    const std::filesystem::path& path);

}  // namespace mep
