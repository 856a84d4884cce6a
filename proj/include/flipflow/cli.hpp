#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "flipflow/liouville.hpp"
#include "flipflow/steering.hpp"

namespace flipflow {

// Where the interaction matrix comes from.
struct MatrixSource {
  enum class Kind { file, harmonic_chain, random_spd };
  Kind kind = Kind::random_spd;
  std::string path;
  int n = 3;
  std::uint64_t seed = 7;
  std::pair<double, double> eig_range = {0.5, 4.0};
};

struct RunConfig {
  MatrixSource matrix;
  double energy = 0.5;
  WaitingLaw law = WaitingLaw::exponential(1.0);
  double t_end = 10000.0;
  std::vector<std::uint64_t> seeds = {1};
  std::vector<std::string> observables = {"H", "r1_sq", "p1_sq"};
  std::string state_path;   // optional initial state
  std::string target_path;  // optional steering target
  SteerOptions steering;
  double trajectory_dt = 0.0;  // > 0 dumps trajectory CSVs
  bool events = false;         // dump event-log CSVs
  ErgodicOptions report;
  double admissibility_tol = 1e-9;
  int coeff_bound = 20;
  std::string out = "out";
  int threads = 0;  // 0 = library default, 1 = serial reference
};

// Throws ConfigError on malformed or inconsistent input.
RunConfig load_config(const std::string& path);

void apply_seed_override(RunConfig& cfg, std::optional<std::uint64_t> seed);
void apply_out_override(RunConfig& cfg, const std::string& out);

SystemSpec build_spec(const RunConfig& cfg);
std::vector<Observable> parse_observables(const std::vector<std::string>& names,
                                          int n);

// Subcommand bodies; return the process exit code (0 on success). All
// file outputs land under cfg.out.
int cmd_spectrum(const RunConfig& cfg, bool quiet);
int cmd_simulate(const RunConfig& cfg, bool quiet);
int cmd_steer(const RunConfig& cfg, bool quiet);
int cmd_report(const RunConfig& cfg, bool quiet);

// Maps exceptions to the documented exit codes: 2 for configuration
// problems, 1 for numerical failures.
int run_command(const std::string& name, const RunConfig& cfg, bool quiet);

}  // namespace flipflow
