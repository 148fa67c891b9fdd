#pragma once

/**
 * Command-line front end: experiment configuration, seeding, output.
 *
 * Exit codes: 0 success, 2 configuration error, 3 resource-cap rejection.
 * Every run prints the resolved configuration and master seed to stderr
 * first; the machine report (JSON, `"schema": 1`) goes to --out or stdout.
 */

#include <cstdint>
#include <string>
#include <vector>

#include <json.hpp>

#include "bbmlab/gw.hpp"
#include "bbmlab/observables.hpp"

namespace bbmlab::cli {

struct ExperimentConfig {
  std::string experiment;
  observables::Beta beta;
  double rho = 0.0;
  double t = 0.0;
  double r = 0.0;
  std::vector<double> horizons;
  double p = 2.0;
  double barrier_a = 4.0;
  double barrier_gamma = 0.75;
  bool barrier = false;
  double grid_min = 0.0;
  double grid_max = 1.5;
  int grid_n = 9;
  double grid_margin = 0.15;
  std::uint64_t replicas = 0;
  std::uint64_t replica_begin = 0;
  std::uint64_t master_seed = 0;
  std::string offspring = "binary";
  // Execution knobs; excluded from report payloads so results are
  // byte-identical across schedulers.
  int threads = 0;
  std::string out;
  std::string format = "json";

  bool operator==(const ExperimentConfig&) const = default;

  nlohmann::json to_json(bool include_execution_knobs = false) const;
  static ExperimentConfig from_json(const nlohmann::json& j);
};

// Accepts "a+bi", "a-bi", "a", "bi" (also "i", "-i"). Throws on junk.
observables::Beta parse_beta(const std::string& text);
std::string format_beta(observables::Beta beta);

// "binary", or comma-separated probabilities starting at one child,
// e.g. "0,1" (binary) or "0.25,0.5,0.25" is rejected (mean must be 2).
gw::OffspringLaw parse_offspring(const std::string& text);

int run_main(int argc, const char* const* argv);

}  // namespace bbmlab::cli
