#include "bbmlab/cli.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <random>
#include <sstream>

#include <CLI11.hpp>

#include "bbmlab/report.hpp"
#include "bbmlab/stats.hpp"

namespace bbmlab::cli {

namespace {

double parse_double(const std::string& text) {
  std::size_t used = 0;
  const double v = std::stod(text, &used);
  if (used != text.size()) throw std::invalid_argument("trailing junk in number");
  return v;
}

}  // namespace

observables::Beta parse_beta(const std::string& text) {
  std::string s;
  for (char c : text)
    if (!std::isspace(static_cast<unsigned char>(c))) s.push_back(c);
  if (s.empty()) throw std::invalid_argument("empty beta");
  try {
    if (s.back() == 'i' || s.back() == 'I') {
      s.pop_back();
      // Split at the last +/- that is not a leading sign or an exponent sign.
      std::size_t split = std::string::npos;
      for (std::size_t pos = s.size(); pos-- > 1;) {
        if (s[pos] != '+' && s[pos] != '-') continue;
        if (s[pos - 1] == 'e' || s[pos - 1] == 'E') continue;
        split = pos;
        break;
      }
      if (split == std::string::npos) {
        std::string imag = s;
        if (imag.empty() || imag == "+" || imag == "-") imag += "1";
        return {0.0, parse_double(imag)};
      }
      std::string imag = s.substr(split);
      if (imag == "+" || imag == "-") imag += "1";
      return {parse_double(s.substr(0, split)), parse_double(imag)};
    }
    return {parse_double(s), 0.0};
  } catch (const std::exception&) {
    throw std::invalid_argument("cannot parse beta '" + text +
                                "'; expected forms like 0.5+1.0i or 0.7");
  }
}

std::string format_beta(observables::Beta beta) {
  char buf[80];
  std::snprintf(buf, sizeof(buf), "%.17g%+.17gi", beta.sigma, beta.tau);
  return buf;
}

gw::OffspringLaw parse_offspring(const std::string& text) {
  if (text == "binary") return gw::OffspringLaw::binary();
  std::vector<double> probs;
  std::stringstream ss(text);
  std::string token;
  while (std::getline(ss, token, ',')) probs.push_back(parse_double(token));
  return gw::OffspringLaw(probs);
}

nlohmann::json ExperimentConfig::to_json(bool include_execution_knobs) const {
  nlohmann::json j{
      {"experiment", experiment},
      {"sigma", beta.sigma},
      {"tau", beta.tau},
      {"rho", rho},
      {"t", t},
      {"r", r},
      {"horizons", horizons},
      {"p", p},
      {"barrier", barrier},
      {"barrier_a", barrier_a},
      {"barrier_gamma", barrier_gamma},
      {"grid_min", grid_min},
      {"grid_max", grid_max},
      {"grid_n", grid_n},
      {"grid_margin", grid_margin},
      {"replicas", replicas},
      {"replica_begin", replica_begin},
      {"master_seed", master_seed},
      {"offspring", offspring},
  };
  if (include_execution_knobs) {
    j["threads"] = threads;
    j["out"] = out;
    j["format"] = format;
  }
  return j;
}

ExperimentConfig ExperimentConfig::from_json(const nlohmann::json& j) {
  ExperimentConfig c;
  c.experiment = j.at("experiment").get<std::string>();
  c.beta.sigma = j.at("sigma").get<double>();
  c.beta.tau = j.at("tau").get<double>();
  c.rho = j.at("rho").get<double>();
  c.t = j.at("t").get<double>();
  c.r = j.at("r").get<double>();
  c.horizons = j.at("horizons").get<std::vector<double>>();
  c.p = j.at("p").get<double>();
  c.barrier = j.at("barrier").get<bool>();
  c.barrier_a = j.at("barrier_a").get<double>();
  c.barrier_gamma = j.at("barrier_gamma").get<double>();
  c.grid_min = j.at("grid_min").get<double>();
  c.grid_max = j.at("grid_max").get<double>();
  c.grid_n = j.at("grid_n").get<int>();
  c.grid_margin = j.at("grid_margin").get<double>();
  c.replicas = j.at("replicas").get<std::uint64_t>();
  c.replica_begin = j.at("replica_begin").get<std::uint64_t>();
  c.master_seed = j.at("master_seed").get<std::uint64_t>();
  c.offspring = j.at("offspring").get<std::string>();
  if (j.contains("threads")) c.threads = j.at("threads").get<int>();
  if (j.contains("out")) c.out = j.at("out").get<std::string>();
  if (j.contains("format")) c.format = j.at("format").get<std::string>();
  return c;
}

namespace {

struct BetaFlags {
  std::string combined;
  double sigma = 0.0, tau = 0.0;
  bool have_sigma = false, have_tau = false;

  void attach(CLI::App* cmd) {
    cmd->add_option("--beta", combined, "inverse temperature as a+bi");
    cmd->add_option("--sigma", sigma, "real part of beta")
        ->each([this](const std::string&) { have_sigma = true; });
    cmd->add_option("--tau", tau, "imaginary part of beta")
        ->each([this](const std::string&) { have_tau = true; });
  }

  observables::Beta resolve() const {
    if (!combined.empty() && (have_sigma || have_tau))
      throw std::invalid_argument(
          "--beta conflicts with --sigma/--tau; give one form only");
    if (!combined.empty()) return parse_beta(combined);
    return {sigma, tau};
  }
};

std::uint64_t resolve_seed(CLI::App* cmd, std::uint64_t seed_flag) {
  if (cmd->count("--seed") > 0) return seed_flag;
  std::random_device rd;
  return (static_cast<std::uint64_t>(rd()) << 32) ^ rd();
}

void echo_config(const ExperimentConfig& cfg) {
  std::cerr << "config: " << cfg.to_json(true).dump() << "\n"
            << "master_seed: " << cfg.master_seed << "\n";
}

void emit(const ExperimentConfig& cfg, const nlohmann::json& results,
          const std::string& text) {
  std::ostream* os = &std::cout;
  std::ofstream file;
  if (!cfg.out.empty()) {
    file.open(cfg.out, std::ios::binary);
    if (!file) throw std::invalid_argument("cannot open output file: " + cfg.out);
    os = &file;
  }
  if (cfg.format == "text") {
    *os << text;
  } else if (cfg.format == "json") {
    nlohmann::json doc{{"schema", 1},
                       {"experiment", cfg.experiment},
                       {"config", cfg.to_json(false)},
                       {"results", results}};
    *os << doc.dump(2) << "\n";
  } else {
    throw std::invalid_argument("unknown format: " + cfg.format);
  }
}

int dispatch(const std::string& name, ExperimentConfig& cfg, const BetaFlags& beta,
             CLI::App* cmd, std::uint64_t seed_flag, const std::string& leaves_path) {
  cfg.experiment = name;
  cfg.beta = beta.resolve();
  cfg.master_seed = resolve_seed(cmd, seed_flag);
  const stats::SimOptions opt{parse_offspring(cfg.offspring), gw::kDefaultNodeCap};

  echo_config(cfg);

  if (name == "phase") {
    // Pure classification and formula printer; no randomness involved.
    // Prints the plain `LABEL  value` line unless JSON is asked for.
    const phase::PhaseLabel label = phase::classify(cfg.beta);
    char line[96];
    std::snprintf(line, sizeof(line), "%s  %.10g\n",
                  std::string(phase::to_string(label)).c_str(),
                  phase::limiting_log_partition(cfg.beta));
    if (cmd->count("--format") > 0 && cfg.format == "json") {
      nlohmann::json results{{"phase", std::string(phase::to_string(label))},
                             {"free_energy", phase::limiting_log_partition(cfg.beta)}};
      emit(cfg, results, line);
    } else if (!cfg.out.empty()) {
      std::ofstream file(cfg.out, std::ios::binary);
      if (!file) throw std::invalid_argument("cannot open output file: " + cfg.out);
      file << line;
    } else {
      std::cout << line;
    }
    return 0;
  }

  if (name == "tree") {
    rng::Stream tree_stream(cfg.master_seed, 0, rng::Lane::Tree);
    const auto tree = std::make_shared<const gw::GwTree>(
        gw::sample_tree(cfg.t, opt.law, tree_stream, opt.node_cap));
    std::ostream* os = &std::cout;
    std::ofstream file;
    if (!cfg.out.empty()) {
      file.open(cfg.out, std::ios::binary);
      if (!file) throw std::invalid_argument("cannot open output file: " + cfg.out);
      os = &file;
    }
    tree->dump(*os);
    if (!leaves_path.empty()) {
      rng::Stream xs(cfg.master_seed, 0, rng::Lane::MotionX);
      rng::Stream zs(cfg.master_seed, 0, rng::Lane::MotionZ);
      const bbm::BbmForest forest(tree, cfg.rho, xs, zs);
      std::ofstream leaf_file(leaves_path, std::ios::binary);
      if (!leaf_file)
        throw std::invalid_argument("cannot open output file: " + leaves_path);
      forest.dump_leaves(leaf_file);
    }
    return 0;
  }

  if (name == "simulate") {
    stats::SimulateConfig sim;
    sim.beta = cfg.beta;
    sim.rho = cfg.rho;
    sim.horizons = cfg.horizons.empty() ? std::vector<double>{cfg.t} : cfg.horizons;
    if (cfg.barrier)
      sim.barrier = stats::BarrierConfig{cfg.r, cfg.barrier_gamma, cfg.barrier_a};
    sim.replicas = cfg.replicas;
    sim.replica_begin = cfg.replica_begin;
    sim.seed = cfg.master_seed;
    sim.threads = cfg.threads;
    const stats::ReplicaTable table = stats::run_replicas(sim, opt);
    std::ostream* os = &std::cout;
    std::ofstream file;
    if (!cfg.out.empty()) {
      file.open(cfg.out, std::ios::binary);
      if (!file) throw std::invalid_argument("cannot open output file: " + cfg.out);
      os = &file;
    }
    table.to_csv(*os);
    return 0;
  }

  if (name == "free-energy-map") {
    stats::FreeEnergyConfig fec;
    fec.grid = stats::boundary_clear_grid(cfg.grid_min, cfg.grid_max, cfg.grid_n,
                                          cfg.grid_margin);
    fec.rho = cfg.rho;
    fec.t = cfg.t;
    fec.replicas = cfg.replicas;
    fec.seed = cfg.master_seed;
    fec.threads = cfg.threads;
    const auto rep = stats::free_energy_map(fec, opt);
    emit(cfg, report::to_json(rep), report::to_text(rep));
    return 0;
  }

  if (name == "clt") {
    stats::CltConfig cc{cfg.beta,     cfg.rho,         cfg.r, cfg.t,
                        cfg.replicas, cfg.master_seed, cfg.threads};
    const auto rep = stats::conditional_clt_experiment(cc, opt);
    emit(cfg, report::to_json(rep), report::to_text(rep));
    return 0;
  }

  if (name == "martingale") {
    stats::MartingaleConfig mc;
    mc.beta = cfg.beta;
    mc.rho = cfg.rho;
    mc.horizons = cfg.horizons;
    mc.p = cfg.p;
    mc.replicas = cfg.replicas;
    mc.seed = cfg.master_seed;
    mc.threads = cfg.threads;
    const auto rep = stats::martingale_experiment(mc, opt);
    emit(cfg, report::to_json(rep), report::to_text(rep));
    return 0;
  }

  if (name == "smoothing-check") {
    stats::SmoothingConfig sc{cfg.beta,     cfg.rho,         cfg.r, cfg.t,
                              cfg.replicas, cfg.master_seed, cfg.threads};
    const auto rep = stats::smoothing_recursion_check(sc, opt);
    emit(cfg, report::to_json(rep), report::to_text(rep));
    return 0;
  }

  throw std::invalid_argument("unknown subcommand: " + name);
}

}  // namespace

int run_main(int argc, const char* const* argv) {
  CLI::App app{
      "Monte Carlo laboratory for the complex branching Brownian motion "
      "energy model"};
  app.require_subcommand(1);

  ExperimentConfig cfg;
  BetaFlags beta;
  std::uint64_t seed_flag = 0;

  const auto add_common = [&](CLI::App* cmd) {
    beta.attach(cmd);
    cmd->add_option("--rho", cfg.rho, "correlation of the energy pair, in [-1,1]");
    cmd->add_option("--seed", seed_flag,
                    "64-bit master seed (omitted: drawn from system entropy)");
    cmd->add_option("--threads", cfg.threads,
                    "worker threads (0 = hardware); never changes results");
    cmd->add_option("--replicas", cfg.replicas, "number of independent replicas");
    cmd->add_option("--offspring", cfg.offspring,
                    "'binary' or comma-separated probabilities from one child; "
                    "mean must be 2");
    cmd->add_option("--out", cfg.out, "output file (default stdout)");
    cmd->add_option("--format", cfg.format, "json or text");
    return cmd;
  };

  auto* phase_cmd = add_common(app.add_subcommand(
      "phase", "classify beta and print the limiting free energy (boundary "
               "tolerance 1e-12 on the defining equalities)"));
  (void)phase_cmd;

  std::string leaves_path;
  auto* tree_cmd = add_common(
      app.add_subcommand("tree", "sample one tree and dump it as text"));
  tree_cmd->add_option("--t", cfg.t, "horizon");
  tree_cmd->add_option("--leaves", leaves_path,
                       "also sample the pair and write `leaf_id x y` here");

  auto* sim_cmd = add_common(app.add_subcommand(
      "simulate", "per-replica observables as CSV (one row per horizon)"));
  sim_cmd->add_option("--t", cfg.t, "single horizon");
  sim_cmd->add_option("--horizons", cfg.horizons, "ascending list of horizons")
      ->delimiter(',');
  sim_cmd->add_option("--replica-begin", cfg.replica_begin,
                      "first replica index (seed ranges concatenate exactly)");
  sim_cmd->add_flag("--barrier", cfg.barrier, "also record the constrained sum");
  sim_cmd->add_option("--r", cfg.r, "barrier constraint start time");
  sim_cmd->add_option("--A", cfg.barrier_a, "endpoint barrier offset");
  sim_cmd->add_option("--gamma", cfg.barrier_gamma, "path barrier exponent in (1/2,1)");

  auto* fem_cmd = add_common(app.add_subcommand(
      "free-energy-map", "median log-partition vs the limit formula on a grid"));
  fem_cmd->add_option("--t", cfg.t, "horizon (>= 6)");
  fem_cmd->add_option("--grid-min", cfg.grid_min, "grid lower corner");
  fem_cmd->add_option("--grid-max", cfg.grid_max, "grid upper corner");
  fem_cmd->add_option("--grid-n", cfg.grid_n, "points per axis");
  fem_cmd->add_option("--grid-margin", cfg.grid_margin,
                      "minimum distance to any phase boundary");

  auto* clt_cmd = add_common(app.add_subcommand(
      "clt", "conditional CLT experiment under the phase's scaling rule"));
  clt_cmd->add_option("--t", cfg.t, "final horizon");
  clt_cmd->add_option("--r", cfg.r, "conditioning time (0 < r < t)");

  auto* mart_cmd = add_common(app.add_subcommand(
      "martingale", "means, p-th moments and increment L1 norms per horizon"));
  mart_cmd->add_option("--horizons", cfg.horizons, "ascending list of horizons")
      ->delimiter(',');
  mart_cmd->add_option("--p", cfg.p, "moment order in (1, sqrt(2)/sigma]");

  auto* smooth_cmd = add_common(app.add_subcommand(
      "smoothing-check", "two-sample check of the martingale recursion"));
  smooth_cmd->add_option("--t", cfg.t, "inner horizon");
  smooth_cmd->add_option("--r", cfg.r, "split time (direct horizon is t + r)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    if (e.get_name() == "CallForHelp" || e.get_name() == "CallForAllHelp" ||
        e.get_name() == "CallForVersion") {
      return app.exit(e);
    }
    app.exit(e);
    return 2;
  }

  try {
    CLI::App* sub = app.get_subcommands().front();
    return dispatch(sub->get_name(), cfg, beta, sub, seed_flag, leaves_path);
  } catch (const gw::ResourceCapError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 3;
  } catch (const std::invalid_argument& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
}

}  // namespace bbmlab::cli
