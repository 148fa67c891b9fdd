#include "bbmlab/stats.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <ostream>
#include <stdexcept>

namespace bbmlab::stats {

namespace {

constexpr double kSqrt2 = 1.4142135623730950488;
constexpr double kKs1pct = 1.6276;
constexpr double kSqrtTwoOverPi = 0.79788456080286535588;

double abs2(std::complex<double> v) { return std::norm(v); }

}  // namespace

// ---------------------------------------------------------------------------
// Distribution utilities
// ---------------------------------------------------------------------------

double standard_normal_cdf(double x) {
  // Abramowitz-Stegun 26.2.17: Phi(x) = 1 - phi(x) (b1 k + ... + b5 k^5),
  // k = 1/(1 + 0.2316419 x), for x >= 0; reflected for x < 0.
  constexpr double b1 = 0.319381530;
  constexpr double b2 = -0.356563782;
  constexpr double b3 = 1.781477937;
  constexpr double b4 = -1.821255978;
  constexpr double b5 = 1.330274429;
  constexpr double inv_sqrt_2pi = 0.39894228040143267794;
  const double ax = std::abs(x);
  const double k = 1.0 / (1.0 + 0.2316419 * ax);
  const double poly = ((((b5 * k + b4) * k + b3) * k + b2) * k + b1) * k;
  const double tail = inv_sqrt_2pi * std::exp(-0.5 * ax * ax) * poly;
  return x >= 0.0 ? 1.0 - tail : tail;
}

double ks_statistic(std::vector<double> samples,
                    const std::function<double(double)>& cdf) {
  if (samples.empty()) throw std::invalid_argument("ks_statistic: empty sample");
  std::sort(samples.begin(), samples.end());
  const double n = static_cast<double>(samples.size());
  double d = 0.0;
  for (std::size_t i = 0; i < samples.size(); ++i) {
    const double f = cdf(samples[i]);
    d = std::max(d, f - static_cast<double>(i) / n);
    d = std::max(d, static_cast<double>(i + 1) / n - f);
  }
  return d;
}

double two_sample_ks(std::vector<double> a, std::vector<double> b) {
  if (a.empty() || b.empty()) throw std::invalid_argument("two_sample_ks: empty sample");
  std::sort(a.begin(), a.end());
  std::sort(b.begin(), b.end());
  const double na = static_cast<double>(a.size());
  const double nb = static_cast<double>(b.size());
  std::size_t i = 0, j = 0;
  double d = 0.0;
  while (i < a.size() && j < b.size()) {
    const double v = std::min(a[i], b[j]);
    while (i < a.size() && a[i] == v) ++i;
    while (j < b.size() && b[j] == v) ++j;
    d = std::max(d, std::abs(static_cast<double>(i) / na -
                             static_cast<double>(j) / nb));
  }
  return d;
}

double ks_critical_1pct(std::size_t n) {
  return kKs1pct / std::sqrt(static_cast<double>(n));
}

double two_sample_ks_critical_1pct(std::size_t n, std::size_t m) {
  const double dn = static_cast<double>(n), dm = static_cast<double>(m);
  return kKs1pct * std::sqrt((dn + dm) / (dn * dm));
}

MeanSe mean_se(std::span<const double> values) {
  MeanSe out;
  if (values.empty()) return out;
  double sum = 0.0;
  for (double v : values) sum += v;
  out.mean = sum / static_cast<double>(values.size());
  if (values.size() < 2) return out;
  double ss = 0.0;
  for (double v : values) ss += (v - out.mean) * (v - out.mean);
  const double n = static_cast<double>(values.size());
  out.se = std::sqrt(ss / (n - 1.0) / n);
  return out;
}

double median(std::vector<double> values) {
  if (values.empty()) throw std::invalid_argument("median: empty sample");
  std::sort(values.begin(), values.end());
  const std::size_t n = values.size();
  return n % 2 == 1 ? values[n / 2]
                    : 0.5 * (values[n / 2 - 1] + values[n / 2]);
}

// ---------------------------------------------------------------------------
// Replica engine
// ---------------------------------------------------------------------------

bbm::BbmForest simulate_replica(std::uint64_t master_seed, std::uint64_t replica,
                                double horizon, double rho,
                                std::span<const double> section_times,
                                const SimOptions& opt) {
  rng::Stream tree_stream(master_seed, replica, rng::Lane::Tree);
  auto tree = std::make_shared<const gw::GwTree>(
      gw::sample_tree(horizon, opt.law, tree_stream, opt.node_cap));
  rng::Stream x_stream(master_seed, replica, rng::Lane::MotionX);
  rng::Stream z_stream(master_seed, replica, rng::Lane::MotionZ);
  return bbm::BbmForest(std::move(tree), rho, x_stream, z_stream, section_times);
}

// ---------------------------------------------------------------------------
// Conditional CLT experiment
// ---------------------------------------------------------------------------

CltReport conditional_clt_experiment(const CltConfig& cfg, const SimOptions& opt) {
  if (!(cfg.r > 0.0 && cfg.r < cfg.t))
    throw std::invalid_argument("clt: need 0 < r < t");
  if (cfg.replicas < 2) throw std::invalid_argument("clt: need at least 2 replicas");
  const phase::ScalingRule rule = phase::clt_scaling(cfg.beta);

  const double sigma = cfg.beta.sigma, tau = cfg.beta.tau;
  const double sections[1] = {cfg.r};

  // Conditional-mean coefficient: E[N(t) | F_r] = N(r) * mean_coeff.
  const double mean_decay =
      std::exp(0.5 * (1.0 - sigma * sigma - tau * tau) * (cfg.t - cfg.r));
  const double mean_phase = sigma * tau * cfg.rho * (cfg.t - cfg.r);
  const std::complex<double> mean_coeff =
      mean_decay *
      std::complex<double>(std::cos(mean_phase), std::sin(mean_phase));

  struct Row {
    std::complex<double> s;
    double v = 0.0;
  };
  auto rows = map_replicas(0, cfg.replicas, cfg.threads, [&](std::uint64_t i) {
    const bbm::BbmForest forest =
        simulate_replica(cfg.seed, i, cfg.t, cfg.rho, sections, opt);
    Row row;
    double prefactor = 1.0;
    switch (rule.form) {
      case phase::CltForm::B3Plain:
        prefactor = 1.0;
        break;
      case phase::CltForm::B13SqrtT:
        prefactor = 1.0 / std::sqrt(cfg.t);
        break;
      case phase::CltForm::B23RQuarter:
        prefactor = std::pow(cfg.r, 0.25);
        break;
      case phase::CltForm::TripleRQuarterSqrtT:
        prefactor = std::pow(cfg.r, 0.25) / std::sqrt(cfg.t - cfg.r);
        break;
      case phase::CltForm::B1Increment: {
        const auto m_t = observables::mckean_martingale(forest, cfg.beta, cfg.t);
        const auto m_r = observables::mckean_martingale(forest, cfg.beta, cfg.r);
        row.s = (m_t - m_r) *
                std::exp(0.5 * (1.0 - sigma * sigma - tau * tau) * cfg.r);
        break;
      }
    }
    if (rule.form != phase::CltForm::B1Increment) {
      const auto n_t = observables::normalized_partition(forest, cfg.beta, cfg.t);
      const auto n_r = observables::normalized_partition(forest, cfg.beta, cfg.r);
      row.s = prefactor * (n_t - mean_coeff * n_r);
    }
    row.v = rule.variance_martingale == phase::VarianceMartingale::M2Sigma
                ? observables::additive_real_martingale(forest, 2.0 * sigma, cfg.r)
                : kSqrtTwoOverPi * observables::derivative_martingale(forest, cfg.r);
    return row;
  });

  CltReport report;
  report.rule = rule;
  report.phase_label = std::string(phase::to_string(phase::classify(cfg.beta)));
  report.replicas = cfg.replicas;

  std::vector<Row> kept;
  kept.reserve(rows.size());
  for (const Row& row : rows) {
    if (row.v > 0.0) {
      kept.push_back(row);
    } else if (rule.variance_martingale == phase::VarianceMartingale::ShDerivative) {
      ++report.excluded;  // Z(r) <= 0 happens at small r; the limit is positive
    } else {
      throw std::runtime_error("degenerate conditioning");
    }
  }
  if (kept.size() < 2) throw std::runtime_error("degenerate conditioning");

  double sum_s2 = 0.0, sum_v = 0.0;
  for (const Row& row : kept) {
    sum_s2 += abs2(row.s);
    sum_v += row.v;
  }
  const double n = static_cast<double>(kept.size());
  report.c_hat = sum_s2 / sum_v;
  {
    double resid2 = 0.0;
    for (const Row& row : kept) {
      const double e = abs2(row.s) - report.c_hat * row.v;
      resid2 += e * e;
    }
    report.c_hat_se = std::sqrt(resid2 / n) / (sum_v / n) / std::sqrt(n);
  }

  std::vector<double> w_re, w_im;
  w_re.reserve(kept.size());
  w_im.reserve(kept.size());
  report.w_abs.reserve(kept.size());
  report.s_abs2.reserve(kept.size());
  report.v.reserve(kept.size());
  std::complex<double> w2_sum = 0.0;
  double abs_w2_sum = 0.0;
  for (const Row& row : kept) {
    const std::complex<double> w = row.s / std::sqrt(0.5 * report.c_hat * row.v);
    w_re.push_back(w.real());
    w_im.push_back(w.imag());
    report.w_abs.push_back(std::abs(w));
    report.s_abs2.push_back(abs2(row.s));
    report.v.push_back(row.v);
    w2_sum += w * w;
    abs_w2_sum += abs2(w);
  }
  report.mean_w2 = w2_sum / n;
  report.mean_w2_abs = std::abs(report.mean_w2);
  report.mean_abs_w_sq = abs_w2_sum / n;
  report.ks_re = ks_statistic(std::move(w_re), standard_normal_cdf);
  report.ks_im = ks_statistic(std::move(w_im), standard_normal_cdf);

  // OLS of |S|^2 on V with intercept; a slope ~ c_hat with intercept ~ 0 is
  // the operational signature of variance proportional to the martingale.
  // The residual variance scales like V^2, so the intercept gets a White
  // (sandwich) standard error.
  {
    double mx = 0.0, my = 0.0;
    for (const Row& row : kept) {
      mx += row.v;
      my += abs2(row.s);
    }
    mx /= n;
    my /= n;
    double sxx = 0.0, sxy = 0.0;
    for (const Row& row : kept) {
      sxx += (row.v - mx) * (row.v - mx);
      sxy += (row.v - mx) * (abs2(row.s) - my);
    }
    report.slope = sxy / sxx;
    report.intercept = my - report.slope * mx;
    double sandwich = 0.0;
    for (const Row& row : kept) {
      const double e = abs2(row.s) - report.intercept - report.slope * row.v;
      // Influence of observation i on the intercept: (1/n) - mx (v_i - mx)/sxx.
      const double h = 1.0 / n - mx * (row.v - mx) / sxx;
      sandwich += h * h * e * e;
    }
    report.intercept_se = std::sqrt(sandwich);
  }

  // Oracle for the centered statistic: E|S|^2 = m2(t) - |mean_coeff|^2 m2(r)
  // (times the rule's deterministic prefactor squared).
  if (rule.form == phase::CltForm::B3Plain ||
      rule.form == phase::CltForm::B13SqrtT) {
    const double k_law = opt.law.second_factorial_moment();
    const double m2_t =
        oracles::second_moment_normalized({cfg.beta, cfg.rho, cfg.t, k_law});
    const double m2_r =
        oracles::second_moment_normalized({cfg.beta, cfg.rho, cfg.r, k_law});
    double value = m2_t - mean_decay * mean_decay * m2_r;
    if (rule.form == phase::CltForm::B13SqrtT) value /= cfg.t;
    report.oracle_second_moment = value;
  } else {
    report.oracle_second_moment = std::numeric_limits<double>::quiet_NaN();
  }
  return report;
}

// ---------------------------------------------------------------------------
// Smoothing recursion check
// ---------------------------------------------------------------------------

SmoothingReport smoothing_recursion_check(const SmoothingConfig& cfg,
                                          const SimOptions& opt) {
  const phase::PhaseLabel label = phase::classify(cfg.beta);
  if (label != phase::PhaseLabel::B1 && label != phase::PhaseLabel::B12)
    throw std::invalid_argument("smoothing check: beta must lie in B1 or B12");
  if (!(cfg.r >= 0.0 && cfg.t > 0.0))
    throw std::invalid_argument("smoothing check: need r >= 0 and t > 0");
  if (cfg.outer_replicas < 2)
    throw std::invalid_argument("smoothing check: need at least 2 replicas");

  const double sigma = cfg.beta.sigma, tau = cfg.beta.tau;
  const double log_weight_norm = cfg.r * (1.0 + 0.5 * (sigma * sigma - tau * tau));
  const double weight_phase = -sigma * tau * cfg.rho * cfg.r;

  // Direct sample: replicas [0, n); assembled outer trees: replicas [n, 2n),
  // so the two samples are independent under one master seed.
  auto direct = map_replicas(0, cfg.outer_replicas, cfg.threads, [&](std::uint64_t i) {
    const bbm::BbmForest forest =
        simulate_replica(cfg.seed, i, cfg.t + cfg.r, cfg.rho, {}, opt);
    return observables::mckean_martingale(forest, cfg.beta, cfg.t + cfg.r);
  });

  auto assembled = map_replicas(
      cfg.outer_replicas, cfg.outer_replicas, cfg.threads, [&](std::uint64_t i) {
        const bbm::BbmForest outer =
            simulate_replica(cfg.seed, i, cfg.r, cfg.rho, {}, opt);
        std::complex<double> sum = 0.0;
        for (std::size_t k = 0; k < outer.n_leaves(); ++k) {
          const double mag = std::exp(sigma * outer.leaf_x(k) - log_weight_norm);
          const double ph = tau * outer.leaf_y(k) + weight_phase;
          const std::complex<double> weight(mag * std::cos(ph), mag * std::sin(ph));
          const std::uint64_t inner_seed = rng::derive_seed(cfg.seed, i, k);
          const bbm::BbmForest inner =
              simulate_replica(inner_seed, 0, cfg.t, cfg.rho, {}, opt);
          sum += weight * observables::mckean_martingale(inner, cfg.beta, cfg.t);
        }
        return sum;
      });

  std::vector<double> d_re, d_im, a_re, a_im;
  d_re.reserve(direct.size());
  d_im.reserve(direct.size());
  a_re.reserve(assembled.size());
  a_im.reserve(assembled.size());
  for (const auto& v : direct) {
    d_re.push_back(v.real());
    d_im.push_back(v.imag());
  }
  for (const auto& v : assembled) {
    a_re.push_back(v.real());
    a_im.push_back(v.imag());
  }

  SmoothingReport report;
  report.n = cfg.outer_replicas;
  report.ks_re = two_sample_ks(std::move(d_re), std::move(a_re));
  report.ks_im = two_sample_ks(std::move(d_im), std::move(a_im));
  report.ks_max = std::max(report.ks_re, report.ks_im);
  report.critical_1pct =
      two_sample_ks_critical_1pct(cfg.outer_replicas, cfg.outer_replicas);
  return report;
}

// ---------------------------------------------------------------------------
// Martingale experiment
// ---------------------------------------------------------------------------

MartingaleReport martingale_experiment(const MartingaleConfig& cfg,
                                       const SimOptions& opt) {
  const phase::PhaseLabel label = phase::classify(cfg.beta);
  if (label != phase::PhaseLabel::B1 && label != phase::PhaseLabel::B12)
    throw std::invalid_argument("martingale experiment: beta must lie in B1 or B12");
  if (cfg.horizons.empty())
    throw std::invalid_argument("martingale experiment: no horizons");
  for (std::size_t j = 0; j < cfg.horizons.size(); ++j) {
    if (!(cfg.horizons[j] > 0.0) ||
        (j > 0 && !(cfg.horizons[j] > cfg.horizons[j - 1])))
      throw std::invalid_argument(
          "martingale experiment: horizons must be positive and ascending");
  }
  const double s = std::abs(cfg.beta.sigma);
  if (!(cfg.p > 1.0) || (s > 0.0 && cfg.p > kSqrt2 / s + 1e-12))
    throw std::invalid_argument("p out of admissible range");
  if (cfg.replicas < 2)
    throw std::invalid_argument("martingale experiment: need at least 2 replicas");

  const double horizon = cfg.horizons.back();
  const std::vector<double> sections(cfg.horizons.begin(), cfg.horizons.end() - 1);

  auto rows = map_replicas(0, cfg.replicas, cfg.threads, [&](std::uint64_t i) {
    const bbm::BbmForest forest =
        simulate_replica(cfg.seed, i, horizon, cfg.rho, sections, opt);
    std::vector<std::complex<double>> values(cfg.horizons.size());
    for (std::size_t j = 0; j < cfg.horizons.size(); ++j)
      values[j] = observables::mckean_martingale(forest, cfg.beta, cfg.horizons[j]);
    return values;
  });

  MartingaleReport report;
  std::vector<double> scratch(cfg.replicas);
  for (std::size_t j = 0; j < cfg.horizons.size(); ++j) {
    MartingaleHorizon h;
    h.t = cfg.horizons[j];
    for (std::uint64_t i = 0; i < cfg.replicas; ++i) scratch[i] = rows[i][j].real();
    MeanSe re = mean_se(scratch);
    for (std::uint64_t i = 0; i < cfg.replicas; ++i) scratch[i] = rows[i][j].imag();
    MeanSe im = mean_se(scratch);
    for (std::uint64_t i = 0; i < cfg.replicas; ++i)
      scratch[i] = std::pow(std::abs(rows[i][j]), cfg.p);
    MeanSe pm = mean_se(scratch);
    h.mean_re = re.mean;
    h.se_re = re.se;
    h.mean_im = im.mean;
    h.se_im = im.se;
    h.p_moment = pm.mean;
    h.p_moment_se = pm.se;
    report.horizons.push_back(h);
  }
  for (std::size_t j = 0; j + 1 < cfg.horizons.size(); ++j) {
    for (std::uint64_t i = 0; i < cfg.replicas; ++i)
      scratch[i] = std::abs(rows[i][j + 1] - rows[i][j]);
    MeanSe inc = mean_se(scratch);
    report.increment_l1.push_back(inc.mean);
    report.increment_l1_se.push_back(inc.se);
  }
  return report;
}

// ---------------------------------------------------------------------------
// Free-energy map
// ---------------------------------------------------------------------------

FreeEnergyReport free_energy_map(const FreeEnergyConfig& cfg, const SimOptions& opt) {
  if (!(cfg.t >= 6.0))
    throw std::invalid_argument("free-energy map: needs t >= 6");
  if (cfg.grid.empty()) throw std::invalid_argument("free-energy map: empty grid");
  if (cfg.replicas < 1)
    throw std::invalid_argument("free-energy map: need at least 1 replica");

  auto rows = map_replicas(0, cfg.replicas, cfg.threads, [&](std::uint64_t i) {
    const bbm::BbmForest forest = simulate_replica(cfg.seed, i, cfg.t, cfg.rho, {}, opt);
    std::vector<double> values(cfg.grid.size());
    for (std::size_t g = 0; g < cfg.grid.size(); ++g)
      values[g] =
          observables::partition_function(forest, cfg.grid[g]).log_magnitude() / cfg.t;
    return values;
  });

  FreeEnergyReport report;
  report.t = cfg.t;
  report.replicas = cfg.replicas;
  std::vector<double> column(cfg.replicas);
  for (std::size_t g = 0; g < cfg.grid.size(); ++g) {
    for (std::uint64_t i = 0; i < cfg.replicas; ++i) column[i] = rows[i][g];
    FreeEnergyRow row;
    row.beta = cfg.grid[g];
    row.label = std::string(phase::to_string(phase::classify(cfg.grid[g])));
    row.formula = phase::limiting_log_partition(cfg.grid[g]);
    row.median_log_partition = median(column);
    row.gap = row.median_log_partition - row.formula;
    report.rows.push_back(row);
  }
  return report;
}

std::vector<Beta> boundary_clear_grid(double lo, double hi, int n, double margin) {
  if (n < 2 || !(hi > lo)) throw std::invalid_argument("grid: need n >= 2 and hi > lo");
  constexpr double kHalfSqrt2 = 0.70710678118654752440;
  std::vector<Beta> grid;
  const double step = (hi - lo) / static_cast<double>(n - 1);
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < n; ++j) {
      const double s = lo + step * i;
      const double u = lo + step * j;
      const double d_line = std::abs(std::abs(s) - kHalfSqrt2);
      const double d_circle = std::abs(std::hypot(s, u) - 1.0);
      const double d_wedge = std::abs(std::abs(s) + std::abs(u) - kSqrt2) / kSqrt2;
      if (std::min({d_line, d_circle, d_wedge}) >= margin)
        grid.push_back(Beta{s, u});
    }
  }
  return grid;
}

// ---------------------------------------------------------------------------
// Replica table
// ---------------------------------------------------------------------------

ReplicaTable run_replicas(const SimulateConfig& cfg, const SimOptions& opt) {
  if (cfg.horizons.empty())
    throw std::invalid_argument("simulate: no horizons");
  for (std::size_t j = 0; j < cfg.horizons.size(); ++j) {
    if (!(cfg.horizons[j] > 0.0) ||
        (j > 0 && !(cfg.horizons[j] > cfg.horizons[j - 1])))
      throw std::invalid_argument("simulate: horizons must be positive and ascending");
  }
  const double horizon = cfg.horizons.back();
  std::vector<double> sections(cfg.horizons.begin(), cfg.horizons.end() - 1);
  if (cfg.barrier) {
    if (!(cfg.barrier->r >= 0.0 && cfg.barrier->r <= horizon))
      throw std::invalid_argument("simulate: barrier r outside [0, horizon]");
    sections.push_back(cfg.barrier->r);
  }

  auto rows = map_replicas(
      cfg.replica_begin, cfg.replicas, cfg.threads, [&](std::uint64_t i) {
        const bbm::BbmForest forest =
            simulate_replica(cfg.seed, i, horizon, cfg.rho, sections, opt);
        std::vector<ReplicaRow> out(cfg.horizons.size());
        for (std::size_t j = 0; j < cfg.horizons.size(); ++j) {
          const double t = cfg.horizons[j];
          ReplicaRow& row = out[j];
          row.replica = i;
          row.t = t;
          const observables::ComplexExpSum part =
              observables::partition_function_at(forest, cfg.beta, t);
          row.log_mag = part.log_magnitude();
          row.phase = part.phase();
          row.n = part.value(t * (0.5 + cfg.beta.sigma * cfg.beta.sigma));
          row.mckean = observables::mckean_martingale(forest, cfg.beta, t);
          row.m2sigma =
              observables::additive_real_martingale(forest, 2.0 * cfg.beta.sigma, t);
          row.deriv = observables::derivative_martingale(forest, t);
          row.sh = observables::seneta_heyde(forest, t);
        }
        if (cfg.barrier) {
          rng::Stream barrier_stream(cfg.seed, i, rng::Lane::Barrier);
          std::size_t passed = 0;
          out.back().n_constrained = observables::constrained_partition(
              forest, cfg.beta, horizon, cfg.barrier->r, cfg.barrier->gamma,
              cfg.barrier->a_offset, barrier_stream, &passed);
          out.back().barrier_passed = static_cast<std::int64_t>(passed);
        }
        return out;
      });

  ReplicaTable table;
  table.config = cfg;
  table.rows.reserve(cfg.replicas * cfg.horizons.size());
  for (auto& per_replica : rows)
    for (auto& row : per_replica) table.rows.push_back(row);
  return table;
}

void ReplicaTable::to_csv(std::ostream& os) const {
  os << "replica_id t beta_sigma beta_tau rho log_mag phase m2sigma deriv sh "
        "n_re n_im\n";
  char line[512];
  for (const ReplicaRow& row : rows) {
    std::snprintf(line, sizeof(line),
                  "%llu %.17g %.17g %.17g %.17g %.17g %.17g %.17g %.17g %.17g "
                  "%.17g %.17g\n",
                  static_cast<unsigned long long>(row.replica), row.t,
                  config.beta.sigma, config.beta.tau, config.rho, row.log_mag,
                  row.phase, row.m2sigma, row.deriv, row.sh, row.n.real(),
                  row.n.imag());
    os << line;
  }
}

}  // namespace bbmlab::stats
