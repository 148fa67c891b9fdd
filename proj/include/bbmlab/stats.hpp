#pragma once

/**
 * Replica orchestration and the statistical experiments that check the
 * limit theorems at desk scale.
 *
 * Replica i is a pure function of (master seed, i): generation may run on
 * any number of threads, results land in replica-index order, and every
 * reduction walks that order sequentially, so reports are bit-identical
 * regardless of the thread count.
 */

#include <algorithm>
#include <atomic>
#include <complex>
#include <cstdint>
#include <functional>
#include <mutex>
#include <optional>
#include <span>
#include <string>
#include <thread>
#include <type_traits>
#include <vector>

#include "bbmlab/bbm.hpp"
#include "bbmlab/gw.hpp"
#include "bbmlab/observables.hpp"
#include "bbmlab/oracles.hpp"
#include "bbmlab/phase.hpp"

namespace bbmlab::stats {

using observables::Beta;

// ---------------------------------------------------------------------------
// Distribution utilities
// ---------------------------------------------------------------------------

// Abramowitz-Stegun 26.2.17 rational-polynomial tail; absolute error < 7.5e-8.
double standard_normal_cdf(double x);

// sup_x |empirical CDF - cdf(x)|; handles ties. Throws on an empty sample.
double ks_statistic(std::vector<double> samples,
                    const std::function<double(double)>& cdf);

double two_sample_ks(std::vector<double> a, std::vector<double> b);

// Asymptotic 1% critical values, c(0.01) = 1.6276.
double ks_critical_1pct(std::size_t n);
double two_sample_ks_critical_1pct(std::size_t n, std::size_t m);

struct MeanSe {
  double mean = 0.0;
  double se = 0.0;
};
MeanSe mean_se(std::span<const double> values);

double median(std::vector<double> values);

// ---------------------------------------------------------------------------
// Replica engine
// ---------------------------------------------------------------------------

struct SimOptions {
  gw::OffspringLaw law = gw::OffspringLaw::binary();
  std::size_t node_cap = gw::kDefaultNodeCap;
};

// One replica: tree from the Tree lane, coupled pair from the MotionX and
// MotionZ lanes, with the requested section times recorded.
bbm::BbmForest simulate_replica(std::uint64_t master_seed, std::uint64_t replica,
                                double horizon, double rho,
                                std::span<const double> section_times,
                                const SimOptions& opt);

// Deterministic parallel map over replica indices [begin, begin + count).
template <class Fn>
auto map_replicas(std::uint64_t begin, std::uint64_t count, int threads, Fn fn)
    -> std::vector<std::invoke_result_t<Fn, std::uint64_t>> {
  using Row = std::invoke_result_t<Fn, std::uint64_t>;
  std::vector<Row> rows(count);
  if (count == 0) return rows;
  std::uint64_t n_threads =
      threads > 0 ? static_cast<std::uint64_t>(threads)
                  : std::max(1u, std::thread::hardware_concurrency());
  n_threads = std::min<std::uint64_t>(n_threads, count);
  if (n_threads <= 1) {
    for (std::uint64_t i = 0; i < count; ++i) rows[i] = fn(begin + i);
    return rows;
  }
  std::atomic<std::uint64_t> next{0};
  std::atomic<bool> failed{false};
  std::mutex error_mutex;
  std::exception_ptr error;
  auto worker = [&] {
    for (;;) {
      const std::uint64_t i = next.fetch_add(1, std::memory_order_relaxed);
      if (i >= count || failed.load(std::memory_order_relaxed)) return;
      try {
        rows[i] = fn(begin + i);
      } catch (...) {
        std::lock_guard<std::mutex> lock(error_mutex);
        if (!error) error = std::current_exception();
        failed.store(true, std::memory_order_relaxed);
        return;
      }
    }
  };
  std::vector<std::thread> pool;
  pool.reserve(n_threads);
  for (std::uint64_t k = 0; k < n_threads; ++k) pool.emplace_back(worker);
  for (auto& th : pool) th.join();
  if (error) std::rethrow_exception(error);
  return rows;
}

// ---------------------------------------------------------------------------
// Conditional CLT experiment
// ---------------------------------------------------------------------------

struct CltConfig {
  Beta beta;
  double rho = 0.0;
  double r = 0.0;  // conditioning time
  double t = 0.0;  // final horizon (r < t)
  std::uint64_t replicas = 0;
  std::uint64_t seed = 0;
  int threads = 0;
};

struct CltReport {
  phase::ScalingRule rule{};
  std::string phase_label;
  std::uint64_t replicas = 0;
  std::uint64_t excluded = 0;  // nonpositive derivative-martingale replicas
  double c_hat = 0.0;          // mean |S|^2 / mean V
  double c_hat_se = 0.0;
  double oracle_second_moment = 0.0;  // NaN when no closed form applies
  double ks_re = 0.0;
  double ks_im = 0.0;
  std::complex<double> mean_w2;  // rotational-invariance check, should be ~0
  double mean_w2_abs = 0.0;
  double mean_abs_w_sq = 0.0;  // ~2 under the self-normalization
  double slope = 0.0;          // OLS of |S|^2 on V
  double intercept = 0.0;
  double intercept_se = 0.0;  // heteroscedasticity-consistent (White)
  // Per kept replica, in replica order; not serialized. s_abs2 and v let a
  // caller re-normalize W with a pooled constant across runs.
  std::vector<double> w_abs;
  std::vector<double> s_abs2;
  std::vector<double> v;
};

/**
 * Records S per the phase's ScalingRule and the variance martingale V at
 * time r, self-normalizes W = S / sqrt(c_hat V / 2), and reports the
 * KS distances of Re W and Im W against the standard normal plus the
 * rotational-invariance and variance-regression diagnostics.
 *
 * S is the conditional fluctuation: the exactly-known time-r mean
 * N(r) e^{(t-r)((1 - sigma^2 - tau^2)/2 + i sigma tau rho)} (scaled per the
 * rule) is subtracted, since the conditional law of that fluctuation is
 * what converges to the centered Gaussian; the subtracted term itself
 * vanishes as t grows. The B1 rule needs no centering: its statistic
 * (M(t) - M(r)) e^{(1 - sigma^2 - tau^2) r / 2} is a martingale increment,
 * and the square-root rescaling keeps the conditional variance at
 * C1 M_{2sigma,0}(r).
 *
 * The regression intercept comes with a White standard error: the residual
 * variance grows like V^2, so the homoscedastic formula would understate
 * it by an order of magnitude.
 */
CltReport conditional_clt_experiment(const CltConfig& cfg,
                                     const SimOptions& opt = SimOptions{});

// ---------------------------------------------------------------------------
// Smoothing recursion check
// ---------------------------------------------------------------------------

struct SmoothingConfig {
  Beta beta;
  double rho = 0.0;
  double r = 0.0;  // split time; the direct sample runs to horizon t + r
  double t = 0.0;  // inner horizon
  std::uint64_t outer_replicas = 0;
  std::uint64_t seed = 0;
  int threads = 0;
};

struct SmoothingReport {
  double ks_re = 0.0;
  double ks_im = 0.0;
  double ks_max = 0.0;
  double critical_1pct = 0.0;
  std::uint64_t n = 0;
};

// Two-sample comparison of M(t + r) sampled directly against
// sum_k a_k(r) M^{(k)}(t) assembled from independent inner replicas.
SmoothingReport smoothing_recursion_check(const SmoothingConfig& cfg,
                                          const SimOptions& opt = SimOptions{});

// ---------------------------------------------------------------------------
// Martingale experiment
// ---------------------------------------------------------------------------

struct MartingaleConfig {
  Beta beta;
  double rho = 0.0;
  std::vector<double> horizons;  // ascending
  double p = 2.0;
  std::uint64_t replicas = 0;
  std::uint64_t seed = 0;
  int threads = 0;
};

struct MartingaleHorizon {
  double t = 0.0;
  double mean_re = 0.0, mean_im = 0.0;
  double se_re = 0.0, se_im = 0.0;
  double p_moment = 0.0, p_moment_se = 0.0;
};

struct MartingaleReport {
  std::vector<MartingaleHorizon> horizons;
  std::vector<double> increment_l1;  // E|M(t_{j+1}) - M(t_j)|, one per pair
  std::vector<double> increment_l1_se;
};

MartingaleReport martingale_experiment(const MartingaleConfig& cfg,
                                       const SimOptions& opt = SimOptions{});

// ---------------------------------------------------------------------------
// Free-energy map
// ---------------------------------------------------------------------------

struct FreeEnergyConfig {
  std::vector<Beta> grid;
  double rho = 0.0;
  double t = 0.0;  // needs t >= 6 for the asymptotic formula to be meaningful
  std::uint64_t replicas = 0;
  std::uint64_t seed = 0;
  int threads = 0;
};

struct FreeEnergyRow {
  Beta beta;
  std::string label;
  double formula = 0.0;
  double median_log_partition = 0.0;  // median of (1/t) log |X|
  double gap = 0.0;
};

struct FreeEnergyReport {
  double t = 0.0;
  std::uint64_t replicas = 0;
  std::vector<FreeEnergyRow> rows;
};

FreeEnergyReport free_energy_map(const FreeEnergyConfig& cfg,
                                 const SimOptions& opt = SimOptions{});

// n-by-n grid on [lo, hi]^2 keeping only points at least `margin` away from
// every phase boundary (critical line, unit circle, wedge line).
std::vector<Beta> boundary_clear_grid(double lo, double hi, int n, double margin);

// ---------------------------------------------------------------------------
// Replica table (the `simulate` subcommand)
// ---------------------------------------------------------------------------

struct BarrierConfig {
  double r = 0.0;
  double gamma = 0.75;
  double a_offset = 4.0;
};

struct SimulateConfig {
  Beta beta;
  double rho = 0.0;
  std::vector<double> horizons;  // ascending; observables recorded at each
  std::optional<BarrierConfig> barrier;
  std::uint64_t replicas = 0;
  std::uint64_t replica_begin = 0;
  std::uint64_t seed = 0;
  int threads = 0;
};

struct ReplicaRow {
  std::uint64_t replica = 0;
  double t = 0.0;
  double log_mag = 0.0;  // log |X|
  double phase = 0.0;
  std::complex<double> n;       // normalized partition N(t)
  std::complex<double> mckean;  // M_{sigma,tau}(t)
  double m2sigma = 0.0;         // M_{2sigma,0}(t)
  double deriv = 0.0;           // Z(t)
  double sh = 0.0;              // M^SH(t)
  std::complex<double> n_constrained;  // final horizon only, when configured
  std::int64_t barrier_passed = -1;    // leaves passing both flags, or -1
};

struct ReplicaTable {
  SimulateConfig config;
  std::vector<ReplicaRow> rows;  // replica-major, horizon-minor

  // `replica_id t beta_sigma beta_tau rho log_mag phase m2sigma deriv sh n_re n_im`
  void to_csv(std::ostream& os) const;
};

ReplicaTable run_replicas(const SimulateConfig& cfg,
                          const SimOptions& opt = SimOptions{});

}  // namespace bbmlab::stats
