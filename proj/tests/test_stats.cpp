#include <doctest.h>

#include <cmath>
#include <sstream>
#include <vector>

#include "bbmlab/stats.hpp"

using namespace bbmlab;
using observables::Beta;

TEST_CASE("standard normal cdf: reference values and numeric integration") {
  CHECK(stats::standard_normal_cdf(0.0) == doctest::Approx(0.5).epsilon(1e-9));
  CHECK(stats::standard_normal_cdf(1.96) == doctest::Approx(0.9750).epsilon(1e-4));
  // Simpson integration of the density as an independent oracle.
  auto quad = [](double x) {
    const int n = 20000;
    const double lo = -13.0, h = (x - lo) / n;
    double acc = 0.0;
    auto density = [](double v) {
      return 0.39894228040143267794 * std::exp(-0.5 * v * v);
    };
    for (int i = 0; i <= n; ++i) {
      const double w = (i == 0 || i == n) ? 1.0 : (i % 2 == 1 ? 4.0 : 2.0);
      acc += w * density(lo + h * i);
    }
    return acc * h / 3.0;
  };
  for (double x : {-3.5, -1.0, -0.2, 0.4, 1.3, 2.7, 4.0})
    CHECK(std::abs(stats::standard_normal_cdf(x) - quad(x)) < 1e-7);
}

TEST_CASE("ks statistic: null distribution and failure modes") {
  rng::Stream s(5, 0, rng::Lane::MotionX);
  std::vector<double> sample;
  for (int i = 0; i < 10000; ++i) sample.push_back(s.normal());
  const double d = stats::ks_statistic(sample, stats::standard_normal_cdf);
  CHECK(d < stats::ks_critical_1pct(10000));
  CHECK_THROWS_AS(stats::ks_statistic({}, stats::standard_normal_cdf),
                  std::invalid_argument);
}

TEST_CASE("two-sample ks separates shifted laws and accepts equal ones") {
  rng::Stream s(6, 0, rng::Lane::MotionX);
  std::vector<double> a, b, c;
  for (int i = 0; i < 4000; ++i) {
    a.push_back(s.normal());
    b.push_back(s.normal());
    c.push_back(s.normal() + 0.5);
  }
  CHECK(stats::two_sample_ks(a, b) < stats::two_sample_ks_critical_1pct(4000, 4000));
  CHECK(stats::two_sample_ks(a, c) > stats::two_sample_ks_critical_1pct(4000, 4000));
}

TEST_CASE("mean/se and median helpers") {
  const std::vector<double> v{1.0, 2.0, 3.0, 4.0};
  const auto m = stats::mean_se(v);
  CHECK(m.mean == doctest::Approx(2.5));
  CHECK(m.se == doctest::Approx(std::sqrt(5.0 / 3.0 / 4.0)));
  CHECK(stats::median(v) == doctest::Approx(2.5));
  CHECK(stats::median({3.0, 1.0, 2.0}) == doctest::Approx(2.0));
}

TEST_CASE("map_replicas is schedule-independent and propagates errors") {
  auto job = [](std::uint64_t i) {
    rng::Stream s(11, i, rng::Lane::Tree);
    return s.uniform01();
  };
  const auto serial = stats::map_replicas(0, 500, 1, job);
  const auto parallel = stats::map_replicas(0, 500, 3, job);
  CHECK(serial == parallel);
  CHECK(stats::map_replicas(0, 0, 3, job).empty());
  auto bad = [](std::uint64_t i) -> int {
    if (i == 137) throw std::runtime_error("boom");
    return 0;
  };
  CHECK_THROWS_AS(stats::map_replicas(0, 400, 3, bad), std::runtime_error);
}

TEST_CASE("run_replicas: determinism and seed-range concatenation") {
  stats::SimulateConfig cfg;
  cfg.beta = {0.4, 0.3};
  cfg.rho = 0.5;
  cfg.horizons = {2.0, 4.0};
  cfg.replicas = 60;
  cfg.seed = 99;

  auto csv_of = [](const stats::ReplicaTable& table) {
    std::ostringstream os;
    table.to_csv(os);
    return os.str();
  };

  cfg.threads = 1;
  const std::string once = csv_of(stats::run_replicas(cfg));
  cfg.threads = 3;
  CHECK(csv_of(stats::run_replicas(cfg)) == once);

  stats::SimulateConfig zero = cfg;
  zero.replicas = 0;
  CHECK(stats::run_replicas(zero).rows.empty());

  stats::SimulateConfig lo = cfg, hi = cfg;
  lo.replicas = 25;
  hi.replica_begin = 25;
  hi.replicas = 35;
  const auto a = stats::run_replicas(lo);
  const auto b = stats::run_replicas(hi);
  stats::ReplicaTable joined;
  joined.config = cfg;
  joined.rows = a.rows;
  joined.rows.insert(joined.rows.end(), b.rows.begin(), b.rows.end());
  CHECK(csv_of(joined) == once);
}

TEST_CASE("run_replicas records the constrained sum when asked") {
  stats::SimulateConfig cfg;
  cfg.beta = {0.5, 1.0};
  cfg.horizons = {3.0};
  cfg.barrier = stats::BarrierConfig{1.0, 0.75, 4.0};
  cfg.replicas = 10;
  cfg.seed = 7;
  const auto table = stats::run_replicas(cfg);
  REQUIRE(table.rows.size() == 10);
  for (const auto& row : table.rows) CHECK(row.barrier_passed >= 0);
}

TEST_CASE("smoothing recursion: r = 0 compares two draws of the same law") {
  stats::SmoothingConfig cfg;
  cfg.beta = {0.5, 0.0};
  cfg.rho = 0.0;
  cfg.r = 0.0;
  cfg.t = 3.0;
  cfg.outer_replicas = 600;
  cfg.seed = 12;
  const auto rep = stats::smoothing_recursion_check(cfg);
  CHECK(rep.ks_max < rep.critical_1pct);
}

TEST_CASE("smoothing recursion holds with a real split") {
  stats::SmoothingConfig cfg;
  cfg.beta = {0.5, 0.0};
  cfg.rho = 0.0;
  cfg.r = 1.0;
  cfg.t = 4.0;
  cfg.outer_replicas = 800;
  cfg.seed = 13;
  const auto rep = stats::smoothing_recursion_check(cfg);
  CHECK(rep.ks_max < rep.critical_1pct);

  cfg.beta = {0.4, 0.3};
  cfg.rho = 1.0;
  cfg.seed = 14;
  const auto rep2 = stats::smoothing_recursion_check(cfg);
  CHECK(rep2.ks_max < rep2.critical_1pct);
}

TEST_CASE("smoothing recursion rejects phases outside B1/B12") {
  stats::SmoothingConfig cfg;
  cfg.beta = {0.5, 1.0};
  cfg.r = 1.0;
  cfg.t = 3.0;
  cfg.outer_replicas = 10;
  CHECK_THROWS_AS(stats::smoothing_recursion_check(cfg), std::invalid_argument);
}

TEST_CASE("conditional CLT in B3: self-normalization and Gaussianity") {
  // Desk-size smoke run against wiring mistakes (a wrong normalization
  // sends these KS values toward 0.5). At (t, r) = (9, 3) both finite-t
  // effects are still visible -- the conditional mean
  // N(r) e^{-(t-r)(sigma^2+tau^2-1)/2} and the smallness of n(r) -- so the
  // thresholds are much looser than the full-scale run at (12, 6).
  stats::CltConfig cfg;
  cfg.beta = {0.5, 1.0};
  cfg.rho = 0.0;
  cfg.r = 3.0;
  cfg.t = 9.0;
  cfg.replicas = 2500;
  cfg.seed = 21;
  const auto rep = stats::conditional_clt_experiment(cfg);
  CHECK(rep.excluded == 0);
  CHECK(rep.rule.form == phase::CltForm::B3Plain);
  // The ratio estimator tracks the finite-t oracle for E|N|^2.
  CHECK(std::abs(rep.c_hat - rep.oracle_second_moment) <
        0.25 * rep.oracle_second_moment);
  CHECK(rep.ks_re < 0.2);
  CHECK(rep.ks_im < 0.2);
  CHECK(rep.mean_w2_abs < 0.3);
  CHECK(std::abs(rep.mean_abs_w_sq - 2.0) < 0.5);
  // Variance-regression intercept consistent with zero through the origin.
  CHECK(std::abs(rep.intercept) < 4 * rep.intercept_se + 0.05 * rep.c_hat);
}

TEST_CASE("conditional CLT with derivative-martingale conditioning") {
  constexpr double kHalfSqrt2 = 0.70710678118654752440;
  stats::CltConfig cfg;
  cfg.beta = {kHalfSqrt2, 1.2};
  cfg.rho = 0.0;
  cfg.r = 2.0;
  cfg.t = 6.0;
  cfg.replicas = 800;
  cfg.seed = 22;
  const auto rep = stats::conditional_clt_experiment(cfg);
  CHECK(rep.rule.form == phase::CltForm::B23RQuarter);
  CHECK(rep.rule.variance_martingale == phase::VarianceMartingale::ShDerivative);
  // Z(2) <= 0 still happens at so small an r; those replicas are excluded
  // and counted rather than breaking the run.
  CHECK(rep.excluded > 0);
  CHECK(rep.excluded < cfg.replicas / 2);
  CHECK(rep.replicas == 800);
  CHECK(std::isnan(rep.oracle_second_moment));

  cfg.beta = {kHalfSqrt2, kHalfSqrt2};
  cfg.seed = 23;
  const auto triple = stats::conditional_clt_experiment(cfg);
  CHECK(triple.rule.form == phase::CltForm::TripleRQuarterSqrtT);
  CHECK(triple.w_abs.size() + triple.excluded == cfg.replicas);
}

TEST_CASE("conditional CLT rejects a bad time split") {
  stats::CltConfig cfg;
  cfg.beta = {0.5, 1.0};
  cfg.r = 5.0;
  cfg.t = 4.0;
  cfg.replicas = 10;
  CHECK_THROWS_AS(stats::conditional_clt_experiment(cfg), std::invalid_argument);
}

TEST_CASE("martingale experiment: unit mean and Cauchy trend") {
  stats::MartingaleConfig cfg;
  cfg.beta = {0.4, 0.3};
  cfg.rho = 0.5;
  cfg.horizons = {2.0, 4.0, 6.0};
  cfg.p = 2.0;
  cfg.replicas = 3000;
  cfg.seed = 31;
  const auto rep = stats::martingale_experiment(cfg);
  REQUIRE(rep.horizons.size() == 3);
  for (const auto& h : rep.horizons) {
    CHECK(std::abs(h.mean_re - 1.0) < 5 * h.se_re);
    CHECK(std::abs(h.mean_im) < 5 * h.se_im);
  }
  REQUIRE(rep.increment_l1.size() == 2);
  CHECK(rep.increment_l1[1] < rep.increment_l1[0]);
}

TEST_CASE("martingale experiment validates the admissible moment range") {
  stats::MartingaleConfig cfg;
  cfg.beta = {0.5, 0.0};
  cfg.horizons = {2.0};
  cfg.replicas = 10;
  cfg.p = 4.0;  // above sqrt(2)/sigma = 2.83
  CHECK_THROWS_AS(stats::martingale_experiment(cfg), std::invalid_argument);
  cfg.p = 2.0;
  cfg.beta = {0.5, 1.0};  // B3 is out of scope for the martingale suite
  CHECK_THROWS_AS(stats::martingale_experiment(cfg), std::invalid_argument);
}

TEST_CASE("free-energy map: the origin column converges fast") {
  stats::FreeEnergyConfig cfg;
  cfg.grid = {Beta{0.0, 0.0}, Beta{0.5, 1.0}};
  cfg.rho = 0.0;
  cfg.t = 6.0;
  cfg.replicas = 200;
  cfg.seed = 41;
  const auto rep = stats::free_energy_map(cfg);
  REQUIRE(rep.rows.size() == 2);
  CHECK(rep.rows[0].formula == doctest::Approx(1.0));
  CHECK(std::abs(rep.rows[0].gap) < 0.1);
  CHECK(rep.rows[1].formula == doctest::Approx(0.75));
  CHECK_THROWS_AS(
      stats::free_energy_map({{Beta{0, 0}}, 0.0, 3.0, 10, 1, 0}),
      std::invalid_argument);
}

TEST_CASE("boundary-clear grid respects the margin") {
  const auto grid = stats::boundary_clear_grid(0.0, 1.5, 9, 0.15);
  CHECK(grid.size() > 30);
  constexpr double kHalfSqrt2 = 0.70710678118654752440;
  constexpr double kSqrt2 = 1.4142135623730950488;
  for (const auto& b : grid) {
    CHECK(std::abs(b.sigma - kHalfSqrt2) >= 0.15);
    CHECK(std::abs(std::hypot(b.sigma, b.tau) - 1.0) >= 0.15);
    CHECK(std::abs(b.sigma + b.tau - kSqrt2) / kSqrt2 >= 0.15);
  }
}
