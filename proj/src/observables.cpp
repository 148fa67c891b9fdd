#include "bbmlab/observables.hpp"

#include <algorithm>
#include <cmath>

namespace bbmlab::observables {

namespace {

constexpr double kSqrt2 = 1.4142135623730950488;

// Applies f(x, y-ish z) to every particle alive at `time`. The horizon is
// always available through the leaf arrays; any other time requires a
// section recorded at forest construction.
template <class F>
void for_particles_at(const bbm::BbmForest& forest, double time, F&& f) {
  if (time == forest.tree().horizon()) {
    for (std::size_t k = 0; k < forest.n_leaves(); ++k)
      f(forest.leaf_x(k), forest.leaf_z(k));
    return;
  }
  const bbm::Section& sec = forest.section_at(time);
  for (std::size_t k = 0; k < sec.node.size(); ++k) f(sec.x[k], sec.z[k]);
}

}  // namespace

ComplexExpSum partition_function_at(const bbm::BbmForest& forest, Beta beta,
                                    double time) {
  ComplexExpSum sum;
  if (beta.tau == 0.0) {
    for_particles_at(forest, time,
                     [&](double x, double) { sum.add_real(beta.sigma * x); });
  } else {
    for_particles_at(forest, time, [&](double x, double z) {
      sum.add(beta.sigma * x, beta.tau * forest.y_from(x, z));
    });
  }
  return sum;
}

ComplexExpSum partition_function(const bbm::BbmForest& forest, Beta beta) {
  return partition_function_at(forest, beta, forest.tree().horizon());
}

std::complex<double> mckean_martingale(const bbm::BbmForest& forest, Beta beta,
                                       double t) {
  if (!(t > 0.0)) throw std::invalid_argument("mckean_martingale: t must be > 0");
  const ComplexExpSum sum = partition_function_at(forest, beta, t);
  const double log_norm =
      t * (1.0 + 0.5 * (beta.sigma * beta.sigma - beta.tau * beta.tau));
  const double phase_repair = -beta.sigma * beta.tau * forest.rho() * t;
  return sum.value(log_norm, phase_repair);
}

double additive_real_martingale(const bbm::BbmForest& forest, double theta,
                                double t) {
  if (!(t > 0.0))
    throw std::invalid_argument("additive_real_martingale: t must be > 0");
  ComplexExpSum sum;
  for_particles_at(forest, t, [&](double x, double) { sum.add_real(theta * x); });
  return sum.value(t * (1.0 + 0.5 * theta * theta)).real();
}

double derivative_martingale(const bbm::BbmForest& forest, double t) {
  if (!(t > 0.0)) throw std::invalid_argument("derivative_martingale: t must be > 0");
  // Z(t) = e^{-2t} sum_k (sqrt(2) t - x_k) e^{sqrt(2) x_k}; the summand is
  // signed, so shift by the max exponent and rescale once at the end.
  double shift = -std::numeric_limits<double>::infinity();
  for_particles_at(forest, t, [&](double x, double) {
    shift = std::max(shift, kSqrt2 * x);
  });
  double sum = 0.0;
  for_particles_at(forest, t, [&](double x, double) {
    sum += (kSqrt2 * t - x) * std::exp(kSqrt2 * x - shift);
  });
  return std::exp(shift - 2.0 * t) * sum;
}

double seneta_heyde(const bbm::BbmForest& forest, double t) {
  if (!(t > 0.0)) throw std::invalid_argument("seneta_heyde: t must be > 0");
  ComplexExpSum sum;
  for_particles_at(forest, t, [&](double x, double) { sum.add_real(kSqrt2 * x); });
  return std::sqrt(t) * sum.value(2.0 * t).real();
}

std::complex<double> normalized_partition(const bbm::BbmForest& forest, Beta beta,
                                          double t, bool boundary_scaling) {
  if (!(t > 0.0)) throw std::invalid_argument("normalized_partition: t must be > 0");
  if (boundary_scaling && t < 1.0)
    throw std::invalid_argument("normalized_partition: boundary scaling needs t >= 1");
  const ComplexExpSum sum = partition_function_at(forest, beta, t);
  double log_scale = t * (0.5 + beta.sigma * beta.sigma);
  if (boundary_scaling) log_scale += 0.5 * std::log(t);
  return sum.value(log_scale);
}

std::complex<double> constrained_partition(const bbm::BbmForest& forest, Beta beta,
                                           double t, double r, double gamma,
                                           double a_offset,
                                           rng::Stream& barrier_stream,
                                           std::size_t* passed_count) {
  if (t != forest.tree().horizon())
    throw std::invalid_argument("constrained_partition: t must be the horizon");
  ComplexExpSum sum;
  for (std::size_t k = 0; k < forest.n_leaves(); ++k) {
    const bbm::PathRecord path = forest.leaf_path(k);
    const bbm::BarrierFlags flags =
        bbm::path_barrier_event(path, beta.sigma, gamma, r, t, a_offset, barrier_stream);
    if (!(flags.endpoint_ok && flags.path_ok)) continue;
    sum.add(beta.sigma * forest.leaf_x(k), beta.tau * forest.leaf_y(k));
  }
  if (passed_count) *passed_count = sum.count();
  return sum.value(t * (0.5 + beta.sigma * beta.sigma));
}

}  // namespace bbmlab::observables
