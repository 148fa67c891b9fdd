#include "bbmlab/oracles.hpp"

#include <cmath>
#include <stdexcept>

#include "bbmlab/phase.hpp"

namespace bbmlab::oracles {

namespace {
constexpr double kSqrt2 = 1.4142135623730950488;
}

std::complex<double> mean_partition(const MomentOracleInput& in) {
  const double s2 = in.beta.sigma * in.beta.sigma;
  const double t2 = in.beta.tau * in.beta.tau;
  const double mag = std::exp(in.t * (1.0 + 0.5 * (s2 - t2)));
  const double ph = in.beta.sigma * in.beta.tau * in.rho * in.t;
  return {mag * std::cos(ph), mag * std::sin(ph)};
}

double second_moment_normalized(const MomentOracleInput& in, bool boundary_scaling) {
  const double x = 1.0 - in.beta.sigma * in.beta.sigma - in.beta.tau * in.beta.tau;
  // (e^{x t} - 1)/x, continuous through x = 0.
  const double pair_term = std::abs(x) < 1e-12
                               ? in.t * (1.0 + 0.5 * x * in.t)
                               : std::expm1(x * in.t) / x;
  const double value = 1.0 + in.offspring_k * pair_term;
  if (!boundary_scaling) return value;
  if (!(in.t > 0.0))
    throw std::invalid_argument("second_moment_normalized: boundary scaling needs t > 0");
  return value / in.t;
}

double pth_moment_growth_rate(Beta beta, double p) {
  const double s = std::abs(beta.sigma);
  const double u = std::abs(beta.tau);
  if (s == 0.0) throw std::invalid_argument("pth_moment_growth_rate: sigma must be nonzero");
  const double p_max = kSqrt2 / s;
  if (!(p > 1.0 && p <= p_max + 1e-12))
    throw std::invalid_argument("p out of range");
  if (std::abs(p - p_max) <= 1e-12)
    return (u * u - (s - kSqrt2) * (s - kSqrt2)) / (kSqrt2 * s);
  if (phase::classify(beta) != phase::PhaseLabel::B12)
    throw std::invalid_argument(
        "pth_moment_growth_rate: p < sqrt(2)/sigma is only defined on B12");
  const double gamma = kSqrt2 / p;
  return (s * s / (gamma * gamma) - 1.0) / (kSqrt2 * s);
}

}  // namespace bbmlab::oracles
