#pragma once

/**
 * Closed-form analytic baselines used as ground truth in tests. None of
 * these touch the samplers, so a disagreement localizes cleanly to one
 * side or the other.
 */

#include <complex>

#include "bbmlab/observables.hpp"

namespace bbmlab::oracles {

using observables::Beta;

struct MomentOracleInput {
  Beta beta;
  double rho = 0.0;
  double t = 0.0;
  double offspring_k = 2.0;  // K = sum k(k-1) p_k; 2 for binary
};

// E X_{beta,rho}(t) = e^{t(1 + (sigma^2 - tau^2)/2)} e^{i sigma tau rho t},
// by the Gaussian moment identity for one particle times E n(t) = e^t.
std::complex<double> mean_partition(const MomentOracleInput& in);

/**
 * E |N(t)|^2 = 1 + K (e^{(1 - sigma^2 - tau^2) t} - 1)/(1 - sigma^2 - tau^2),
 * continuous across sigma^2 + tau^2 = 1 where it equals 1 + K t. The
 * diagonal pair term contributes the leading 1 (forced by N(0) = 1);
 * independent of rho. With `boundary_scaling` the value is divided by t,
 * giving E |t^{-1/2} N(t)|^2.
 */
double second_moment_normalized(const MomentOracleInput& in,
                                bool boundary_scaling = false);

/**
 * Exponential growth rate of the p-th-moment bound integrand; a negative
 * rate predicts L^p-boundedness of the martingale.
 *
 * For p = sqrt(2)/sigma the rate is (tau^2 - (sigma - sqrt(2))^2)/(sqrt(2) sigma);
 * on the B12 wedge the general-p rate is (sigma^2/gamma^2 - 1)/(sqrt(2) sigma)
 * with gamma = sqrt(2)/p, which is 0 at p = sqrt(2)/sigma and negative for
 * smaller p. Requires 1 < p <= sqrt(2)/|sigma| and sigma != 0.
 */
double pth_moment_growth_rate(Beta beta, double p);

}  // namespace bbmlab::oracles
