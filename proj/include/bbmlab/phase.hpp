#pragma once

/**
 * Phase classification of the inverse temperature plane, the limiting
 * free energy, and the CLT scaling rule that applies in the strip
 * |sigma| <= 1/sqrt(2).
 *
 * Interior membership uses strict inequalities; boundary membership is
 * decided with an absolute tolerance of 1e-12 on the defining equalities.
 * All classifications are invariant under sigma -> -sigma and tau -> -tau.
 */

#include <string_view>

#include "bbmlab/observables.hpp"

namespace bbmlab::phase {

using observables::Beta;

inline constexpr double kBoundaryTol = 1e-12;

enum class PhaseLabel { B1, B2, B3, B12, B13, B23, Triple };

std::string_view to_string(PhaseLabel label) noexcept;

PhaseLabel classify(Beta beta, double tol = kBoundaryTol);

// The three-branch limiting log-partition formula; adjacent branches agree
// on every boundary, so boundary labels may use either side.
double limiting_log_partition(Beta beta);

enum class VarianceMartingale { M2Sigma, ShDerivative };
enum class VarianceConstant { C1, C2, C3 };

enum class CltForm {
  B1Increment,         // martingale increment, exponential rescaling in r
  B3Plain,             // N(t) as is
  B13SqrtT,            // extra t^{-1/2}
  B23RQuarter,         // extra r^{1/4}, derivative-martingale variance
  TripleRQuarterSqrtT  // both corrections
};

struct ScalingRule {
  CltForm form;
  double norm_exponent;    // per-time log units applied to X
  double t_poly_exponent;  // 0 or -1/2
  double r_poly_exponent;  // 0 or +1/4
  VarianceMartingale variance_martingale;
  VarianceConstant variance_constant;
};

/**
 * The scaling rule for beta in the CLT strip. Throws "no CLT rule" outside
 * the strip, and also on the measure-zero segment |sigma| = 1/sqrt(2),
 * |tau| < 1/sqrt(2), which no limit theorem covers.
 */
ScalingRule clt_scaling(Beta beta, double tol = kBoundaryTol);

}  // namespace bbmlab::phase
