#include "bbmlab/phase.hpp"

#include <cmath>
#include <stdexcept>

namespace bbmlab::phase {

namespace {
constexpr double kSqrt2 = 1.4142135623730950488;
constexpr double kHalfSqrt2 = 0.70710678118654752440;
}  // namespace

std::string_view to_string(PhaseLabel label) noexcept {
  switch (label) {
    case PhaseLabel::B1: return "B1";
    case PhaseLabel::B2: return "B2";
    case PhaseLabel::B3: return "B3";
    case PhaseLabel::B12: return "B12";
    case PhaseLabel::B13: return "B13";
    case PhaseLabel::B23: return "B23";
    case PhaseLabel::Triple: return "TRIPLE";
  }
  return "?";
}

PhaseLabel classify(Beta beta, double tol) {
  const double s = std::abs(beta.sigma);
  const double u = std::abs(beta.tau);
  const double d_line = 2.0 * s * s - 1.0;   // |sigma| = 1/sqrt(2)
  const double d_wedge = s + u - kSqrt2;     // |sigma| + |tau| = sqrt(2)
  const double d_circle = s * s + u * u - 1.0;

  if (std::abs(d_line) <= tol) {
    // On the critical vertical line: triple point, the B2/B3 boundary above
    // it, or plain B1 below it (the segment is interior to B1's closure
    // complement of the other two phases).
    if (std::abs(d_circle) <= tol) return PhaseLabel::Triple;
    if (d_circle > tol) return PhaseLabel::B23;
    return PhaseLabel::B1;
  }
  if (d_line > tol) {
    if (std::abs(d_wedge) <= tol) return PhaseLabel::B12;
    if (d_wedge > tol) return PhaseLabel::B2;
    return PhaseLabel::B1;
  }
  // |sigma| < 1/sqrt(2)
  if (std::abs(d_circle) <= tol) return PhaseLabel::B13;
  if (d_circle > tol) return PhaseLabel::B3;
  return PhaseLabel::B1;
}

double limiting_log_partition(Beta beta) {
  const double s2 = beta.sigma * beta.sigma;
  const double t2 = beta.tau * beta.tau;
  switch (classify(beta)) {
    case PhaseLabel::B1:
    case PhaseLabel::B12:
    case PhaseLabel::B13:
      return 1.0 + 0.5 * (s2 - t2);
    case PhaseLabel::B2:
      return kSqrt2 * std::abs(beta.sigma);
    case PhaseLabel::B3:
    case PhaseLabel::B23:
    case PhaseLabel::Triple:
      return 0.5 + s2;
  }
  return 0.0;  // unreachable
}

ScalingRule clt_scaling(Beta beta, double tol) {
  const double s = std::abs(beta.sigma);
  if (s > kHalfSqrt2 + tol) throw std::invalid_argument("no CLT rule");
  const double s2 = beta.sigma * beta.sigma;
  const double t2 = beta.tau * beta.tau;
  switch (classify(beta, tol)) {
    case PhaseLabel::B1:
      if (std::abs(2.0 * s * s - 1.0) <= tol)
        throw std::invalid_argument(
            "no CLT rule: |sigma| = 1/sqrt(2) with |tau| < 1/sqrt(2)");
      return {CltForm::B1Increment, 1.0 + 0.5 * (s2 - t2), 0.0, 0.0,
              VarianceMartingale::M2Sigma, VarianceConstant::C1};
    case PhaseLabel::B3:
      return {CltForm::B3Plain, 0.5 + s2, 0.0, 0.0, VarianceMartingale::M2Sigma,
              VarianceConstant::C2};
    case PhaseLabel::B13:
      return {CltForm::B13SqrtT, 0.5 + s2, -0.5, 0.0, VarianceMartingale::M2Sigma,
              VarianceConstant::C3};
    case PhaseLabel::B23:
      return {CltForm::B23RQuarter, 0.5 + s2, 0.0, 0.25,
              VarianceMartingale::ShDerivative, VarianceConstant::C2};
    case PhaseLabel::Triple:
      return {CltForm::TripleRQuarterSqrtT, 0.5 + s2, -0.5, 0.25,
              VarianceMartingale::ShDerivative, VarianceConstant::C3};
    case PhaseLabel::B12:
    case PhaseLabel::B2:
      break;
  }
  throw std::invalid_argument("no CLT rule");
}

}  // namespace bbmlab::phase
