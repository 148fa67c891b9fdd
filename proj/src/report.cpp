#include "bbmlab/report.hpp"

#include <cmath>
#include <cstdio>
#include <sstream>

namespace bbmlab::report {

namespace {

nlohmann::json complex_json(std::complex<double> v) {
  return nlohmann::json::array({v.real(), v.imag()});
}

const char* martingale_tag(phase::VarianceMartingale m) {
  return m == phase::VarianceMartingale::M2Sigma ? "M_2SIGMA" : "SH_DERIVATIVE";
}

const char* constant_tag(phase::VarianceConstant c) {
  switch (c) {
    case phase::VarianceConstant::C1: return "C1";
    case phase::VarianceConstant::C2: return "C2";
    case phase::VarianceConstant::C3: return "C3";
  }
  return "?";
}

const char* form_tag(phase::CltForm f) {
  switch (f) {
    case phase::CltForm::B1Increment: return "B1_INCREMENT";
    case phase::CltForm::B3Plain: return "B3_PLAIN";
    case phase::CltForm::B13SqrtT: return "B13_SQRT_T";
    case phase::CltForm::B23RQuarter: return "B23_R_QUARTER";
    case phase::CltForm::TripleRQuarterSqrtT: return "TRIPLE_R_QUARTER_SQRT_T";
  }
  return "?";
}

std::string fmt(const char* f, double v) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), f, v);
  return buf;
}

}  // namespace

nlohmann::json to_json(const stats::CltReport& r) {
  nlohmann::json rule = {
      {"form", form_tag(r.rule.form)},
      {"norm_exponent", r.rule.norm_exponent},
      {"t_poly_exponent", r.rule.t_poly_exponent},
      {"r_poly_exponent", r.rule.r_poly_exponent},
      {"variance_martingale", martingale_tag(r.rule.variance_martingale)},
      {"variance_constant", constant_tag(r.rule.variance_constant)},
  };
  return nlohmann::json{
      {"phase", r.phase_label},
      {"rule", rule},
      {"replicas", r.replicas},
      {"excluded", r.excluded},
      {"c_hat", r.c_hat},
      {"c_hat_se", r.c_hat_se},
      {"oracle_second_moment", r.oracle_second_moment},
      {"ks_re", r.ks_re},
      {"ks_im", r.ks_im},
      {"mean_w2", complex_json(r.mean_w2)},
      {"mean_w2_abs", r.mean_w2_abs},
      {"mean_abs_w_sq", r.mean_abs_w_sq},
      {"slope", r.slope},
      {"intercept", r.intercept},
      {"intercept_se", r.intercept_se},
  };
}

nlohmann::json to_json(const stats::SmoothingReport& r) {
  return nlohmann::json{
      {"ks_re", r.ks_re},           {"ks_im", r.ks_im},
      {"ks_max", r.ks_max},         {"critical_1pct", r.critical_1pct},
      {"outer_replicas", r.n},
  };
}

nlohmann::json to_json(const stats::MartingaleReport& r) {
  nlohmann::json horizons = nlohmann::json::array();
  for (const auto& h : r.horizons) {
    horizons.push_back({
        {"t", h.t},
        {"mean", nlohmann::json::array({h.mean_re, h.mean_im})},
        {"se", nlohmann::json::array({h.se_re, h.se_im})},
        {"p_moment", h.p_moment},
        {"p_moment_se", h.p_moment_se},
    });
  }
  return nlohmann::json{
      {"horizons", horizons},
      {"increment_l1", r.increment_l1},
      {"increment_l1_se", r.increment_l1_se},
  };
}

nlohmann::json to_json(const stats::FreeEnergyReport& r) {
  nlohmann::json rows = nlohmann::json::array();
  for (const auto& row : r.rows) {
    rows.push_back({
        {"sigma", row.beta.sigma},
        {"tau", row.beta.tau},
        {"phase", row.label},
        {"formula", row.formula},
        {"median_log_partition", row.median_log_partition},
        {"gap", row.gap},
    });
  }
  return nlohmann::json{{"t", r.t}, {"replicas", r.replicas}, {"rows", rows}};
}

std::string to_text(const stats::CltReport& r) {
  std::ostringstream os;
  os << "phase                " << r.phase_label << "\n"
     << "rule                 " << form_tag(r.rule.form) << " (variance "
     << constant_tag(r.rule.variance_constant) << " * "
     << martingale_tag(r.rule.variance_martingale) << ")\n"
     << "replicas             " << r.replicas << "  (excluded " << r.excluded << ")\n"
     << "c_hat                " << fmt("%.6g", r.c_hat) << " +- "
     << fmt("%.3g", r.c_hat_se) << "\n"
     << "oracle E|S|^2        " << fmt("%.6g", r.oracle_second_moment) << "\n"
     << "ks_re / ks_im        " << fmt("%.4f", r.ks_re) << " / " << fmt("%.4f", r.ks_im)
     << "\n"
     << "|mean W^2|           " << fmt("%.4f", r.mean_w2_abs) << "\n"
     << "mean |W|^2           " << fmt("%.4f", r.mean_abs_w_sq) << "\n"
     << "slope / intercept    " << fmt("%.6g", r.slope) << " / "
     << fmt("%.4g", r.intercept) << " (se " << fmt("%.3g", r.intercept_se) << ")\n";
  return os.str();
}

std::string to_text(const stats::SmoothingReport& r) {
  std::ostringstream os;
  os << "outer replicas       " << r.n << "\n"
     << "ks_re / ks_im        " << fmt("%.4f", r.ks_re) << " / " << fmt("%.4f", r.ks_im)
     << "\n"
     << "ks_max               " << fmt("%.4f", r.ks_max) << "\n"
     << "1% critical value    " << fmt("%.4f", r.critical_1pct) << "\n";
  return os.str();
}

std::string to_text(const stats::MartingaleReport& r) {
  std::ostringstream os;
  os << "t        mean_re      mean_im      se_re     se_im     E|M|^p\n";
  char line[160];
  for (const auto& h : r.horizons) {
    std::snprintf(line, sizeof(line), "%-8g %-12.6f %-12.6f %-9.5f %-9.5f %-10.5f\n",
                  h.t, h.mean_re, h.mean_im, h.se_re, h.se_im, h.p_moment);
    os << line;
  }
  for (std::size_t j = 0; j < r.increment_l1.size(); ++j) {
    std::snprintf(line, sizeof(line),
                  "E|M(%g)-M(%g)| = %.6f (se %.5f)\n", r.horizons[j + 1].t,
                  r.horizons[j].t, r.increment_l1[j], r.increment_l1_se[j]);
    os << line;
  }
  return os.str();
}

std::string to_text(const stats::FreeEnergyReport& r) {
  std::ostringstream os;
  os << "sigma    tau      phase   formula   median    gap\n";
  char line[160];
  for (const auto& row : r.rows) {
    std::snprintf(line, sizeof(line), "%-8.4f %-8.4f %-7s %-9.4f %-9.4f %+.4f\n",
                  row.beta.sigma, row.beta.tau, row.label.c_str(), row.formula,
                  row.median_log_partition, row.gap);
    os << line;
  }
  return os.str();
}

}  // namespace bbmlab::report
