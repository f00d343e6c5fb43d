// Estimate reports and fluctuation bookkeeping shared by both estimands.
#pragma once

#include <cmath>
#include <string>
#include <vector>

#include "transtmle/design.hpp"

namespace transtmle {

enum class FluctuationMode { Covariate, Weight };

inline std::string fluctuation_mode_name(FluctuationMode m) {
  return m == FluctuationMode::Covariate ? "covariate" : "weight";
}

struct FluctuationResult {
  std::string label;        // e.g. "outcome arm1", "hazard difference"
  std::string method;       // logistic-covariate | logistic-weighted | linear-covariate
  Vec epsilons;             // one entry per pass
  int iterations = 0;
  double eic_residual_before = 0.0;
  double eic_residual_after = 0.0;
};

inline void to_json(ordered_json& j, const FluctuationResult& f) {
  j = ordered_json{{"label", f.label},
                   {"method", f.method},
                   {"epsilons", f.epsilons},
                   {"iterations", f.iterations},
                   {"eic_residual_before", f.eic_residual_before},
                   {"eic_residual_after", f.eic_residual_after}};
}

struct EstimateReport {
  std::string estimand;  // missing-outcome | survival
  double psi1 = 0.0;
  double psi0 = 0.0;
  double ate = 0.0;
  double sigma_n = 0.0;
  double ci_lo = 0.0;
  double ci_hi = 0.0;
  int n = 0;
  int n_source = 0;
  int n_target = 0;
  double eic_mean = 0.0;  // signed P_n D* of the ATE gradient after targeting
  double eic_residual_psi1 = 0.0;
  double eic_residual_psi0 = 0.0;
  std::vector<FluctuationResult> fluctuations;
  long positivity_breaches = 0;
  // survival extras
  double ipctw1 = std::nan("");
  double ipctw0 = std::nan("");

  void finalize_ci() {
    const double half = 1.96 * sigma_n / std::sqrt(static_cast<double>(n));
    ci_lo = ate - half;
    ci_hi = ate + half;
  }
};

inline void to_json(ordered_json& j, const EstimateReport& r) {
  j = ordered_json{{"estimand", r.estimand},
                   {"psi1", r.psi1},
                   {"psi0", r.psi0},
                   {"ate", r.ate},
                   {"sigma_n", r.sigma_n},
                   {"ci_lo", r.ci_lo},
                   {"ci_hi", r.ci_hi},
                   {"n", r.n},
                   {"n_source", r.n_source},
                   {"n_target", r.n_target},
                   {"eic_mean", r.eic_mean},
                   {"eic_residual_psi1", r.eic_residual_psi1},
                   {"eic_residual_psi0", r.eic_residual_psi0},
                   {"positivity_breaches", r.positivity_breaches}};
  ordered_json fl = ordered_json::array();
  for (const auto& f : r.fluctuations) {
    ordered_json fj;
    to_json(fj, f);
    fl.push_back(fj);
  }
  j["fluctuations"] = fl;
  if (!std::isnan(r.ipctw1)) {
    j["ipctw1"] = r.ipctw1;
    j["ipctw0"] = r.ipctw0;
  }
}

inline EstimateReport estimate_report_from_json(const json& j) {
  EstimateReport r;
  r.estimand = j.at("estimand").get<std::string>();
  r.psi1 = j.at("psi1").get<double>();
  r.psi0 = j.at("psi0").get<double>();
  r.ate = j.at("ate").get<double>();
  r.sigma_n = j.at("sigma_n").get<double>();
  r.ci_lo = j.at("ci_lo").get<double>();
  r.ci_hi = j.at("ci_hi").get<double>();
  r.n = j.at("n").get<int>();
  r.n_source = j.at("n_source").get<int>();
  r.n_target = j.at("n_target").get<int>();
  r.eic_mean = j.at("eic_mean").get<double>();
  r.positivity_breaches = j.value("positivity_breaches", 0L);
  if (j.contains("ipctw1")) {
    r.ipctw1 = j.at("ipctw1").get<double>();
    r.ipctw0 = j.at("ipctw0").get<double>();
  }
  return r;
}

}  // namespace transtmle
