// Replication studies: bias, spread, confidence-interval coverage and
// score-equation behavior of the full and less-aggressive estimators across
// the double-robustness scenarios. Replications run in parallel with
// per-replication seed streams and are aggregated in replication order.
#pragma once

#include <sstream>
#include <string>
#include <vector>

#include "transtmle/dgp.hpp"
#include "transtmle/federated.hpp"

namespace transtmle {

struct ScenarioSummary {
  std::string estimand;
  std::string scenario;
  std::string estimator;  // full | less-aggressive
  int replications = 0;
  int n = 0;
  double truth = 0.0;
  double mean_est = 0.0;
  double bias = 0.0;
  double mc_se = 0.0;    // standard error of the bias estimate
  double emp_sd = 0.0;   // empirical sd of the estimates
  double mean_se = 0.0;  // average sigma_n / sqrt(n)
  double coverage = 0.0;
  double mean_abs_score = 0.0;
  int score_failures = 0;  // replications with |P_n D*| above tolerance
};

namespace detail {

struct RepRecord {
  double est = 0.0;
  double half_width = 0.0;
  bool covered = false;
  bool score_ok = false;
  double abs_score = 0.0;
};

inline ScenarioSummary summarize(std::vector<RepRecord> reps, double truth) {
  ScenarioSummary s;
  s.replications = static_cast<int>(reps.size());
  s.truth = truth;
  Vec ests;
  for (const auto& r : reps) {
    ests.push_back(r.est);
    s.mean_se += r.half_width / 1.96;
    s.coverage += r.covered ? 1.0 : 0.0;
    s.mean_abs_score += r.abs_score;
    s.score_failures += r.score_ok ? 0 : 1;
  }
  s.mean_est = mean(ests);
  s.bias = s.mean_est - truth;
  s.emp_sd = sd_pop(ests);
  s.mc_se = s.emp_sd / std::sqrt(static_cast<double>(reps.size()));
  s.mean_se /= reps.size();
  s.coverage /= reps.size();
  s.mean_abs_score /= reps.size();
  return s;
}

inline RepRecord rep_from_report(const EstimateReport& rep, double truth, double tol_floor) {
  RepRecord r;
  r.est = rep.ate;
  r.half_width = 1.96 * rep.sigma_n / std::sqrt(static_cast<double>(rep.n));
  r.covered = rep.ci_lo <= truth && truth <= rep.ci_hi;
  r.abs_score = std::abs(rep.eic_mean);
  const double n = rep.n;
  r.score_ok = r.abs_score <= std::max(tol_floor, rep.sigma_n / (std::sqrt(n) * std::log(n)));
  return r;
}

}  // namespace detail

inline ScenarioSummary study_missing(const DgpSpec& spec, DrScenario scenario,
                                     bool less_aggressive, int reps, int n,
                                     std::uint64_t seed, int jobs) {
  const TruthReport truth = true_values(spec);
  const NuisanceConfig cfg = misspecify_outcome(spec, scenario);
  std::vector<detail::RepRecord> recs(static_cast<std::size_t>(reps));
  parallel_for_index(reps, jobs, [&](int i) {
    const auto ds = generate_outcome(spec, n, derive_seed(seed, static_cast<std::uint64_t>(i)));
    MissingOptions opts;
    opts.force_ratio_one = less_aggressive;
    const auto res = estimate_missing(ds, cfg, opts);
    recs[static_cast<std::size_t>(i)] =
        detail::rep_from_report(res.report, truth.ate, opts.score_tol_floor);
  });
  ScenarioSummary s = detail::summarize(std::move(recs), truth.ate);
  s.estimand = "missing-outcome";
  s.scenario = scenario_name(scenario);
  s.estimator = less_aggressive ? "less-aggressive" : "full";
  s.n = n;
  return s;
}

inline ScenarioSummary study_survival(const DgpSpec& spec, DrScenario scenario,
                                      bool less_aggressive, int reps, int n,
                                      std::uint64_t seed, int jobs) {
  const TruthReport truth = true_values(spec);
  const HazardConfig cfg = misspecify_survival(spec, scenario);
  std::vector<detail::RepRecord> recs(static_cast<std::size_t>(reps));
  parallel_for_index(reps, jobs, [&](int i) {
    const auto ds = generate_survival(spec, n, derive_seed(seed, static_cast<std::uint64_t>(i)));
    SurvivalOptions opts;
    opts.force_r_one = less_aggressive;
    const auto res = estimate_survival(ds, cfg, opts);
    recs[static_cast<std::size_t>(i)] =
        detail::rep_from_report(res.report, truth.ate, opts.score_tol_floor);
  });
  ScenarioSummary s = detail::summarize(std::move(recs), truth.ate);
  s.estimand = "survival";
  s.scenario = scenario_name(scenario);
  s.estimator = less_aggressive ? "less-aggressive" : "full";
  s.n = n;
  return s;
}

inline std::string study_csv_header() {
  return "estimand,scenario,estimator,replications,n,truth,mean_est,bias,mc_se,emp_sd,"
         "mean_se,coverage,mean_abs_score,score_failures";
}

inline std::string study_csv_row(const ScenarioSummary& s) {
  std::ostringstream out;
  out << s.estimand << "," << s.scenario << "," << s.estimator << "," << s.replications << ","
      << s.n << "," << s.truth << "," << s.mean_est << "," << s.bias << "," << s.mc_se << ","
      << s.emp_sd << "," << s.mean_se << "," << s.coverage << "," << s.mean_abs_score << ","
      << s.score_failures;
  return out.str();
}

}  // namespace transtmle
