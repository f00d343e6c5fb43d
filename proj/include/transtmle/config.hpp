// Run configuration: estimand, dataset schema, nuisance designs, targeting
// options and tolerances, parsed from a JSON document. Flags on the CLI can
// override the scalar fields.
#pragma once

#include <cstdint>
#include <fstream>
#include <optional>
#include <string>
#include <vector>

#include "transtmle/dgp.hpp"
#include "transtmle/survival.hpp"
#include "transtmle/tmle_missing.hpp"

namespace transtmle {

struct RunConfig {
  std::string estimand = "missing-outcome";  // missing-outcome | survival
  std::vector<std::string> v_columns;
  std::vector<std::string> w_columns;
  int t0 = 0;
  int tau = 0;
  NuisanceConfig nuisance;
  HazardConfig hazard;
  MissingOptions missing_opts;
  SurvivalOptions survival_opts;
  std::uint64_t seed = 1;
  int replications = 500;
  int jobs = 0;  // 0 = hardware concurrency

  OutcomeSchema outcome_schema() const {
    OutcomeSchema s;
    s.v_columns = v_columns;
    s.w_columns = w_columns;
    return s;
  }
  SurvivalSchema survival_schema() const {
    SurvivalSchema s;
    s.w_columns = w_columns;
    s.t0 = t0;
    s.tau = tau;
    return s;
  }
};

namespace detail {

inline std::optional<FixedModel> fixed_model_from_json(const json& j, const std::string& key) {
  if (!j.contains("fixed") || !j.at("fixed").contains(key)) return std::nullopt;
  const auto& f = j.at("fixed").at(key);
  FixedModel m;
  m.coefficients = f.at("coefficients").get<Vec>();
  m.link = link_from_name(f.value("link", std::string("logit")));
  return m;
}

inline DesignSpec design_or(const json& j, const std::string& key, DesignSpec fallback) {
  if (j.contains("designs") && j.at("designs").contains(key))
    return design_spec_from_json(j.at("designs").at(key));
  return fallback;
}

}  // namespace detail

inline RunConfig run_config_from_json(const json& j) {
  RunConfig c;
  c.estimand = j.value("estimand", std::string("missing-outcome"));
  if (c.estimand != "missing-outcome" && c.estimand != "survival")
    throw SchemaMismatch("estimand must be missing-outcome or survival");
  c.w_columns = j.at("w_columns").get<std::vector<std::string>>();
  c.v_columns = j.value("v_columns", c.w_columns);
  c.t0 = j.value("t0", 0);
  c.tau = j.value("tau", 0);
  c.seed = j.value("seed", std::uint64_t{1});
  c.replications = j.value("replications", 500);
  c.jobs = j.value("jobs", 0);

  TruncationBounds trunc;
  if (j.contains("truncation")) trunc = truncation_from_json(j.at("truncation"));

  const bool marginal = j.value("density_ratio_includes_marginal_odds", true);
  const bool force_one = j.value("force_density_ratio_one", false);
  const std::string fluct = j.value("fluctuation", std::string("covariate"));
  if (fluct != "covariate" && fluct != "weight")
    throw SchemaMismatch("fluctuation must be covariate or weight");
  const double tol = j.value("score_tolerance", 1e-8);
  if (tol <= 0.0) throw SchemaMismatch("score_tolerance must be positive");
  const std::string positivity = j.value("positivity", std::string("warn"));
  if (positivity != "warn" && positivity != "error")
    throw SchemaMismatch("positivity must be warn or error");

  if (c.estimand == "missing-outcome") {
    NuisanceConfig base = NuisanceConfig::defaults(c.outcome_schema());
    c.nuisance.g_a = detail::design_or(j, "g_a", base.g_a);
    c.nuisance.p_delta = detail::design_or(j, "p_delta", base.p_delta);
    c.nuisance.p_s_given_v = detail::design_or(j, "p_s_given_v", base.p_s_given_v);
    c.nuisance.q_bar = detail::design_or(j, "q_bar", base.q_bar);
    c.nuisance.q_bar_r = detail::design_or(j, "q_bar_r", base.q_bar_r);
    c.nuisance.q_bar_stratified = j.value("q_bar_stratified", false);
    c.nuisance.trunc = trunc;
    c.nuisance.g_a_fixed = detail::fixed_model_from_json(j, "g_a");
    c.nuisance.p_delta_fixed = detail::fixed_model_from_json(j, "p_delta");
    c.nuisance.p_s_given_v_fixed = detail::fixed_model_from_json(j, "p_s_given_v");
    c.nuisance.q_bar_fixed = detail::fixed_model_from_json(j, "q_bar");

    c.missing_opts.targeting = j.value("targeting", std::string("per-arm")) == "joint"
                                   ? MissingTargeting::Joint
                                   : MissingTargeting::PerArm;
    c.missing_opts.fluctuation =
        fluct == "weight" ? FluctuationMode::Weight : FluctuationMode::Covariate;
    c.missing_opts.linear_fluctuation = j.value("linear_fluctuation", false);
    if (j.contains("y_bounds"))
      c.missing_opts.y_bounds = std::make_pair(j.at("y_bounds")[0].get<double>(),
                                               j.at("y_bounds")[1].get<double>());
    c.missing_opts.include_marginal_odds = marginal;
    c.missing_opts.force_ratio_one = force_one;
    c.missing_opts.max_stage_iterations = j.value("max_stage_iterations", 10);
    c.missing_opts.score_tol_floor = tol;
    c.missing_opts.positivity_error = positivity == "error";
  } else {
    if (c.t0 < 1 || c.tau < c.t0) throw SchemaMismatch("survival estimand needs 1 <= t0 <= tau");
    HazardConfig base = HazardConfig::defaults(c.survival_schema());
    c.hazard.lambda = detail::design_or(j, "lambda", base.lambda);
    c.hazard.alpha = detail::design_or(j, "alpha", base.alpha);
    c.hazard.g_a = detail::design_or(j, "g_a", base.g_a);
    c.hazard.r_model = detail::design_or(j, "r_model", base.r_model);
    c.hazard.trunc = trunc;
    c.hazard.lambda_fixed = detail::fixed_model_from_json(j, "lambda");
    c.hazard.alpha_fixed = detail::fixed_model_from_json(j, "alpha");
    c.hazard.g_a_fixed = detail::fixed_model_from_json(j, "g_a");
    c.hazard.r_fixed = detail::fixed_model_from_json(j, "r_model");

    c.survival_opts.targeting = j.value("targeting", std::string("per-arm"));
    c.survival_opts.fluctuation =
        fluct == "weight" ? FluctuationMode::Weight : FluctuationMode::Covariate;
    c.survival_opts.include_marginal_odds = marginal;
    c.survival_opts.force_r_one = force_one;
    c.survival_opts.max_targeting_iterations = j.value("max_targeting_iterations", 25);
    c.survival_opts.score_tol_floor = tol;
    c.survival_opts.positivity_error = positivity == "error";
  }
  return c;
}

inline RunConfig read_run_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ValidationError("cannot open config: " + path);
  json j;
  try {
    in >> j;
  } catch (const std::exception& e) {
    throw SchemaMismatch(std::string("config parse error: ") + e.what());
  }
  return run_config_from_json(j);
}

}  // namespace transtmle
