// Estimation of the nuisance functions entering the efficient influence
// curve and the targeting steps: treatment, missingness, selection, outcome
// regressions, and discrete-time event/censoring hazards. All are GLMs with
// user-declared designs; a passthrough mode injects known coefficient
// vectors (used to run the estimators at the truth).
#pragma once

#include <array>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "transtmle/data.hpp"
#include "transtmle/regression.hpp"

namespace transtmle {

struct TruncationBounds {
  double lo = 0.005;
  double hi = 0.995;
};

inline void to_json(ordered_json& j, const TruncationBounds& t) {
  j = ordered_json::array({t.lo, t.hi});
}

inline TruncationBounds truncation_from_json(const json& j) {
  TruncationBounds t;
  t.lo = j.at(0).get<double>();
  t.hi = j.at(1).get<double>();
  if (t.lo < 0.0 || t.hi > 1.0 || t.lo >= t.hi)
    throw SchemaMismatch("invalid truncation bounds");
  return t;
}

// Counts clever-covariate evaluations whose denominators sit at the
// truncation bound; policy decides between warn-and-continue and hard error.
struct PositivityCounter {
  long breaches = 0;
  bool error_on_breach = false;

  void hit(const char* what) {
    ++breaches;
    if (error_on_breach)
      throw NumericError(std::string("positivity breach in ") + what);
  }
  bool at_bound(double p, const TruncationBounds& t) const {
    return p <= t.lo + 1e-12 || p >= t.hi - 1e-12;
  }
};

// Injected model for passthrough mode: coefficients aligned to the design's
// terms, fit skipped entirely.
struct FixedModel {
  Vec coefficients;
  Link link = Link::Logit;
};

struct NuisanceConfig {
  DesignSpec g_a;            // over w columns
  DesignSpec p_delta;        // over w columns and "a"
  DesignSpec p_s_given_v;    // over v columns
  DesignSpec q_bar;          // over w columns (and "a" unless stratified)
  DesignSpec q_bar_r;        // over v columns
  bool q_bar_stratified = false;
  Link q_bar_link = Link::Logit;
  TruncationBounds trunc;
  std::optional<std::pair<double, double>> y_bounds;  // scaling for continuous Y

  std::optional<FixedModel> g_a_fixed, p_delta_fixed, p_s_given_v_fixed, q_bar_fixed;

  static NuisanceConfig defaults(const OutcomeSchema& schema) {
    NuisanceConfig c;
    c.g_a = DesignSpec::main_effects(schema.w_columns);
    auto pd = schema.w_columns;
    pd.emplace_back("a");
    c.p_delta = DesignSpec::main_effects(pd);
    c.p_s_given_v = DesignSpec::main_effects(schema.v_columns);
    c.q_bar = DesignSpec::main_effects(pd);
    c.q_bar_r = DesignSpec::main_effects(schema.v_columns);
    return c;
  }
};

struct NuisanceFits {
  RegressionFit g_a;                              // P(A=1 | W, S=1)
  RegressionFit p_delta;                          // P(Delta=1 | W, A, S=1)
  RegressionFit p_s_given_v;                      // P(S=1 | V)
  std::optional<RegressionFit> p_s_given_w;       // equals p_s_given_v when V=W
  bool q_bar_stratified = false;
  RegressionFit q_bar;                            // pooled, "a" in design
  std::array<RegressionFit, 2> q_bar_arm;         // index by arm when stratified
  std::optional<std::array<RegressionFit, 2>> q_bar_r;  // filled by the TMLE stage
  double p_s1 = 0.5;
  TruncationBounds trunc;
  double y_lo = 0.0, y_hi = 1.0;                  // outcome scaling actually applied

  // Initial outcome regression prediction on the scaled outcome.
  double q_bar_scaled(const Vec& w, int a) const {
    if (q_bar_stratified) return q_bar_arm[static_cast<std::size_t>(a)].predict(CovRow{&w, 0.0, 0.0});
    return q_bar.predict(CovRow{&w, static_cast<double>(a), 0.0});
  }
};

inline void apply_trunc(RegressionFit& f, const TruncationBounds& t) {
  if (f.link == Link::Logit) {
    f.trunc_lo = t.lo;
    f.trunc_hi = t.hi;
  }
}

// Fits every nuisance the missing-outcome problem needs. g_A and p_delta on
// s=1 rows, p_{S|V} on all rows, the outcome regression on s=1, delta=1 rows
// (scaled into [0,1] when y_bounds are given). p_s1 is the empirical
// proportion.
inline NuisanceFits fit_nuisances(const OutcomeDataset& ds, const NuisanceConfig& cfg) {
  NuisanceFits out;
  out.trunc = cfg.trunc;
  out.p_s1 = ds.p_s1();
  out.q_bar_stratified = cfg.q_bar_stratified;
  const auto& wnames = ds.schema.w_columns;
  const auto& vnames = ds.schema.v_columns;

  std::vector<CovRow> src_rows;
  Vec a_resp, delta_resp;
  for (const auto& r : ds.records) {
    if (r.s != 1) continue;
    src_rows.push_back(CovRow{&*r.w, static_cast<double>(*r.a), 0.0});
    a_resp.push_back(static_cast<double>(*r.a));
    delta_resp.push_back(static_cast<double>(*r.delta));
  }

  try {
    out.g_a = cfg.g_a_fixed
                  ? fixed_fit(cfg.g_a, wnames, cfg.g_a_fixed->coefficients, Link::Logit)
                  : fit_logistic(cfg.g_a, wnames, src_rows, a_resp);
  } catch (const std::exception& e) {
    throw NumericError(std::string("g_a: ") + e.what());
  }
  try {
    out.p_delta = cfg.p_delta_fixed
                      ? fixed_fit(cfg.p_delta, wnames, cfg.p_delta_fixed->coefficients, Link::Logit)
                      : fit_logistic(cfg.p_delta, wnames, src_rows, delta_resp);
  } catch (const std::exception& e) {
    throw NumericError(std::string("p_delta: ") + e.what());
  }

  std::vector<CovRow> all_rows;
  Vec s_resp;
  for (const auto& r : ds.records) {
    all_rows.push_back(CovRow{&r.v, 0.0, 0.0});
    s_resp.push_back(static_cast<double>(r.s));
  }
  try {
    out.p_s_given_v =
        cfg.p_s_given_v_fixed
            ? fixed_fit(cfg.p_s_given_v, vnames, cfg.p_s_given_v_fixed->coefficients, Link::Logit)
            : fit_logistic(cfg.p_s_given_v, vnames, all_rows, s_resp);
  } catch (const std::exception& e) {
    throw NumericError(std::string("p_s_given_v: ") + e.what());
  }
  if (ds.schema.v_equals_w()) out.p_s_given_w = out.p_s_given_v;

  // outcome regression on the observed-outcome subsample
  out.y_lo = 0.0;
  out.y_hi = 1.0;
  if (cfg.y_bounds) {
    out.y_lo = cfg.y_bounds->first;
    out.y_hi = cfg.y_bounds->second;
    if (!(out.y_hi > out.y_lo)) throw SchemaMismatch("y_bounds must satisfy lo < hi");
  }
  const double span = out.y_hi - out.y_lo;
  const auto scale_y = [&](double y) { return (y - out.y_lo) / span; };

  const auto fit_q = [&](std::optional<int> arm) {
    std::vector<CovRow> rows;
    Vec y;
    for (const auto& r : ds.records) {
      if (r.s != 1 || *r.delta != 1) continue;
      if (arm && *r.a != *arm) continue;
      rows.push_back(CovRow{&*r.w, static_cast<double>(*r.a), 0.0});
      y.push_back(scale_y(*r.y));
    }
    try {
      if (cfg.q_bar_fixed)
        return fixed_fit(cfg.q_bar, wnames, cfg.q_bar_fixed->coefficients, cfg.q_bar_fixed->link);
      if (cfg.q_bar_link == Link::Identity)
        return fit_linear(cfg.q_bar, wnames, rows, y);
      return fit_logistic(cfg.q_bar, wnames, rows, y);
    } catch (const std::exception& e) {
      throw NumericError(std::string("q_bar: ") + e.what());
    }
  };
  if (cfg.q_bar_stratified) {
    out.q_bar_arm[0] = fit_q(0);
    out.q_bar_arm[1] = fit_q(1);
  } else {
    out.q_bar = fit_q(std::nullopt);
  }

  apply_trunc(out.g_a, cfg.trunc);
  apply_trunc(out.p_delta, cfg.trunc);
  apply_trunc(out.p_s_given_v, cfg.trunc);
  if (out.p_s_given_w) apply_trunc(*out.p_s_given_w, cfg.trunc);
  apply_trunc(out.q_bar, cfg.trunc);
  apply_trunc(out.q_bar_arm[0], cfg.trunc);
  apply_trunc(out.q_bar_arm[1], cfg.trunc);
  return out;
}

// Least-squares regression of supplied per-row values on V among s=1 rows.
// This is the reduced regression producing Q-bar-r.
inline RegressionFit fit_reduced_regression(const OutcomeDataset& ds, const Vec& values_s1,
                                            const DesignSpec& spec) {
  std::vector<CovRow> rows;
  std::size_t k = 0;
  for (const auto& r : ds.records) {
    if (r.s != 1) continue;
    rows.push_back(CovRow{&r.v, static_cast<double>(*r.a), 0.0});
    ++k;
  }
  if (k != values_s1.size())
    throw NumericError("fit_reduced_regression: value vector does not match s=1 rows");
  return fit_linear(spec, ds.schema.v_columns, rows, values_s1);
}

// ---- hazards ---------------------------------------------------------------

struct HazardConfig {
  DesignSpec lambda;   // over w columns and "a"; default time indicators
  DesignSpec alpha;
  DesignSpec g_a;      // unit-level treatment model
  DesignSpec r_model;  // P(S=1|W) over all units
  TruncationBounds trunc;

  std::optional<FixedModel> lambda_fixed, alpha_fixed, g_a_fixed, r_fixed;

  static HazardConfig defaults(const SurvivalSchema& schema) {
    HazardConfig c;
    auto wa = schema.w_columns;
    wa.emplace_back("a");
    c.lambda = DesignSpec::main_effects(wa);
    c.lambda.time_encoding = "indicators";
    c.alpha = c.lambda;
    c.g_a = DesignSpec::main_effects(schema.w_columns);
    c.r_model = DesignSpec::main_effects(schema.w_columns);
    return c;
  }
};

struct HazardFits {
  RegressionFit lambda_fit;  // failure hazard on at-risk person-time rows
  RegressionFit alpha_fit;   // censoring hazard; risk set excludes same-period failures
  RegressionFit g_a;
  RegressionFit r_fit;       // P(S=1 | W)
  double p_s1 = 0.5;
  TruncationBounds trunc;
  int tau = 0;

  double lambda(int t, const Vec& w, int a) const {
    return lambda_fit.predict(CovRow{&w, static_cast<double>(a), static_cast<double>(t)});
  }
  double alpha(int t, const Vec& w, int a) const {
    return alpha_fit.predict(CovRow{&w, static_cast<double>(a), static_cast<double>(t)});
  }
};

// Pooled logistic hazard fits on the person-time expansion. The failure
// hazard uses every at-risk row; the censoring hazard additionally drops
// rows with a same-period failure, matching the likelihood factorization
// (event before censoring within a period).
inline HazardFits fit_hazards(const SurvivalDataset& ds, const PersonTimeTable& table,
                              const HazardConfig& cfg) {
  if (table.rows.empty()) throw NumericError("fit_hazards: empty person-time table");
  HazardFits out;
  out.trunc = cfg.trunc;
  out.tau = table.tau;
  out.p_s1 = ds.p_s1();
  const auto& wnames = ds.schema.w_columns;

  std::vector<CovRow> risk_rows;
  Vec dn;
  for (const auto& r : table.rows) {
    risk_rows.push_back(CovRow{r.w, static_cast<double>(r.a), static_cast<double>(r.t)});
    dn.push_back(static_cast<double>(r.dn));
  }
  std::vector<CovRow> cens_rows;
  Vec dac;
  for (const auto& r : table.rows) {
    if (r.dn == 1) continue;
    cens_rows.push_back(CovRow{r.w, static_cast<double>(r.a), static_cast<double>(r.t)});
    dac.push_back(static_cast<double>(r.dac));
  }

  try {
    out.lambda_fit =
        cfg.lambda_fixed
            ? fixed_fit(cfg.lambda, wnames, cfg.lambda_fixed->coefficients, Link::Logit, table.tau)
            : fit_logistic(cfg.lambda, wnames, risk_rows, dn, {}, {}, table.tau);
  } catch (const std::exception& e) {
    throw NumericError(std::string("lambda: ") + e.what());
  }
  try {
    out.alpha_fit =
        cfg.alpha_fixed
            ? fixed_fit(cfg.alpha, wnames, cfg.alpha_fixed->coefficients, Link::Logit, table.tau)
            : fit_logistic(cfg.alpha, wnames, cens_rows, dac, {}, {}, table.tau);
  } catch (const std::exception& e) {
    throw NumericError(std::string("alpha: ") + e.what());
  }

  std::vector<CovRow> unit_rows;
  Vec a_resp;
  for (const auto& r : ds.records) {
    if (r.s != 1) continue;
    unit_rows.push_back(CovRow{&r.w, 0.0, 0.0});
    a_resp.push_back(static_cast<double>(*r.a));
  }
  try {
    out.g_a = cfg.g_a_fixed ? fixed_fit(cfg.g_a, wnames, cfg.g_a_fixed->coefficients, Link::Logit)
                            : fit_logistic(cfg.g_a, wnames, unit_rows, a_resp);
  } catch (const std::exception& e) {
    throw NumericError(std::string("g_a: ") + e.what());
  }

  std::vector<CovRow> all_rows;
  Vec s_resp;
  for (const auto& r : ds.records) {
    all_rows.push_back(CovRow{&r.w, 0.0, 0.0});
    s_resp.push_back(static_cast<double>(r.s));
  }
  try {
    out.r_fit = cfg.r_fixed ? fixed_fit(cfg.r_model, wnames, cfg.r_fixed->coefficients, Link::Logit)
                            : fit_logistic(cfg.r_model, wnames, all_rows, s_resp);
  } catch (const std::exception& e) {
    throw NumericError(std::string("r_fit: ") + e.what());
  }

  apply_trunc(out.lambda_fit, cfg.trunc);
  apply_trunc(out.alpha_fit, cfg.trunc);
  apply_trunc(out.g_a, cfg.trunc);
  apply_trunc(out.r_fit, cfg.trunc);
  return out;
}

// ---- prediction interfaces --------------------------------------------------
//
// The influence-curve and targeting code consumes plain functions, so fitted
// models and injected data-generating truths run through identical paths.

struct OutcomePredictors {
  std::function<double(const Vec& w)> g1;                 // P(A=1|W,S=1)
  std::function<double(const Vec& w, int a)> p_delta;     // P(Delta=1|W,A=a,S=1)
  std::function<double(const Vec& v)> pi_v;               // P(S=1|V=v)
  std::function<double(const Vec& w, int a)> q_bar;       // outcome regression (original scale)
  std::function<double(const Vec& v, int a)> q_bar_r;     // reduced regression (original scale)
  double p_s1 = 0.5;
  TruncationBounds trunc;
  bool include_marginal_odds = true;
  bool force_ratio_one = false;

  double g(const Vec& w, int a) const {
    const double g1v = g1(w);
    return a == 1 ? g1v : 1.0 - g1v;
  }
  // The density ratio p(V|S=0)/p(V|S=1) via the selection odds; with the
  // marginal odds factor included the two representations agree by Bayes'
  // rule, without it this is the literal ratio P(S=0|V)/P(S=1|V).
  double ratio(const Vec& v) const {
    if (force_ratio_one) return 1.0;
    const double pi = pi_v(v);
    double r = (1.0 - pi) / pi;
    if (include_marginal_odds) r *= p_s1 / (1.0 - p_s1);
    return r;
  }
};

inline OutcomePredictors predictors_from_fits(const NuisanceFits& fits,
                                              bool include_marginal_odds,
                                              bool force_ratio_one) {
  OutcomePredictors p;
  p.g1 = [fit = fits.g_a](const Vec& w) { return fit.predict(CovRow{&w, 1.0, 0.0}); };
  p.p_delta = [fit = fits.p_delta](const Vec& w, int a) {
    return fit.predict(CovRow{&w, static_cast<double>(a), 0.0});
  };
  p.pi_v = [fit = fits.p_s_given_v](const Vec& v) { return fit.predict(CovRow{&v, 0.0, 0.0}); };
  const double lo = fits.y_lo, span = fits.y_hi - fits.y_lo;
  p.q_bar = [fits, lo, span](const Vec& w, int a) { return lo + span * fits.q_bar_scaled(w, a); };
  if (fits.q_bar_r) {
    p.q_bar_r = [fits = *fits.q_bar_r, lo, span](const Vec& v, int a) {
      return lo + span * fits[static_cast<std::size_t>(a)].predict(CovRow{&v, 0.0, 0.0});
    };
  }
  p.p_s1 = fits.p_s1;
  p.trunc = fits.trunc;
  p.include_marginal_odds = include_marginal_odds;
  p.force_ratio_one = force_ratio_one;
  return p;
}

struct SurvivalPredictors {
  std::function<double(int t, const Vec& w, int a)> lambda;
  std::function<double(int t, const Vec& w, int a)> alpha;
  std::function<double(const Vec& w)> g1;
  std::function<double(const Vec& w)> pi_w;  // P(S=1|W)
  double p_s1 = 0.5;
  int t0 = 0;
  int tau = 0;
  TruncationBounds trunc;
  bool include_marginal_odds = true;
  bool force_r_one = false;

  double g(const Vec& w, int a) const {
    const double g1v = g1(w);
    return a == 1 ? g1v : 1.0 - g1v;
  }
  double r_ratio(const Vec& w) const {
    if (force_r_one) return 1.0;
    const double pi = pi_w(w);
    double r = (1.0 - pi) / pi;
    if (include_marginal_odds) r *= p_s1 / (1.0 - p_s1);
    return r;
  }
};

inline SurvivalPredictors predictors_from_hazard_fits(const HazardFits& fits, int t0,
                                                      bool include_marginal_odds,
                                                      bool force_r_one) {
  SurvivalPredictors p;
  p.lambda = [fit = fits.lambda_fit](int t, const Vec& w, int a) {
    return fit.predict(CovRow{&w, static_cast<double>(a), static_cast<double>(t)});
  };
  p.alpha = [fit = fits.alpha_fit](int t, const Vec& w, int a) {
    return fit.predict(CovRow{&w, static_cast<double>(a), static_cast<double>(t)});
  };
  p.g1 = [fit = fits.g_a](const Vec& w) { return fit.predict(CovRow{&w, 1.0, 0.0}); };
  p.pi_w = [fit = fits.r_fit](const Vec& w) { return fit.predict(CovRow{&w, 0.0, 0.0}); };
  p.p_s1 = fits.p_s1;
  p.t0 = t0;
  p.tau = fits.tau;
  p.trunc = fits.trunc;
  p.include_marginal_odds = include_marginal_odds;
  p.force_r_one = force_r_one;
  return p;
}

// ---- serialization ----------------------------------------------------------

inline void to_json(ordered_json& j, const NuisanceFits& f) {
  ordered_json g, pd, psv;
  to_json(g, f.g_a);
  to_json(pd, f.p_delta);
  to_json(psv, f.p_s_given_v);
  j = ordered_json{{"g_a", g}, {"p_delta", pd}, {"p_s_given_v", psv}};
  j["q_bar_stratified"] = f.q_bar_stratified;
  if (f.q_bar_stratified) {
    ordered_json q0, q1;
    to_json(q0, f.q_bar_arm[0]);
    to_json(q1, f.q_bar_arm[1]);
    j["q_bar_arm0"] = q0;
    j["q_bar_arm1"] = q1;
  } else {
    ordered_json q;
    to_json(q, f.q_bar);
    j["q_bar"] = q;
  }
  if (f.q_bar_r) {
    ordered_json r0, r1;
    to_json(r0, (*f.q_bar_r)[0]);
    to_json(r1, (*f.q_bar_r)[1]);
    j["q_bar_r_arm0"] = r0;
    j["q_bar_r_arm1"] = r1;
  }
  j["p_s1"] = f.p_s1;
  ordered_json tr;
  to_json(tr, f.trunc);
  j["truncation"] = tr;
  j["y_bounds"] = {f.y_lo, f.y_hi};
}

inline void to_json(ordered_json& j, const HazardFits& f) {
  ordered_json lam, alp, g, r;
  to_json(lam, f.lambda_fit);
  to_json(alp, f.alpha_fit);
  to_json(g, f.g_a);
  to_json(r, f.r_fit);
  ordered_json tr;
  to_json(tr, f.trunc);
  j = ordered_json{{"lambda", lam}, {"alpha", alp},      {"g_a", g},
                   {"r_fit", r},    {"p_s1", f.p_s1},    {"tau", f.tau},
                   {"truncation", tr}};
}

inline HazardFits hazard_fits_from_json(const json& j) {
  HazardFits f;
  f.lambda_fit = regression_fit_from_json(j.at("lambda"));
  f.alpha_fit = regression_fit_from_json(j.at("alpha"));
  f.g_a = regression_fit_from_json(j.at("g_a"));
  f.r_fit = regression_fit_from_json(j.at("r_fit"));
  f.p_s1 = j.at("p_s1").get<double>();
  f.tau = j.at("tau").get<int>();
  f.trunc = truncation_from_json(j.at("truncation"));
  return f;
}

}  // namespace transtmle
