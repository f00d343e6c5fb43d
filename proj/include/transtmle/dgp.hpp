// Structural-causal-model data generators with computable ground truth for
// both estimands. Covariates live on a finite discrete support so the
// statistical estimands can be evaluated by exact summation; the same specs
// drive the double-robustness scenarios by deleting covariates from the
// nuisance designs.
#pragma once

#include <algorithm>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "transtmle/data.hpp"
#include "transtmle/nuisance.hpp"
#include "transtmle/rng.hpp"

namespace transtmle {

// eta = intercept + w.w_coefs + a*a_coef + a*(w.aw_coefs)
struct LinearTerms {
  double intercept = 0.0;
  Vec w_coefs;
  double a_coef = 0.0;
  Vec aw_coefs;

  double eval(const Vec& w, double a) const {
    double eta = intercept + a * a_coef;
    for (std::size_t j = 0; j < w_coefs.size() && j < w.size(); ++j)
      eta += w_coefs[j] * w[j];
    for (std::size_t j = 0; j < aw_coefs.size() && j < w.size(); ++j)
      eta += a * aw_coefs[j] * w[j];
    return eta;
  }
};

struct CovariateLaw {
  std::vector<Vec> support;
  Vec probs;      // shared law (selection model applies)
  bool per_stratum = false;
  Vec probs_s1;   // per-stratum law: W | S=1
  Vec probs_s0;   // W | S=0
  double p_s1 = 0.5;
};

struct OutcomeModel {
  std::string family = "binary";  // binary | gaussian
  LinearTerms mean;               // logit scale for binary, identity for gaussian
  double noise_sd = 1.0;
};

struct SurvivalModel {
  int t0 = 0;
  int tau = 0;
  Vec event_baseline_logits;  // one per period 1..tau
  LinearTerms event;          // covariate shift added to each period logit
  Vec cens_baseline_logits;   // periods 1..tau-1 stochastic; tau closes administratively
  LinearTerms cens;
};

struct DgpSpec {
  std::string kind = "missing";  // missing | survival
  std::vector<std::string> w_columns;
  std::vector<std::string> v_columns;
  CovariateLaw cov;
  LinearTerms selection;    // logit P(S=1|W); ignored for per-stratum laws
  LinearTerms treatment;    // logit P(A=1|W,S=1)
  LinearTerms missingness;  // logit P(Delta=1|W,A,S=1)
  OutcomeModel outcome;
  SurvivalModel survival;
  std::size_t enumeration_cap = 1000000;

  double pi_s_given_w(const Vec& w) const;
  double lambda_true(int t, const Vec& w, int a) const {
    return expit(survival.event_baseline_logits[static_cast<std::size_t>(t - 1)] +
                 survival.event.eval(w, a));
  }
  // Administrative closure: every trajectory still at risk at tau is censored
  // there, so the true censoring hazard at tau is 1.
  double alpha_true(int t, const Vec& w, int a) const {
    if (t >= survival.tau) return 1.0;
    return expit(survival.cens_baseline_logits[static_cast<std::size_t>(t - 1)] +
                 survival.cens.eval(w, a));
  }
  double mu_true(const Vec& w, int a) const {
    const double eta = outcome.mean.eval(w, static_cast<double>(a));
    return outcome.family == "binary" ? expit(eta) : eta;
  }
};

inline double DgpSpec::pi_s_given_w(const Vec& w) const {
  if (!cov.per_stratum) return expit(selection.eval(w, 0.0));
  // per-stratum law: Bayes from the two stratum laws
  for (std::size_t i = 0; i < cov.support.size(); ++i) {
    if (cov.support[i] == w) {
      const double a1 = cov.p_s1 * cov.probs_s1[i];
      const double a0 = (1.0 - cov.p_s1) * cov.probs_s0[i];
      return a1 / (a1 + a0);
    }
  }
  throw NumericError("pi_s_given_w: point not in support");
}

// ---- JSON -------------------------------------------------------------------

inline LinearTerms linear_terms_from_json(const json& j) {
  LinearTerms t;
  t.intercept = j.value("intercept", 0.0);
  if (j.contains("w_coefs")) t.w_coefs = j.at("w_coefs").get<Vec>();
  t.a_coef = j.value("a_coef", 0.0);
  if (j.contains("aw_coefs")) t.aw_coefs = j.at("aw_coefs").get<Vec>();
  return t;
}

inline void to_json(ordered_json& j, const LinearTerms& t) {
  j = ordered_json{{"intercept", t.intercept},
                   {"w_coefs", t.w_coefs},
                   {"a_coef", t.a_coef},
                   {"aw_coefs", t.aw_coefs}};
}

inline DgpSpec dgp_spec_from_json(const json& j) {
  DgpSpec s;
  s.kind = j.value("kind", "missing");
  if (s.kind != "missing" && s.kind != "survival")
    throw SchemaMismatch("dgp kind must be missing or survival");
  s.w_columns = j.at("w_columns").get<std::vector<std::string>>();
  s.v_columns = j.value("v_columns", s.w_columns);
  const auto& cj = j.at("covariates");
  for (const auto& pt : cj.at("support")) s.cov.support.push_back(pt.get<Vec>());
  if (cj.contains("probs")) {
    s.cov.probs = cj.at("probs").get<Vec>();
  } else {
    s.cov.per_stratum = true;
    s.cov.probs_s1 = cj.at("probs_s1").get<Vec>();
    s.cov.probs_s0 = cj.at("probs_s0").get<Vec>();
    s.cov.p_s1 = cj.at("p_s1").get<double>();
  }
  if (j.contains("selection")) s.selection = linear_terms_from_json(j.at("selection"));
  if (j.contains("treatment")) s.treatment = linear_terms_from_json(j.at("treatment"));
  if (j.contains("missingness")) s.missingness = linear_terms_from_json(j.at("missingness"));
  if (j.contains("outcome")) {
    s.outcome.family = j.at("outcome").value("family", "binary");
    s.outcome.mean = linear_terms_from_json(j.at("outcome").at("mean"));
    s.outcome.noise_sd = j.at("outcome").value("noise_sd", 1.0);
  }
  if (j.contains("survival")) {
    const auto& sj = j.at("survival");
    s.survival.t0 = sj.at("t0").get<int>();
    s.survival.tau = sj.at("tau").get<int>();
    s.survival.event_baseline_logits = sj.at("event").at("baseline_logits").get<Vec>();
    s.survival.event = linear_terms_from_json(sj.at("event"));
    s.survival.cens_baseline_logits = sj.at("censoring").at("baseline_logits").get<Vec>();
    s.survival.cens = linear_terms_from_json(sj.at("censoring"));
  }
  s.enumeration_cap = j.value("enumeration_cap", std::size_t{1000000});

  // structural sanity
  const std::size_t p = s.w_columns.size();
  for (const auto& pt : s.cov.support)
    if (pt.size() != p) throw SchemaMismatch("support point has wrong dimension");
  if (s.kind == "survival") {
    if (s.survival.tau < 1 || s.survival.t0 < 1 || s.survival.t0 > s.survival.tau)
      throw SchemaMismatch("survival spec needs 1 <= t0 <= tau");
    if (s.survival.event_baseline_logits.size() != static_cast<std::size_t>(s.survival.tau))
      throw SchemaMismatch("event baseline_logits must have tau entries");
    if (s.survival.cens_baseline_logits.size() + 1 < static_cast<std::size_t>(s.survival.tau))
      throw SchemaMismatch("censoring baseline_logits must cover periods 1..tau-1");
  }
  return s;
}

inline void to_json(ordered_json& j, const DgpSpec& s) {
  j = ordered_json{{"kind", s.kind}, {"w_columns", s.w_columns}, {"v_columns", s.v_columns}};
  ordered_json cov;
  ordered_json sup = ordered_json::array();
  for (const auto& pt : s.cov.support) sup.push_back(pt);
  cov["support"] = sup;
  if (s.cov.per_stratum) {
    cov["probs_s1"] = s.cov.probs_s1;
    cov["probs_s0"] = s.cov.probs_s0;
    cov["p_s1"] = s.cov.p_s1;
  } else {
    cov["probs"] = s.cov.probs;
  }
  j["covariates"] = cov;
  ordered_json sel, trt, mis, om;
  to_json(sel, s.selection);
  to_json(trt, s.treatment);
  to_json(mis, s.missingness);
  to_json(om, s.outcome.mean);
  j["selection"] = sel;
  j["treatment"] = trt;
  j["missingness"] = mis;
  j["outcome"] = ordered_json{{"family", s.outcome.family}, {"mean", om},
                              {"noise_sd", s.outcome.noise_sd}};
  if (s.kind == "survival") {
    ordered_json ev, ce;
    to_json(ev, s.survival.event);
    to_json(ce, s.survival.cens);
    ev["baseline_logits"] = s.survival.event_baseline_logits;
    ce["baseline_logits"] = s.survival.cens_baseline_logits;
    j["survival"] = ordered_json{{"t0", s.survival.t0}, {"tau", s.survival.tau},
                                 {"event", ev}, {"censoring", ce}};
  }
  j["enumeration_cap"] = s.enumeration_cap;
}

// ---- generation ---------------------------------------------------------------

namespace detail {

inline std::pair<Vec, int> draw_w_s(const DgpSpec& spec, Rng& rng) {
  if (spec.cov.per_stratum) {
    const int s = rng.bernoulli(spec.cov.p_s1) ? 1 : 0;
    const auto& probs = s == 1 ? spec.cov.probs_s1 : spec.cov.probs_s0;
    return {spec.cov.support[static_cast<std::size_t>(rng.categorical(probs))], s};
  }
  const Vec w = spec.cov.support[static_cast<std::size_t>(rng.categorical(spec.cov.probs))];
  const int s = rng.bernoulli(expit(spec.selection.eval(w, 0.0))) ? 1 : 0;
  return {w, s};
}

}  // namespace detail

inline OutcomeDataset generate_outcome(const DgpSpec& spec, int n, std::uint64_t seed) {
  if (spec.kind != "missing") throw SchemaMismatch("generate_outcome requires a missing-kind spec");
  if (n < 1) throw ValidationError("n must be >= 1");
  Rng rng(seed);
  const std::size_t k = spec.v_columns.size();
  std::vector<ObservedRecord> records;
  records.reserve(static_cast<std::size_t>(n));
  for (int i = 0; i < n; ++i) {
    auto [w, s] = detail::draw_w_s(spec, rng);
    ObservedRecord r;
    r.s = s;
    r.v = Vec(w.begin(), w.begin() + static_cast<std::ptrdiff_t>(k));
    if (s == 1) {
      const int a = rng.bernoulli(expit(spec.treatment.eval(w, 0.0))) ? 1 : 0;
      const int delta = rng.bernoulli(expit(spec.missingness.eval(w, a))) ? 1 : 0;
      r.w = w;
      r.a = a;
      r.delta = delta;
      if (delta == 1) {
        if (spec.outcome.family == "binary")
          r.y = rng.bernoulli(spec.mu_true(w, a)) ? 1.0 : 0.0;
        else
          r.y = spec.mu_true(w, a) + rng.normal(0.0, spec.outcome.noise_sd);
      }
    }
    records.push_back(std::move(r));
  }
  OutcomeSchema schema;
  schema.v_columns = spec.v_columns;
  schema.w_columns = spec.w_columns;
  return validate_outcome_dataset(std::move(records), std::move(schema));
}

inline SurvivalDataset generate_survival(const DgpSpec& spec, int n, std::uint64_t seed) {
  if (spec.kind != "survival") throw SchemaMismatch("generate_survival requires a survival-kind spec");
  if (n < 1) throw ValidationError("n must be >= 1");
  Rng rng(seed);
  const int tau = spec.survival.tau;
  std::vector<SurvivalRecord> records;
  records.reserve(static_cast<std::size_t>(n));
  for (int i = 0; i < n; ++i) {
    auto [w, s] = detail::draw_w_s(spec, rng);
    SurvivalRecord r;
    r.s = s;
    r.w = w;
    if (s == 1) {
      const int a = rng.bernoulli(expit(spec.treatment.eval(w, 0.0))) ? 1 : 0;
      int t_event = tau + 1;  // beyond the grid = never observed to fail
      for (int t = 1; t <= tau; ++t) {
        if (rng.bernoulli(spec.lambda_true(t, w, a))) {
          t_event = t;
          break;
        }
      }
      int t_cens = tau;  // administrative closure at tau
      for (int t = 1; t <= tau - 1; ++t) {
        if (rng.bernoulli(spec.alpha_true(t, w, a))) {
          t_cens = t;
          break;
        }
      }
      r.a = a;
      r.t_tilde = std::min(t_event, t_cens);
      r.delta_event = t_event <= t_cens ? 1 : 0;
    }
    records.push_back(std::move(r));
  }
  SurvivalSchema schema;
  schema.w_columns = spec.w_columns;
  schema.t0 = spec.survival.t0;
  schema.tau = tau;
  return validate_survival_dataset(std::move(records), std::move(schema));
}

// ---- enumeration -----------------------------------------------------------------

// Joint law over (W, S) on the discrete support.
struct EnumeratedLaw {
  std::vector<Vec> support;
  Vec joint_s1;  // P(W=w, S=1)
  Vec joint_s0;
  double p_s1 = 0.0;
};

inline EnumeratedLaw enumerate_law(const DgpSpec& spec) {
  if (spec.cov.support.size() > spec.enumeration_cap)
    throw EnumerationInfeasible("covariate support exceeds the enumeration cap");
  EnumeratedLaw law;
  law.support = spec.cov.support;
  const std::size_t m = law.support.size();
  law.joint_s1.resize(m);
  law.joint_s0.resize(m);
  for (std::size_t i = 0; i < m; ++i) {
    if (spec.cov.per_stratum) {
      law.joint_s1[i] = spec.cov.p_s1 * spec.cov.probs_s1[i];
      law.joint_s0[i] = (1.0 - spec.cov.p_s1) * spec.cov.probs_s0[i];
    } else {
      const double pi = expit(spec.selection.eval(law.support[i], 0.0));
      law.joint_s1[i] = spec.cov.probs[i] * pi;
      law.joint_s0[i] = spec.cov.probs[i] * (1.0 - pi);
    }
    law.p_s1 += law.joint_s1[i];
  }
  double total = law.p_s1;
  for (double q : law.joint_s0) total += q;
  if (std::abs(total - 1.0) > 1e-9) {
    for (auto& q : law.joint_s1) q /= total;
    for (auto& q : law.joint_s0) q /= total;
    law.p_s1 /= total;
  }
  return law;
}

inline Vec v_prefix(const Vec& w, std::size_t k) {
  return Vec(w.begin(), w.begin() + static_cast<std::ptrdiff_t>(k));
}

// Per-V aggregates of the enumerated law: P(S=1|V), P(V|S=0) and the reduced
// regression E[mu(a,W) | V, S=1].
struct EnumeratedVLaw {
  std::vector<Vec> v_support;           // sorted
  Vec pv_s1, pv_s0;                     // joint P(V=v, S=s)
  std::vector<std::array<double, 2>> q_bar_r;  // per v, per arm

  int index_of(const Vec& v) const {
    const auto it = std::lower_bound(v_support.begin(), v_support.end(), v);
    if (it == v_support.end() || *it != v) throw NumericError("V value not in enumerated support");
    return static_cast<int>(it - v_support.begin());
  }
};

inline EnumeratedVLaw enumerate_v_law(const DgpSpec& spec, const EnumeratedLaw& law) {
  const std::size_t k = spec.v_columns.size();
  std::map<Vec, std::array<double, 4>> acc;  // v -> {p_s1, p_s0, sum mu1*p1, sum mu0*p1}
  for (std::size_t i = 0; i < law.support.size(); ++i) {
    const Vec v = v_prefix(law.support[i], k);
    auto& slot = acc[v];
    slot[0] += law.joint_s1[i];
    slot[1] += law.joint_s0[i];
    slot[2] += law.joint_s1[i] * spec.mu_true(law.support[i], 1);
    slot[3] += law.joint_s1[i] * spec.mu_true(law.support[i], 0);
  }
  EnumeratedVLaw out;
  for (const auto& [v, slot] : acc) {
    out.v_support.push_back(v);
    out.pv_s1.push_back(slot[0]);
    out.pv_s0.push_back(slot[1]);
    out.q_bar_r.push_back({slot[3] / slot[0], slot[2] / slot[0]});  // index by arm
  }
  return out;
}

struct TruthReport {
  double psi1 = 0.0, psi0 = 0.0, ate = 0.0;
  double psi_f = 0.0, psi_f_r = 0.0;
  std::string method = "enumeration";
  long draws = 0;
  double mc_se = 0.0;
};

inline void to_json(ordered_json& j, const TruthReport& t) {
  j = ordered_json{{"psi1", t.psi1},   {"psi0", t.psi0},       {"ate", t.ate},
                   {"psi_f", t.psi_f}, {"psi_f_r", t.psi_f_r}, {"method", t.method},
                   {"draws", t.draws}, {"mc_se", t.mc_se}};
}

// Exact summation of the identification formula over the discrete support.
inline TruthReport true_values(const DgpSpec& spec) {
  const EnumeratedLaw law = enumerate_law(spec);
  TruthReport out;
  const double p_s0 = 1.0 - law.p_s1;
  if (spec.kind == "missing") {
    const EnumeratedVLaw vlaw = enumerate_v_law(spec, law);
    double psi[2] = {0.0, 0.0};
    for (std::size_t vi = 0; vi < vlaw.v_support.size(); ++vi) {
      const double pv0 = vlaw.pv_s0[vi] / p_s0;
      psi[0] += pv0 * vlaw.q_bar_r[vi][0];
      psi[1] += pv0 * vlaw.q_bar_r[vi][1];
    }
    out.psi1 = psi[1];
    out.psi0 = psi[0];
    double pf1 = 0.0, pf0 = 0.0;
    for (std::size_t i = 0; i < law.support.size(); ++i) {
      const double pw0 = law.joint_s0[i] / p_s0;
      pf1 += pw0 * spec.mu_true(law.support[i], 1);
      pf0 += pw0 * spec.mu_true(law.support[i], 0);
    }
    out.psi_f = pf1 - pf0;
    out.psi_f_r = out.psi_f;  // the SCM shares the outcome model across strata
  } else {
    double psi[2] = {0.0, 0.0};
    double pf[2] = {0.0, 0.0};
    for (std::size_t i = 0; i < law.support.size(); ++i) {
      const double pw0 = law.joint_s0[i] / p_s0;
      for (int a = 0; a <= 1; ++a) {
        double surv = 1.0;
        for (int t = 1; t <= spec.survival.t0; ++t)
          surv *= 1.0 - spec.lambda_true(t, law.support[i], a);
        psi[a] += pw0 * surv;
        pf[a] += pw0 * surv;
      }
    }
    out.psi1 = psi[1];
    out.psi0 = psi[0];
    out.psi_f = pf[1] - pf[0];
    out.psi_f_r = out.psi_f;
  }
  out.ate = out.psi1 - out.psi0;
  return out;
}

// Monte-Carlo evaluation of the statistical estimand: V drawn from the
// target stratum, W from the source stratum conditional on that V (by
// rejection), then the conditional mean difference. Used as a
// self-consistency check against the enumeration path.
inline TruthReport true_values_mc(const DgpSpec& spec, long draws, std::uint64_t seed) {
  Rng rng(seed);
  const std::size_t k = spec.v_columns.size();
  Vec diffs;
  diffs.reserve(static_cast<std::size_t>(draws));
  for (long d = 0; d < draws; ++d) {
    Vec v;
    for (;;) {
      auto [w, s] = detail::draw_w_s(spec, rng);
      if (s == 0) {
        v = v_prefix(w, k);
        break;
      }
    }
    Vec w_src;
    for (;;) {
      auto [w, s] = detail::draw_w_s(spec, rng);
      if (s == 1 && v_prefix(w, k) == v) {
        w_src = w;
        break;
      }
    }
    if (spec.kind == "missing") {
      diffs.push_back(spec.mu_true(w_src, 1) - spec.mu_true(w_src, 0));
    } else {
      double s1 = 1.0, s0 = 1.0;
      for (int t = 1; t <= spec.survival.t0; ++t) {
        s1 *= 1.0 - spec.lambda_true(t, w_src, 1);
        s0 *= 1.0 - spec.lambda_true(t, w_src, 0);
      }
      diffs.push_back(s1 - s0);
    }
  }
  TruthReport out;
  out.method = "monte-carlo";
  out.draws = draws;
  out.ate = mean(diffs);
  out.mc_se = sd_pop(diffs) / std::sqrt(static_cast<double>(draws));
  return out;
}

// ---- truth predictors ---------------------------------------------------------

inline OutcomePredictors truth_outcome_predictors(const DgpSpec& spec,
                                                  bool include_marginal_odds = true,
                                                  bool force_ratio_one = false) {
  const EnumeratedLaw law = enumerate_law(spec);
  const EnumeratedVLaw vlaw = enumerate_v_law(spec, law);
  OutcomePredictors p;
  p.g1 = [spec](const Vec& w) { return expit(spec.treatment.eval(w, 0.0)); };
  p.p_delta = [spec](const Vec& w, int a) { return expit(spec.missingness.eval(w, a)); };
  p.pi_v = [vlaw](const Vec& v) {
    const int i = vlaw.index_of(v);
    return vlaw.pv_s1[static_cast<std::size_t>(i)] /
           (vlaw.pv_s1[static_cast<std::size_t>(i)] + vlaw.pv_s0[static_cast<std::size_t>(i)]);
  };
  p.q_bar = [spec](const Vec& w, int a) { return spec.mu_true(w, a); };
  p.q_bar_r = [vlaw](const Vec& v, int a) {
    return vlaw.q_bar_r[static_cast<std::size_t>(vlaw.index_of(v))][static_cast<std::size_t>(a)];
  };
  p.p_s1 = law.p_s1;
  p.trunc = TruncationBounds{0.0, 1.0};
  p.include_marginal_odds = include_marginal_odds;
  p.force_ratio_one = force_ratio_one;
  return p;
}

inline SurvivalPredictors truth_survival_predictors(const DgpSpec& spec,
                                                    bool include_marginal_odds = true,
                                                    bool force_r_one = false) {
  const EnumeratedLaw law = enumerate_law(spec);
  SurvivalPredictors p;
  p.lambda = [spec](int t, const Vec& w, int a) { return spec.lambda_true(t, w, a); };
  p.alpha = [spec](int t, const Vec& w, int a) { return spec.alpha_true(t, w, a); };
  p.g1 = [spec](const Vec& w) { return expit(spec.treatment.eval(w, 0.0)); };
  p.pi_w = [spec](const Vec& w) { return spec.pi_s_given_w(w); };
  p.p_s1 = law.p_s1;
  p.t0 = spec.survival.t0;
  p.tau = spec.survival.tau;
  p.trunc = TruncationBounds{0.0, 1.0};
  p.include_marginal_odds = include_marginal_odds;
  p.force_r_one = force_r_one;
  return p;
}

// ---- double-robustness scenarios -------------------------------------------------

enum class DrScenario { BothCorrect, QOnly, GOnly, Neither };

inline std::string scenario_name(DrScenario s) {
  switch (s) {
    case DrScenario::BothCorrect: return "both-correct";
    case DrScenario::QOnly: return "q-correct";
    case DrScenario::GOnly: return "g-correct";
    case DrScenario::Neither: return "neither";
  }
  return "?";
}

// Designs that match the data-generating terms (interactions included where
// the truth has them); the selection and reduced regressions are saturated
// over the discrete V support, which is nonparametrically correct.
inline NuisanceConfig correct_outcome_config(const DgpSpec& spec) {
  NuisanceConfig c;
  c.g_a = DesignSpec::main_effects(spec.w_columns);
  auto wa = spec.w_columns;
  wa.emplace_back("a");
  c.p_delta = DesignSpec::main_effects(wa);
  c.q_bar = DesignSpec::main_effects(wa);
  for (std::size_t j = 0; j < spec.outcome.mean.aw_coefs.size() && j < spec.w_columns.size(); ++j)
    if (spec.outcome.mean.aw_coefs[j] != 0.0)
      c.q_bar.interactions.push_back({"a", spec.w_columns[j]});
  c.p_s_given_v.columns = spec.v_columns;
  c.p_s_given_v.saturated = true;
  c.q_bar_r.columns = spec.v_columns;
  c.q_bar_r.saturated = true;
  return c;
}

// misspecify: delete the covariates from one block or both. The reduced
// regression stays saturated; its target is whatever the outcome regression
// produced, so "Q wrong" is carried entirely by q_bar.
inline NuisanceConfig misspecify_outcome(const DgpSpec& spec, DrScenario scenario) {
  NuisanceConfig c = correct_outcome_config(spec);
  const bool q_wrong = scenario == DrScenario::GOnly || scenario == DrScenario::Neither;
  const bool g_wrong = scenario == DrScenario::QOnly || scenario == DrScenario::Neither;
  if (q_wrong) {
    c.q_bar = DesignSpec::intercept_only();
  }
  if (g_wrong) {
    c.g_a = DesignSpec::intercept_only();
    c.p_delta = DesignSpec::intercept_only();
    c.p_s_given_v = DesignSpec::intercept_only();
  }
  return c;
}

inline HazardConfig correct_survival_config(const DgpSpec& spec) {
  HazardConfig c;
  auto wa = spec.w_columns;
  wa.emplace_back("a");
  c.lambda = DesignSpec::main_effects(wa);
  c.lambda.time_encoding = "indicators";
  c.lambda.intercept = false;
  c.alpha = c.lambda;
  c.g_a = DesignSpec::main_effects(spec.w_columns);
  c.r_model.columns = spec.w_columns;
  c.r_model.saturated = true;
  return c;
}

inline HazardConfig misspecify_survival(const DgpSpec& spec, DrScenario scenario) {
  HazardConfig c = correct_survival_config(spec);
  const bool lambda_wrong = scenario == DrScenario::GOnly || scenario == DrScenario::Neither;
  const bool g_wrong = scenario == DrScenario::QOnly || scenario == DrScenario::Neither;
  DesignSpec time_only;
  time_only.time_encoding = "indicators";
  time_only.intercept = false;
  if (lambda_wrong) c.lambda = time_only;
  if (g_wrong) {
    c.g_a = DesignSpec::intercept_only();
    c.alpha = time_only;
    c.r_model = DesignSpec::intercept_only();
  }
  return c;
}

}  // namespace transtmle
