// Three-stage TMLE for the transported mean outcome: target the outcome
// regression with the clever covariate, target the reduced regression of the
// targeted fit on V, then take the empirical mean over the target-stratum
// covariates. Works on the outcome scaled into [0,1]; reports are on the
// original scale.
#pragma once

#include <array>
#include <optional>
#include <string>
#include <vector>

#include "transtmle/data.hpp"
#include "transtmle/eic_missing.hpp"
#include "transtmle/nuisance.hpp"
#include "transtmle/report.hpp"

namespace transtmle {

enum class MissingTargeting { PerArm, Joint };

struct MissingOptions {
  MissingTargeting targeting = MissingTargeting::PerArm;
  FluctuationMode fluctuation = FluctuationMode::Covariate;
  bool linear_fluctuation = false;  // squared-error loss with identity link
  std::optional<std::pair<double, double>> y_bounds;
  bool include_marginal_odds = true;
  bool force_ratio_one = false;
  int max_stage_iterations = 10;
  double score_tol_floor = 1e-8;
  bool positivity_error = false;
};

// The targeted outcome model: base fits plus the accumulated fluctuation
// parameters. Everything needed to evaluate the targeted regressions on new
// units lives here, which is what the federated export serializes.
struct TargetedOutcomeModel {
  NuisanceFits fits;
  std::size_t v_len = 0;
  MissingTargeting targeting = MissingTargeting::PerArm;
  FluctuationMode fluctuation = FluctuationMode::Covariate;
  bool linear_fluctuation = false;
  bool include_marginal_odds = true;
  bool force_ratio_one = false;
  std::array<double, 2> eps1{0.0, 0.0};  // stage-1 epsilon per arm (joint: equal)
  bool reduced_identity = false;         // V = W: the reduced regression is the identity
  std::array<RegressionFit, 2> reduced;
  std::array<double, 2> eps2{0.0, 0.0};

  double ratio_v(const Vec& v) const {
    if (force_ratio_one) return 1.0;
    const double pi = fits.p_s_given_v.predict(CovRow{&v, 0.0, 0.0});
    double r = (1.0 - pi) / pi;
    if (include_marginal_odds) r *= fits.p_s1 / (1.0 - fits.p_s1);
    return r;
  }

  // Deterministic part of C_{psi_a,Y} at (w, arm).
  double cov_y(const Vec& w, int arm) const {
    const Vec v(w.begin(), w.begin() + static_cast<std::ptrdiff_t>(v_len));
    const double g1 = fits.g_a.predict(CovRow{&w, 1.0, 0.0});
    const double g = arm == 1 ? g1 : 1.0 - g1;
    const double pd = fits.p_delta.predict(CovRow{&w, static_cast<double>(arm), 0.0});
    return ratio_v(v) / (fits.p_s1 * g * pd);
  }

  // Stage-1 fluctuation direction at (w, arm): the clever covariate in
  // covariate mode, its sign in weight mode (the magnitude moves to the loss
  // weight), negated for arm 0 under joint targeting.
  double fluct_direction(const Vec& w, int arm) const {
    const double sign = (targeting == MissingTargeting::Joint && arm == 0) ? -1.0 : 1.0;
    if (fluctuation == FluctuationMode::Weight) return sign;
    return sign * cov_y(w, arm);
  }

  double q_scaled(const Vec& w, int arm) const {
    const double base = fits.q_bar_scaled(w, arm);
    const double eps = eps1[static_cast<std::size_t>(arm)];
    if (eps == 0.0) return base;
    if (linear_fluctuation) return base + eps * fluct_direction(w, arm);
    return expit(logit(base) + eps * fluct_direction(w, arm));
  }

  double cov_wv(const Vec& v) const { return ratio_v(v) / fits.p_s1; }

  // Targeted reduced regression on the scaled outcome. When V=W the
  // conditional expectation given V is degenerate and equals the targeted
  // outcome regression itself.
  double q_reduced_scaled(const Vec& v, int arm) const {
    if (reduced_identity) return q_scaled(v, arm);
    const auto& fit = reduced[static_cast<std::size_t>(arm)];
    return fit.predict(CovRow{&v, 0.0, 0.0}) +
           eps2[static_cast<std::size_t>(arm)] * cov_wv(v);
  }

  double q_orig(const Vec& w, int arm) const {
    return fits.y_lo + (fits.y_hi - fits.y_lo) * q_scaled(w, arm);
  }
  double q_reduced_orig(const Vec& v, int arm) const {
    return fits.y_lo + (fits.y_hi - fits.y_lo) * q_reduced_scaled(v, arm);
  }
};

// Original-scale predictor bundle for the targeted model; this is what the
// influence-curve evaluation consumes.
inline OutcomePredictors targeted_outcome_predictors(const TargetedOutcomeModel& m) {
  OutcomePredictors p = predictors_from_fits(m.fits, m.include_marginal_odds, m.force_ratio_one);
  p.q_bar = [m](const Vec& w, int a) { return m.q_orig(w, a); };
  p.q_bar_r = [m](const Vec& v, int a) { return m.q_reduced_orig(v, a); };
  return p;
}

struct MissingResult {
  EstimateReport report;
  TargetedOutcomeModel model;
  std::vector<EICDecomposition> eic_rows;  // per unit, ATE gradient, original scale
};

namespace detail {

inline double solve_linear_fluctuation(const Vec& cov, const Vec& resid) {
  double num = 0.0, den = 0.0;
  for (std::size_t i = 0; i < cov.size(); ++i) {
    num += cov[i] * resid[i];
    den += cov[i] * cov[i];
  }
  return den > 0.0 ? num / den : 0.0;
}

}  // namespace detail

// target_outcome_regression: one stage-1 pass updating the model in place.
// Returns the fitted epsilon(s) and records the solved score before/after.
inline FluctuationResult target_outcome_regression(const OutcomeDataset& ds,
                                                   TargetedOutcomeModel& model, int arm) {
  const bool joint = model.targeting == MissingTargeting::Joint;
  std::vector<const ObservedRecord*> rows;
  for (const auto& r : ds.records) {
    if (r.s != 1 || *r.delta != 1) continue;
    if (!joint && *r.a != arm) continue;
    rows.push_back(&r);
  }
  FluctuationResult fr;
  fr.label = joint ? "outcome joint" : (arm == 1 ? "outcome arm1" : "outcome arm0");
  fr.method = model.linear_fluctuation
                  ? "linear-covariate"
                  : (model.fluctuation == FluctuationMode::Weight ? "logistic-weighted"
                                                                  : "logistic-covariate");
  if (rows.empty()) {
    fr.epsilons.push_back(0.0);
    return fr;
  }

  const double span = model.fits.y_hi - model.fits.y_lo;
  const auto scaled_y = [&](const ObservedRecord& r) {
    return (*r.y - model.fits.y_lo) / span;
  };
  // the score this stage solves: sum_i C_i (y_i - qbar_i), original scale
  const auto score = [&] {
    double s = 0.0;
    for (const auto* r : rows)
      s += model.cov_y(*r->w, *r->a) * (scaled_y(*r) - model.q_scaled(*r->w, *r->a)) *
           (joint && *r->a == 0 ? -1.0 : 1.0);
    return s * span / ds.n;
  };
  fr.eic_residual_before = score();

  Vec y, offsets, weights;
  std::vector<Vec> covs;
  Vec resid, covlin;
  for (const auto* r : rows) {
    const int a = *r->a;
    const double dir = model.fluct_direction(*r->w, a);
    const double q = model.q_scaled(*r->w, a);
    y.push_back(scaled_y(*r));
    if (model.linear_fluctuation) {
      covlin.push_back(dir);
      resid.push_back(y.back() - q);
    } else {
      offsets.push_back(logit(q));
      covs.push_back({dir});
      weights.push_back(model.fluctuation == FluctuationMode::Weight
                            ? std::abs(model.cov_y(*r->w, a))
                            : 1.0);
    }
  }

  double eps = 0.0;
  if (model.linear_fluctuation) {
    eps = detail::solve_linear_fluctuation(covlin, resid);
  } else {
    bool conv = false;
    const Vec sol = solve_logistic_fluctuation(covs, y, offsets, weights, &conv);
    eps = sol.empty() ? 0.0 : sol[0];
    fr.iterations = 1;
    if (!conv) fr.iterations = -1;  // flagged; residual reported either way
  }
  if (joint) {
    model.eps1[0] += eps;
    model.eps1[1] += eps;
  } else {
    model.eps1[static_cast<std::size_t>(arm)] += eps;
  }
  fr.epsilons.push_back(eps);
  fr.eic_residual_after = score();
  return fr;
}

// target_reduced_regression: refit the reduced regression on the current
// targeted outcome values and solve the linear fluctuation in closed form.
inline FluctuationResult target_reduced_regression(const OutcomeDataset& ds,
                                                   const DesignSpec& reduced_spec,
                                                   TargetedOutcomeModel& model, int arm) {
  FluctuationResult fr;
  fr.label = arm == 1 ? "reduced arm1" : "reduced arm0";
  fr.method = "linear-covariate";
  const double span = model.fits.y_hi - model.fits.y_lo;
  if (model.reduced_identity) {
    fr.epsilons.push_back(0.0);
    return fr;
  }
  Vec values;
  for (const auto& r : ds.records) {
    if (r.s != 1) continue;
    values.push_back(model.q_scaled(*r.w, arm));
  }
  model.reduced[static_cast<std::size_t>(arm)] = fit_reduced_regression(ds, values, reduced_spec);
  model.eps2[static_cast<std::size_t>(arm)] = 0.0;

  const auto score = [&] {
    double s = 0.0;
    for (const auto& r : ds.records) {
      if (r.s != 1) continue;
      s += model.cov_wv(r.v) * (model.q_scaled(*r.w, arm) - model.q_reduced_scaled(r.v, arm));
    }
    return s * span / ds.n;
  };
  fr.eic_residual_before = score();

  Vec cov, resid;
  std::size_t k = 0;
  for (const auto& r : ds.records) {
    if (r.s != 1) continue;
    cov.push_back(model.cov_wv(r.v));
    resid.push_back(values[k++] - model.reduced[static_cast<std::size_t>(arm)].predict(
                                      CovRow{&r.v, 0.0, 0.0}));
  }
  model.eps2[static_cast<std::size_t>(arm)] = detail::solve_linear_fluctuation(cov, resid);
  fr.epsilons.push_back(model.eps2[static_cast<std::size_t>(arm)]);
  fr.eic_residual_after = score();
  return fr;
}

// Full pipeline: nuisances, stage-1 and stage-2 targeting (repeated until the
// EIC equation is solved within tolerance), then the empirical mean over the
// target stratum and Wald inference from the estimated gradient.
inline MissingResult estimate_missing(const OutcomeDataset& ds, NuisanceConfig cfg,
                                      const MissingOptions& opts) {
  // outcome scale
  bool binary = true;
  double ylo = 0.0, yhi = 1.0;
  bool first = true;
  for (const auto& r : ds.records) {
    if (r.s != 1 || *r.delta != 1) continue;
    const double y = *r.y;
    if (y != 0.0 && y != 1.0) binary = false;
    if (first) {
      ylo = yhi = y;
      first = false;
    } else {
      ylo = std::min(ylo, y);
      yhi = std::max(yhi, y);
    }
  }
  if (first) throw EmptyStratum("no observed outcomes (s=1, delta=1) to fit");
  if (opts.linear_fluctuation) {
    cfg.q_bar_link = Link::Identity;
    cfg.y_bounds.reset();
  } else if (!binary) {
    auto b = opts.y_bounds.value_or(std::make_pair(ylo, yhi));
    if (!(b.second > b.first)) b = {ylo - 0.5, yhi + 0.5};
    cfg.y_bounds = b;
  } else {
    cfg.y_bounds.reset();
  }

  TargetedOutcomeModel model;
  model.fits = fit_nuisances(ds, cfg);
  model.v_len = ds.schema.v_columns.size();
  model.targeting = opts.targeting;
  model.fluctuation = opts.fluctuation;
  model.linear_fluctuation = opts.linear_fluctuation;
  model.include_marginal_odds = opts.include_marginal_odds;
  model.force_ratio_one = opts.force_ratio_one;
  model.reduced_identity = ds.schema.v_equals_w();

  MissingResult res;
  res.report.estimand = "missing-outcome";
  res.report.n = ds.n;
  res.report.n_source = ds.n_source;
  res.report.n_target = ds.n_target;

  PositivityCounter pos;
  pos.error_on_breach = opts.positivity_error;

  const double n = static_cast<double>(ds.n);
  double psi[2] = {0.0, 0.0};
  for (int pass = 0; pass < opts.max_stage_iterations; ++pass) {
    if (opts.targeting == MissingTargeting::Joint) {
      res.report.fluctuations.push_back(target_outcome_regression(ds, model, 1));
    } else {
      res.report.fluctuations.push_back(target_outcome_regression(ds, model, 1));
      res.report.fluctuations.push_back(target_outcome_regression(ds, model, 0));
    }
    res.report.fluctuations.push_back(target_reduced_regression(ds, cfg.q_bar_r, model, 1));
    res.report.fluctuations.push_back(target_reduced_regression(ds, cfg.q_bar_r, model, 0));

    for (int a = 0; a <= 1; ++a) {
      double acc = 0.0;
      for (const auto& r : ds.records)
        if (r.s == 0) acc += model.q_reduced_orig(r.v, a);
      psi[a] = acc / ds.n_target;
    }

    const OutcomePredictors np = targeted_outcome_predictors(model);
    pos.breaches = 0;
    res.eic_rows.clear();
    Vec totals, tot1, tot0;
    for (const auto& r : ds.records) {
      const EICDecomposition e1 = eic_psi_a(r, np, 1, psi[1], &pos);
      const EICDecomposition e0 = eic_psi_a(r, np, 0, psi[0], nullptr);
      EICDecomposition d;
      d.d_v = e1.d_v - e0.d_v;
      d.d_y = e1.d_y - e0.d_y;
      d.d_wv = e1.d_wv - e0.d_wv;
      d.total = d.d_v + d.d_y + d.d_wv;
      res.eic_rows.push_back(d);
      totals.push_back(d.total);
      tot1.push_back(e1.total);
      tot0.push_back(e0.total);
    }
    res.report.psi1 = psi[1];
    res.report.psi0 = psi[0];
    res.report.ate = psi[1] - psi[0];
    res.report.sigma_n = sd_pop(totals);
    res.report.eic_mean = mean(totals);
    res.report.eic_residual_psi1 = mean(tot1);
    res.report.eic_residual_psi0 = mean(tot0);

    const double logn = std::log(n);
    const auto tol = [&](double sigma) {
      return std::max(opts.score_tol_floor, sigma / (std::sqrt(n) * logn));
    };
    // joint targeting only solves the ATE score; per-arm targeting solves all
    bool ok = std::abs(res.report.eic_mean) <= tol(res.report.sigma_n);
    if (opts.targeting == MissingTargeting::PerArm)
      ok = ok && std::abs(res.report.eic_residual_psi1) <= tol(sd_pop(tot1)) &&
           std::abs(res.report.eic_residual_psi0) <= tol(sd_pop(tot0));
    if (ok) break;
  }

  res.report.positivity_breaches = pos.breaches;
  res.report.finalize_ci();
  res.model = model;
  return res;
}

}  // namespace transtmle
