// Privacy-preserving split workflow around the less-aggressive (R forced to
// one) TMLE: the source side exports the targeted model plus the per-unit
// source contributions to the estimated influence curve; the target side
// completes the plug-in and Wald inference from covariates alone. Bundles
// carry coefficients, scalars and the contribution vector only.
#pragma once

#include <fstream>
#include <optional>
#include <string>
#include <vector>

#include "transtmle/survival.hpp"
#include "transtmle/tmle_missing.hpp"

namespace transtmle {

constexpr int kExportFormatVersion = 1;

struct TargetedModelExport {
  int format_version = kExportFormatVersion;
  std::string kind;  // outcome-regression | hazard
  int n_source = 0;
  double p_s1 = 0.5;
  Vec eic_contributions;  // ATE gradient source components, source-row order
  std::vector<std::string> columns;  // covariates the target data must provide

  std::optional<TargetedOutcomeModel> outcome;
  std::optional<TargetedHazardModel> hazard;
};

// ---- serialization ---------------------------------------------------------
//
// Exports require the ratio forced to one, which keeps the bundles free of
// the selection model; the identity-reduced (V=W) outcome bundle carries the
// fluctuation machinery fits instead of a reduced regression.

namespace detail {

inline void outcome_model_to_json(ordered_json& j, const TargetedOutcomeModel& m) {
  if (!m.force_ratio_one)
    throw SchemaMismatch("model export requires the density ratio forced to one");
  j["v_len"] = m.v_len;
  j["targeting"] = m.targeting == MissingTargeting::Joint ? "joint" : "per-arm";
  j["fluctuation"] = fluctuation_mode_name(m.fluctuation);
  j["linear_fluctuation"] = m.linear_fluctuation;
  j["eps1"] = m.eps1;
  j["eps2"] = m.eps2;
  j["reduced_identity"] = m.reduced_identity;
  j["p_s1"] = m.fits.p_s1;
  ordered_json tr;
  to_json(tr, m.fits.trunc);
  j["truncation"] = tr;
  j["y_bounds"] = {m.fits.y_lo, m.fits.y_hi};
  if (m.reduced_identity) {
    j["q_bar_stratified"] = m.fits.q_bar_stratified;
    if (m.fits.q_bar_stratified) {
      ordered_json q0, q1;
      to_json(q0, m.fits.q_bar_arm[0]);
      to_json(q1, m.fits.q_bar_arm[1]);
      j["q_bar_arm0"] = q0;
      j["q_bar_arm1"] = q1;
    } else {
      ordered_json q;
      to_json(q, m.fits.q_bar);
      j["q_bar"] = q;
    }
    ordered_json g, pd;
    to_json(g, m.fits.g_a);
    to_json(pd, m.fits.p_delta);
    j["g_a"] = g;
    j["p_delta"] = pd;
  } else {
    ordered_json r0, r1;
    to_json(r0, m.reduced[0]);
    to_json(r1, m.reduced[1]);
    j["reduced_arm0"] = r0;
    j["reduced_arm1"] = r1;
  }
}

inline TargetedOutcomeModel outcome_model_from_json(const json& j) {
  TargetedOutcomeModel m;
  m.force_ratio_one = true;
  m.include_marginal_odds = true;
  m.v_len = j.at("v_len").get<std::size_t>();
  m.targeting = j.at("targeting").get<std::string>() == "joint" ? MissingTargeting::Joint
                                                                : MissingTargeting::PerArm;
  m.fluctuation = j.at("fluctuation").get<std::string>() == "weight" ? FluctuationMode::Weight
                                                                     : FluctuationMode::Covariate;
  m.linear_fluctuation = j.at("linear_fluctuation").get<bool>();
  m.eps1 = j.at("eps1").get<std::array<double, 2>>();
  m.eps2 = j.at("eps2").get<std::array<double, 2>>();
  m.reduced_identity = j.at("reduced_identity").get<bool>();
  m.fits.p_s1 = j.at("p_s1").get<double>();
  m.fits.trunc = truncation_from_json(j.at("truncation"));
  m.fits.y_lo = j.at("y_bounds")[0].get<double>();
  m.fits.y_hi = j.at("y_bounds")[1].get<double>();
  if (m.reduced_identity) {
    m.fits.q_bar_stratified = j.at("q_bar_stratified").get<bool>();
    if (m.fits.q_bar_stratified) {
      m.fits.q_bar_arm[0] = regression_fit_from_json(j.at("q_bar_arm0"));
      m.fits.q_bar_arm[1] = regression_fit_from_json(j.at("q_bar_arm1"));
    } else {
      m.fits.q_bar = regression_fit_from_json(j.at("q_bar"));
    }
    m.fits.g_a = regression_fit_from_json(j.at("g_a"));
    m.fits.p_delta = regression_fit_from_json(j.at("p_delta"));
  } else {
    m.reduced[0] = regression_fit_from_json(j.at("reduced_arm0"));
    m.reduced[1] = regression_fit_from_json(j.at("reduced_arm1"));
  }
  return m;
}

inline void hazard_model_to_json(ordered_json& j, const TargetedHazardModel& m) {
  if (!m.force_r_one)
    throw SchemaMismatch("model export requires the density ratio forced to one");
  j["t0"] = m.t0;
  j["tau"] = m.tau;
  j["targeting"] = m.targeting;
  j["fluctuation"] = fluctuation_mode_name(m.fluctuation);
  j["p_s1"] = m.fits.p_s1;
  ordered_json tr;
  to_json(tr, m.fits.trunc);
  j["truncation"] = tr;
  ordered_json lam, alp, g;
  to_json(lam, m.fits.lambda_fit);
  to_json(alp, m.fits.alpha_fit);
  to_json(g, m.fits.g_a);
  j["lambda"] = lam;
  j["alpha"] = alp;
  j["g_a"] = g;
  ordered_json steps = ordered_json::array();
  for (const auto& s : m.steps) steps.push_back({{"arm", s.arm}, {"eps", s.eps}});
  j["steps"] = steps;
}

inline TargetedHazardModel hazard_model_from_json(const json& j) {
  TargetedHazardModel m;
  m.force_r_one = true;
  m.include_marginal_odds = true;
  m.t0 = j.at("t0").get<int>();
  m.tau = j.at("tau").get<int>();
  m.targeting = j.at("targeting").get<std::string>();
  m.fluctuation = j.at("fluctuation").get<std::string>() == "weight" ? FluctuationMode::Weight
                                                                     : FluctuationMode::Covariate;
  m.fits.p_s1 = j.at("p_s1").get<double>();
  m.fits.trunc = truncation_from_json(j.at("truncation"));
  m.fits.lambda_fit = regression_fit_from_json(j.at("lambda"));
  m.fits.alpha_fit = regression_fit_from_json(j.at("alpha"));
  m.fits.g_a = regression_fit_from_json(j.at("g_a"));
  m.fits.tau = m.tau;
  for (const auto& s : j.at("steps"))
    m.steps.push_back(HazardStep{s.at("arm").get<int>(), s.at("eps").get<double>()});
  return m;
}

}  // namespace detail

inline void to_json(ordered_json& j, const TargetedModelExport& e) {
  j = ordered_json{{"format_version", e.format_version},
                   {"kind", e.kind},
                   {"n_source", e.n_source},
                   {"p_s1", e.p_s1},
                   {"columns", e.columns}};
  ordered_json model;
  if (e.kind == "outcome-regression") {
    detail::outcome_model_to_json(model, *e.outcome);
  } else if (e.kind == "hazard") {
    detail::hazard_model_to_json(model, *e.hazard);
  } else {
    throw SchemaMismatch("unknown export kind: " + e.kind);
  }
  j["model"] = model;
  j["eic_contributions"] = e.eic_contributions;
}

inline TargetedModelExport export_from_json(const json& j) {
  TargetedModelExport e;
  e.format_version = j.at("format_version").get<int>();
  if (e.format_version != kExportFormatVersion)
    throw SchemaMismatch("unsupported export format version " +
                         std::to_string(e.format_version));
  e.kind = j.at("kind").get<std::string>();
  e.n_source = j.at("n_source").get<int>();
  e.p_s1 = j.at("p_s1").get<double>();
  e.columns = j.at("columns").get<std::vector<std::string>>();
  e.eic_contributions = j.at("eic_contributions").get<Vec>();
  if (static_cast<int>(e.eic_contributions.size()) != e.n_source)
    throw SchemaMismatch("eic_contributions length does not match n_source");
  if (e.kind == "outcome-regression")
    e.outcome = detail::outcome_model_from_json(j.at("model"));
  else if (e.kind == "hazard")
    e.hazard = detail::hazard_model_from_json(j.at("model"));
  else
    throw SchemaMismatch("unknown export kind: " + e.kind);
  return e;
}

// ---- fitting with R forced to one ---------------------------------------------

struct LessAggressiveMissingResult {
  MissingResult fit;
  TargetedModelExport bundle;
};

inline LessAggressiveMissingResult fit_less_aggressive_missing(const OutcomeDataset& ds,
                                                               const NuisanceConfig& cfg,
                                                               MissingOptions opts) {
  opts.force_ratio_one = true;
  LessAggressiveMissingResult out;
  out.fit = estimate_missing(ds, cfg, opts);
  out.bundle.kind = "outcome-regression";
  out.bundle.n_source = ds.n_source;
  out.bundle.p_s1 = out.fit.model.fits.p_s1;
  out.bundle.columns = out.fit.model.reduced_identity ? ds.schema.w_columns
                                                      : ds.schema.v_columns;
  out.bundle.outcome = out.fit.model;
  for (std::size_t i = 0; i < ds.records.size(); ++i)
    if (ds.records[i].s == 1) out.bundle.eic_contributions.push_back(out.fit.eic_rows[i].total);
  return out;
}

struct LessAggressiveSurvivalResult {
  SurvivalResult fit;
  TargetedModelExport bundle;
};

inline LessAggressiveSurvivalResult fit_less_aggressive_survival(const SurvivalDataset& ds,
                                                                 const HazardConfig& cfg,
                                                                 SurvivalOptions opts) {
  opts.force_r_one = true;
  LessAggressiveSurvivalResult out;
  out.fit = estimate_survival(ds, cfg, opts);
  out.bundle.kind = "hazard";
  out.bundle.n_source = ds.n_source;
  out.bundle.p_s1 = out.fit.model.fits.p_s1;
  out.bundle.columns = ds.schema.w_columns;
  out.bundle.hazard = out.fit.model;
  for (std::size_t i = 0; i < ds.records.size(); ++i)
    if (ds.records[i].s == 1) out.bundle.eic_contributions.push_back(out.fit.eic_rows[i].total);
  return out;
}

// ---- target-side application ----------------------------------------------------

struct TargetTable {
  std::vector<std::string> columns;
  std::vector<Vec> rows;
};

inline TargetTable read_covariate_csv(const std::string& path) {
  const auto lines = detail::read_lines(path);
  if (lines.empty()) throw ValidationError(path + ": empty file");
  TargetTable t;
  t.columns = detail::split_csv_line(lines[0]);
  for (std::size_t li = 1; li < lines.size(); ++li) {
    const auto cells = detail::split_csv_line(lines[li]);
    if (cells.size() != t.columns.size())
      throw StructuralViolation(static_cast<long>(li), "wrong number of cells");
    Vec row;
    for (const auto& c : cells) {
      double v;
      if (!detail::parse_double(c, v))
        throw StructuralViolation(static_cast<long>(li), "bad numeric value");
      row.push_back(v);
    }
    t.rows.push_back(std::move(row));
  }
  return t;
}

inline void write_covariate_csv(const TargetTable& t, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw ValidationError("cannot write file: " + path);
  for (std::size_t j = 0; j < t.columns.size(); ++j)
    out << (j ? "," : "") << t.columns[j];
  out << "\n";
  for (const auto& row : t.rows) {
    for (std::size_t j = 0; j < row.size(); ++j)
      out << (j ? "," : "") << detail::format_double(row[j]);
    out << "\n";
  }
}

inline TargetTable target_rows_of(const OutcomeDataset& ds) {
  TargetTable t;
  t.columns = ds.schema.v_columns;
  for (const auto& r : ds.records)
    if (r.s == 0) t.rows.push_back(r.v);
  return t;
}

inline TargetTable target_rows_of(const SurvivalDataset& ds) {
  TargetTable t;
  t.columns = ds.schema.w_columns;
  for (const auto& r : ds.records)
    if (r.s == 0) t.rows.push_back(r.w);
  return t;
}

// Completes estimation on target-side covariates: plug-in means of the
// exported model, then Wald inference from the pooled per-unit gradient
// (shared source contributions plus the locally computed target component).
inline EstimateReport apply_export(const TargetedModelExport& bundle, const TargetTable& target) {
  if (target.columns != bundle.columns)
    throw SchemaMismatch("target data columns do not match the exported model");
  if (target.rows.empty()) throw EmptyStratum("no target rows");

  const int n_target = static_cast<int>(target.rows.size());
  const int n = bundle.n_source + n_target;
  const double p_s1 = bundle.p_s1;

  Vec pred1, pred0;
  pred1.reserve(target.rows.size());
  pred0.reserve(target.rows.size());
  if (bundle.kind == "outcome-regression") {
    const auto& m = *bundle.outcome;
    for (const auto& w : target.rows) {
      if (m.reduced_identity) {
        pred1.push_back(m.q_orig(w, 1));
        pred0.push_back(m.q_orig(w, 0));
      } else {
        pred1.push_back(m.q_reduced_orig(w, 1));
        pred0.push_back(m.q_reduced_orig(w, 0));
      }
    }
  } else {
    const auto& m = *bundle.hazard;
    for (const auto& w : target.rows) {
      const auto tables = m.lambda_tables(w);
      double s1 = 1.0, s0 = 1.0;
      for (int t = 1; t <= m.t0; ++t) {
        s1 *= 1.0 - tables[1][static_cast<std::size_t>(t)];
        s0 *= 1.0 - tables[0][static_cast<std::size_t>(t)];
      }
      pred1.push_back(s1);
      pred0.push_back(s0);
    }
  }

  EstimateReport rep;
  rep.estimand = bundle.kind == "hazard" ? "survival" : "missing-outcome";
  rep.n = n;
  rep.n_source = bundle.n_source;
  rep.n_target = n_target;
  double acc1 = 0.0, acc0 = 0.0;
  for (std::size_t i = 0; i < pred1.size(); ++i) {
    acc1 += pred1[i];
    acc0 += pred0[i];
  }
  rep.psi1 = acc1 / n_target;
  rep.psi0 = acc0 / n_target;
  rep.ate = rep.psi1 - rep.psi0;

  Vec pooled = bundle.eic_contributions;
  pooled.reserve(static_cast<std::size_t>(n));
  for (std::size_t i = 0; i < pred1.size(); ++i)
    pooled.push_back(((pred1[i] - pred0[i]) - rep.ate) / (1.0 - p_s1));
  rep.sigma_n = sd_pop(pooled);
  rep.eic_mean = mean(pooled);
  rep.finalize_ci();
  return rep;
}

inline void write_export(const TargetedModelExport& bundle, const std::string& path) {
  ordered_json j;
  to_json(j, bundle);
  std::ofstream out(path);
  if (!out) throw ValidationError("cannot write file: " + path);
  out << j.dump(2) << "\n";
}

inline TargetedModelExport read_export(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ValidationError("cannot open file: " + path);
  json j;
  in >> j;
  return export_from_json(j);
}

}  // namespace transtmle
