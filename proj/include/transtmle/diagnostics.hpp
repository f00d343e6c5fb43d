// Exact-remainder diagnostics: R(P, P0) = Psi(P) - Psi(P0) + P0 D*_P,
// evaluated by Monte Carlo over draws from the data-generating truth. Zero
// (up to MC error) whenever either nuisance block of P is correct.
#pragma once

#include "transtmle/dgp.hpp"
#include "transtmle/eic_missing.hpp"
#include "transtmle/survival.hpp"

namespace transtmle {

struct RemainderEstimate {
  double value = 0.0;
  double mc_se = 0.0;
};

// Psi_a(P) for a missing-outcome nuisance bundle P, with the covariate
// distributions fixed at the truth (exact summation over the support).
inline double plugin_psi_missing(const OutcomePredictors& p, const DgpSpec& spec, int arm) {
  const EnumeratedLaw law = enumerate_law(spec);
  const std::size_t k = spec.v_columns.size();
  std::map<Vec, double> pv0;
  for (std::size_t i = 0; i < law.support.size(); ++i)
    pv0[v_prefix(law.support[i], k)] += law.joint_s0[i];
  const double p_s0 = 1.0 - law.p_s1;
  double psi = 0.0;
  for (const auto& [v, q] : pv0) psi += (q / p_s0) * p.q_bar_r(v, arm);
  return psi;
}

inline RemainderEstimate exact_remainder_missing(const OutcomePredictors& p, const DgpSpec& spec,
                                                 int arm, int draws, std::uint64_t seed) {
  const double psi_p = plugin_psi_missing(p, spec, arm);
  const TruthReport truth = true_values(spec);
  const double psi_0 = arm == 1 ? truth.psi1 : truth.psi0;
  const OutcomeDataset ds = generate_outcome(spec, draws, seed);
  Vec d;
  d.reserve(ds.records.size());
  for (const auto& r : ds.records) d.push_back(eic_psi_a(r, p, arm, psi_p).total);
  RemainderEstimate out;
  out.value = psi_p - psi_0 + mean(d);
  out.mc_se = sd_pop(d) / std::sqrt(static_cast<double>(d.size()));
  return out;
}

// Survival analogue: Psi_a(P) = E_{W|S=0,P0} of P's survival product.
inline double plugin_psi_survival(const SurvivalPredictors& p, const DgpSpec& spec, int arm) {
  const EnumeratedLaw law = enumerate_law(spec);
  const double p_s0 = 1.0 - law.p_s1;
  double psi = 0.0;
  for (std::size_t i = 0; i < law.support.size(); ++i) {
    const UnitCurves c = curves_for(p, law.support[i], arm);
    psi += (law.joint_s0[i] / p_s0) * c.surv[static_cast<std::size_t>(p.t0)];
  }
  return psi;
}

inline RemainderEstimate exact_remainder_survival(const SurvivalPredictors& p, const DgpSpec& spec,
                                                  int arm, int draws, std::uint64_t seed) {
  const double psi_p = plugin_psi_survival(p, spec, arm);
  const TruthReport truth = true_values(spec);
  const double psi_0 = arm == 1 ? truth.psi1 : truth.psi0;
  const SurvivalDataset ds = generate_survival(spec, draws, seed);
  Vec d;
  d.reserve(ds.records.size());
  for (const auto& r : ds.records) {
    const UnitCurves c = curves_for(p, r.w, arm);
    d.push_back(survival_eic(r, p, c, arm, psi_p).total);
  }
  RemainderEstimate out;
  out.value = psi_p - psi_0 + mean(d);
  out.mc_se = sd_pop(d) / std::sqrt(static_cast<double>(d.size()));
  return out;
}

}  // namespace transtmle
