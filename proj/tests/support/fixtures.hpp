// Shared data-generating specs for the test suites: a transported
// missing-outcome problem and a right-censored survival problem, both on a
// small discrete covariate support so truths are exactly enumerable.
#pragma once

#include "transtmle/dgp.hpp"

namespace fixtures {

using transtmle::DgpSpec;

// Two binary covariates, V = (w1). Selection on w1 keeps the two strata
// balanced (P(S=1) = 1/2) with moderate covariate shift.
inline DgpSpec missing_dgp() {
  DgpSpec s;
  s.kind = "missing";
  s.w_columns = {"w1", "w2"};
  s.v_columns = {"w1"};
  s.cov.support = {{0, 0}, {0, 1}, {1, 0}, {1, 1}};
  s.cov.probs = {0.3, 0.2, 0.25, 0.25};
  s.selection = {0.4, {-0.8, 0.0}, 0.0, {}};
  s.treatment = {0.2, {0.5, -0.7}, 0.0, {}};
  s.missingness = {1.2, {0.4, 0.3}, -0.5, {}};
  s.outcome.family = "binary";
  s.outcome.mean = {-0.3, {0.9, 0.6}, 0.5, {0.4, 0.0}};
  return s;
}

// Same spec with V = W (both covariates observed on the target).
inline DgpSpec missing_dgp_vw() {
  DgpSpec s = missing_dgp();
  s.v_columns = s.w_columns;
  return s;
}

// Arm-symmetric outcome: no treatment effect anywhere.
inline DgpSpec missing_dgp_null() {
  DgpSpec s = missing_dgp();
  s.outcome.mean = {-0.3, {0.9, 0.6}, 0.0, {0.0, 0.0}};
  return s;
}

inline DgpSpec survival_dgp() {
  DgpSpec s;
  s.kind = "survival";
  s.w_columns = {"w1", "w2"};
  s.v_columns = {"w1", "w2"};
  s.cov.support = {{0, 0}, {0, 1}, {1, 0}, {1, 1}};
  s.cov.probs = {0.3, 0.2, 0.25, 0.25};
  s.selection = {0.4, {-0.8, 0.0}, 0.0, {}};
  s.treatment = {0.2, {0.5, -0.7}, 0.0, {}};
  s.survival.t0 = 4;
  s.survival.tau = 6;
  s.survival.event_baseline_logits = {-2.2, -2.1, -2.0, -1.9, -1.8, -1.7};
  s.survival.event = {0.0, {0.8, 0.5}, -0.6, {}};
  s.survival.cens_baseline_logits = {-2.5, -2.5, -2.5, -2.5, -2.5};
  s.survival.cens = {0.0, {0.4, 0.0}, 0.3, {}};
  return s;
}

// One-period survival problem used by the reduction identity.
inline DgpSpec survival_dgp_tau1() {
  DgpSpec s = survival_dgp();
  s.survival.t0 = 1;
  s.survival.tau = 1;
  s.survival.event_baseline_logits = {-0.4};
  s.survival.cens_baseline_logits = {};
  return s;
}

}  // namespace fixtures
