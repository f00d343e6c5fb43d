// Canonical gradient of the transported mean outcome: the target-covariate
// component, the outcome-residual component with its clever covariate, and
// the W-given-V component. All pure functions of immutable inputs.
#pragma once

#include "transtmle/data.hpp"
#include "transtmle/nuisance.hpp"

namespace transtmle {

struct EICDecomposition {
  double d_v = 0.0;
  double d_y = 0.0;
  double d_wv = 0.0;
  double total = 0.0;
};

// C_{psi_a,Y} = I(A=a, Delta=1, S=1) / [P(S=1) g(a|W) p_delta(1|W,a)] times
// the density ratio at V; zero whenever the indicator fails.
inline double clever_covariate_y(const ObservedRecord& r, const OutcomePredictors& np,
                                 int arm, PositivityCounter* pos = nullptr) {
  if (r.s != 1 || *r.delta != 1 || *r.a != arm) return 0.0;
  const double g = np.g(*r.w, arm);
  const double pd = np.p_delta(*r.w, arm);
  const double pi = np.pi_v(r.v);
  if (pos) {
    if (pos->at_bound(g, np.trunc)) pos->hit("g_a");
    if (pos->at_bound(pd, np.trunc)) pos->hit("p_delta");
    if (pos->at_bound(pi, np.trunc)) pos->hit("p_s_given_v");
  }
  return np.ratio(r.v) / (np.p_s1 * g * pd);
}

// C_{psi,W|V} = I(S=1)/P(S=1) times the density ratio at V; arm-free.
inline double clever_covariate_wv(const ObservedRecord& r, const OutcomePredictors& np,
                                  PositivityCounter* pos = nullptr) {
  if (r.s != 1) return 0.0;
  const double pi = np.pi_v(r.v);
  if (pos && pos->at_bound(pi, np.trunc)) pos->hit("p_s_given_v");
  return np.ratio(r.v) / np.p_s1;
}

// Full per-unit gradient for Psi_a at the supplied plug-in value psi_a.
inline EICDecomposition eic_psi_a(const ObservedRecord& r, const OutcomePredictors& np,
                                  int arm, double psi_a, PositivityCounter* pos = nullptr) {
  EICDecomposition d;
  if (r.s == 0) {
    d.d_v = (np.q_bar_r(r.v, arm) - psi_a) / (1.0 - np.p_s1);
  } else {
    const double q = np.q_bar(*r.w, arm);
    const double qr = np.q_bar_r(r.v, arm);
    const double cy = clever_covariate_y(r, np, arm, pos);
    if (cy != 0.0) d.d_y = cy * (*r.y - q);
    d.d_wv = clever_covariate_wv(r, np, pos) * (q - qr);
  }
  d.total = d.d_v + d.d_y + d.d_wv;
  return d;
}

// Gradient of the ATE: componentwise difference of the two arms.
inline EICDecomposition eic_ate(const ObservedRecord& r, const OutcomePredictors& np,
                                double psi1, double psi0, PositivityCounter* pos = nullptr) {
  const EICDecomposition e1 = eic_psi_a(r, np, 1, psi1, pos);
  const EICDecomposition e0 = eic_psi_a(r, np, 0, psi0, pos);
  EICDecomposition d;
  d.d_v = e1.d_v - e0.d_v;
  d.d_y = e1.d_y - e0.d_y;
  d.d_wv = e1.d_wv - e0.d_wv;
  d.total = d.d_v + d.d_y + d.d_wv;
  return d;
}

}  // namespace transtmle
