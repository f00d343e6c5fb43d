// Independent test oracles. Everything here is deliberately written against
// the raw definitions (likelihoods, empirical tables, hazard products) and
// shares no code with the library fitting/targeting paths it checks.
#pragma once

#include <algorithm>
#include <cmath>
#include <functional>
#include <map>
#include <stdexcept>
#include <vector>

#include "transtmle/data.hpp"

namespace oracle {

using Vec = std::vector<double>;
using Mat = std::vector<Vec>;

inline double expit(double x) { return 1.0 / (1.0 + std::exp(-x)); }

// ---- generic numerical MLE for the weighted Bernoulli log-likelihood ------
//
// Newton iterations on numerically differentiated log-likelihood; only the
// likelihood definition is shared with the implementation under test.

inline double bernoulli_loglik(const Mat& x, const Vec& y, const Vec& w, const Vec& beta) {
  double ll = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    double eta = 0.0;
    for (std::size_t j = 0; j < beta.size(); ++j) eta += x[i][j] * beta[j];
    const double mu = expit(eta);
    const double m = std::clamp(mu, 1e-12, 1.0 - 1e-12);
    const double wt = w.empty() ? 1.0 : w[i];
    ll += wt * (y[i] * std::log(m) + (1.0 - y[i]) * std::log(1.0 - m));
  }
  return ll;
}

inline Vec numeric_logistic_mle(const Mat& x, const Vec& y, const Vec& w = {}) {
  const std::size_t p = x.front().size();
  Vec beta(p, 0.0);
  const double h = 1e-5;
  for (int iter = 0; iter < 200; ++iter) {
    Vec grad(p, 0.0);
    Mat hess(p, Vec(p, 0.0));
    const double f0 = bernoulli_loglik(x, y, w, beta);
    for (std::size_t j = 0; j < p; ++j) {
      Vec bp = beta, bm = beta;
      bp[j] += h;
      bm[j] -= h;
      grad[j] = (bernoulli_loglik(x, y, w, bp) - bernoulli_loglik(x, y, w, bm)) / (2 * h);
      hess[j][j] = (bernoulli_loglik(x, y, w, bp) - 2 * f0 + bernoulli_loglik(x, y, w, bm)) / (h * h);
    }
    for (std::size_t j = 0; j < p; ++j) {
      for (std::size_t k = j + 1; k < p; ++k) {
        Vec bpp = beta, bpm = beta, bmp = beta, bmm = beta;
        bpp[j] += h; bpp[k] += h;
        bpm[j] += h; bpm[k] -= h;
        bmp[j] -= h; bmp[k] += h;
        bmm[j] -= h; bmm[k] -= h;
        const double d = (bernoulli_loglik(x, y, w, bpp) - bernoulli_loglik(x, y, w, bpm) -
                          bernoulli_loglik(x, y, w, bmp) + bernoulli_loglik(x, y, w, bmm)) /
                         (4 * h * h);
        hess[j][k] = hess[k][j] = d;
      }
    }
    // solve hess * step = grad by Gaussian elimination
    Mat a = hess;
    Vec b = grad;
    for (std::size_t col = 0; col < p; ++col) {
      std::size_t piv = col;
      for (std::size_t r = col + 1; r < p; ++r)
        if (std::abs(a[r][col]) > std::abs(a[piv][col])) piv = r;
      std::swap(a[piv], a[col]);
      std::swap(b[piv], b[col]);
      if (std::abs(a[col][col]) < 1e-14) throw std::runtime_error("oracle MLE: singular");
      for (std::size_t r = 0; r < p; ++r) {
        if (r == col) continue;
        const double f = a[r][col] / a[col][col];
        for (std::size_t c = col; c < p; ++c) a[r][c] -= f * a[col][c];
        b[r] -= f * b[col];
      }
    }
    double move = 0.0;
    for (std::size_t j = 0; j < p; ++j) {
      const double step = b[j] / a[j][j];
      beta[j] -= step;  // Newton ascent: hess is negative definite
      move = std::max(move, std::abs(step));
    }
    if (move < 1e-11) break;
  }
  return beta;
}

// Offset variant: maximizes the Bernoulli likelihood of expit(off + x'beta).
inline double bernoulli_loglik_offset(const Mat& x, const Vec& y, const Vec& off,
                                      const Vec& w, const Vec& beta) {
  double ll = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    double eta = off[i];
    for (std::size_t j = 0; j < beta.size(); ++j) eta += x[i][j] * beta[j];
    const double mu = std::clamp(expit(eta), 1e-12, 1.0 - 1e-12);
    const double wt = w.empty() ? 1.0 : w[i];
    ll += wt * (y[i] * std::log(mu) + (1.0 - y[i]) * std::log(1.0 - mu));
  }
  return ll;
}

// Golden-section search for the one-dimensional offset-logistic MLE.
inline double numeric_offset_logistic_mle_1d(const Vec& c, const Vec& y, const Vec& off,
                                             const Vec& w = {}) {
  Mat x;
  for (double ci : c) x.push_back({ci});
  const auto f = [&](double eps) { return bernoulli_loglik_offset(x, y, off, w, {eps}); };
  double lo = -50.0, hi = 50.0;
  const double phi = 0.5 * (std::sqrt(5.0) - 1.0);
  double a = lo, b = hi;
  double x1 = b - phi * (b - a), x2 = a + phi * (b - a);
  double f1 = f(x1), f2 = f(x2);
  for (int it = 0; it < 300; ++it) {
    if (f1 < f2) {
      a = x1;
      x1 = x2;
      f1 = f2;
      x2 = a + phi * (b - a);
      f2 = f(x2);
    } else {
      b = x2;
      x2 = x1;
      f2 = f1;
      x1 = b - phi * (b - a);
      f1 = f(x1);
    }
    if (b - a < 1e-12) break;
  }
  return 0.5 * (a + b);
}

// ---- closed-form weighted least squares ------------------------------------

// ---- NPMLE plug-in over the empirical distribution --------------------------
//
// Brute-force evaluation of the identification formula on the observed
// support: psi_a = sum_v Pn(v|S=0) sum_w Pn(w|v,S=1) mean(Y|A=a,W=w,D=1,S=1).

inline double npmle_missing(const std::vector<transtmle::ObservedRecord>& recs,
                            std::size_t v_len, int arm) {
  std::map<Vec, int> v_target;                       // v -> count among S=0
  std::map<Vec, std::map<Vec, int>> w_given_v;       // v -> w -> count among S=1
  std::map<Vec, std::pair<double, int>> y_cell;      // w -> (sum y, count) among A=arm, D=1
  int n_target = 0;
  for (const auto& r : recs) {
    if (r.s == 0) {
      ++v_target[r.v];
      ++n_target;
    } else {
      const Vec v(r.w->begin(), r.w->begin() + static_cast<std::ptrdiff_t>(v_len));
      ++w_given_v[v][*r.w];
      if (*r.a == arm && *r.delta == 1) {
        auto& c = y_cell[*r.w];
        c.first += *r.y;
        c.second += 1;
      }
    }
  }
  double psi = 0.0;
  for (const auto& [v, cnt] : v_target) {
    const auto& wmap = w_given_v.at(v);
    int n_v = 0;
    for (const auto& [w, c] : wmap) n_v += c;
    double inner = 0.0;
    for (const auto& [w, c] : wmap) {
      const auto& yc = y_cell.at(w);
      inner += (static_cast<double>(c) / n_v) * (yc.first / yc.second);
    }
    psi += (static_cast<double>(cnt) / n_target) * inner;
  }
  return psi;
}

// Life-table hazard estimate per (t, w, a) cell and the corresponding
// survival plug-in standardized to the empirical S=0 covariate distribution.
inline double npmle_survival(const std::vector<transtmle::SurvivalRecord>& recs, int t0,
                             int arm) {
  std::map<Vec, int> w_target;
  int n_target = 0;
  std::map<std::pair<Vec, int>, std::pair<int, int>> cell;  // (w,t) -> (events, at risk), A=arm
  for (const auto& r : recs) {
    if (r.s == 0) {
      ++w_target[r.w];
      ++n_target;
      continue;
    }
    if (*r.a != arm) continue;
    for (int t = 1; t <= *r.t_tilde; ++t) {
      auto& c = cell[{r.w, t}];
      c.second += 1;
      if (t == *r.t_tilde && *r.delta_event == 1) c.first += 1;
    }
  }
  double psi = 0.0;
  for (const auto& [w, cnt] : w_target) {
    double surv = 1.0;
    for (int t = 1; t <= t0; ++t) {
      const auto it = cell.find({w, t});
      if (it == cell.end() || it->second.second == 0)
        throw std::runtime_error("npmle_survival: empty risk set cell");
      surv *= 1.0 - static_cast<double>(it->second.first) / it->second.second;
    }
    psi += (static_cast<double>(cnt) / n_target) * surv;
  }
  return psi;
}

inline Vec closed_form_wls(const Mat& x, const Vec& y, const Vec& w) {
  const std::size_t p = x.front().size();
  Mat a(p, Vec(p, 0.0));
  Vec b(p, 0.0);
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double wt = w.empty() ? 1.0 : w[i];
    for (std::size_t j = 0; j < p; ++j) {
      b[j] += wt * x[i][j] * y[i];
      for (std::size_t k = 0; k < p; ++k) a[j][k] += wt * x[i][j] * x[i][k];
    }
  }
  for (std::size_t col = 0; col < p; ++col) {
    std::size_t piv = col;
    for (std::size_t r = col + 1; r < p; ++r)
      if (std::abs(a[r][col]) > std::abs(a[piv][col])) piv = r;
    std::swap(a[piv], a[col]);
    std::swap(b[piv], b[col]);
    for (std::size_t r = 0; r < p; ++r) {
      if (r == col) continue;
      const double f = a[r][col] / a[col][col];
      for (std::size_t c = col; c < p; ++c) a[r][c] -= f * a[col][c];
      b[r] -= f * b[col];
    }
  }
  Vec beta(p);
  for (std::size_t j = 0; j < p; ++j) beta[j] = b[j] / a[j][j];
  return beta;
}

}  // namespace oracle
