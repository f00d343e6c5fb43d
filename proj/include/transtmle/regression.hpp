// Weighted Bernoulli and least-squares fitting. Logistic fits use IRLS with
// an optional fixed offset (the fluctuation steps depend on this), clamp
// diverging coefficients at |beta| <= 40 under separation, and drop
// collinear columns deterministically by column order.
#pragma once

#include <Eigen/Dense>

#include <cmath>
#include <string>
#include <vector>

#include "transtmle/design.hpp"

namespace transtmle {

struct RegressionFit {
  ResolvedDesign design;
  Vec coefficients;               // aligned to design terms, dropped terms = 0
  Link link = Link::Logit;
  bool converged = false;
  bool weighted = false;
  bool separation = false;        // some coefficient hit the clamp
  bool fixed = false;             // injected coefficients, no fitting
  std::vector<int> dropped_terms; // collinear columns removed before fitting
  double trunc_lo = 0.0;          // probability truncation for logit predictions
  double trunc_hi = 1.0;

  double linpred(const CovRow& r) const {
    Vec x;
    design.row(r, x);
    double eta = 0.0;
    for (std::size_t j = 0; j < x.size(); ++j) eta += coefficients[j] * x[j];
    return eta;
  }

  double predict(const CovRow& r, double offset = 0.0) const {
    const double eta = linpred(r) + offset;
    if (link == Link::Identity) return eta;
    return clamp_prob(expit(eta), trunc_lo, trunc_hi);
  }
};

inline void to_json(ordered_json& j, const RegressionFit& f) {
  ordered_json dj;
  to_json(dj, f.design);
  j = ordered_json{{"design", dj},
                   {"coefficients", f.coefficients},
                   {"link", link_name(f.link)},
                   {"converged", f.converged},
                   {"weighted", f.weighted},
                   {"separation", f.separation},
                   {"fixed", f.fixed},
                   {"dropped_terms", f.dropped_terms},
                   {"truncation", {f.trunc_lo, f.trunc_hi}}};
}

inline RegressionFit regression_fit_from_json(const json& j) {
  RegressionFit f;
  f.design = resolved_design_from_json(j.at("design"));
  f.coefficients = j.at("coefficients").get<Vec>();
  f.link = link_from_name(j.at("link").get<std::string>());
  f.converged = j.value("converged", true);
  f.weighted = j.value("weighted", false);
  f.separation = j.value("separation", false);
  f.fixed = j.value("fixed", false);
  if (j.contains("dropped_terms"))
    f.dropped_terms = j.at("dropped_terms").get<std::vector<int>>();
  if (j.contains("truncation")) {
    f.trunc_lo = j.at("truncation")[0].get<double>();
    f.trunc_hi = j.at("truncation")[1].get<double>();
  }
  return f;
}

namespace detail {

constexpr double kCoefClamp = 40.0;
constexpr double kStepTol = 1e-10;
constexpr int kMaxIrlsIter = 100;

// Modified Gram-Schmidt rank screen: returns indices of columns to keep,
// scanning left to right so the drop choice is deterministic.
inline std::vector<int> independent_columns(const Eigen::MatrixXd& x, double rel_tol = 1e-9) {
  const int p = static_cast<int>(x.cols());
  std::vector<int> keep;
  std::vector<Eigen::VectorXd> basis;
  for (int j = 0; j < p; ++j) {
    Eigen::VectorXd col = x.col(j);
    const double orig = col.norm();
    if (orig <= 0.0) continue;
    for (const auto& b : basis) col -= b.dot(col) * b;
    if (col.norm() > rel_tol * orig) {
      basis.push_back(col.normalized());
      keep.push_back(j);
    }
  }
  return keep;
}

struct GlmCore {
  Vec beta;
  bool converged = false;
  bool separation = false;
  std::vector<int> dropped;
};

inline GlmCore irls_logistic(const Eigen::MatrixXd& x_full, const Eigen::VectorXd& y,
                             const Eigen::VectorXd& wt, const Eigen::VectorXd& offset) {
  const int n = static_cast<int>(x_full.rows());
  const int p_full = static_cast<int>(x_full.cols());
  GlmCore out;
  out.beta.assign(p_full, 0.0);
  if (n == 0 || p_full == 0) {
    out.converged = true;
    return out;
  }

  const std::vector<int> keep = independent_columns(x_full);
  for (int j = 0, k = 0; j < p_full; ++j) {
    if (k < static_cast<int>(keep.size()) && keep[k] == j)
      ++k;
    else
      out.dropped.push_back(j);
  }
  const int p = static_cast<int>(keep.size());
  if (p == 0) {
    out.converged = true;
    return out;
  }
  Eigen::MatrixXd x(n, p);
  for (int k = 0; k < p; ++k) x.col(k) = x_full.col(keep[k]);

  Eigen::VectorXd beta = Eigen::VectorXd::Zero(p);
  for (int iter = 0; iter < kMaxIrlsIter; ++iter) {
    Eigen::VectorXd eta = x * beta + offset;
    Eigen::VectorXd score = Eigen::VectorXd::Zero(p);
    Eigen::MatrixXd info = Eigen::MatrixXd::Zero(p, p);
    for (int i = 0; i < n; ++i) {
      if (wt[i] == 0.0) continue;
      const double mu = expit(eta[i]);
      const double v = std::max(mu * (1.0 - mu), 1e-10);
      score.noalias() += wt[i] * (y[i] - mu) * x.row(i).transpose();
      info.noalias() += wt[i] * v * x.row(i).transpose() * x.row(i);
    }
    Eigen::VectorXd step = info.ldlt().solve(score);
    if (!step.allFinite()) {
      info.diagonal().array() += 1e-10;
      step = info.ldlt().solve(score);
      if (!step.allFinite()) break;
    }
    double max_move = 0.0;
    for (int k = 0; k < p; ++k) {
      double nb = beta[k] + step[k];
      if (nb > kCoefClamp) {
        nb = kCoefClamp;
        out.separation = true;
      } else if (nb < -kCoefClamp) {
        nb = -kCoefClamp;
        out.separation = true;
      }
      max_move = std::max(max_move, std::abs(nb - beta[k]));
      beta[k] = nb;
    }
    if (max_move < kStepTol) {
      out.converged = true;
      break;
    }
  }
  for (int k = 0; k < p; ++k) out.beta[static_cast<std::size_t>(keep[k])] = beta[k];
  return out;
}

inline GlmCore wls(const Eigen::MatrixXd& x_full, const Eigen::VectorXd& y,
                   const Eigen::VectorXd& wt) {
  const int n = static_cast<int>(x_full.rows());
  const int p_full = static_cast<int>(x_full.cols());
  GlmCore out;
  out.beta.assign(p_full, 0.0);
  if (n == 0 || p_full == 0) {
    out.converged = true;
    return out;
  }
  const std::vector<int> keep = independent_columns(x_full);
  for (int j = 0, k = 0; j < p_full; ++j) {
    if (k < static_cast<int>(keep.size()) && keep[k] == j)
      ++k;
    else
      out.dropped.push_back(j);
  }
  const int p = static_cast<int>(keep.size());
  if (p == 0) {
    out.converged = true;
    return out;
  }
  Eigen::MatrixXd x(n, p);
  for (int k = 0; k < p; ++k) x.col(k) = x_full.col(keep[k]);
  Eigen::MatrixXd xtwx = Eigen::MatrixXd::Zero(p, p);
  Eigen::VectorXd xtwy = Eigen::VectorXd::Zero(p);
  for (int i = 0; i < n; ++i) {
    if (wt[i] == 0.0) continue;
    xtwx.noalias() += wt[i] * x.row(i).transpose() * x.row(i);
    xtwy.noalias() += wt[i] * y[i] * x.row(i).transpose();
  }
  Eigen::VectorXd beta = xtwx.ldlt().solve(xtwy);
  if (!beta.allFinite()) {
    xtwx.diagonal().array() += 1e-10;  // ridge jitter on singularity
    beta = xtwx.ldlt().solve(xtwy);
  }
  out.converged = beta.allFinite();
  if (!out.converged) throw NumericError("least squares solve failed");
  for (int k = 0; k < p; ++k) out.beta[static_cast<std::size_t>(keep[k])] = beta[k];
  return out;
}

inline Eigen::MatrixXd build_matrix(const ResolvedDesign& design,
                                    const std::vector<CovRow>& rows) {
  const int n = static_cast<int>(rows.size());
  const int p = design.n_terms();
  Eigen::MatrixXd x(n, p);
  Vec buf;
  for (int i = 0; i < n; ++i) {
    design.row(rows[static_cast<std::size_t>(i)], buf);
    for (int j = 0; j < p; ++j) x(i, j) = buf[static_cast<std::size_t>(j)];
  }
  return x;
}

inline Eigen::VectorXd to_eigen(const Vec& v, int n, double fill) {
  Eigen::VectorXd out(n);
  if (v.empty())
    out.setConstant(fill);
  else
    for (int i = 0; i < n; ++i) out[i] = v[static_cast<std::size_t>(i)];
  return out;
}

}  // namespace detail

// Weighted Bernoulli maximum likelihood. `rows`, `y` (in {0,1} or fractional
// for scaled continuous outcomes), optional nonnegative `weights` and fixed
// `offset` per row. Saturated designs learn their indicator set here.
inline RegressionFit fit_logistic(DesignSpec spec, const std::vector<std::string>& names,
                                  const std::vector<CovRow>& rows, const Vec& y,
                                  const Vec& weights = {}, const Vec& offset = {},
                                  int tau = 0) {
  ResolvedDesign rd = resolve_design(spec, names, tau);
  learn_patterns(rd, rows);
  const int n = static_cast<int>(rows.size());
  if (n == 0) throw NumericError("fit_logistic: no rows");
  const Eigen::MatrixXd x = detail::build_matrix(rd, rows);
  const Eigen::VectorXd yv = detail::to_eigen(y, n, 0.0);
  const Eigen::VectorXd wv = detail::to_eigen(weights, n, 1.0);
  const Eigen::VectorXd ov = detail::to_eigen(offset, n, 0.0);
  if (wv.minCoeff() < 0.0) throw NumericError("fit_logistic: negative weight");
  if (wv.maxCoeff() == 0.0) throw NumericError("fit_logistic: all weights zero");
  const auto core = detail::irls_logistic(x, yv, wv, ov);
  RegressionFit fit;
  fit.design = std::move(rd);
  fit.coefficients = core.beta;
  fit.link = Link::Logit;
  fit.converged = core.converged;
  fit.weighted = !weights.empty();
  fit.separation = core.separation;
  fit.dropped_terms = core.dropped;
  return fit;
}

// Weighted least squares via normal equations (exact for full-rank designs).
inline RegressionFit fit_linear(DesignSpec spec, const std::vector<std::string>& names,
                                const std::vector<CovRow>& rows, const Vec& y,
                                const Vec& weights = {}, int tau = 0) {
  ResolvedDesign rd = resolve_design(spec, names, tau);
  learn_patterns(rd, rows);
  const int n = static_cast<int>(rows.size());
  if (n == 0) throw NumericError("fit_linear: no rows");
  const Eigen::MatrixXd x = detail::build_matrix(rd, rows);
  const Eigen::VectorXd yv = detail::to_eigen(y, n, 0.0);
  const Eigen::VectorXd wv = detail::to_eigen(weights, n, 1.0);
  const auto core = detail::wls(x, yv, wv);
  RegressionFit fit;
  fit.design = std::move(rd);
  fit.coefficients = core.beta;
  fit.link = Link::Identity;
  fit.converged = core.converged;
  fit.weighted = !weights.empty();
  fit.dropped_terms = core.dropped;
  return fit;
}

// Passthrough mode: wrap externally supplied coefficients (e.g. the data
// generating truth) in a RegressionFit without touching the data.
inline RegressionFit fixed_fit(DesignSpec spec, const std::vector<std::string>& names,
                               Vec coefficients, Link link, int tau = 0) {
  ResolvedDesign rd = resolve_design(spec, names, tau);
  if (rd.spec.saturated)
    throw SchemaMismatch("fixed coefficients cannot be combined with saturated designs");
  if (static_cast<int>(coefficients.size()) != rd.n_terms())
    throw SchemaMismatch("fixed coefficient vector has wrong length");
  RegressionFit fit;
  fit.design = std::move(rd);
  fit.coefficients = std::move(coefficients);
  fit.link = link;
  fit.converged = true;
  fit.fixed = true;
  return fit;
}

// One-dimensional (or small multi-dimensional) fluctuation solve: maximizes
// the weighted Bernoulli likelihood of y with mean expit(offset + eps'c).
// Returns the epsilon vector.
inline Vec solve_logistic_fluctuation(const std::vector<Vec>& covariates, const Vec& y,
                                      const Vec& offset, const Vec& weights,
                                      bool* converged = nullptr) {
  const int n = static_cast<int>(y.size());
  const int p = covariates.empty() ? 0 : static_cast<int>(covariates[0].size());
  Eigen::MatrixXd x(n, p);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < p; ++j) x(i, j) = covariates[static_cast<std::size_t>(i)][static_cast<std::size_t>(j)];
  const Eigen::VectorXd yv = detail::to_eigen(y, n, 0.0);
  const Eigen::VectorXd wv = detail::to_eigen(weights, n, 1.0);
  const Eigen::VectorXd ov = detail::to_eigen(offset, n, 0.0);
  const auto core = detail::irls_logistic(x, yv, wv, ov);
  if (converged) *converged = core.converged;
  return core.beta;
}

}  // namespace transtmle
