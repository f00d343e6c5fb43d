#include <catch2/catch_amalgamated.hpp>

#include <cmath>

#include "support/oracles.hpp"
#include "transtmle/regression.hpp"
#include "transtmle/rng.hpp"

using namespace transtmle;

namespace {

std::vector<CovRow> rows_from(const std::vector<Vec>& covs) {
  std::vector<CovRow> rows;
  rows.reserve(covs.size());
  for (const auto& c : covs) rows.push_back(CovRow{&c, 0.0, 0.0});
  return rows;
}

}  // namespace

TEST_CASE("intercept-only logistic recovers the logit of the response mean") {
  std::vector<Vec> covs(4, Vec{});
  auto rows = rows_from(covs);
  DesignSpec spec;  // intercept only
  auto fit = fit_logistic(spec, {}, rows, {1, 0, 1, 0});
  REQUIRE(fit.converged);
  CHECK(std::abs(fit.coefficients[0]) < 1e-9);

  auto fit2 = fit_logistic(spec, {}, rows, {1, 1, 1, 0});
  CHECK(fit2.coefficients[0] == Catch::Approx(std::log(3.0)).epsilon(1e-8));
}

TEST_CASE("two-covariate logistic matches an independent numerical MLE") {
  Rng rng(17);
  std::vector<Vec> covs;
  Vec y;
  for (int i = 0; i < 400; ++i) {
    const double x1 = rng.normal();
    const double x2 = rng.bernoulli(0.4) ? 1.0 : 0.0;
    covs.push_back({x1, x2});
    y.push_back(rng.bernoulli(expit(-0.3 + 0.8 * x1 - 0.5 * x2)) ? 1.0 : 0.0);
  }
  auto rows = rows_from(covs);
  auto fit = fit_logistic(DesignSpec::main_effects({"x1", "x2"}), {"x1", "x2"}, rows, y);
  REQUIRE(fit.converged);

  oracle::Mat x;
  for (const auto& c : covs) x.push_back({1.0, c[0], c[1]});
  const auto ref = oracle::numeric_logistic_mle(x, y);
  for (int j = 0; j < 3; ++j)
    CHECK(fit.coefficients[j] == Catch::Approx(ref[j]).margin(1e-6));
}

TEST_CASE("weighted logistic matches the weighted oracle") {
  Rng rng(23);
  std::vector<Vec> covs;
  Vec y, w;
  for (int i = 0; i < 300; ++i) {
    const double x1 = rng.normal();
    covs.push_back({x1});
    y.push_back(rng.bernoulli(expit(0.4 * x1)) ? 1.0 : 0.0);
    w.push_back(rng.uniform() < 0.3 ? 0.0 : 1.0 + rng.uniform());
  }
  auto rows = rows_from(covs);
  auto fit = fit_logistic(DesignSpec::main_effects({"x1"}), {"x1"}, rows, y, w);
  oracle::Mat x;
  for (const auto& c : covs) x.push_back({1.0, c[0]});
  const auto ref = oracle::numeric_logistic_mle(x, y, w);
  CHECK(fit.coefficients[0] == Catch::Approx(ref[0]).margin(1e-6));
  CHECK(fit.coefficients[1] == Catch::Approx(ref[1]).margin(1e-6));
}

TEST_CASE("IRLS score is solved at convergence") {
  Rng rng(31);
  std::vector<Vec> covs;
  Vec y, w;
  for (int i = 0; i < 500; ++i) {
    covs.push_back({rng.normal(), rng.uniform()});
    y.push_back(rng.bernoulli(0.5) ? 1.0 : 0.0);
    w.push_back(0.5 + rng.uniform());
  }
  auto rows = rows_from(covs);
  auto fit = fit_logistic(DesignSpec::main_effects({"x1", "x2"}), {"x1", "x2"}, rows, y, w);
  REQUIRE(fit.converged);
  double s0 = 0, s1 = 0, s2 = 0;
  for (std::size_t i = 0; i < covs.size(); ++i) {
    const double p = fit.predict(CovRow{&covs[i], 0, 0});
    const double r = w[i] * (y[i] - p);
    s0 += r;
    s1 += r * covs[i][0];
    s2 += r * covs[i][1];
  }
  CHECK(std::abs(s0) < 1e-8);
  CHECK(std::abs(s1) < 1e-8);
  CHECK(std::abs(s2) < 1e-8);
}

TEST_CASE("offset logistic: fluctuation solver matches oracle with fixed offset") {
  Rng rng(41);
  Vec y, offset;
  std::vector<Vec> cov;
  for (int i = 0; i < 200; ++i) {
    const double off = rng.normal() * 0.5;
    const double c = 0.5 + rng.uniform();
    offset.push_back(off);
    cov.push_back({c});
    y.push_back(rng.bernoulli(expit(off + 0.3 * c)) ? 1.0 : 0.0);
  }
  bool conv = false;
  const Vec eps = solve_logistic_fluctuation(cov, y, offset, {}, &conv);
  REQUIRE(conv);
  // score of the solved fluctuation is zero
  double score = 0.0;
  for (std::size_t i = 0; i < y.size(); ++i)
    score += cov[i][0] * (y[i] - expit(offset[i] + eps[0] * cov[i][0]));
  CHECK(std::abs(score) < 1e-8);
}

TEST_CASE("intercept-only linear fit is the mean; exact fit recovered") {
  std::vector<Vec> covs{{0.0}, {1.0}, {2.0}};
  auto rows = rows_from(covs);
  auto fit = fit_linear(DesignSpec::intercept_only(), {"x"}, rows, {1, 2, 3});
  CHECK(fit.coefficients[0] == Catch::Approx(2.0).margin(1e-12));

  auto fit2 = fit_linear(DesignSpec::main_effects({"x"}), {"x"}, rows, {0, 2, 4});
  CHECK(fit2.coefficients[0] == Catch::Approx(0.0).margin(1e-10));
  CHECK(fit2.coefficients[1] == Catch::Approx(2.0).margin(1e-10));
}

TEST_CASE("weighted least squares matches the closed-form oracle") {
  Rng rng(53);
  std::vector<Vec> covs;
  Vec y, w;
  for (int i = 0; i < 120; ++i) {
    covs.push_back({rng.normal(), rng.normal()});
    y.push_back(1.0 + 0.5 * covs.back()[0] - 0.25 * covs.back()[1] + rng.normal());
    w.push_back(0.1 + rng.uniform());
  }
  auto rows = rows_from(covs);
  auto fit = fit_linear(DesignSpec::main_effects({"x1", "x2"}), {"x1", "x2"}, rows, y, w);
  oracle::Mat x;
  for (const auto& c : covs) x.push_back({1.0, c[0], c[1]});
  const auto ref = oracle::closed_form_wls(x, y, w);
  for (int j = 0; j < 3; ++j)
    CHECK(fit.coefficients[j] == Catch::Approx(ref[j]).margin(1e-10));
}

TEST_CASE("unit weights equal the unweighted fit") {
  Rng rng(59);
  std::vector<Vec> covs;
  Vec y;
  for (int i = 0; i < 60; ++i) {
    covs.push_back({rng.normal()});
    y.push_back(rng.normal());
  }
  auto rows = rows_from(covs);
  auto a = fit_linear(DesignSpec::main_effects({"x"}), {"x"}, rows, y);
  auto b = fit_linear(DesignSpec::main_effects({"x"}), {"x"}, rows, y, Vec(60, 1.0));
  CHECK(a.coefficients[0] == Catch::Approx(b.coefficients[0]).margin(1e-12));
  CHECK(a.coefficients[1] == Catch::Approx(b.coefficients[1]).margin(1e-12));
}

TEST_CASE("saturated designs reproduce empirical conditional frequencies") {
  Rng rng(61);
  std::vector<Vec> covs;
  Vec y;
  for (int i = 0; i < 400; ++i) {
    const double w1 = rng.bernoulli(0.5) ? 1.0 : 0.0;
    const double w2 = rng.bernoulli(0.3) ? 1.0 : 0.0;
    covs.push_back({w1, w2});
    y.push_back(rng.bernoulli(0.2 + 0.4 * w1 + 0.2 * w2) ? 1.0 : 0.0);
  }
  auto rows = rows_from(covs);
  DesignSpec spec;
  spec.columns = {"w1", "w2"};
  spec.saturated = true;
  auto fit = fit_logistic(spec, {"w1", "w2"}, rows, y);
  // frequency-table oracle
  std::map<std::pair<double, double>, std::pair<double, int>> cells;
  for (std::size_t i = 0; i < covs.size(); ++i) {
    auto& c = cells[{covs[i][0], covs[i][1]}];
    c.first += y[i];
    c.second += 1;
  }
  for (std::size_t i = 0; i < covs.size(); ++i) {
    const auto& c = cells[{covs[i][0], covs[i][1]}];
    const double freq = c.first / c.second;
    CHECK(fit.predict(CovRow{&covs[i], 0, 0}) == Catch::Approx(freq).margin(1e-8));
  }
}

TEST_CASE("probability predictions honor the truncation bounds") {
  std::vector<Vec> covs{{5.0}, {-5.0}, {4.0}, {-4.0}};
  auto rows = rows_from(covs);
  Vec y{1, 0, 1, 0};
  auto fit = fit_logistic(DesignSpec::main_effects({"x"}), {"x"}, rows, y);
  fit.trunc_lo = 0.1;
  fit.trunc_hi = 0.9;
  for (const auto& c : covs) {
    const double p = fit.predict(CovRow{&c, 0, 0});
    CHECK(p >= 0.1);
    CHECK(p <= 0.9);
  }
  // bounds [0,1] recover the raw prediction
  fit.trunc_lo = 0.0;
  fit.trunc_hi = 1.0;
  const double raw = expit(fit.coefficients[0] + fit.coefficients[1] * 5.0);
  CHECK(fit.predict(CovRow{&covs[0], 0, 0}) == Catch::Approx(raw).margin(1e-12));
}

TEST_CASE("separation clamps coefficients at 40 and flags it") {
  std::vector<Vec> covs{{1.0}, {1.0}, {0.0}, {0.0}};
  auto rows = rows_from(covs);
  Vec y{1, 1, 0, 0};
  auto fit = fit_logistic(DesignSpec::main_effects({"x"}), {"x"}, rows, y);
  CHECK(fit.separation);
  for (double b : fit.coefficients) CHECK(std::abs(b) <= 40.0 + 1e-12);
}

TEST_CASE("collinear columns are dropped deterministically by column order") {
  Rng rng(67);
  std::vector<Vec> covs;
  Vec y;
  for (int i = 0; i < 100; ++i) {
    const double x = rng.normal();
    covs.push_back({x, 2.0 * x});
    y.push_back(rng.bernoulli(expit(x)) ? 1.0 : 0.0);
  }
  auto rows = rows_from(covs);
  auto fit = fit_logistic(DesignSpec::main_effects({"x", "x2"}), {"x", "x2"}, rows, y);
  REQUIRE(fit.dropped_terms.size() == 1);
  CHECK(fit.dropped_terms[0] == 2);  // intercept, x kept; duplicate dropped
  CHECK(fit.coefficients[2] == 0.0);
  CHECK(fit.converged);
}

TEST_CASE("predict applies link and offset") {
  RegressionFit fit;
  fit.design = resolve_design(DesignSpec::main_effects({"x"}), {"x"});
  fit.coefficients = {0.0, 1.0};
  fit.link = Link::Identity;
  Vec c{2.0};
  CHECK(fit.predict(CovRow{&c, 0, 0}) == Catch::Approx(2.0));
  fit.link = Link::Logit;
  fit.coefficients = {0.0, 0.0};
  CHECK(fit.predict(CovRow{&c, 0, 0}) == Catch::Approx(0.5));
  CHECK(fit.predict(CovRow{&c, 0, 0}, std::log(3.0)) == Catch::Approx(0.75).margin(1e-12));
}

TEST_CASE("regression fits serialize through JSON") {
  Rng rng(71);
  std::vector<Vec> covs;
  Vec y;
  for (int i = 0; i < 50; ++i) {
    covs.push_back({rng.normal()});
    y.push_back(rng.bernoulli(0.4) ? 1.0 : 0.0);
  }
  auto rows = rows_from(covs);
  auto fit = fit_logistic(DesignSpec::main_effects({"x"}), {"x"}, rows, y);
  ordered_json j;
  to_json(j, fit);
  auto back = regression_fit_from_json(json::parse(j.dump()));
  CHECK(back.coefficients == fit.coefficients);
  Vec probe{0.7};
  CHECK(back.predict(CovRow{&probe, 0, 0}) == fit.predict(CovRow{&probe, 0, 0}));
}
