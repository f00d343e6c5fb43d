#include <catch2/catch_amalgamated.hpp>

#include <cstdio>
#include <fstream>
#include <sstream>

#include "transtmle/data.hpp"
#include "transtmle/rng.hpp"

using namespace transtmle;

namespace {

OutcomeSchema schema_vw() {
  OutcomeSchema s;
  s.v_columns = {"w1"};
  s.w_columns = {"w1", "w2"};
  return s;
}

std::string write_temp(const std::string& name, const std::string& content) {
  std::string path = std::string("/tmp/transtmle_test_") + name;
  std::ofstream out(path);
  out << content;
  return path;
}

}  // namespace

TEST_CASE("outcome validation accepts delta=0 without y") {
  ObservedRecord r;
  r.s = 1;
  r.v = {1.0};
  r.w = Vec{1.0, 2.0};
  r.a = 1;
  r.delta = 0;
  ObservedRecord t;
  t.s = 0;
  t.v = {0.5};
  auto ds = validate_outcome_dataset({r, t}, schema_vw());
  CHECK(ds.n == 2);
  CHECK(ds.n_source == 1);
  CHECK(ds.missingness_rate() == 1.0);
}

TEST_CASE("outcome validation rejects treatment fields on target rows") {
  ObservedRecord bad;
  bad.s = 0;
  bad.v = {1.0};
  bad.a = 1;
  ObservedRecord ok;
  ok.s = 1;
  ok.v = {1.0};
  ok.w = Vec{1.0, 0.0};
  ok.a = 0;
  ok.delta = 1;
  ok.y = 2.0;
  CHECK_THROWS_AS(validate_outcome_dataset({bad, ok}, schema_vw()), StructuralViolation);
}

TEST_CASE("outcome validation rejects y with delta=0 and missing y with delta=1") {
  ObservedRecord r;
  r.s = 1;
  r.v = {1.0};
  r.w = Vec{1.0, 2.0};
  r.a = 1;
  r.delta = 0;
  r.y = 3.0;
  ObservedRecord t;
  t.s = 0;
  t.v = {0.0};
  CHECK_THROWS_AS(validate_outcome_dataset({r, t}, schema_vw()), StructuralViolation);
  r.delta = 1;
  r.y.reset();
  CHECK_THROWS_AS(validate_outcome_dataset({r, t}, schema_vw()), StructuralViolation);
}

TEST_CASE("empty stratum is rejected") {
  ObservedRecord r;
  r.s = 1;
  r.v = {1.0};
  r.w = Vec{1.0, 2.0};
  r.a = 1;
  r.delta = 1;
  r.y = 0.0;
  CHECK_THROWS_AS(validate_outcome_dataset({r}, schema_vw()), EmptyStratum);
  CHECK_THROWS_AS(validate_outcome_dataset({}, schema_vw()), EmptyStratum);
}

TEST_CASE("three-row CSV fixture parses with expected stratum counts") {
  const std::string csv =
      "s,w1,w2,a,delta,y\n"
      "1,1,2,1,1,0.5\n"
      "1,0,1,0,0,,\n"
      "0,1,,,,\n";
  // note: delta=0 row has an empty y cell
  const std::string fixed =
      "s,w1,w2,a,delta,y\n"
      "1,1,2,1,1,0.5\n"
      "1,0,1,0,0,\n"
      "0,1,,,,\n";
  (void)csv;
  auto path = write_temp("3row.csv", fixed);
  auto ds = read_outcome_csv(path, schema_vw());
  CHECK(ds.n == 3);
  CHECK(ds.n_target == 1);
  CHECK(ds.n_source == 2);
  std::remove(path.c_str());
}

TEST_CASE("CSV round-trip preserves records") {
  const std::string text =
      "s,w1,w2,a,delta,y\n"
      "1,1,2,1,1,0.5\n"
      "1,0,1,0,0,\n"
      "0,0.25,,,,\n";
  auto path = write_temp("rt.csv", text);
  auto ds = read_outcome_csv(path, schema_vw());
  std::ostringstream out;
  write_outcome_csv(ds, out);
  CHECK(out.str() == text);
  std::remove(path.c_str());
}

TEST_CASE("malformed CSV cells raise StructuralViolation") {
  auto path = write_temp("bad.csv",
                         "s,w1,w2,a,delta,y\n"
                         "1,xx,2,1,1,0.5\n"
                         "0,1,,,,\n");
  CHECK_THROWS_AS(read_outcome_csv(path, schema_vw()), StructuralViolation);
  std::remove(path.c_str());
}

TEST_CASE("survival header mismatch raises SchemaMismatch") {
  SurvivalSchema sch;
  sch.w_columns = {"w1"};
  sch.t0 = 1;
  sch.tau = 3;
  auto path = write_temp("badhdr.csv", "s,w1,a,t,delta_event\n1,1,1,2,1\n");
  CHECK_THROWS_AS(read_survival_csv(path, sch), SchemaMismatch);
  std::remove(path.c_str());
}

namespace {

SurvivalDataset make_survival(const std::vector<std::tuple<int, int, int>>& units) {
  // units: (a, t_tilde, delta_event); adds one target row
  std::vector<SurvivalRecord> recs;
  for (auto [a, tt, de] : units) {
    SurvivalRecord r;
    r.s = 1;
    r.w = {1.0};
    r.a = a;
    r.t_tilde = tt;
    r.delta_event = de;
    recs.push_back(r);
  }
  SurvivalRecord tgt;
  tgt.s = 0;
  tgt.w = {0.0};
  recs.push_back(tgt);
  SurvivalSchema sch;
  sch.w_columns = {"w1"};
  sch.t0 = 2;
  sch.tau = 5;
  return validate_survival_dataset(recs, sch);
}

}  // namespace

TEST_CASE("person-time expansion of an event at t=3") {
  auto ds = make_survival({{1, 3, 1}});
  auto pt = person_time_expand(ds);
  REQUIRE(pt.rows.size() == 3);
  CHECK(pt.rows[0].dn == 0);
  CHECK(pt.rows[1].dn == 0);
  CHECK(pt.rows[2].dn == 1);
  for (const auto& r : pt.rows) CHECK(r.dac == 0);
}

TEST_CASE("person-time expansion of censoring at t=1") {
  auto ds = make_survival({{0, 1, 0}});
  auto pt = person_time_expand(ds);
  REQUIRE(pt.rows.size() == 1);
  CHECK(pt.rows[0].dn == 0);
  CHECK(pt.rows[0].dac == 1);
}

TEST_CASE("person-time row count is the sum of follow-up times") {
  auto ds = make_survival({{1, 3, 1}, {0, 4, 0}});
  auto pt = person_time_expand(ds);
  CHECK(pt.rows.size() == 7);
}

TEST_CASE("every source unit ends in exactly one of event or censoring") {
  Rng rng(20240901);
  std::vector<std::tuple<int, int, int>> units;
  for (int i = 0; i < 50; ++i)
    units.emplace_back(rng.bernoulli(0.5) ? 1 : 0, 1 + static_cast<int>(rng.uniform() * 5),
                       rng.bernoulli(0.6) ? 1 : 0);
  auto ds = make_survival(units);
  auto pt = person_time_expand(ds);
  std::map<int, std::pair<int, int>> per_unit;
  for (const auto& r : pt.rows) {
    per_unit[r.unit].first += r.dn;
    per_unit[r.unit].second += r.dac;
    CHECK(!(r.dn == 1 && r.dac == 1));
  }
  CHECK(per_unit.size() == units.size());
  for (const auto& [unit, cnt] : per_unit) CHECK(cnt.first + cnt.second == 1);
}

TEST_CASE("survival validation enforces the time grid") {
  SurvivalRecord r;
  r.s = 1;
  r.w = {1.0};
  r.a = 1;
  r.t_tilde = 9;
  r.delta_event = 1;
  SurvivalRecord t;
  t.s = 0;
  t.w = {0.0};
  SurvivalSchema sch;
  sch.w_columns = {"w1"};
  sch.t0 = 2;
  sch.tau = 5;
  CHECK_THROWS_AS(validate_survival_dataset({r, t}, sch), StructuralViolation);
}
