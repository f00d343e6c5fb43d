// Observed-data records and dataset containers for the two estimation
// problems: a clinical outcome subject to missingness (source units carry
// (W,A,Delta,Delta*Y), target units carry only the covariate subset V) and a
// right-censored time-to-event outcome on a discrete grid 1..tau.
#pragma once

#include <charconv>
#include <cstdio>
#include <fstream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "transtmle/common.hpp"

namespace transtmle {

// ---- records ----------------------------------------------------------------

struct ObservedRecord {
  int s = 0;                    // source indicator
  Vec v;                        // target covariates, always present
  std::optional<Vec> w;         // full covariates (s=1 only)
  std::optional<int> a;         // treatment (s=1 only)
  std::optional<int> delta;     // non-missing indicator (s=1 only)
  std::optional<double> y;      // outcome (s=1 and delta=1 only)
};

struct SurvivalRecord {
  int s = 0;
  Vec w;                        // covariates observed for every unit
  std::optional<int> a;         // s=1 only
  std::optional<int> t_tilde;   // min(T,C) on 1..tau, s=1 only
  std::optional<int> delta_event;  // I(T<=C), s=1 only
};

struct OutcomeSchema {
  std::vector<std::string> v_columns;  // prefix of w_columns
  std::vector<std::string> w_columns;
  bool v_equals_w() const { return v_columns.size() == w_columns.size(); }
};

struct OutcomeDataset {
  std::vector<ObservedRecord> records;
  OutcomeSchema schema;
  int n = 0;
  int n_source = 0;
  int n_target = 0;
  int n_missing_y = 0;  // s=1 rows with delta=0

  double p_s1() const { return static_cast<double>(n_source) / n; }
  double missingness_rate() const {
    return n_source == 0 ? 0.0 : static_cast<double>(n_missing_y) / n_source;
  }
};

struct SurvivalSchema {
  std::vector<std::string> w_columns;
  int t0 = 0;
  int tau = 0;
};

struct SurvivalDataset {
  std::vector<SurvivalRecord> records;
  SurvivalSchema schema;
  int n = 0;
  int n_source = 0;
  int n_target = 0;

  double p_s1() const { return static_cast<double>(n_source) / n; }
};

// One row per (source unit, period at risk). dN and dA_c never both fire in
// a period: ties at the same t are resolved by delta_event (event wins).
struct PersonTimeRow {
  int unit = 0;   // index into the dataset records
  int t = 0;      // 1..t_tilde
  int dn = 0;     // event at t
  int dac = 0;    // censored at t
  int a = 0;
  const Vec* w = nullptr;
};

struct PersonTimeTable {
  std::vector<PersonTimeRow> rows;
  int tau = 0;
};

// ---- schema validation --------------------------------------------------------

inline void check_outcome_schema(const OutcomeSchema& schema) {
  if (schema.w_columns.empty()) throw SchemaMismatch("w_columns must be nonempty");
  if (schema.v_columns.empty()) throw SchemaMismatch("v_columns must be nonempty");
  if (schema.v_columns.size() > schema.w_columns.size())
    throw SchemaMismatch("v_columns cannot be larger than w_columns");
  for (std::size_t i = 0; i < schema.v_columns.size(); ++i) {
    if (schema.v_columns[i] != schema.w_columns[i])
      throw SchemaMismatch("v_columns must be the leading coordinates of w_columns");
  }
}

inline void check_survival_schema(const SurvivalSchema& schema) {
  if (schema.w_columns.empty()) throw SchemaMismatch("w_columns must be nonempty");
  if (schema.tau < 1) throw SchemaMismatch("tau must be >= 1");
  if (schema.t0 < 1 || schema.t0 > schema.tau)
    throw SchemaMismatch("t0 must lie in 1..tau");
}

// ---- validation -----------------------------------------------------------------

inline OutcomeDataset validate_outcome_dataset(std::vector<ObservedRecord> records,
                                               OutcomeSchema schema) {
  check_outcome_schema(schema);
  OutcomeDataset ds;
  const std::size_t k = schema.v_columns.size();
  const std::size_t p = schema.w_columns.size();
  long row = 0;
  for (auto& r : records) {
    ++row;
    if (r.s != 0 && r.s != 1) throw StructuralViolation(row, "s must be 0 or 1");
    if (r.v.size() != k) throw StructuralViolation(row, "v has wrong dimension");
    if (!all_finite(r.v)) throw StructuralViolation(row, "non-finite v value");
    if (r.s == 0) {
      if (r.w || r.a || r.delta || r.y)
        throw StructuralViolation(row, "s=0 forbids w, a, delta and y");
      ++ds.n_target;
    } else {
      if (!r.w) throw StructuralViolation(row, "s=1 requires w");
      if (r.w->size() != p) throw StructuralViolation(row, "w has wrong dimension");
      if (!all_finite(*r.w)) throw StructuralViolation(row, "non-finite w value");
      for (std::size_t j = 0; j < k; ++j) {
        if (r.v[j] != (*r.w)[j])
          throw StructuralViolation(row, "v is not the V-projection of w");
      }
      if (!r.a || (*r.a != 0 && *r.a != 1))
        throw StructuralViolation(row, "s=1 requires binary a");
      if (!r.delta || (*r.delta != 0 && *r.delta != 1))
        throw StructuralViolation(row, "s=1 requires binary delta");
      if (*r.delta == 1) {
        if (!r.y) throw StructuralViolation(row, "delta=1 requires y");
        if (!std::isfinite(*r.y)) throw StructuralViolation(row, "non-finite y");
      } else if (r.y) {
        throw StructuralViolation(row, "delta=0 forbids y");
      }
      ++ds.n_source;
      if (*r.delta == 0) ++ds.n_missing_y;
    }
  }
  ds.n = static_cast<int>(records.size());
  if (ds.n < 1) throw EmptyStratum("dataset is empty");
  if (ds.n_source == 0) throw EmptyStratum("no source (s=1) records");
  if (ds.n_target == 0) throw EmptyStratum("no target (s=0) records");
  ds.records = std::move(records);
  ds.schema = std::move(schema);
  return ds;
}

inline SurvivalDataset validate_survival_dataset(std::vector<SurvivalRecord> records,
                                                 SurvivalSchema schema) {
  check_survival_schema(schema);
  SurvivalDataset ds;
  const std::size_t p = schema.w_columns.size();
  long row = 0;
  for (auto& r : records) {
    ++row;
    if (r.s != 0 && r.s != 1) throw StructuralViolation(row, "s must be 0 or 1");
    if (r.w.size() != p) throw StructuralViolation(row, "w has wrong dimension");
    if (!all_finite(r.w)) throw StructuralViolation(row, "non-finite w value");
    if (r.s == 0) {
      if (r.a || r.t_tilde || r.delta_event)
        throw StructuralViolation(row, "s=0 forbids a, t_tilde and delta_event");
      ++ds.n_target;
    } else {
      if (!r.a || (*r.a != 0 && *r.a != 1))
        throw StructuralViolation(row, "s=1 requires binary a");
      if (!r.t_tilde || *r.t_tilde < 1 || *r.t_tilde > schema.tau)
        throw StructuralViolation(row, "t_tilde must lie in 1..tau");
      if (!r.delta_event || (*r.delta_event != 0 && *r.delta_event != 1))
        throw StructuralViolation(row, "s=1 requires binary delta_event");
      ++ds.n_source;
    }
  }
  ds.n = static_cast<int>(records.size());
  if (ds.n < 1) throw EmptyStratum("dataset is empty");
  if (ds.n_source == 0) throw EmptyStratum("no source (s=1) records");
  if (ds.n_target == 0) throw EmptyStratum("no target (s=0) records");
  ds.records = std::move(records);
  ds.schema = std::move(schema);
  return ds;
}

// ---- person-time expansion ----------------------------------------------------

inline PersonTimeTable person_time_expand(const SurvivalDataset& ds) {
  PersonTimeTable table;
  table.tau = ds.schema.tau;
  for (std::size_t i = 0; i < ds.records.size(); ++i) {
    const auto& r = ds.records[i];
    if (r.s != 1) continue;
    const int tt = *r.t_tilde;
    const int de = *r.delta_event;
    for (int t = 1; t <= tt; ++t) {
      PersonTimeRow pt;
      pt.unit = static_cast<int>(i);
      pt.t = t;
      pt.dn = (t == tt && de == 1) ? 1 : 0;
      pt.dac = (t == tt && de == 0) ? 1 : 0;
      pt.a = *r.a;
      pt.w = &r.w;
      table.rows.push_back(pt);
    }
  }
  return table;
}

// ---- CSV I/O --------------------------------------------------------------------

namespace detail {

inline std::vector<std::string> split_csv_line(const std::string& line) {
  std::vector<std::string> cells;
  std::string cur;
  for (char c : line) {
    if (c == ',') {
      cells.push_back(cur);
      cur.clear();
    } else if (c != '\r') {
      cur.push_back(c);
    }
  }
  cells.push_back(cur);
  return cells;
}

inline bool parse_double(const std::string& s, double& out) {
  const char* b = s.data();
  const char* e = b + s.size();
  auto res = std::from_chars(b, e, out);
  return res.ec == std::errc() && res.ptr == e;
}

inline bool parse_int(const std::string& s, int& out) {
  const char* b = s.data();
  const char* e = b + s.size();
  auto res = std::from_chars(b, e, out);
  return res.ec == std::errc() && res.ptr == e;
}

inline std::string format_double(double v) {
  char buf[32];
  auto res = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, res.ptr);
}

inline std::vector<std::string> read_lines(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ValidationError("cannot open file: " + path);
  std::vector<std::string> lines;
  std::string line;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (!line.empty()) lines.push_back(line);
  }
  return lines;
}

}  // namespace detail

// Header: s,<v-cols...>,<w-only-cols...>,a,delta,y with empty cells for
// absent fields.
inline OutcomeDataset read_outcome_csv(const std::string& path, OutcomeSchema schema) {
  check_outcome_schema(schema);
  const auto lines = detail::read_lines(path);
  if (lines.empty()) throw ValidationError(path + ": empty file");

  std::vector<std::string> expected{"s"};
  expected.insert(expected.end(), schema.w_columns.begin(), schema.w_columns.end());
  expected.emplace_back("a");
  expected.emplace_back("delta");
  expected.emplace_back("y");
  const auto header = detail::split_csv_line(lines[0]);
  if (header != expected) throw SchemaMismatch(path + ": unexpected CSV header");

  const std::size_t k = schema.v_columns.size();
  const std::size_t p = schema.w_columns.size();
  std::vector<ObservedRecord> records;
  records.reserve(lines.size() - 1);
  for (std::size_t li = 1; li < lines.size(); ++li) {
    const long row = static_cast<long>(li);
    const auto cells = detail::split_csv_line(lines[li]);
    if (cells.size() != expected.size())
      throw StructuralViolation(row, "wrong number of cells");
    ObservedRecord r;
    if (!detail::parse_int(cells[0], r.s))
      throw StructuralViolation(row, "s is not an integer");
    Vec wvals;
    std::vector<bool> wpresent(p, false);
    for (std::size_t j = 0; j < p; ++j) {
      const std::string& cell = cells[1 + j];
      if (cell.empty()) {
        wvals.push_back(0.0);
      } else {
        double val;
        if (!detail::parse_double(cell, val))
          throw StructuralViolation(row, "bad numeric value in column " + schema.w_columns[j]);
        wvals.push_back(val);
        wpresent[j] = true;
      }
    }
    for (std::size_t j = 0; j < k; ++j) {
      if (!wpresent[j]) throw StructuralViolation(row, "missing V value");
      r.v.push_back(wvals[j]);
    }
    const bool any_tail = [&] {
      for (std::size_t j = k; j < p; ++j)
        if (wpresent[j]) return true;
      return false;
    }();
    if (r.s == 1) {
      for (std::size_t j = k; j < p; ++j)
        if (!wpresent[j]) throw StructuralViolation(row, "s=1 requires all w columns");
      r.w = wvals;
    } else if (any_tail) {
      throw StructuralViolation(row, "s=0 forbids w-only columns");
    }
    const std::string& ac = cells[1 + p];
    const std::string& dc = cells[2 + p];
    const std::string& yc = cells[3 + p];
    if (!ac.empty()) {
      int a;
      if (!detail::parse_int(ac, a)) throw StructuralViolation(row, "bad a");
      r.a = a;
    }
    if (!dc.empty()) {
      int d;
      if (!detail::parse_int(dc, d)) throw StructuralViolation(row, "bad delta");
      r.delta = d;
    }
    if (!yc.empty()) {
      double yv;
      if (!detail::parse_double(yc, yv)) throw StructuralViolation(row, "bad y");
      r.y = yv;
    }
    records.push_back(std::move(r));
  }
  return validate_outcome_dataset(std::move(records), std::move(schema));
}

inline void write_outcome_csv(const OutcomeDataset& ds, std::ostream& out) {
  const auto& schema = ds.schema;
  out << "s";
  for (const auto& c : schema.w_columns) out << "," << c;
  out << ",a,delta,y\n";
  const std::size_t k = schema.v_columns.size();
  const std::size_t p = schema.w_columns.size();
  for (const auto& r : ds.records) {
    out << r.s;
    for (std::size_t j = 0; j < p; ++j) {
      out << ",";
      if (r.s == 1)
        out << detail::format_double((*r.w)[j]);
      else if (j < k)
        out << detail::format_double(r.v[j]);
    }
    out << ",";
    if (r.a) out << *r.a;
    out << ",";
    if (r.delta) out << *r.delta;
    out << ",";
    if (r.y) out << detail::format_double(*r.y);
    out << "\n";
  }
}

inline void write_outcome_csv(const OutcomeDataset& ds, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw ValidationError("cannot write file: " + path);
  write_outcome_csv(ds, out);
}

// Header: s,<w-cols...>,a,t_tilde,delta_event
inline SurvivalDataset read_survival_csv(const std::string& path, SurvivalSchema schema) {
  check_survival_schema(schema);
  const auto lines = detail::read_lines(path);
  if (lines.empty()) throw ValidationError(path + ": empty file");

  std::vector<std::string> expected{"s"};
  expected.insert(expected.end(), schema.w_columns.begin(), schema.w_columns.end());
  expected.emplace_back("a");
  expected.emplace_back("t_tilde");
  expected.emplace_back("delta_event");
  const auto header = detail::split_csv_line(lines[0]);
  if (header != expected) throw SchemaMismatch(path + ": unexpected CSV header");

  const std::size_t p = schema.w_columns.size();
  std::vector<SurvivalRecord> records;
  records.reserve(lines.size() - 1);
  for (std::size_t li = 1; li < lines.size(); ++li) {
    const long row = static_cast<long>(li);
    const auto cells = detail::split_csv_line(lines[li]);
    if (cells.size() != expected.size())
      throw StructuralViolation(row, "wrong number of cells");
    SurvivalRecord r;
    if (!detail::parse_int(cells[0], r.s))
      throw StructuralViolation(row, "s is not an integer");
    for (std::size_t j = 0; j < p; ++j) {
      double val;
      if (!detail::parse_double(cells[1 + j], val))
        throw StructuralViolation(row, "bad numeric value in column " + schema.w_columns[j]);
      r.w.push_back(val);
    }
    const std::string& ac = cells[1 + p];
    const std::string& tc = cells[2 + p];
    const std::string& dc = cells[3 + p];
    if (!ac.empty()) {
      int a;
      if (!detail::parse_int(ac, a)) throw StructuralViolation(row, "bad a");
      r.a = a;
    }
    if (!tc.empty()) {
      int t;
      if (!detail::parse_int(tc, t)) throw StructuralViolation(row, "bad t_tilde");
      r.t_tilde = t;
    }
    if (!dc.empty()) {
      int d;
      if (!detail::parse_int(dc, d)) throw StructuralViolation(row, "bad delta_event");
      r.delta_event = d;
    }
    records.push_back(std::move(r));
  }
  return validate_survival_dataset(std::move(records), std::move(schema));
}

inline void write_survival_csv(const SurvivalDataset& ds, std::ostream& out) {
  out << "s";
  for (const auto& c : ds.schema.w_columns) out << "," << c;
  out << ",a,t_tilde,delta_event\n";
  for (const auto& r : ds.records) {
    out << r.s;
    for (double v : r.w) out << "," << detail::format_double(v);
    out << ",";
    if (r.a) out << *r.a;
    out << ",";
    if (r.t_tilde) out << *r.t_tilde;
    out << ",";
    if (r.delta_event) out << *r.delta_event;
    out << "\n";
  }
}

inline void write_survival_csv(const SurvivalDataset& ds, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw ValidationError("cannot write file: " + path);
  write_survival_csv(ds, out);
}

}  // namespace transtmle
