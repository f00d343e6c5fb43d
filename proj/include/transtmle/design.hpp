// Design specifications and design-row construction. A DesignSpec names the
// covariates entering a regression ("a" and "t" are pseudo-columns for
// treatment and period); a ResolvedDesign binds the spec to a covariate
// namespace so rows can be evaluated for fitting and, later, prediction on
// new units.
#pragma once

#include <algorithm>
#include <array>
#include <map>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "transtmle/common.hpp"

namespace transtmle {

using json = nlohmann::json;
using ordered_json = nlohmann::ordered_json;

enum class Link { Logit, Identity };

inline std::string link_name(Link l) { return l == Link::Logit ? "logit" : "identity"; }
inline Link link_from_name(const std::string& s) {
  if (s == "logit") return Link::Logit;
  if (s == "identity") return Link::Identity;
  throw SchemaMismatch("unknown link: " + s);
}

// Time encoding for pooled hazard regressions: "none" drops the period from
// the design, "linear" adds a single t column, "indicators" adds one dummy
// per period 1..tau (and suppresses the intercept so the dummies are the
// baseline).
struct DesignSpec {
  std::vector<std::string> columns;
  bool intercept = true;
  std::vector<std::array<std::string, 2>> interactions;
  bool saturated = false;
  std::string time_encoding = "none";

  static DesignSpec main_effects(std::vector<std::string> cols) {
    DesignSpec d;
    d.columns = std::move(cols);
    return d;
  }
  static DesignSpec intercept_only() { return DesignSpec{}; }
};

inline void to_json(ordered_json& j, const DesignSpec& d) {
  j = ordered_json{{"columns", d.columns},
                   {"intercept", d.intercept},
                   {"saturated", d.saturated},
                   {"time_encoding", d.time_encoding}};
  ordered_json ints = ordered_json::array();
  for (const auto& p : d.interactions) ints.push_back({p[0], p[1]});
  j["interactions"] = ints;
}

inline DesignSpec design_spec_from_json(const json& j) {
  DesignSpec d;
  if (j.contains("columns")) d.columns = j.at("columns").get<std::vector<std::string>>();
  if (j.contains("intercept")) d.intercept = j.at("intercept").get<bool>();
  if (j.contains("saturated")) d.saturated = j.at("saturated").get<bool>();
  if (j.contains("time_encoding")) d.time_encoding = j.at("time_encoding").get<std::string>();
  if (j.contains("interactions")) {
    for (const auto& e : j.at("interactions")) {
      if (!e.is_array() || e.size() != 2)
        throw SchemaMismatch("interaction entries must be [col, col] pairs");
      d.interactions.push_back({e[0].get<std::string>(), e[1].get<std::string>()});
    }
  }
  return d;
}

// A single unit/period presented to a design: covariate vector plus the
// treatment and period pseudo-columns.
struct CovRow {
  const Vec* w = nullptr;
  double a = 0.0;
  double t = 0.0;
};

struct ResolvedDesign {
  DesignSpec spec;
  std::vector<std::string> names;   // covariate namespace the spec was bound to
  int tau = 0;                      // needed for time indicators
  std::vector<Vec> patterns;        // saturated mode: sorted distinct patterns

  // resolved accessors: for each design column, -1 => "a", -2 => "t",
  // otherwise index into the covariate vector
  std::vector<int> col_ix;
  std::vector<std::array<int, 2>> inter_ix;

  int n_terms() const {
    if (spec.saturated) return static_cast<int>(patterns.size());
    int n = spec.intercept ? 1 : 0;
    if (spec.time_encoding == "indicators")
      n = tau;  // dummies replace the intercept
    else if (spec.time_encoding == "linear")
      n += 1;
    n += static_cast<int>(col_ix.size());
    n += static_cast<int>(inter_ix.size());
    return n;
  }

  std::vector<std::string> term_names() const {
    std::vector<std::string> out;
    if (spec.saturated) {
      for (const auto& p : patterns) {
        std::string s = "pat(";
        for (std::size_t i = 0; i < p.size(); ++i) {
          if (i) s += ",";
          s += std::to_string(p[i]);
        }
        out.push_back(s + ")");
      }
      return out;
    }
    if (spec.time_encoding == "indicators") {
      for (int t = 1; t <= tau; ++t) out.push_back("t@" + std::to_string(t));
    } else {
      if (spec.intercept) out.emplace_back("(intercept)");
      if (spec.time_encoding == "linear") out.emplace_back("t");
    }
    for (const auto& c : spec.columns) out.push_back(c);
    for (const auto& p : spec.interactions) out.push_back(p[0] + ":" + p[1]);
    return out;
  }

  double value_of(int ix, const CovRow& r) const {
    if (ix == -1) return r.a;
    if (ix == -2) return r.t;
    return (*r.w)[static_cast<std::size_t>(ix)];
  }

  Vec pattern_of(const CovRow& r) const {
    Vec key;
    key.reserve(col_ix.size());
    for (int ix : col_ix) key.push_back(value_of(ix, r));
    return key;
  }

  void row(const CovRow& r, Vec& out) const {
    out.clear();
    if (spec.saturated) {
      out.assign(patterns.size(), 0.0);
      const Vec key = pattern_of(r);
      const auto it = std::lower_bound(patterns.begin(), patterns.end(), key);
      if (it != patterns.end() && *it == key)
        out[static_cast<std::size_t>(it - patterns.begin())] = 1.0;
      return;
    }
    if (spec.time_encoding == "indicators") {
      for (int t = 1; t <= tau; ++t) out.push_back(r.t == t ? 1.0 : 0.0);
    } else {
      if (spec.intercept) out.push_back(1.0);
      if (spec.time_encoding == "linear") out.push_back(r.t);
    }
    for (int ix : col_ix) out.push_back(value_of(ix, r));
    for (const auto& pr : inter_ix)
      out.push_back(value_of(pr[0], r) * value_of(pr[1], r));
  }

  Vec row(const CovRow& r) const {
    Vec out;
    row(r, out);
    return out;
  }
};

inline int resolve_column(const std::string& name, const std::vector<std::string>& names) {
  if (name == "a") return -1;
  if (name == "t") return -2;
  for (std::size_t i = 0; i < names.size(); ++i)
    if (names[i] == name) return static_cast<int>(i);
  throw SchemaMismatch("design references unknown column: " + name);
}

inline ResolvedDesign resolve_design(const DesignSpec& spec,
                                     const std::vector<std::string>& names, int tau = 0) {
  ResolvedDesign rd;
  rd.spec = spec;
  rd.names = names;
  rd.tau = tau;
  if (spec.time_encoding != "none" && spec.time_encoding != "linear" &&
      spec.time_encoding != "indicators")
    throw SchemaMismatch("unknown time_encoding: " + spec.time_encoding);
  if (spec.time_encoding == "indicators" && tau < 1)
    throw SchemaMismatch("time indicators require tau >= 1");
  for (const auto& c : spec.columns) rd.col_ix.push_back(resolve_column(c, names));
  for (const auto& p : spec.interactions) {
    const auto hit = [&](const std::string& c) {
      if (c != "a" && c != "t" &&
          std::find(spec.columns.begin(), spec.columns.end(), c) == spec.columns.end())
        throw SchemaMismatch("interaction references column not in design: " + c);
      return resolve_column(c, names);
    };
    rd.inter_ix.push_back({hit(p[0]), hit(p[1])});
  }
  return rd;
}

// For saturated designs the indicator set is learned from the fitting rows;
// patterns are sorted so the fit is invariant to row order.
inline void learn_patterns(ResolvedDesign& rd, const std::vector<CovRow>& rows) {
  if (!rd.spec.saturated) return;
  std::vector<Vec> pats;
  for (const auto& r : rows) pats.push_back(rd.pattern_of(r));
  std::sort(pats.begin(), pats.end());
  pats.erase(std::unique(pats.begin(), pats.end()), pats.end());
  rd.patterns = std::move(pats);
}

inline void to_json(ordered_json& j, const ResolvedDesign& rd) {
  ordered_json spec_j;
  to_json(spec_j, rd.spec);
  j = ordered_json{{"spec", spec_j}, {"names", rd.names}, {"tau", rd.tau}};
  ordered_json pats = ordered_json::array();
  for (const auto& p : rd.patterns) pats.push_back(p);
  j["patterns"] = pats;
}

inline ResolvedDesign resolved_design_from_json(const json& j) {
  const DesignSpec spec = design_spec_from_json(j.at("spec"));
  ResolvedDesign rd = resolve_design(spec, j.at("names").get<std::vector<std::string>>(),
                                     j.value("tau", 0));
  if (j.contains("patterns"))
    for (const auto& p : j.at("patterns")) rd.patterns.push_back(p.get<Vec>());
  return rd;
}

}  // namespace transtmle
