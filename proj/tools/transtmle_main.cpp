// transtmle command line: estimation, simulation, truth computation,
// replication studies and the federated model export/apply workflow.
//
// Exit codes: 0 success, 2 validation/configuration error, 3 numerical
// failure.

#include <CLI11.hpp>

#include <cstdio>
#include <fstream>
#include <iostream>
#include <string>

#include "transtmle/config.hpp"
#include "transtmle/diagnostics.hpp"
#include "transtmle/federated.hpp"
#include "transtmle/study.hpp"

using namespace transtmle;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitValidation = 2;
constexpr int kExitNumeric = 3;

void write_json_file(const ordered_json& j, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw ValidationError("cannot write file: " + path);
  out << j.dump(2) << "\n";
}

void write_eic_csv_missing(const std::vector<EICDecomposition>& rows, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw ValidationError("cannot write file: " + path);
  out << "unit,d_v,d_y,d_wv,total\n";
  for (std::size_t i = 0; i < rows.size(); ++i)
    out << i << "," << detail::format_double(rows[i].d_v) << ","
        << detail::format_double(rows[i].d_y) << "," << detail::format_double(rows[i].d_wv)
        << "," << detail::format_double(rows[i].total) << "\n";
}

void write_eic_csv_survival(const std::vector<SurvivalEIC>& rows, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw ValidationError("cannot write file: " + path);
  out << "unit,d_w,d_lambda,total\n";
  for (std::size_t i = 0; i < rows.size(); ++i)
    out << i << "," << detail::format_double(rows[i].d_w) << ","
        << detail::format_double(rows[i].d_lambda) << ","
        << detail::format_double(rows[i].total) << "\n";
}

DgpSpec read_dgp_spec(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ValidationError("cannot open spec: " + path);
  json j;
  try {
    in >> j;
  } catch (const std::exception& e) {
    throw SchemaMismatch(std::string("spec parse error: ") + e.what());
  }
  return dgp_spec_from_json(j);
}

struct CommonArgs {
  std::string data;
  std::string config;
  std::string out;
  std::string eic_out;
  int t0_override = -1;
  int tau_override = -1;
};

RunConfig load_config(const CommonArgs& a) {
  RunConfig cfg = read_run_config(a.config);
  if (a.t0_override > 0) cfg.t0 = a.t0_override;
  if (a.tau_override > 0) cfg.tau = a.tau_override;
  return cfg;
}

int cmd_validate(const CommonArgs& a) {
  const RunConfig cfg = load_config(a);
  if (cfg.estimand == "missing-outcome") {
    const auto ds = read_outcome_csv(a.data, cfg.outcome_schema());
    std::printf("ok: n=%d n_source=%d n_target=%d missingness=%.4f\n", ds.n, ds.n_source,
                ds.n_target, ds.missingness_rate());
  } else {
    const auto ds = read_survival_csv(a.data, cfg.survival_schema());
    std::printf("ok: n=%d n_source=%d n_target=%d t0=%d tau=%d\n", ds.n, ds.n_source,
                ds.n_target, ds.schema.t0, ds.schema.tau);
  }
  return kExitOk;
}

int cmd_estimate(const CommonArgs& a) {
  const RunConfig cfg = load_config(a);
  ordered_json j;
  if (cfg.estimand == "missing-outcome") {
    const auto ds = read_outcome_csv(a.data, cfg.outcome_schema());
    const auto res = estimate_missing(ds, cfg.nuisance, cfg.missing_opts);
    to_json(j, res.report);
    if (!a.eic_out.empty()) write_eic_csv_missing(res.eic_rows, a.eic_out);
  } else {
    const auto ds = read_survival_csv(a.data, cfg.survival_schema());
    const auto res = estimate_survival(ds, cfg.hazard, cfg.survival_opts);
    to_json(j, res.report);
    if (!a.eic_out.empty()) write_eic_csv_survival(res.eic_rows, a.eic_out);
  }
  if (a.out.empty())
    std::cout << j.dump(2) << "\n";
  else
    write_json_file(j, a.out);
  return kExitOk;
}

int cmd_simulate(const std::string& spec_path, int n, std::uint64_t seed,
                 const std::string& out) {
  const DgpSpec spec = read_dgp_spec(spec_path);
  if (spec.kind == "missing") {
    const auto ds = generate_outcome(spec, n, seed);
    write_outcome_csv(ds, out);
  } else {
    const auto ds = generate_survival(spec, n, seed);
    write_survival_csv(ds, out);
  }
  return kExitOk;
}

int cmd_truth(const std::string& spec_path, long mc_draws, std::uint64_t seed) {
  const DgpSpec spec = read_dgp_spec(spec_path);
  ordered_json j;
  if (mc_draws > 0) {
    to_json(j, true_values_mc(spec, mc_draws, seed));
  } else {
    to_json(j, true_values(spec));
  }
  std::cout << j.dump(2) << "\n";
  return kExitOk;
}

int cmd_study(const std::string& spec_path, int reps, int n, std::uint64_t seed, int jobs,
              const std::string& out) {
  const DgpSpec spec = read_dgp_spec(spec_path);
  if (jobs <= 0) jobs = default_jobs();
  std::vector<ScenarioSummary> cells;
  const DrScenario scenarios[] = {DrScenario::BothCorrect, DrScenario::QOnly, DrScenario::GOnly,
                                  DrScenario::Neither};
  for (const auto sc : scenarios) {
    for (const bool less : {false, true}) {
      if (spec.kind == "missing")
        cells.push_back(study_missing(spec, sc, less, reps, n, seed, jobs));
      else
        cells.push_back(study_survival(spec, sc, less, reps, n, seed, jobs));
    }
  }
  std::ofstream csv;
  if (!out.empty()) {
    csv.open(out);
    if (!csv) throw ValidationError("cannot write file: " + out);
    csv << study_csv_header() << "\n";
  }
  std::printf("%-16s %-13s %-16s %9s %9s %9s %9s %9s %9s\n", "estimand", "scenario",
              "estimator", "truth", "bias", "mc_se", "emp_sd", "mean_se", "coverage");
  for (const auto& c : cells) {
    if (csv.is_open()) csv << study_csv_row(c) << "\n";
    std::printf("%-16s %-13s %-16s %9.4f %9.5f %9.5f %9.5f %9.5f %9.3f\n", c.estimand.c_str(),
                c.scenario.c_str(), c.estimator.c_str(), c.truth, c.bias, c.mc_se, c.emp_sd,
                c.mean_se, c.coverage);
  }
  return kExitOk;
}

int cmd_export_model(const CommonArgs& a) {
  const RunConfig cfg = load_config(a);
  TargetedModelExport bundle;
  ordered_json report_j;
  if (cfg.estimand == "missing-outcome") {
    const auto ds = read_outcome_csv(a.data, cfg.outcome_schema());
    auto res = fit_less_aggressive_missing(ds, cfg.nuisance, cfg.missing_opts);
    bundle = res.bundle;
    to_json(report_j, res.fit.report);
  } else {
    const auto ds = read_survival_csv(a.data, cfg.survival_schema());
    auto res = fit_less_aggressive_survival(ds, cfg.hazard, cfg.survival_opts);
    bundle = res.bundle;
    to_json(report_j, res.fit.report);
  }
  write_export(bundle, a.out);
  std::cout << report_j.dump(2) << "\n";
  return kExitOk;
}

int cmd_apply_model(const std::string& bundle_path, const std::string& target_path,
                    const std::string& out) {
  const TargetedModelExport bundle = read_export(bundle_path);
  const TargetTable target = read_covariate_csv(target_path);
  const EstimateReport rep = apply_export(bundle, target);
  ordered_json j;
  to_json(j, rep);
  if (out.empty())
    std::cout << j.dump(2) << "\n";
  else
    write_json_file(j, out);
  return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Targeted maximum likelihood estimation for transporting treatment effects"};
  app.require_subcommand(1);

  CommonArgs args;
  std::string spec_path, bundle_path, target_path, out_path;
  int n = 1000, reps = 100, jobs = 0;
  long mc_draws = 0;
  std::uint64_t seed = 1;

  auto* validate = app.add_subcommand("validate", "Validate a dataset against the schema");
  validate->add_option("--data", args.data, "input CSV")->required();
  validate->add_option("--config", args.config, "run configuration JSON")->required();

  auto* estimate = app.add_subcommand(
      "estimate", "Transported-effect TMLE for an outcome subject to missingness");
  estimate->add_option("--data", args.data)->required();
  estimate->add_option("--config", args.config)->required();
  estimate->add_option("--out", args.out, "report JSON path (stdout if omitted)");
  estimate->add_option("--eic-out", args.eic_out, "per-unit EIC CSV path");

  auto* estimate_surv = app.add_subcommand(
      "estimate-survival", "Transported-effect TMLE for a right-censored time-to-event outcome");
  estimate_surv->add_option("--data", args.data)->required();
  estimate_surv->add_option("--config", args.config)->required();
  estimate_surv->add_option("--t0", args.t0_override, "horizon override");
  estimate_surv->add_option("--tau", args.tau_override, "grid-end override");
  estimate_surv->add_option("--out", args.out);
  estimate_surv->add_option("--eic-out", args.eic_out);

  auto* simulate = app.add_subcommand("simulate", "Draw a dataset from a DGP spec");
  simulate->add_option("--spec", spec_path)->required();
  simulate->add_option("--n", n)->required();
  simulate->add_option("--seed", seed);
  simulate->add_option("--out", out_path)->required();

  auto* truth = app.add_subcommand("truth", "Ground-truth estimands of a DGP spec");
  truth->add_option("--spec", spec_path)->required();
  truth->add_option("--mc-draws", mc_draws, "use Monte Carlo instead of enumeration");
  truth->add_option("--seed", seed);

  auto* study = app.add_subcommand("study", "Replication study across robustness scenarios");
  study->add_option("--spec", spec_path)->required();
  study->add_option("--reps", reps);
  study->add_option("--n", n);
  study->add_option("--seed", seed);
  study->add_option("--jobs", jobs);
  study->add_option("--out", out_path, "summary CSV path");

  auto* exportm = app.add_subcommand(
      "export-model", "Fit the less-aggressive TMLE and export the targeted model bundle");
  exportm->add_option("--data", args.data)->required();
  exportm->add_option("--config", args.config)->required();
  exportm->add_option("--out", args.out, "bundle JSON path")->required();

  auto* applym = app.add_subcommand(
      "apply-model", "Apply an exported model bundle to target-population covariates");
  applym->add_option("--bundle", bundle_path)->required();
  applym->add_option("--target", target_path)->required();
  applym->add_option("--out", out_path, "report JSON path (stdout if omitted)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e);
  }

  try {
    if (validate->parsed()) return cmd_validate(args);
    if (estimate->parsed()) {
      RunConfig probe = load_config(args);
      if (probe.estimand != "missing-outcome")
        throw SchemaMismatch("estimate requires a missing-outcome config");
      return cmd_estimate(args);
    }
    if (estimate_surv->parsed()) {
      RunConfig probe = load_config(args);
      if (probe.estimand != "survival")
        throw SchemaMismatch("estimate-survival requires a survival config");
      return cmd_estimate(args);
    }
    if (simulate->parsed()) return cmd_simulate(spec_path, n, seed, out_path);
    if (truth->parsed()) return cmd_truth(spec_path, mc_draws, seed);
    if (study->parsed()) return cmd_study(spec_path, reps, n, seed, jobs, out_path);
    if (exportm->parsed()) return cmd_export_model(args);
    if (applym->parsed()) return cmd_apply_model(bundle_path, target_path, out_path);
  } catch (const ValidationError& e) {
    std::cerr << "validation error: " << e.what() << "\n";
    return kExitValidation;
  } catch (const NumericError& e) {
    std::cerr << "numerical error: " << e.what() << "\n";
    return kExitNumeric;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitNumeric;
  }
  return kExitOk;
}
