#include <catch2/catch_amalgamated.hpp>

#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <sstream>
#include <string>

#include "support/fixtures.hpp"
#include "transtmle/dgp.hpp"
#include "transtmle/report.hpp"

using namespace transtmle;

namespace {

const std::string kCli = TRANSTMLE_CLI_PATH;
const std::string kDir = "/tmp/transtmle_cli_test";

int run(const std::string& args, std::string* out = nullptr) {
  const std::string cmd = kCli + " " + args + " >" + kDir + "/stdout.txt 2>" + kDir + "/stderr.txt";
  const int rc = std::system(cmd.c_str());
  if (out) {
    std::ifstream in(kDir + "/stdout.txt");
    std::ostringstream ss;
    ss << in.rdbuf();
    *out = ss.str();
  }
  return WEXITSTATUS(rc);
}

void write_file(const std::string& path, const std::string& content) {
  std::ofstream out(path);
  out << content;
}

std::string slurp(const std::string& path) {
  std::ifstream in(path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

struct CliFixture {
  CliFixture() {
    std::system(("mkdir -p " + kDir).c_str());
    ordered_json spec_j;
    to_json(spec_j, fixtures::missing_dgp());
    write_file(kDir + "/dgp.json", spec_j.dump(2));
    ordered_json surv_j;
    to_json(surv_j, fixtures::survival_dgp());
    write_file(kDir + "/dgp_surv.json", surv_j.dump(2));
    write_file(kDir + "/cfg.json", R"({
      "estimand": "missing-outcome",
      "v_columns": ["w1"],
      "w_columns": ["w1", "w2"],
      "designs": {"q_bar": {"columns": ["w1", "w2", "a"], "interactions": [["a", "w1"]]}}
    })");
    write_file(kDir + "/cfg_surv.json", R"({
      "estimand": "survival",
      "w_columns": ["w1", "w2"],
      "t0": 4,
      "tau": 6
    })");
  }
};

}  // namespace

TEST_CASE("cli: help exits zero") {
  CliFixture fx;
  CHECK(run("--help") == 0);
  CHECK(run("estimate --help") == 0);
}

TEST_CASE("cli: simulate, validate, truth, estimate round trip") {
  CliFixture fx;
  REQUIRE(run("simulate --spec " + kDir + "/dgp.json --n 1200 --seed 7 --out " + kDir +
              "/data.csv") == 0);
  CHECK(run("validate --data " + kDir + "/data.csv --config " + kDir + "/cfg.json") == 0);

  std::string truth_out;
  REQUIRE(run("truth --spec " + kDir + "/dgp.json", &truth_out) == 0);
  const json tj = json::parse(truth_out);
  CHECK(tj.contains("ate"));

  REQUIRE(run("estimate --data " + kDir + "/data.csv --config " + kDir + "/cfg.json --out " +
              kDir + "/report.json --eic-out " + kDir + "/eic.csv") == 0);
  const json rj = json::parse(slurp(kDir + "/report.json"));
  CHECK(rj.at("n") == 1200);
  CHECK(std::abs(rj.at("ate").get<double>() - tj.at("ate").get<double>()) < 0.15);
  CHECK(rj.at("ci_lo").get<double>() < rj.at("ci_hi").get<double>());
  const std::string eic = slurp(kDir + "/eic.csv");
  CHECK(eic.rfind("unit,d_v,d_y,d_wv,total", 0) == 0);

  // determinism: identical args give byte-identical reports
  REQUIRE(run("estimate --data " + kDir + "/data.csv --config " + kDir + "/cfg.json --out " +
              kDir + "/report2.json") == 0);
  CHECK(slurp(kDir + "/report.json") == slurp(kDir + "/report2.json"));
}

TEST_CASE("cli: survival estimation pipeline") {
  CliFixture fx;
  REQUIRE(run("simulate --spec " + kDir + "/dgp_surv.json --n 1500 --seed 9 --out " + kDir +
              "/surv.csv") == 0);
  CHECK(run("validate --data " + kDir + "/surv.csv --config " + kDir + "/cfg_surv.json") == 0);
  REQUIRE(run("estimate-survival --data " + kDir + "/surv.csv --config " + kDir +
              "/cfg_surv.json --out " + kDir + "/surv_report.json") == 0);
  const json rj = json::parse(slurp(kDir + "/surv_report.json"));
  CHECK(rj.at("estimand") == "survival");
  CHECK(rj.contains("ipctw1"));
}

TEST_CASE("cli: malformed input exits 2") {
  CliFixture fx;
  write_file(kDir + "/bad.csv", "s,w1,w2,a,delta,y\n1,oops,1,1,1,0\n0,1,,,,\n");
  CHECK(run("estimate --data " + kDir + "/bad.csv --config " + kDir + "/cfg.json") == 2);
  write_file(kDir + "/bad_cfg.json", "{ not json");
  CHECK(run("estimate --data " + kDir + "/bad.csv --config " + kDir + "/bad_cfg.json") == 2);
  CHECK(run("estimate --data " + kDir + "/does_not_exist.csv --config " + kDir + "/cfg.json") ==
        2);
}

TEST_CASE("cli: export and apply reproduce the less-aggressive report") {
  CliFixture fx;
  REQUIRE(run("simulate --spec " + kDir + "/dgp.json --n 1000 --seed 17 --out " + kDir +
              "/src.csv") == 0);
  std::string fit_stdout;
  REQUIRE(run("export-model --data " + kDir + "/src.csv --config " + kDir +
                  "/cfg.json --out " + kDir + "/bundle.json",
              &fit_stdout) == 0);
  const json fit_report = json::parse(fit_stdout);

  // target covariates: the s=0 rows of the source file
  std::ifstream in(kDir + "/src.csv");
  std::ofstream tgt(kDir + "/target.csv");
  tgt << "w1\n";
  std::string line;
  std::getline(in, line);  // header
  while (std::getline(in, line)) {
    if (line.rfind("0,", 0) == 0) {
      const auto c1 = line.find(',');
      const auto c2 = line.find(',', c1 + 1);
      tgt << line.substr(c1 + 1, c2 - c1 - 1) << "\n";
    }
  }
  tgt.close();

  REQUIRE(run("apply-model --bundle " + kDir + "/bundle.json --target " + kDir +
              "/target.csv --out " + kDir + "/applied.json") == 0);
  const json aj = json::parse(slurp(kDir + "/applied.json"));
  CHECK(aj.at("ate").get<double>() ==
        Catch::Approx(fit_report.at("ate").get<double>()).margin(1e-12));
  CHECK(aj.at("sigma_n").get<double>() ==
        Catch::Approx(fit_report.at("sigma_n").get<double>()).margin(1e-12));

  // tampered version is rejected
  json bundle = json::parse(slurp(kDir + "/bundle.json"));
  bundle["format_version"] = 3;
  write_file(kDir + "/bundle_v3.json", bundle.dump());
  CHECK(run("apply-model --bundle " + kDir + "/bundle_v3.json --target " + kDir +
            "/target.csv") == 2);
}

TEST_CASE("cli: study smoke run emits both estimator columns") {
  CliFixture fx;
  std::string out;
  REQUIRE(run("study --spec " + kDir + "/dgp.json --reps 4 --n 500 --seed 3 --jobs 2 --out " +
                  kDir + "/study.csv",
              &out) == 0);
  CHECK(out.find("full") != std::string::npos);
  CHECK(out.find("less-aggressive") != std::string::npos);
  const std::string csv = slurp(kDir + "/study.csv");
  CHECK(csv.find("estimand,scenario,estimator") == 0);
  CHECK(csv.find("both-correct") != std::string::npos);
  CHECK(csv.find("neither") != std::string::npos);
}
