// Command-line front end: fit, test, bench and selftest.

#include <fstream>
#include <iostream>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "tglm/tglm.hpp"

namespace {

enum ExitCode : int { ok = 0, input_error = 1, numerical_error = 2, cross_check_error = 3 };

struct CommonArgs {
  std::string data;
  std::string outcome;
  std::vector<std::string> regressors;
  std::string group;
  std::string backend = "both";
  std::string report;
  std::string inject_fault;
};

void add_model_options(CLI::App* cmd, CommonArgs& a) {
  cmd->add_option("--data", a.data, "input CSV with a header row")->required();
  cmd->add_option("--outcome", a.outcome, "outcome column")->required();
  cmd->add_option("--regressors", a.regressors, "regressor columns, in order")->delimiter(',');
  cmd->add_option("--group", a.group, "group label column")->required();
  cmd->add_option("--backend", a.backend, "tensor, staggered or both (cross-checked)")
      ->check(CLI::IsMember({"tensor", "staggered", "both"}));
  cmd->add_option("--report", a.report, "write the structured JSON report here");
  // Test hook, hidden from --help.
  cmd->add_option("--inject-fault", a.inject_fault)->group("")->check(CLI::IsMember({"tensor", "staggered"}));
}

void write_text(const std::string& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw tglm::Error(tglm::ErrorKind::io_failure, "cannot write \"" + path + "\"");
  out << text;
}

int run_model(const CommonArgs& a, const std::optional<std::string>& contrasts_path, bool f_test) {
  const tglm::ModelSpec spec{a.outcome, a.regressors, a.group};
  const auto loaded = tglm::load_csv(a.data, spec);

  std::vector<std::string> params{"intercept"};
  params.insert(params.end(), a.regressors.begin(), a.regressors.end());

  std::optional<tglm::ContrastTensor> contrasts;
  if (contrasts_path) contrasts = tglm::load_contrasts(*contrasts_path, params.size(), loaded.data.group_count);

  tglm::AnalysisOptions opt;
  opt.backend = a.backend == "tensor"      ? tglm::BackendChoice::tensor
                : a.backend == "staggered" ? tglm::BackendChoice::staggered
                                           : tglm::BackendChoice::both;
  opt.f_test = f_test;
  if (a.inject_fault == "tensor") opt.inject_fault = tglm::Backend::tensor;
  if (a.inject_fault == "staggered") opt.inject_fault = tglm::Backend::staggered;

  auto finish = [&](tglm::RunReport report) {
    report.inputs["data"] = tglm::file_digest(a.data);
    if (contrasts_path) report.inputs["contrasts"] = tglm::file_digest(*contrasts_path);
    tglm::write_report_table(std::cout, report);
    if (!a.report.empty()) write_text(a.report, tglm::serialize_report(report));
  };

  try {
    finish(tglm::run_analysis(loaded, params, contrasts ? &*contrasts : nullptr, opt));
  } catch (const tglm::CrossCheckFailure& e) {
    finish(e.report());
    std::cerr << "error: cross-check failed: " << e.what() << '\n';
    return cross_check_error;
  }
  return ok;
}

int run_bench(const tglm::BenchConfig& cfg, const std::string& report_path) {
  const auto report = tglm::run_benchmark(cfg);
  tglm::write_bench_table(std::cout, report);
  if (!report_path.empty()) {
    std::ofstream out(report_path, std::ios::binary);
    if (!out) throw tglm::Error(tglm::ErrorKind::io_failure, "cannot write \"" + report_path + "\"");
    tglm::write_bench_csv(out, report);
  }
  int code = ok;
  for (const auto& row : report.rows) {
    if (!row.failed) continue;
    if (row.status.find("deviation") != std::string::npos) return cross_check_error;
    code = numerical_error;
  }
  return code;
}

int run_selftest(std::uint64_t seed, std::size_t instances) {
  const auto cases = tglm::run_equivalence_suite(seed, instances);
  std::size_t failed = 0;
  double worst_beta = 0.0;
  double worst_t = 0.0;
  for (const auto& c : cases) {
    failed += !c.passed;
    worst_beta = std::max(worst_beta, c.beta_deviation);
    worst_t = std::max(worst_t, c.t_deviation);
  }
  std::cout << "equivalence: " << (cases.size() - failed) << "/" << cases.size()
            << " instances agree (worst beta deviation " << worst_beta << ", worst t deviation " << worst_t << ")\n";
  return failed == 0 ? ok : cross_check_error;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Grouped general linear model in tensor and staggered formulations"};
  app.require_subcommand(1);

  CommonArgs fit_args;
  auto* fit_cmd = app.add_subcommand("fit", "fit per-group coefficients and residual variance");
  add_model_options(fit_cmd, fit_args);

  CommonArgs test_args;
  std::string contrasts;
  bool f_test = false;
  auto* test_cmd = app.add_subcommand("test", "fit and test contrast hypotheses");
  add_model_options(test_cmd, test_args);
  test_cmd->add_option("--contrasts", contrasts, "contrast CSV (hypothesis,group,param,coeff)")->required();
  test_cmd->add_flag("--f-test", f_test, "also report the joint F statistic");

  tglm::BenchConfig bench_cfg;
  std::string bench_report;
  auto* bench_cmd = app.add_subcommand("bench", "compare storage and operation counts of both formulations");
  bench_cmd->add_option("--groups", bench_cfg.groups, "group counts to sweep")->delimiter(',');
  bench_cmd->add_option("--regressors", bench_cfg.regressors, "regressor counts to sweep")->delimiter(',');
  bench_cmd->add_option("--samples", bench_cfg.samples, "samples per group to sweep")->delimiter(',');
  bench_cmd->add_option("--seed", bench_cfg.seed, "data generator seed");
  bench_cmd->add_option("--repetitions", bench_cfg.repetitions, "timed repetitions per point")
      ->check(CLI::PositiveNumber);
  bench_cmd->add_option("--report", bench_report, "write the CSV report here");

  std::uint64_t self_seed = 20240101;
  std::size_t self_instances = 100;
  auto* self_cmd = app.add_subcommand("selftest", "check tensor and staggered results agree on random instances");
  self_cmd->add_option("--seed", self_seed, "instance generator seed");
  self_cmd->add_option("--instances", self_instances, "number of random instances");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? ok : input_error;
  }

  try {
    if (*fit_cmd) return run_model(fit_args, std::nullopt, false);
    if (*test_cmd) return run_model(test_args, contrasts, f_test);
    if (*bench_cmd) {
      for (auto v : bench_cfg.groups) {
        if (v == 0) throw tglm::Error(tglm::ErrorKind::shape_mismatch, "--groups entries must be positive");
      }
      for (auto v : bench_cfg.samples) {
        if (v == 0) throw tglm::Error(tglm::ErrorKind::shape_mismatch, "--samples entries must be positive");
      }
      return run_bench(bench_cfg, bench_report);
    }
    if (*self_cmd) return run_selftest(self_seed, self_instances);
  } catch (const tglm::Error& e) {
    std::cerr << "error: " << e.what() << '\n';
    return e.category() == tglm::ErrorCategory::numerical ? numerical_error : input_error;
  }
  return input_error;
}
