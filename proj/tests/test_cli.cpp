#include <gtest/gtest.h>

#include "cli_runner.hpp"
#include "tglm/io.hpp"

using namespace tglm::testing;

namespace {

const std::string kCli = TGLM_CLI_PATH;
const std::string kSamples = TGLM_SAMPLES_DIR;

std::string model_args(const std::string& data) {
  return " --data " + data + " --outcome response --regressors dose --group condition";
}

}  // namespace

TEST(Cli, FitNoiselessData) {
  TempDir dir;
  write_file(dir / "d.csv", "y,x,g\n1,0,a\n3,1,a\n5,2,a\n-1,0,b\n0,1,b\n1,2,b\n");
  const auto r = run_command(kCli + " fit --data " + (dir / "d.csv").string() + " --outcome y --regressors x --group g" +
                             " --report " + (dir / "r.json").string());
  EXPECT_EQ(r.exit_code, 0) << r.out;
  EXPECT_NE(r.out.find("intercept"), std::string::npos);
  const auto report = tglm::parse_report(read_file(dir / "r.json"));
  ASSERT_EQ(report.beta.size(), 2u);
  EXPECT_NEAR(report.beta[0][0], 1.0, 1e-12);
  EXPECT_NEAR(report.beta[0][1], 2.0, 1e-12);
  EXPECT_NEAR(report.beta[1][0], -1.0, 1e-12);
  EXPECT_NEAR(report.beta[1][1], 1.0, 1e-12);
  EXPECT_EQ(report.command, "fit");
  EXPECT_EQ(report.inputs.count("data"), 1u);
}

TEST(Cli, TestWritesRoundTrippableReport) {
  TempDir dir;
  const auto r = run_command(kCli + " test" + model_args(kSamples + "/two_groups.csv") + " --contrasts " + kSamples +
                             "/two_hypotheses.csv --f-test --report " + (dir / "r.json").string());
  ASSERT_EQ(r.exit_code, 0);
  const auto text = read_file(dir / "r.json");
  const auto report = tglm::parse_report(text);
  EXPECT_EQ(tglm::serialize_report(report), text);
  EXPECT_EQ(report.hypotheses.size(), 2u);
  EXPECT_TRUE(report.f.has_value());
  EXPECT_LT(*report.beta_deviation, 1e-9);
  EXPECT_LT(*report.t_deviation, 1e-9);
}

TEST(Cli, BackendsReportSameStatistics) {
  TempDir dir;
  for (const std::string backend : {"tensor", "staggered"}) {
    const auto r = run_command(kCli + " test" + model_args(kSamples + "/two_groups.csv") + " --contrasts " + kSamples +
                               "/slope_difference.csv --backend " + backend + " --report " +
                               (dir / (backend + ".json")).string());
    ASSERT_EQ(r.exit_code, 0) << backend;
  }
  const auto t = tglm::parse_report(read_file(dir / "tensor.json"));
  const auto s = tglm::parse_report(read_file(dir / "staggered.json"));
  EXPECT_NEAR(t.hypotheses[0].t, s.hypotheses[0].t, 1e-9 * std::abs(s.hypotheses[0].t));
  EXPECT_NEAR(t.sigma2, s.sigma2, 1e-9 * s.sigma2);
}

TEST(Cli, InjectedFaultTripsCrossCheck) {
  for (const std::string side : {"tensor", "staggered"}) {
    const auto r = run_command(kCli + " test" + model_args(kSamples + "/two_groups.csv") + " --contrasts " + kSamples +
                               "/slope_difference.csv --backend both --inject-fault " + side);
    EXPECT_EQ(r.exit_code, 3) << side;
  }
  // A single backend has nothing to cross-check against.
  const auto r = run_command(kCli + " fit" + model_args(kSamples + "/two_groups.csv") +
                             " --backend tensor --inject-fault tensor");
  EXPECT_EQ(r.exit_code, 0);
}

TEST(Cli, InputErrorsExitOne) {
  EXPECT_EQ(run_command(kCli + " fit --data " + kSamples + "/two_groups.csv --outcome response --group nope").exit_code,
            1);
  EXPECT_EQ(run_command(kCli + " fit --data /nonexistent.csv --outcome y --group g").exit_code, 1);
  EXPECT_EQ(run_command(kCli + " frobnicate").exit_code, 1);
  EXPECT_EQ(run_command(kCli + " fit" + model_args(kSamples + "/two_groups.csv") + " --backend magic").exit_code, 1);
  EXPECT_EQ(run_command(kCli + " --help").exit_code, 0);
}

TEST(Cli, SingularDesignExitsTwo) {
  TempDir dir;
  write_file(dir / "d.csv", "y,x,z,g\n1,1,1,a\n2,2,2,a\n3,3,3,a\n4,4,4,a\n");
  const auto r =
      run_command(kCli + " fit --data " + (dir / "d.csv").string() + " --outcome y --regressors x,z --group g");
  EXPECT_EQ(r.exit_code, 2);
}

TEST(Cli, BenchCountsAreByteIdentical) {
  TempDir dir;
  const std::string args = " bench --groups 1,2,4,8 --regressors 1 --samples 32 --seed 7 --report ";
  ASSERT_EQ(run_command(kCli + args + (dir / "a.csv").string()).exit_code, 0);
  ASSERT_EQ(run_command(kCli + args + (dir / "b.csv").string()).exit_code, 0);
  const auto a = read_file(dir / "a.csv");
  EXPECT_EQ(bench_count_columns(a), bench_count_columns(read_file(dir / "b.csv")));
  EXPECT_EQ(std::count(a.begin(), a.end(), '\n'), 9);
}

TEST(Cli, Selftest) {
  const auto r = run_command(kCli + " selftest --instances 25 --seed 3");
  EXPECT_EQ(r.exit_code, 0);
  EXPECT_NE(r.out.find("25/25"), std::string::npos) << r.out;
}

TEST(Cli, GroupOrderStableUnderWithinGroupPermutation) {
  TempDir dir;
  write_file(dir / "a.csv", "y,x,g\n1,0,t\n2,1,c\n3,2,t\n5,3,c\n4,5,t\n7,4,c\n");
  write_file(dir / "b.csv", "y,x,g\n4,5,t\n7,4,c\n3,2,t\n2,1,c\n1,0,t\n5,3,c\n");
  for (const std::string name : {"a", "b"}) {
    ASSERT_EQ(run_command(kCli + " fit --data " + (dir / (name + ".csv")).string() +
                          " --outcome y --regressors x --group g --report " + (dir / (name + ".json")).string())
                  .exit_code,
              0);
  }
  const auto a = tglm::parse_report(read_file(dir / "a.json"));
  const auto b = tglm::parse_report(read_file(dir / "b.json"));
  EXPECT_EQ(a.groups, (std::vector<std::string>{"t", "c"}));
  EXPECT_EQ(a.groups, b.groups);
  for (std::size_t g = 0; g < 2; ++g)
    for (std::size_t p = 0; p < 2; ++p) EXPECT_NEAR(a.beta[g][p], b.beta[g][p], 1e-12);
}
