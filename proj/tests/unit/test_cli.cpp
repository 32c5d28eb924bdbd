#include <gtest/gtest.h>
#include <nlohmann/json.hpp>

#include <cstdlib>
#include <filesystem>
#include <iomanip>
#include <sstream>

#include "coinflow/asymptotics.hpp"
#include "coinflow/cli.hpp"
#include "test_util.hpp"

using namespace coinflow;
using coinflow::testing::fresh_dir;
using coinflow::testing::slurp;
using nlohmann::json;
namespace fs = std::filesystem;

namespace {

struct Result {
  int code;
  std::string out;
  std::string err;
};

Result run(std::vector<std::string> args, const cli::Hooks& hooks = {}) {
  std::ostringstream out, err;
  const int code = cli::run(args, out, err, hooks);
  return {code, out.str(), err.str()};
}

std::vector<std::pair<double, double>> read_two_columns(const fs::path& p) {
  std::istringstream in(slurp(p));
  std::string line;
  std::getline(in, line);
  std::vector<std::pair<double, double>> rows;
  while (std::getline(in, line)) {
    const auto comma = line.find(',');
    rows.emplace_back(std::stod(line.substr(0, comma)), std::stod(line.substr(comma + 1)));
  }
  return rows;
}

const std::string kData = COINFLOW_TEST_DATA;

}  // namespace

TEST(CliExact, TwoAgentsOneCoin) {
  const auto dir = fresh_dir("exact");
  const auto r = run({"exact", "--model", "individual", "--n", "2", "--money", "1", "--limit", "0", "--out-dir",
                      dir.string(), "--json"});
  ASSERT_EQ(r.code, 0) << r.err;
  const auto rows = read_two_columns(dir / "exact_pmf.csv");
  ASSERT_EQ(rows.size(), 2u);
  EXPECT_EQ(rows[0], std::make_pair(0.0, 0.5));
  EXPECT_EQ(rows[1], std::make_pair(1.0, 0.5));
  const auto j = json::parse(slurp(dir / "exact_pmf.json"));
  EXPECT_EQ(j["prob"][0], "1/2");
  EXPECT_TRUE(fs::exists(dir / "exact_manifest.json"));
}

TEST(CliExact, LogModeNormalized) {
  const auto dir = fresh_dir("exactlog");
  const auto r = run({"exact", "--model", "collective", "--n", "100", "--money", "10000", "--limit", "2000",
                      "--mode", "log", "--out-dir", dir.string()});
  ASSERT_EQ(r.code, 0) << r.err;
  double sum = 0;
  for (const auto& [c, p] : read_two_columns(dir / "exact_pmf.csv")) sum += p;
  EXPECT_NEAR(sum, 1.0, 1e-12);
}

TEST(CliExact, CapacityExitCode) {
  const auto dir = fresh_dir("exactcap");
  const auto r = run({"exact", "--model", "collective", "--n", "1000", "--money", "50000", "--limit", "10000",
                      "--out-dir", dir.string()});
  EXPECT_EQ(r.code, cli::kCapacity);
  EXPECT_NE(r.err.find("log"), std::string::npos);
}

TEST(CliDensity, ShiftedExponentialValue) {
  const auto dir = fresh_dir("density");
  const auto r = run({"density", "--law", "shifted-exp", "--t", "500", "--limit", "1000", "--grid",
                      "-1000:0:500", "--out-dir", dir.string()});
  ASSERT_EQ(r.code, 0) << r.err;
  const auto rows = read_two_columns(dir / "density_density.csv");
  ASSERT_EQ(rows.size(), 3u);
  EXPECT_NEAR(rows[0].second, 1.0 / 1500, 1e-15);
}

TEST(CliDensity, LaplacePeakIsK) {
  const auto dir = fresh_dir("laplace");
  const auto r = run({"density", "--law", "laplace", "--t", "500", "--rho", "0.2", "--grid", "0:0:1", "--out-dir",
                      dir.string()});
  ASSERT_EQ(r.code, 0) << r.err;
  const auto rows = read_two_columns(dir / "density_density.csv");
  ASSERT_EQ(rows.size(), 1u);
  EXPECT_NEAR(rows[0].second, laplace_params(500, 0.2).K, 1e-15);
}

TEST(CliDensity, BadArgumentsAreUsageErrors) {
  const auto dir = fresh_dir("densitybad");
  EXPECT_EQ(run({"density", "--law", "laplace", "--t", "500", "--rho", "0.2", "--grid", "5:0:1", "--out-dir",
                 dir.string()}).code,
            cli::kUsage);
  EXPECT_EQ(run({"density", "--law", "laplace", "--t", "500", "--rho", "0", "--grid", "0:5:1", "--out-dir",
                 dir.string()}).code,
            cli::kUsage);
}

TEST(CliVerify, DefaultGridPasses) {
  const auto dir = fresh_dir("verify");
  const auto r = run({"verify", "--out-dir", dir.string(), "--threads", "2"});
  ASSERT_EQ(r.code, 0) << r.err;
  const auto j = json::parse(slurp(dir / "verify_report.json"));
  EXPECT_TRUE(j["summary"]["all_passed"].get<bool>());
  EXPECT_EQ(j["summary"]["failed"], 0);
}

TEST(CliVerify, InjectedOffByOneFails) {
  const auto dir = fresh_dir("verifyfault");
  cli::Hooks hooks;
  hooks.lambda = [](ModelKind kind, std::int64_t n, std::int64_t m, std::int64_t l) -> BigCount {
    BigCount v = lambda_formula(kind, n, m, l);
    return kind == ModelKind::collective ? BigCount(v + 1) : v;
  };
  const auto r = run({"verify", "--grid-max-n", "3", "--grid-max-money", "2", "--grid-max-limit", "1",
                      "--out-dir", dir.string()},
                     hooks);
  EXPECT_EQ(r.code, cli::kVerification);
  EXPECT_NE(r.err.find("FAIL"), std::string::npos);
  const auto j = json::parse(slurp(dir / "verify_report.json"));
  EXPECT_FALSE(j["summary"]["all_passed"].get<bool>());
}

TEST(CliVerify, CountsOnly) {
  const auto dir = fresh_dir("verifycounts");
  const auto r = run({"verify", "--counts-only", "--out-dir", dir.string()});
  ASSERT_EQ(r.code, 0) << r.err;
  const auto j = json::parse(slurp(dir / "verify_report.json"));
  EXPECT_GT(j["summary"]["count_checks"].get<int>(), 0);
  EXPECT_EQ(j["summary"]["count_failures"], 0);
}

TEST(CliSimulate, WritesHistogramFromSupportStart) {
  const auto dir = fresh_dir("sim");
  const auto r = run({"simulate", "--model", "collective", "--graph", "named:complete:100", "--money", "50000",
                      "--limit", "10", "--seed", "1", "--burn-in", "0", "--samples", "10", "--skip-exact-tv",
                      "--out-dir", dir.string(), "--threads", "1"});
  ASSERT_EQ(r.code, 0) << r.err;
  const auto text = slurp(dir / "simulate_histogram.csv");
  EXPECT_TRUE(text.starts_with("c,count,frequency\n-10,")) << text.substr(0, 60);
  const auto j = json::parse(slurp(dir / "simulate_diagnostics.json"));
  EXPECT_EQ(j["histogram_total"], 1000);
  EXPECT_TRUE(j["tv_to_exact"].is_null());
  EXPECT_TRUE(fs::exists(dir / "simulate_bank.csv"));
}

TEST(CliSimulate, ReplicasIndependentOfThreadCount) {
  std::string first;
  for (const char* threads : {"1", "4"}) {
    const auto dir = fresh_dir("simthreads");
    const auto r = run({"simulate", "--model", "individual", "--graph", "named:cycle:10", "--money", "30",
                        "--limit", "3", "--seed", "7", "--samples", "500", "--replicas", "8", "--threads", threads,
                        "--out-dir", dir.string()});
    ASSERT_EQ(r.code, 0) << r.err;
    const auto text = slurp(dir / "simulate_histogram.csv") + slurp(dir / "simulate_diagnostics.json");
    if (first.empty()) first = text;
    else EXPECT_EQ(text, first);
  }
}

TEST(CliSimulate, DisconnectedGraphIsRejected) {
  const auto dir = fresh_dir("simdisc");
  const auto r = run({"simulate", "--model", "individual", "--graph", "file:" + kData + "/disconnected.txt",
                      "--money", "4", "--limit", "1", "--seed", "1", "--samples", "10", "--out-dir", dir.string()});
  EXPECT_EQ(r.code, cli::kUsage);
  EXPECT_NE(r.err.find("connect"), std::string::npos) << r.err;
}

TEST(CliFit, RecoversSlopesFromLaplaceSamples) {
  const auto dir = fresh_dir("fit");
  const auto lp = laplace_params(500, 0.2);
  {
    std::ofstream csv(dir / "pmf.csv");
    csv << "c,prob\n" << std::setprecision(17);
    for (int c = -1000; c <= 2000; ++c) csv << c << ',' << laplace_density(c, lp) << '\n';
  }
  const auto r = run({"fit", "--pmf", (dir / "pmf.csv").string(), "--t", "500", "--rho", "0.2", "--out-dir",
                      dir.string()});
  ASSERT_EQ(r.code, 0) << r.err;
  const auto j = json::parse(slurp(dir / "fit_fit.json"));
  EXPECT_LT(j["rel_error"]["a"].get<double>(), 1e-6);
  EXPECT_LT(j["rel_error"]["b"].get<double>(), 1e-6);
  EXPECT_LT(j["rel_error"]["K"].get<double>(), 1e-6);
}

TEST(CliFit, UsageErrors) {
  const auto dir = fresh_dir("fitbad");
  EXPECT_EQ(run({"fit", "--pmf", kData + "/bad_pmf.csv", "--t", "500", "--out-dir", dir.string()}).code,
            cli::kUsage);
  EXPECT_EQ(run({"fit", "--pmf", kData + "/bad_pmf.csv", "--t", "500", "--rho", "0.2", "--out-dir", dir.string()})
                .code,
            cli::kUsage);
}

TEST(CliReplay, ReproducesOutputsByteForByte) {
  const auto a = fresh_dir("replay_a");
  const auto b = fresh_dir("replay_b");
  ASSERT_EQ(run({"simulate", "--model", "collective", "--graph", "named:star:6", "--money", "12", "--limit", "4",
                 "--seed", "3", "--samples", "2000", "--replicas", "2", "--out-dir", a.string()})
                .code,
            0);
  const auto r = run({"replay", "--manifest", (a / "simulate_manifest.json").string(), "--out-dir", b.string()});
  ASSERT_EQ(r.code, 0) << r.err;
  for (const char* f : {"simulate_histogram.csv", "simulate_diagnostics.json", "simulate_bank.csv"})
    EXPECT_EQ(slurp(a / f), slurp(b / f)) << f;
  const auto m = json::parse(slurp(b / "simulate_manifest.json"));
  EXPECT_EQ(m["command"], "simulate");
  EXPECT_TRUE(m.contains("version"));
}

TEST(CliThreads, EnvironmentFallback) {
  ::setenv("COINFLOW_THREADS", "3", 1);
  EXPECT_EQ(cli::resolve_threads(std::nullopt), 3u);
  EXPECT_EQ(cli::resolve_threads(5u), 5u);
  ::setenv("COINFLOW_THREADS", "zero", 1);
  EXPECT_ERROR(cli::resolve_threads(std::nullopt), invalid_parameter);
  ::unsetenv("COINFLOW_THREADS");
  EXPECT_GE(cli::resolve_threads(std::nullopt), 1u);
}

TEST(CliMisc, UnknownCommandAndHelp) {
  EXPECT_EQ(run({"frobnicate"}).code, cli::kUsage);
  EXPECT_EQ(run({}).code, cli::kUsage);
  EXPECT_EQ(run({"--help"}).code, cli::kOk);
  const auto v = run({"--version"});
  EXPECT_EQ(v.code, cli::kOk);
  EXPECT_FALSE(v.out.empty());
}
