#include <gtest/gtest.h>

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>

#include <json.hpp>

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

struct Run {
  int status = -1;
  std::string out;
};

Run run(const std::string& args) {
  const std::string cmd = std::string(OCCSIM_CLI_PATH) + " " + args + " 2>/dev/null";
  Run r;
  FILE* pipe = popen(cmd.c_str(), "r");
  if (!pipe) return r;
  char buf[4096];
  std::size_t got;
  while ((got = fread(buf, 1, sizeof buf, pipe)) > 0) r.out.append(buf, got);
  const int raw = pclose(pipe);
  r.status = WIFEXITED(raw) ? WEXITSTATUS(raw) : -1;
  return r;
}

std::string slurp(const fs::path& p) {
  std::ifstream is(p);
  std::stringstream ss;
  ss << is.rdbuf();
  return ss.str();
}

class TempDir {
 public:
  explicit TempDir(const std::string& tag) : path_(fs::temp_directory_path() / ("occsim_cli_" + tag)) {
    fs::remove_all(path_);
    fs::create_directories(path_);
  }
  ~TempDir() { fs::remove_all(path_); }
  const fs::path& path() const { return path_; }
  fs::path write(const std::string& name, const std::string& text) const {
    std::ofstream(path_ / name) << text;
    return path_ / name;
  }

 private:
  fs::path path_;
};

const char* kSmallConfig = R"({
  "l": 2, "k": 32, "alpha": 8, "tau": [1, 2],
  "lambda_grid": {"start": 0.0, "stop": 1.5, "step": 0.5},
  "stop_rule": {"type": "fixed_failures", "count": 10, "max_trials": 500},
  "master_seed": 5
})";

}  // namespace

TEST(Cli, EmptyLambdaGridIsConfigError) {
  TempDir d("empty_grid");
  const auto cfg = d.write("c.json", R"({"lambda_grid": []})");
  EXPECT_EQ(run("simulate " + cfg.string() + " --out " + (d.path() / "o").string()).status, 2);
}

TEST(Cli, MissingOrMalformedConfig) {
  TempDir d("bad_config");
  EXPECT_EQ(run("simulate " + (d.path() / "nope.json").string()).status, 2);
  const auto cfg = d.write("c.json", "{not json");
  EXPECT_EQ(run("simulate " + cfg.string()).status, 2);
  EXPECT_EQ(run("simulate").status, 2);
}

TEST(Cli, BoundsRejectsEpsilonOutsideUnitInterval) {
  EXPECT_EQ(run("bounds --mode cc --epsilon 1.5").status, 2);
  EXPECT_EQ(run("bounds --mode xx").status, 2);
}

TEST(Cli, RankRejectsBadDivisibility) {
  EXPECT_EQ(run("rank --variant irregular-symmetric --k 99 --alpha 40 --gamma 20 --n 107 --trials 10").status, 2);
  EXPECT_EQ(run("rank --variant sideways --trials 10").status, 2);
}

TEST(Cli, RankTooFewRowsReportsCertainFailure) {
  const auto r = run("rank --variant irregular-symmetric --n 50 --k 100 --alpha 40 --gamma 20 --trials 100");
  ASSERT_EQ(r.status, 0);
  std::istringstream is(r.out);
  std::string header, row, verdict;
  std::getline(is, header);
  std::getline(is, row);
  std::getline(is, verdict);
  EXPECT_NE(row.find(",100,100,1,"), std::string::npos) << row;
  const auto v = json::parse(verdict);
  EXPECT_FALSE(v["capacity_ok"].get<bool>());
  EXPECT_FALSE(v["p_hat_at_most_epsilon"].get<bool>());
}

TEST(Cli, BoundsPrintsIntermediateTerms) {
  const std::string args = "bounds --mode occ --l 4 --lambda 1 --alpha 64 --tau 2 --chi 4 --epsilon 0.01";
  // The default correction constant pushes φ negative here.
  EXPECT_EQ(run(args).status, 2);
  const auto r = run(args + " --c-hidden 0");
  ASSERT_EQ(r.status, 0);
  const auto j = json::parse(r.out);
  for (const char* key : {"mu", "phi", "lhs", "rhs"}) EXPECT_TRUE(j["condition"].contains(key)) << key;
  EXPECT_DOUBLE_EQ(j["condition"]["lhs"].get<double>(), 160.0);
  EXPECT_NEAR(j["condition"]["rhs"].get<double>(), -49.9455552261703, 1e-9);
  EXPECT_TRUE(j["aperture_lower_bound"].contains("label"));

  const auto cc = run("bounds --mode cc --l 4 --lambda 1 --alpha 64 --epsilon 0.01 --c-hidden 0");
  ASSERT_EQ(cc.status, 0);
  EXPECT_NEAR(json::parse(cc.out)["condition"]["rhs"].get<double>(), 49.78071905112638, 1e-9);
}

TEST(Cli, OuterBoundInterval) {
  const auto r = run("bounds --theorem-bounds --epsilon 0.1 --q 8 --chi 3 --tau 2");
  ASSERT_EQ(r.status, 0);
  const auto j = json::parse(r.out)["theorem_bounds"];
  EXPECT_NEAR(j["per"][0].get<double>(), 1e-4, 1e-15);
  EXPECT_NEAR(j["mer"][1].get<double>(), 8e-2, 1e-15);
}

TEST(Cli, SimulateIsReproducibleAcrossRunsAndJobs) {
  TempDir d("repro");
  const auto cfg = d.write("c.json", kSmallConfig);
  const auto a = d.path() / "a", b = d.path() / "b", c = d.path() / "c";
  ASSERT_EQ(run("simulate " + cfg.string() + " --out " + a.string() + " --jobs 1").status, 0);
  ASSERT_EQ(run("simulate --config " + cfg.string() + " --out " + b.string() + " --jobs 1").status, 0);
  ASSERT_EQ(run("simulate " + cfg.string() + " --out " + c.string() + " --jobs 3").status, 0);
  for (const char* name : {"sweep_l2_k32_a8_t1.csv", "sweep_l2_k32_a8_t2.csv"}) {
    const auto ref = slurp(a / name);
    ASSERT_FALSE(ref.empty()) << name;
    EXPECT_EQ(ref, slurp(b / name)) << name;
    EXPECT_EQ(ref, slurp(c / name)) << name;
  }
}

TEST(Cli, SeedFlagOverridesConfig) {
  TempDir d("seed");
  const auto cfg = d.write("c.json", kSmallConfig);
  ASSERT_EQ(run("simulate " + cfg.string() + " --out " + (d.path() / "a").string()).status, 0);
  ASSERT_EQ(run("simulate " + cfg.string() + " --seed 6 --out " + (d.path() / "b").string()).status, 0);
  const auto csv = slurp(d.path() / "b" / "sweep_l2_k32_a8_t2.csv");
  EXPECT_NE(csv, slurp(d.path() / "a" / "sweep_l2_k32_a8_t2.csv"));
  EXPECT_NE(csv.find(",6\n"), std::string::npos);
}

TEST(Cli, ManifestReproducesOutputs) {
  TempDir d("manifest");
  const auto cfg = d.write("c.json", kSmallConfig);
  const auto a = d.path() / "a", b = d.path() / "b";
  ASSERT_EQ(run("simulate " + cfg.string() + " --out " + a.string()).status, 0);
  const auto manifest = json::parse(slurp(a / "manifest.json"));
  EXPECT_EQ(manifest["status"], "complete");
  EXPECT_EQ(manifest["experiments"].size(), 2U);
  ASSERT_EQ(manifest["outputs"].size(), 2U);
  ASSERT_EQ(run("simulate " + (a / "manifest.json").string() + " --out " + b.string()).status, 0);
  for (const auto& name : manifest["outputs"]) EXPECT_EQ(slurp(a / name.get<std::string>()), slurp(b / name.get<std::string>()));
}

TEST(Cli, ReportFindsOverheadAndJoins) {
  TempDir d("report");
  const auto f = d.write("sweep.csv",
                         "lambda,n,trials,failures,mer,mer_lo,mer_hi,per_true,per_block,chunk_frac_mean,chunk_frac_std,seed\n"
                         "0.5,48,100,10,0.1,0.05,0.18,0.1,0.1,0.1,0.01,1\n"
                         "1,64,1000,1,0.001,0,0.005,0.001,0.001,0.001,0.001,1\n");
  const auto joined = d.path() / "all.csv";
  const auto r = run("report --metric mer --target 0.01 --join " + joined.string() + " " + f.string());
  ASSERT_EQ(r.status, 0);
  EXPECT_NE(r.out.find("sweep.csv,mer,0.01,0.75"), std::string::npos) << r.out;
  const auto j = slurp(joined);
  EXPECT_EQ(j.substr(0, 14), "source,lambda,");
  EXPECT_NE(j.find("sweep.csv,1,64,"), std::string::npos);
  EXPECT_EQ(run("report --metric ber " + f.string()).status, 2);
  EXPECT_EQ(run("report " + (d.path() / "missing.csv").string()).status, 1);
}
