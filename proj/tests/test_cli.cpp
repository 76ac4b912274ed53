#include <fstream>
#include <sstream>

#include <gtest/gtest.h>
#include <nlohmann/json.hpp>

#include "cli.hpp"
#include "psi/manifest.hpp"
#include "psi/report.hpp"
#include "psi/synth.hpp"
#include "support.hpp"

using namespace psi;
using psi::testing::TempDir;

namespace {

struct Result {
  int code;
  std::string out;
  std::string err;
};

Result run(std::vector<std::string> args) {
  std::ostringstream out, err;
  const int code = cli::run(args, out, err);
  return {code, out.str(), err.str()};
}

std::string slurp(const std::filesystem::path& p) {
  std::ifstream in(p, std::ios::binary);
  return {std::istreambuf_iterator<char>(in), {}};
}

std::string str(const std::filesystem::path& p) { return p.string(); }

}  // namespace

TEST(Cli, HelpAndUsageErrors) {
  EXPECT_EQ(run({"--help"}).code, cli::kExitOk);
  EXPECT_EQ(run({}).code, cli::kExitUsage);
  EXPECT_EQ(run({"frobnicate"}).code, cli::kExitUsage);
  const auto r = run({"analyze"});
  EXPECT_EQ(r.code, cli::kExitUsage);
  EXPECT_EQ(nlohmann::json::parse(r.err).at("error"), "usage");
}

TEST(Cli, SynthRejectsOutOfRangeHurst) {
  TempDir dir;
  const auto r = run({"synth", "--kind", "fgn", "--hurst", "1.5", "--out", str(dir / "x")});
  EXPECT_EQ(r.code, cli::kExitUsage);
  EXPECT_EQ(nlohmann::json::parse(r.err).at("error"), "config");
}

TEST(Cli, AnalyzeFgnTrial) {
  TempDir dir;
  ASSERT_EQ(run({"synth", "--kind", "fgn", "--hurst", "0.7", "--seed", "3", "--out", str(dir.path())}).code, 0);
  const auto file = str(dir / "fgn_00.psia");
  const auto a = run({"analyze", file});
  ASSERT_EQ(a.code, 0) << a.err;
  const auto j = nlohmann::json::parse(a.out);
  EXPECT_NEAR(j.at("h_raw").get<double>(), 0.7, 0.08);
  EXPECT_TRUE(j.contains("config"));
  EXPECT_FALSE(j.contains("psi"));
  EXPECT_EQ(run({"analyze", file}).out, a.out);

  const auto csv = run({"analyze", file, "--format", "csv", "--fluctuations", str(dir / "f.csv"), "--sync",
                        str(dir / "r.csv")});
  ASSERT_EQ(csv.code, 0);
  EXPECT_EQ(csv.out.rfind("trial_id,condition,h_raw,h_eff,m\n", 0), 0u);
  EXPECT_EQ(slurp(dir / "f.csv").rfind("channel,h,F4,F8,F16,F32\n", 0), 0u);
  EXPECT_EQ(slurp(dir / "r.csv").rfind("t,r\n", 0), 0u);
}

TEST(Cli, AnalyzeConstantChannelExitsDegenerate) {
  TempDir dir;
  Matrix m(64, 3);
  for (std::size_t r = 0; r < 64; ++r) {
    m(r, 0) = std::sin(0.3 * r);
    m(r, 1) = 4.0;
    m(r, 2) = std::cos(0.2 * r);
  }
  save_trial(psi::testing::make_trial(m, "flat"), dir / "flat.psia");
  const auto r = run({"analyze", str(dir / "flat.psia")});
  EXPECT_EQ(r.code, cli::kExitDegenerate);
  const auto j = nlohmann::json::parse(r.err);
  EXPECT_EQ(j.at("error"), "degenerate");
  EXPECT_EQ(j.at("channel"), 1);
}

TEST(Cli, FormatAndCorruptionErrorsExitTwo) {
  TempDir dir;
  std::ofstream(dir / "junk.psia") << "PSIAxxxxxxxxxxxxxxxxxxxx";
  EXPECT_EQ(run({"analyze", str(dir / "junk.psia")}).code, cli::kExitFormat);
  std::ofstream(dir / "bad.csv") << "not,a,results,file\n";
  EXPECT_EQ(run({"stats", str(dir / "bad.csv"), "--out", str(dir.path())}).code, cli::kExitFormat);
  EXPECT_EQ(run({"analyze", str(dir / "missing.psia")}).code, cli::kExitFormat);
}

TEST(Cli, BadFlagsExitUsage) {
  TempDir dir;
  ASSERT_EQ(run({"synth", "--kind", "white", "--t", "64", "--c", "8", "--out", str(dir.path())}).code, 0);
  const auto f = str(dir / "white_00.psia");
  EXPECT_EQ(run({"analyze", f, "--weights", "0.6,0.6"}).code, cli::kExitUsage);
  EXPECT_EQ(run({"analyze", f, "--band-low", "0.2", "--band-high", "0.1"}).code, cli::kExitUsage);
  EXPECT_EQ(run({"analyze", f, "--dfa-scales", "8,4"}).code, cli::kExitUsage);
  EXPECT_EQ(run({"analyze", f, "--format", "xml"}).code, cli::kExitUsage);
  EXPECT_EQ(run({"analyze", f, "--q", "1.5"}).code, cli::kExitUsage);
  EXPECT_EQ(run({"analyze", f, "--trim"}).code, 0);
}

TEST(Cli, IdenticalTrialsAreADegeneratePool) {
  TempDir dir;
  ASSERT_EQ(run({"synth", "--kind", "white", "--t", "64", "--c", "8", "--out", str(dir.path())}).code, 0);
  TrialManifest m;
  m.trials = {{"white_00.psia", Condition::custom("white")}, {"white_00.psia", Condition::custom("white")}};
  save_manifest(m, dir / "twice.json");
  const auto r = run({"batch", str(dir / "twice.json"), "--out", str(dir / "o")});
  EXPECT_EQ(r.code, cli::kExitDegenerate);
  EXPECT_EQ(nlohmann::json::parse(r.err).at("error"), "degenerate");
}

TEST(Cli, KuramotoCouplingOrdersMetastability) {
  TempDir dir;
  const double near = 0.8 * kuramoto_critical_coupling(kDefaultFreqSpread);
  auto mean_m = [&](const std::string& coupling, const std::string& sub) {
    EXPECT_EQ(run({"synth", "--kind", "kuramoto", "--coupling", coupling, "--trials", "3", "--seed", "4", "--out",
                   str(dir / sub)})
                  .code,
              0);
    double sum = 0.0;
    for (int i = 0; i < 3; ++i) {
      const auto r = run({"analyze", str(dir / sub / ("kuramoto_0" + std::to_string(i) + ".psia"))});
      sum += nlohmann::json::parse(r.out).at("m").get<double>();
    }
    return sum / 3;
  };
  EXPECT_LT(mean_m("0", "k0"), mean_m(std::to_string(near), "kc"));
}

TEST(Cli, BatteryPipelineEndToEnd) {
  TempDir dir;
  const auto bat = dir / "bat";
  const auto synth_args = std::vector<std::string>{"synth", "--kind", "battery", "--trials", "4", "--seed", "7",
                                                   "--t", "128", "--c", "32"};
  auto with_out = [](std::vector<std::string> a, const std::filesystem::path& out) {
    a.push_back("--out");
    a.push_back(out.string());
    return a;
  };
  ASSERT_EQ(run(with_out(synth_args, bat)).code, 0);
  ASSERT_EQ(run(with_out(synth_args, dir / "bat2")).code, 0);
  const auto manifest = load_manifest(bat / "manifest.json");
  ASSERT_EQ(manifest.trials.size(), 20u);
  for (const auto& e : manifest.trials) EXPECT_EQ(slurp(bat / e.path), slurp(dir / "bat2" / e.path));

  const auto b1 = run({"batch", str(bat / "manifest.json"), "--threads", "1", "--out", str(dir / "r1")});
  ASSERT_EQ(b1.code, 0) << b1.err;
  const auto b8 = run({"batch", str(bat / "manifest.json"), "--threads", "8", "--out", str(dir / "r8")});
  ASSERT_EQ(b8.code, 0);
  EXPECT_EQ(b1.out, b8.out);
  for (const auto* f : {"results.csv", "summary.csv", "summary.md", "pool.json"})
    EXPECT_EQ(slurp(dir / "r1" / f), slurp(dir / "r8" / f)) << f;

  const auto rows = read_results_csv(dir / "r1" / "results.csv");
  const auto table = condition_table(rows);
  ASSERT_EQ(table.size(), 5u);
  for (const auto& row : table)
    if (row.condition != Condition(ConditionKind::intact_complex)) EXPECT_LT(row.psi.mean, table[0].psi.mean);

  const auto s = run({"stats", str(dir / "r1" / "results.csv"), "--out", str(dir / "r1")});
  ASSERT_EQ(s.code, 0) << s.err;
  EXPECT_LT(nlohmann::json::parse(s.out).at("anova").at("p").get<double>(), 0.05);
  EXPECT_TRUE(std::filesystem::exists(dir / "r1" / "stats.md"));

  const auto rob = run({"robustness", str(bat / "manifest.json"), "--mode", "layers", "--out", str(dir / "r1")});
  ASSERT_EQ(rob.code, 0) << rob.err;
  EXPECT_TRUE(std::filesystem::exists(dir / "r1" / "fig3a_layers.csv"));
  const auto rob_json = nlohmann::json::parse(slurp(dir / "r1" / "robustness_layers.json"));
  EXPECT_TRUE(rob_json.contains("config"));

  const auto rep = run({"report", str(dir / "r1" / "results.csv"), "--stats", str(dir / "r1" / "stats.json"),
                        "--robustness", str(dir / "r1" / "robustness_layers.json"), "--out", str(dir / "rep")});
  ASSERT_EQ(rep.code, 0) << rep.err;
  for (const auto* f : {"report.md", "fig1.csv", "fig2_summary.csv", "fig2_trials.csv", "fig3a_layers.csv"})
    EXPECT_TRUE(std::filesystem::exists(dir / "rep" / f)) << f;
  EXPECT_EQ(rep.out.find("section is omitted"), std::string::npos);

  const auto bare = run({"report", str(dir / "r1" / "results.csv"), "--out", str(dir / "rep2")});
  ASSERT_EQ(bare.code, 0);
  EXPECT_NE(bare.out.find("section is omitted"), std::string::npos);
  EXPECT_EQ(run({"report", str(dir / "r1" / "results.csv"), "--out", str(dir / "rep2")}).out, bare.out);
}

TEST(Cli, TwoConditionStatsHaveOneComparison) {
  TempDir dir;
  std::ofstream(dir / "res.csv") << "trial_id,condition,h_raw,h_eff,m,h_z,m_z,psi\n"
                                 << "a,intact_complex,0,0,0,0,0,1.0\n"
                                 << "b,intact_complex,0,0,0,0,0,1.3\n"
                                 << "c,intact_noisy,0,0,0,0,0,-0.2\n"
                                 << "d,intact_noisy,0,0,0,0,0,0.1\n";
  const auto r = run({"stats", str(dir / "res.csv"), "--out", str(dir.path())});
  ASSERT_EQ(r.code, 0) << r.err;
  const auto j = nlohmann::json::parse(r.out);
  ASSERT_EQ(j.at("comparisons").size(), 1u);
  EXPECT_EQ(j["comparisons"][0]["p_raw"], j["comparisons"][0]["p_adjusted"]);

  std::ofstream(dir / "one.csv") << "trial_id,condition,h_raw,h_eff,m,h_z,m_z,psi\n"
                                 << "a,intact_complex,0,0,0,0,0,1.0\n"
                                 << "b,intact_complex,0,0,0,0,0,1.3\n";
  EXPECT_EQ(run({"stats", str(dir / "one.csv"), "--out", str(dir.path())}).code, cli::kExitDegenerate);
}
