#include <gtest/gtest.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>

#include <nlohmann/json.hpp>

#include "fairlens/cli.hpp"

namespace fs = std::filesystem;

namespace {

const std::string kDir = FAIRLENS_FIXTURES;
const std::string kSchema = kDir + "/credit.schema.json";

struct Run {
  int code;
  std::string out;
  std::string err;
};

Run run(std::vector<std::string> args) {
  std::ostringstream out, err;
  const int code = fairlens::cli::run(args, out, err);
  return {code, out.str(), err.str()};
}

std::vector<std::string> audit_args(const std::string& csv) {
  return {"audit", "--data", kDir + "/" + csv, "--schema", kSchema, "--protected", "sex",
          "--metric", "demographic_parity:0.1", "--metric", "equalized_odds:0.1"};
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  return {std::istreambuf_iterator<char>(in), {}};
}

class TempDir {
 public:
  TempDir() : path_(fs::temp_directory_path() / ("fairlens_cli_" + std::to_string(::testing::UnitTest::GetInstance()->random_seed()) + "_" +
                                                 ::testing::UnitTest::GetInstance()->current_test_info()->name())) {
    fs::create_directories(path_);
  }
  ~TempDir() { fs::remove_all(path_); }
  std::string file(const std::string& name) const { return (path_ / name).string(); }

 private:
  fs::path path_;
};

}  // namespace

TEST(Cli, AuditPassingFixtureExitsZero) {
  const auto r = run(audit_args("credit_fair.csv"));
  EXPECT_EQ(r.code, 0) << r.err;
  const auto j = nlohmann::json::parse(r.out);
  EXPECT_TRUE(j.at("overall_passed").get<bool>());
  EXPECT_EQ(j.at("tool_version"), "0.1.0");
  EXPECT_EQ(j.at("invocation").at(0), "audit");
}

TEST(Cli, AuditFailingFixtureExitsOne) {
  const auto r = run(audit_args("credit_skewed.csv"));
  EXPECT_EQ(r.code, 1);
  EXPECT_NE(r.err.find("demographic_parity: gap 0.3"), std::string::npos) << r.err;
}

TEST(Cli, InvalidInputExitsTwo) {
  const auto r = run(audit_args("credit_bad_score.csv"));
  EXPECT_EQ(r.code, 2);
  EXPECT_NE(r.err.find("score row 3"), std::string::npos) << r.err;
  EXPECT_EQ(run(audit_args("no_such_file.csv")).code, 2);
  auto args = audit_args("credit_fair.csv");
  args.back() = "equalized_odds:7";
  EXPECT_EQ(run(args).code, 2);
}

TEST(Cli, UsageErrorsExitTwo) {
  EXPECT_EQ(run({}).code, 2);
  EXPECT_EQ(run({"audit", "--data", "x.csv"}).code, 2);
  EXPECT_EQ(run({"frobnicate"}).code, 2);
  auto args = audit_args("credit_fair.csv");
  args.push_back("--bogus");
  EXPECT_EQ(run(args).code, 2);
}

TEST(Cli, HelpAndVersionExitZero) {
  const auto help = run({"--help"});
  EXPECT_EQ(help.code, 0);
  EXPECT_NE(help.out.find("audit"), std::string::npos);
  EXPECT_EQ(run({"audit", "--help"}).code, 0);
  EXPECT_EQ(run({"mitigate", "resample", "--help"}).code, 0);
  const auto version = run({"--version"});
  EXPECT_EQ(version.code, 0);
  EXPECT_NE(version.out.find("0.1.0"), std::string::npos);
  EXPECT_EQ(run({"taxonomy", "list", "--version"}).code, 0);
}

TEST(Cli, DiagnoseGate) {
  const std::vector<std::string> base{"diagnose", "--data", kDir + "/credit_fair.csv", "--schema", kSchema,
                                      "--protected", "sex"};
  auto with_ref = base;
  with_ref.insert(with_ref.end(), {"--reference", kDir + "/reference_shares.json"});
  const auto ok = run(with_ref);
  EXPECT_EQ(ok.code, 0) << ok.err;
  EXPECT_EQ(nlohmann::json::parse(ok.out).at("results").size(), 5u);

  auto strict = base;
  strict.insert(strict.end(), {"--policy", kDir + "/policy_strict.json"});
  EXPECT_EQ(run(strict).code, 1);
}

TEST(Cli, OutputIsByteStable) {
  TempDir tmp;
  auto a = audit_args("credit_fair.csv");
  a.insert(a.end(), {"--out", tmp.file("a.json")});
  auto b = audit_args("credit_fair.csv");
  b.insert(b.end(), {"--out", tmp.file("b.json")});
  ASSERT_EQ(run(a).code, 0);
  ASSERT_EQ(run(b).code, 0);
  auto ja = nlohmann::json::parse(slurp(tmp.file("a.json")));
  auto jb = nlohmann::json::parse(slurp(tmp.file("b.json")));
  // Only the recorded --out path differs between the two invocations.
  ja.erase("invocation");
  jb.erase("invocation");
  EXPECT_EQ(ja.dump(), jb.dump());
  EXPECT_EQ(run(audit_args("credit_fair.csv")).out, run(audit_args("credit_fair.csv")).out);
}

TEST(Cli, SourceDateEpochFixesTimestamp) {
  ::setenv("SOURCE_DATE_EPOCH", "86400", 1);
  const auto r = run(audit_args("credit_fair.csv"));
  ::unsetenv("SOURCE_DATE_EPOCH");
  EXPECT_EQ(nlohmann::json::parse(r.out).at("timestamp"), "1970-01-02T00:00:00Z");
}

TEST(Cli, ResampleSameSeedSameBytes) {
  TempDir tmp;
  auto args = [&](const std::string& name, const std::string& seed) {
    return std::vector<std::string>{"mitigate", "resample", "--data", kDir + "/credit_skewed.csv", "--schema", kSchema,
                                    "--protected", "sex", "--seed", seed, "--csv", tmp.file(name), "--out",
                                    tmp.file(name + ".json")};
  };
  ASSERT_EQ(run(args("one.csv", "7")).code, 0);
  ASSERT_EQ(run(args("two.csv", "7")).code, 0);
  ASSERT_EQ(run(args("three.csv", "8")).code, 0);
  EXPECT_EQ(slurp(tmp.file("one.csv")), slurp(tmp.file("two.csv")));
  EXPECT_NE(slurp(tmp.file("one.csv")), slurp(tmp.file("three.csv")));
  const auto prov = nlohmann::json::parse(slurp(tmp.file("one.csv.json"))).at("provenance");
  EXPECT_EQ(prov.at("seed"), 7);
  EXPECT_EQ(prov.at("technique"), "resample");
}

TEST(Cli, ResampleNeedsSeed) {
  ::unsetenv("FAIRLENS_SEED");
  const std::vector<std::string> args{"mitigate", "resample", "--data", kDir + "/credit_skewed.csv", "--schema",
                                      kSchema, "--protected", "sex"};
  EXPECT_EQ(run(args).code, 2);
  ::setenv("FAIRLENS_SEED", "3", 1);
  EXPECT_EQ(run(args).code, 0);
  ::unsetenv("FAIRLENS_SEED");
}

TEST(Cli, OtherMitigations) {
  const std::vector<std::string> data{"--data", kDir + "/credit_skewed.csv", "--schema", kSchema, "--protected", "sex"};
  auto with = [&](std::vector<std::string> head, std::vector<std::string> tail) {
    head.insert(head.end(), data.begin(), data.end());
    head.insert(head.end(), tail.begin(), tail.end());
    return run(head);
  };
  const auto rw = with({"mitigate", "reweigh"}, {});
  EXPECT_EQ(rw.code, 0) << rw.err;
  EXPECT_EQ(nlohmann::json::parse(rw.out).at("provenance").at("technique"), "reweigh");
  EXPECT_EQ(with({"mitigate", "thresholds"}, {"--constraint", "demographic_parity:0.05"}).code, 0);
  EXPECT_EQ(with({"mitigate", "reject-option"}, {"--theta", "0.25", "--disadvantaged", "M"}).code, 0);
  EXPECT_EQ(with({"mitigate", "reject-option"}, {"--theta", "0.6", "--disadvantaged", "M"}).code, 2);
  // F labels 24 of 40 positive, M 12 of 40: M = floor(0.3 * 40 * 40 / 80) = 6.
  const auto rl = with({"mitigate", "relabel"}, {"--advantaged", "F", "--disadvantaged", "M"});
  EXPECT_EQ(rl.code, 0) << rl.err;
  EXPECT_EQ(nlohmann::json::parse(rl.out).at("result").at("flipped"), 6);
}

TEST(Cli, TaxonomyCommands) {
  const auto list = run({"taxonomy", "list", "--stage", "1"});
  EXPECT_EQ(list.code, 0);
  EXPECT_NE(list.out.find("| historical_bias | Historical Bias | World |"), std::string::npos);
  const auto exp = run({"taxonomy", "export", "--category", "World"});
  EXPECT_EQ(nlohmann::json::parse(exp.out).size(), 2u);
  EXPECT_EQ(run({"taxonomy", "list", "--stage", "13"}).code, 2);
}

TEST(Cli, ReportPlanFromStages) {
  TempDir tmp;
  {
    std::ofstream in(tmp.file("plan.json"));
    in << R"({"project": "Loan triage", "date_completed": "2024-05-17", "team_members": ["A. Lee"], "stages": [1]})";
  }
  const auto r = run({"report", "plan", "--input", tmp.file("plan.json")});
  EXPECT_EQ(r.code, 0) << r.err;
  EXPECT_NE(r.out.find("| AI Lifecycle Stage | Bias | Category | Risk Mitigation Action |"), std::string::npos);
  EXPECT_NE(r.out.find("| Project Planning | Historical Bias | World Bias |  |"), std::string::npos);

  const auto j = run({"report", "plan", "--input", tmp.file("plan.json"), "--format", "json"});
  EXPECT_EQ(nlohmann::json::parse(j.out).at("kind"), "bias_plan");
}

TEST(Cli, ReportFactsheetFromDiagnoseOutput) {
  TempDir tmp;
  ASSERT_EQ(run({"diagnose", "--data", kDir + "/credit_fair.csv", "--schema", kSchema, "--protected", "sex", "--out",
                 tmp.file("diag.json")})
                .code,
            0);
  nlohmann::json in{{"dataset", "credit"}, {"date_completed", "2024-05-17"}, {"team_members", {"A. Lee"}}};
  in["diagnostics"] = nlohmann::json::parse(slurp(tmp.file("diag.json")));
  for (const char* k : {"data_representativeness", "data_sufficiency", "source_integrity", "data_timeliness",
                        "data_relevance", "training_testing_validating_splits", "unforeseen_data_issues"}) {
    in["qualitative"][k] = "text";
  }
  std::ofstream(tmp.file("fs.json")) << in.dump();
  const auto r = run({"report", "factsheet", "--input", tmp.file("fs.json")});
  EXPECT_EQ(r.code, 0) << r.err;
  EXPECT_NE(r.out.find("## Diagnostic: timeliness"), std::string::npos);

  in["qualitative"].erase("source_integrity");
  std::ofstream(tmp.file("fs2.json")) << in.dump();
  const auto bad = run({"report", "factsheet", "--input", tmp.file("fs2.json")});
  EXPECT_EQ(bad.code, 2);
  EXPECT_NE(bad.err.find("source_integrity"), std::string::npos);
}
