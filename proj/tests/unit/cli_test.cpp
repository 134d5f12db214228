#include <gtest/gtest.h>

#include <filesystem>
#include <nlohmann/json.hpp>
#include <sstream>

#include "manirank/cli/commands.hpp"
#include "manirank/cli/io.hpp"
#include "oracle.hpp"

namespace manirank::cli {
namespace {

namespace fs = std::filesystem;
using nlohmann::json;

class CliTest : public ::testing::Test {
 protected:
  void SetUp() override {
    dir_ = fs::temp_directory_path() /
           ("manirank_cli_" + std::string(::testing::UnitTest::GetInstance()->current_test_info()->name()));
    fs::remove_all(dir_);
    fs::create_directories(dir_);
  }
  void TearDown() override { fs::remove_all(dir_); }

  fs::path path(const std::string& name) const { return dir_ / name; }

  fs::path write(const std::string& name, const std::string& content) const {
    write_file_atomic(path(name), content);
    return path(name);
  }

  int cli(std::vector<std::string> args) {
    args.insert(args.begin(), "manirank");
    std::vector<const char*> argv;
    for (const auto& a : args) argv.push_back(a.c_str());
    out_.str("");
    err_.str("");
    return run(static_cast<int>(argv.size()), argv.data(), out_, err_);
  }

  fs::path dir_;
  std::ostringstream out_, err_;
};

// a..f: Gender M M M W W W, Race x y x y x y
constexpr const char* kSixCandidates = "candidate_id,Gender,Race\na,M,x\nb,M,y\nc,M,x\nd,W,y\ne,W,x\nf,W,y\n";
constexpr const char* kSixRankings = "a,b,d,c,e,f\nd,a,e,b,f,c\nb,a,c,d,e,f\n";

TEST_F(CliTest, AggregateWritesConsensusAndReport) {
  write("c.csv", kSixCandidates);
  write("r.csv", kSixRankings);
  ASSERT_EQ(cli({"aggregate", "--method", "fair-borda", "--delta", "0.2", "--candidates", path("c.csv").string(),
                 "--rankings", path("r.csv").string(), "--out", path("out").string()}),
            kExitOk)
      << err_.str();
  const auto report = json::parse(read_file(path("out/report.json")));
  EXPECT_EQ(report["method"], "fair-borda");
  EXPECT_TRUE(report["report"]["satisfied"].get<bool>());
  EXPECT_EQ(report["inputs"]["rankings"]["fnv1a"], fnv1a_hex(kSixRankings));
  EXPECT_FALSE(report.contains("millis"));

  // every reported number is re-derivable from the written consensus
  const auto table = parse_candidates(kSixCandidates);
  const auto consensus = parse_rankings(read_file(path("out/consensus.csv")), table);
  ASSERT_EQ(consensus.size(), 1u);
  const auto base = parse_rankings(kSixRankings, table);
  const auto loss = pd_loss(base, consensus[0]);
  EXPECT_EQ(report["pd_loss"]["num"].get<std::int64_t>(), loss.numerator());
  EXPECT_EQ(report["pd_loss"]["den"].get<std::int64_t>(), loss.denominator());
  const auto index = build_group_index(table);
  for (const auto& e : report["report"]["entities"]) {
    const Rational score(e["score"]["num"].get<std::int64_t>(), e["score"]["den"].get<std::int64_t>());
    if (e["kind"] == "irp") {
      EXPECT_EQ(score, irp(consensus[0], index));
    } else {
      EXPECT_EQ(score, arp(consensus[0], e["name"].get<std::string>(), index));
    }
  }
}

TEST_F(CliTest, EveryMethodRunsAndFairOnesSatisfy) {
  write("c.csv", kSixCandidates);
  write("r.csv", kSixRankings);
  for (auto method : kMethods) {
    const int code = cli({"aggregate", "--method", std::string(method), "--delta", "0.34", "--candidates",
                          path("c.csv").string(), "--rankings", path("r.csv").string(), "--out",
                          path(std::string(method)).string()});
    if (code == kExitRepairStalled) continue;
    ASSERT_EQ(code, kExitOk) << method << ": " << err_.str();
    const auto report = json::parse(read_file(path(std::string(method) + "/report.json")));
    const std::string m(method);
    if (m.rfind("fair-", 0) == 0 || m == "correct-pick") {
      EXPECT_TRUE(report["report"]["satisfied"].get<bool>()) << m;
      EXPECT_FALSE(report["pof"].is_null()) << m;
    }
  }
}

TEST_F(CliTest, ExitCodes) {
  write("c.csv", kSixCandidates);
  write("r.csv", kSixRankings);
  const auto c = path("c.csv").string(), r = path("r.csv").string();
  EXPECT_EQ(cli({"aggregate", "--method", "median", "--candidates", c, "--rankings", r, "--out", path("o").string()}),
            kExitUsage);
  EXPECT_EQ(cli({"aggregate", "--candidates", c}), kExitUsage);
  EXPECT_EQ(cli({"aggregate", "--method", "borda", "--delta", "0.1234567", "--candidates", c, "--rankings", r, "--out",
                 path("o").string()}),
            kExitUsage);
  EXPECT_EQ(cli({"aggregate", "--method", "borda", "--delta-attr", "Height=0.1", "--candidates", c, "--rankings", r,
                 "--out", path("o").string()}),
            kExitUsage);
  EXPECT_EQ(cli({"aggregate", "--method", "borda", "--candidates", path("missing.csv").string(), "--rankings", r,
                 "--out", path("o").string()}),
            kExitIo);

  write("bad.csv", "a,b,c,d,e,f\nf,e,d,c,b\n");
  EXPECT_EQ(cli({"aggregate", "--method", "borda", "--candidates", c, "--rankings", path("bad.csv").string(), "--out",
                 path("o").string()}),
            kExitParse);
  EXPECT_NE(err_.str().find("row 2"), std::string::npos) << err_.str();
  EXPECT_FALSE(fs::exists(path("o")));

  // three x and one y cannot reach parity: favored counts of x lie in {0..3}/3 and y in {0..3}/3 but sum to 3
  write("c4.csv", "candidate_id,G\np,x\nq,x\nr,x\ns,y\n");
  write("r4.csv", "p,q,r,s\n");
  const auto c4 = path("c4.csv").string(), r4 = path("r4.csv").string();
  EXPECT_EQ(cli({"aggregate", "--method", "fair-kemeny", "--delta", "0", "--candidates", c4, "--rankings", r4, "--out",
                 path("o").string()}),
            kExitInfeasible);
  EXPECT_EQ(cli({"aggregate", "--method", "fair-borda", "--delta", "0", "--candidates", c4, "--rankings", r4, "--out",
                 path("o").string()}),
            kExitRepairStalled);
  EXPECT_EQ(cli({"aggregate", "--method", "fair-kemeny", "--delta", "0", "--time-budget-ms", "0", "--candidates", c4,
                 "--rankings", r4, "--out", path("o").string()}),
            kExitBudgetExceeded);
  EXPECT_FALSE(fs::exists(path("o")));

  EXPECT_EQ(cli({"generate", "--population", "Gender:2", "--per-cell", "1", "--scenario", "medium-fair", "--theta", "0",
                 "--num-rankings", "3", "--seed", "1", "--out", path("g").string()}),
            kExitScenarioUnreachable);
  EXPECT_FALSE(fs::exists(path("g")));

  std::string big = "candidate_id,G\n", order;
  for (int i = 0; i < 26; ++i) {
    const std::string id = "c" + std::to_string(i);
    big += id + (i % 2 ? ",x\n" : ",y\n");
    order += (i ? "," : "") + id;
  }
  write("big.csv", big);
  write("big_r.csv", order + "\n");
  EXPECT_EQ(cli({"aggregate", "--method", "kemeny", "--candidates", path("big.csv").string(), "--rankings",
                 path("big_r.csv").string(), "--out", path("o").string()}),
            kExitInstanceTooLarge);
}

TEST_F(CliTest, DeltaInfeasibilityAgreesWithEnumeration) {
  oracle::Instance inst;
  inst.values = {{"x"}, {"x"}, {"x"}, {"y"}};
  inst.attributes = {"G"};
  inst.rankings = {{0, 1, 2, 3}};
  inst.weights = {1};
  EXPECT_FALSE(oracle::best_fair(inst, Rational(0), Rational(0)).has_value());
  EXPECT_TRUE(oracle::best_fair(inst, Rational(1), Rational(1)).has_value());
}

TEST_F(CliTest, MetricsMatchPairEnumeration) {
  write("c.csv", kSixCandidates);
  write("r.csv", kSixRankings);
  ASSERT_EQ(cli({"metrics", "--candidates", path("c.csv").string(), "--rankings", path("r.csv").string(), "--out",
                 path("m").string()}),
            kExitOk)
      << err_.str();
  const auto j = json::parse(read_file(path("m/metrics.json")));
  const std::vector<std::vector<std::string>> values = {{"M", "x"}, {"M", "y"}, {"M", "x"},
                                                        {"W", "y"}, {"W", "x"}, {"W", "y"}};
  const std::vector<oracle::Order> orders = {{0, 1, 3, 2, 4, 5}, {3, 0, 4, 1, 5, 2}, {1, 0, 2, 3, 4, 5}};
  ASSERT_EQ(j["rankings"].size(), 3u);
  for (std::size_t i = 0; i < 3; ++i) {
    const auto& entities = j["rankings"][i]["report"]["entities"];
    auto score = [&](std::size_t e) {
      return Rational(entities[e]["score"]["num"].get<std::int64_t>(), entities[e]["score"]["den"].get<std::int64_t>());
    };
    EXPECT_EQ(score(0), *oracle::parity(orders[i], oracle::partition(values, {0})));
    EXPECT_EQ(score(1), *oracle::parity(orders[i], oracle::partition(values, {1})));
    EXPECT_EQ(score(2), *oracle::parity(orders[i], oracle::partition(values, {0, 1})));
    const auto& groups = entities[0]["groups"];
    EXPECT_EQ(Rational(groups[0]["fpr"]["num"].get<std::int64_t>(), groups[0]["fpr"]["den"].get<std::int64_t>()),
              oracle::fpr(orders[i], {0, 1, 2}));
  }
  const std::string csv = read_file(path("m/metrics.csv"));
  EXPECT_EQ(csv.substr(0, csv.find('\n')),
            "source,row,satisfied,arp:Gender,arp:Race,irp,fpr:Gender:M,fpr:Gender:W,fpr:Race:x,fpr:Race:y,"
            "fpr:intersection:M|x,fpr:intersection:M|y,fpr:intersection:W|x,fpr:intersection:W|y,pd_loss");

  // a ranking identical to the sole base ranking has zero loss
  write("one.csv", "a,b,c,d,e,f\n");
  ASSERT_EQ(cli({"metrics", "--candidates", path("c.csv").string(), "--rankings", path("one.csv").string(), "--out",
                 path("m1").string(), "--format", "json"}),
            kExitOk);
  const auto single = json::parse(read_file(path("m1/metrics.json")));
  EXPECT_EQ(single["rankings"][0]["pd_loss"]["num"], 0);
  EXPECT_FALSE(fs::exists(path("m1/metrics.csv")));
}

TEST_F(CliTest, AblationSwitches) {
  write("c.csv", kSixCandidates);
  write("r.csv", kSixRankings);
  const auto c = path("c.csv").string(), r = path("r.csv").string();
  ASSERT_EQ(cli({"aggregate", "--method", "fair-kemeny", "--delta", "0.12", "--intersection", "none", "--candidates", c,
                 "--rankings", r, "--out", path("attr").string()}),
            kExitOk)
      << err_.str();
  auto j = json::parse(read_file(path("attr/report.json")));
  EXPECT_FALSE(j["fairness"]["constrain_intersection"].get<bool>());
  EXPECT_FALSE(j["report"]["entities"][2]["constrained"].get<bool>());
  ASSERT_EQ(cli({"aggregate", "--method", "fair-kemeny", "--delta", "0.5", "--attributes", "none", "--intersection",
                 "Race", "--delta-inter", "0.25", "--candidates", c, "--rankings", r, "--out", path("inter").string()}),
            kExitOk)
      << err_.str();
  j = json::parse(read_file(path("inter/report.json")));
  EXPECT_EQ(j["fairness"]["intersection_attributes"], json::array({"Race"}));
  EXPECT_EQ(j["fairness"]["delta_intersection"]["decimal"], "0.250000");
  EXPECT_FALSE(j["report"]["entities"][0]["constrained"].get<bool>());
  EXPECT_TRUE(j["report"]["satisfied"].get<bool>());
}

TEST_F(CliTest, GenerateScenarioAndDeterminism) {
  const std::vector<std::string> args = {"generate", "--population", "Race:3,Gender:2", "--per-cell", "3",
                                         "--scenario", "low-fair", "--theta", "0.6", "--num-rankings", "40",
                                         "--seed", "7", "--out"};
  auto a = args, b = args;
  a.push_back(path("a").string());
  b.push_back(path("b").string());
  ASSERT_EQ(cli(a), kExitOk) << err_.str();
  ASSERT_EQ(cli(b), kExitOk);
  for (const char* f : {"candidates.csv", "rankings.csv", "modal.csv", "modal_report.json"})
    EXPECT_EQ(read_file(path("a") / f), read_file(path("b") / f)) << f;
  const auto table = parse_candidates(read_file(path("a/candidates.csv")));
  EXPECT_EQ(table.size(), 18u);
  EXPECT_EQ(parse_rankings(read_file(path("a/rankings.csv")), table).size(), 40u);
  const auto report = json::parse(read_file(path("a/modal_report.json")));
  for (const auto& [name, window] : report["targets"]["attributes"].items()) {
    const auto& s = report["scores"]["arp"][name];
    const Rational score(s["num"].get<std::int64_t>(), s["den"].get<std::int64_t>());
    EXPECT_GE(score, Rational(window["lower"]["num"].get<std::int64_t>(), window["lower"]["den"].get<std::int64_t>()));
    EXPECT_LE(score, Rational(window["upper"]["num"].get<std::int64_t>(), window["upper"]["den"].get<std::int64_t>()));
  }

  // explicit modal, uniform sampling
  ASSERT_EQ(cli({"generate", "--candidates", path("a/candidates.csv").string(), "--modal", path("a/modal.csv").string(),
                 "--theta", "0", "--num-rankings", "5", "--seed", "3", "--out", path("u").string()}),
            kExitOk)
      << err_.str();
  EXPECT_FALSE(fs::exists(path("u/candidates.csv")));
  EXPECT_EQ(read_file(path("u/modal.csv")), read_file(path("a/modal.csv")));
}

TEST_F(CliTest, ExperimentMinimalGridAndDeterminism) {
  write("exp.json", R"({
    "population": {"attributes": [{"name": "Race", "values": 2}, {"name": "Gender", "values": 2}], "per_cell": 2},
    "scenario": "low-fair",
    "num_rankings": 20,
    "thetas": [0.5],
    "deltas": ["0.2"],
    "methods": ["fair-kemeny"],
    "trials": 1,
    "seed": 11
  })");
  ASSERT_EQ(cli({"experiment", "--config", path("exp.json").string(), "--out", path("e1").string()}), kExitOk)
      << err_.str();
  ASSERT_EQ(cli({"experiment", "--config", path("exp.json").string(), "--out", path("e2").string()}), kExitOk);
  const std::string results = read_file(path("e1/results.csv"));
  EXPECT_EQ(std::count(results.begin(), results.end(), '\n'), 2);
  EXPECT_EQ(results, read_file(path("e2/results.csv")));
  EXPECT_EQ(read_file(path("e1/summary.csv")), read_file(path("e2/summary.csv")));
  EXPECT_NE(results.find("fair-kemeny,0.5,0.2,1,"), std::string::npos);

  write("broken.json", "{\n  \"thetas\": [0.5],\n  oops\n}");
  EXPECT_EQ(cli({"experiment", "--config", path("broken.json").string()}), kExitParse);
  EXPECT_NE(err_.str().find("row 3"), std::string::npos) << err_.str();
}

TEST_F(CliTest, ReportsAreByteIdenticalAcrossRuns) {
  write("c.csv", kSixCandidates);
  write("r.csv", kSixRankings);
  for (const char* method : {"fair-kemeny", "fair-copeland", "correct-pick"}) {
    std::string first_consensus, first_report;
    for (const char* out : {"x", "y"}) {
      ASSERT_EQ(cli({"aggregate", "--method", method, "--delta", "0.2", "--candidates", path("c.csv").string(),
                     "--rankings", path("r.csv").string(), "--out", path(out).string()}),
                kExitOk);
    }
    EXPECT_EQ(read_file(path("x/consensus.csv")), read_file(path("y/consensus.csv"))) << method;
    EXPECT_EQ(read_file(path("x/report.json")), read_file(path("y/report.json"))) << method;
  }
}

}  // namespace
}  // namespace manirank::cli
