#include <gtest/gtest.h>

#include <filesystem>
#include <fstream>
#include <sstream>

#include "iaa/cli.hpp"
#include "support.hpp"

using namespace iaa;
namespace fs = std::filesystem;

namespace {

struct Run {
  int code;
  std::string out;
  std::string err;
};

Run agree(std::vector<std::string> args) {
  args.insert(args.begin(), "agree");
  std::vector<const char*> argv;
  for (const auto& a : args) argv.push_back(a.c_str());
  std::ostringstream out, err;
  const int code = cli_main(static_cast<int>(argv.size()), argv.data(), out, err);
  return {code, out.str(), err.str()};
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

class Cli : public ::testing::Test {
 protected:
  void SetUp() override {
    dir_ = fs::temp_directory_path() / ("iaa_cli_" + std::string(::testing::UnitTest::GetInstance()->current_test_info()->name()));
    fs::create_directories(dir_);
  }
  void TearDown() override { fs::remove_all(dir_); }

  std::string path(const std::string& name) const { return (dir_ / name).string(); }

  std::string write(const std::string& name, const std::string& text) const {
    std::ofstream(path(name)) << text;
    return path(name);
  }

  std::string simulate(const std::string& task, double noise, int items = 40, int seed = 1) const {
    const auto out = path(task + std::to_string(noise) + ".jsonl");
    const auto r = agree({"simulate", "--task", task, "--items", std::to_string(items), "--noise",
                          std::to_string(noise), "--seed", std::to_string(seed), "--out", out});
    EXPECT_EQ(r.code, 0) << r.err;
    return out;
  }

  fs::path dir_;
};

}  // namespace

TEST_F(Cli, UsageErrorsExitTwo) {
  EXPECT_EQ(agree({}).code, 2);
  EXPECT_EQ(agree({"frobnicate"}).code, 2);
  EXPECT_EQ(agree({"compute", "--distance", "tau"}).code, 2);
  const auto data = simulate("ranking", 0.2);
  EXPECT_EQ(agree({"compute", "--input", data, "--distance", "tau", "--de-samples", "lots"}).code, 2);
  EXPECT_EQ(agree({"compute", "--input", data, "--distance", "tau", "--p", "2"}).code, 2);
  EXPECT_EQ(agree({"compute", "--input", data, "--distance", "tau", "--param", "k"}).code, 2);
  const auto unknown = agree({"compute", "--input", data, "--distance", "spearman"});
  EXPECT_EQ(unknown.code, 2);
  EXPECT_NE(unknown.err.find("tau_at_k"), std::string::npos) << unknown.err;
  EXPECT_EQ(agree({"compute", "--input", path("missing.jsonl"), "--distance", "tau"}).code, 2);
  EXPECT_EQ(agree({"simulate", "--task", "trees", "--noise", "0.1", "--out", path("x.jsonl")}).code, 2);
  EXPECT_EQ(agree({"simulate", "--task", "ranking", "--noise", "1.5", "--out", path("x.jsonl")}).code, 2);
  EXPECT_EQ(agree({"--help"}).code, 0);
}

TEST_F(Cli, ValidationErrorsExitThree) {
  const auto dup = write("dup.jsonl",
                         "{\"item\": \"i\", \"annotator\": \"a\", \"kind\": \"ranking\", \"label\": [\"x\", \"y\"]}\n"
                         "{\"item\": \"i\", \"annotator\": \"a\", \"kind\": \"ranking\", \"label\": [\"y\", \"x\"]}\n");
  const auto r = agree({"compute", "--input", dup, "--distance", "tau"});
  EXPECT_EQ(r.code, 3);
  EXPECT_NE(r.err.find("duplicate annotation"), std::string::npos) << r.err;
  const auto bad = write("bad.jsonl", "{\"item\": \"i\", \"annotator\": \"a\", \"kind\": \"ranking\", \"label\": [\"x\"\n");
  const auto r2 = agree({"compute", "--input", bad, "--distance", "tau"});
  EXPECT_EQ(r2.code, 3);
  EXPECT_NE(r2.err.find("line 1"), std::string::npos);
}

TEST_F(Cli, DegenerateExpectedExitsFour) {
  std::string text;
  for (int i = 0; i < 3; ++i)
    for (const char* a : {"a", "b"})
      text += "{\"item\": \"i" + std::to_string(i) + "\", \"annotator\": \"" + a +
              "\", \"kind\": \"vector\", \"label\": [1, 2]}\n";
  const auto r = agree({"compute", "--input", write("same.jsonl", text), "--distance", "binary"});
  EXPECT_EQ(r.code, 4);
  EXPECT_NE(r.err.find("degenerate expected distances"), std::string::npos) << r.err;
}

TEST_F(Cli, ZeroNoiseComputesPerfectScores) {
  const auto data = simulate("ranking", 0.0, 60);
  const auto r = agree({"compute", "--input", data, "--distance", "tau"});
  ASSERT_EQ(r.code, 0) << r.err;
  std::istringstream lines(r.out);
  std::string header, row;
  std::getline(lines, header);
  std::getline(lines, row);
  std::istringstream cols(row);
  std::string name, alpha, sigma;
  cols >> name >> alpha >> sigma;
  EXPECT_EQ(name, "tau");
  EXPECT_EQ(alpha, "1.0000");
  EXPECT_EQ(sigma, "1.0000");
  EXPECT_NE(r.out.find("diagnostics: none"), std::string::npos) << r.out;
}

TEST_F(Cli, ReportsAreByteIdenticalAcrossRuns) {
  const auto data = simulate("spans", 0.4);
  for (const char* threads : {"1", "3"}) {
    ASSERT_EQ(agree({"compute", "--input", data, "--distance", "both_lenient", "--seed", "9", "--threads", threads,
                     "--out", path(std::string("r") + threads + ".json")})
                  .code,
              0);
  }
  ASSERT_EQ(agree({"compute", "--input", data, "--distance", "both_lenient", "--seed", "9", "--out", path("r1b.json")}).code, 0);
  const auto a = slurp(path("r1.json"));
  EXPECT_FALSE(a.empty());
  EXPECT_EQ(a, slurp(path("r1b.json")));
  EXPECT_EQ(a, slurp(path("r3.json")));
  const auto j = nlohmann::json::parse(a);
  EXPECT_EQ(j["seed"], 9);
  EXPECT_EQ(j["distance"]["name"], "both_lenient");
}

TEST_F(Cli, CompareRanksByKsMeasure) {
  const auto data = simulate("spans", 0.5, 12);
  const auto r = agree({"compare", "--input", data, "--distances", "count_diff,both_lenient,both_strict,count_diff:normalize=true",
                        "--out", path("cmp.json")});
  ASSERT_EQ(r.code, 0) << r.err;
  const auto j = nlohmann::json::parse(slurp(path("cmp.json")));
  ASSERT_EQ(j["reports"].size(), 4u);
  ASSERT_EQ(j["ranking"].size(), 4u);
  for (std::size_t i = 0; i + 1 < 4; ++i) {
    EXPECT_GE(j["reports"][i]["ks"]["measure"].get<double>(), j["reports"][i + 1]["ks"]["measure"].get<double>());
  }
  std::set<std::string> names;
  for (const auto& n : j["ranking"]) names.insert(n.get<std::string>());
  EXPECT_TRUE(names.count("count_diff:normalize=true"));
  // the printed table follows the ranking
  std::istringstream lines(r.out);
  std::string line;
  std::getline(lines, line);
  for (const auto& n : j["ranking"]) {
    std::getline(lines, line);
    EXPECT_EQ(line.substr(0, line.find(' ')), n.get<std::string>());
  }
}

TEST_F(Cli, SimulateWritesDataset) {
  const auto out = path("boxes.jsonl");
  const auto r = agree({"simulate", "--task", "boxes", "--items", "7", "--annotators", "4", "--noise", "0.3", "--out", out});
  ASSERT_EQ(r.code, 0) << r.err;
  const auto ds = load_dataset(out);
  EXPECT_EQ(ds.records.size(), 28u);
  EXPECT_EQ(ds.kind(), PayloadKind::boxes);
  const auto vec = simulate("vector", 0.2, 10);
  const auto loaded = load_dataset(vec);
  ASSERT_TRUE(loaded.meta.ranges.has_value());
  EXPECT_EQ(agree({"compute", "--input", vec, "--distance", "euclidean"}).code, 0);
}

TEST_F(Cli, HistWritesCsv) {
  const auto data = simulate("ranking", 0.5);
  const auto r = agree({"hist", "--input", data, "--distance", "tau", "--out", path("h.csv")});
  ASSERT_EQ(r.code, 0) << r.err;
  std::istringstream csv(slurp(path("h.csv")));
  std::string line;
  std::size_t rows = 0;
  std::getline(csv, line);
  EXPECT_EQ(line, "series,bin,lo,hi,count");
  while (std::getline(csv, line)) ++rows;
  EXPECT_EQ(rows, 100u);
}

TEST_F(Cli, CheckMetric) {
  const auto data = simulate("ranking", 0.5, 10);
  const auto ok = agree({"check-metric", "--distance", "tau", "--input", data, "--samples", "20"});
  EXPECT_EQ(ok.code, 0) << ok.err;
  EXPECT_NE(ok.out.find("ok"), std::string::npos);

  const auto tokens = write("tokens.jsonl",
                            "{\"item\": \"s\", \"annotator\": \"a\", \"kind\": \"tokens\", \"label\": [\"a\", \"b\"]}\n"
                            "{\"item\": \"s\", \"annotator\": \"b\", \"kind\": \"tokens\", \"label\": [\"a\", \"b\", \"a\"]}\n"
                            "{\"item\": \"s\", \"annotator\": \"c\", \"kind\": \"tokens\", \"label\": [\"b\", \"a\"]}\n");
  EXPECT_EQ(agree({"check-metric", "--distance", "levenshtein", "--input", tokens}).code, 0);
  const auto forced = agree({"check-metric", "--distance", "levenshtein", "--input", tokens, "--triangle"});
  EXPECT_EQ(forced.code, 1);
  EXPECT_NE(forced.out.find("FAILED"), std::string::npos) << forced.out;
  EXPECT_EQ(agree({"check-metric", "--distance", "levenshtein", "--param", "raw=true", "--input", tokens}).code, 0);
}

TEST(CliHelpers, DistanceItems) {
  const auto [name, params] = cli::parse_distance_item("tau_at_k:k=3");
  EXPECT_EQ(name, "tau_at_k");
  EXPECT_EQ(params.at("k"), "3");
  EXPECT_THROW(cli::parse_distance_item(":k=3"), UsageError);
  EXPECT_THROW(cli::parse_params({"=3"}), UsageError);
  EXPECT_EQ(cli::fixed(0.123456), "0.1235");
}
