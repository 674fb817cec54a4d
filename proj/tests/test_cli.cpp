#include <gtest/gtest.h>

#include <filesystem>
#include <fstream>
#include <sstream>

#include <json.hpp>

#include "cuspdet/cli.hpp"
#include "cuspdet/io.hpp"

using namespace cuspdet;
using nlohmann::json;

namespace {

struct Run {
  int code;
  std::string out, err;
};

Run run(const std::vector<std::string>& args) {
  std::ostringstream out, err;
  const int code = cli::run(args, out, err);
  return {code, out.str(), err.str()};
}

std::string write_spec(const std::string& name, const json& j) {
  const auto dir = std::filesystem::temp_directory_path() / "cuspdet_cli_test";
  std::filesystem::create_directories(dir);
  const auto p = dir / name;
  std::ofstream(p) << j.dump();
  return p.string();
}

const json kPerturbed = {
    {"a", 1.0},
    {"mu", 1.0},
    {"nu", 1.0},
    {"bc", {{"kind", "neumann"}, {"alpha", 0.5}}},
    {"potential", {{"form", "analytic"}, {"preset", "sqrt_exp"}, {"params", {{"c", 0.3}, {"rate", 1.0}}}}}};

}  // namespace

TEST(SpecJson, RoundTripIsIdempotent) {
  const json tab = {{"a", 0.5},
                    {"mu", 2.0},
                    {"bc", {{"kind", "neumann"}, {"theta", 1.1}}},
                    {"potential",
                     {{"form", "tabulated"}, {"grid", {{"x", {0.5, 1.0, 2.0, 4.0}}, {"v", {0.1, 0.05, 0.01, 0.0}}}}}}};
  for (const json& j : {kPerturbed, tab}) {
    const json once = io::spec_to_json(io::spec_from_json(j));
    EXPECT_EQ(io::spec_to_json(io::spec_from_json(once)), once);
  }
}

TEST(SpecJson, RejectsUnknownKeysAndBadBc) {
  json j = kPerturbed;
  j["extra"] = 1;
  EXPECT_THROW(io::spec_from_json(j), io::SchemaError);
  j = kPerturbed;
  j["bc"] = {{"kind", "robin"}};
  EXPECT_THROW(io::spec_from_json(j), io::SchemaError);
}

TEST(Cli, MalformedSpecExitsWithSchemaCode) {
  json j = kPerturbed;
  j["a"] = -1.0;
  const auto r = run({"detz", "--spec", write_spec("bad_a.json", j)});
  EXPECT_EQ(r.code, cli::schema);
  EXPECT_NE(r.err.find("a must be > 0"), std::string::npos) << r.err;
}

TEST(Cli, UsageErrors) {
  const auto spec = write_spec("ok.json", kPerturbed);
  EXPECT_EQ(run({"--tol", "no_such_setting=1", "detz", "--spec", spec}).code, cli::usage);
  EXPECT_EQ(run({"--tol", "quad_tol=-1", "detz", "--spec", spec}).code, cli::usage);
  EXPECT_EQ(run({"detz", "--spec", spec, "--method", "guess"}).code, cli::usage);
  EXPECT_EQ(run({"detz", "--spec", "/nonexistent/spec.json"}).code, cli::usage);
  EXPECT_EQ(run({"trace", "--spec", spec, "--fit", "--format", "csv"}).code, cli::usage);
  EXPECT_EQ(run({"frobnicate"}).code, cli::usage);
  EXPECT_EQ(run({"--help"}).code, cli::ok);
}

TEST(Cli, DetzBothAgreesAndIsDeterministic) {
  const auto spec = write_spec("ok.json", kPerturbed);
  const auto r1 = run({"detz", "--spec", spec, "--method", "both"});
  const auto r2 = run({"detz", "--spec", spec, "--method", "both"});
  ASSERT_EQ(r1.code, cli::ok) << r1.err;
  EXPECT_EQ(r1.out, r2.out);
  const json j = json::parse(r1.out);
  EXPECT_TRUE(j.at("agree").get<bool>());
  EXPECT_LT(j.at("relative_difference").get<double>(), 1e-3);
  EXPECT_EQ(j.at("results").size(), 2u);
}

TEST(Cli, NuOverrideAndTolOverride) {
  const auto spec = write_spec("ok.json", kPerturbed);
  const auto r = run({"--tol", "compare_tol=0.01", "detz", "--spec", spec, "--nu", "2", "--method", "both"});
  ASSERT_EQ(r.code, cli::ok) << r.err;
  const json j = json::parse(r.out);
  EXPECT_EQ(j.at("spec").at("nu").get<double>(), 2.0);
  EXPECT_EQ(j.at("tolerance").get<double>(), 0.01);
}

TEST(Cli, ShowDefaultsListsVersionedTable) {
  const auto r = run({"--show-defaults"});
  ASSERT_EQ(r.code, cli::ok);
  const json j = json::parse(r.out);
  EXPECT_EQ(j.at("version").get<int>(), 1);
  bool found = false;
  for (const auto& e : j.at("settings")) found |= e.at("name") == "compare_tol";
  EXPECT_TRUE(found);
}

TEST(Cli, BesselDerivativeFromNeighbouringOrder) {
  const auto r = run({"bessel", "--order", "1", "--x", "1", "--kind", "kprime"});
  ASSERT_EQ(r.code, cli::ok) << r.err;
  // K_1'(1) = -K_0(1) - K_1(1)
  EXPECT_NEAR(json::parse(r.out).at("value").get<double>(), -(0.42102443824070823 + 0.6019072301972346), 1e-13);
  const auto s = run({"bessel", "--order", "0", "--x", "50", "--kind", "i", "--scaled"});
  EXPECT_NEAR(json::parse(s.out).at("value").get<double>(), 0.0565616266474542, 1e-14);
}

TEST(Cli, EigsCsv) {
  const auto r = run({"eigs", "--spec", write_spec("ok.json", kPerturbed), "--count", "3", "--n", "2000"});
  ASSERT_EQ(r.code, cli::ok) << r.err;
  EXPECT_EQ(r.out.substr(0, r.out.find('\n')), "index,lambda,tolerance");
  EXPECT_EQ(std::count(r.out.begin(), r.out.end(), '\n'), 4);
}

TEST(Cli, CompareSmallPasses) {
  const auto r = run({"--seed", "7", "compare", "--matrix", "small"});
  EXPECT_EQ(r.code, cli::ok) << r.err;
  EXPECT_EQ(r.out.find("FAIL"), std::string::npos);
}
