// SPDX-License-Identifier: Apache-2.0
#include <gtest/gtest.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "cli.hpp"
#include "manifest.hpp"
#include "tables.hpp"

namespace rdmc::cli {
namespace {

namespace fs = std::filesystem;

struct Scratch {
  fs::path dir;
  explicit Scratch(const std::string& tag) {
    dir = fs::temp_directory_path() / ("rdmc_cli_" + tag + "_" + std::to_string(::getpid()));
    fs::remove_all(dir);
    fs::create_directories(dir);
  }
  ~Scratch() { fs::remove_all(dir); }
  std::string operator/(const std::string& name) const { return (dir / name).string(); }
};

std::string slurp(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  std::ostringstream os;
  os << in.rdbuf();
  return os.str();
}

struct Outcome {
  int code;
  std::string out, err;
};

Outcome invoke(const std::vector<std::string>& args) {
  std::ostringstream out, err;
  const int code = run(args, out, err);
  return {code, out.str(), err.str()};
}

/// File text after the first line, which carries the manifest hash.
std::string body(const std::string& path) {
  const auto text = slurp(path);
  return text.substr(text.find('\n'));
}

TEST(Manifest, JsonRoundTripAndHash) {
  RunManifest m;
  m.command = "fit";
  m.tool_version = "0.3.0";
  m.data = "in.csv";
  m.out = "out.csv";
  m.covariates = {"w1", "w2"};
  m.propensity_spec = {"1", "x", "w1", "w2"};
  m.outcome_spec = {"1", "x", "x^2", "w1", "w2"};
  m.bandwidth = 1.25;
  m.normal_density = std::vector<double>{4.0, 1.7};
  const auto back = manifest_from_json(to_json(m));
  EXPECT_EQ(back, m);
  EXPECT_EQ(manifest_hash(back), manifest_hash(m));
  EXPECT_EQ(manifest_hash(m).size(), 16u);
  auto other = m;
  other.seed = 2;
  EXPECT_NE(manifest_hash(other), manifest_hash(m));
  // Reference FNV-1a 64 values.
  EXPECT_EQ(fnv1a_hex(""), "cbf29ce484222325");
  EXPECT_EQ(fnv1a_hex("a"), "af63dc4c8601ec8c");
}

TEST(Manifest, MalformedJsonIsRejected) {
  EXPECT_THROW(manifest_from_json(nlohmann::json::parse(R"({"command": 3})")), std::exception);
}

TEST(Tables, NumbersRoundTripExactly) {
  for (double v : {0.1, 1.0 / 3.0, -2.5e-300, 123456789.123456789}) {
    EXPECT_EQ(parse_number(format_number(v), "test"), v);
  }
  EXPECT_TRUE(std::isnan(parse_number(format_number(std::nan("")), "test")));
}

TEST(Parse, UsageErrorsExitTwo) {
  EXPECT_EQ(invoke({}).code, kExitUsage);
  EXPECT_EQ(invoke({"nonsense"}).code, kExitUsage);
  EXPECT_EQ(invoke({"simulate"}).code, kExitUsage);  // no --out
  EXPECT_EQ(invoke({"simulate", "--out", "x.csv", "--c0", "6", "--c1", "2"}).code, kExitUsage);
  EXPECT_EQ(invoke({"fit", "--out", "x.csv"}).code, kExitUsage);  // no --data
  EXPECT_EQ(invoke({"threshold", "--g0", "a", "--g1", "b", "--mc", "1", "--mc-table", "t",
                    "--normal-density", "4,1.7", "--out", "o.csv"})
                .code,
            kExitUsage);
  EXPECT_EQ(invoke({"threshold", "--g0", "a", "--g1", "b", "--normal-density", "4,1.7", "--out",
                    "o.csv"})
                .code,
            kExitUsage);
  EXPECT_EQ(invoke({"effect", "--g0", "a", "--g1", "b", "--level", "1.5", "--out", "o.csv"}).code,
            kExitUsage);
  EXPECT_EQ(invoke({"simulate", "--kernel", "box", "--out", "o.csv"}).code, kExitUsage);
}

TEST(Parse, HelpAndVersionExitZero) {
  const auto help = invoke({"--help"});
  EXPECT_EQ(help.code, kExitOk);
  EXPECT_NE(help.out.find("simulate"), std::string::npos);
  const auto version = invoke({"--version"});
  EXPECT_EQ(version.code, kExitOk);
}

TEST(Parse, DefaultsResolveFromTheDataHeader) {
  Scratch s("defaults");
  ASSERT_EQ(invoke({"simulate", "--n", "200", "--out", s / "d.csv"}).code, kExitOk);
  const auto inv = parse_invocation({"fit", "--data", s / "d.csv", "--out", s / "c.csv"});
  ASSERT_TRUE(inv.manifest) << inv.message;
  const auto& m = *inv.manifest;
  EXPECT_EQ(m.covariates, (std::vector<std::string>{"w1", "w2"}));
  EXPECT_EQ(m.propensity_spec, (std::vector<std::string>{"1", "x", "w1", "w2"}));
  EXPECT_EQ(m.outcome_spec, (std::vector<std::string>{"1", "x", "x^2", "w1", "w2"}));
  EXPECT_EQ(m.method, "dr");
  EXPECT_EQ(m.target, "both");
  EXPECT_FALSE(m.bandwidth.has_value());

  const auto naive = parse_invocation({"fit", "--data", s / "d.csv", "--method", "naive", "--out", s / "c.csv"});
  ASSERT_TRUE(naive.manifest);
  EXPECT_TRUE(naive.manifest->propensity_spec.empty());
  EXPECT_TRUE(naive.manifest->outcome_spec.empty());

  const auto bad = parse_invocation({"fit", "--data", s / "d.csv", "--method", "naive", "--variance",
                                     "--out", s / "c.csv"});
  EXPECT_EQ(bad.exit_code, kExitUsage);
  const auto group = parse_invocation({"fit", "--data", s / "d.csv", "--ipw-group", "1", "--out", s / "c.csv"});
  EXPECT_EQ(group.exit_code, kExitUsage);
}

TEST(Pipeline, FiveArtifactsWithHeadersAndSidecars) {
  Scratch s("pipeline");
  ASSERT_EQ(invoke({"simulate", "--n", "1200", "--seed", "5", "--out", s / "data.csv"}).code, kExitOk);
  ASSERT_EQ(invoke({"fit", "--data", s / "data.csv", "--h", "1.2", "--variance", "--normal-density",
                    "4,1.7", "--out", s / "curve.csv"})
                .code,
            kExitOk);
  ASSERT_EQ(invoke({"effect", "--g0", s / "curve_g0.csv", "--g1", s / "curve_g1.csv", "--out",
                    s / "effect.csv"})
                .code,
            kExitOk);
  ASSERT_EQ(invoke({"threshold", "--g0", s / "curve_g0.csv", "--g1", s / "curve_g1.csv", "--mc",
                    "100", "--data", s / "data.csv", "--out", s / "threshold.csv"})
                .code,
            kExitOk);
  ASSERT_EQ(invoke({"bandwidth", "--data", s / "data.csv", "--target", "1", "--h-grid",
                    "0.8,1.2,1.6", "--out", s / "bw.csv"})
                .code,
            kExitOk);

  for (const char* name : {"data.csv", "curve_g0.csv", "curve_g1.csv", "effect.csv", "threshold.csv", "bw.csv"}) {
    const std::string text = slurp(s / name);
    EXPECT_EQ(text.rfind("# rdmc ", 0), 0u) << name;
    EXPECT_NE(text.find("manifest="), std::string::npos) << name;
    ASSERT_TRUE(fs::exists(s / (std::string(name) + ".manifest.json"))) << name;
    const auto side = nlohmann::json::parse(slurp(sidecar_path(s / name)));
    EXPECT_TRUE(side.contains("manifest_hash"));
    EXPECT_EQ(side["manifest_hash"].get<std::string>().size(), 16u);
  }

  const auto effect = read_table(s / "effect.csv");
  const auto x = effect.numbers("x");
  const auto se = effect.numbers("se");
  ASSERT_EQ(x.size(), 199u);
  EXPECT_GT(x.front(), 2.0);
  EXPECT_LT(x.back(), 6.0);
  for (double v : se) EXPECT_GT(v, 0.0);

  const auto bw = read_table(s / "bw.csv");
  EXPECT_EQ(bw.numbers("h"), (std::vector<double>{0.8, 1.2, 1.6}));
}

TEST(Pipeline, RerunsAreByteIdentical) {
  Scratch s("rerun");
  ASSERT_EQ(invoke({"simulate", "--n", "400", "--seed", "9", "--out", s / "a.csv"}).code, kExitOk);
  ASSERT_EQ(invoke({"simulate", "--n", "400", "--seed", "9", "--out", s / "b.csv"}).code, kExitOk);
  // Manifests differ only in the output path.
  EXPECT_EQ(body(s / "a.csv"), body(s / "b.csv"));

  const std::vector<std::string> fit{"fit", "--data", s / "a.csv", "--target", "0", "--h-points",
                                     "4", "--out", s / "c.csv"};
  ASSERT_EQ(invoke(fit).code, kExitOk);
  const auto first = slurp(s / "c.csv");
  ASSERT_EQ(invoke(fit).code, kExitOk);
  EXPECT_EQ(slurp(s / "c.csv"), first);
}

TEST(Pipeline, BenchReportsEveryCell) {
  Scratch s("bench");
  const auto r = invoke({"bench", "--n", "300", "--reps", "5", "--h", "1.5", "--grid", "41", "--out", s / "bench.csv"});
  ASSERT_EQ(r.code, kExitOk) << r.err;
  const auto t = read_table(s / "bench.csv");
  const auto mise = t.numbers("mise");
  ASSERT_EQ(mise.size(), 6u);
  for (double v : mise) EXPECT_GT(v, 0.0);
  for (double v : t.numbers("replications")) EXPECT_EQ(v, 5.0);
}

TEST(Errors, InputProblemsExitOneWithSidecar) {
  Scratch s("errors");
  const auto missing = invoke({"effect", "--g0", s / "nope0.csv", "--g1", s / "nope1.csv", "--out", s / "e.csv"});
  EXPECT_EQ(missing.code, kExitFailure);
  EXPECT_FALSE(missing.err.empty());
  ASSERT_TRUE(fs::exists(sidecar_path(s / "e.csv")));
  const auto side = nlohmann::json::parse(slurp(sidecar_path(s / "e.csv")));
  EXPECT_TRUE(side.contains("error"));

  {
    std::ofstream bad(s / "bad.csv");
    bad << "x,d,y\n1,0,2\n3,zero,4\n";
  }
  EXPECT_EQ(invoke({"fit", "--data", s / "bad.csv", "--method", "naive", "--out", s / "f.csv"}).code,
            kExitFailure);
}

TEST(Binary, ExitCodesFromTheExecutable) {
  Scratch s("binary");
  const std::string exe = RDMC_CLI_PATH;
  auto sh = [&](const std::string& args) {
    const int status = std::system((exe + " " + args + " >/dev/null 2>&1").c_str());
    return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
  };
  EXPECT_EQ(sh("simulate --n 100 --out " + (s / "d.csv")), 0);
  EXPECT_EQ(sh("fit --data " + (s / "missing.csv") + " --out " + (s / "c.csv")), 1);
  EXPECT_EQ(sh("threshold --g0 a --g1 b --mc 1 --mc-table t --normal-density 4,1.7 --out o.csv"), 2);
  EXPECT_EQ(sh("--help"), 0);
}

}  // namespace
}  // namespace rdmc::cli
