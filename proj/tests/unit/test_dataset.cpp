// SPDX-License-Identifier: Apache-2.0
#include <gtest/gtest.h>

#include <cstring>

#include "oracles.hpp"
#include "rdmc/dataset.hpp"
#include "rdmc/error.hpp"
#include "rdmc/simulation.hpp"

namespace rdmc {
namespace {

using testing::TempDir;
using testing::write_text;

const Thresholds kT{2.0, 6.0};

ErrorCode code_of(const std::function<void()>& fn) {
  try {
    fn();
  } catch (const Error& e) {
    return e.code();
  }
  ADD_FAILURE() << "expected an rdmc::Error";
  return ErrorCode::io;
}

TEST(LoadDataset, DerivesTreatmentFromGroupThreshold) {
  TempDir dir("ds");
  write_text(dir / "a.csv", "x,d,y\n3,1,5\n3,0,5\n");
  const auto ds = load_dataset(dir / "a.csv", Schema{}, kT);
  ASSERT_EQ(ds.size(), 2u);
  EXPECT_EQ(ds.units[0].z, 0);  // 3 <= c1
  EXPECT_EQ(ds.units[1].z, 1);  // 3 > c0
}

TEST(LoadDataset, InconsistentTreatmentIsValidationError) {
  TempDir dir("ds");
  write_text(dir / "a.csv", "x,d,z,y\n3,0,0,5\n");
  Schema s;
  s.z = "z";
  try {
    load_dataset(dir / "a.csv", s, kT);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::validation);
    EXPECT_NE(std::string(e.what()).find("1"), std::string::npos);
  }
}

TEST(LoadDataset, ThresholdIsNotTreated) {
  TempDir dir("ds");
  write_text(dir / "a.csv", "x,d,y\n2,0,1\n6,1,1\n");
  const auto ds = load_dataset(dir / "a.csv", Schema{}, kT);
  EXPECT_EQ(ds.units[0].z, 0);
  EXPECT_EQ(ds.units[1].z, 0);
}

TEST(LoadDataset, ReportsSchemaAndParseErrors) {
  TempDir dir("ds");
  write_text(dir / "nocol.csv", "x,d\n1,0\n");
  EXPECT_EQ(code_of([&] { load_dataset(dir / "nocol.csv", Schema{}, kT); }), ErrorCode::schema);

  write_text(dir / "bad.csv", "x,d,y\n1,0,2\n1,0,abc\n");
  try {
    load_dataset(dir / "bad.csv", Schema{}, kT);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::parse);
    EXPECT_NE(std::string(e.what()).find("2"), std::string::npos) << e.what();
  }

  write_text(dir / "na.csv", "x,d,y\n1,0,NA\n");
  EXPECT_EQ(code_of([&] { load_dataset(dir / "na.csv", Schema{}, kT); }), ErrorCode::parse);

  EXPECT_EQ(code_of([&] { load_dataset(dir / "missing.csv", Schema{}, kT); }), ErrorCode::io);
}

TEST(LoadDataset, ReadsCovariatesTabsAndSkipsLeadingComments) {
  TempDir dir("ds");
  write_text(dir / "t.tsv", "# provenance\nx\tw1\td\ty\n1.5\t0.25\t0\t7\n");
  Schema s;
  s.w = {"w1"};
  s.delimiter = '\t';
  const auto ds = load_dataset(dir / "t.tsv", s, kT);
  ASSERT_EQ(ds.size(), 1u);
  EXPECT_EQ(ds.units[0].w, std::vector<double>{0.25});
  EXPECT_EQ(ds.covariate_names, std::vector<std::string>{"w1"});
}

TEST(LoadDataset, RoundTripIsBitExact) {
  SimConfig cfg;
  cfg.n = 300;
  const auto ds = generate(cfg, 11);
  TempDir dir("ds");
  write_dataset(ds, dir / "r.csv");
  const auto back = load_dataset(dir / "r.csv", schema_for(ds), ds.thresholds);
  ASSERT_EQ(back.size(), ds.size());
  EXPECT_EQ(back.covariate_names, ds.covariate_names);
  for (std::size_t i = 0; i < ds.size(); ++i) {
    const auto& a = ds.units[i];
    const auto& b = back.units[i];
    EXPECT_EQ(std::memcmp(&a.x, &b.x, sizeof(double)), 0);
    EXPECT_EQ(std::memcmp(&a.y, &b.y, sizeof(double)), 0);
    ASSERT_EQ(a.w.size(), b.w.size());
    for (std::size_t k = 0; k < a.w.size(); ++k) {
      EXPECT_EQ(std::memcmp(&a.w[k], &b.w[k], sizeof(double)), 0);
    }
    EXPECT_EQ(a.d, b.d);
    EXPECT_EQ(a.z, b.z);
  }
}

TEST(Validate, ThresholdsOutOfOrderIsFatal) {
  auto ds = testing::make_dataset({}, {6.0, 2.0});
  const auto f = validate(ds);
  ASSERT_TRUE(has_fatal(f));
  bool found = false;
  for (const auto& x : f) found = found || x.message.find("thresholds out of order") != std::string::npos;
  EXPECT_TRUE(found);
}

TEST(Validate, WarnsOnEmptyRegion) {
  // No d = 0 units at or below c0.
  auto ds = testing::make_dataset({testing::unit(3, 0, 1, {}, kT), testing::unit(1, 1, 1, {}, kT),
                                   testing::unit(7, 1, 1, {}, kT)},
                                  kT);
  const auto f = validate(ds);
  EXPECT_FALSE(has_fatal(f));
  bool found = false;
  for (const auto& x : f) {
    if (x.message.find("region (c) empty") != std::string::npos) {
      found = true;
      EXPECT_EQ(x.severity, Severity::warning);
    }
  }
  EXPECT_TRUE(found);
}

TEST(Validate, SimulatedDatasetHasNoFindings) {
  SimConfig cfg;
  const auto ds = generate(cfg, 5);
  EXPECT_TRUE(validate(ds).empty());
}

TEST(Validate, FlagsTreatmentRuleAndDimension) {
  auto ds = testing::make_dataset({testing::unit(3, 0, 1, {0.0}, kT)}, kT, {"w1"});
  ds.units[0].z = 0;
  ds.units.push_back(testing::unit(1, 0, 1, {}, kT));
  const auto f = validate(ds);
  std::vector<std::string> codes;
  for (const auto& x : f) codes.push_back(x.code);
  EXPECT_NE(std::find(codes.begin(), codes.end(), "treatment_rule"), codes.end());
  EXPECT_NE(std::find(codes.begin(), codes.end(), "covariate_dimension"), codes.end());
}

TEST(DatasetProperties, TreatmentDerivationIsIdempotent) {
  SimConfig cfg;
  cfg.n = 500;
  const auto ds = generate(cfg, 3);
  const auto once = with_derived_treatment(ds);
  const auto twice = with_derived_treatment(once);
  for (std::size_t i = 0; i < ds.size(); ++i) {
    EXPECT_EQ(once.units[i].z, twice.units[i].z);
    EXPECT_EQ(once.units[i].z, ds.units[i].z);
  }
}

TEST(DatasetProperties, RegionsPartitionTheSample) {
  SimConfig cfg;
  cfg.n = 1000;
  const auto ds = generate(cfg, 4);
  const auto c = region_census(ds);
  EXPECT_EQ(c.total(), ds.size());
  std::size_t manual[4] = {0, 0, 0, 0};
  for (const auto& u : ds.units) {
    const int idx = u.d == 0 ? (u.z == 0 ? 0 : 1) : (u.z == 0 ? 2 : 3);
    ++manual[idx];
    EXPECT_EQ(static_cast<int>(region_of(u)), idx);
  }
  EXPECT_EQ(manual[0], c.c);
  EXPECT_EQ(manual[1], c.b);
  EXPECT_EQ(manual[2], c.a);
  EXPECT_EQ(manual[3], c.d);
}

TEST(TargetOutcome, RejectsOtherIndices) {
  EXPECT_EQ(code_of([] { TargetOutcome t(2); }), ErrorCode::domain);
  EXPECT_TRUE(TargetOutcome(0).in_range(5.9, kT));
  EXPECT_FALSE(TargetOutcome(0).in_range(6.0, kT));
  EXPECT_TRUE(TargetOutcome(1).in_range(2.1, kT));
  EXPECT_FALSE(TargetOutcome(1).in_range(2.0, kT));
}

}  // namespace
}  // namespace rdmc
