#include <gtest/gtest.h>

#include <random>

#include "bellman/serialization.hpp"
#include "test_support.hpp"

namespace bellman::io {
namespace {

TEST(FormatNumber, ShortestRoundTrip) {
  EXPECT_EQ(format_number(1.875), "1.875");
  EXPECT_EQ(format_number(4.5), "4.5");
  EXPECT_EQ(format_number(0.1), "0.1");
  EXPECT_EQ(format_number(1e-300), "1e-300");
  EXPECT_EQ(format_number(std::numeric_limits<double>::infinity()), "inf");
  std::mt19937_64 rng(3);
  for (int i = 0; i < 1000; ++i) {
    const double v = std::exp(testing::random_real(rng, -30.0, 30.0));
    EXPECT_EQ(std::stod(format_number(v)), v);
  }
}

TEST(StepFunctionJson, RoundTrip) {
  std::mt19937_64 rng(4);
  const auto phi = testing::random_step(3, 2, rng);
  const auto j = to_json(phi);
  EXPECT_EQ(j.at("N"), 3);
  EXPECT_EQ(j.at("depth"), 2);
  EXPECT_EQ(j.at("leaves").size(), 9u);
  EXPECT_EQ(step_function_from_json(json::parse(j.dump())), phi);
}

TEST(StepFunctionCsv, RoundTripAndErrors) {
  std::mt19937_64 rng(5);
  const auto phi = testing::random_step(2, 3, rng);
  const auto row = to_csv_row(phi);
  EXPECT_EQ(row.rfind("2,3,", 0), 0u);
  EXPECT_EQ(step_function_from_csv_row(row), phi);
  EXPECT_THROW(step_function_from_csv_row("2,1"), std::domain_error);
  EXPECT_THROW(step_function_from_csv_row("2,1,x,1"), std::domain_error);
  EXPECT_THROW(step_function_from_csv_row("2,1,1"), std::domain_error);
}

TEST(LayerCakeJson, Shape) {
  const auto cake = tree::distribution(tree::maximal(tree::StepFunction<double>(tree::TreeParams(2, 1), {2.0, 0.0})));
  EXPECT_EQ(to_json(cake).dump(), "[[2.0,0.5],[1.0,0.5]]");
}

TEST(SandwichCsv, ColumnsMatchHeader) {
  oracle::SandwichResult r;
  r.spec = oracle::ObjectiveSpec::top_kappa(2.0, 0.5);
  r.N = 2;
  r.depth = 3;
  r.F = 2.0;
  r.f = 1.0;
  r.lower = 1.875;
  r.upper = 2.0;
  r.gap = 1.0 / 15.0;
  r.evaluations = 42;
  r.seed = 1;
  const auto header = sandwich_csv_header();
  EXPECT_EQ(header, "kind,N,m,p,q,kappa,L,F,f,lower,upper,gap,evaluations,seed");
  const auto row = to_csv_row(r);
  EXPECT_EQ(std::count(row.begin(), row.end(), ','), std::count(header.begin(), header.end(), ','));
  EXPECT_EQ(row.rfind("top_kappa_p,2,3,2,2,0.5,0,2,1,1.875,2,", 0), 0u);
  const auto j = to_json(r);
  EXPECT_EQ(j.at("kind"), "top_kappa_p");
  EXPECT_EQ(j.at("m"), 3);
  EXPECT_DOUBLE_EQ(j.at("lower").get<double>(), 1.875);
  EXPECT_TRUE(j.contains("argmin"));
}

TEST(ExtremizerReportJson, Fields) {
  const auto j = to_json(extremal::chain_report(2, 1, 1.0, 2.0, 3.0));
  for (const char* key : {"target_value", "achieved_value", "achieved_f", "achieved_F", "depth", "relative_gap"}) {
    EXPECT_TRUE(j.contains(key)) << key;
  }
  EXPECT_DOUBLE_EQ(j.at("target_value").get<double>(), 4.5);
}

}  // namespace
}  // namespace bellman::io
