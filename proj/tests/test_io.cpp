#include <gtest/gtest.h>

#include <random>
#include <sstream>

#include "msstop/errors.hpp"
#include "msstop/io.hpp"
#include "msstop/scenario.hpp"
#include "test_support.hpp"

namespace msstop {
namespace {

Dataset parse(const std::string& text, std::vector<std::string>* warnings = nullptr) {
  std::istringstream in(text);
  return parse_history(in, warnings);
}

std::size_t error_line(const std::string& text) {
  try {
    parse(text);
  } catch (const ParseError& e) {
    return e.line();
  }
  return 0;
}

TEST(HistoryFile, MinimalFile) {
  const Dataset data = parse("T=1 K=3 G=1\n0 1 0 5\n");
  EXPECT_EQ(data.observed(), 5);
  EXPECT_EQ(data.unique_count(), 1u);
  EXPECT_EQ(data.design().occasions(0), 3);
}

TEST(HistoryFile, OutcomeAboveStateCountNamesTheLine) {
  EXPECT_EQ(error_line("T=1 K=2 G=2\n1 2 1\n0 3 1\n"), 3u);
}

TEST(HistoryFile, RowErrors) {
  EXPECT_EQ(error_line("T=1 K=3 G=1\n0 1 1\n"), 2u);          // too short
  EXPECT_EQ(error_line("T=1 K=3 G=1\n# c\n0 0 0 4\n"), 3u);   // never seen
  EXPECT_EQ(error_line("T=1 K=3 G=1\n0 1 0 0\n"), 2u);        // zero count
  EXPECT_EQ(error_line("T=2 K=1,1 G=2 avail=1|1,2\n2 1 1\n"), 2u);  // unavailable state
  EXPECT_THROW(parse("K=3 G=1\n0 1 0 5\n"), ParseError);
  EXPECT_THROW(parse("T=2 K=3 G=1\n0 1 0 5\n"), ParseError);
}

TEST(HistoryFile, NewtStyleHeader) {
  std::istringstream in("T=12 K=21*11,22 G=2 avail=1*8|1,2*4 Amax=12\n");
  const StudyDesign design = parse_design(in);
  EXPECT_EQ(design.periods(), 12);
  EXPECT_EQ(design.occasions(10), 21);
  EXPECT_EQ(design.occasions(11), 22);
  EXPECT_FALSE(design.available(7, 1));
  EXPECT_TRUE(design.available(8, 1));
  EXPECT_EQ(design.max_primary_age(), 12);
  EXPECT_EQ(design, newt_design());
}

TEST(HistoryFile, DuplicatesMergeWithWarning) {
  std::vector<std::string> warnings;
  const Dataset data = parse("T=1 K=2 G=1\n1 0 2\n0 1 1\n1 0 3\n", &warnings);
  EXPECT_EQ(data.observed(), 6);
  EXPECT_EQ(data.unique_count(), 2u);
  ASSERT_EQ(warnings.size(), 1u);
  EXPECT_NE(warnings[0].find("line 4"), std::string::npos);
  EXPECT_NE(warnings[0].find("line 2"), std::string::npos);
}

TEST(HistoryFile, WriteThenParseIsIdentity) {
  std::mt19937_64 rng(8);
  for (const auto& design : {paper_scenario(100).design, newt_design()}) {
    const auto params = testing::random_parameters(design, rng, 80);
    const auto data = simulate(params, design, 3).data;
    std::ostringstream out;
    write_history(out, data);
    EXPECT_EQ(parse(out.str()), data);
    std::ostringstream again;
    write_history(again, parse(out.str()));
    EXPECT_EQ(again.str(), out.str());
  }
}

TEST(Json, ParametersRoundTrip) {
  std::mt19937_64 rng(9);
  const auto design = paper_scenario(100).design;
  const auto params = testing::random_parameters(design, rng, 123.5);
  const auto back = parameters_from_json(nlohmann::json::parse(to_json(params).dump()), design);
  EXPECT_EQ(back.N, params.N);
  EXPECT_TRUE(back.s == params.s);
  EXPECT_EQ(back.p[2][4], params.p[2][4]);
  EXPECT_EQ(back.psi[1], params.psi[1]);
}

TEST(Json, ParametersMissingKeyIsParseError) {
  const auto design = paper_scenario(100).design;
  auto j = to_json(paper_scenario(100).params);
  j.erase("psi");
  EXPECT_THROW(parameters_from_json(j, design), ParseError);
  j = to_json(paper_scenario(100).params);
  j["r"] = {0.5, 0.6, 0.2};
  EXPECT_THROW(parameters_from_json(j, design), ConstraintError);
}

TEST(Json, DesignCarriesHeader) {
  const auto j = to_json(newt_design());
  std::istringstream in(j.at("header").get<std::string>());
  EXPECT_EQ(parse_design(in), newt_design());
}

}  // namespace
}  // namespace msstop
