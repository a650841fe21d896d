#include <gtest/gtest.h>

#include <random>

#include "vizsim/error.hpp"
#include "vizsim/evalsuite.hpp"

using namespace vizsim;
using namespace vizsim::eval;

TEST(Consensus, SameGroupIsZeroDisjointIsOne) {
  const std::vector<GroupingRecord> recs{{"p", {{"a", "b"}, {"c"}}}};
  const auto m = consensus_matrix(recs);
  ASSERT_EQ(m.ids, (std::vector<std::string>{"a", "b", "c"}));
  EXPECT_EQ(m(0, 1), 0.0);
  EXPECT_EQ(m(0, 2), 1.0);
  EXPECT_EQ(m(1, 2), 1.0);
  EXPECT_EQ(m(2, 2), 0.0);
}

TEST(Consensus, HandCaseThreeParticipants) {
  // p1: {a,b} {c,d}; p2: {a,b,c} {d}; p3: {a,b} {b,c} {d}
  const std::vector<GroupingRecord> recs{
      {"p1", {{"a", "b"}, {"c", "d"}}},
      {"p2", {{"a", "b", "c"}, {"d"}}},
      {"p3", {{"a", "b"}, {"b", "c"}, {"d"}}},
  };
  const auto m = consensus_matrix(recs);
  // a-b: p1 0, p2 0, p3 c_ab=1, min(c_a=1, c_b=2)=1 -> 0
  EXPECT_NEAR(m(0, 1), 0.0, 1e-15);
  // a-c: 1, 0, 1
  EXPECT_NEAR(m(0, 2), 2.0 / 3.0, 1e-15);
  // b-c: 1, 0, 1 - 1/min(2,1) = 0
  EXPECT_NEAR(m(1, 2), 1.0 / 3.0, 1e-15);
  // c-d: 0, 1, 1
  EXPECT_NEAR(m(2, 3), 2.0 / 3.0, 1e-15);
  // a-d: 1, 1, 1
  EXPECT_NEAR(m(0, 3), 1.0, 1e-15);
  m.validate();
}

TEST(Consensus, OverlapUsesSmallerMembership) {
  // a and b each sit in two groups and share one.
  const std::vector<GroupingRecord> recs{{"p", {{"a", "b"}, {"b", "c"}, {"a", "c"}}}};
  const auto m = consensus_matrix(recs);
  EXPECT_EQ(m(0, 1), 1.0 - 1.0 / 2.0);
}

TEST(Consensus, DuplicateIdWithinGroupCountsOnce) {
  const std::vector<GroupingRecord> recs{{"p", {{"a", "a", "b"}, {"c"}}}};
  EXPECT_EQ(consensus_matrix(recs)(0, 1), 0.0);
}

TEST(Consensus, MissingPlacementThrows) {
  const std::vector<GroupingRecord> recs{{"p1", {{"a", "b"}, {"c"}}}, {"p2", {{"a", "b"}}}};
  try {
    consensus_matrix(recs);
    FAIL();
  } catch (const ValidationError& e) {
    const std::string msg = e.what();
    EXPECT_NE(msg.find("p2"), std::string::npos);
    EXPECT_NE(msg.find("c"), std::string::npos);
  }
}

TEST(Consensus, UnknownIdThrows) {
  const std::vector<GroupingRecord> recs{{"p", {{"a", "z"}, {"b"}}}};
  EXPECT_THROW(consensus_matrix(recs, {"a", "b"}), ValidationError);
}

TEST(Consensus, RandomGroupingsGiveValidMatrix) {
  std::mt19937_64 rng(5);
  std::vector<std::string> ids;
  for (int i = 0; i < 12; ++i) ids.push_back("s" + std::to_string(i));
  std::vector<GroupingRecord> recs;
  for (int p = 0; p < 8; ++p) {
    GroupingRecord r{"p" + std::to_string(p), std::vector<std::vector<std::string>>(4)};
    for (const auto& id : ids) {
      r.groups[rng() % 4].push_back(id);
      if (rng() % 5 == 0) r.groups[rng() % 4].push_back(id);
    }
    recs.push_back(r);
  }
  const auto m = consensus_matrix(recs, ids);
  m.validate();
  for (double v : m.values) {
    EXPECT_GE(v, 0.0);
    EXPECT_LE(v, 1.0);
  }
}

TEST(Consensus, JsonArrayAndSingleObject) {
  const auto arr = parse_groupings_json(R"([{"participant": "x", "groups": [["a","b"],["c"]]},
                                           {"groups": [["a"],["b","c"]]}])");
  ASSERT_EQ(arr.size(), 2u);
  EXPECT_EQ(arr[0].participant, "x");
  EXPECT_EQ(arr[1].participant, "1");
  EXPECT_EQ(grouping_ids(arr), (std::vector<std::string>{"a", "b", "c"}));
  const auto one = parse_groupings_json(R"({"participant": "y", "groups": [["a","b"]]})");
  ASSERT_EQ(one.size(), 1u);
  EXPECT_THROW(parse_groupings_json("[1, 2]"), ValidationError);
  EXPECT_THROW(parse_groupings_json("{"), ValidationError);
}
