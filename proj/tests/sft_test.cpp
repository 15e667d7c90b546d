#include "markov_krieger/sft.hpp"

#include <gtest/gtest.h>

#include "oracles.hpp"

namespace mk {
namespace {

TEST(Primitivity, FullShiftIsImmediatelyPositive) {
  EXPECT_EQ(primitivity_index(full_shift(2)).exponent, 1);
  EXPECT_EQ(primitivity_index(full_shift(3)).exponent, 1);
}

TEST(Primitivity, GoldenMeanNeedsThreeSteps) {
  const Adjacency g = golden_mean_shift();
  EXPECT_EQ(primitivity_index(g).exponent, 3);
}

TEST(Primitivity, ExponentIsMinimalAndStable) {
  // A^M > 0 and A^(M') > 0 for all M <= M' <= 2M, while A^(M-1) has a zero.
  const Adjacency g = golden_mean_shift();
  const int m = primitivity_index(g).exponent;
  Eigen::MatrixXi pw = Eigen::MatrixXi::Identity(3, 3);
  for (int e = 1; e <= 2 * m; ++e) {
    pw = (pw * g.a).unaryExpr([](int v) { return v > 0 ? 1 : 0; }).eval();
    if (e == m - 1) EXPECT_FALSE((pw.array() > 0).all());
    if (e >= m) EXPECT_TRUE((pw.array() > 0).all()) << "power " << e;
  }
}

TEST(Primitivity, PeriodicMatrixFailsWithinCap) {
  Eigen::MatrixXi swap(2, 2);
  swap << 0, 1, 1, 0;
  const Adjacency a = make_adjacency(swap);
  try {
    primitivity_index(a);
    FAIL() << "expected NotPrimitiveWithinCap";
  } catch (const Error& e) {
    EXPECT_EQ(e.code, Err::NotPrimitiveWithinCap);
  }
}

TEST(Adjacency, RejectsStrandedStates) {
  Eigen::MatrixXi a(2, 2);
  a << 1, 1, 0, 0;  // state 1 has no outgoing edge
  EXPECT_THROW(make_adjacency(a), Error);
  a << 1, 0, 1, 0;  // state 1 has no incoming edge
  EXPECT_THROW(make_adjacency(a), Error);
}

TEST(Blocks, SingleSymbolIsValid) {
  const Adjacency g = golden_mean_shift();
  EXPECT_EQ(validate_block(g, {2}).length(), 1);
}

TEST(Blocks, InadmissibleTransitionReportsPosition) {
  const Adjacency g = golden_mean_shift();
  try {
    validate_block(g, {0, 1, 2});  // 0 -> 1 is forbidden
    FAIL() << "expected InadmissibleTransition";
  } catch (const Error& e) {
    EXPECT_EQ(e.code, Err::InadmissibleTransition);
    EXPECT_EQ(e.index, 0);
  }
  try {
    validate_block(g, {2, 1, 1});  // 1 -> 1 is forbidden
    FAIL() << "expected InadmissibleTransition";
  } catch (const Error& e) {
    EXPECT_EQ(e.code, Err::InadmissibleTransition);
    EXPECT_EQ(e.index, 1);
  }
}

TEST(AdmissiblePairs, AcceptsDistinctBlocksWithSharedEndpoints) {
  const Adjacency f = full_shift(2);
  const AdmissiblePair pair = make_admissible_pair(
      f, validate_block(f, {0, 0, 0}), validate_block(f, {0, 1, 0}));
  EXPECT_EQ(pair.length, 3);
}

TEST(AdmissiblePairs, RejectsBadCombinations) {
  const Adjacency f = full_shift(2);
  const Block b000 = validate_block(f, {0, 0, 0});
  const Block b011 = validate_block(f, {0, 1, 1});
  const Block b00 = validate_block(f, {0, 0});
  try {
    make_admissible_pair(f, b000, b011);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code, Err::EndpointMismatch);
  }
  try {
    make_admissible_pair(f, b000, b00);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code, Err::LengthMismatch);
  }
  try {
    make_admissible_pair(f, b000, b000);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code, Err::IdenticalBlocks);
  }
}

TEST(Enumeration, FullShiftLengthThreeLoop) {
  const Adjacency f = full_shift(2);
  const auto blocks = enumerate_blocks(f, 0, 0, 3);
  ASSERT_EQ(blocks.size(), 2u);
  EXPECT_EQ(blocks[0].symbols, (std::vector<int>{0, 0, 0}));
  EXPECT_EQ(blocks[1].symbols, (std::vector<int>{0, 1, 0}));
}

TEST(Enumeration, ForbiddenEndpointsGiveEmptyList) {
  const Adjacency g = golden_mean_shift();
  EXPECT_TRUE(enumerate_blocks(g, 2, 2, 2).empty());  // A(2,2) = 0
}

TEST(Enumeration, CountMatchesAdjacencyPower) {
  for (const Adjacency& adj : {full_shift(2), golden_mean_shift()}) {
    Eigen::MatrixXi pw = Eigen::MatrixXi::Identity(adj.size(), adj.size());
    for (int len = 2; len <= 8; ++len) {
      pw = len == 2 ? adj.a : Eigen::MatrixXi(pw * adj.a);
      for (int alpha = 0; alpha < adj.size(); ++alpha)
        for (int beta = 0; beta < adj.size(); ++beta)
          EXPECT_EQ(static_cast<int>(enumerate_blocks(adj, alpha, beta, len).size()),
                    pw(alpha, beta))
              << "alpha=" << alpha << " beta=" << beta << " len=" << len;
    }
  }
}

TEST(Enumeration, AdmissiblePairsAppearInEnumeration) {
  const Adjacency g = golden_mean_shift();
  const AdmissiblePair pair = make_admissible_pair(
      g, validate_block(g, {0, 0, 0, 0}), validate_block(g, {0, 2, 1, 0}));
  const auto blocks = enumerate_blocks(g, 0, 0, 4);
  auto contains = [&blocks](const Block& b) {
    for (const Block& x : blocks)
      if (x == b) return true;
    return false;
  };
  EXPECT_TRUE(contains(pair.first));
  EXPECT_TRUE(contains(pair.second));
}

TEST(Concatenation, RevalidatesJunction) {
  const Adjacency g = golden_mean_shift();
  const Block left = validate_block(g, {0, 2});
  const Block good = validate_block(g, {1, 0});
  const Block bad = validate_block(g, {0, 2});
  EXPECT_EQ(concat_blocks(g, left, good).symbols,
            (std::vector<int>{0, 2, 1, 0}));
  try {
    concat_blocks(g, left, bad);  // junction 2 -> 0 forbidden
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code, Err::InadmissibleTransition);
  }
}

TEST(Words, ValidateWordChecksEveryCoordinate) {
  const Adjacency g = golden_mean_shift();
  const Word w = validate_word(g, -2, {0, 2, 1, 0, 0});
  EXPECT_EQ(w.hi(), 2);
  EXPECT_EQ(w.at(-1), 2);
  try {
    validate_word(g, 5, {0, 1});
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code, Err::InadmissibleWord);
    EXPECT_EQ(e.index, 5);
  }
}

}  // namespace
}  // namespace mk
