// Tests for admissible block permutations and their cocycles: configuration
// validation, Radon-Nikodym derivatives against brute-force measure ratios,
// block exchange on words (bijectivity by enumeration), the log-derivative
// sequence D_k with its surrogates and uniform bound, exhaustive
// distinguishing-pair search, the sign-coherent placement recipes, and the
// swap indicators Y_k with exact moments against path enumeration.
#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <set>
#include <string>
#include <vector>

#include <gtest/gtest.h>

#include "markov_krieger/classifier.hpp"
#include "markov_krieger/cocycles.hpp"
#include "markov_krieger/errors.hpp"
#include "markov_krieger/examples.hpp"
#include "markov_krieger/measure.hpp"
#include "markov_krieger/rng.hpp"
#include "markov_krieger/sft.hpp"
#include "oracles.hpp"

namespace mk {
namespace {

Matrix two_by_two(double a, double b, double c, double d) {
  Matrix m(2, 2);
  m << a, b, c, d;
  return m;
}

Matrix golden_rows(double p, double qp) {
  Matrix m(3, 3);
  m << p, 0.0, 1.0 - p, qp, 0.0, 1.0 - qp, 0.0, 1.0, 0.0;
  return m;
}

Matrix sparse_rows(double p) {
  Matrix m(2, 2);
  m << p, 1.0 - p, 1.0, 0.0;
  return m;
}

Adjacency sparse_adjacency() {
  Eigen::MatrixXi a(2, 2);
  a << 1, 1, 1, 0;
  return make_adjacency(a);
}

// Fullshift measure with one deviating stretch: Q outside, P on [1, 9).
MarkovMeasure window_measure() {
  const Adjacency adj = full_shift(2);
  const Matrix q = two_by_two(0.5, 0.5, 0.4, 0.6);
  const Matrix p = two_by_two(0.62, 0.38, 0.45, 0.55);
  return make_measure(
      adj, make_transition_sequence(adj, q, 0, {Segment{1, 9, p}}, 9, q,
                                    nullptr));
}

// Two-sided constant-tail measure with an explicit deviating stretch
// [1, stop) in between.
MarkovMeasure stretch_measure(const Adjacency& adj, const Matrix& q,
                              const Matrix& p, std::int64_t stop) {
  return make_measure(
      adj, make_transition_sequence(adj, q, 0, {Segment{1, stop, p}}, stop, q,
                                    nullptr));
}

AdmissiblePair fullshift_pair() {
  const Adjacency adj = full_shift(2);
  return make_admissible_pair(adj, validate_block(adj, {0, 0, 0}),
                              validate_block(adj, {0, 1, 0}));
}

AdmissiblePair golden_pair() {
  const Adjacency adj = golden_mean_shift();
  return make_admissible_pair(adj, validate_block(adj, {0, 0, 0, 0}),
                              validate_block(adj, {0, 2, 1, 0}));
}

AdmissibleConfiguration repeated_config(const AdmissiblePair& pair,
                                        std::vector<std::int64_t> js,
                                        std::vector<std::int64_t> is, int L,
                                        int M) {
  AdmissibleConfiguration cfg;
  cfg.pairs.assign(js.size(), pair);
  cfg.j_indices = std::move(js);
  cfg.i_indices = std::move(is);
  cfg.length_bound = L;
  cfg.mixing_exponent = M;
  return cfg;
}

ExampleInput closed_input(double q, PRule p, ScheduleRule s,
                          SummableRule r = GeometricBound{1.0, 0.5}) {
  ExampleInput in;
  in.q = q;
  in.p = std::move(p);
  in.schedule = std::move(s);
  in.r = std::move(r);
  return in;
}

ExampleInput constructed_input() {
  return inductive_construct(GeometricBound{1.0, 0.5},
                             ConstructorSeeds{0.7, 1, 2, 3, 0.6}, 50);
}

template <typename Fn>
void expect_error(Err code, Fn&& fn) {
  try {
    fn();
    FAIL() << "expected an Error with code " << static_cast<int>(code);
  } catch (const Error& e) {
    EXPECT_EQ(e.code, code) << e.what();
  }
}

template <typename Fn>
void expect_error_at(Err code, std::int64_t index, Fn&& fn) {
  try {
    fn();
    FAIL() << "expected an Error with code " << static_cast<int>(code);
  } catch (const Error& e) {
    EXPECT_EQ(e.code, code) << e.what();
    EXPECT_EQ(e.index, index) << e.what();
  }
}

bool word_matches(const Word& w, std::int64_t base, const Block& b) {
  for (std::size_t t = 0; t < b.symbols.size(); ++t) {
    if (w.at(base + static_cast<std::int64_t>(t)) != b.symbols[t]) {
      return false;
    }
  }
  return true;
}

int draw_symbol(const RowVector& probs, double u) {
  double acc = 0.0;
  for (int s = 0; s < probs.size(); ++s) {
    acc += probs(s);
    if (u < acc) return s;
  }
  return static_cast<int>(probs.size()) - 1;
}

// Ancestral sampling of one trajectory on [lo, hi]: coordinate lo from its
// marginal, then forward transition rows.
Word sample_word(const MarkovMeasure& mu, std::int64_t lo, std::int64_t hi,
                 const CounterRng& rng, std::uint64_t stream) {
  std::vector<int> symbols;
  std::uint64_t counter = 0;
  const RowVector start = coordinate_distribution(mu, lo);
  symbols.push_back(draw_symbol(start, rng.uniform(stream, counter++)));
  for (std::int64_t n = lo; n < hi; ++n) {
    const Matrix p = mu.p(n);
    const RowVector row = p.row(symbols.back());
    symbols.push_back(draw_symbol(row, rng.uniform(stream, counter++)));
  }
  return Word{lo, std::move(symbols)};
}

// ---------------------------------------------------------------------------
// validate_configuration
// ---------------------------------------------------------------------------

TEST(ValidateConfigurationTest, GoldenMeanSevenSpacingIsValid) {
  const AdmissibleConfiguration cfg = validate_configuration(
      golden_mean_shift(),
      repeated_config(golden_pair(), {7, 14, 21}, {-7, -14, -21}, 4, 3));
  EXPECT_EQ(cfg.rounds(), 3);
  EXPECT_EQ(cfg.length_bound, 4);
  EXPECT_EQ(cfg.mixing_exponent, 3);
}

TEST(ValidateConfigurationTest, EmptyConfigurationIsVacuouslyValid) {
  const AdmissibleConfiguration cfg = validate_configuration(
      golden_mean_shift(), repeated_config(golden_pair(), {}, {}, 4, 3));
  EXPECT_EQ(cfg.rounds(), 0);
}

TEST(ValidateConfigurationTest, SixSpacingOnFutureSideThrows) {
  expect_error_at(Err::SpacingViolation, 2, [] {
    validate_configuration(
        golden_mean_shift(),
        repeated_config(golden_pair(), {7, 13, 20}, {-7, -14, -21}, 4, 3));
  });
}

TEST(ValidateConfigurationTest, SixSpacingOnPastSideThrows) {
  expect_error_at(Err::SpacingViolation, 2, [] {
    validate_configuration(
        golden_mean_shift(),
        repeated_config(golden_pair(), {7, 14}, {-7, -13}, 4, 3));
  });
}

TEST(ValidateConfigurationTest, FuturePlacementsMustBePositive) {
  expect_error_at(Err::SpacingViolation, 1, [] {
    validate_configuration(
        golden_mean_shift(),
        repeated_config(golden_pair(), {0, 7}, {-7, -14}, 4, 3));
  });
}

TEST(ValidateConfigurationTest, PastPlacementsMustBeNegative) {
  expect_error_at(Err::SpacingViolation, 1, [] {
    validate_configuration(golden_mean_shift(),
                           repeated_config(golden_pair(), {7}, {0}, 4, 3));
  });
}

TEST(ValidateConfigurationTest, FirstRoundCrossGapEnforced) {
  // j_1 = 2 and i_1 = -2 are individually fine but only 4 apart; the swap
  // windows would touch within one mixing stretch.
  expect_error_at(Err::SpacingViolation, 0, [] {
    validate_configuration(golden_mean_shift(),
                           repeated_config(golden_pair(), {2}, {-2}, 4, 3));
  });
}

TEST(ValidateConfigurationTest, OversizedBlockThrowsLengthViolation) {
  // Bound L = 3 cannot carry length-4 pairs. M = 3 keeps the other checks
  // quiet.
  expect_error_at(Err::LengthViolation, 1, [] {
    validate_configuration(golden_mean_shift(),
                           repeated_config(golden_pair(), {7}, {-7}, 3, 3));
  });
}

TEST(ValidateConfigurationTest, InadmissiblePairBlocksThrowPairInvalid) {
  AdmissibleConfiguration cfg;
  cfg.pairs.push_back(
      AdmissiblePair{Block{{0, 1, 1, 0}}, Block{{0, 2, 1, 0}}, 4});
  cfg.j_indices = {7};
  cfg.i_indices = {-7};
  cfg.length_bound = 4;
  cfg.mixing_exponent = 3;
  expect_error_at(Err::PairInvalid, 1, [&] {
    validate_configuration(golden_mean_shift(), cfg);
  });
}

TEST(ValidateConfigurationTest, StoredLengthMustMatchBlocks) {
  AdmissibleConfiguration cfg =
      repeated_config(golden_pair(), {7}, {-7}, 5, 3);
  cfg.pairs[0].length = 5;
  expect_error_at(Err::PairInvalid, 1, [&] {
    validate_configuration(golden_mean_shift(), cfg);
  });
}

TEST(ValidateConfigurationTest, ArraySizesMustAgree) {
  AdmissibleConfiguration cfg =
      repeated_config(golden_pair(), {7, 14}, {-7, -14}, 4, 3);
  cfg.i_indices.pop_back();
  expect_error(Err::InvalidInput,
               [&] { validate_configuration(golden_mean_shift(), cfg); });
}

TEST(ValidateConfigurationTest, MixingExponentMustClearPrimitivityIndex) {
  // The golden mean shift needs M >= 3; M = 2 leaves zero entries in A^M.
  expect_error(Err::InvalidInput, [] {
    validate_configuration(golden_mean_shift(),
                           repeated_config(golden_pair(), {7}, {-7}, 4, 2));
  });
  // A larger exponent is fine, but it widens the required spacing.
  EXPECT_NO_THROW(validate_configuration(
      golden_mean_shift(),
      repeated_config(golden_pair(), {8, 16}, {-8, -16}, 4, 4)));
  expect_error_at(Err::SpacingViolation, 2, [] {
    validate_configuration(
        golden_mean_shift(),
        repeated_config(golden_pair(), {8, 15}, {-8, -16}, 4, 4));
  });
}

TEST(ValidateConfigurationTest, LengthBoundBelowThreeRejected) {
  expect_error(Err::InvalidInput, [] {
    validate_configuration(golden_mean_shift(),
                           repeated_config(golden_pair(), {}, {}, 2, 3));
  });
}

// ---------------------------------------------------------------------------
// make_permutation_spec / reversed_spec
// ---------------------------------------------------------------------------

TEST(PermutationSpecTest, OverlappingBlockWindowsThrow) {
  expect_error(Err::SpacingViolation, [] {
    make_permutation_spec(full_shift(2), PermutationKind::Asymmetric,
                          fullshift_pair(), 0, 2);
  });
  EXPECT_NO_THROW(make_permutation_spec(
      full_shift(2), PermutationKind::Asymmetric, fullshift_pair(), 0, 3));
}

TEST(PermutationSpecTest, PairIsRevalidatedAgainstAdjacency) {
  expect_error(Err::PairInvalid, [] {
    make_permutation_spec(full_shift(2), PermutationKind::Asymmetric,
                          golden_pair(), 0, 10);
  });
}

TEST(PermutationSpecTest, ReversedSpecSwapsTheBlocks) {
  const PermutationSpec spec = make_permutation_spec(
      full_shift(2), PermutationKind::Asymmetric, fullshift_pair(), -5, 1);
  const PermutationSpec rev = reversed_spec(spec);
  EXPECT_EQ(rev.pair.first.symbols, spec.pair.second.symbols);
  EXPECT_EQ(rev.pair.second.symbols, spec.pair.first.symbols);
  EXPECT_EQ(rev.i, spec.i);
  EXPECT_EQ(rev.j, spec.j);
}

// ---------------------------------------------------------------------------
// rn_derivative
// ---------------------------------------------------------------------------

TEST(RnDerivativeTest, IidUniformIsExactlyOne) {
  const MarkovMeasure mu =
      homogeneous_measure(full_shift(2), two_by_two(0.5, 0.5, 0.5, 0.5));
  const PermutationSpec spec = make_permutation_spec(
      mu.adjacency, PermutationKind::Asymmetric, fullshift_pair(), -5, 2);
  const RnDerivative r = rn_derivative(mu, spec);
  EXPECT_EQ(r.value, 1.0);
  EXPECT_EQ(r.numerator, r.denominator);
}

TEST(RnDerivativeTest, HomogeneousSkewedIsStillExactlyOne) {
  // Any homogeneous measure: both windows carry the same weights, so the
  // four-product ratio collapses bitwise.
  const MarkovMeasure mu =
      homogeneous_measure(full_shift(2), two_by_two(0.5, 0.5, 0.4, 0.6));
  const PermutationSpec spec = make_permutation_spec(
      mu.adjacency, PermutationKind::Asymmetric, fullshift_pair(), -4, 7);
  EXPECT_EQ(rn_derivative(mu, spec).value, 1.0);
}

TEST(RnDerivativeTest, MatchesExplicitProductFormula) {
  const MarkovMeasure mu = window_measure();
  const PermutationSpec spec = make_permutation_spec(
      mu.adjacency, PermutationKind::Asymmetric, fullshift_pair(), -2, 3);
  // Coordinates -2, -1 sit in the left tail, 3, 4 in the deviating stretch.
  const Matrix q = mu.p(-2);
  const Matrix p = mu.p(3);
  const double wi_b = q(0, 0) * q(0, 0);
  const double wi_bp = q(0, 1) * q(1, 0);
  const double wj_b = p(0, 0) * p(0, 0);
  const double wj_bp = p(0, 1) * p(1, 0);
  const RnDerivative r = rn_derivative(mu, spec);
  EXPECT_EQ(r.numerator, wi_bp * wj_b);
  EXPECT_EQ(r.denominator, wi_b * wj_bp);
  EXPECT_EQ(r.value, (wi_bp * wj_b) / (wi_b * wj_bp));
}

TEST(RnDerivativeTest, MatchesMeasureRatioOnEveryRefinedWord) {
  const MarkovMeasure mu = window_measure();
  const PermutationSpec spec = make_permutation_spec(
      mu.adjacency, PermutationKind::Asymmetric, fullshift_pair(), -2, 3);
  const RnDerivative r = rn_derivative(mu, spec);

  // Refine the primary cell over the window [-4, 6]: for every admissible
  // word in the cell, mu(V[word]) / mu([word]) must equal the derivative.
  const std::int64_t lo = -4;
  const auto all = oracle::words(mu.adjacency, 11);
  int matched = 0;
  for (const auto& symbols : all) {
    const Word w{lo, symbols};
    if (!word_matches(w, spec.i, spec.pair.first) ||
        !word_matches(w, spec.j, spec.pair.second)) {
      continue;
    }
    ++matched;
    const Word image = apply_permutation(spec, w);
    const double before =
        cylinder_measure(mu, Cylinder{lo, Block{w.symbols}});
    const double after =
        cylinder_measure(mu, Cylinder{lo, Block{image.symbols}});
    EXPECT_NEAR(after / before, r.value, 1e-12 * r.value);
  }
  EXPECT_EQ(matched, 32);  // 5 free coordinates on the fullshift

  // Cell-level ratio through the independent multi-cylinder route.
  const std::array<Cylinder, 2> primary{Cylinder{-2, spec.pair.first},
                                        Cylinder{3, spec.pair.second}};
  const std::array<Cylinder, 2> swapped{Cylinder{-2, spec.pair.second},
                                        Cylinder{3, spec.pair.first}};
  const double ratio = oracle::multi_cylinder_by_gaps(mu, swapped) /
                       oracle::multi_cylinder_by_gaps(mu, primary);
  EXPECT_NEAR(ratio, r.value, 1e-12 * r.value);
}

TEST(RnDerivativeTest, ReverseSpecIsTheExactReciprocal) {
  const MarkovMeasure mu = window_measure();
  const PermutationSpec spec = make_permutation_spec(
      mu.adjacency, PermutationKind::Asymmetric, fullshift_pair(), -2, 3);
  const RnDerivative fwd = rn_derivative(mu, spec);
  const RnDerivative rev = rn_derivative(mu, reversed_spec(spec));
  // The defining ratios cross exactly: the product of the true ratios is 1.
  EXPECT_EQ(fwd.numerator, rev.denominator);
  EXPECT_EQ(fwd.denominator, rev.numerator);
  EXPECT_NE(fwd.value, 1.0);  // the instance is genuinely non-symmetric
  EXPECT_NEAR(fwd.value * rev.value, 1.0, 1e-15);
}

TEST(RnDerivativeTest, SwappedCellIsTheReciprocalCell) {
  const MarkovMeasure mu = window_measure();
  const PermutationSpec spec = make_permutation_spec(
      mu.adjacency, PermutationKind::Symmetric, fullshift_pair(), -2, 3);
  const RnDerivative primary = rn_derivative(mu, spec, DomainCell::Primary);
  const RnDerivative swapped = rn_derivative(mu, spec, DomainCell::Swapped);
  EXPECT_EQ(primary.numerator, swapped.denominator);
  EXPECT_EQ(primary.denominator, swapped.numerator);
  // For the asymmetric kind the swapped cell is the inverse map's value.
  const PermutationSpec asym = make_permutation_spec(
      mu.adjacency, PermutationKind::Asymmetric, fullshift_pair(), -2, 3);
  EXPECT_EQ(rn_derivative(mu, asym, DomainCell::Swapped).value,
            swapped.value);
}

// ---------------------------------------------------------------------------
// apply_permutation
// ---------------------------------------------------------------------------

TEST(ApplyPermutationTest, ExchangesTheBlocks) {
  const PermutationSpec spec = make_permutation_spec(
      full_shift(2), PermutationKind::Asymmetric, fullshift_pair(), -2, 3);
  const Word w{-2, {0, 0, 0, 1, 0, 0, 1, 0}};  // B at -2, B' at 3
  const Word image = apply_permutation(spec, w);
  EXPECT_EQ(image.lo, w.lo);
  EXPECT_EQ(image.symbols, (std::vector<int>{0, 1, 0, 1, 0, 0, 0, 0}));
}

TEST(ApplyPermutationTest, SymmetricIsAnInvolution) {
  const PermutationSpec spec = make_permutation_spec(
      full_shift(2), PermutationKind::Symmetric, fullshift_pair(), -2, 3);
  const Word w{-2, {0, 0, 0, 1, 0, 0, 1, 0}};
  const Word once = apply_permutation(spec, w);
  const Word twice = apply_permutation(spec, once);
  EXPECT_EQ(twice.symbols, w.symbols);
  // Starting from the swapped cell works too.
  EXPECT_EQ(apply_permutation(spec, once).symbols, w.symbols);
}

TEST(ApplyPermutationTest, AsymmetricRejectsTheSwappedCell) {
  const PermutationSpec spec = make_permutation_spec(
      full_shift(2), PermutationKind::Asymmetric, fullshift_pair(), -2, 3);
  const Word swapped{-2, {0, 1, 0, 1, 0, 0, 0, 0}};
  expect_error(Err::OutsideDomain,
               [&] { apply_permutation(spec, swapped); });
}

TEST(ApplyPermutationTest, NonMatchingWordIsOutsideDomain) {
  const PermutationSpec spec = make_permutation_spec(
      full_shift(2), PermutationKind::Symmetric, fullshift_pair(), -2, 3);
  const Word neither{-2, {1, 1, 1, 1, 1, 1, 1, 1}};
  expect_error(Err::OutsideDomain,
               [&] { apply_permutation(spec, neither); });
}

TEST(ApplyPermutationTest, UncoveredWindowIsInsufficient) {
  const PermutationSpec spec = make_permutation_spec(
      full_shift(2), PermutationKind::Asymmetric, fullshift_pair(), -2, 3);
  const Word short_window{0, {0, 1, 0, 0, 1, 0}};
  expect_error(Err::InsufficientWindow,
               [&] { apply_permutation(spec, short_window); });
}

TEST(ApplyPermutationTest, BijectsTheCellsByEnumeration) {
  const Adjacency adj = golden_mean_shift();
  const PermutationSpec spec = make_permutation_spec(
      adj, PermutationKind::Asymmetric, golden_pair(), 0, 7);

  std::vector<Word> primary;
  std::set<std::vector<int>> swapped;
  for (const auto& symbols : oracle::words(adj, 11)) {
    const Word w{0, symbols};
    if (word_matches(w, 0, spec.pair.first) &&
        word_matches(w, 7, spec.pair.second)) {
      primary.push_back(w);
    }
    if (word_matches(w, 0, spec.pair.second) &&
        word_matches(w, 7, spec.pair.first)) {
      swapped.insert(symbols);
    }
  }
  ASSERT_GT(primary.size(), 0u);
  EXPECT_EQ(primary.size(), swapped.size());

  std::set<std::vector<int>> images;
  for (const Word& w : primary) {
    const Word image = apply_permutation(spec, w);
    EXPECT_NO_THROW(validate_word(adj, image.lo, image.symbols));
    images.insert(image.symbols);
  }
  // Injective (distinct images) and onto the swapped cell.
  EXPECT_EQ(images.size(), primary.size());
  EXPECT_EQ(images, swapped);
}

// ---------------------------------------------------------------------------
// dk_sequence
// ---------------------------------------------------------------------------

TEST(DkSequenceTest, HomogeneousMeasureGivesExactZeros) {
  const MarkovMeasure mu =
      homogeneous_measure(full_shift(2), two_by_two(0.5, 0.5, 0.4, 0.6));
  const AdmissibleConfiguration cfg = repeated_config(
      fullshift_pair(), {2, 6, 10}, {-2, -6, -10}, 3, 1);
  const DkSequence dk = dk_sequence(cfg, mu, 3);
  ASSERT_EQ(dk.terms.size(), 3u);
  for (const DkTerm& t : dk.terms) {
    EXPECT_EQ(t.value, 0.0);
    EXPECT_EQ(t.surrogate, 0.0);
    EXPECT_EQ(t.bracket.lower, 0.0);
    EXPECT_EQ(t.bracket.upper, 0.0);
  }
}

TEST(DkSequenceTest, ExpOfDkMatchesTheDerivative) {
  const MarkovMeasure mu = window_measure();
  const AdmissibleConfiguration cfg = repeated_config(
      fullshift_pair(), {2, 6, 10}, {-2, -6, -10}, 3, 1);
  const DkSequence dk = dk_sequence(cfg, mu, 3);
  ASSERT_EQ(dk.terms.size(), 3u);
  for (std::size_t k = 0; k < dk.terms.size(); ++k) {
    const PermutationSpec spec = make_permutation_spec(
        mu.adjacency, PermutationKind::Asymmetric, cfg.pairs[k],
        cfg.i_indices[k], cfg.j_indices[k]);
    const RnDerivative r = rn_derivative(mu, spec);
    EXPECT_EQ(dk.terms[k].numerator, r.numerator);
    EXPECT_EQ(dk.terms[k].denominator, r.denominator);
    EXPECT_NEAR(std::exp(dk.terms[k].value), r.value, 1e-12 * r.value);
  }
  // Rounds 1 and 2 touch the deviating stretch; round 3 does not.
  EXPECT_NE(dk.terms[0].value, 0.0);
  EXPECT_NE(dk.terms[1].value, 0.0);
  EXPECT_EQ(dk.terms[2].value, 0.0);
}

TEST(DkSequenceTest, UniformBoundAndBracketsHold) {
  const MarkovMeasure mu = window_measure();
  const AdmissibleConfiguration cfg = repeated_config(
      fullshift_pair(), {2, 6, 10}, {-2, -6, -10}, 3, 1);
  const DkSequence dk = dk_sequence(cfg, mu, 3);
  EXPECT_DOUBLE_EQ(
      dk.bound, 2.0 * 3.0 * std::log((1.0 - mu.doeblin) / mu.doeblin));
  for (const DkTerm& t : dk.terms) {
    EXPECT_LE(std::abs(t.value), dk.bound);
    // Surrogate and value share a sign; the bracket encloses the value,
    // strictly when the ratio is not 1.
    EXPECT_EQ(t.value > 0.0, t.surrogate > 0.0);
    EXPECT_EQ(t.value < 0.0, t.surrogate < 0.0);
    EXPECT_LE(t.bracket.lower, t.value);
    EXPECT_LE(t.value, t.bracket.upper);
    if (t.surrogate != 0.0) {
      EXPECT_LT(t.bracket.lower, t.value);
      EXPECT_LT(t.value, t.bracket.upper);
    }
  }
}

TEST(DkSequenceTest, RoundsAreClamped) {
  const MarkovMeasure mu = window_measure();
  const AdmissibleConfiguration cfg = repeated_config(
      fullshift_pair(), {2, 6, 10}, {-2, -6, -10}, 3, 1);
  EXPECT_EQ(dk_sequence(cfg, mu, 100).terms.size(), 3u);
  EXPECT_EQ(dk_sequence(cfg, mu, 2).terms.size(), 2u);
  EXPECT_EQ(dk_sequence(cfg, mu, 0).terms.size(), 0u);
}

// ---------------------------------------------------------------------------
// find_distinguishing_pair
// ---------------------------------------------------------------------------

TEST(FindDistinguishingPairTest, TwoStateAnchor) {
  const Matrix p = two_by_two(0.5, 0.5, 0.4, 0.6);
  const Matrix q = two_by_two(0.6, 0.4, 0.4, 0.6);
  const DistinguishingPair hit = find_distinguishing_pair(p, q, 6);
  EXPECT_EQ(hit.pair.first.symbols, (std::vector<int>{0, 0, 0}));
  EXPECT_EQ(hit.pair.second.symbols, (std::vector<int>{0, 1, 0}));
  EXPECT_EQ(hit.alpha, 0);
  EXPECT_EQ(hit.beta, 0);
  // P(B) Q(B') - Q(B) P(B') = 0.25 * 0.16 - 0.36 * 0.20.
  EXPECT_NEAR(hit.cross_gap, -0.032, 1e-15);
}

TEST(FindDistinguishingPairTest, GoldenMeanNeedsLengthFour) {
  // On the golden mean shift every (alpha, beta) carries at most one block
  // of length 3, so no pair exists below length 4.
  const Matrix p = golden_rows(0.5, 0.6);
  const Matrix q = golden_rows(0.55, 0.6);
  expect_error(Err::NoneFoundWithinLen,
               [&] { find_distinguishing_pair(p, q, 3); });
  const DistinguishingPair hit = find_distinguishing_pair(p, q, 4);
  EXPECT_EQ(hit.pair.first.symbols, (std::vector<int>{0, 0, 0, 0}));
  EXPECT_EQ(hit.pair.second.symbols, (std::vector<int>{0, 2, 1, 0}));
  // 0.5^3 * (0.45 * 0.6) - 0.55^3 * (0.5 * 0.6).
  EXPECT_NEAR(hit.cross_gap, 0.125 * 0.27 - 0.166375 * 0.3, 1e-15);
}

TEST(FindDistinguishingPairTest, SkipsEqualCrossProductsInSearchOrder) {
  // Three-state fullshift, matrices differing only in row 2: the first
  // candidate pair ([0,0,0],[0,1,0]) never touches row 2 and must be
  // skipped in favour of ([0,0,0],[0,2,0]).
  Matrix p(3, 3);
  p << 0.3, 0.3, 0.4, 0.2, 0.5, 0.3, 0.25, 0.25, 0.5;
  Matrix q(3, 3);
  q << 0.3, 0.3, 0.4, 0.2, 0.5, 0.3, 0.3, 0.3, 0.4;
  const DistinguishingPair hit = find_distinguishing_pair(p, q, 5);
  EXPECT_EQ(hit.pair.first.symbols, (std::vector<int>{0, 0, 0}));
  EXPECT_EQ(hit.pair.second.symbols, (std::vector<int>{0, 2, 0}));
  EXPECT_NEAR(hit.cross_gap, 0.09 * (0.4 * 0.3) - 0.09 * (0.4 * 0.25),
              1e-15);

  // Independent replay of the documented order: length, then endpoints,
  // then lexicographic block pairs.  Every candidate before the hit must
  // have a vanishing gap.
  const Adjacency adj = full_shift(3);
  bool reached_hit = false;
  for (int length = 3; length <= 5 && !reached_hit; ++length) {
    for (int alpha = 0; alpha < 3 && !reached_hit; ++alpha) {
      for (int beta = 0; beta < 3 && !reached_hit; ++beta) {
        const auto blocks = enumerate_blocks(adj, alpha, beta, length);
        for (std::size_t a = 0; a < blocks.size() && !reached_hit; ++a) {
          for (std::size_t b = a + 1; b < blocks.size(); ++b) {
            const double gap =
                block_product(p, blocks[a]) * block_product(q, blocks[b]) -
                block_product(q, blocks[a]) * block_product(p, blocks[b]);
            if (blocks[a].symbols == hit.pair.first.symbols &&
                blocks[b].symbols == hit.pair.second.symbols) {
              reached_hit = true;
              EXPECT_NEAR(gap, hit.cross_gap, 1e-18);
              break;
            }
            EXPECT_LE(std::abs(gap), kCrossRatioTol)
                << "candidate before the hit has a nonzero gap";
          }
        }
      }
    }
  }
  EXPECT_TRUE(reached_hit);
}

TEST(FindDistinguishingPairTest, RejectsBadInput) {
  const Matrix p = two_by_two(0.5, 0.5, 0.4, 0.6);
  expect_error(Err::InvalidInput, [&] { find_distinguishing_pair(p, p, 5); });
  expect_error(Err::InvalidInput, [&] {
    find_distinguishing_pair(p, two_by_two(0.7, 0.4, 0.4, 0.6), 5);
  });
  expect_error(Err::SupportMismatch, [&] {
    find_distinguishing_pair(p, two_by_two(0.5, 0.5, 1.0, 0.0), 5);
  });
  const Matrix perm = two_by_two(0.0, 1.0, 1.0, 0.0);
  expect_error(Err::NotPrimitiveWithinCap,
               [&] { find_distinguishing_pair(perm, perm, 5); });
  expect_error(Err::NoneFoundWithinLen, [&] {
    find_distinguishing_pair(p, two_by_two(0.6, 0.4, 0.4, 0.6), 2);
  });
}

// ---------------------------------------------------------------------------
// build_configuration
// ---------------------------------------------------------------------------

TEST(BuildConfigurationTest, ConstructedFullshiftPlacements) {
  const MarkovMeasure mu =
      build_example_measure(constructed_input(), ExampleFamily::Fullshift2);
  const BuiltConfiguration bc =
      build_configuration(mu, ConfigurationFamily::TwoStateFullshift, 8);

  EXPECT_EQ(bc.sign, +1);
  EXPECT_EQ(bc.target_row, 0);
  EXPECT_EQ(bc.selector, std::vector<int>(8, 0));
  EXPECT_EQ(bc.certificate, SeriesClass::DivergesCertified);
  EXPECT_FALSE(bc.certificate_detail.empty());

  // Coordinate 1 is a one-step plateau (its successor sits at the base
  // value), so the first coherent placement is 3, then greedy spacing 4.
  EXPECT_EQ(bc.configuration.j_indices,
            (std::vector<std::int64_t>{3, 7, 11, 15, 19, 23, 27, 31}));
  EXPECT_EQ(bc.configuration.i_indices,
            (std::vector<std::int64_t>{-1, -5, -9, -13, -17, -21, -25, -29}));
  for (const AdmissiblePair& pair : bc.configuration.pairs) {
    EXPECT_EQ(pair.first.symbols, (std::vector<int>{0, 0, 0}));
    EXPECT_EQ(pair.second.symbols, (std::vector<int>{0, 1, 0}));
  }
  for (const std::int64_t j : bc.configuration.j_indices) {
    EXPECT_GT(mu.p(j)(0, 0), 0.5);
    EXPECT_GT(mu.p(j + 1)(0, 0), 0.5);
  }
  const DkSequence dk = dk_sequence(bc.configuration, mu, 8);
  for (const DkTerm& t : dk.terms) EXPECT_GT(t.value, 0.0);
}

TEST(BuildConfigurationTest, ConstructedGoldenMeanPlacements) {
  const MarkovMeasure mu =
      build_example_measure(constructed_input(), ExampleFamily::GoldenMean);
  const BuiltConfiguration bc =
      build_configuration(mu, ConfigurationFamily::GoldenMean, 6);

  EXPECT_EQ(bc.sign, +1);
  EXPECT_EQ(bc.target_row, 0);
  EXPECT_EQ(bc.selector, std::vector<int>(6, 0));
  EXPECT_EQ(bc.certificate, SeriesClass::DivergesCertified);
  EXPECT_EQ(bc.configuration.j_indices,
            (std::vector<std::int64_t>{3, 10, 17, 24, 31, 38}));
  EXPECT_EQ(bc.configuration.i_indices,
            (std::vector<std::int64_t>{-4, -11, -18, -25, -32, -39}));
  for (const AdmissiblePair& pair : bc.configuration.pairs) {
    EXPECT_EQ(pair.first.symbols, (std::vector<int>{0, 0, 0, 0}));
    EXPECT_EQ(pair.second.symbols, (std::vector<int>{0, 2, 1, 0}));
  }
  const DkSequence dk = dk_sequence(bc.configuration, mu, 6);
  for (const DkTerm& t : dk.terms) EXPECT_GT(t.value, 0.0);
}

TEST(BuildConfigurationTest, FourLogExpansionOnPlateauFullshift) {
  const ExampleInput in =
      closed_input(0.6, PowerOffsetP{0.2, 0.4}, AffineSchedule{10, 5});
  const MarkovMeasure mu = build_example_measure(in, ExampleFamily::Fullshift2);
  const BuiltConfiguration bc =
      build_configuration(mu, ConfigurationFamily::TwoStateFullshift, 6);
  EXPECT_EQ(bc.selector, std::vector<int>(6, 0));

  const DkSequence dk = dk_sequence(bc.configuration, mu, 6);
  for (std::size_t k = 0; k < dk.terms.size(); ++k) {
    const std::int64_t i = bc.configuration.i_indices[k];
    const std::int64_t j = bc.configuration.j_indices[k];
    const auto p0 = [&](std::int64_t n) { return mu.p(n)(0, 0); };
    const auto p1 = [&](std::int64_t n) { return mu.p(n)(0, 1); };
    const auto q0 = [&](std::int64_t n) { return mu.p(n)(1, 0); };
    const double expected =
        std::log(p0(j) / p0(i)) + std::log(p1(i) / p1(j)) +
        std::log(p0(j + 1) / p0(i + 1)) + std::log(q0(i + 1) / q0(j + 1));
    EXPECT_NEAR(dk.terms[k].value, expected, 1e-12);
    EXPECT_GT(dk.terms[k].value, 0.0);
  }
}

TEST(BuildConfigurationTest, FiveLogExpansionOnPlateauGoldenMean) {
  const ExampleInput in =
      closed_input(0.6, PowerOffsetP{0.2, 0.4}, AffineSchedule{10, 5});
  const MarkovMeasure mu = build_example_measure(in, ExampleFamily::GoldenMean);
  const BuiltConfiguration bc =
      build_configuration(mu, ConfigurationFamily::GoldenMean, 4);
  EXPECT_EQ(bc.selector, std::vector<int>(4, 0));
  EXPECT_EQ(bc.configuration.j_indices,
            (std::vector<std::int64_t>{1, 11, 21, 31}));

  const DkSequence dk = dk_sequence(bc.configuration, mu, 4);
  for (std::size_t k = 0; k < dk.terms.size(); ++k) {
    const std::int64_t i = bc.configuration.i_indices[k];
    const std::int64_t j = bc.configuration.j_indices[k];
    const auto p0 = [&](std::int64_t n) { return mu.p(n)(0, 0); };
    const auto p2 = [&](std::int64_t n) { return mu.p(n)(0, 2); };
    const auto q0 = [&](std::int64_t n) { return mu.p(n)(1, 0); };
    const double expected =
        std::log(p0(j) / p0(i)) + std::log(p0(j + 1) / p0(i + 1)) +
        std::log(p2(i) / p2(j)) + std::log(p0(j + 2) / p0(i + 2)) +
        std::log(q0(i + 2) / q0(j + 2));
    EXPECT_NEAR(dk.terms[k].value, expected, 1e-12);
    EXPECT_GT(dk.terms[k].value, 0.0);
  }
}

TEST(BuildConfigurationTest, HomogeneousMeasureIsNotApplicable) {
  const MarkovMeasure mu =
      homogeneous_measure(full_shift(2), two_by_two(0.5, 0.5, 0.6, 0.4));
  expect_error(Err::NotApplicable, [&] {
    build_configuration(mu, ConfigurationFamily::TwoStateFullshift, 3);
  });
}

TEST(BuildConfigurationTest, AdjacencyMustMatchTheFamily) {
  const MarkovMeasure mu = build_example_measure(
      closed_input(0.6, ConstantP{0.7}, AffineSchedule{10, 5}),
      ExampleFamily::GoldenMean);
  expect_error(Err::AdjacencyMismatch, [&] {
    build_configuration(mu, ConfigurationFamily::TwoStateFullshift, 3);
  });
}

TEST(BuildConfigurationTest, RowOneDeviationsUseTheMirrorBlocks) {
  const Adjacency adj = full_shift(2);
  const Matrix q = two_by_two(0.5, 0.5, 0.4, 0.6);
  const Matrix p = two_by_two(0.5, 0.5, 0.3, 0.7);  // only row 1 deviates
  const MarkovMeasure mu = stretch_measure(adj, q, p, 41);
  const BuiltConfiguration bc =
      build_configuration(mu, ConfigurationFamily::TwoStateFullshift, 5);
  EXPECT_EQ(bc.target_row, 1);
  EXPECT_EQ(bc.sign, +1);  // P_n(1,1) = 0.7 above its limit 0.6
  EXPECT_EQ(bc.selector, std::vector<int>(5, 0));
  EXPECT_EQ(bc.configuration.j_indices,
            (std::vector<std::int64_t>{1, 5, 9, 13, 17}));
  EXPECT_EQ(bc.configuration.i_indices,
            (std::vector<std::int64_t>{-3, -7, -11, -15, -19}));
  for (const AdmissiblePair& pair : bc.configuration.pairs) {
    EXPECT_EQ(pair.first.symbols, (std::vector<int>{1, 1, 1}));
    EXPECT_EQ(pair.second.symbols, (std::vector<int>{1, 0, 1}));
  }
  EXPECT_EQ(bc.certificate, SeriesClass::ConvergesCertified);
}

TEST(BuildConfigurationTest, SparseTwoStateUsesTheSinglePair) {
  const Adjacency adj = sparse_adjacency();
  const MarkovMeasure mu =
      stretch_measure(adj, sparse_rows(0.5), sparse_rows(0.62), 41);
  ASSERT_EQ(mu.mixing_exponent, 2);
  const BuiltConfiguration bc =
      build_configuration(mu, ConfigurationFamily::TwoStateSparse, 5);
  EXPECT_EQ(bc.target_row, 0);
  EXPECT_EQ(bc.sign, +1);
  EXPECT_EQ(bc.configuration.j_indices,
            (std::vector<std::int64_t>{1, 6, 11, 16, 21}));
  EXPECT_EQ(bc.configuration.i_indices,
            (std::vector<std::int64_t>{-4, -9, -14, -19, -24}));
  for (const AdmissiblePair& pair : bc.configuration.pairs) {
    EXPECT_EQ(pair.first.symbols, (std::vector<int>{0, 1, 0}));
    EXPECT_EQ(pair.second.symbols, (std::vector<int>{0, 0, 0}));
  }
  // Three-log expansion; with deviations above the limit the orientation
  // of this pair makes every factor negative.
  const DkSequence dk = dk_sequence(bc.configuration, mu, 5);
  for (std::size_t k = 0; k < dk.terms.size(); ++k) {
    const std::int64_t i = bc.configuration.i_indices[k];
    const std::int64_t j = bc.configuration.j_indices[k];
    const auto p0 = [&](std::int64_t n) { return mu.p(n)(0, 0); };
    const auto p1 = [&](std::int64_t n) { return mu.p(n)(0, 1); };
    const double expected = std::log(p0(i) / p0(j)) +
                            std::log(p1(j) / p1(i)) +
                            std::log(p0(i + 1) / p0(j + 1));
    EXPECT_NEAR(dk.terms[k].value, expected, 1e-12);
    EXPECT_LT(dk.terms[k].value, 0.0);
  }
}

TEST(BuildConfigurationTest, GoldenMeanRowOneCaseUsesTheCrossPair) {
  const Adjacency adj = golden_mean_shift();
  const Matrix q = golden_rows(0.5, 0.6);
  const Matrix p = golden_rows(0.5, 0.72);  // only row 1 deviates
  const MarkovMeasure mu = stretch_measure(adj, q, p, 61);
  const BuiltConfiguration bc =
      build_configuration(mu, ConfigurationFamily::GoldenMean, 5);
  EXPECT_EQ(bc.target_row, 1);
  EXPECT_EQ(bc.sign, +1);
  EXPECT_EQ(bc.selector, std::vector<int>(5, 0));
  EXPECT_EQ(bc.configuration.j_indices,
            (std::vector<std::int64_t>{1, 8, 15, 22, 29}));
  EXPECT_EQ(bc.configuration.i_indices,
            (std::vector<std::int64_t>{-6, -13, -20, -27, -34}));
  for (const AdmissiblePair& pair : bc.configuration.pairs) {
    EXPECT_EQ(pair.first.symbols, (std::vector<int>{1, 0, 0, 2}));
    EXPECT_EQ(pair.second.symbols, (std::vector<int>{1, 2, 1, 2}));
  }
  const DkSequence dk = dk_sequence(bc.configuration, mu, 5);
  for (const DkTerm& t : dk.terms) EXPECT_GT(t.value, 0.0);
}

TEST(BuildConfigurationTest, TooFewCoherentPlacementsIsNotApplicable) {
  const Adjacency adj = full_shift(2);
  const Matrix q = two_by_two(0.5, 0.5, 0.4, 0.6);
  const Matrix p = two_by_two(0.62, 0.38, 0.4, 0.6);
  const MarkovMeasure mu = stretch_measure(adj, q, p, 7);
  // Coherent placements exist only at 1..5, so greedy spacing 4 yields two.
  try {
    build_configuration(mu, ConfigurationFamily::TwoStateFullshift, 5);
    FAIL() << "expected NotApplicable";
  } catch (const Error& e) {
    EXPECT_EQ(e.code, Err::NotApplicable);
    EXPECT_NE(std::string(e.what()).find("only 2 of 5"), std::string::npos)
        << e.what();
  }
}

TEST(BuildConfigurationTest, ScanHorizonTruncatesTheSearch) {
  const MarkovMeasure mu =
      build_example_measure(constructed_input(), ExampleFamily::Fullshift2);
  expect_error(Err::NotApplicable, [&] {
    build_configuration(mu, ConfigurationFamily::TwoStateFullshift, 8, 10);
  });
}

TEST(BuildConfigurationTest, DeterministicAcrossRepeats) {
  const MarkovMeasure mu =
      build_example_measure(constructed_input(), ExampleFamily::Fullshift2);
  const BuiltConfiguration a =
      build_configuration(mu, ConfigurationFamily::TwoStateFullshift, 6);
  const BuiltConfiguration b =
      build_configuration(mu, ConfigurationFamily::TwoStateFullshift, 6);
  EXPECT_EQ(a.configuration.j_indices, b.configuration.j_indices);
  EXPECT_EQ(a.configuration.i_indices, b.configuration.i_indices);
  EXPECT_EQ(a.selector, b.selector);
  EXPECT_EQ(a.recipe, b.recipe);
}

// ---------------------------------------------------------------------------
// convergent_case_report
// ---------------------------------------------------------------------------

TEST(ConvergentCaseReportTest, TraceInvariantsHold) {
  const MarkovMeasure mu =
      build_example_measure(constructed_input(), ExampleFamily::Fullshift2);
  const BuiltConfiguration bc =
      build_configuration(mu, ConfigurationFamily::TwoStateFullshift, 8);
  const ConvergentCaseReport report =
      convergent_case_report(bc.configuration, mu, 8, bc.certificate,
                             bc.certificate_detail);
  ASSERT_EQ(report.partial_sums.size(), 8u);
  ASSERT_EQ(report.suffix_sup.size(), 8u);
  double acc = 0.0;
  for (std::size_t k = 0; k < 8; ++k) {
    const double v = report.sequence.terms[k].value;
    acc += v * v;
    EXPECT_DOUBLE_EQ(report.partial_sums[k], acc);
    if (k > 0) EXPECT_GE(report.partial_sums[k], report.partial_sums[k - 1]);
    double sup = 0.0;
    for (std::size_t m = k; m < 8; ++m) {
      sup = std::max(sup, std::abs(report.sequence.terms[m].value));
    }
    EXPECT_DOUBLE_EQ(report.suffix_sup[k], sup);
  }
  EXPECT_EQ(report.certificate, SeriesClass::DivergesCertified);
  EXPECT_FALSE(report.certificate_detail.empty());
}

TEST(ConvergentCaseReportTest, DefaultDetailExplainsTheLimitation) {
  const MarkovMeasure mu = window_measure();
  const AdmissibleConfiguration cfg = repeated_config(
      fullshift_pair(), {2, 6}, {-2, -6}, 3, 1);
  const ConvergentCaseReport report = convergent_case_report(cfg, mu, 2);
  EXPECT_EQ(report.certificate, SeriesClass::Unknown);
  EXPECT_NE(report.certificate_detail.find("cannot decide"),
            std::string::npos);
}

TEST(ConvergentCaseReportTest, CertificatesFollowTheFamilyRule) {
  // Slow power-law plateaus: squared deviations are certified divergent.
  const MarkovMeasure slow = build_example_measure(
      closed_input(0.6, PowerOffsetP{0.2, 0.4}, AffineSchedule{10, 5}),
      ExampleFamily::Fullshift2);
  const BuiltConfiguration slow_bc =
      build_configuration(slow, ConfigurationFamily::TwoStateFullshift, 4);
  EXPECT_EQ(slow_bc.certificate, SeriesClass::DivergesCertified);

  // Geometric plateaus: certified summable.
  const MarkovMeasure fast = build_example_measure(
      closed_input(0.6, GeometricOffsetP{0.2, 0.5}, AffineSchedule{10, 5}),
      ExampleFamily::Fullshift2);
  const BuiltConfiguration fast_bc =
      build_configuration(fast, ConfigurationFamily::TwoStateFullshift, 4);
  EXPECT_EQ(fast_bc.certificate, SeriesClass::ConvergesCertified);
  EXPECT_EQ(fast_bc.configuration.j_indices,
            (std::vector<std::int64_t>{1, 11, 21, 31}));
}

// ---------------------------------------------------------------------------
// yk_moments / yk_samples
// ---------------------------------------------------------------------------

TEST(YkTest, MomentsMatchPathEnumeration) {
  const MarkovMeasure mu = window_measure();
  const AdmissibleConfiguration cfg =
      repeated_config(fullshift_pair(), {3}, {-2}, 3, 1);
  const YkMoments m = yk_moments(cfg, mu, 1);

  const AdmissiblePair& pair = cfg.pairs[0];
  const std::array<Cylinder, 2> primary{Cylinder{-2, pair.first},
                                        Cylinder{3, pair.second}};
  const std::array<Cylinder, 2> swapped{Cylinder{-2, pair.second},
                                        Cylinder{3, pair.first}};
  EXPECT_NEAR(m.p_plus, oracle::multi_cylinder_by_gaps(mu, primary), 1e-15);
  EXPECT_NEAR(m.p_minus, oracle::multi_cylinder_by_gaps(mu, swapped), 1e-15);

  // Full enumeration of E(Y) and Var(Y) over the covering window.
  const auto y_of = [&](const Word& w) {
    if (word_matches(w, -2, pair.first) && word_matches(w, 3, pair.second)) {
      return 1;
    }
    if (word_matches(w, -2, pair.second) && word_matches(w, 3, pair.first)) {
      return -1;
    }
    return 0;
  };
  double mean = 0.0;
  double second = 0.0;
  for (const auto& symbols : oracle::words(mu.adjacency, 8)) {
    const Word w{-2, symbols};
    const double weight = cylinder_measure(mu, Cylinder{-2, Block{symbols}});
    const int y = y_of(w);
    mean += weight * y;
    second += weight * y * y;
  }
  EXPECT_NEAR(m.mean, mean, 1e-15);
  EXPECT_NEAR(m.variance, second - mean * mean, 1e-15);
}

TEST(YkTest, MarginalAndVarianceBoundsHold) {
  const MarkovMeasure mu = window_measure();
  const AdmissibleConfiguration cfg =
      repeated_config(fullshift_pair(), {3}, {-2}, 3, 1);
  const YkMoments m = yk_moments(cfg, mu, 1);
  const MixingConstant c = mixing_constant(mu.doeblin, mu.mixing_exponent);
  const double floor =
      c.value * std::pow(mu.doeblin, 2.0 * 3.0 * mu.mixing_exponent);
  EXPECT_GE(m.p_plus, floor);
  EXPECT_GE(m.p_minus, floor);
  EXPECT_GE(m.variance, m.p_plus);

  // On the uniform fullshift the floor is attained exactly.
  const MarkovMeasure iid =
      homogeneous_measure(full_shift(2), two_by_two(0.5, 0.5, 0.5, 0.5));
  const YkMoments u = yk_moments(cfg, iid, 1);
  EXPECT_DOUBLE_EQ(u.p_plus, 1.0 / 64.0);
  EXPECT_DOUBLE_EQ(u.p_minus, 1.0 / 64.0);
  EXPECT_EQ(u.mean, 0.0);
}

TEST(YkTest, SwapTiltsAgainstTheLogDerivative) {
  const MarkovMeasure mu =
      build_example_measure(constructed_input(), ExampleFamily::Fullshift2);
  const BuiltConfiguration bc =
      build_configuration(mu, ConfigurationFamily::TwoStateFullshift, 8);
  const DkSequence dk = dk_sequence(bc.configuration, mu, 8);
  for (std::int64_t k = 1; k <= 8; ++k) {
    const double d = dk.terms[static_cast<std::size_t>(k - 1)].value;
    const YkMoments m = yk_moments(bc.configuration, mu, k);
    ASSERT_NE(d, 0.0);
    EXPECT_LT(d * m.mean, 0.0);
  }
}

TEST(YkTest, SamplesFollowThePatternDefinition) {
  const MarkovMeasure mu = window_measure();
  const AdmissibleConfiguration cfg =
      repeated_config(fullshift_pair(), {3}, {-2}, 3, 1);
  const std::vector<Word> words{
      Word{-2, {0, 0, 0, 1, 0, 0, 1, 0}},  // primary cell
      Word{-2, {0, 1, 0, 1, 0, 0, 0, 0}},  // swapped cell
      Word{-2, {1, 1, 1, 1, 1, 1, 1, 1}},  // neither
  };
  const auto ys = yk_samples(cfg, mu, 1, words);
  ASSERT_EQ(ys.size(), 3u);
  EXPECT_EQ(ys[0], std::vector<int>{1});
  EXPECT_EQ(ys[1], std::vector<int>{-1});
  EXPECT_EQ(ys[2], std::vector<int>{0});
}

TEST(YkTest, UncoveredTrajectoryWindowThrows) {
  const MarkovMeasure mu = window_measure();
  const AdmissibleConfiguration cfg =
      repeated_config(fullshift_pair(), {3}, {-2}, 3, 1);
  const std::vector<Word> words{Word{0, {0, 1, 0, 0, 1, 0}}};
  expect_error_at(Err::InsufficientWindow, 1,
                  [&] { yk_samples(cfg, mu, 1, words); });
}

TEST(YkTest, InadmissibleTrajectoryIsRejected) {
  const MarkovMeasure mu = homogeneous_measure(golden_mean_shift(),
                                               golden_rows(0.5, 0.6));
  const AdmissibleConfiguration cfg =
      repeated_config(golden_pair(), {7}, {-7}, 4, 3);
  // 0 -> 1 is not an allowed transition on the golden mean shift.
  std::vector<int> symbols(18, 0);
  symbols[1] = 1;
  const std::vector<Word> words{Word{-7, symbols}};
  expect_error(Err::InadmissibleWord,
               [&] { yk_samples(cfg, mu, 1, words); });
}

TEST(YkTest, EmpiricalFrequenciesMatchExactMomentsWithinThreeSigma) {
  const MarkovMeasure mu =
      homogeneous_measure(full_shift(2), two_by_two(0.5, 0.5, 0.5, 0.5));
  const AdmissibleConfiguration cfg =
      repeated_config(fullshift_pair(), {3}, {-2}, 3, 1);
  const YkMoments m = yk_moments(cfg, mu, 1);

  const int trials = 4000;
  const CounterRng rng(2024);
  std::vector<Word> words;
  words.reserve(trials);
  for (int t = 0; t < trials; ++t) {
    words.push_back(sample_word(mu, -2, 5, rng,
                                static_cast<std::uint64_t>(t)));
  }
  const auto ys = yk_samples(cfg, mu, 1, words);
  int plus = 0;
  int minus = 0;
  for (const auto& row : ys) {
    if (row[0] == 1) ++plus;
    if (row[0] == -1) ++minus;
  }
  const double sigma =
      std::sqrt(m.p_plus * (1.0 - m.p_plus) / static_cast<double>(trials));
  EXPECT_NEAR(static_cast<double>(plus) / trials, m.p_plus, 3.0 * sigma);
  EXPECT_NEAR(static_cast<double>(minus) / trials, m.p_minus, 3.0 * sigma);
}

TEST(YkTest, RoundIndexIsRangeChecked) {
  const MarkovMeasure mu = window_measure();
  const AdmissibleConfiguration cfg =
      repeated_config(fullshift_pair(), {3}, {-2}, 3, 1);
  expect_error(Err::InvalidInput, [&] { yk_moments(cfg, mu, 0); });
  expect_error(Err::InvalidInput, [&] { yk_moments(cfg, mu, 2); });
}

}  // namespace
}  // namespace mk
