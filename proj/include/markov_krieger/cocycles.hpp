// Admissible block permutations and their Radon-Nikodym cocycles.
//
// An admissible pair (B, B') — two distinct blocks of equal length with the
// same first and last symbol — can be exchanged between two coordinate
// windows without breaking admissibility.  The permutation that swaps B at
// coordinate i with B' at coordinate j is nonsingular for every Markov
// measure with full Doeblin support, and its Radon-Nikodym derivative is a
// ratio of four transition-weight products.  Placing a whole sequence of
// such swaps at sign-coherent coordinates manufactures a sequence of
// log-derivatives D_k whose squares sum like the squared deviations of the
// transition row from its tail limit: the quantitative engine behind the
// type III_1 verdicts.
//
// This module provides
//   * AdmissibleConfiguration — a validated schedule of pairs and
//     placements (i_k to the far past, j_k to the far future, uniform
//     length bound L, mixing exponent M, spacings >= L + M);
//   * PermutationSpec / rn_derivative / apply_permutation — one swap, its
//     exact derivative, and its action on finite words;
//   * dk_sequence / convergent_case_report — the log-derivative sequence
//     with first-order surrogates, two-sided log brackets, a uniform bound
//     2 L log((1-delta)/delta), and divergence bookkeeping for sum(D_k^2);
//   * find_distinguishing_pair — exhaustive search for an admissible pair
//     with unequal cross-products between two stochastic matrices (the
//     combinatorial seed of every configuration);
//   * build_configuration — deterministic recipes that extract
//     sign-coherent placements from a measure on the two-state fullshift,
//     the two-state golden-mean-like subshift, or the three-state golden
//     mean shift;
//   * yk_moments / yk_samples — the +/-1/0 swap indicators, their exact
//     moments via multi-cylinder measures, and their evaluation along
//     sampled trajectories.
#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "markov_krieger/equivalence.hpp"
#include "markov_krieger/errors.hpp"
#include "markov_krieger/linalg.hpp"
#include "markov_krieger/measure.hpp"
#include "markov_krieger/sft.hpp"

namespace mk {

// Threshold for a cross-product gap |P(B) Q(B') - Q(B) P(B')| to count as a
// genuine distinction rather than rounding noise.
inline constexpr double kCrossRatioTol = 1e-12;

// ---------------------------------------------------------------------------
// Configurations
// ---------------------------------------------------------------------------

// A schedule of admissible pairs with placements: round k swaps pairs[k]
// between coordinates i_indices[k] (far past, negative, strictly decreasing)
// and j_indices[k] (far future, positive, strictly increasing).  length_bound
// is a uniform bound L on the pair lengths; mixing_exponent is an M with
// A^M > 0.  Consecutive placements (and the first i/j pair) must be at least
// L + M apart so the swapped windows are independent up to the mixing
// constant.
struct AdmissibleConfiguration {
  std::vector<AdmissiblePair> pairs;
  std::vector<std::int64_t> j_indices;
  std::vector<std::int64_t> i_indices;
  int length_bound = 0;     // L: uniform bound on pair lengths
  int mixing_exponent = 0;  // M: A^M entrywise positive

  std::int64_t rounds() const {
    return static_cast<std::int64_t>(pairs.size());
  }
};

// Checks every structural invariant and returns the configuration unchanged.
// Throws:
//   InvalidInput       — mismatched array sizes, L < 3, or A^M not positive;
//   PairInvalid(k)     — pair k fails the admissible-pair rules for adj
//                        (1-based k);
//   LengthViolation(k) — pair k longer than length_bound;
//   SpacingViolation(k)— placement k out of order or closer than L + M to
//                        its neighbour; index 0 flags the j_1 - i_1 gap,
//                        index k >= 1 flags the k-th element (1-based) of
//                        the offending side.
// An empty configuration (no rounds) is vacuously valid.
AdmissibleConfiguration validate_configuration(const Adjacency& adj,
                                               AdmissibleConfiguration cfg);

// ---------------------------------------------------------------------------
// Single permutations
// ---------------------------------------------------------------------------

// Asymmetric: defined on the primary cell E = [B at i] /\ [B' at j] only,
// mapping it onto E' = [B' at i] /\ [B at j].  Symmetric: defined on
// E union E', swapping the two cells (an involution).
enum class PermutationKind { Asymmetric, Symmetric };

// Which cell of the domain a derivative query refers to.  Primary is E;
// Swapped is E'.  For the asymmetric kind the Swapped value is the
// derivative of the inverse map E' -> E.
enum class DomainCell { Primary, Swapped };

struct PermutationSpec {
  PermutationKind kind = PermutationKind::Asymmetric;
  AdmissiblePair pair;
  std::int64_t i = 0;
  std::int64_t j = 0;
};

// Validates the pair against adj (PairInvalid) and the placement
// |i - j| >= pair length (SpacingViolation), so the two block windows are
// disjoint.
PermutationSpec make_permutation_spec(const Adjacency& adj,
                                      PermutationKind kind,
                                      AdmissiblePair pair, std::int64_t i,
                                      std::int64_t j);

// The same swap with the roles of B and B' exchanged; for an asymmetric
// spec this is the inverse map.
PermutationSpec reversed_spec(PermutationSpec spec);

// P_i(B) = P_i(b_1,b_2) P_{i+1}(b_2,b_3) ... P_{i+L-2}(b_{L-1},b_L): the
// transition weight of block B pinned at coordinate i (L - 1 factors; the
// initial distribution is *not* included).
double block_transition_weight(const MarkovMeasure& mu, std::int64_t i,
                               const Block& b);

// Same product for a single (homogeneous) transition matrix.
double block_product(const Matrix& p, const Block& b);

// The Radon-Nikodym derivative of the swap on one domain cell, kept as an
// exact ratio: on the primary cell
//   d(mu o V)/d(mu) = P_i(B') P_j(B) / (P_i(B) P_j(B')),
// numerator and denominator exactly as displayed, value = their quotient.
// The reversed spec's derivative has numerator and denominator swapped
// bitwise, so the product of the two true ratios is exactly 1 (the rounded
// `value`s multiply to 1 up to one unit in the last place).
struct RnDerivative {
  double value = 1.0;
  double numerator = 1.0;
  double denominator = 1.0;
};

// Derivative of the swap for mu on the given cell.  Swapped-cell queries
// return the reciprocal ratio.  Throws PairInvalid / SpacingViolation on a
// spec that does not fit mu's adjacency.
RnDerivative rn_derivative(const MarkovMeasure& mu,
                           const PermutationSpec& spec,
                           DomainCell cell = DomainCell::Primary);

// Applies the swap to a finite word.  The word must cover both block
// windows (InsufficientWindow otherwise).  Words in the primary cell have B
// at i replaced by B' and B' at j replaced by B; for the symmetric kind the
// swapped cell maps back.  A word in neither cell (or in the swapped cell
// of an asymmetric spec) raises OutsideDomain.  The image is admissible
// whenever the input is, because the exchanged blocks share endpoints.
Word apply_permutation(const PermutationSpec& spec, Word x);

// ---------------------------------------------------------------------------
// Log-derivative sequences
// ---------------------------------------------------------------------------

// One round of a configuration: the exact log-derivative of the k-th
// asymmetric swap, its defining ratio, the first-order surrogate
// numerator - denominator (same sign as value), and the elementary bracket
//   (num - den)/num  <  value  <  (num - den)/den.
struct DkTerm {
  std::int64_t k = 0;  // 1-based round index
  double numerator = 1.0;
  double denominator = 1.0;
  double value = 0.0;      // log(numerator / denominator)
  double surrogate = 0.0;  // numerator - denominator
  LogRatioBracket bracket;
};

struct DkSequence {
  AdmissibleConfiguration configuration;
  std::vector<DkTerm> terms;
  double bound = 0.0;  // 2 L log((1 - delta)/delta) >= |D_k| for all k
};

// D_k for the first `rounds` rounds of cfg (all rounds when rounds exceeds
// the configuration).  Every value is finite and within `bound`; a
// homogeneous measure yields exact zeros.
DkSequence dk_sequence(const AdmissibleConfiguration& cfg,
                       const MarkovMeasure& mu, std::int64_t rounds);

// Diagnostic trace for the convergence/divergence of sum(D_k^2): suffix
// suprema of |D_k| (monitoring D_k -> 0) and nondecreasing partial sums of
// D_k^2.  Numeric partial sums never certify an infinite series, so the
// symbolic certificate (if any) is carried alongside, inherited from the
// parametric family that produced the configuration.
struct ConvergentCaseReport {
  DkSequence sequence;
  std::vector<double> suffix_sup;    // suffix_sup[k-1] = max_{m >= k} |D_m|
  std::vector<double> partial_sums;  // partial_sums[k-1] = sum_{m <= k} D_m^2
  SeriesClass certificate = SeriesClass::Unknown;
  std::string certificate_detail;
};

ConvergentCaseReport convergent_case_report(
    const AdmissibleConfiguration& cfg, const MarkovMeasure& mu,
    std::int64_t rounds, SeriesClass certificate = SeriesClass::Unknown,
    std::string certificate_detail = "");

// ---------------------------------------------------------------------------
// Distinguishing pairs
// ---------------------------------------------------------------------------

// An admissible pair whose cross-products under two matrices differ:
// cross_gap = P(B) Q(B') - Q(B) P(B') with |cross_gap| > kCrossRatioTol,
// where B runs from alpha to beta.
struct DistinguishingPair {
  AdmissiblePair pair;
  int alpha = 0;
  int beta = 0;
  double cross_gap = 0.0;
};

// Deterministic first hit over block length L = 3..max_length, then alpha,
// then beta (ascending), then ordered block pairs in lexicographic
// enumeration order.  Requires p, q stochastic with the same primitive
// support and p != q (InvalidInput otherwise; SupportMismatch /
// NotPrimitiveWithinCap from the support checks).  Throws
// NoneFoundWithinLen when the search space is exhausted.  For matrices
// with the same primitive support that differ at all, a hit exists at some
// finite length; max_length only truncates the search.
DistinguishingPair find_distinguishing_pair(const Matrix& p, const Matrix& q,
                                            int max_length);

// ---------------------------------------------------------------------------
// Configuration builders
// ---------------------------------------------------------------------------

// Shapes with a proven block-placement recipe.
//   TwoStateFullshift — 2 states, all transitions allowed; blocks of
//     length 3 on the symbol whose diagonal row deviates.
//   TwoStateSparse    — 2 states, adjacency [[1,1],[1,0]] (row 1 forced);
//     the single pair ([0,1,0],[0,0,0]).
//   GoldenMean        — 3 states; length-4 blocks on the 0-row when its
//     deviations dominate, the ([1,0,0,2],[1,2,1,2]) pair on the 1-row
//     otherwise.
enum class ConfigurationFamily { TwoStateFullshift, TwoStateSparse, GoldenMean };

struct BuiltConfiguration {
  AdmissibleConfiguration configuration;
  // Per-round choice between the two candidate pairs of the recipe (always
  // 0 for single-pair recipes).  Chosen so that every log factor of D_k
  // shares the target sign — no cancellation between factors.
  std::vector<int> selector;
  int sign = 0;        // common sign s of the selected deviations
  int target_row = 0;  // transition row whose deviations drive the recipe
  std::string recipe;  // human-readable description of the branch taken
  // Certificate for the full squared-deviation series of the tail family
  // (sum over n of the squared gap between row target_row of P_n and its
  // limit).  DivergesCertified transfers to sum(D_k^2) = infinity for the
  // sign-coherent selection; ConvergesCertified means the deviations are
  // summable and no divergent configuration exists.
  SeriesClass certificate = SeriesClass::Unknown;
  std::string certificate_detail;
};

// Extracts a sign-coherent configuration with `rounds` rounds from mu.
// Requires mu's adjacency to equal the family template (AdjacencyMismatch)
// and both tails to declare a common limit.  Scans coordinates
// 1..scan_horizon for future placements and -1..-scan_horizon for past
// ones (scan_horizon <= 0 picks a generous default); throws
// NotApplicable when the tails are undeclared/divergent, when the measure
// has no usable deviations (e.g. homogeneous), or when fewer than `rounds`
// sign-coherent placements exist within the horizon.  The result is fully
// validated.
BuiltConfiguration build_configuration(const MarkovMeasure& mu,
                                       ConfigurationFamily family,
                                       std::int64_t rounds,
                                       std::int64_t scan_horizon = 0);

// ---------------------------------------------------------------------------
// Swap indicators Y_k
// ---------------------------------------------------------------------------

// Y_k(x) = +1 on the primary cell of round k, -1 on the swapped cell, 0
// elsewhere; log of the k-th symmetric swap's derivative is D_k * Y_k.
// Exact moments via multi-cylinder measures:
//   p_plus  = mu[B_k at i_k, B'_k at j_k],
//   p_minus = mu[B'_k at i_k, B_k at j_k],
//   mean = p_plus - p_minus,
//   variance = p_plus (1 - p_plus) + p_minus (1 - p_minus)
//              + 2 p_plus p_minus  >=  p_plus.
// D_k * mean < 0 whenever D_k != 0: the swap always tilts towards the
// cheaper cell.
struct YkMoments {
  double p_plus = 0.0;
  double p_minus = 0.0;
  double mean = 0.0;
  double variance = 0.0;
};

// Moments of Y_k for round k (1-based) of cfg under mu.
YkMoments yk_moments(const AdmissibleConfiguration& cfg,
                     const MarkovMeasure& mu, std::int64_t k);

// Evaluates (Y_1, ..., Y_rounds) on each trajectory.  Every word must cover
// all block windows of the first `rounds` rounds (InsufficientWindow names
// the first offending round) and be admissible for mu's adjacency.
std::vector<std::vector<int>> yk_samples(const AdmissibleConfiguration& cfg,
                                         const MarkovMeasure& mu,
                                         std::int64_t rounds,
                                         std::span<const Word> trajectories);

}  // namespace mk
