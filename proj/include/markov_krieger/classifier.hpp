// Krieger-type classification of a nonsingular Markov measure on a mixing
// SFT from its declared tail structure. The engine is a three-branch
// decision tree over the one-sided limits of (P_n):
//
//   (1) a declared divergent tail        -> type III_1,
//   (2) limits exist but disagree        -> not conservative,
//   (3) limits agree at a common Q       -> equivalence series against the
//       homogeneous measure of Q: convergence gives type II_1 with the
//       stationary vector of Q as equivalent invariant density, divergence
//       gives type III_1, anything else is Inconclusive.
//
// Branches (1) and (3) assume the measure is conservative and nonsingular;
// those assumptions are tracked explicitly and a probe-refuted
// conservativeness claim is refused rather than silently used. Branch (2)
// needs no assumption: it refutes conservativeness outright.
//
// The divergence => III_1 step of the dichotomy is proved for every 2-state
// SFT and for the 3-state golden-mean SFT; on any other adjacency the same
// verdict is emitted with an explicit beyond-proven-scope note.
#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "markov_krieger/equivalence.hpp"
#include "markov_krieger/measure.hpp"

namespace mk {

// What the declared structure says about the one-sided limits of n -> P_n.
// The far past of a TransitionSequence is a constant matrix, so the left
// limit always exists and DivergentLeft is not producible from this
// representation; the mode is kept so the vocabulary covers both sides.
enum class TailMode { ConvergentBoth, DivergentRight, DivergentLeft, Unknown };

struct TailBehavior {
  TailMode mode = TailMode::Unknown;
  std::optional<Matrix> left_limit;     // always present: the constant far past
  std::optional<Matrix> right_limit;    // ConvergentBoth only
  std::vector<Matrix> right_witnesses;  // DivergentRight: >= 2 accumulation points
};

// Reads the declared structure only (right constant, or the family's
// declared limit / divergence witnesses); no numeric truncation is ever
// promoted to a limit claim. An opaque right tail yields Unknown.
TailBehavior tail_behavior(const MarkovMeasure& mu);

// Necessary condition for conservativeness: when both one-sided limits
// exist, they must agree — first through their stationary vectors, then
// entrywise (tolerance kMatrixEqTol for both). With a declared divergent
// tail there is nothing to compare and the check passes vacuously.
struct ConservativenessCheck {
  bool pass = false;
  std::string reason;           // empty when pass
  double stationary_gap = 0.0;  // |pi_left - pi_right|_inf (when both limits exist)
  double limit_gap = 0.0;       // |P_left - P_right|_inf   (when both limits exist)
};

// Throws TailsUnknown when the right tail declares nothing.
ConservativenessCheck conservativeness_necessary(const MarkovMeasure& mu);

// Standing assumptions the caller brings to classification, with their
// provenance. A Verified nonsingularity claim must carry the series verdict
// that established it; classification refuses to run on evidence that
// refutes the assumption it is supposed to support.
struct Assumptions {
  enum class Nonsingularity { Asserted, Verified };
  enum class Conservativity { Asserted, ProbedOK, ProbedFail };

  Nonsingularity nonsingular = Nonsingularity::Asserted;
  std::optional<SeriesVerdict> nonsingularity_evidence;  // required iff Verified
  Conservativity conservative = Conservativity::Asserted;
};

enum class VerdictKind { TypeII1, TypeIII1, NotConservative, Inconclusive };

// Whether the divergence => III_1 half of the dichotomy is proved for the
// adjacency at hand: every 2-state SFT and the 3-state golden-mean SFT are
// covered; everything else is flagged.
enum class DichotomyScope { TwoStateCovered, GoldenMeanCovered, BeyondProvenScope };

DichotomyScope dichotomy_scope(const Adjacency& adj);

struct KriegerVerdict {
  VerdictKind kind = VerdictKind::Inconclusive;
  DichotomyScope scope_note = DichotomyScope::BeyondProvenScope;
  std::optional<Matrix> limit_matrix;    // TypeII1: the common tail limit Q
  std::optional<RowVector> stationary;   // TypeII1: lambda with lambda Q = lambda
  std::string reason;                    // TypeIII1 / NotConservative: code + detail
  std::vector<std::string> reasons;      // Inconclusive: everything that blocked
  std::optional<SeriesVerdict> series;   // the homogeneous series when branch (3) ran
};

// Stationary vector of a stochastic matrix with primitive support: the
// density of the equivalent shift-invariant Markov measure in the type II_1
// case. Validates stochasticity and support primitivity, and the returned
// vector satisfies |lambda Q - lambda|_inf <= 1e-12.
// Throws InvalidInput / NotPrimitiveWithinCap.
RowVector acim(const Matrix& q);

// The decision tree above. Deterministic: identical inputs produce
// identical verdicts, partial sums included. Throws AssumptionViolated when
// a branch that assumes conservativeness is reached under a ProbedFail
// claim, or when Verified nonsingularity evidence says Diverges;
// InvalidInput when Verified evidence is missing.
KriegerVerdict classify(const MarkovMeasure& mu,
                        const Assumptions& assumptions = {},
                        std::int64_t horizon = kDefaultHorizon);

}  // namespace mk
