// Factory for the two-parameter-row example measures on the 2-state
// fullshift and the Golden Mean shift: a base matrix Q whose first row is
// (1/2, 1/2), and plateau matrices Q_k whose first row is (p_k, 1-p_k),
// laid out as P_n = Q_k on the plateau [M_{k-1}, N_k) and P_n = Q
// elsewhere. The module carries the condition checkers that decide, from
// the declared sequence rules, whether the resulting shift is nonsingular
// (sum of (p_k-1/2)^2 finite), inequivalent to the homogeneous measure of Q
// (sum of plateau-length-weighted squares infinite), and conservative
// (positive summable plateau weights plus a divergent gap-return series) —
// and the 3-step inductive constructor that realizes all three at once,
// with integer sizes that outgrow any fixed-precision type within a few
// rounds (hence the TowerReal magnitudes and the two-tier audit).
#pragma once

#include <cstdint>
#include <memory>
#include <optional>
#include <string>
#include <variant>
#include <vector>

#include "markov_krieger/equivalence.hpp"
#include "markov_krieger/measure.hpp"
#include "markov_krieger/sft.hpp"
#include "markov_krieger/tower_real.hpp"

namespace mk {

// The two transition templates. Fullshift2: 2 states, row 0 = (p, 1-p),
// row 1 = (q, 1-q). GoldenMean: 3 states, row 0 = (p, 0, 1-p),
// row 1 = (q, 0, 1-q), row 2 = (0, 1, 0) (the forced transition).
enum class ExampleFamily { Fullshift2, GoldenMean };

Adjacency example_adjacency(ExampleFamily family);

// Q: the base matrix (p = 1/2). Throws InvalidInput unless q is in (0,1).
Matrix example_base_matrix(ExampleFamily family, double q);

// Q_k: the plateau matrix with first-row parameter p.
Matrix example_plateau_matrix(ExampleFamily family, double q, double p);

// lambda(p) = p / (1-p): strictly increasing on (0,1), lambda(1/2) = 1.
// Throws InvalidInput outside (0,1). lambda_inverse(y) = y / (1+y) for
// y > 0 is its inverse.
double lambda_ratio(double p);
double lambda_inverse(double y);

// ----------------------------------------------------------- sequence rules

// p_k = value for every k.
struct ConstantP {
  double value;
};
// p_k = 1/2 + c * ratio^k, ratio in (0,1), c != 0.
struct GeometricOffsetP {
  double c;
  double ratio;
};
// p_k = 1/2 + c * k^(-alpha), alpha > 0, c != 0.
struct PowerOffsetP {
  double c;
  double alpha;
};
// p_k comes from the stored constructor rounds.
struct ConstructedP {};

using PRule = std::variant<ConstantP, GeometricOffsetP, PowerOffsetP, ConstructedP>;

// Plateau schedule M_0 = 1 < N_1 < M_1 < N_2 < ...; plateau k is
// [M_{k-1}, N_k) and the gap after it is [N_k, M_k).

// M_k = 1 + k * stride, N_k = M_{k-1} + plateau; 1 <= plateau < stride.
struct AffineSchedule {
  std::int64_t stride;
  std::int64_t plateau;
};
// Finite explicit lists: M = (M_0, ..., M_K) with M_0 = 1, N = (N_1, ..., N_K).
// Beyond N_K the sequence is Q forever (eventually constant).
struct ExplicitSchedule {
  std::vector<std::int64_t> M;
  std::vector<std::int64_t> N;
};
// Boundaries come from the stored constructor rounds.
struct ConstructedSchedule {};

using ScheduleRule =
    std::variant<AffineSchedule, ExplicitSchedule, ConstructedSchedule>;

// Declared summable budget sequence r_k for the constructor.
// r_k = c * ratio^k (ratio in (0,1)) or r_k = c * k^(-alpha) (alpha > 1);
// c > 0 in both.
struct GeometricBound {
  double c;
  double ratio;
};
struct PowerBound {
  double c;
  double alpha;
};
using SummableRule = std::variant<GeometricBound, PowerBound>;

double summable_bound_at(const SummableRule& r, std::int64_t k);

// One constructed round: the triple (p_k, N_k, M_k). Numbers live in up to
// three tiers: exact int64 while they fit, and TowerReal magnitudes always.
// xi = log lambda(p_k) underflows to 0.0 within a few rounds; its exact
// reciprocal magnitude is kept in inv_xi.
struct ConstructorRound {
  std::int64_t k = 0;  // 1-based; round 1 is the seed triple
  double p = 0.5;      // p_k (display precision; 0.5 once indistinguishable)
  double eta = 0.0;    // p_k - 1/2, computed in subtraction-free form
  double xi = 0.0;     // log lambda(p_k); 0.0 once below double range
  TowerReal inv_xi;    // 1 / xi, exact-scale magnitude at every round
  std::optional<std::int64_t> n_exact;  // N_k while it fits
  std::optional<std::int64_t> m_exact;  // M_k while it fits
  TowerReal n_mag;  // N_k magnitude (always)
  TowerReal m_mag;  // M_k magnitude (always)
};

// Seed data for the inductive constructor. m0 must equal 1 (the schedule
// convention M_0 = 1); q parameterizes the shared second row.
struct ConstructorSeeds {
  double p1;
  std::int64_t m0;
  std::int64_t n1;
  std::int64_t m1;
  double q;
};

// A complete example description: the shared-row parameter q, the p-rule,
// the plateau schedule, the summable budget rule, and (for constructed
// inputs only) the materialized rounds. p-rule and schedule must either
// both be Constructed (rounds nonempty) or both be closed-form (rounds
// empty).
struct ExampleInput {
  double q = 0.5;
  PRule p;
  ScheduleRule schedule;
  SummableRule r;
  std::vector<ConstructorRound> rounds;

  bool constructed() const {
    return std::holds_alternative<ConstructedP>(p);
  }
  // p_k / p_k - 1/2 under the rule (rounds for constructed inputs).
  double p_value(std::int64_t k) const;
  double eta_value(std::int64_t k) const;
};

// Full validation: parameter domains, strict interleaving of the schedule,
// Doeblin positivity of every reachable matrix entry, matching
// rule/schedule kinds, and (for constructed inputs) a passing construction
// audit plus rounds extending past the exactly-representable range.
// Throws InvalidInput / InvalidInterleaving.
void validate_example_input(const ExampleInput& in);

// The measure: left tail Q for n <= 0, plateau family for n >= 1; anchor =
// stationary vector of Q. With p_k identically 1/2 the right tail folds to
// the constant Q and the measure is exactly homogeneous.
MarkovMeasure build_example_measure(const ExampleInput& in, ExampleFamily family);

// ----------------------------------------------------- condition checkers
//
// Verdicts are symbolic: they come from the declared rules (and, for
// constructed inputs, the audited per-round certificates), never from the
// numeric partial sums that accompany them.

// Series sum_k (p_k - 1/2)^2 over the plateaus that exist. Converges iff
// the shift is nonsingular for the example measure.
SeriesVerdict check_nonsingularity_condition(const ExampleInput& in,
                                             std::int64_t horizon = kDefaultHorizon);

// Series sum_k (N_k - M_{k-1}) (p_k - 1/2)^2. Diverges iff the example
// measure is NOT equivalent to the homogeneous measure of Q (the only
// homogeneous candidate).
SeriesVerdict check_nonequivalence_condition(const ExampleInput& in,
                                             std::int64_t horizon = kDefaultHorizon);

// Plateau weight w_k = M_{k-1} * log lambda(p_k) for the conservativeness
// bound: each weight must be positive and fit under a summable budget.
struct PlateauWeight {
  std::int64_t k;
  double weight;  // M_{k-1} * log lambda(p_k)
  double budget;  // the summable bound it is checked against
  bool ok;        // 0 < weight <= budget
};

struct ConservativenessReport {
  // Positive summable plateau weights: for constructed inputs certified for
  // every round by the construction identity (weight = budget/2 exactly);
  // for closed-form inputs verified numerically up to the horizon.
  bool weights_pass = false;
  std::string weights_detail;
  std::vector<PlateauWeight> weights;  // trace, capped at 64 entries

  // Gap-return series sum_k (M_k - 2 N_k) lambda(p_1)^{-N_k}; Diverges
  // (= +infinity) is the passing verdict. Constructed inputs certify every
  // generated term >= 1; affine and finite schedules certifiably fail.
  SeriesVerdict return_series;
};

ConservativenessReport check_conservativeness_conditions(
    const ExampleInput& in, std::int64_t horizon = kDefaultHorizon);

// ------------------------------------------------------------- constructor

// The 3-step inductive constructor. Round 1 is the seed triple; each later
// round k+1 takes the budget r_k and produces
//   p_{k+1} = lambda_inverse(exp(xi)) with xi = r_k / (2 M_k)
//             (the log-scale midpoint of the allowed interval
//              1 < lambda(p_{k+1})^{M_k} <= e^{r_k}),
//   N_{k+1} = M_k + ceil((e^xi - 1)^{-2})   [minimal integer with
//             (N_{k+1}-M_k)(1-lambda(p_{k+1}))^2 >= 1; beyond exact range
//             the sound majorant ceil(xi^{-2}) is used],
//   M_{k+1} = 2 N_{k+1} + ceil(lambda(p_1)^{N_{k+1}})   [minimal integer
//             with (M_{k+1}-2N_{k+1}) lambda(p_1)^{-N_{k+1}} >= 1].
// Produces `rounds` rounds in total (seed included). Throws SeedInvalid.
ExampleInput inductive_construct(const SummableRule& r,
                                 const ConstructorSeeds& seeds,
                                 std::int64_t rounds);

// Post-hoc re-verification of the three per-round inequalities, done
// independently of the construction path: exact integer arithmetic while
// the round fits int64 ("exact" tier), TowerReal magnitude comparisons
// backed by the e^x - 1 >= x majorant lemma beyond ("magnitude" tier).
struct RoundAudit {
  std::int64_t k;           // audited round (k >= 2)
  bool exact;               // exact tier (vs magnitude tier)
  bool weight_ok;           // 1 < lambda(p_k)^{M_{k-1}} <= e^{budget}
  bool plateau_ok;          // (N_k - M_{k-1})(1 - lambda(p_k))^2 >= 1
  bool gap_ok;              // (M_k - 2 N_k) lambda(p_1)^{-N_k} >= 1
  double weight_margin;     // log-scale slack (>= 0 when ok), where computable
  double plateau_margin;
  double gap_margin;
};

struct ConstructionAudit {
  std::vector<RoundAudit> rounds;
  bool all_ok = false;
};

ConstructionAudit audit_construction(const ExampleInput& in);

// --------------------------------------------------------------- families

// The piecewise right tail P_n = Q_k on [M_{k-1}, N_k), Q elsewhere, with
// honest series certificates derived from the declared rules.
class PlateauFamily final : public TailFamily {
 public:
  // Validates via validate_example_input.
  PlateauFamily(ExampleFamily family, ExampleInput input);

  Matrix matrix_at(std::int64_t n) const override;
  std::optional<Matrix> declared_limit() const override;
  std::vector<Matrix> divergence_witnesses() const override;
  double entrywise_infimum() const override;
  std::optional<std::int64_t> eventually_constant_from() const override;
  std::string describe() const override;
  bool same_as(const TailFamily& other) const override;
  SeriesClass deviation_from_limit_series() const override;
  SeriesClass increment_series() const override;

  ExampleFamily family_kind() const { return family_; }
  const ExampleInput& input() const { return input_; }

 private:
  struct Plateau {
    std::int64_t begin;
    std::int64_t end;  // exclusive; INT64_MAX when it outruns the int64 range
    Matrix matrix;
  };

  ExampleFamily family_;
  ExampleInput input_;
  Matrix base_;
  std::vector<Plateau> reachable_;  // explicit/constructed schedules
  std::optional<Matrix> limit_;
  std::vector<Matrix> witnesses_;
  std::optional<std::int64_t> constant_from_;
  SeriesClass deviation_class_ = SeriesClass::Unknown;
  SeriesClass increment_class_ = SeriesClass::Unknown;
  double infimum_ = 0.0;
};

// Two matrices alternating on the dyadic blocks [2^j, 2^(j+1)): a tail with
// two accumulation points and a certifiably divergent increment series
// (constant-size jumps at infinitely many block boundaries).
class AlternatingFamily final : public TailFamily {
 public:
  // Validates both matrices against adj; the two must differ (the honest
  // divergence witnesses require it) — InvalidInput otherwise.
  AlternatingFamily(const Adjacency& adj, Matrix even_blocks, Matrix odd_blocks);

  Matrix matrix_at(std::int64_t n) const override;
  std::vector<Matrix> divergence_witnesses() const override;
  double entrywise_infimum() const override;
  std::string describe() const override;
  bool same_as(const TailFamily& other) const override;
  SeriesClass increment_series() const override;

  const Matrix& even_blocks() const { return even_; }
  const Matrix& odd_blocks() const { return odd_; }

 private:
  Matrix even_;
  Matrix odd_;
  double infimum_;
};

// A periodic tail that declares nothing: evaluation and numeric partial
// sums work; every symbolic question about it is answered "unknown".
class OpaqueCycle final : public TailFamily {
 public:
  OpaqueCycle(const Adjacency& adj, std::vector<Matrix> cycle);

  Matrix matrix_at(std::int64_t n) const override;
  double entrywise_infimum() const override;
  std::string describe() const override;
  bool same_as(const TailFamily& other) const override;

  const std::vector<Matrix>& cycle() const { return cycle_; }

 private:
  std::vector<Matrix> cycle_;
  double infimum_;
};

}  // namespace mk
