// Non-homogeneous Markov measures on a subshift of finite type: a two-sided
// transition sequence (P_n), constant far in the past, piecewise explicit in
// the middle, and structured (constant / parametric family / opaque) far in
// the future, anchored by the stationary vector of the left tail. All
// coordinate distributions, cylinder and multi-cylinder measures, reverse
// transitions, and uniform-mixing bounds live here.
#pragma once

#include <cstdint>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "markov_krieger/linalg.hpp"
#include "markov_krieger/sft.hpp"

namespace mk {

// Certified summability class of a nonnegative series attached to a tail
// family. Certificates come from the family's defining parameters, never
// from numeric truncation.
enum class SeriesClass { ConvergesCertified, DivergesCertified, Unknown };

// Right-tail structure interface. A family defines P_n exactly for every
// n >= start and *declares* what is known about its limit behavior; the
// declarations (not numeric truncations) drive symbolic series verdicts.
// A family with no declarations is the honest "opaque" case: evaluation
// works, classification refuses.
class TailFamily {
 public:
  virtual ~TailFamily() = default;

  // Exact P_n for n >= start (callers never ask below start).
  virtual Matrix matrix_at(std::int64_t n) const = 0;

  // Declared limit of P_n (n -> +infinity), if the family converges.
  virtual std::optional<Matrix> declared_limit() const { return std::nullopt; }

  // Declared accumulation points witnessing divergence, if it diverges.
  virtual std::vector<Matrix> divergence_witnesses() const { return {}; }

  // Certified infimum over n >= start of the minimum allowed entry of P_n.
  virtual double entrywise_infimum() const = 0;

  // If P_n equals declared_limit() exactly for all n >= this, the bound.
  virtual std::optional<std::int64_t> eventually_constant_from() const {
    return std::nullopt;
  }

  virtual std::string describe() const = 0;

  // Structural identity (used by the symbolic rule "identical structures
  // give a zero series"). Exact, not tolerance-based.
  virtual bool same_as(const TailFamily& other) const = 0;

  // Certified class of the squared-deviation series
  //   sum_n |P_n - declared_limit|_F^2.
  // Under the Doeblin floor this decides the Hellinger-type equivalence
  // series against a measure whose tail sits at the declared limit.
  virtual SeriesClass deviation_from_limit_series() const {
    return SeriesClass::Unknown;
  }

  // Certified class of the squared-increment series
  //   sum_n |P_{n+1} - P_n|_F^2,
  // which decides the shift-nonsingularity series on the right tail.
  virtual SeriesClass increment_series() const { return SeriesClass::Unknown; }
};

// One explicitly stored stretch [begin, end) with a constant matrix.
struct Segment {
  std::int64_t begin;
  std::int64_t end;  // exclusive
  Matrix matrix;
};

// The full two-sided assignment n -> P_n:
//   n <= left_cutoff            : left_tail (constant)
//   left_cutoff < n < right_start: segments (contiguous tiling)
//   n >= right_start            : right tail (constant matrix or family)
struct TransitionSequence {
  Matrix left_tail;
  std::int64_t left_cutoff = 0;
  std::vector<Segment> segments;
  std::int64_t right_start = 1;
  std::optional<Matrix> right_constant;          // exactly one of these two
  std::shared_ptr<const TailFamily> right_family;

  bool has_family() const { return right_family != nullptr; }
  Matrix at(std::int64_t n) const;
};

// Shape, stochasticity (tol 1e-12), and exact support identity with adj for
// a single transition matrix; throws InvalidInput / SupportMismatch naming
// `where`.
void validate_transition_matrix(const Adjacency& adj, const Matrix& p,
                                const std::string& where);

// Minimum of p over the entries adj allows.
double min_allowed_entry(const Adjacency& adj, const Matrix& p);

// Validates stochasticity (tol 1e-12), support identity with adj for every
// represented matrix, and the tiling invariants; throws SupportMismatch /
// DoeblinViolation / InvalidInput.
TransitionSequence make_transition_sequence(
    const Adjacency& adj, Matrix left_tail, std::int64_t left_cutoff,
    std::vector<Segment> segments, std::int64_t right_start,
    std::optional<Matrix> right_constant,
    std::shared_ptr<const TailFamily> right_family);

// Largest delta with P_n(s,t) >= delta whenever A(s,t) = 1, over every
// represented n (families contribute their certified infimum). Throws
// DoeblinViolation if the infimum is not positive, SupportMismatch if any
// matrix has support different from A.
double validate_doeblin(const Adjacency& adj, const TransitionSequence& seq);

struct MarkovMeasure {
  Adjacency adjacency;
  TransitionSequence transitions;
  RowVector anchor;            // stationary vector of left_tail
  double doeblin = 0.0;        // largest uniform Doeblin constant
  int mixing_exponent = 0;     // primitivity index M of the adjacency

  Matrix p(std::int64_t n) const { return transitions.at(n); }
  int states() const { return adjacency.size(); }

  // Memoized coordinate distributions (observably pure).
  mutable std::map<std::int64_t, RowVector> pi_cache;
  mutable std::mutex pi_mutex;

  MarkovMeasure() = default;
  MarkovMeasure(const MarkovMeasure& o)
      : adjacency(o.adjacency), transitions(o.transitions), anchor(o.anchor),
        doeblin(o.doeblin), mixing_exponent(o.mixing_exponent) {}
  MarkovMeasure& operator=(const MarkovMeasure& o) {
    if (this != &o) {
      adjacency = o.adjacency; transitions = o.transitions; anchor = o.anchor;
      doeblin = o.doeblin; mixing_exponent = o.mixing_exponent;
      std::lock_guard<std::mutex> lk(pi_mutex);
      pi_cache.clear();
    }
    return *this;
  }
};

// Assembles and fully validates a measure. If expected_anchor is supplied it
// must match the computed stationary vector of the left tail to 1e-9.
MarkovMeasure make_measure(const Adjacency& adj, TransitionSequence seq,
                           std::optional<RowVector> expected_anchor = std::nullopt);

// Homogeneous convenience: P_n = q for all n.
MarkovMeasure homogeneous_measure(const Adjacency& adj, const Matrix& q);

// The measure with transitions n -> P_{n+shift} (and shifted structure);
// used by the nonsingularity series and by shift-invariance checks.
MarkovMeasure shifted_measure(const MarkovMeasure& mu, std::int64_t shift);

// pi_n: distribution of coordinate n (pi_{n+1} = pi_n P_n, anchored at the
// stationary vector of the left tail). Memoized; bit-identical on repeats.
RowVector coordinate_distribution(const MarkovMeasure& mu, std::int64_t n);

// P^(n, n+k) = P_n P_{n+1} ... P_{n+k} (k+1 factors, k >= 0): the transition
// law from coordinate n to coordinate n+k+1. Every entry lies in
// [delta^M, 1 - delta^M] as soon as k >= M-1.
Matrix transition_product(const MarkovMeasure& mu, std::int64_t n, std::int64_t k);

struct ReverseTransition {
  std::int64_t n;
  Matrix phat;  // phat(s,t) = pi_{n-1}(t) P_{n-1}(t,s) / pi_n(s)
};

// Reverse transition at coordinate n; rows are stochastic, support is the
// transpose of A.
ReverseTransition reverse_transition(const MarkovMeasure& mu, std::int64_t n);

// mu[ b_1..b_L at i ] = pi_i(b_1) P_i(b_1,b_2) ... P_{i+L-2}(b_{L-1},b_L).
double cylinder_measure(const MarkovMeasure& mu, const Cylinder& c);

// Measure of an intersection of cylinders on pairwise disjoint coordinate
// ranges separated by gaps >= 1, via bridge products across the gaps.
// Throws OverlappingRanges when ranges touch or overlap.
double multi_cylinder_measure(const MarkovMeasure& mu,
                              std::span<const Cylinder> parts);

struct MixingConstant {
  double delta;
  int exponent;       // M
  double value;       // delta^M / (1 - delta^M)
  bool contractive;   // false when delta^M >= 1/2 (value >= 1)
};

MixingConstant mixing_constant(double delta, int exponent);

// Exhaustive check of the uniform mixing bounds on the window [n1, n2]:
//   delta^M <= pi_n(s) <= 1 - delta^M,
//   C mu(E) mu(F) <= mu(E and F) <= C^{-1} mu(E) mu(F)
// over all cylinder events E on [n1..n], F on [m..n2] with m - n >= M.
// Any violation is an InequalityViolated error (an implementation bug, not
// an input defect); the report carries the worst observed ratios.
struct MixingReport {
  double worst_lower_ratio;   // min over events of mu(EF) / (C mu(E) mu(F))
  double worst_upper_ratio;   // max over events of mu(EF) C / (mu(E) mu(F))
  double worst_pi_low;        // min over (n,s) of pi_n(s) / delta^M
  double worst_pi_high;       // max over (n,s) of pi_n(s) / (1 - delta^M)
  std::int64_t events_checked;
};

MixingReport check_mixing_inequalities(const MarkovMeasure& mu, std::int64_t n1,
                                       std::int64_t n2);

// Provable per-block bounds (the sharp form of the crude cylinder bound):
//   delta^(M+F) <= mu(B(i)) <= (1-delta^M) (1-delta)^F,
// where F counts transitions leaving states with >= 2 allowed successors.
// Returns F for a block under adj.
int branching_transition_count(const Adjacency& adj, const Block& b);

}  // namespace mk
