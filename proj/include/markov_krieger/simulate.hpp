// Trajectory sampling and Monte Carlo probes.
//
// Everything here is corroborative: a probe samples finite trajectories from
// a measure with a counter-based deterministic generator and compares
// empirical statistics against exactly computed predictions. Probes never
// certify a verdict — they can only agree with the exact machinery or expose
// a discrepancy.
//
//   * sample_trajectory        exact ancestral sampling on a window [-N, N]:
//                              the left coordinate from its marginal, then
//                              forward through the transition rows.
//   * sample_trajectory_reversed
//                              the same law sampled right-to-left through
//                              the reversed transition matrices; identical
//                              finite-dimensional marginals.
//   * lln_probe                time averages of site and pair frequencies
//                              against the stationary vectors of the
//                              declared one-sided limit matrices.
//   * conservativeness_probe   forward vs backward ergodic averages of an
//                              indicator; disjoint confidence intervals in
//                              the predicted direction witness the
//                              obstruction to conservativeness.
//   * clt_probe                the weighted swap-indicator sum S_K with
//                              exact mean/variance (pair correlations
//                              included) and a Kolmogorov-Smirnov distance
//                              against the standard normal.
//   * divergence_probe         mass of weighted indicator sums beyond
//                              growing cutoffs, checked against the
//                              liminf lower bound of the Borel-Cantelli-
//                              type divergence lemma.
//
// Statistical thresholds are engineering choices, stated on every report:
// mean comparisons use a 4-sigma band plus an exactly computed
// finite-horizon allowance; the distributional test uses KS distance 0.05
// at its default sample count. Identical seeds give bit-identical reports:
// trajectory t always draws from stream t in index order.
#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <variant>
#include <vector>

#include "markov_krieger/cocycles.hpp"
#include "markov_krieger/linalg.hpp"
#include "markov_krieger/measure.hpp"
#include "markov_krieger/sft.hpp"

namespace mk {

// Sigma multiplier for every mean-style comparison.
inline constexpr double kSigmaThreshold = 4.0;
// Kolmogorov-Smirnov distance threshold for the normality probe.
inline constexpr double kDistributionalThreshold = 0.05;
// Standard errors are floored away from zero so a degenerate sample
// (constant statistic) cannot manufacture an infinitely strict test.
inline constexpr double kStandardErrorFloor = 1e-9;

// ---------------------------------------------------------------------------
// Trajectories
// ---------------------------------------------------------------------------

// A finite realization of the two-sided chain on [-radius, radius].
struct Trajectory {
  Word word;
  std::uint64_t seed = 0;
  std::uint64_t stream = 0;
};

// Exact ancestral sampling: X_{-radius} from its marginal distribution,
// then forward through the rows of P_n. Deterministic in (seed, stream);
// the returned word is validated against the adjacency.
// Throws InvalidInput when radius < 1.
Trajectory sample_trajectory(const MarkovMeasure& mu, std::int64_t radius,
                             std::uint64_t seed, std::uint64_t stream = 0);

// The same law sampled in the other order: X_{radius} from its marginal,
// then right-to-left through the rows of reverse_transition. Finite-
// dimensional marginals are identical to sample_trajectory's.
Trajectory sample_trajectory_reversed(const MarkovMeasure& mu,
                                      std::int64_t radius, std::uint64_t seed,
                                      std::uint64_t stream = 0);

// Exact ancestral sampling on an arbitrary window [lo, hi] (the building
// block of the probes; lo <= hi required).
Word sample_window(const MarkovMeasure& mu, std::int64_t lo, std::int64_t hi,
                   std::uint64_t seed, std::uint64_t stream);

// ---------------------------------------------------------------------------
// Probe reports
// ---------------------------------------------------------------------------

// One compared statistic. `within` holds when
//   |empirical - predicted| <= 4 * standard_error + allowance,
// where `allowance` is a deterministic finite-horizon bias computed from
// the measure itself (a time average over N coordinates differs from its
// limit by an exactly known Cesaro gap), or the stated distance threshold
// for distributional rows. One-sided rows (lower-bound checks) say so in
// their name and test empirical >= predicted - 4 * standard_error.
struct ProbeStatistic {
  std::string name;
  double empirical = 0.0;
  double predicted = 0.0;
  double standard_error = 0.0;  // always > 0 (floored)
  double allowance = 0.0;
  bool within = false;
};

struct ProbeReport {
  std::string probe;  // "lln" | "conservativeness" | "clt" | "divergence"
  std::vector<ProbeStatistic> statistics;
  std::string verdict;  // short machine-readable outcome code
  bool pass = false;    // every statistic within its band
  double sigma_threshold = kSigmaThreshold;
  double distance_threshold = 0.0;  // nonzero for the distributional probe
  std::int64_t horizon = 0;
  std::int64_t samples = 0;
  std::uint64_t seed = 0;
  // Probe-specific curve (x-grid and values): the variance partial sums for
  // the CLT probe, the tail-mass curve for the divergence probe.
  std::vector<double> trace_grid;
  std::vector<double> series_trace;
};

// ---------------------------------------------------------------------------
// Law-of-large-numbers probe
// ---------------------------------------------------------------------------

// A bounded function on state pairs, f(s, t) = table(s, t), with optional
// caller-supplied predictions for its forward and reversed time averages.
// When absent, the predictions are computed from the declared limits:
// sum_{s,t} lambda(s) Q(s,t) f(s,t) forward and
// sum_{s,t} pi(s) P(s,t) f(s,t) reversed, where P (left limit, stationary
// pi) and Q (right limit, stationary lambda) come from the declared tails.
// Overrides replace the prediction but not the bias allowance, so a
// deliberately wrong prediction fails the probe (negative control).
struct PairFunction {
  Matrix table;
  std::optional<double> forward_prediction;
  std::optional<double> reversed_prediction;
};

// Samples trajectories on [-horizon, horizon] and reports, per state t0,
// the forward site frequency (1/N) sum 1{X_n = t0} against lambda(t0) and
// the reversed site frequency against pi(t0), plus the forward and
// reversed time averages of the pair function. N = horizon.
// Throws TailsUnknown unless both one-sided limits are declared;
// InvalidInput on shape/horizon/sample-count violations.
ProbeReport lln_probe(const MarkovMeasure& mu, const PairFunction& f,
                      std::int64_t horizon, std::int64_t samples,
                      std::uint64_t seed);

// ---------------------------------------------------------------------------
// Conservativeness probe
// ---------------------------------------------------------------------------

struct SiteIndicator {
  int state = 0;  // f = 1{X_0 = state}
};
struct PairIndicator {
  int from = 0;  // f = 1{(X_0, X_1) = (from, to)}
  int to = 0;
};
using IndicatorSpec = std::variant<SiteIndicator, PairIndicator>;

// The canonical obstruction witness: the first state where the stationary
// vectors of the two limits disagree, else the first entry where the limit
// matrices themselves disagree. Throws TailsEqual when the declared limits
// agree entrywise (no obstruction to probe), TailsUnknown when a limit is
// missing.
IndicatorSpec obstruction_indicator(const MarkovMeasure& mu);

// Estimates the forward and backward ergodic averages (1/N) S_N^{+-} f of
// the indicator over sampled trajectories and compares them with the
// lambda-side and pi-side predictions. Verdict "obstruction-present" when
// the two 4-sigma intervals separate in the predicted direction — the
// witness that forward and backward time averages have different limits,
// which rules out conservativeness. Errors as obstruction_indicator.
ProbeReport conservativeness_probe(const MarkovMeasure& mu,
                                   const IndicatorSpec& f,
                                   std::int64_t horizon, std::int64_t samples,
                                   std::uint64_t seed);

// ---------------------------------------------------------------------------
// Central-limit probe for the swap-indicator sum
// ---------------------------------------------------------------------------

// Exact covariance of the swap indicators of rounds k and l (1-based,
// k <= l <= rounds): Cov(Y_k, Y_l) through the four joint block-placement
// measures. k == l returns Var(Y_k). Reference implementation, linear in
// the window span per pair.
double yk_covariance(const AdmissibleConfiguration& cfg,
                     const MarkovMeasure& mu, std::int64_t k, std::int64_t l);

// Exact first and second moments of S_K = sum_k D_k Y_k. The variance
// includes all pairwise covariances (computed by a nested-hull recursion,
// O(K^2) small matrix products after one sweep over the window span);
// variance_partials[k-1] = sum_{m<=k} D_m^2 Var(Y_m) is the running
// diagonal series whose divergence drives the central limit theorem.
struct SwapSumMoments {
  double mean = 0.0;
  double variance = 0.0;
  std::vector<double> variance_partials;
};
SwapSumMoments swap_sum_moments(const AdmissibleConfiguration& cfg,
                                const MarkovMeasure& mu, std::int64_t rounds);

// Samples S_K over trajectories covering the configuration's window,
// standardizes by the exact moments, and measures the Kolmogorov-Smirnov
// distance to the standard normal. Rows: empirical mean and variance of
// S_K against the exact values, and the KS distance against the
// distributional threshold. Throws DegenerateVariance when the exact
// variance vanishes (every D_k = 0, or an empty configuration).
ProbeReport clt_probe(const AdmissibleConfiguration& cfg,
                      const MarkovMeasure& mu, std::int64_t rounds,
                      std::int64_t samples, std::uint64_t seed);

// ---------------------------------------------------------------------------
// Divergence probe
// ---------------------------------------------------------------------------

// Empirical form of the divergence lemma: for nonnegative weights a_n with
// a divergent sum (certified by the caller) and events A_n,
//   P( sum_n a_n 1{A_n} = infinity ) >= liminf_n P(A_n).
// `events` holds one row per sample, one 0/1 entry per n; the first
// `samples` rows are used. The probe reports the empirical liminf of
// P(A_n) (minimum column mean over the last quarter of the indices,
// against predicted_liminf when supplied — one-sided: the lemma is a lower
// bound) and the mass P(sum > C) at C = half the predicted divergent mass
// (reference * total weight / 2), which must stay above that liminf
// estimate. The full tail-mass curve over a grid of
// cutoffs is returned in trace_grid / series_trace.
// Throws InvalidInput on negative weights, non-0/1 entries, ragged rows,
// or samples outside [2, rows].
ProbeReport divergence_probe(std::span<const double> weights,
                             const std::vector<std::vector<int>>& events,
                             std::int64_t samples,
                             std::optional<double> predicted_liminf =
                                 std::nullopt);

}  // namespace mk
