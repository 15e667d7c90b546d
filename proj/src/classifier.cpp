#include "markov_krieger/classifier.hpp"

#include <string>
#include <utility>

#include "markov_krieger/errors.hpp"
#include "markov_krieger/sft.hpp"

namespace mk {

namespace {

void refuse_probed_fail(const Assumptions& assumptions, const std::string& branch) {
  if (assumptions.conservative == Assumptions::Conservativity::ProbedFail) {
    throw Error(Err::AssumptionViolated,
                "the " + branch +
                    " branch assumes conservativeness, but the supplied probe "
                    "reported failure; re-run without the refuted claim or "
                    "investigate the probe");
  }
}

}  // namespace

TailBehavior tail_behavior(const MarkovMeasure& mu) {
  TailBehavior tb;
  // The far past is a constant matrix, so its limit is exact by structure.
  tb.left_limit = mu.transitions.left_tail;
  if (mu.transitions.right_constant) {
    tb.mode = TailMode::ConvergentBoth;
    tb.right_limit = *mu.transitions.right_constant;
    return tb;
  }
  invariant(mu.transitions.has_family(), "tail_behavior: sequence has neither "
                                         "right constant nor right family");
  const TailFamily& family = *mu.transitions.right_family;
  if (auto limit = family.declared_limit()) {
    tb.mode = TailMode::ConvergentBoth;
    tb.right_limit = std::move(*limit);
    return tb;
  }
  auto witnesses = family.divergence_witnesses();
  if (!witnesses.empty()) {
    tb.mode = TailMode::DivergentRight;
    tb.right_witnesses = std::move(witnesses);
    return tb;
  }
  tb.mode = TailMode::Unknown;
  return tb;
}

ConservativenessCheck conservativeness_necessary(const MarkovMeasure& mu) {
  const TailBehavior tb = tail_behavior(mu);
  if (tb.mode == TailMode::Unknown) {
    throw Error(Err::TailsUnknown,
                "conservativeness check needs declared tail behavior, but the "
                "right tail declares neither a limit nor divergence witnesses");
  }
  ConservativenessCheck out;
  if (tb.mode != TailMode::ConvergentBoth) {
    // Declared divergence leaves no pair of limits to compare; the check
    // refutes nothing and passes vacuously.
    out.pass = true;
    return out;
  }
  const Matrix& left = *tb.left_limit;
  const Matrix& right = *tb.right_limit;
  // A conservative nonsingular measure drags the coordinate distributions to
  // the stationary vectors of both one-sided limits, forcing the limits to
  // coincide. The stationary comparison is sharper diagnostically, so it is
  // reported first when both fail.
  const RowVector pi_left = stationary_distribution(left);
  const RowVector pi_right = stationary_distribution(right);
  out.stationary_gap = (pi_left - pi_right).cwiseAbs().maxCoeff();
  out.limit_gap = max_abs_diff(left, right);
  if (out.stationary_gap > kMatrixEqTol) {
    out.pass = false;
    out.reason = "stationary-mismatch: the stationary vectors of the two "
                 "one-sided tail limits differ";
    return out;
  }
  if (out.limit_gap > kMatrixEqTol) {
    out.pass = false;
    out.reason = "limit-mismatch: the two one-sided tail limits differ "
                 "entrywise";
    return out;
  }
  out.pass = true;
  return out;
}

DichotomyScope dichotomy_scope(const Adjacency& adj) {
  if (adj.size() == 2) return DichotomyScope::TwoStateCovered;
  const Adjacency gm = golden_mean_shift();
  if (adj.size() == gm.size() && (adj.a.array() == gm.a.array()).all()) {
    return DichotomyScope::GoldenMeanCovered;
  }
  return DichotomyScope::BeyondProvenScope;
}

RowVector acim(const Matrix& q) {
  if (q.rows() < 2 || q.rows() != q.cols()) {
    throw Error(Err::InvalidInput,
                "acim: a square matrix on at least two states is required");
  }
  if (!is_stochastic(q)) {
    throw Error(Err::InvalidInput, "acim: the matrix is not row-stochastic");
  }
  Eigen::MatrixXi support(q.rows(), q.cols());
  for (Eigen::Index s = 0; s < q.rows(); ++s) {
    for (Eigen::Index t = 0; t < q.cols(); ++t) {
      support(s, t) = q(s, t) > 0.0 ? 1 : 0;
    }
  }
  // make_adjacency rejects stranded states; primitivity_index certifies the
  // support mixes, which is what makes the stationary vector unique.
  primitivity_index(make_adjacency(support));
  RowVector lambda = stationary_distribution(q);
  invariant((lambda * q - lambda).cwiseAbs().maxCoeff() <= kStationaryTol,
            "acim: stationary residual exceeds tolerance");
  return lambda;
}

KriegerVerdict classify(const MarkovMeasure& mu, const Assumptions& assumptions,
                        std::int64_t horizon) {
  if (assumptions.nonsingular == Assumptions::Nonsingularity::Verified) {
    if (!assumptions.nonsingularity_evidence) {
      throw Error(Err::InvalidInput,
                  "nonsingularity is marked Verified but no series verdict "
                  "was supplied as evidence");
    }
    if (assumptions.nonsingularity_evidence->status == SeriesStatus::Diverges) {
      throw Error(Err::AssumptionViolated,
                  "the supplied nonsingularity evidence is a divergent series: "
                  "the measure is not shift-nonsingular, so type "
                  "classification does not apply");
    }
  }

  KriegerVerdict v;
  v.scope_note = dichotomy_scope(mu.adjacency);
  const TailBehavior tb = tail_behavior(mu);

  switch (tb.mode) {
    case TailMode::DivergentRight:
    case TailMode::DivergentLeft: {
      refuse_probed_fail(assumptions, "divergent-tail");
      v.kind = VerdictKind::TypeIII1;
      v.reason = "tail-limits-absent: a declared tail admits at least two "
                 "accumulation points, and a conservative nonsingular measure "
                 "whose tails do not converge admits no equivalent "
                 "shift-invariant probability";
      return v;
    }
    case TailMode::Unknown: {
      v.kind = VerdictKind::Inconclusive;
      v.reasons = {"tails-undeclared: the right tail declares neither a limit "
                   "nor divergence witnesses, so no symbolic branch applies"};
      return v;
    }
    case TailMode::ConvergentBoth:
      break;
  }

  const ConservativenessCheck cons = conservativeness_necessary(mu);
  if (!cons.pass) {
    v.kind = VerdictKind::NotConservative;
    v.reason = cons.reason;
    return v;
  }

  refuse_probed_fail(assumptions, "matching-limits");
  const Matrix& q = *tb.right_limit;
  const HomogeneousVerdict hv = homogeneous_equivalence_test(mu, q, horizon);
  v.series = hv.series;
  if (!hv.limit.matches) {
    // The limits pass the tolerance comparison above but are not exactly
    // equal, so the series test (which needs exact declared limits) refuses.
    // Tolerance-close tails are honest grounds for neither II_1 nor III_1.
    v.kind = VerdictKind::Inconclusive;
    v.reasons = {"tolerance-equality: the declared tail limits agree only "
                 "within tolerance, and the series test requires exactly "
                 "equal declared limits",
                 hv.limit.note};
    return v;
  }

  switch (hv.series.status) {
    case SeriesStatus::Converges: {
      // Equivalence to the stationary chain certified; cross-check that the
      // shift-nonsingularity certificate does not contradict it.
      const SeriesVerdict ns = nonsingularity_test(mu, horizon);
      if (ns.status == SeriesStatus::Diverges) {
        v.kind = VerdictKind::Inconclusive;
        v.reasons = {"certificate-conflict: equivalence to the stationary "
                     "measure converged but the shift-nonsingularity series "
                     "diverged; the declared tail certificates disagree",
                     ns.basis_detail};
        return v;
      }
      v.kind = VerdictKind::TypeII1;
      v.limit_matrix = q;
      v.stationary = acim(q);
      return v;
    }
    case SeriesStatus::Diverges: {
      v.kind = VerdictKind::TypeIII1;
      v.reason = "stationary-equivalence-fails: the tails share the limit "
                 "matrix but the equivalence series against its homogeneous "
                 "measure diverges, which rules out every equivalent "
                 "shift-invariant probability";
      return v;
    }
    case SeriesStatus::Inconclusive: {
      v.kind = VerdictKind::Inconclusive;
      v.reasons = {hv.series.basis_detail.empty()
                       ? std::string("series-inconclusive: the equivalence "
                                     "series against the common tail limit "
                                     "could not be certified either way")
                       : "series-inconclusive: " + hv.series.basis_detail};
      return v;
    }
  }
  throw Error(Err::InternalInvariant, "classify: unreachable series status");
}

}  // namespace mk
