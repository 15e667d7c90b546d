#include "markov_krieger/equivalence.hpp"

#include <algorithm>
#include <cmath>
#include <optional>
#include <utility>

#include "markov_krieger/errors.hpp"

namespace mk {

namespace {

bool matrices_identical(const Matrix& a, const Matrix& b) {
  return a.rows() == b.rows() && a.cols() == b.cols() &&
         (a.array() == b.array()).all();
}

void require_same_adjacency(const MarkovMeasure& nu, const MarkovMeasure& mu) {
  if (nu.adjacency.size() != mu.adjacency.size() ||
      !(nu.adjacency.a.array() == mu.adjacency.a.array()).all())
    throw Error(Err::AdjacencyMismatch,
                "measures must live on the same subshift");
}

// The right side of a transition sequence, folded to one of two shapes:
// a constant matrix holding from some index on, or a genuine family (with
// whatever declarations it carries). Eventually-constant families fold to
// the constant shape at their declared limit.
struct RightShape {
  enum Kind { Constant, Family } kind;
  Matrix c;                        // Constant only
  std::int64_t from = 0;           // Constant only: P_n = c for n >= from
  const TailFamily* f = nullptr;   // Family only
  std::int64_t start = 0;          // Family only: family governs n >= start
};

RightShape right_shape(const MarkovMeasure& mu) {
  const TransitionSequence& s = mu.transitions;
  RightShape r;
  if (s.right_constant) {
    r.kind = RightShape::Constant;
    r.c = *s.right_constant;
    r.from = s.right_start;
    return r;
  }
  const TailFamily* f = s.right_family.get();
  if (auto k = f->eventually_constant_from()) {
    auto lim = f->declared_limit();
    invariant(lim.has_value(),
              "an eventually-constant family must declare its limit");
    r.kind = RightShape::Constant;
    r.c = *lim;
    r.from = std::max(s.right_start, *k);
    return r;
  }
  r.kind = RightShape::Family;
  r.f = f;
  r.start = s.right_start;
  return r;
}

// A certified symbolic verdict. When vanish_from >= 0 every term with
// n >= vanish_from is exactly zero (bit-identical factors), which the
// numeric loop cross-checks.
struct Decision {
  SeriesStatus status;
  std::string detail;
  std::map<std::string, double> residuals;
  std::int64_t vanish_from = -1;
};

double root_distance_sq(const Matrix& a, const Matrix& b) {
  double total = 0.0;
  for (Eigen::Index i = 0; i < a.rows(); ++i)
    for (Eigen::Index j = 0; j < a.cols(); ++j) {
      const double d = std::sqrt(a(i, j)) - std::sqrt(b(i, j));
      total += d * d;
    }
  return total;
}

// Symbolic decision for the equivalence series between nu and mu. Soundness
// notes inline; every Diverges rests on a term floor that is positive for
// the exact (double-precision) defining data, every Converges on exact
// cancellation or certified summability.
std::optional<Decision> decide_equivalence(const MarkovMeasure& nu,
                                           const MarkovMeasure& mu) {
  const int d = mu.states();
  const std::int64_t n_left =
      std::max<std::int64_t>(1, std::max(-nu.transitions.left_cutoff,
                                         -mu.transitions.left_cutoff));

  if (!matrices_identical(nu.transitions.left_tail,
                          mu.transitions.left_tail)) {
    // Distinct left tails force distinct constant reverse factors (the map
    // from a stationary chain to its reversal is injective), so for every
    // n >= n_left the term carries the fixed floor
    //   d * sum_{u,s} (sqrt Rhat_nu(u,s) - sqrt Rhat_mu(u,s))^2 > 0.
    const Matrix rn =
        reverse_transition(nu, nu.transitions.left_cutoff).phat;
    const Matrix rm =
        reverse_transition(mu, mu.transitions.left_cutoff).phat;
    Decision dec{SeriesStatus::Diverges,
                 "left tails differ; the constant reverse factors keep every "
                 "tail term above a fixed positive floor",
                 {},
                 -1};
    dec.residuals["tail_term_floor"] = d * root_distance_sq(rn, rm);
    return dec;
  }

  // Left factors now cancel exactly for n >= n_left, so the series shares
  // its class with sum_n |P_n - Q_n|_F^2 over the right tails (two-sided
  // comparison through the Doeblin floor).
  const RightShape rn = right_shape(nu);
  const RightShape rm = right_shape(mu);

  if (rn.kind == RightShape::Constant && rm.kind == RightShape::Constant) {
    if (matrices_identical(rn.c, rm.c)) {
      const std::int64_t n0 = std::max({n_left, rn.from, rm.from});
      return Decision{SeriesStatus::Converges,
                      "identical constant tails on both sides; terms vanish "
                      "exactly beyond a finite prefix",
                      {},
                      n0};
    }
    Decision dec{SeriesStatus::Diverges,
                 "constant tails with distinct matrices; every tail term "
                 "equals the same positive constant",
                 {},
                 -1};
    dec.residuals["tail_term_constant"] = d * root_distance_sq(rn.c, rm.c);
    return dec;
  }

  if (rn.kind != rm.kind) {
    const RightShape& cs = (rn.kind == RightShape::Constant) ? rn : rm;
    const RightShape& fs = (rn.kind == RightShape::Family) ? rn : rm;
    if (auto lim = fs.f->declared_limit()) {
      if (!matrices_identical(*lim, cs.c)) {
        Decision dec{SeriesStatus::Diverges,
                     "the family's declared limit differs from the constant "
                     "tail; terms are eventually bounded below",
                     {},
                     -1};
        dec.residuals["limit_gap"] = max_abs_diff(*lim, cs.c);
        return dec;
      }
      switch (fs.f->deviation_from_limit_series()) {
        case SeriesClass::ConvergesCertified:
          return Decision{SeriesStatus::Converges,
                          "family certifies a summable squared deviation from "
                          "the shared tail limit",
                          {},
                          -1};
        case SeriesClass::DivergesCertified:
          return Decision{SeriesStatus::Diverges,
                          "family certifies a divergent squared deviation "
                          "from the shared tail limit",
                          {},
                          -1};
        case SeriesClass::Unknown:
          return std::nullopt;
      }
    }
    // No declared limit: an accumulation point away from the constant tail
    // keeps infinitely many terms above half its gap.
    for (const Matrix& w : fs.f->divergence_witnesses()) {
      if (!matrices_identical(w, cs.c)) {
        Decision dec{SeriesStatus::Diverges,
                     "family accumulates at a matrix distinct from the "
                     "constant tail infinitely often",
                     {},
                     -1};
        dec.residuals["witness_gap"] = max_abs_diff(w, cs.c);
        return dec;
      }
    }
    return std::nullopt;
  }

  // Both right sides are families.
  const TailFamily* fn = rn.f;
  const TailFamily* fm = rm.f;
  if (fn->same_as(*fm)) {
    const std::int64_t n0 = std::max({n_left, rn.start, rm.start});
    return Decision{SeriesStatus::Converges,
                    "identical right-tail structures; terms vanish exactly "
                    "beyond a finite prefix",
                    {},
                    n0};
  }
  const auto ln = fn->declared_limit();
  const auto lm = fm->declared_limit();
  if (ln && lm) {
    if (!matrices_identical(*ln, *lm)) {
      Decision dec{SeriesStatus::Diverges,
                   "the families declare distinct limits; terms are "
                   "eventually bounded below",
                   {},
                   -1};
      dec.residuals["limit_gap"] = max_abs_diff(*ln, *lm);
      return dec;
    }
    const SeriesClass cn = fn->deviation_from_limit_series();
    const SeriesClass cm = fm->deviation_from_limit_series();
    if (cn == SeriesClass::ConvergesCertified &&
        cm == SeriesClass::ConvergesCertified)
      return Decision{SeriesStatus::Converges,
                      "both families certify summable squared deviations from "
                      "the shared limit",
                      {},
                      -1};
    if ((cn == SeriesClass::ConvergesCertified &&
         cm == SeriesClass::DivergesCertified) ||
        (cn == SeriesClass::DivergesCertified &&
         cm == SeriesClass::ConvergesCertified))
      return Decision{SeriesStatus::Diverges,
                      "exactly one family certifies a summable deviation from "
                      "the shared limit; the difference series diverges",
                      {},
                      -1};
    return std::nullopt;
  }
  if (ln || lm) {
    const Matrix& lim = ln ? *ln : *lm;
    const TailFamily* other = ln ? fm : fn;
    for (const Matrix& w : other->divergence_witnesses()) {
      if (!matrices_identical(w, lim)) {
        Decision dec{SeriesStatus::Diverges,
                     "one family converges to a limit the other accumulates "
                     "away from infinitely often",
                     {},
                     -1};
        dec.residuals["witness_gap"] = max_abs_diff(w, lim);
        return dec;
      }
    }
  }
  return std::nullopt;
}

SeriesVerdict run_series(const MarkovMeasure& nu, const MarkovMeasure& mu,
                         std::int64_t horizon,
                         const std::optional<Decision>& dec) {
  if (horizon < 1)
    throw Error(Err::InvalidInput, "series horizon must be at least 1");
  SeriesVerdict v;
  double sum = 0.0;
  for (std::int64_t n = 1; n <= horizon; ++n) {
    const CoefficientTerm t = dn2_term(nu, mu, n);
    if (dec && dec->vanish_from >= 0 && n >= dec->vanish_from)
      invariant(t.value == 0.0,
                "terms certified to vanish must be exactly zero");
    sum += t.value;
  }
  v.partial_sum = sum;
  v.terms_used = horizon;
  if (dec) {
    v.status = dec->status;
    v.basis = BasisKind::SymbolicTail;
    v.basis_detail = dec->detail;
    v.residuals = dec->residuals;
  } else {
    v.status = SeriesStatus::Inconclusive;
    v.basis = BasisKind::NumericHeuristic;
    v.basis_detail =
        "no certified tail structure; partial sums reported without a verdict";
  }
  return v;
}

}  // namespace

LogRatioBracket log_ratio_bracket(double a, double b) {
  if (!(a > 0.0) || !(b > 0.0))
    throw Error(Err::InvalidInput, "log_ratio_bracket needs positive inputs");
  if (a == b) return {0.0, 0.0, 0.0};
  return {(a - b) / a, std::log(a / b), (a - b) / b};
}

CoefficientTerm dn2_term(const MarkovMeasure& nu, const MarkovMeasure& mu,
                         std::int64_t n) {
  require_same_adjacency(nu, mu);
  if (n < 1) throw Error(Err::InvalidInput, "dn2_term needs n >= 1");
  const int d = mu.states();
  const Matrix rn = reverse_transition(nu, -n).phat;
  const Matrix rm = reverse_transition(mu, -n).phat;
  const Matrix pn = nu.p(n);
  const Matrix qn = mu.p(n);
  double total = 0.0;
  for (int s = 0; s < d; ++s)
    for (int u = 0; u < d; ++u)
      for (int v = 0; v < d; ++v)
        for (int t = 0; t < d; ++t) {
          const double a = std::sqrt(rn(u, s) * pn(v, t));
          const double b = std::sqrt(rm(u, s) * qn(v, t));
          total += (a - b) * (a - b);
        }
  invariant(total >= 0.0 && total <= 2.0 * d * d + 1e-9,
            "coefficient must lie in [0, 2 d^2]");
  return {n, total};
}

double dn2_boundary_sum(const MarkovMeasure& nu, const MarkovMeasure& mu,
                        std::int64_t n, int u, int v) {
  require_same_adjacency(nu, mu);
  const int d = mu.states();
  if (n < 1) throw Error(Err::InvalidInput, "boundary sum needs n >= 1");
  if (u < 0 || u >= d || v < 0 || v >= d)
    throw Error(Err::InvalidInput, "boundary states out of range");
  if (n == 1 && u != v)
    throw Error(Err::InvalidInput,
                "for n = 1 both boundary states are coordinate 0");
  const Matrix rn = reverse_transition(nu, -(n - 1)).phat;
  const Matrix rm = reverse_transition(mu, -(n - 1)).phat;
  const Matrix pn = nu.p(n - 1);
  const Matrix qn = mu.p(n - 1);
  double total = 0.0;
  for (int s = 0; s < d; ++s)
    for (int t = 0; t < d; ++t) {
      const double a = std::sqrt(rn(u, s) * pn(v, t));
      const double b = std::sqrt(rm(u, s) * qn(v, t));
      total += (a - b) * (a - b);
    }
  return total;
}

SeriesVerdict equivalence_test(const MarkovMeasure& nu, const MarkovMeasure& mu,
                               std::int64_t horizon, TailPolicy policy) {
  require_same_adjacency(nu, mu);
  std::optional<Decision> dec;
  if (policy == TailPolicy::Auto) dec = decide_equivalence(nu, mu);
  return run_series(nu, mu, horizon, dec);
}

SeriesVerdict nonsingularity_test(const MarkovMeasure& mu, std::int64_t horizon,
                                  TailPolicy policy) {
  const MarkovMeasure shifted = shifted_measure(mu, -1);
  std::optional<Decision> dec;
  if (policy == TailPolicy::Auto) {
    // Left factors cancel beyond max(1, -cutoff) (shared left tail), so the
    // verdict is the class of the squared-increment series on the right.
    const RightShape rs = right_shape(mu);
    if (rs.kind == RightShape::Constant) {
      const std::int64_t n0 =
          std::max({std::int64_t{1}, -mu.transitions.left_cutoff, rs.from + 1});
      dec = Decision{SeriesStatus::Converges,
                     "transitions eventually constant; shifted and unshifted "
                     "factors coincide exactly beyond a finite prefix",
                     {},
                     n0};
    } else {
      switch (rs.f->increment_series()) {
        case SeriesClass::ConvergesCertified:
          dec = Decision{SeriesStatus::Converges,
                         "family certifies summable squared increments",
                         {},
                         -1};
          break;
        case SeriesClass::DivergesCertified:
          dec = Decision{SeriesStatus::Diverges,
                         "family certifies divergent squared increments",
                         {},
                         -1};
          break;
        case SeriesClass::Unknown:
          break;
      }
    }
  }
  SeriesVerdict v = run_series(shifted, mu, horizon, dec);
  double fwd = 0.0;
  for (std::int64_t n = horizon / 2; n < horizon; ++n)
    fwd = std::max(fwd, max_abs_diff(mu.p(n + 1), mu.p(n)));
  double bwd = 0.0;
  for (std::int64_t n = -horizon; n < -horizon / 2; ++n)
    bwd = std::max(bwd, max_abs_diff(mu.p(n + 1), mu.p(n)));
  v.residuals["forward_increment_sup"] = fwd;
  v.residuals["backward_increment_sup"] = bwd;
  return v;
}

HomogeneousVerdict homogeneous_equivalence_test(const MarkovMeasure& mu,
                                                const Matrix& q,
                                                std::int64_t horizon,
                                                TailPolicy policy) {
  const MarkovMeasure hom = homogeneous_measure(mu.adjacency, q);
  HomogeneousVerdict out;
  LimitCheck& lc = out.limit;
  lc.left_gap = max_abs_diff(mu.transitions.left_tail, q);

  const RightShape rs = right_shape(mu);
  bool right_declared = false;
  bool right_diverges = false;
  if (rs.kind == RightShape::Constant) {
    right_declared = true;
    lc.right_gap = max_abs_diff(rs.c, q);
  } else if (auto lim = rs.f->declared_limit()) {
    right_declared = true;
    lc.right_gap = max_abs_diff(*lim, q);
  } else if (!rs.f->divergence_witnesses().empty()) {
    right_diverges = true;
    double nearest = -1.0;
    for (const Matrix& w : rs.f->divergence_witnesses()) {
      const double g = max_abs_diff(w, q);
      nearest = (nearest < 0.0) ? g : std::min(nearest, g);
    }
    lc.right_gap = nearest;
  }

  if (lc.left_gap > 0.0 || right_diverges ||
      (right_declared && lc.right_gap > 0.0)) {
    lc.matches = false;
    lc.note = right_diverges
                  ? "LimitMismatch: the right tail declares divergence "
                    "witnesses, so no limit exists"
                  : "LimitMismatch: a declared tail limit differs from the "
                    "candidate matrix";
    out.series.status = SeriesStatus::Diverges;
    out.series.basis = BasisKind::SymbolicTail;
    out.series.basis_detail = lc.note;
    out.series.partial_sum = 0.0;
    out.series.terms_used = 0;
    out.series.residuals["left_limit_gap"] = lc.left_gap;
    out.series.residuals["right_limit_gap"] = lc.right_gap;
    return out;
  }
  lc.matches = right_declared;  // left gap is zero here
  lc.note = right_declared ? "ok" : "right-tail limit undeclared";
  out.series = equivalence_test(hom, mu, horizon, policy);
  return out;
}

LikelihoodState kls_likelihood(const MarkovMeasure& nu, const MarkovMeasure& mu,
                               const Word& x) {
  require_same_adjacency(nu, mu);
  if (x.lo != -x.hi() || x.hi() < 1)
    throw Error(Err::InvalidInput,
                "likelihood word must cover [-n, n] with n >= 1");
  validate_word(nu.adjacency, x.lo, x.symbols);
  const std::int64_t n = x.hi();

  double mn = coordinate_distribution(nu, -n)(x.at(-n)) /
              coordinate_distribution(mu, -n)(x.at(-n));
  for (std::int64_t i = -n; i < n; ++i)
    mn *= nu.p(i)(x.at(i), x.at(i + 1)) / mu.p(i)(x.at(i), x.at(i + 1));

  const Matrix rn = reverse_transition(nu, -(n - 1)).phat;
  const Matrix rm = reverse_transition(mu, -(n - 1)).phat;
  const double num =
      rn(x.at(-(n - 1)), x.at(-n)) * nu.p(n - 1)(x.at(n - 1), x.at(n));
  const double den =
      rm(x.at(-(n - 1)), x.at(-n)) * mu.p(n - 1)(x.at(n - 1), x.at(n));
  invariant(den > 0.0,
            "reverse/forward factors are positive on admissible words");
  return {n, mn, num / den};
}

double conditional_root_expectation(const MarkovMeasure& nu,
                                    const MarkovMeasure& mu, std::int64_t n,
                                    int u, int v) {
  require_same_adjacency(nu, mu);
  const int d = mu.states();
  if (n < 1) throw Error(Err::InvalidInput, "conditional expectation needs n >= 1");
  if (u < 0 || u >= d || v < 0 || v >= d)
    throw Error(Err::InvalidInput, "boundary states out of range");
  if (n == 1 && u != v)
    throw Error(Err::InvalidInput,
                "for n = 1 both boundary states are coordinate 0");
  const Matrix rn = reverse_transition(nu, -(n - 1)).phat;
  const Matrix rm = reverse_transition(mu, -(n - 1)).phat;
  const Matrix pn = nu.p(n - 1);
  const Matrix qn = mu.p(n - 1);
  double e = 0.0;
  for (int s = 0; s < d; ++s)
    for (int t = 0; t < d; ++t)
      e += std::sqrt(rn(u, s) * pn(v, t) * rm(u, s) * qn(v, t));
  invariant(e <= 1.0 + 1e-12, "root expectation is at most 1");
  return e;
}

}  // namespace mk
