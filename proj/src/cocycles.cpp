#include "markov_krieger/cocycles.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <optional>
#include <sstream>
#include <utility>

#include "markov_krieger/classifier.hpp"

namespace mk {

namespace {

int sign_of(double x) { return (x > 0.0) - (x < 0.0); }

// Re-runs the admissible-pair rules against adj, mapping any failure to
// PairInvalid carrying `index` (a 1-based round number, or kNoIndex for a
// standalone spec).
void require_valid_pair(const Adjacency& adj, const AdmissiblePair& p,
                        std::int64_t index) {
  const std::string label =
      index == kNoIndex ? std::string("pair")
                        : "pair " + std::to_string(index);
  try {
    const AdmissiblePair fresh = make_admissible_pair(adj, p.first, p.second);
    if (fresh.length != p.length) {
      throw Error(Err::PairInvalid,
                  label + ": stored length " + std::to_string(p.length) +
                      " disagrees with the blocks (" +
                      std::to_string(fresh.length) + ")",
                  index);
    }
  } catch (const Error& e) {
    if (e.code == Err::PairInvalid) throw;
    throw Error(Err::PairInvalid, label + ": " + e.what(), index);
  }
}

bool matches_at(const Word& x, std::int64_t base, const Block& b) {
  for (std::size_t t = 0; t < b.symbols.size(); ++t) {
    if (x.at(base + static_cast<std::int64_t>(t)) != b.symbols[t]) {
      return false;
    }
  }
  return true;
}

void write_at(Word& x, std::int64_t base, const Block& b) {
  for (std::size_t t = 0; t < b.symbols.size(); ++t) {
    x.at(base + static_cast<std::int64_t>(t)) = b.symbols[t];
  }
}

}  // namespace

AdmissibleConfiguration validate_configuration(const Adjacency& adj,
                                               AdmissibleConfiguration cfg) {
  const std::size_t n = cfg.pairs.size();
  if (cfg.j_indices.size() != n || cfg.i_indices.size() != n) {
    throw Error(Err::InvalidInput,
                "pairs, j_indices, i_indices must have equal sizes (got " +
                    std::to_string(n) + ", " +
                    std::to_string(cfg.j_indices.size()) + ", " +
                    std::to_string(cfg.i_indices.size()) + ")");
  }
  if (cfg.length_bound < 3) {
    throw Error(Err::InvalidInput,
                "length bound L must be at least 3; distinct blocks with "
                "matching endpoints need an interior");
  }
  if (cfg.mixing_exponent < 1) {
    throw Error(Err::InvalidInput, "mixing exponent M must be at least 1");
  }
  const PrimitivityCertificate cert = primitivity_index(adj);
  if (cfg.mixing_exponent < cert.exponent) {
    throw Error(Err::InvalidInput,
                "mixing exponent M = " + std::to_string(cfg.mixing_exponent) +
                    " is below the primitivity index " +
                    std::to_string(cert.exponent) +
                    "; A^M has zero entries");
  }

  for (std::size_t k = 0; k < n; ++k) {
    const std::int64_t round = static_cast<std::int64_t>(k) + 1;
    require_valid_pair(adj, cfg.pairs[k], round);
    if (cfg.pairs[k].length > cfg.length_bound) {
      throw Error(Err::LengthViolation,
                  "pair " + std::to_string(round) + " has length " +
                      std::to_string(cfg.pairs[k].length) +
                      ", above the bound L = " +
                      std::to_string(cfg.length_bound),
                  round);
    }
  }

  const std::int64_t spacing = cfg.length_bound + cfg.mixing_exponent;
  for (std::size_t k = 0; k < n; ++k) {
    const std::int64_t round = static_cast<std::int64_t>(k) + 1;
    if (cfg.j_indices[k] < 1) {
      throw Error(Err::SpacingViolation,
                  "j_" + std::to_string(round) + " = " +
                      std::to_string(cfg.j_indices[k]) + " must be positive",
                  round);
    }
    if (cfg.i_indices[k] > -1) {
      throw Error(Err::SpacingViolation,
                  "i_" + std::to_string(round) + " = " +
                      std::to_string(cfg.i_indices[k]) + " must be negative",
                  round);
    }
    if (k > 0) {
      const std::int64_t dj = cfg.j_indices[k] - cfg.j_indices[k - 1];
      if (dj < spacing) {
        throw Error(Err::SpacingViolation,
                    "j_" + std::to_string(round) + " - j_" +
                        std::to_string(round - 1) + " = " +
                        std::to_string(dj) + " is below L + M = " +
                        std::to_string(spacing),
                    round);
      }
      const std::int64_t di = cfg.i_indices[k - 1] - cfg.i_indices[k];
      if (di < spacing) {
        throw Error(Err::SpacingViolation,
                    "i_" + std::to_string(round - 1) + " - i_" +
                        std::to_string(round) + " = " + std::to_string(di) +
                        " is below L + M = " + std::to_string(spacing),
                    round);
      }
    }
  }
  if (n > 0) {
    const std::int64_t gap = cfg.j_indices[0] - cfg.i_indices[0];
    if (gap < spacing) {
      throw Error(Err::SpacingViolation,
                  "j_1 - i_1 = " + std::to_string(gap) +
                      " is below L + M = " + std::to_string(spacing),
                  0);
    }
  }
  return cfg;
}

PermutationSpec make_permutation_spec(const Adjacency& adj,
                                      PermutationKind kind,
                                      AdmissiblePair pair, std::int64_t i,
                                      std::int64_t j) {
  require_valid_pair(adj, pair, kNoIndex);
  const std::int64_t gap = i < j ? j - i : i - j;
  if (gap < pair.length) {
    throw Error(Err::SpacingViolation,
                "|i - j| = " + std::to_string(gap) +
                    " is below the pair length " +
                    std::to_string(pair.length) +
                    "; the block windows overlap");
  }
  return PermutationSpec{kind, std::move(pair), i, j};
}

PermutationSpec reversed_spec(PermutationSpec spec) {
  std::swap(spec.pair.first, spec.pair.second);
  return spec;
}

double block_transition_weight(const MarkovMeasure& mu, std::int64_t i,
                               const Block& b) {
  double w = 1.0;
  for (std::size_t t = 0; t + 1 < b.symbols.size(); ++t) {
    w *= mu.p(i + static_cast<std::int64_t>(t))(b.symbols[t],
                                                b.symbols[t + 1]);
  }
  return w;
}

double block_product(const Matrix& p, const Block& b) {
  double w = 1.0;
  for (std::size_t t = 0; t + 1 < b.symbols.size(); ++t) {
    w *= p(b.symbols[t], b.symbols[t + 1]);
  }
  return w;
}

RnDerivative rn_derivative(const MarkovMeasure& mu,
                           const PermutationSpec& spec, DomainCell cell) {
  // Revalidate against this measure's adjacency; the spec may have been
  // built elsewhere.
  make_permutation_spec(mu.adjacency, spec.kind, spec.pair, spec.i, spec.j);

  const double wi_first = block_transition_weight(mu, spec.i, spec.pair.first);
  const double wi_second =
      block_transition_weight(mu, spec.i, spec.pair.second);
  const double wj_first = block_transition_weight(mu, spec.j, spec.pair.first);
  const double wj_second =
      block_transition_weight(mu, spec.j, spec.pair.second);

  double num = wi_second * wj_first;  // P_i(B') P_j(B)
  double den = wi_first * wj_second;  // P_i(B) P_j(B')
  invariant(num > 0.0 && den > 0.0,
            "block transition weights must be positive under the Doeblin "
            "condition");
  if (cell == DomainCell::Swapped) std::swap(num, den);
  return RnDerivative{num / den, num, den};
}

Word apply_permutation(const PermutationSpec& spec, Word x) {
  const std::int64_t len = spec.pair.length;
  if (!x.covers(spec.i, spec.i + len - 1) ||
      !x.covers(spec.j, spec.j + len - 1)) {
    throw Error(Err::InsufficientWindow,
                "word window [" + std::to_string(x.lo) + ", " +
                    std::to_string(x.hi()) +
                    "] does not cover both block windows at i = " +
                    std::to_string(spec.i) + " and j = " +
                    std::to_string(spec.j));
  }
  const bool primary = matches_at(x, spec.i, spec.pair.first) &&
                       matches_at(x, spec.j, spec.pair.second);
  if (primary) {
    write_at(x, spec.i, spec.pair.second);
    write_at(x, spec.j, spec.pair.first);
    return x;
  }
  const bool swapped = matches_at(x, spec.i, spec.pair.second) &&
                       matches_at(x, spec.j, spec.pair.first);
  if (swapped && spec.kind == PermutationKind::Symmetric) {
    write_at(x, spec.i, spec.pair.first);
    write_at(x, spec.j, spec.pair.second);
    return x;
  }
  throw Error(Err::OutsideDomain,
              swapped ? "word lies in the swapped cell, where an asymmetric "
                        "swap is undefined"
                      : "word matches neither domain cell of the swap");
}

DkSequence dk_sequence(const AdmissibleConfiguration& cfg,
                       const MarkovMeasure& mu, std::int64_t rounds) {
  if (rounds < 0) {
    throw Error(Err::InvalidInput, "rounds must be nonnegative");
  }
  AdmissibleConfiguration checked = validate_configuration(mu.adjacency, cfg);
  const std::int64_t total = std::min<std::int64_t>(rounds, checked.rounds());

  DkSequence out;
  // Each transition-weight ratio has at most 2 (L - 1) factors, each within
  // [delta / (1 - delta), (1 - delta) / delta].
  out.bound = 2.0 * static_cast<double>(checked.length_bound) *
              std::log((1.0 - mu.doeblin) / mu.doeblin);
  out.terms.reserve(static_cast<std::size_t>(total));
  for (std::int64_t k = 1; k <= total; ++k) {
    const AdmissiblePair& pair = checked.pairs[static_cast<std::size_t>(k - 1)];
    const std::int64_t i = checked.i_indices[static_cast<std::size_t>(k - 1)];
    const std::int64_t j = checked.j_indices[static_cast<std::size_t>(k - 1)];
    const double wi_first = block_transition_weight(mu, i, pair.first);
    const double wi_second = block_transition_weight(mu, i, pair.second);
    const double wj_first = block_transition_weight(mu, j, pair.first);
    const double wj_second = block_transition_weight(mu, j, pair.second);

    DkTerm term;
    term.k = k;
    term.numerator = wi_second * wj_first;
    term.denominator = wi_first * wj_second;
    term.value = std::log(term.numerator / term.denominator);
    term.surrogate = term.numerator - term.denominator;
    term.bracket = log_ratio_bracket(term.numerator, term.denominator);
    invariant(std::isfinite(term.value),
              "log-derivative must be finite under the Doeblin condition");
    invariant(std::abs(term.value) <= out.bound + 1e-12,
              "log-derivative exceeded the uniform bound 2 L "
              "log((1-delta)/delta)");
    out.terms.push_back(term);
  }
  out.configuration = std::move(checked);
  return out;
}

ConvergentCaseReport convergent_case_report(const AdmissibleConfiguration& cfg,
                                            const MarkovMeasure& mu,
                                            std::int64_t rounds,
                                            SeriesClass certificate,
                                            std::string certificate_detail) {
  ConvergentCaseReport report;
  report.sequence = dk_sequence(cfg, mu, rounds);
  const std::size_t n = report.sequence.terms.size();
  report.partial_sums.resize(n);
  report.suffix_sup.resize(n);
  double acc = 0.0;
  for (std::size_t k = 0; k < n; ++k) {
    const double v = report.sequence.terms[k].value;
    acc += v * v;
    report.partial_sums[k] = acc;
  }
  double sup = 0.0;
  for (std::size_t k = n; k-- > 0;) {
    sup = std::max(sup, std::abs(report.sequence.terms[k].value));
    report.suffix_sup[k] = sup;
  }
  report.certificate = certificate;
  if (!certificate_detail.empty()) {
    report.certificate_detail = std::move(certificate_detail);
  } else if (certificate == SeriesClass::Unknown) {
    report.certificate_detail =
        "no symbolic certificate: finite partial sums cannot decide an "
        "infinite series";
  } else {
    report.certificate_detail = "certificate supplied by the caller";
  }
  return report;
}

DistinguishingPair find_distinguishing_pair(const Matrix& p, const Matrix& q,
                                            int max_length) {
  if (p.rows() != p.cols() || q.rows() != q.cols() || p.rows() != q.rows() ||
      p.rows() < 2) {
    throw Error(Err::InvalidInput,
                "both matrices must be square, of equal size, at least 2 x 2");
  }
  if (!is_stochastic(p) || !is_stochastic(q)) {
    throw Error(Err::InvalidInput, "both matrices must be row-stochastic");
  }
  const int d = static_cast<int>(p.rows());
  Eigen::MatrixXi support(d, d);
  for (int r = 0; r < d; ++r) {
    for (int c = 0; c < d; ++c) {
      const bool ps = p(r, c) > 0.0;
      const bool qs = q(r, c) > 0.0;
      if (ps != qs) {
        throw Error(Err::SupportMismatch,
                    "the matrices have different supports at entry (" +
                        std::to_string(r) + ", " + std::to_string(c) + ")");
      }
      support(r, c) = ps ? 1 : 0;
    }
  }
  const Adjacency adj = make_adjacency(support);
  primitivity_index(adj);  // NotPrimitiveWithinCap when the support fails
  if (max_abs_diff(p, q) == 0.0) {
    throw Error(Err::InvalidInput,
                "the matrices are identical; no admissible pair can "
                "distinguish them");
  }

  for (int length = 3; length <= max_length; ++length) {
    for (int alpha = 0; alpha < d; ++alpha) {
      for (int beta = 0; beta < d; ++beta) {
        const std::vector<Block> blocks =
            enumerate_blocks(adj, alpha, beta, length);
        std::vector<double> wp(blocks.size());
        std::vector<double> wq(blocks.size());
        for (std::size_t t = 0; t < blocks.size(); ++t) {
          wp[t] = block_product(p, blocks[t]);
          wq[t] = block_product(q, blocks[t]);
        }
        for (std::size_t a = 0; a < blocks.size(); ++a) {
          for (std::size_t b = a + 1; b < blocks.size(); ++b) {
            const double gap = wp[a] * wq[b] - wq[a] * wp[b];
            if (std::abs(gap) > kCrossRatioTol) {
              return DistinguishingPair{
                  make_admissible_pair(adj, blocks[a], blocks[b]), alpha, beta,
                  gap};
            }
          }
        }
      }
    }
  }
  throw Error(Err::NoneFoundWithinLen,
              "no admissible pair with unequal cross-products up to length " +
                  std::to_string(max_length));
}

namespace {

// One placement recipe: which matrix entry drives the sign-coherent scan,
// which offsets must stay coherent, which pairs the two selector branches
// use, and (optionally) extra log terms that must stay square-summable.
struct RecipePlan {
  int row = 0;  // driver entry (row, col)
  int col = 0;
  std::vector<int> offsets;
  AdmissiblePair pair0;
  std::optional<AdmissiblePair> pair1;
  bool has_selector = false;
  int sel_row = 0;  // selector probes entry (sel_row, sel_col) at offset
  int sel_col = 0;
  int sel_offset = 0;
  // Residual log factors log(entry(j + off) / entry(i + off)) whose squares
  // must fit under the 2^{-k} envelope (cells given as (offset, row, col)).
  std::vector<std::array<int, 3>> residual_cells;
  std::string label;
};

AdmissiblePair pair_of(const Adjacency& adj, std::vector<int> a,
                       std::vector<int> b) {
  return make_admissible_pair(adj, validate_block(adj, a),
                              validate_block(adj, b));
}

}  // namespace

BuiltConfiguration build_configuration(const MarkovMeasure& mu,
                                       ConfigurationFamily family,
                                       std::int64_t rounds,
                                       std::int64_t scan_horizon) {
  if (rounds < 1) {
    throw Error(Err::InvalidInput, "rounds must be at least 1");
  }

  Adjacency tmpl;
  int length_bound = 0;
  switch (family) {
    case ConfigurationFamily::TwoStateFullshift:
      tmpl = full_shift(2);
      length_bound = 3;
      break;
    case ConfigurationFamily::TwoStateSparse: {
      Eigen::MatrixXi a(2, 2);
      a << 1, 1, 1, 0;
      tmpl = make_adjacency(a);
      length_bound = 3;
      break;
    }
    case ConfigurationFamily::GoldenMean:
      tmpl = golden_mean_shift();
      length_bound = 4;
      break;
  }
  if (mu.adjacency.size() != tmpl.size() ||
      (mu.adjacency.a.array() != tmpl.a.array()).any()) {
    throw Error(Err::AdjacencyMismatch,
                "the measure's adjacency does not match the recipe family");
  }

  const int mixing = mu.mixing_exponent;
  const std::int64_t spacing = length_bound + mixing;
  const std::int64_t horizon =
      scan_horizon > 0
          ? scan_horizon
          : std::max<std::int64_t>(4096, 64 * rounds * spacing);

  const TailBehavior tails = tail_behavior(mu);
  if (tails.mode != TailMode::ConvergentBoth || !tails.right_limit) {
    throw Error(Err::NotApplicable,
                "the placement recipe needs both tails to declare a common "
                "limit; without one the divergent-tail branch of the "
                "classifier already applies");
  }
  const Matrix& limit = *tails.right_limit;

  // Candidate plans for this family, in preference order on ties.
  std::vector<RecipePlan> plans;
  switch (family) {
    case ConfigurationFamily::TwoStateFullshift: {
      RecipePlan r0;
      r0.row = 0;
      r0.col = 0;
      r0.offsets = {0, 1};
      r0.pair0 = pair_of(tmpl, {0, 0, 0}, {0, 1, 0});
      r0.pair1 = pair_of(tmpl, {0, 0, 1}, {0, 1, 1});
      r0.has_selector = true;
      r0.sel_row = 1;
      r0.sel_col = 0;
      r0.sel_offset = 1;
      r0.label = "two-state fullshift, 0-row deviations";
      plans.push_back(std::move(r0));

      RecipePlan r1;
      r1.row = 1;
      r1.col = 1;
      r1.offsets = {0, 1};
      r1.pair0 = pair_of(tmpl, {1, 1, 1}, {1, 0, 1});
      r1.pair1 = pair_of(tmpl, {1, 1, 0}, {1, 0, 0});
      r1.has_selector = true;
      r1.sel_row = 0;
      r1.sel_col = 1;
      r1.sel_offset = 1;
      r1.label = "two-state fullshift, 1-row deviations (mirror)";
      plans.push_back(std::move(r1));
      break;
    }
    case ConfigurationFamily::TwoStateSparse: {
      RecipePlan r0;
      r0.row = 0;
      r0.col = 0;
      r0.offsets = {0, 1};
      r0.pair0 = pair_of(tmpl, {0, 1, 0}, {0, 0, 0});
      r0.label = "sparse two-state, 0-row deviations (1-row is forced)";
      plans.push_back(std::move(r0));
      break;
    }
    case ConfigurationFamily::GoldenMean: {
      RecipePlan r0;
      r0.row = 0;
      r0.col = 0;
      r0.offsets = {0, 1, 2};
      r0.pair0 = pair_of(tmpl, {0, 0, 0, 0}, {0, 2, 1, 0});
      r0.pair1 = pair_of(tmpl, {0, 0, 0, 2}, {0, 2, 1, 2});
      r0.has_selector = true;
      r0.sel_row = 1;
      r0.sel_col = 0;
      r0.sel_offset = 2;
      r0.label = "golden mean, 0-row deviations";
      plans.push_back(std::move(r0));

      RecipePlan r1;
      r1.row = 1;
      r1.col = 0;
      r1.offsets = {0, 1, 2};
      r1.pair0 = pair_of(tmpl, {1, 0, 0, 2}, {1, 2, 1, 2});
      // The swapped pair touches the 0-row at offsets +1 and +2; those log
      // factors must stay square-summable, enforced per round below.
      r1.residual_cells = {{1, 0, 0}, {2, 0, 2}};
      r1.label = "golden mean, 1-row deviations";
      plans.push_back(std::move(r1));
      break;
    }
  }

  // Pick the plan whose driver entry deviates the most (truncated squared
  // mass); ties keep the earlier plan.
  const auto entry_at = [&mu](const RecipePlan& plan, std::int64_t n) {
    return mu.p(n)(plan.row, plan.col);
  };
  std::size_t best = 0;
  double best_mass = -1.0;
  for (std::size_t t = 0; t < plans.size(); ++t) {
    const double target = limit(plans[t].row, plans[t].col);
    double mass = 0.0;
    for (std::int64_t n = 1; n <= horizon; ++n) {
      const double dev = entry_at(plans[t], n) - target;
      mass += dev * dev;
    }
    if (mass > best_mass) {
      best_mass = mass;
      best = t;
    }
  }
  if (best_mass <= 0.0) {
    throw Error(Err::NotApplicable,
                "every scanned transition row matches the tail limit within "
                "coordinates 1.." +
                    std::to_string(horizon) +
                    "; there are no deviations to place blocks on");
  }
  const RecipePlan& plan = plans[best];
  const double target = limit(plan.row, plan.col);

  // Future placements: greedy scan for `rounds` coordinates, spacing
  // >= L + M apart, whose driver deviations share one sign at every
  // offset.  Ties (exact equality with the limit) never qualify.  The sign
  // with more placements wins; equal counts go to the larger deviation
  // mass, then to +1.
  const auto scan_sign = [&](int s) {
    std::pair<std::vector<std::int64_t>, double> out;
    std::int64_t next_free = 1;
    for (std::int64_t n = 1;
         n <= horizon &&
         out.first.size() < static_cast<std::size_t>(rounds);
         ++n) {
      if (n < next_free) continue;
      bool coherent = true;
      for (const int off : plan.offsets) {
        if (sign_of(entry_at(plan, n + off) - target) != s) {
          coherent = false;
          break;
        }
      }
      if (!coherent) continue;
      out.first.push_back(n);
      const double dev = entry_at(plan, n) - target;
      out.second += dev * dev;
      next_free = n + spacing;
    }
    return out;
  };
  auto plus = scan_sign(+1);
  auto minus = scan_sign(-1);
  const bool take_plus =
      plus.first.size() != minus.first.size()
          ? plus.first.size() > minus.first.size()
          : plus.second >= minus.second;
  const int sign = take_plus ? +1 : -1;
  std::vector<std::int64_t> j_indices =
      std::move(take_plus ? plus.first : minus.first);
  if (j_indices.size() < static_cast<std::size_t>(rounds)) {
    throw Error(Err::NotApplicable,
                "found only " + std::to_string(j_indices.size()) + " of " +
                    std::to_string(rounds) +
                    " sign-coherent future placements within coordinates "
                    "1.." +
                    std::to_string(horizon) + " for the " + plan.label +
                    " recipe");
  }

  // Past placements: scan downward keeping every offset's deviation either
  // zero or of the target sign, plus the residual envelope where the recipe
  // has one.
  std::vector<std::int64_t> i_indices;
  i_indices.reserve(static_cast<std::size_t>(rounds));
  for (std::int64_t k = 0; k < rounds; ++k) {
    std::int64_t cand =
        k == 0 ? std::min<std::int64_t>(-1, j_indices[0] - spacing)
               : i_indices.back() - spacing;
    bool found = false;
    for (; cand >= -horizon; --cand) {
      bool ok = true;
      for (const int off : plan.offsets) {
        const double diff = entry_at(plan, j_indices[static_cast<std::size_t>(
                                               k)] +
                                               off) -
                            entry_at(plan, cand + off);
        if (diff != 0.0 && sign_of(diff) != sign) {
          ok = false;
          break;
        }
      }
      if (ok && !plan.residual_cells.empty()) {
        double residual = 0.0;
        for (const auto& cell : plan.residual_cells) {
          const double a =
              mu.p(j_indices[static_cast<std::size_t>(k)] + cell[0])(cell[1],
                                                                     cell[2]);
          const double b = mu.p(cand + cell[0])(cell[1], cell[2]);
          const double lr = std::log(a / b);
          residual += lr * lr;
        }
        if (residual > std::pow(2.0, -static_cast<double>(k + 1))) ok = false;
      }
      if (ok) {
        found = true;
        break;
      }
    }
    if (!found) {
      throw Error(Err::NotApplicable,
                  "no sign-compatible past placement for round " +
                      std::to_string(k + 1) + " within coordinates -1..-" +
                      std::to_string(horizon) + " for the " + plan.label +
                      " recipe");
    }
    i_indices.push_back(cand);
  }

  // Selector: keep the branch whose leftover log factor shares the target
  // sign (a tie contributes nothing and keeps branch 0).
  std::vector<int> selector(static_cast<std::size_t>(rounds), 0);
  std::vector<AdmissiblePair> pairs;
  pairs.reserve(static_cast<std::size_t>(rounds));
  for (std::int64_t k = 0; k < rounds; ++k) {
    int g = 0;
    if (plan.has_selector) {
      const double a = mu.p(i_indices[static_cast<std::size_t>(k)] +
                            plan.sel_offset)(plan.sel_row, plan.sel_col);
      const double b = mu.p(j_indices[static_cast<std::size_t>(k)] +
                            plan.sel_offset)(plan.sel_row, plan.sel_col);
      const double diff = a - b;  // sign(log(a/b)) = sign(a - b)
      if (diff != 0.0 && sign_of(diff) != sign) g = 1;
    }
    selector[static_cast<std::size_t>(k)] = g;
    pairs.push_back(g == 0 ? plan.pair0 : *plan.pair1);
  }

  BuiltConfiguration out;
  out.configuration = validate_configuration(
      mu.adjacency,
      AdmissibleConfiguration{std::move(pairs), std::move(j_indices),
                              std::move(i_indices), length_bound, mixing});
  out.selector = std::move(selector);
  out.sign = sign;
  out.target_row = plan.row;
  out.recipe = plan.label;

  const TransitionSequence& seq = mu.transitions;
  if (seq.right_family) {
    out.certificate = seq.right_family->deviation_from_limit_series();
    switch (out.certificate) {
      case SeriesClass::DivergesCertified:
        out.certificate_detail =
            "the declared tail family (" + seq.right_family->describe() +
            ") certifies a divergent squared-deviation series; the "
            "sign-coherent selection inherits the divergence under "
            "shift-nonsingularity";
        break;
      case SeriesClass::ConvergesCertified:
        out.certificate_detail =
            "the declared tail family (" + seq.right_family->describe() +
            ") certifies a summable squared-deviation series";
        break;
      case SeriesClass::Unknown:
        out.certificate_detail =
            "the declared tail family does not certify its "
            "squared-deviation series";
        break;
    }
  } else {
    out.certificate = SeriesClass::ConvergesCertified;
    out.certificate_detail =
        "the transition matrices equal the tail limit beyond a finite "
        "window, so the squared-deviation series is a finite sum";
  }
  return out;
}

YkMoments yk_moments(const AdmissibleConfiguration& cfg,
                     const MarkovMeasure& mu, std::int64_t k) {
  const AdmissibleConfiguration checked =
      validate_configuration(mu.adjacency, cfg);
  if (k < 1 || k > checked.rounds()) {
    throw Error(Err::InvalidInput,
                "round index " + std::to_string(k) + " is out of range 1.." +
                    std::to_string(checked.rounds()));
  }
  const AdmissiblePair& pair = checked.pairs[static_cast<std::size_t>(k - 1)];
  const std::int64_t i = checked.i_indices[static_cast<std::size_t>(k - 1)];
  const std::int64_t j = checked.j_indices[static_cast<std::size_t>(k - 1)];

  const std::array<Cylinder, 2> primary{Cylinder{i, pair.first},
                                        Cylinder{j, pair.second}};
  const std::array<Cylinder, 2> swapped{Cylinder{i, pair.second},
                                        Cylinder{j, pair.first}};
  YkMoments m;
  m.p_plus = multi_cylinder_measure(mu, primary);
  m.p_minus = multi_cylinder_measure(mu, swapped);
  m.mean = m.p_plus - m.p_minus;
  m.variance = m.p_plus * (1.0 - m.p_plus) + m.p_minus * (1.0 - m.p_minus) +
               2.0 * m.p_plus * m.p_minus;
  invariant(m.p_plus > 0.0 && m.p_minus > 0.0 && m.variance > 0.0,
            "swap-cell probabilities must be positive under the Doeblin "
            "condition");
  return m;
}

std::vector<std::vector<int>> yk_samples(const AdmissibleConfiguration& cfg,
                                         const MarkovMeasure& mu,
                                         std::int64_t rounds,
                                         std::span<const Word> trajectories) {
  if (rounds < 1) {
    throw Error(Err::InvalidInput, "rounds must be at least 1");
  }
  const AdmissibleConfiguration checked =
      validate_configuration(mu.adjacency, cfg);
  const std::int64_t total = std::min<std::int64_t>(rounds, checked.rounds());

  std::vector<std::vector<int>> out;
  out.reserve(trajectories.size());
  for (const Word& w : trajectories) {
    validate_word(mu.adjacency, w.lo, w.symbols);
    std::vector<int> ys(static_cast<std::size_t>(total), 0);
    for (std::int64_t k = 1; k <= total; ++k) {
      const AdmissiblePair& pair =
          checked.pairs[static_cast<std::size_t>(k - 1)];
      const std::int64_t i = checked.i_indices[static_cast<std::size_t>(k - 1)];
      const std::int64_t j = checked.j_indices[static_cast<std::size_t>(k - 1)];
      if (!w.covers(i, i + pair.length - 1) ||
          !w.covers(j, j + pair.length - 1)) {
        throw Error(Err::InsufficientWindow,
                    "trajectory window [" + std::to_string(w.lo) + ", " +
                        std::to_string(w.hi()) +
                        "] does not cover the block windows of round " +
                        std::to_string(k),
                    k);
      }
      int y = 0;
      if (matches_at(w, i, pair.first) && matches_at(w, j, pair.second)) {
        y = 1;
      } else if (matches_at(w, i, pair.second) &&
                 matches_at(w, j, pair.first)) {
        y = -1;
      }
      ys[static_cast<std::size_t>(k - 1)] = y;
    }
    out.push_back(std::move(ys));
  }
  return out;
}

}  // namespace mk
