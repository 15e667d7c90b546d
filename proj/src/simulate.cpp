#include "markov_krieger/simulate.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include "markov_krieger/classifier.hpp"
#include "markov_krieger/errors.hpp"
#include "markov_krieger/rng.hpp"

namespace mk {
namespace {

// Inverse-CDF draw from a probability row; zero entries can never win.
int draw_symbol(const RowVector& row, double u) {
  double acc = 0.0;
  int last = -1;
  for (int s = 0; s < row.size(); ++s) {
    if (row(s) <= 0.0) continue;
    last = s;
    acc += row(s);
    if (u < acc) return s;
  }
  invariant(last >= 0, "probability row has no positive entry");
  return last;
}

double standard_normal_cdf(double x) {
  return 0.5 * std::erfc(-x / std::sqrt(2.0));
}

double floored(double se) { return std::max(se, kStandardErrorFloor); }

struct SampleSummary {
  double mean = 0.0;
  double sd = 0.0;  // sample standard deviation
};

SampleSummary summarize(const std::vector<double>& values) {
  const double n = static_cast<double>(values.size());
  double mean = 0.0;
  for (const double v : values) mean += v;
  mean /= n;
  double ss = 0.0;
  for (const double v : values) ss += (v - mean) * (v - mean);
  const double sd = values.size() > 1 ? std::sqrt(ss / (n - 1.0)) : 0.0;
  return {mean, sd};
}

ProbeStatistic two_sided_row(std::string name, double empirical,
                             double predicted, double se, double allowance) {
  ProbeStatistic row;
  row.name = std::move(name);
  row.empirical = empirical;
  row.predicted = predicted;
  row.standard_error = floored(se);
  row.allowance = allowance;
  row.within = std::abs(empirical - predicted) <=
               kSigmaThreshold * row.standard_error + allowance;
  return row;
}

ProbeStatistic lower_bound_row(std::string name, double empirical,
                               double predicted, double se) {
  ProbeStatistic row;
  row.name = std::move(name);
  row.empirical = empirical;
  row.predicted = predicted;
  row.standard_error = floored(se);
  row.allowance = 0.0;
  row.within = empirical >= predicted - kSigmaThreshold * row.standard_error;
  return row;
}

// Declared one-sided limits with their stationary vectors; the common
// precondition of the statistical probes.
struct DeclaredLimits {
  Matrix left;   // P = lim P_{-n}
  Matrix right;  // Q = lim P_{n}
  RowVector pi;
  RowVector lambda;
};

DeclaredLimits declared_limits(const MarkovMeasure& mu) {
  const TailBehavior tb = tail_behavior(mu);
  if (tb.mode != TailMode::ConvergentBoth || !tb.left_limit ||
      !tb.right_limit) {
    throw Error(Err::TailsUnknown,
                "probe needs both one-sided limits declared; the right tail "
                "declares none");
  }
  DeclaredLimits out;
  out.left = *tb.left_limit;
  out.right = *tb.right_limit;
  out.pi = acim(out.left);
  out.lambda = acim(out.right);
  return out;
}

// Product of P_n over n in [a, b) (identity when a == b): the transfer from
// coordinate a to coordinate b in the row-vector convention.
Matrix range_product(const MarkovMeasure& mu, std::int64_t a, std::int64_t b) {
  const int d = mu.states();
  Matrix out = Matrix::Identity(d, d);
  for (std::int64_t n = a; n < b; ++n) out = out * mu.p(n);
  return out;
}

// Transfer matrix of one pinned block at `base`: a single nonzero entry at
// (first symbol, last symbol) carrying the block's transition weight.
Matrix block_transfer(const MarkovMeasure& mu, std::int64_t base,
                      const Block& block) {
  const int d = mu.states();
  Matrix out = Matrix::Zero(d, d);
  out(block.symbols.front(), block.symbols.back()) =
      block_transition_weight(mu, base, block);
  return out;
}

std::int64_t clamp_rounds(const AdmissibleConfiguration& cfg,
                          std::int64_t rounds) {
  return std::min<std::int64_t>(std::max<std::int64_t>(rounds, 0),
                                cfg.rounds());
}

void require_samples(std::int64_t samples) {
  if (samples < 2) {
    throw Error(Err::InvalidInput, "a probe needs at least 2 samples");
  }
}

}  // namespace

// ---------------------------------------------------------------------------
// Trajectories
// ---------------------------------------------------------------------------

Word sample_window(const MarkovMeasure& mu, std::int64_t lo, std::int64_t hi,
                   std::uint64_t seed, std::uint64_t stream) {
  if (lo > hi) {
    throw Error(Err::InvalidInput, "sample window is empty");
  }
  const CounterRng rng(seed);
  std::uint64_t counter = 0;
  std::vector<int> symbols;
  symbols.reserve(static_cast<std::size_t>(hi - lo + 1));
  symbols.push_back(
      draw_symbol(coordinate_distribution(mu, lo), rng.uniform(stream, counter++)));
  for (std::int64_t n = lo; n < hi; ++n) {
    const RowVector row = mu.p(n).row(symbols.back());
    symbols.push_back(draw_symbol(row, rng.uniform(stream, counter++)));
  }
  return validate_word(mu.adjacency, lo, symbols);
}

Trajectory sample_trajectory(const MarkovMeasure& mu, std::int64_t radius,
                             std::uint64_t seed, std::uint64_t stream) {
  if (radius < 1) {
    throw Error(Err::InvalidInput, "trajectory radius must be >= 1");
  }
  return Trajectory{sample_window(mu, -radius, radius, seed, stream), seed,
                    stream};
}

Trajectory sample_trajectory_reversed(const MarkovMeasure& mu,
                                      std::int64_t radius, std::uint64_t seed,
                                      std::uint64_t stream) {
  if (radius < 1) {
    throw Error(Err::InvalidInput, "trajectory radius must be >= 1");
  }
  const CounterRng rng(seed);
  std::uint64_t counter = 0;
  std::vector<int> reversed;
  reversed.reserve(static_cast<std::size_t>(2 * radius + 1));
  reversed.push_back(draw_symbol(coordinate_distribution(mu, radius),
                                 rng.uniform(stream, counter++)));
  for (std::int64_t n = radius; n > -radius; --n) {
    const RowVector row = reverse_transition(mu, n).phat.row(reversed.back());
    reversed.push_back(draw_symbol(row, rng.uniform(stream, counter++)));
  }
  std::vector<int> symbols(reversed.rbegin(), reversed.rend());
  return Trajectory{validate_word(mu.adjacency, -radius, symbols), seed,
                    stream};
}

// ---------------------------------------------------------------------------
// Law-of-large-numbers probe
// ---------------------------------------------------------------------------

ProbeReport lln_probe(const MarkovMeasure& mu, const PairFunction& f,
                      std::int64_t horizon, std::int64_t samples,
                      std::uint64_t seed) {
  const int d = mu.states();
  if (f.table.rows() != d || f.table.cols() != d) {
    throw Error(Err::InvalidInput, "pair-function table must be d x d");
  }
  if (horizon < 1) {
    throw Error(Err::InvalidInput, "horizon must be >= 1");
  }
  require_samples(samples);
  const DeclaredLimits lim = declared_limits(mu);
  const double n_inv = 1.0 / static_cast<double>(horizon);

  // Exact finite-horizon means: the Cesaro averages of the coordinate
  // marginals and of the one-step pair laws over the probed range.
  RowVector site_fwd_exact = RowVector::Zero(d);
  RowVector site_rev_exact = RowVector::Zero(d);
  double pair_fwd_exact = 0.0;
  double pair_rev_exact = 0.0;
  for (std::int64_t n = 0; n < horizon; ++n) {
    const RowVector fwd = coordinate_distribution(mu, n);
    const RowVector rev = coordinate_distribution(mu, -n);
    site_fwd_exact += fwd;
    site_rev_exact += rev;
    pair_fwd_exact += fwd.dot((mu.p(n).array() * f.table.array())
                                  .matrix()
                                  .rowwise()
                                  .sum());
    pair_rev_exact += rev.dot((mu.p(-n).array() * f.table.array())
                                  .matrix()
                                  .rowwise()
                                  .sum());
  }
  site_fwd_exact *= n_inv;
  site_rev_exact *= n_inv;
  pair_fwd_exact *= n_inv;
  pair_rev_exact *= n_inv;

  const double declared_fwd =
      lim.lambda.dot((lim.right.array() * f.table.array())
                         .matrix()
                         .rowwise()
                         .sum());
  const double declared_rev =
      lim.pi.dot(
          (lim.left.array() * f.table.array()).matrix().rowwise().sum());
  const double pred_fwd = f.forward_prediction.value_or(declared_fwd);
  const double pred_rev = f.reversed_prediction.value_or(declared_rev);

  // One time average per trajectory and statistic.
  std::vector<std::vector<double>> site_fwd(static_cast<std::size_t>(d)),
      site_rev(static_cast<std::size_t>(d));
  std::vector<double> pair_fwd, pair_rev;
  for (std::int64_t t = 0; t < samples; ++t) {
    const Word w = sample_window(mu, -horizon, horizon, seed,
                                 static_cast<std::uint64_t>(t));
    std::vector<double> cf(static_cast<std::size_t>(d), 0.0);
    std::vector<double> cr(static_cast<std::size_t>(d), 0.0);
    double pf = 0.0;
    double pr = 0.0;
    for (std::int64_t n = 0; n < horizon; ++n) {
      cf[static_cast<std::size_t>(w.at(n))] += 1.0;
      cr[static_cast<std::size_t>(w.at(-n))] += 1.0;
      pf += f.table(w.at(n), w.at(n + 1));
      pr += f.table(w.at(-n), w.at(-n + 1));
    }
    for (int s = 0; s < d; ++s) {
      site_fwd[static_cast<std::size_t>(s)].push_back(
          cf[static_cast<std::size_t>(s)] * n_inv);
      site_rev[static_cast<std::size_t>(s)].push_back(
          cr[static_cast<std::size_t>(s)] * n_inv);
    }
    pair_fwd.push_back(pf * n_inv);
    pair_rev.push_back(pr * n_inv);
  }

  ProbeReport report;
  report.probe = "lln";
  report.horizon = horizon;
  report.samples = samples;
  report.seed = seed;
  const double root = std::sqrt(static_cast<double>(samples));
  for (int s = 0; s < d; ++s) {
    const SampleSummary sf = summarize(site_fwd[static_cast<std::size_t>(s)]);
    report.statistics.push_back(two_sided_row(
        "site_forward_" + std::to_string(s), sf.mean, lim.lambda(s),
        sf.sd / root, std::abs(site_fwd_exact(s) - lim.lambda(s))));
    const SampleSummary sr = summarize(site_rev[static_cast<std::size_t>(s)]);
    report.statistics.push_back(two_sided_row(
        "site_reversed_" + std::to_string(s), sr.mean, lim.pi(s),
        sr.sd / root, std::abs(site_rev_exact(s) - lim.pi(s))));
  }
  const SampleSummary pf = summarize(pair_fwd);
  report.statistics.push_back(
      two_sided_row("pair_forward", pf.mean, pred_fwd, pf.sd / root,
                    std::abs(pair_fwd_exact - declared_fwd)));
  const SampleSummary pr = summarize(pair_rev);
  report.statistics.push_back(
      two_sided_row("pair_reversed", pr.mean, pred_rev, pr.sd / root,
                    std::abs(pair_rev_exact - declared_rev)));

  report.pass = std::all_of(report.statistics.begin(), report.statistics.end(),
                            [](const ProbeStatistic& r) { return r.within; });
  report.verdict = report.pass ? "consistent" : "inconsistent";
  return report;
}

// ---------------------------------------------------------------------------
// Conservativeness probe
// ---------------------------------------------------------------------------

IndicatorSpec obstruction_indicator(const MarkovMeasure& mu) {
  const DeclaredLimits lim = declared_limits(mu);
  const int d = mu.states();
  for (int s = 0; s < d; ++s) {
    if (std::abs(lim.pi(s) - lim.lambda(s)) > kMatrixEqTol) {
      return SiteIndicator{s};
    }
  }
  for (int s = 0; s < d; ++s) {
    for (int t = 0; t < d; ++t) {
      if (std::abs(lim.left(s, t) - lim.right(s, t)) > kMatrixEqTol) {
        return PairIndicator{s, t};
      }
    }
  }
  throw Error(Err::TailsEqual,
              "the declared one-sided limits agree; there is no obstruction "
              "to probe");
}

ProbeReport conservativeness_probe(const MarkovMeasure& mu,
                                   const IndicatorSpec& f,
                                   std::int64_t horizon, std::int64_t samples,
                                   std::uint64_t seed) {
  if (horizon < 1) {
    throw Error(Err::InvalidInput, "horizon must be >= 1");
  }
  require_samples(samples);
  const DeclaredLimits lim = declared_limits(mu);
  const int d = mu.states();
  if ((lim.left - lim.right).cwiseAbs().maxCoeff() <= kMatrixEqTol) {
    throw Error(Err::TailsEqual,
                "the declared one-sided limits agree; the probe is not "
                "applicable");
  }

  struct IndicatorView {
    int s0 = 0;
    int t0 = -1;  // -1: site indicator
  };
  IndicatorView view;
  if (const auto* site = std::get_if<SiteIndicator>(&f)) {
    view.s0 = site->state;
  } else {
    const auto& pair = std::get<PairIndicator>(f);
    if (pair.to < 0) {
      throw Error(Err::InvalidInput, "indicator state out of range");
    }
    view.s0 = pair.from;
    view.t0 = pair.to;
  }
  if (view.s0 < 0 || view.s0 >= d || view.t0 >= d) {
    throw Error(Err::InvalidInput, "indicator state out of range");
  }

  // pi-side (backward) and lambda-side (forward) predictions.
  const bool site = view.t0 < 0;
  const double a_pred =
      site ? lim.pi(view.s0) : lim.pi(view.s0) * lim.left(view.s0, view.t0);
  const double b_pred = site ? lim.lambda(view.s0)
                             : lim.lambda(view.s0) * lim.right(view.s0, view.t0);

  const double n_inv = 1.0 / static_cast<double>(horizon);
  double exact_fwd = 0.0;
  double exact_bwd = 0.0;
  for (std::int64_t n = 0; n < horizon; ++n) {
    const RowVector fwd = coordinate_distribution(mu, n);
    const RowVector bwd = coordinate_distribution(mu, -n);
    if (site) {
      exact_fwd += fwd(view.s0);
      exact_bwd += bwd(view.s0);
    } else {
      exact_fwd += fwd(view.s0) * mu.p(n)(view.s0, view.t0);
      exact_bwd += bwd(view.s0) * mu.p(-n)(view.s0, view.t0);
    }
  }
  exact_fwd *= n_inv;
  exact_bwd *= n_inv;

  std::vector<double> fwd_values, bwd_values;
  for (std::int64_t t = 0; t < samples; ++t) {
    const Word w = sample_window(mu, -horizon, horizon, seed,
                                 static_cast<std::uint64_t>(t));
    double cf = 0.0;
    double cb = 0.0;
    for (std::int64_t n = 0; n < horizon; ++n) {
      if (site) {
        cf += w.at(n) == view.s0 ? 1.0 : 0.0;
        cb += w.at(-n) == view.s0 ? 1.0 : 0.0;
      } else {
        cf += (w.at(n) == view.s0 && w.at(n + 1) == view.t0) ? 1.0 : 0.0;
        cb += (w.at(-n) == view.s0 && w.at(-n + 1) == view.t0) ? 1.0 : 0.0;
      }
    }
    fwd_values.push_back(cf * n_inv);
    bwd_values.push_back(cb * n_inv);
  }

  const double root = std::sqrt(static_cast<double>(samples));
  const SampleSummary sf = summarize(fwd_values);
  const SampleSummary sb = summarize(bwd_values);
  ProbeStatistic fwd_row =
      two_sided_row("forward_average", sf.mean, b_pred, sf.sd / root,
                    std::abs(exact_fwd - b_pred));
  ProbeStatistic bwd_row =
      two_sided_row("backward_average", sb.mean, a_pred, sb.sd / root,
                    std::abs(exact_bwd - a_pred));
  ProbeStatistic sep_row = two_sided_row(
      "separation", sf.mean - sb.mean, b_pred - a_pred,
      std::hypot(fwd_row.standard_error, bwd_row.standard_error),
      fwd_row.allowance + bwd_row.allowance);

  // The obstruction witness: 4-sigma intervals disjoint, in the direction
  // the predictions point.
  const double up = sf.mean - kSigmaThreshold * fwd_row.standard_error -
                    (sb.mean + kSigmaThreshold * bwd_row.standard_error);
  const double down = sb.mean - kSigmaThreshold * bwd_row.standard_error -
                      (sf.mean + kSigmaThreshold * fwd_row.standard_error);
  const bool separated_up = up > 0.0;
  const bool separated_down = down > 0.0;
  const double predicted_gap = b_pred - a_pred;
  const double resolution = kSigmaThreshold * (fwd_row.standard_error +
                                               bwd_row.standard_error) +
                            fwd_row.allowance + bwd_row.allowance;
  const bool resolvable = std::abs(predicted_gap) > resolution;
  const bool matches_direction = (predicted_gap > 0.0 && separated_up) ||
                                 (predicted_gap < 0.0 && separated_down);

  ProbeReport report;
  report.probe = "conservativeness";
  report.horizon = horizon;
  report.samples = samples;
  report.seed = seed;
  report.statistics = {std::move(fwd_row), std::move(bwd_row),
                       std::move(sep_row)};
  const bool rows_within =
      std::all_of(report.statistics.begin(), report.statistics.end(),
                  [](const ProbeStatistic& r) { return r.within; });
  report.verdict = (separated_up || separated_down) ? "obstruction-present"
                                                    : "no-separation";
  report.pass = rows_within && (resolvable ? matches_direction
                                           : !(separated_up || separated_down));
  return report;
}

// ---------------------------------------------------------------------------
// Central-limit probe
// ---------------------------------------------------------------------------

double yk_covariance(const AdmissibleConfiguration& cfg,
                     const MarkovMeasure& mu, std::int64_t k, std::int64_t l) {
  if (k < 1 || l < k || l > cfg.rounds()) {
    throw Error(Err::InvalidInput, "covariance rounds must satisfy 1 <= k <= l <= rounds");
  }
  const YkMoments mk_ = yk_moments(cfg, mu, k);
  if (k == l) return mk_.variance;
  const YkMoments ml = yk_moments(cfg, mu, l);

  const auto& pk = cfg.pairs[static_cast<std::size_t>(k - 1)];
  const auto& pl = cfg.pairs[static_cast<std::size_t>(l - 1)];
  const std::int64_t ik = cfg.i_indices[static_cast<std::size_t>(k - 1)];
  const std::int64_t jk = cfg.j_indices[static_cast<std::size_t>(k - 1)];
  const std::int64_t il = cfg.i_indices[static_cast<std::size_t>(l - 1)];
  const std::int64_t jl = cfg.j_indices[static_cast<std::size_t>(l - 1)];

  // Joint placement probability for one sign combination: +1 puts the
  // pair's first block at i and its second at j; -1 swaps them.
  const auto joint = [&](int ck, int cl) {
    const std::array<Cylinder, 4> parts{
        Cylinder{il, cl > 0 ? pl.first : pl.second},
        Cylinder{ik, ck > 0 ? pk.first : pk.second},
        Cylinder{jk, ck > 0 ? pk.second : pk.first},
        Cylinder{jl, cl > 0 ? pl.second : pl.first}};
    return multi_cylinder_measure(mu, parts);
  };
  const double cross = joint(+1, +1) + joint(-1, -1) - joint(+1, -1) -
                       joint(-1, +1);
  return cross - mk_.mean * ml.mean;
}

SwapSumMoments swap_sum_moments(const AdmissibleConfiguration& cfg,
                                const MarkovMeasure& mu, std::int64_t rounds) {
  const std::int64_t used = clamp_rounds(cfg, rounds);
  SwapSumMoments out;
  if (used == 0) return out;
  const DkSequence dk = dk_sequence(cfg, mu, used);
  const std::size_t n = static_cast<std::size_t>(used);

  std::vector<double> d_values(n), means(n), variances(n);
  for (std::size_t r = 0; r < n; ++r) {
    d_values[r] = dk.terms[r].value;
    const YkMoments m =
        yk_moments(cfg, mu, static_cast<std::int64_t>(r) + 1);
    means[r] = m.mean;
    variances[r] = m.variance;
  }
  out.variance_partials.resize(n);
  double diag = 0.0;
  for (std::size_t r = 0; r < n; ++r) {
    out.mean += d_values[r] * means[r];
    diag += d_values[r] * d_values[r] * variances[r];
    out.variance_partials[r] = diag;
  }
  out.variance = diag;

  // Pairwise covariances through a nested-hull recursion. Round windows are
  // nested (i_l < i_k < j_k < j_l for k < l), so the transfer across round
  // l's span with a sign constraint at round k alone is built outward from
  // round k, reusing the unconstrained gap products between consecutive
  // rounds.
  struct RoundGeometry {
    std::int64_t i = 0;
    std::int64_t j = 0;
    std::int64_t len = 0;
    Matrix z_in_plus, z_in_minus;    // pinned block transfers at i
    Matrix z_out_plus, z_out_minus;  // pinned block transfers at j
    Matrix v_in, v_out;              // unconstrained products over the windows
    Matrix l_pre, r_post;            // gaps toward the next-inner round
    Matrix plain_mid;                // unconstrained product i+len-1 -> j
  };
  std::vector<RoundGeometry> geo(n);
  Matrix free_hull;  // unconstrained product over the previous round's span
  for (std::size_t r = 0; r < n; ++r) {
    RoundGeometry& g = geo[r];
    const auto& pair = cfg.pairs[r];
    g.i = cfg.i_indices[r];
    g.j = cfg.j_indices[r];
    g.len = pair.length;
    g.z_in_plus = block_transfer(mu, g.i, pair.first);
    g.z_in_minus = block_transfer(mu, g.i, pair.second);
    g.z_out_plus = block_transfer(mu, g.j, pair.second);
    g.z_out_minus = block_transfer(mu, g.j, pair.first);
    g.v_in = range_product(mu, g.i, g.i + g.len - 1);
    g.v_out = range_product(mu, g.j, g.j + g.len - 1);
    if (r == 0) {
      g.plain_mid = range_product(mu, g.i + g.len - 1, g.j);
    } else {
      const RoundGeometry& inner = geo[r - 1];
      g.l_pre = range_product(mu, g.i + g.len - 1, inner.i);
      g.r_post = range_product(mu, inner.j + inner.len - 1, g.j);
      g.plain_mid = g.l_pre * free_hull * g.r_post;
    }
    free_hull = g.v_in * g.plain_mid * g.v_out;
  }

  for (std::size_t k = 0; k < n; ++k) {
    // Transfer over [i_m, j_m + len_m - 1) with round k pinned, free
    // elsewhere; grown outward one round at a time.
    Matrix hull_plus = geo[k].z_in_plus * geo[k].plain_mid * geo[k].z_out_plus;
    Matrix hull_minus =
        geo[k].z_in_minus * geo[k].plain_mid * geo[k].z_out_minus;
    for (std::size_t l = k + 1; l < n; ++l) {
      const RoundGeometry& g = geo[l];
      const auto cell = [&](const Matrix& z_in, const Matrix& hull,
                            const Matrix& z_out) {
        const RowVector start = coordinate_distribution(mu, g.i);
        return (start * z_in * g.l_pre * hull * g.r_post * z_out).sum();
      };
      const double cross =
          cell(g.z_in_plus, hull_plus, g.z_out_plus) +
          cell(g.z_in_minus, hull_minus, g.z_out_minus) -
          cell(g.z_in_plus, hull_minus, g.z_out_plus) -
          cell(g.z_in_minus, hull_plus, g.z_out_minus);
      const double cov = cross - means[k] * means[l];
      out.variance += 2.0 * d_values[k] * d_values[l] * cov;
      // Fold round l's windows (unconstrained) into the hull so the next
      // iteration sees the transfer over [i_l, j_l + len_l - 1).
      hull_plus = g.v_in * g.l_pre * hull_plus * g.r_post * g.v_out;
      hull_minus = g.v_in * g.l_pre * hull_minus * g.r_post * g.v_out;
    }
  }
  return out;
}

ProbeReport clt_probe(const AdmissibleConfiguration& cfg,
                      const MarkovMeasure& mu, std::int64_t rounds,
                      std::int64_t samples, std::uint64_t seed) {
  require_samples(samples);
  const std::int64_t used = clamp_rounds(cfg, rounds);
  if (used == 0) {
    throw Error(Err::DegenerateVariance,
                "the configuration has no rounds to sum");
  }
  const SwapSumMoments moments = swap_sum_moments(cfg, mu, used);
  if (!(moments.variance > 1e-12)) {
    throw Error(Err::DegenerateVariance,
                "the swap sum has vanishing variance (all D_k are zero)");
  }
  const DkSequence dk = dk_sequence(cfg, mu, used);

  const std::size_t n_rounds = static_cast<std::size_t>(used);
  const std::int64_t lo = cfg.i_indices[n_rounds - 1];
  const std::int64_t hi = cfg.j_indices[n_rounds - 1] +
                          cfg.pairs[n_rounds - 1].length - 1;
  std::vector<Word> words;
  words.reserve(static_cast<std::size_t>(samples));
  for (std::int64_t t = 0; t < samples; ++t) {
    words.push_back(
        sample_window(mu, lo, hi, seed, static_cast<std::uint64_t>(t)));
  }
  const std::vector<std::vector<int>> ys = yk_samples(cfg, mu, used, words);

  std::vector<double> sums;
  sums.reserve(ys.size());
  for (const auto& row : ys) {
    double s = 0.0;
    for (std::size_t r = 0; r < n_rounds; ++r) {
      s += dk.terms[r].value * row[r];
    }
    sums.push_back(s);
  }
  const SampleSummary ss = summarize(sums);
  const double emp_variance = ss.sd * ss.sd;

  // Spread of the squared centered values: the standard error of the
  // variance estimate without a normality assumption.
  std::vector<double> squared;
  squared.reserve(sums.size());
  for (const double s : sums) {
    squared.push_back((s - moments.mean) * (s - moments.mean));
  }
  const SampleSummary sq = summarize(squared);

  const double sigma = std::sqrt(moments.variance);
  std::vector<double> z;
  z.reserve(sums.size());
  for (const double s : sums) z.push_back((s - moments.mean) / sigma);
  std::sort(z.begin(), z.end());
  double ks = 0.0;
  const double n = static_cast<double>(z.size());
  for (std::size_t idx = 0; idx < z.size(); ++idx) {
    const double cdf = standard_normal_cdf(z[idx]);
    ks = std::max(ks, cdf - static_cast<double>(idx) / n);
    ks = std::max(ks, static_cast<double>(idx + 1) / n - cdf);
  }

  const double root = std::sqrt(static_cast<double>(samples));
  ProbeReport report;
  report.probe = "clt";
  report.horizon = used;
  report.samples = samples;
  report.seed = seed;
  report.distance_threshold = kDistributionalThreshold;
  report.statistics.push_back(two_sided_row("sum_mean", ss.mean, moments.mean,
                                            ss.sd / root, 0.0));
  report.statistics.push_back(two_sided_row(
      "sum_variance", emp_variance, moments.variance, sq.sd / root, 0.0));
  ProbeStatistic ks_row;
  ks_row.name = "ks_distance";
  ks_row.empirical = ks;
  ks_row.predicted = 0.0;
  ks_row.standard_error = floored(0.5 / root);
  ks_row.allowance = kDistributionalThreshold;
  ks_row.within = ks <= kDistributionalThreshold;
  report.statistics.push_back(ks_row);

  for (std::size_t r = 0; r < n_rounds; ++r) {
    report.trace_grid.push_back(static_cast<double>(r + 1));
  }
  report.series_trace = moments.variance_partials;
  report.pass = std::all_of(report.statistics.begin(), report.statistics.end(),
                            [](const ProbeStatistic& row) { return row.within; });
  report.verdict =
      ks_row.within ? "normality-not-rejected" : "normality-rejected";
  return report;
}

// ---------------------------------------------------------------------------
// Divergence probe
// ---------------------------------------------------------------------------

ProbeReport divergence_probe(std::span<const double> weights,
                             const std::vector<std::vector<int>>& events,
                             std::int64_t samples,
                             std::optional<double> predicted_liminf) {
  if (samples < 2 || samples > static_cast<std::int64_t>(events.size())) {
    throw Error(Err::InvalidInput,
                "samples must lie in [2, number of event rows]");
  }
  const std::size_t n = weights.size();
  if (n == 0) {
    throw Error(Err::InvalidInput, "the weight sequence is empty");
  }
  double total = 0.0;
  for (const double w : weights) {
    if (!(w >= 0.0)) {
      throw Error(Err::InvalidInput, "weights must be nonnegative");
    }
    total += w;
  }
  if (total <= 0.0) {
    throw Error(Err::InvalidInput, "the weight sequence sums to zero");
  }
  const std::size_t rows = static_cast<std::size_t>(samples);
  for (std::size_t t = 0; t < rows; ++t) {
    if (events[t].size() != n) {
      throw Error(Err::InvalidInput,
                  "every event row must have one entry per weight");
    }
    for (const int e : events[t]) {
      if (e != 0 && e != 1) {
        throw Error(Err::InvalidInput, "event entries must be 0 or 1");
      }
    }
  }

  // Column means and the empirical liminf over the last quarter.
  std::vector<double> column_mean(n, 0.0);
  for (std::size_t t = 0; t < rows; ++t) {
    for (std::size_t j = 0; j < n; ++j) {
      column_mean[j] += static_cast<double>(events[t][j]);
    }
  }
  for (double& c : column_mean) c /= static_cast<double>(rows);
  const std::size_t tail_start = std::min(n - 1, (3 * n) / 4);
  double liminf_hat = 1.0;
  for (std::size_t j = tail_start; j < n; ++j) {
    liminf_hat = std::min(liminf_hat, column_mean[j]);
  }

  // Weighted totals and the tail-mass curve.
  std::vector<double> totals(rows, 0.0);
  for (std::size_t t = 0; t < rows; ++t) {
    for (std::size_t j = 0; j < n; ++j) {
      if (events[t][j] != 0) totals[t] += weights[j];
    }
  }
  constexpr int kGridPoints = 20;
  ProbeReport report;
  report.probe = "divergence";
  report.horizon = static_cast<std::int64_t>(n);
  report.samples = samples;
  report.seed = 0;
  for (int g = 1; g <= kGridPoints; ++g) {
    const double cutoff =
        total * static_cast<double>(g) / (2.0 * kGridPoints);
    double mass = 0.0;
    for (const double t : totals) {
      if (t > cutoff) mass += 1.0;
    }
    report.trace_grid.push_back(cutoff);
    report.series_trace.push_back(mass / static_cast<double>(rows));
  }
  const double reference = predicted_liminf.value_or(liminf_hat);

  // Mass beyond half the predicted divergent mass. When every P(A_n) stays
  // near the liminf, the weighted sum concentrates around reference * total,
  // so the mass beyond half of that must not drop below the liminf itself.
  const double anchored_cutoff = reference * total / 2.0;
  double tail_mass = 0.0;
  for (const double t : totals) {
    if (t > anchored_cutoff) tail_mass += 1.0;
  }
  tail_mass /= static_cast<double>(rows);

  const double se_liminf =
      std::sqrt(liminf_hat * (1.0 - liminf_hat) / static_cast<double>(rows));
  const double se_mass =
      std::sqrt(tail_mass * (1.0 - tail_mass) / static_cast<double>(rows));
  report.statistics.push_back(lower_bound_row(
      "liminf_probability", liminf_hat, reference, se_liminf));
  report.statistics.push_back(lower_bound_row(
      "mass_beyond_half_predicted", tail_mass, reference,
      std::hypot(se_mass, se_liminf)));
  report.pass = report.statistics[0].within && report.statistics[1].within;
  report.verdict = report.pass ? "divergence-mass-consistent"
                               : "divergence-mass-deficient";
  return report;
}

}  // namespace mk
