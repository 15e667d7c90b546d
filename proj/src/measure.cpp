#include "markov_krieger/measure.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <string>

namespace mk {

// ---------------------------------------------------------------- linalg --

bool is_stochastic(Eigen::Ref<const Matrix> p, double tol) {
  if (p.rows() == 0 || p.rows() != p.cols()) return false;
  if ((p.array() < -tol).any()) return false;
  for (Eigen::Index s = 0; s < p.rows(); ++s)
    if (std::abs(p.row(s).sum() - 1.0) > tol) return false;
  return true;
}

RowVector stationary_distribution(Eigen::Ref<const Matrix> p) {
  const Eigen::Index d = p.rows();
  invariant(d >= 2 && p.cols() == d, "stationary: square matrix expected");
  // Solve x^T (P - I) = 0 with sum(x) = 1: replace one equation by the
  // normalization and solve the bordered system.
  Matrix m = p.transpose() - Matrix::Identity(d, d);
  m.row(d - 1).setOnes();
  Eigen::VectorXd rhs = Eigen::VectorXd::Zero(d);
  rhs(d - 1) = 1.0;
  Eigen::VectorXd x = m.fullPivLu().solve(rhs);
  RowVector pi = x.transpose();
  const double residual = (pi * p - pi).cwiseAbs().maxCoeff();
  invariant(residual <= kStationaryTol,
            "stationary: residual " + std::to_string(residual));
  invariant((pi.array() >= -kStationaryTol).all(),
            "stationary: negative entry");
  return pi;
}

double max_abs_diff(Eigen::Ref<const Matrix> a, Eigen::Ref<const Matrix> b) {
  invariant(a.rows() == b.rows() && a.cols() == b.cols(),
            "max_abs_diff: shape mismatch");
  return (a - b).cwiseAbs().maxCoeff();
}

// ---------------------------------------------------- transition sequence --

Matrix TransitionSequence::at(std::int64_t n) const {
  if (n <= left_cutoff) return left_tail;
  if (n >= right_start) {
    if (right_constant) return *right_constant;
    return right_family->matrix_at(n);
  }
  // Contiguous sorted tiling: binary search for the segment holding n.
  auto it = std::upper_bound(
      segments.begin(), segments.end(), n,
      [](std::int64_t v, const Segment& s) { return v < s.begin; });
  invariant(it != segments.begin(), "transition sequence: gap before segments");
  --it;
  invariant(it->begin <= n && n < it->end, "transition sequence: gap at index");
  return it->matrix;
}

void validate_transition_matrix(const Adjacency& adj, const Matrix& p,
                                const std::string& where) {
  const int d = adj.size();
  if (p.rows() != d || p.cols() != d)
    throw Error(Err::InvalidInput, where + ": wrong shape");
  if (!is_stochastic(p))
    throw Error(Err::InvalidInput, where + ": rows must be stochastic (tol 1e-12)");
  for (int s = 0; s < d; ++s)
    for (int t = 0; t < d; ++t) {
      const bool pos = p(s, t) > 0.0;
      if (pos != adj.allowed(s, t))
        throw Error(Err::SupportMismatch,
                    where + ": entry (" + std::to_string(s) + "," +
                        std::to_string(t) + ") violates the support");
    }
}

double min_allowed_entry(const Adjacency& adj, const Matrix& p) {
  double lo = 1.0;
  for (int s = 0; s < adj.size(); ++s)
    for (int t = 0; t < adj.size(); ++t)
      if (adj.allowed(s, t)) lo = std::min(lo, p(s, t));
  return lo;
}

TransitionSequence make_transition_sequence(
    const Adjacency& adj, Matrix left_tail, std::int64_t left_cutoff,
    std::vector<Segment> segments, std::int64_t right_start,
    std::optional<Matrix> right_constant,
    std::shared_ptr<const TailFamily> right_family) {
  if ((right_constant.has_value()) == (right_family != nullptr))
    throw Error(Err::InvalidInput,
                "exactly one right-tail representation expected");
  validate_transition_matrix(adj, left_tail, "left tail");
  if (right_constant) validate_transition_matrix(adj, *right_constant, "right tail");
  std::sort(segments.begin(), segments.end(),
            [](const Segment& a, const Segment& b) { return a.begin < b.begin; });
  std::int64_t expect = left_cutoff + 1;
  for (std::size_t i = 0; i < segments.size(); ++i) {
    const Segment& s = segments[i];
    if (s.begin >= s.end)
      throw Error(Err::InvalidInput, "segment with empty range");
    if (s.begin != expect)
      throw Error(Err::InvalidInput,
                  "segments must tile (left_cutoff, right_start) without gaps",
                  s.begin);
    validate_transition_matrix(adj, s.matrix, "segment " + std::to_string(i));
    expect = s.end;
  }
  if (expect != right_start)
    throw Error(Err::InvalidInput,
                "segments must end exactly at the right tail start", expect);
  TransitionSequence seq;
  seq.left_tail = std::move(left_tail);
  seq.left_cutoff = left_cutoff;
  seq.segments = std::move(segments);
  seq.right_start = right_start;
  seq.right_constant = std::move(right_constant);
  seq.right_family = std::move(right_family);
  return seq;
}

double validate_doeblin(const Adjacency& adj, const TransitionSequence& seq) {
  double delta = min_allowed_entry(adj, seq.left_tail);
  for (const Segment& s : seq.segments)
    delta = std::min(delta, min_allowed_entry(adj, s.matrix));
  if (seq.right_constant)
    delta = std::min(delta, min_allowed_entry(adj, *seq.right_constant));
  else
    delta = std::min(delta, seq.right_family->entrywise_infimum());
  if (!(delta > 0.0))
    throw Error(Err::DoeblinViolation,
                "no uniform positive lower bound on allowed entries");
  return delta;
}

// ----------------------------------------------------------------- measure --

MarkovMeasure make_measure(const Adjacency& adj, TransitionSequence seq,
                           std::optional<RowVector> expected_anchor) {
  MarkovMeasure mu;
  mu.adjacency = adj;
  mu.mixing_exponent = primitivity_index(adj).exponent;
  mu.doeblin = validate_doeblin(adj, seq);
  mu.anchor = stationary_distribution(seq.left_tail);
  if (expected_anchor) {
    if (expected_anchor->size() != mu.anchor.size() ||
        (*expected_anchor - mu.anchor).cwiseAbs().maxCoeff() > 1e-9)
      throw Error(Err::InvalidInput,
                  "anchor must equal the stationary vector of the left tail");
  }
  mu.transitions = std::move(seq);
  return mu;
}

MarkovMeasure homogeneous_measure(const Adjacency& adj, const Matrix& q) {
  return make_measure(
      adj, make_transition_sequence(adj, q, 0, {}, 1, q, nullptr));
}

namespace {

// Right tail of a shifted measure: evaluates the base family at n + shift.
class ShiftedFamily final : public TailFamily {
 public:
  ShiftedFamily(std::shared_ptr<const TailFamily> base, std::int64_t shift)
      : base_(std::move(base)), shift_(shift) {}

  Matrix matrix_at(std::int64_t n) const override {
    return base_->matrix_at(n + shift_);
  }
  std::optional<Matrix> declared_limit() const override {
    return base_->declared_limit();
  }
  std::vector<Matrix> divergence_witnesses() const override {
    return base_->divergence_witnesses();
  }
  double entrywise_infimum() const override { return base_->entrywise_infimum(); }
  std::optional<std::int64_t> eventually_constant_from() const override {
    auto k = base_->eventually_constant_from();
    if (k) return *k - shift_;
    return std::nullopt;
  }
  std::string describe() const override {
    return base_->describe() + " shifted by " + std::to_string(shift_);
  }
  bool same_as(const TailFamily& other) const override {
    auto* o = dynamic_cast<const ShiftedFamily*>(&other);
    return o != nullptr && o->shift_ == shift_ && base_->same_as(*o->base_);
  }
  SeriesClass deviation_from_limit_series() const override {
    return base_->deviation_from_limit_series();
  }
  SeriesClass increment_series() const override {
    return base_->increment_series();
  }

  const TailFamily& base() const { return *base_; }
  std::shared_ptr<const TailFamily> base_ptr() const { return base_; }
  std::int64_t shift() const { return shift_; }

 private:
  std::shared_ptr<const TailFamily> base_;
  std::int64_t shift_;
};

}  // namespace

MarkovMeasure shifted_measure(const MarkovMeasure& mu, std::int64_t shift) {
  if (shift == 0) return mu;
  const TransitionSequence& s = mu.transitions;
  std::vector<Segment> segs = s.segments;
  for (Segment& seg : segs) {
    seg.begin -= shift;
    seg.end -= shift;
  }
  std::shared_ptr<const TailFamily> fam;
  if (s.right_family) {
    if (auto* sh = dynamic_cast<const ShiftedFamily*>(s.right_family.get())) {
      const std::int64_t total = sh->shift() + shift;
      fam = total == 0 ? sh->base_ptr()
                       : std::make_shared<ShiftedFamily>(sh->base_ptr(), total);
    } else {
      fam = std::make_shared<ShiftedFamily>(s.right_family, shift);
    }
  }
  TransitionSequence out = make_transition_sequence(
      mu.adjacency, s.left_tail, s.left_cutoff - shift, std::move(segs),
      s.right_start - shift, s.right_constant, std::move(fam));
  return make_measure(mu.adjacency, std::move(out));
}

RowVector coordinate_distribution(const MarkovMeasure& mu, std::int64_t n) {
  const std::int64_t cutoff = mu.transitions.left_cutoff;
  if (n <= cutoff) return mu.anchor;  // exactly stationary on the left
  std::lock_guard<std::mutex> lock(mu.pi_mutex);
  auto it = mu.pi_cache.upper_bound(n);
  std::int64_t from = cutoff;
  RowVector pi = mu.anchor;
  if (it != mu.pi_cache.begin()) {
    --it;
    from = it->first;
    pi = it->second;
  }
  for (std::int64_t k = from; k < n; ++k) {
    pi = pi * mu.transitions.at(k);
    mu.pi_cache.emplace(k + 1, pi);
  }
  return pi;
}

Matrix transition_product(const MarkovMeasure& mu, std::int64_t n,
                          std::int64_t k) {
  if (k < 0) throw Error(Err::InvalidInput, "transition_product needs k >= 0");
  Matrix prod = mu.transitions.at(n);
  for (std::int64_t i = 1; i <= k; ++i) prod = prod * mu.transitions.at(n + i);
  for (Eigen::Index s = 0; s < prod.rows(); ++s)
    invariant(std::abs(prod.row(s).sum() - 1.0) <= kProductTol,
              "transition product drifted from stochastic");
  return prod;
}

ReverseTransition reverse_transition(const MarkovMeasure& mu, std::int64_t n) {
  const RowVector prev = coordinate_distribution(mu, n - 1);
  const RowVector cur = coordinate_distribution(mu, n);
  const Matrix p = mu.transitions.at(n - 1);
  const int d = mu.states();
  Matrix phat(d, d);
  for (int s = 0; s < d; ++s)
    for (int t = 0; t < d; ++t) phat(s, t) = prev(t) * p(t, s) / cur(s);
  for (int s = 0; s < d; ++s)
    invariant(std::abs(phat.row(s).sum() - 1.0) <= kProductTol,
              "reverse transition rows must be stochastic");
  return ReverseTransition{n, std::move(phat)};
}

double cylinder_measure(const MarkovMeasure& mu, const Cylinder& c) {
  validate_block(mu.adjacency, c.block.symbols);
  const RowVector pi = coordinate_distribution(mu, c.base);
  double value = pi(c.block.symbols.front());
  for (int l = 0; l + 1 < c.block.length(); ++l) {
    const Matrix p = mu.transitions.at(c.base + l);
    value *= p(c.block.symbols[static_cast<std::size_t>(l)],
               c.block.symbols[static_cast<std::size_t>(l) + 1]);
  }
  return value;
}

double multi_cylinder_measure(const MarkovMeasure& mu,
                              std::span<const Cylinder> parts) {
  if (parts.empty()) throw Error(Err::InvalidInput, "no cylinders given");
  std::vector<Cylinder> sorted(parts.begin(), parts.end());
  std::sort(sorted.begin(), sorted.end(),
            [](const Cylinder& a, const Cylinder& b) { return a.base < b.base; });
  for (std::size_t i = 0; i + 1 < sorted.size(); ++i)
    if (sorted[i + 1].base - sorted[i].end() - 1 < 1)
      throw Error(Err::OverlappingRanges,
                  "cylinder ranges must be separated by gaps >= 1",
                  sorted[i + 1].base);
  for (const Cylinder& c : sorted) validate_block(mu.adjacency, c.block.symbols);

  const Cylinder& head = sorted.front();
  double value = coordinate_distribution(mu, head.base)(head.block.first());
  auto path_factor = [&mu](const Cylinder& c) {
    double f = 1.0;
    for (int l = 0; l + 1 < c.block.length(); ++l)
      f *= mu.transitions.at(c.base + l)(
          c.block.symbols[static_cast<std::size_t>(l)],
          c.block.symbols[static_cast<std::size_t>(l) + 1]);
    return f;
  };
  value *= path_factor(head);
  for (std::size_t i = 1; i < sorted.size(); ++i) {
    const Cylinder& prev = sorted[i - 1];
    const Cylinder& cur = sorted[i];
    // Bridge across the gap: P^(prev.end(), cur.base-1) maps coordinate
    // prev.end() to coordinate cur.base.
    const Matrix bridge =
        transition_product(mu, prev.end(), cur.base - 1 - prev.end());
    value *= bridge(prev.block.last(), cur.block.first());
    value *= path_factor(cur);
  }
  return value;
}

MixingConstant mixing_constant(double delta, int exponent) {
  if (!(delta > 0.0) || delta >= 1.0)
    throw Error(Err::InvalidInput, "delta must lie in (0,1)");
  if (exponent < 1) throw Error(Err::InvalidInput, "exponent must be >= 1");
  const double dm = std::pow(delta, exponent);
  const double value = dm / (1.0 - dm);
  return MixingConstant{delta, exponent, value, dm < 0.5};
}

namespace {

// All admissible words on [lo, hi] (inclusive), via depth-first search.
void admissible_words(const Adjacency& adj, int len, std::vector<int>& word,
                      const std::function<void(const std::vector<int>&)>& emit) {
  if (static_cast<int>(word.size()) == len) {
    emit(word);
    return;
  }
  for (int s = 0; s < adj.size(); ++s) {
    if (!word.empty() && !adj.allowed(word.back(), s)) continue;
    word.push_back(s);
    admissible_words(adj, len, word, emit);
    word.pop_back();
  }
}

}  // namespace

MixingReport check_mixing_inequalities(const MarkovMeasure& mu, std::int64_t n1,
                                       std::int64_t n2) {
  const std::int64_t width = n2 - n1 + 1;
  if (width < 2 || width > 20)
    throw Error(Err::InvalidInput,
                "window must span 2..20 coordinates for exhaustive checks");
  const int m_exp = mu.mixing_exponent;
  const double dm = std::pow(mu.doeblin, m_exp);
  const double c = dm / (1.0 - dm);

  MixingReport rep{1e300, 0.0, 1e300, 0.0, 0};

  for (std::int64_t n = n1; n <= n2; ++n) {
    const RowVector pi = coordinate_distribution(mu, n);
    for (int s = 0; s < mu.states(); ++s) {
      rep.worst_pi_low = std::min(rep.worst_pi_low, pi(s) / dm);
      rep.worst_pi_high = std::max(rep.worst_pi_high, pi(s) / (1.0 - dm));
      if (pi(s) < dm || pi(s) > 1.0 - dm)
        throw Error(Err::InequalityViolated,
                    "coordinate distribution escaped the mixing band", n);
    }
  }

  for (std::int64_t n = n1; n <= n2; ++n) {
    for (std::int64_t m = n + m_exp; m <= n2; ++m) {
      const int len_e = static_cast<int>(n - n1 + 1);
      const int len_f = static_cast<int>(n2 - m + 1);
      std::vector<std::vector<int>> es, fs;
      std::vector<int> scratch;
      admissible_words(mu.adjacency, len_e, scratch,
                       [&es](const std::vector<int>& w) { es.push_back(w); });
      admissible_words(mu.adjacency, len_f, scratch,
                       [&fs](const std::vector<int>& w) { fs.push_back(w); });
      for (const auto& we : es) {
        const Cylinder ce{n1, Block{we}};
        const double mu_e = cylinder_measure(mu, ce);
        for (const auto& wf : fs) {
          const Cylinder cf{m, Block{wf}};
          const double mu_f = cylinder_measure(mu, cf);
          double mu_ef;
          if (m - n - 1 >= 1) {
            const Cylinder both[2] = {ce, cf};
            mu_ef = multi_cylinder_measure(mu, both);
          } else {
            // Adjacent ranges: only reachable when M = 1, i.e. the adjacency
            // is all-ones, so the junction is always admissible.
            invariant(mu.adjacency.allowed(we.back(), wf.front()),
                      "adjacent split with forbidden junction despite M = 1");
            std::vector<int> joined = we;
            joined.insert(joined.end(), wf.begin(), wf.end());
            mu_ef = cylinder_measure(mu, Cylinder{n1, Block{joined}});
          }
          invariant(mu_ef > 0.0,
                    "cylinder intersection must be positive with gap >= M");
          const double lower = mu_ef / (c * mu_e * mu_f);
          const double upper = mu_ef * c / (mu_e * mu_f);
          rep.worst_lower_ratio = std::min(rep.worst_lower_ratio, lower);
          rep.worst_upper_ratio = std::max(rep.worst_upper_ratio, upper);
          ++rep.events_checked;
          if (lower < 1.0 || upper > 1.0)
            throw Error(Err::InequalityViolated,
                        "correlation sandwich violated", n);
        }
      }
    }
  }
  return rep;
}

int branching_transition_count(const Adjacency& adj, const Block& b) {
  int f = 0;
  for (int l = 0; l + 1 < b.length(); ++l) {
    const int row = b.symbols[static_cast<std::size_t>(l)];
    if (adj.a.row(row).sum() >= 2) ++f;
  }
  return f;
}

}  // namespace mk
