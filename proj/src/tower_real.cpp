#include "markov_krieger/tower_real.hpp"

#include <cmath>
#include <sstream>

#include "markov_krieger/errors.hpp"

namespace mk {

namespace {
constexpr double kTop = 1e300;                 // level boundary
const double kLogTop = std::log(kTop);         // ~690.7755
constexpr double kAbsorbGap = 40.0;            // exp(-40) < 1 ulp of 1.0
}  // namespace

TowerReal::TowerReal(double plain) : level_(0), value_(plain) {
  invariant(plain >= 0.0 && std::isfinite(plain),
            "TowerReal: plain value must be finite and nonnegative");
  normalize();
}

TowerReal::TowerReal(int level, double value) : level_(level), value_(value) {
  invariant(level >= 0 && std::isfinite(value), "TowerReal: bad components");
  invariant(level == 0 || value > 0.0, "TowerReal: level >= 1 needs value > 0");
  normalize();
}

void TowerReal::normalize() {
  while (value_ >= kTop) {
    value_ = std::log(value_);
    ++level_;
  }
  while (level_ >= 1 && value_ < kLogTop) {
    value_ = std::exp(value_);
    --level_;
  }
}

TowerReal TowerReal::from_int(std::int64_t n) {
  invariant(n >= 0, "TowerReal: negative integer");
  return TowerReal(static_cast<double>(n));
}

std::optional<double> TowerReal::as_double() const {
  if (level_ == 0) return value_;
  return std::nullopt;
}

std::optional<std::int64_t> TowerReal::as_int() const {
  if (level_ != 0) return std::nullopt;
  if (value_ > 9007199254740992.0) return std::nullopt;  // 2^53
  if (value_ != std::floor(value_)) return std::nullopt;
  return static_cast<std::int64_t>(value_);
}

std::string TowerReal::str() const {
  std::ostringstream os;
  os.precision(17);
  if (level_ == 0) {
    os << value_;
  } else {
    for (int i = 0; i < level_; ++i) os << "exp(";
    os << value_;
    for (int i = 0; i < level_; ++i) os << ")";
  }
  return os.str();
}

bool operator<(const TowerReal& a, const TowerReal& b) {
  if (a.level() != b.level()) return a.level() < b.level();
  return a.value() < b.value();
}

bool operator<=(const TowerReal& a, const TowerReal& b) { return !(b < a); }

bool operator==(const TowerReal& a, const TowerReal& b) {
  return a.level() == b.level() && a.value() == b.value();
}

TowerReal tower_exp(const TowerReal& x) {
  if (x.level() == 0 && x.value() < kLogTop) return TowerReal(std::exp(x.value()));
  return TowerReal(x.level() + 1, x.value());
}

TowerReal tower_log(const TowerReal& x) {
  invariant(!x.is_zero(), "tower_log of zero");
  if (x.level() == 0) {
    invariant(x.value() >= 1.0, "tower_log requires x >= 1");
    return TowerReal(std::log(x.value()));
  }
  return TowerReal(x.level() - 1, x.value());
}

TowerReal tower_add(const TowerReal& a, const TowerReal& b) {
  if (a.is_zero()) return b;
  if (b.is_zero()) return a;
  if (a.level() == 0 && b.level() == 0)
    return TowerReal(a.value() + b.value());  // may promote via normalize
  const TowerReal& hi = b < a ? a : b;
  const TowerReal& lo = b < a ? b : a;
  if (hi.level() != lo.level()) return hi;  // ratio beyond any double
  if (hi.level() == 1) {
    // x = e^va, y = e^vb with va >= vb: x + y = e^(va + log1p(e^(vb-va))).
    const double gap = hi.value() - lo.value();
    if (gap > kAbsorbGap) return hi;
    return TowerReal(1, hi.value() + std::log1p(std::exp(-gap)));
  }
  // Level >= 2: even a factor of 2 is below resolution.
  return hi;
}

TowerReal tower_mul(const TowerReal& a, const TowerReal& b) {
  if (a.is_zero() || b.is_zero()) return TowerReal();
  if (a.level() == 0 && b.level() == 0) {
    const double prod = a.value() * b.value();
    if (prod < kTop) return TowerReal(prod);
  }
  // A factor below 1 can only be a plain double here; route it through
  // scale so the slow path below works with logs of values >= 1.
  if (a.level() == 0 && a.value() < 1.0) return tower_scale(b, a.value());
  if (b.level() == 0 && b.value() < 1.0) return tower_scale(a, b.value());
  return tower_exp(tower_add(tower_log(a), tower_log(b)));
}

TowerReal tower_scale(const TowerReal& a, double c) {
  invariant(c > 0.0 && std::isfinite(c), "tower_scale: positive scalar required");
  if (a.is_zero()) return a;
  if (a.level() == 0) {
    const double prod = a.value() * c;
    if (prod < kTop) return TowerReal(prod);
    return TowerReal(1, std::log(a.value()) + std::log(c));
  }
  if (a.level() == 1) {
    const double shifted = a.value() + std::log(c);
    if (shifted >= kLogTop) return TowerReal(1, shifted);
    return TowerReal(std::exp(shifted));
  }
  return a;  // below resolution at level >= 2
}

TowerReal tower_pow(const TowerReal& base, const TowerReal& exponent) {
  invariant(TowerReal(1.0) <= base, "tower_pow requires base >= 1");
  if (exponent.is_zero()) return TowerReal(1.0);
  return tower_exp(tower_mul(exponent, tower_log(base)));
}

TowerReal tower_ceil(const TowerReal& x) {
  if (x.level() == 0 && x.value() <= 9007199254740992.0)
    return TowerReal(std::ceil(x.value()));
  return x;
}

double tower_log_ratio(const TowerReal& a, const TowerReal& b) {
  if (a.is_zero()) return -kTop;
  if (b.is_zero()) return kTop;
  // Logs of level-0 and level-1 magnitudes are plain doubles; their
  // difference is the exact answer whenever both sides resolve.
  auto log_as_double = [](const TowerReal& x) -> std::optional<double> {
    if (x.level() == 0) return std::log(x.value());
    if (x.level() == 1) return x.value();
    return std::nullopt;
  };
  const auto la = log_as_double(a);
  const auto lb = log_as_double(b);
  if (la && lb) return *la - *lb;
  if (a.level() != b.level()) return a.level() > b.level() ? kTop : -kTop;
  // Both at level >= 2: logs exceed double range; only the sign resolves.
  return a.value() > b.value() ? kTop : (a.value() < b.value() ? -kTop : 0.0);
}

}  // namespace mk
