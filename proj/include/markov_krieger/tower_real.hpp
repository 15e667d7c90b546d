// Level-indexed iterated-exponential magnitudes. The inductive example
// constructor produces integers like M ~ exp(exp(...exp(c)...)) whose height
// grows with the round index; no fixed-precision or bignum type can hold
// them, but every audit inequality only needs logarithms with small relative
// error. A TowerReal stores x = exp^level(value) with a canonical range for
// value, so magnitudes of any height compare and combine stably.
//
// Canonical form: level 0 holds a plain nonnegative double < 1e300;
// level >= 1 holds value in [log(1e300), 1e300). Levels partition the reals:
// level 1 starts exactly at 1e300, level 2 at exp(1e300), and so on.
//
// Resolution caveat (by design): at level >= 2 a factor like 2x is below the
// representable resolution (log x alone exceeds 1e300), so add/scale return
// the dominant term. Verification logic must (and does) rely only on
// comparisons with multiplicative slack far above this quantization.
#pragma once

#include <cstdint>
#include <optional>
#include <string>

namespace mk {

class TowerReal {
 public:
  TowerReal() = default;                  // zero
  explicit TowerReal(double plain);       // plain >= 0
  TowerReal(int level, double value);     // exp^level(value), normalized

  static TowerReal from_int(std::int64_t n);

  int level() const { return level_; }
  double value() const { return value_; }
  bool is_zero() const { return level_ == 0 && value_ == 0.0; }

  // Plain double view when the magnitude fits, nullopt otherwise.
  std::optional<double> as_double() const;
  // Exact integer view when the value is an integer <= 2^53.
  std::optional<std::int64_t> as_int() const;

  std::string str() const;

 private:
  int level_ = 0;
  double value_ = 0.0;

  void normalize();
};

// Ordering and equality on canonical forms.
bool operator<(const TowerReal& a, const TowerReal& b);
bool operator<=(const TowerReal& a, const TowerReal& b);
bool operator==(const TowerReal& a, const TowerReal& b);

// exp and log move one level (with double fall-through at level 0).
// tower_log requires x >= 1.
TowerReal tower_exp(const TowerReal& x);
TowerReal tower_log(const TowerReal& x);

// Sum and product of nonnegative magnitudes (dominant-term absorption at
// heights where the smaller term is below resolution).
TowerReal tower_add(const TowerReal& a, const TowerReal& b);
TowerReal tower_mul(const TowerReal& a, const TowerReal& b);

// Multiply by a positive double scalar (e.g. 2, 1/r_k, log lambda).
TowerReal tower_scale(const TowerReal& a, double c);

// x^e for a plain double exponent base... exponent may be a tower: exp(e * log x).
TowerReal tower_pow(const TowerReal& base, const TowerReal& exponent);

// Round up to the next integer where that is resolvable (level 0, value
// below 2^53); above that scale the value is already integer-grained.
TowerReal tower_ceil(const TowerReal& x);

// log(a/b) as a plain double when both logs are level-0 resolvable;
// +/-1e300 sentinels when the ratio is beyond double range. Used to report
// audit slacks.
double tower_log_ratio(const TowerReal& a, const TowerReal& b);

}  // namespace mk
