#pragma once

#include <compare>
#include <limits>
#include <string>

namespace mlim {

/// Extended real number in [-inf, +inf].
///
/// Arithmetic is IEEE except that indeterminate forms ((+inf) + (-inf),
/// 0 * inf outside integration) raise UndefinedArithmetic instead of
/// producing NaN. NaN is never a valid value.
class XReal {
 public:
  XReal() = default;
  XReal(double v);  // NOLINT(google-explicit-constructor)

  static XReal pos_inf() { return XReal(std::numeric_limits<double>::infinity()); }
  static XReal neg_inf() { return XReal(-std::numeric_limits<double>::infinity()); }

  double value() const noexcept { return v_; }
  bool is_finite() const noexcept;
  bool is_pos_inf() const noexcept;
  bool is_neg_inf() const noexcept;

  XReal operator-() const { return XReal(-v_); }

  friend XReal operator+(XReal a, XReal b);
  friend XReal operator-(XReal a, XReal b) { return a + (-b); }
  friend XReal operator*(XReal a, XReal b);

  XReal& operator+=(XReal o) { return *this = *this + o; }

  friend bool operator==(XReal a, XReal b) noexcept { return a.v_ == b.v_; }
  friend std::partial_ordering operator<=>(XReal a, XReal b) noexcept { return a.v_ <=> b.v_; }

 private:
  double v_ = 0.0;
};

/// value * mass with the integration convention 0 * inf = 0.
XReal times_mass(XReal value, double mass);

XReal xmin(XReal a, XReal b);
XReal xmax(XReal a, XReal b);

/// Difference used for gaps: like a - b, but equal infinities give 0.
XReal gap_difference(XReal a, XReal b);

/// "+inf", "-inf", or the shortest round-trip decimal.
std::string to_string(XReal x);

/// Inverse of to_string; also accepts "inf"/"infinity" spellings.
XReal parse_xreal(const std::string& text);

}  // namespace mlim
