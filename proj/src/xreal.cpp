#include "mlim/xreal.hpp"

#include <charconv>
#include <cmath>

#include "mlim/errors.hpp"

namespace mlim {

XReal::XReal(double v) : v_(v) {
  if (std::isnan(v)) throw UndefinedArithmetic("NaN is not an extended real");
}

bool XReal::is_finite() const noexcept { return std::isfinite(v_); }
bool XReal::is_pos_inf() const noexcept { return std::isinf(v_) && v_ > 0; }
bool XReal::is_neg_inf() const noexcept { return std::isinf(v_) && v_ < 0; }

XReal operator+(XReal a, XReal b) {
  if ((a.is_pos_inf() && b.is_neg_inf()) || (a.is_neg_inf() && b.is_pos_inf()))
    throw UndefinedArithmetic("(+inf) + (-inf) is undefined");
  return XReal(a.v_ + b.v_);
}

XReal operator*(XReal a, XReal b) {
  if ((!a.is_finite() && b.v_ == 0.0) || (!b.is_finite() && a.v_ == 0.0))
    throw UndefinedArithmetic("0 * inf is undefined outside integration");
  return XReal(a.v_ * b.v_);
}

XReal times_mass(XReal value, double mass) {
  if (mass == 0.0 || value.value() == 0.0) return XReal(0.0);
  return XReal(value.value() * mass);
}

XReal xmin(XReal a, XReal b) { return b < a ? b : a; }
XReal xmax(XReal a, XReal b) { return b > a ? b : a; }

XReal gap_difference(XReal a, XReal b) {
  if (!a.is_finite() && a == b) return XReal(0.0);
  return a - b;
}

std::string to_string(XReal x) {
  if (x.is_pos_inf()) return "+inf";
  if (x.is_neg_inf()) return "-inf";
  char buf[64];
  auto res = std::to_chars(buf, buf + sizeof buf, x.value());
  return std::string(buf, res.ptr);
}

XReal parse_xreal(const std::string& text) {
  if (text == "+inf" || text == "inf" || text == "infinity" || text == "+infinity")
    return XReal::pos_inf();
  if (text == "-inf" || text == "-infinity") return XReal::neg_inf();
  double v = 0.0;
  auto res = std::from_chars(text.data(), text.data() + text.size(), v);
  if (res.ec != std::errc() || res.ptr != text.data() + text.size())
    throw InvalidArgument("not an extended real: '" + text + "'");
  return XReal(v);
}

}  // namespace mlim
