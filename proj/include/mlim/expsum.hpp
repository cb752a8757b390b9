#pragma once

#include <array>
#include <cstddef>
#include <vector>

namespace mlim {

struct ExpTerm {
  double coef = 0.0;
  double rate = 0.0;
  friend bool operator==(const ExpTerm&, const ExpTerm&) = default;
};

/// Finite sum of exponentials  h(s) = sum_k coef_k * exp(rate_k * s).
///
/// Every integrand the library meets on a refinement cell has this form
/// (function pieces c0 + c1*e^{rs} times exponential/constant densities), so
/// integrals, extrema and sign changes are all computed in closed form or by
/// bisection to adjacent doubles. Terms with equal rates are merged; zero
/// coefficients are dropped. All coefficients are finite.
class ExpSum {
 public:
  static constexpr std::size_t kCapacity = 8;

  ExpSum() = default;
  ExpSum(double coef, double rate) { add(coef, rate); }

  void add(double coef, double rate);
  ExpSum& operator+=(const ExpSum& o);
  ExpSum operator-() const;
  friend ExpSum operator+(ExpSum a, const ExpSum& b) { return a += b; }
  friend ExpSum operator-(ExpSum a, const ExpSum& b) { return a += -b; }
  friend ExpSum operator*(const ExpSum& a, const ExpSum& b);

  std::size_t size() const noexcept { return n_; }
  const ExpTerm& term(std::size_t i) const { return terms_[i]; }
  bool is_zero() const noexcept { return n_ == 0; }

  /// h(s); s may be +-inf, in which case the limit is returned.
  double operator()(double s) const;

  /// Integral over [lo, hi]; either end may be infinite. May return +-inf.
  double integral(double lo, double hi) const;

  ExpSum derivative() const;

  /// Points in the open interval (lo, hi) where h changes sign, ascending.
  std::vector<double> sign_changes(double lo, double hi) const;

  /// inf / sup of h over the closure of [lo, hi] (limits at infinite ends).
  double infimum(double lo, double hi) const;
  double supremum(double lo, double hi) const;

 private:
  std::array<ExpTerm, kCapacity> terms_{};
  std::size_t n_ = 0;
};

/// A finite point strictly inside (lo, hi), well away from either end when
/// both are finite.
double interior_point(double lo, double hi);

}  // namespace mlim
