#include "mlim/expsum.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <map>
#include <limits>

#include "mlim/compensated.hpp"
#include "mlim/errors.hpp"

namespace mlim {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

int sign_of(double x) { return (x > 0) - (x < 0); }

double midpoint(double a, double b) {
  const double m = a + (b - a) / 2;
  return std::isfinite(m) ? m : a / 2 + b / 2;
}

}  // namespace

double interior_point(double lo, double hi) {
  const bool flo = std::isfinite(lo);
  const bool fhi = std::isfinite(hi);
  if (flo && fhi) return midpoint(lo, hi);
  if (flo) return lo + std::max(1.0, std::fabs(lo));
  if (fhi) return hi - std::max(1.0, std::fabs(hi));
  return 0.0;
}

void ExpSum::add(double coef, double rate) {
  if (!std::isfinite(coef) || !std::isfinite(rate))
    throw UndefinedArithmetic("exponential sum terms must be finite");
  if (coef == 0.0) return;
  for (std::size_t i = 0; i < n_; ++i) {
    if (terms_[i].rate == rate) {
      terms_[i].coef += coef;
      if (terms_[i].coef == 0.0) {
        std::copy(terms_.begin() + static_cast<std::ptrdiff_t>(i) + 1,
                  terms_.begin() + static_cast<std::ptrdiff_t>(n_),
                  terms_.begin() + static_cast<std::ptrdiff_t>(i));
        --n_;
      }
      return;
    }
  }
  if (n_ == kCapacity) throw InvalidArgument("exponential sum capacity exceeded");
  terms_[n_++] = {coef, rate};
}

ExpSum& ExpSum::operator+=(const ExpSum& o) {
  for (std::size_t i = 0; i < o.n_; ++i) add(o.terms_[i].coef, o.terms_[i].rate);
  return *this;
}

ExpSum ExpSum::operator-() const {
  ExpSum r = *this;
  for (std::size_t i = 0; i < r.n_; ++i) r.terms_[i].coef = -r.terms_[i].coef;
  return r;
}

ExpSum operator*(const ExpSum& a, const ExpSum& b) {
  ExpSum r;
  for (std::size_t i = 0; i < a.n_; ++i)
    for (std::size_t j = 0; j < b.n_; ++j)
      r.add(a.terms_[i].coef * b.terms_[j].coef, a.terms_[i].rate + b.terms_[j].rate);
  return r;
}

double ExpSum::operator()(double s) const {
  if (n_ == 0) return 0.0;
  if (std::isinf(s)) {
    // The term with the most extreme rate in the direction of s dominates.
    const ExpTerm* dominant = nullptr;
    double constant = 0.0;
    for (std::size_t i = 0; i < n_; ++i) {
      const double directed = s > 0 ? terms_[i].rate : -terms_[i].rate;
      if (directed > 0 && (dominant == nullptr || directed > (s > 0 ? dominant->rate : -dominant->rate)))
        dominant = &terms_[i];
      if (terms_[i].rate == 0.0) constant = terms_[i].coef;
    }
    if (dominant != nullptr) return sign_of(dominant->coef) * kInf;
    return constant;
  }
  double max_exponent = -kInf;
  for (std::size_t i = 0; i < n_; ++i) max_exponent = std::max(max_exponent, terms_[i].rate * s);
  CompensatedSum acc;
  if (max_exponent <= 700.0) {
    for (std::size_t i = 0; i < n_; ++i) acc.add(terms_[i].coef * std::exp(terms_[i].rate * s));
    return acc.value();
  }
  for (std::size_t i = 0; i < n_; ++i)
    acc.add(terms_[i].coef * std::exp(terms_[i].rate * s - max_exponent));
  const double scaled = acc.value();
  return scaled == 0.0 ? 0.0 : sign_of(scaled) * kInf;
}

double ExpSum::integral(double lo, double hi) const {
  if (!(lo <= hi)) throw InvalidArgument("integral bounds out of order");
  if (lo == hi) return 0.0;
  // Sign of the divergence at an infinite end: the fastest growing term
  // with a nonzero coefficient wins, a constant losing to any exponential.
  auto end_sign = [&](bool upper) {
    std::map<double, double, std::greater<>> by_growth;
    for (std::size_t i = 0; i < n_; ++i) {
      const double growth = upper ? terms_[i].rate : -terms_[i].rate;
      if (growth >= 0.0) by_growth[growth] += terms_[i].coef;
    }
    for (const auto& [growth, coef] : by_growth)
      if (coef != 0.0) return coef > 0 ? 1 : -1;
    return 0;
  };
  const int at_hi = std::isinf(hi) ? end_sign(true) : 0;
  const int at_lo = std::isinf(lo) ? end_sign(false) : 0;
  if (at_hi * at_lo < 0) throw UndefinedArithmetic("integral of exponential sum is inf - inf");
  if (at_hi + at_lo > 0) return kInf;
  if (at_hi + at_lo < 0) return -kInf;
  CompensatedSum acc;
  for (std::size_t i = 0; i < n_; ++i) {
    const double c = terms_[i].coef;
    const double r = terms_[i].rate;
    // growing terms left at an infinite end cancel in groups of equal rate
    if (c == 0.0 || (std::isinf(hi) && r >= 0.0) || (std::isinf(lo) && r <= 0.0)) continue;
    if (r == 0.0)
      acc.add(c * (hi - lo));
    else if (std::isinf(hi))
      acc.add(-c * std::exp(r * lo) / r);
    else if (std::isinf(lo))
      acc.add(c * std::exp(r * hi) / r);
    else
      acc.add(c * std::exp(r * lo) * std::expm1(r * (hi - lo)) / r);
  }
  return acc.value();
}

ExpSum ExpSum::derivative() const {
  ExpSum d;
  for (std::size_t i = 0; i < n_; ++i)
    if (terms_[i].rate != 0.0) d.add(terms_[i].coef * terms_[i].rate, terms_[i].rate);
  return d;
}

std::vector<double> ExpSum::sign_changes(double lo, double hi) const {
  if (n_ <= 1 || !(lo < hi)) return {};
  // Dividing by exp(r0 s) keeps the zeros and turns one term into a constant,
  // so the derivative has one term fewer; its sign changes split [lo, hi]
  // into pieces on which g is monotone.
  ExpSum g;
  const double r0 = terms_[0].rate;
  for (std::size_t i = 0; i < n_; ++i) g.add(terms_[i].coef, terms_[i].rate - r0);
  std::vector<double> cuts = g.derivative().sign_changes(lo, hi);

  std::vector<double> roots;
  double a = lo;
  for (std::size_t k = 0; k <= cuts.size(); ++k) {
    const double b = k < cuts.size() ? cuts[k] : hi;
    const int sa = sign_of(g(a));
    const int sb = sign_of(g(b));
    if (sa * sb < 0) {
      double left = a;
      double right = b;
      if (std::isinf(left) || std::isinf(right)) {
        // Walk outwards from the finite end until the sign flips.
        const bool walk_right = std::isinf(right);
        double anchor = walk_right ? left : right;
        if (std::isinf(anchor)) anchor = 0.0;
        double step = std::max(1.0, std::fabs(anchor));
        double probe = anchor;
        bool found = false;
        for (int it = 0; it < 2100 && std::isfinite(probe); ++it) {
          probe = walk_right ? anchor + step : anchor - step;
          if (!std::isfinite(probe)) break;
          if (sign_of(g(probe)) == (walk_right ? sb : sa)) {
            found = true;
            break;
          }
          if (walk_right)
            left = probe;
          else
            right = probe;
          step *= 2;
        }
        if (!found) {
          a = b;
          continue;
        }
        (walk_right ? right : left) = probe;
      }
      int sl = sign_of(g(left));
      while (true) {
        const double m = midpoint(left, right);
        if (m <= left || m >= right) break;
        const int sm = sign_of(g(m));
        if (sm == 0) {
          left = right = m;
          break;
        }
        if (sm == sl)
          left = m;
        else
          right = m;
      }
      const double root = std::fabs(g(left)) <= std::fabs(g(right)) ? left : right;
      if (root > lo && root < hi) roots.push_back(root);
    }
    a = b;
  }
  std::sort(roots.begin(), roots.end());
  roots.erase(std::unique(roots.begin(), roots.end()), roots.end());
  return roots;
}

double ExpSum::infimum(double lo, double hi) const {
  double best = std::min((*this)(lo), (*this)(hi));
  for (double c : derivative().sign_changes(lo, hi)) best = std::min(best, (*this)(c));
  return best;
}

double ExpSum::supremum(double lo, double hi) const {
  double best = std::max((*this)(lo), (*this)(hi));
  for (double c : derivative().sign_changes(lo, hi)) best = std::max(best, (*this)(c));
  return best;
}

}  // namespace mlim
