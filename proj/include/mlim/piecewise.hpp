#pragma once

#include <optional>
#include <string>
#include <vector>

#include "mlim/expsum.hpp"
#include "mlim/xreal.hpp"

namespace mlim {

/// Closed interval [lo, hi] of the real line; hi may be +inf, lo may be -inf.
struct Interval {
  double lo = 0.0;
  double hi = 1.0;

  bool contains(double s) const noexcept { return lo <= s && s <= hi; }
  friend bool operator==(const Interval&, const Interval&) = default;
};

/// Value of a function on one cell: c0 + c1 * exp(rate * s).
///
/// c0 may be infinite only when c1 == 0. A plain step value has c1 == 0.
struct Piece {
  XReal c0 = 0.0;
  double c1 = 0.0;
  double rate = 0.0;

  static Piece constant(XReal v) { return Piece{v, 0.0, 0.0}; }
  static Piece exponential(double c0, double c1, double rate);

  bool is_constant() const noexcept { return c1 == 0.0; }
  bool is_finite() const noexcept { return c0.is_finite(); }
  XReal at(double s) const;
  /// Requires is_finite().
  ExpSum as_expsum() const;
  Piece negated() const { return Piece{-c0, -c1, rate}; }

  friend bool operator==(const Piece&, const Piece&) = default;
};

struct PointValue {
  double at = 0.0;
  XReal value = 0.0;
  friend bool operator==(const PointValue&, const PointValue&) = default;
};

/// A span of the real line used to report where something happened.
struct Region {
  double lo = 0.0;
  double hi = 0.0;
  bool is_point = false;
  friend bool operator==(const Region&, const Region&) = default;
};

std::string to_string(const Region& r);

/// Measurable extended-real function on an interval with finitely many cells.
///
/// Cells are half-open [b_i, b_{i+1}); the domain's right endpoint belongs to
/// the last cell when the last breakpoint equals it. Outside the cells the
/// function takes the `fill` value. Point values override everything at a
/// single location. The representation is canonical: adjacent equal cells are
/// merged, cells equal to the fill are trimmed from both ends and redundant
/// point values dropped.
class PiecewiseFn {
 public:
  PiecewiseFn() = default;
  PiecewiseFn(Interval domain, std::vector<double> breaks, std::vector<Piece> pieces,
              XReal fill = 0.0, std::vector<PointValue> points = {});

  static PiecewiseFn constant(Interval domain, XReal value);
  /// value on [lo, hi) clipped to the domain, `fill` elsewhere.
  static PiecewiseFn indicator(Interval domain, double lo, double hi, XReal value, XReal fill = 0.0);

  XReal operator()(double s) const;

  const Interval& domain() const noexcept { return domain_; }
  const std::vector<double>& breaks() const noexcept { return breaks_; }
  const std::vector<Piece>& pieces() const noexcept { return pieces_; }
  XReal fill() const noexcept { return fill_; }
  const std::vector<PointValue>& points() const noexcept { return points_; }
  std::size_t cell_count() const noexcept { return pieces_.size(); }

  /// Representation on an open span (lo, hi) that lies inside one cell or one
  /// fill region (as produced by a common refinement).
  Piece piece_on(double lo, double hi) const;

  PiecewiseFn negated() const;
  PiecewiseFn plus_constant(double c) const;

  friend bool operator==(const PiecewiseFn&, const PiecewiseFn&) = default;

 private:
  void canonicalize();

  Interval domain_{};
  std::vector<double> breaks_;
  std::vector<Piece> pieces_;
  XReal fill_ = 0.0;
  std::vector<PointValue> points_;
};

enum class PartSign { positive, negative };

/// f+ = max(f, 0) or f- = -min(f, 0).
PiecewiseFn part(const PiecewiseFn& f, PartSign which);

/// |f|.
PiecewiseFn absolute(const PiecewiseFn& f);

/// |f| * 1{|f| >= K}; K must be positive.
PiecewiseFn tail_restrict(const PiecewiseFn& f, double K);

struct DominanceResult {
  bool holds = true;
  std::optional<Region> witness;
};

/// upper(s) >= lower(s) for every s in the domain, checked exactly cell by cell.
DominanceResult dominates(const PiecewiseFn& upper, const PiecewiseFn& lower);

/// Pointwise supremum / infimum of f over the whole domain.
XReal supremum(const PiecewiseFn& f);
XReal infimum(const PiecewiseFn& f);

/// Sorted union of breakpoints (with the domain ends) of several functions.
std::vector<double> merged_breaks(const Interval& domain, const std::vector<const PiecewiseFn*>& fns);

}  // namespace mlim
