#include "mlim/piecewise.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <sstream>

#include "mlim/errors.hpp"

namespace mlim {

Piece Piece::exponential(double c0, double c1, double rate) {
  if (!std::isfinite(c0) || !std::isfinite(c1) || !std::isfinite(rate))
    throw MalformedFunction("exponential piece needs finite coefficients");
  return c1 == 0.0 ? Piece{c0, 0.0, 0.0} : Piece{c0, c1, rate};
}

XReal Piece::at(double s) const {
  if (c1 == 0.0) return c0;
  return XReal(c0.value() + c1 * std::exp(rate * s));
}

ExpSum Piece::as_expsum() const {
  if (!c0.is_finite()) throw InvalidArgument("infinite piece has no exponential-sum form");
  ExpSum e(c0.value(), 0.0);
  e.add(c1, rate);
  return e;
}

std::string to_string(const Region& r) {
  std::ostringstream os;
  os.precision(17);
  if (r.is_point)
    os << "{" << r.lo << "}";
  else
    os << "[" << r.lo << ", " << r.hi << ")";
  return os.str();
}

PiecewiseFn::PiecewiseFn(Interval domain, std::vector<double> breaks, std::vector<Piece> pieces,
                         XReal fill, std::vector<PointValue> points)
    : domain_(domain), breaks_(std::move(breaks)), pieces_(std::move(pieces)), fill_(fill),
      points_(std::move(points)) {
  if (!(domain_.lo < domain_.hi)) throw MalformedFunction("domain must satisfy lo < hi");
  if (pieces_.empty() && breaks_.size() <= 1) breaks_.clear();
  if (breaks_.size() != pieces_.size() + 1 && !(breaks_.empty() && pieces_.empty()))
    throw MalformedFunction("need exactly one more breakpoint than cells");
  for (std::size_t i = 0; i < breaks_.size(); ++i) {
    if (std::isnan(breaks_[i]) || !domain_.contains(breaks_[i]))
      throw MalformedFunction("breakpoint outside the domain");
    if (i > 0 && !(breaks_[i - 1] < breaks_[i]))
      throw MalformedFunction("breakpoints must be strictly increasing");
  }
  for (auto& p : pieces_) {
    if (!p.c0.is_finite() && p.c1 != 0.0)
      throw MalformedFunction("an infinite cell value cannot carry an exponential term");
    if (!std::isfinite(p.c1) || !std::isfinite(p.rate))
      throw MalformedFunction("exponential coefficients must be finite");
    if (p.c1 == 0.0) p.rate = 0.0;
  }
  std::sort(points_.begin(), points_.end(),
            [](const PointValue& a, const PointValue& b) { return a.at < b.at; });
  for (std::size_t i = 0; i < points_.size(); ++i) {
    if (!domain_.contains(points_[i].at)) throw MalformedFunction("point value outside the domain");
    if (i > 0 && points_[i - 1].at == points_[i].at)
      throw MalformedFunction("duplicate point value location");
  }
  canonicalize();
}

PiecewiseFn PiecewiseFn::constant(Interval domain, XReal value) { return PiecewiseFn(domain, {}, {}, value); }

PiecewiseFn PiecewiseFn::indicator(Interval domain, double lo, double hi, XReal value, XReal fill) {
  lo = std::max(lo, domain.lo);
  hi = std::min(hi, domain.hi);
  if (!(lo < hi)) return constant(domain, fill);
  return PiecewiseFn(domain, {lo, hi}, {Piece::constant(value)}, fill);
}

void PiecewiseFn::canonicalize() {
  // Merge equal neighbours.
  if (!pieces_.empty()) {
    std::vector<double> b{breaks_[0]};
    std::vector<Piece> p{pieces_[0]};
    for (std::size_t i = 1; i < pieces_.size(); ++i) {
      if (pieces_[i] == p.back()) continue;
      b.push_back(breaks_[i]);
      p.push_back(pieces_[i]);
    }
    b.push_back(breaks_.back());
    breaks_ = std::move(b);
    pieces_ = std::move(p);
  }
  // Trim cells that equal the fill.
  const Piece fill_piece = Piece::constant(fill_);
  std::size_t first = 0;
  std::size_t last = pieces_.size();
  while (first < last && pieces_[first] == fill_piece) ++first;
  while (last > first && pieces_[last - 1] == fill_piece) --last;
  if (first == last) {
    breaks_.clear();
    pieces_.clear();
  } else if (first > 0 || last < pieces_.size()) {
    breaks_ = std::vector<double>(breaks_.begin() + static_cast<std::ptrdiff_t>(first),
                                  breaks_.begin() + static_cast<std::ptrdiff_t>(last) + 1);
    pieces_ = std::vector<Piece>(pieces_.begin() + static_cast<std::ptrdiff_t>(first),
                                 pieces_.begin() + static_cast<std::ptrdiff_t>(last));
  }
  // Drop point values that agree with the cell value.
  std::vector<PointValue> kept;
  auto saved = std::move(points_);
  points_.clear();
  for (const auto& pv : saved)
    if ((*this)(pv.at) != pv.value) kept.push_back(pv);
  points_ = std::move(kept);
}

XReal PiecewiseFn::operator()(double s) const {
  if (!domain_.contains(s)) throw DomainMismatch("evaluation point outside the domain");
  auto it = std::lower_bound(points_.begin(), points_.end(), s,
                             [](const PointValue& pv, double x) { return pv.at < x; });
  if (it != points_.end() && it->at == s) return it->value;
  if (!breaks_.empty() && s >= breaks_.front() &&
      (s < breaks_.back() || (s == breaks_.back() && s == domain_.hi))) {
    auto idx = static_cast<std::size_t>(std::upper_bound(breaks_.begin(), breaks_.end(), s) - breaks_.begin());
    idx = std::min(idx == 0 ? 0 : idx - 1, pieces_.size() - 1);
    return pieces_[idx].at(s);
  }
  return fill_;
}

Piece PiecewiseFn::piece_on(double lo, double hi) const {
  const double m = interior_point(lo, hi);
  if (!breaks_.empty() && m >= breaks_.front() && m < breaks_.back()) {
    auto idx = static_cast<std::size_t>(std::upper_bound(breaks_.begin(), breaks_.end(), m) - breaks_.begin());
    return pieces_[idx - 1];
  }
  return Piece::constant(fill_);
}

PiecewiseFn PiecewiseFn::negated() const {
  std::vector<Piece> p;
  p.reserve(pieces_.size());
  for (const auto& x : pieces_) p.push_back(x.negated());
  std::vector<PointValue> pts;
  for (const auto& pv : points_) pts.push_back({pv.at, -pv.value});
  return PiecewiseFn(domain_, breaks_, std::move(p), -fill_, std::move(pts));
}

PiecewiseFn PiecewiseFn::plus_constant(double c) const {
  std::vector<Piece> p;
  p.reserve(pieces_.size());
  for (const auto& x : pieces_) p.push_back(Piece{x.c0 + c, x.c1, x.rate});
  std::vector<PointValue> pts;
  for (const auto& pv : points_) pts.push_back({pv.at, pv.value + c});
  return PiecewiseFn(domain_, breaks_, std::move(p), fill_ + c, std::move(pts));
}

namespace {

/// Rebuilds f cell by cell. `cuts(piece, lo, hi)` lists extra split points
/// inside a finite cell; `transform(piece, s)` gives the new piece for the
/// sub-cell containing s; `value_map` handles infinite cells, the fill and
/// point values.
PiecewiseFn remap(const PiecewiseFn& f,
                  const std::function<std::vector<double>(const Piece&, double, double)>& cuts,
                  const std::function<Piece(const Piece&, double)>& transform,
                  const std::function<XReal(XReal)>& value_map) {
  std::vector<double> breaks;
  std::vector<Piece> pieces;
  const auto& b = f.breaks();
  const auto& p = f.pieces();
  breaks.reserve(b.size());
  pieces.reserve(p.size());
  for (std::size_t i = 0; i < p.size(); ++i) {
    const double lo = b[i];
    const double hi = b[i + 1];
    breaks.push_back(lo);
    if (!p[i].is_finite()) {
      pieces.push_back(Piece::constant(value_map(p[i].c0)));
      continue;
    }
    std::vector<double> c = cuts(p[i], lo, hi);
    std::sort(c.begin(), c.end());
    c.erase(std::unique(c.begin(), c.end()), c.end());
    double a = lo;
    for (double x : c) {
      if (!(x > a && x < hi)) continue;
      pieces.push_back(transform(p[i], interior_point(a, x)));
      breaks.push_back(x);
      a = x;
    }
    pieces.push_back(transform(p[i], interior_point(a, hi)));
  }
  if (!b.empty()) breaks.push_back(b.back());
  std::vector<PointValue> pts;
  for (const auto& pv : f.points()) pts.push_back({pv.at, value_map(pv.value)});
  return PiecewiseFn(f.domain(), std::move(breaks), std::move(pieces), value_map(f.fill()), std::move(pts));
}

std::vector<double> sign_cuts(const Piece& p, double lo, double hi) {
  return p.as_expsum().sign_changes(lo, hi);
}

}  // namespace

PiecewiseFn part(const PiecewiseFn& f, PartSign which) {
  const bool positive = which == PartSign::positive;
  return remap(
      f, sign_cuts,
      [positive](const Piece& p, double s) {
        const double v = p.at(s).value();
        if (positive) return v > 0 ? p : Piece{};
        return v < 0 ? p.negated() : Piece{};
      },
      [positive](XReal v) {
        if (positive) return v > XReal(0.0) ? v : XReal(0.0);
        return v < XReal(0.0) ? -v : XReal(0.0);
      });
}

PiecewiseFn absolute(const PiecewiseFn& f) {
  return remap(
      f, sign_cuts, [](const Piece& p, double s) { return p.at(s).value() < 0 ? p.negated() : p; },
      [](XReal v) { return v < XReal(0.0) ? -v : v; });
}

PiecewiseFn tail_restrict(const PiecewiseFn& f, double K) {
  if (!(K > 0) || !std::isfinite(K)) throw InvalidArgument("tail level K must be positive and finite");
  return remap(
      f,
      [K](const Piece& p, double lo, double hi) {
        const ExpSum e = p.as_expsum();
        std::vector<double> c = e.sign_changes(lo, hi);
        for (double t : {K, -K}) {
          auto r = (e - ExpSum(t, 0.0)).sign_changes(lo, hi);
          c.insert(c.end(), r.begin(), r.end());
        }
        return c;
      },
      [K](const Piece& p, double s) {
        const double v = p.at(s).value();
        if (std::fabs(v) < K) return Piece{};
        return v < 0 ? p.negated() : p;
      },
      [K](XReal v) {
        const XReal a = v < XReal(0.0) ? -v : v;
        return a >= XReal(K) ? a : XReal(0.0);
      });
}

std::vector<double> merged_breaks(const Interval& domain, const std::vector<const PiecewiseFn*>& fns) {
  std::vector<double> out{domain.lo, domain.hi};
  std::vector<double> tmp;
  for (const auto* f : fns) {
    tmp.clear();
    tmp.reserve(out.size() + f->breaks().size());
    std::merge(out.begin(), out.end(), f->breaks().begin(), f->breaks().end(), std::back_inserter(tmp));
    tmp.erase(std::unique(tmp.begin(), tmp.end()), tmp.end());
    out.swap(tmp);
  }
  return out;
}

namespace {

bool piece_dominates(const Piece& up, const Piece& low, double lo, double hi) {
  if (!up.is_finite() || !low.is_finite()) {
    // An infinite side is constant; the finite side's range never matters.
    if (up.c0.is_pos_inf() || low.c0.is_neg_inf()) return true;
    if (up.c0.is_neg_inf()) return low.c0.is_neg_inf();
    return false;  // low is +inf, up is finite
  }
  return (up.as_expsum() - low.as_expsum()).infimum(lo, hi) >= 0.0;
}

}  // namespace

DominanceResult dominates(const PiecewiseFn& upper, const PiecewiseFn& lower) {
  if (!(upper.domain() == lower.domain())) throw DomainMismatch("dominance check across different domains");
  DominanceResult res;
  const auto cuts = merged_breaks(upper.domain(), {&upper, &lower});
  for (std::size_t i = 0; i + 1 < cuts.size(); ++i) {
    const double lo = cuts[i];
    const double hi = cuts[i + 1];
    if (!piece_dominates(upper.piece_on(lo, hi), lower.piece_on(lo, hi), lo, hi)) {
      res.holds = false;
      res.witness = Region{lo, hi, false};
      break;
    }
  }
  std::vector<double> locs;
  for (const auto& pv : upper.points()) locs.push_back(pv.at);
  for (const auto& pv : lower.points()) locs.push_back(pv.at);
  locs.push_back(upper.domain().hi);
  std::sort(locs.begin(), locs.end());
  for (double x : locs) {
    if (!std::isfinite(x)) continue;
    if (upper(x) < lower(x)) {
      if (!res.witness || x < res.witness->lo) res.witness = Region{x, x, true};
      res.holds = false;
      break;
    }
  }
  return res;
}

namespace {

template <class Better>
XReal extremum(const PiecewiseFn& f, Better better, bool want_sup) {
  std::optional<XReal> best;
  auto consider = [&](XReal v) {
    if (!best || better(v, *best)) best = v;
  };
  const auto& b = f.breaks();
  const auto& p = f.pieces();
  const auto& d = f.domain();
  for (std::size_t i = 0; i < p.size(); ++i) {
    if (!p[i].is_finite()) {
      consider(p[i].c0);
      continue;
    }
    const ExpSum e = p[i].as_expsum();
    consider(XReal(want_sup ? e.supremum(b[i], b[i + 1]) : e.infimum(b[i], b[i + 1])));
  }
  if (b.empty() || b.front() > d.lo || b.back() < d.hi) consider(f.fill());
  for (const auto& pv : f.points()) consider(pv.value);
  return *best;
}

}  // namespace

XReal supremum(const PiecewiseFn& f) {
  return extremum(f, [](XReal a, XReal b) { return a > b; }, true);
}

XReal infimum(const PiecewiseFn& f) {
  return extremum(f, [](XReal a, XReal b) { return a < b; }, false);
}

}  // namespace mlim
