#include "mlim/epi.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "mlim/errors.hpp"
#include "mlim/parallel.hpp"

namespace mlim {

namespace {

XReal piece_value(const Piece& p, double x) {
  if (p.is_constant()) return p.c0;
  return XReal(p.as_expsum()(x));
}

XReal worst(EpiSide side) { return side == EpiSide::liminf ? XReal::pos_inf() : XReal::neg_inf(); }

XReal better(EpiSide side, XReal a, XReal b) { return side == EpiSide::liminf ? xmin(a, b) : xmax(a, b); }

}  // namespace

EpiSchedule EpiSchedule::standard(std::size_t n_max) {
  EpiSchedule s;
  s.n_max = n_max;
  std::size_t J = 0;
  while (J < 12 && (std::size_t{1} << (J + 1)) <= n_max) ++J;
  for (std::size_t j = 1; j <= std::max<std::size_t>(J, 1); ++j) {
    s.N.push_back(std::size_t{1} << j);
    s.delta.push_back(std::ldexp(1.0, -static_cast<int>(j)));
  }
  return s;
}

void EpiSchedule::validate() const {
  if (N.empty() || N.size() != delta.size()) throw InvalidArgument("epi schedule needs matching (N_j, delta_j) pairs");
  for (std::size_t j = 0; j < N.size(); ++j) {
    if (N[j] < 1 || !(delta[j] > 0) || !std::isfinite(delta[j]))
      throw InvalidArgument("epi schedule entries must be positive");
    if (j > 0 && !(N[j] > N[j - 1])) throw InvalidArgument("epi schedule thresholds must increase");
    if (j > 0 && !(delta[j] < delta[j - 1])) throw InvalidArgument("epi schedule radii must decrease");
  }
  if (N.back() > n_max)
    throw ScheduleExhausted("schedule needs index " + std::to_string(N.back()) + " but n_max is " +
                            std::to_string(n_max));
}

std::string to_string(Certainty c) { return c == Certainty::exact ? "exact" : "window-truncated"; }
std::string to_string(EpiSide s) { return s == EpiSide::liminf ? "liminf" : "limsup"; }

XReal ball_extremum(const PiecewiseFn& f, double s, double r, EpiSide side) {
  const Interval& d = f.domain();
  if (!d.contains(s)) throw DomainMismatch("ball center outside the domain");
  const double a = s - r;
  const double b = s + r;
  const bool l_closed = a < d.lo;
  const bool r_closed = b > d.hi;
  const double L = l_closed ? d.lo : a;
  const double R = r_closed ? d.hi : b;
  auto in_region = [&](double x) { return (l_closed ? x >= L : x > L) && (r_closed ? x <= R : x < R); };
  auto overlaps = [&](double p, double q) { return std::max(p, L) < std::min(q, R); };

  XReal best = worst(side);
  auto consider = [&](XReal v) { best = better(side, best, v); };

  const auto& br = f.breaks();
  const auto& pc = f.pieces();
  if (br.empty()) {
    consider(f.fill());
  } else {
    if (br.front() > d.lo && overlaps(d.lo, br.front())) consider(f.fill());
    if (br.back() < d.hi && (overlaps(br.back(), d.hi) || (r_closed && in_region(d.hi)))) consider(f.fill());
    auto it = std::upper_bound(br.begin(), br.end(), L);
    std::size_t i = it == br.begin() ? 0 : static_cast<std::size_t>(it - br.begin()) - 1;
    for (; i < pc.size() && br[i] < R; ++i) {
      if (!overlaps(br[i], br[i + 1])) continue;
      const Piece& p = pc[i];
      if (p.is_constant()) {
        consider(p.c0);
      } else {
        // Pieces are monotone, so the extremum sits at an end of the overlap.
        consider(piece_value(p, std::max(br[i], L)));
        consider(piece_value(p, std::min(br[i + 1], R)));
      }
    }
  }
  const auto& pts = f.points();
  auto pit = std::lower_bound(pts.begin(), pts.end(), L, [](const PointValue& pv, double x) { return pv.at < x; });
  for (; pit != pts.end() && pit->at <= R; ++pit)
    if (in_region(pit->at)) consider(pit->value);
  return best;
}

XReal envelope_at(const PiecewiseFn& f, double s, EpiSide side) {
  const Interval& d = f.domain();
  XReal best = f(s);
  const auto& br = f.breaks();
  if (s > d.lo) {
    auto it = std::lower_bound(br.begin(), br.end(), s);
    const double left = it == br.begin() ? d.lo : *std::prev(it);
    best = better(side, best, piece_value(f.piece_on(std::max(left, d.lo), s), s));
  }
  if (s < d.hi) {
    auto it = std::upper_bound(br.begin(), br.end(), s);
    const double right = it == br.end() ? d.hi : *it;
    best = better(side, best, piece_value(f.piece_on(s, std::min(right, d.hi)), s));
  }
  return best;
}

std::vector<EpiEstimate> epi_limit_batch(const FnSequence& seq, const std::vector<double>& points,
                                         const EpiSchedule& sched, EpiSide side, bool always_scan) {
  EpiSchedule sc = sched;
  sc.n_max = std::min(sched.n_max == 0 ? seq.n_max() : sched.n_max, seq.n_max());
  sc.validate();
  for (double s : points)
    if (!seq.domain().contains(s)) throw DomainMismatch("sample point outside the domain");

  const auto& cert = side == EpiSide::liminf ? seq.liminf_certificate : seq.limsup_certificate;
  const std::size_t J = sc.size();
  std::vector<EpiEstimate> out(points.size());
  std::vector<std::size_t> scan;
  for (std::size_t p = 0; p < points.size(); ++p) {
    const double s = points[p];
    if (cert) {
      out[p].value = (*cert)(s);
      out[p].certainty = Certainty::exact;
      out[p].source = "certificate";
    } else if (seq.eventual_form) {
      if (auto ev = seq.eventual_form(s, sc.delta.back())) {
        out[p].value = envelope_at(ev->fn, s, side);
        out[p].certainty = Certainty::exact;
        out[p].source = "eventual_form";
      }
    }
    if (always_scan || out[p].source.empty()) scan.push_back(p);
  }
  if (scan.empty()) return out;

  // per_n[n - N_1][q * J + j]: extremum of f_n over ball j around scan point q.
  const std::size_t first = sc.N.front();
  const std::size_t count = sc.n_max - first + 1;
  std::vector<std::vector<XReal>> per_n(count);
  parallel_for(count, [&](std::size_t i) {
    const std::size_t n = first + i;
    const PiecewiseFn f = seq.at(n);
    auto& row = per_n[i];
    row.assign(scan.size() * J, worst(side));
    for (std::size_t q = 0; q < scan.size(); ++q)
      for (std::size_t j = 0; j < J && sc.N[j] <= n; ++j)
        row[q * J + j] = ball_extremum(f, points[scan[q]], sc.delta[j], side);
  });
  for (std::size_t q = 0; q < scan.size(); ++q) {
    EpiEstimate& e = out[scan[q]];
    e.inner.assign(J, worst(side));
    for (std::size_t i = 0; i < count; ++i)
      for (std::size_t j = 0; j < J; ++j) e.inner[j] = better(side, e.inner[j], per_n[i][q * J + j]);
    e.stabilized = J >= 2 && e.inner[J - 1] == e.inner[J - 2];
    if (e.source.empty()) {
      e.value = e.inner.back();
      e.certainty = Certainty::window_truncated;
      e.source = "scan";
    }
  }
  return out;
}

EpiEstimate epi_limit(const FnSequence& seq, double s, const EpiSchedule& sched, EpiSide side) {
  return epi_limit_batch(seq, {s}, sched, side, true).front();
}

EpiEstimate epi_liminf(const FnSequence& seq, double s, const EpiSchedule& sched) {
  return epi_limit(seq, s, sched, EpiSide::liminf);
}

EpiEstimate epi_limsup(const FnSequence& seq, double s, const EpiSchedule& sched) {
  return epi_limit(seq, s, sched, EpiSide::limsup);
}

namespace {

bool values_agree(XReal a, XReal b, double tol) {
  if (a == b) return true;
  if (!a.is_finite() || !b.is_finite()) return false;
  return std::fabs(b.value() - a.value()) <= tol;
}

/// Sorted, deduplicated copy of the sample points.
std::vector<double> sorted_points(std::vector<double> pts) {
  std::sort(pts.begin(), pts.end());
  pts.erase(std::unique(pts.begin(), pts.end()), pts.end());
  return pts;
}

/// Cell [lo, hi) of sample point i in the nearest-point partition.
std::pair<double, double> voronoi_cell(const std::vector<double>& pts, std::size_t i, const Interval& d) {
  const double lo = i == 0 ? d.lo : pts[i - 1] + (pts[i] - pts[i - 1]) / 2;
  const double hi = i + 1 == pts.size() ? d.hi : pts[i] + (pts[i + 1] - pts[i]) / 2;
  return {lo, hi};
}

}  // namespace

LimitExistence epi_limit_exists(const FnSequence& seq, const FiniteMeasure& m, const std::vector<double>& points,
                                const EpiSchedule& sched, double tol) {
  LimitExistence r;
  r.points = sorted_points(points);
  const auto lo = epi_limit_batch(seq, r.points, sched, EpiSide::liminf);
  const auto hi = epi_limit_batch(seq, r.points, sched, EpiSide::limsup);
  for (std::size_t i = 0; i < r.points.size(); ++i) {
    const bool settled = (lo[i].certainty == Certainty::exact && hi[i].certainty == Certainty::exact) ||
                         (lo[i].stabilized && hi[i].stabilized);
    const bool ok = settled && values_agree(lo[i].value, hi[i].value, tol);
    r.exists.push_back(ok);
    if (!ok) r.failures.push_back(r.points[i]);
  }
  if (seq.liminf_certificate && seq.limsup_certificate) {
    r.exception_mass = set_mass(
        m, *seq.liminf_certificate, *seq.limsup_certificate,
        [tol](XReal a, XReal b) { return !values_agree(a, b, tol); }, {tol, -tol});
    r.mass_exact = true;
  } else {
    const Interval& d = m.domain();
    double mass = 0.0;
    for (std::size_t i = 0; i < r.points.size(); ++i) {
      if (r.exists[i]) continue;
      const auto [a, b] = voronoi_cell(r.points, i, d);
      mass += integrate(PiecewiseFn::indicator(d, a, b, 1.0), m).value();
    }
    r.exception_mass = mass;
  }
  r.exists_almost_everywhere = r.exception_mass <= tol;
  return r;
}

std::vector<double> default_epi_grid(const Interval& domain, const FiniteMeasure& m) {
  double hi = domain.hi;
  if (!std::isfinite(hi)) {
    hi = domain.lo;
    for (double b : m.breaks())
      if (std::isfinite(b)) hi = std::max(hi, b);
    if (hi == domain.lo) hi = domain.lo + 64.0;
  }
  std::vector<double> pts;
  constexpr int kCount = 257;
  for (int i = 0; i < kCount; ++i) pts.push_back(domain.lo + (hi - domain.lo) * i / (kCount - 1));
  for (const auto& a : m.atoms()) pts.push_back(a.at);
  return sorted_points(std::move(pts));
}

EpiIntegral epi_integral(const FnSequence& seq, const FiniteMeasure& m, EpiSide side, const EpiSchedule& sched,
                         const std::vector<double>& grid) {
  if (!(seq.domain() == m.domain())) throw DomainMismatch("epi integral across different domains");
  const auto& cert = side == EpiSide::liminf ? seq.liminf_certificate : seq.limsup_certificate;
  if (cert) return EpiIntegral{integrate(*cert, m), Certainty::exact, "certificate"};

  std::vector<double> pts = grid.empty() ? default_epi_grid(m.domain(), m) : grid;
  for (const auto& a : m.atoms()) pts.push_back(a.at);
  pts = sorted_points(std::move(pts));
  const auto est = epi_limit_batch(seq, pts, sched, side);

  const Interval& d = m.domain();
  std::vector<double> breaks{d.lo};
  std::vector<Piece> pieces;
  std::vector<PointValue> overrides;
  bool atoms_exact = true;
  for (std::size_t i = 0; i < pts.size(); ++i) {
    const auto [a, b] = voronoi_cell(pts, i, d);
    if (b > a) {
      pieces.push_back(Piece::constant(est[i].value));
      breaks.push_back(b);
    }
    if (m.atom_weight(pts[i]) > 0) {
      overrides.push_back({pts[i], est[i].value});
      atoms_exact = atoms_exact && est[i].certainty == Certainty::exact;
    }
  }
  if (breaks.size() == 1) breaks.clear();
  const PiecewiseFn step(d, std::move(breaks), std::move(pieces), 0.0, std::move(overrides));
  const bool purely_atomic = m.cells().empty() && m.segments().empty();
  return EpiIntegral{integrate(step, m), purely_atomic && atoms_exact ? Certainty::exact : Certainty::window_truncated,
                     "sampled"};
}

}  // namespace mlim
