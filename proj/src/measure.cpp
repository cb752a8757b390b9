#include "mlim/measure.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <sstream>

#include "mlim/compensated.hpp"
#include "mlim/errors.hpp"

namespace mlim {

namespace {

std::string span_text(double lo, double hi) {
  std::ostringstream os;
  os.precision(17);
  os << "[" << lo << ", " << hi << ")";
  return os.str();
}

void require_same_domain(const Interval& a, const Interval& b, const char* what) {
  if (!(a == b)) throw DomainMismatch(std::string(what) + ": objects live on different domains");
}

std::vector<double> merge_sorted(const std::vector<double>& a, const std::vector<double>& b) {
  std::vector<double> out;
  out.reserve(a.size() + b.size());
  std::merge(a.begin(), a.end(), b.begin(), b.end(), std::back_inserter(out));
  out.erase(std::unique(out.begin(), out.end()), out.end());
  return out;
}

}  // namespace

// ---------------------------------------------------------------- segments

AnalyticSegment::AnalyticSegment(std::string name, double lo, double hi, std::function<double(double)> cdf,
                                 std::optional<ExpDensity> form)
    : name_(std::move(name)), lo_(lo), hi_(hi), cdf_(std::move(cdf)), form_(form) {
  if (!std::isfinite(lo_) || !(lo_ < hi_)) throw MalformedMeasure("analytic segment needs finite lo < hi");
  if (!cdf_) throw MalformedMeasure("analytic segment needs a CDF");
  if (std::fabs(cdf_(lo_)) > 1e-12) throw MalformedMeasure("analytic segment CDF must vanish at lo");
  const double total = cdf_(hi_);
  if (!std::isfinite(total) || total < 0) throw MalformedMeasure("analytic segment must carry finite mass");
  if (form_ && form_->scale < 0) throw MalformedMeasure("negative density");
}

AnalyticSegment AnalyticSegment::exponential(std::string name, double lo, double hi, ExpDensity form) {
  if (std::isinf(hi) && !(form.rate < 0) && form.scale != 0)
    throw MalformedMeasure("exponential segment on an unbounded interval needs a negative rate");
  const ExpSum density(form.scale, form.rate);
  return AnalyticSegment(
      std::move(name), lo, hi, [density, lo](double s) { return density.integral(lo, s); }, form);
}

AnalyticSegment AnalyticSegment::exp2() {
  const double ln2 = std::numbers::ln2;
  return AnalyticSegment(
      "exp2", 0.0, std::numeric_limits<double>::infinity(),
      [ln2](double s) { return -std::expm1(-s * ln2) / ln2; }, ExpDensity{1.0, -ln2});
}

double AnalyticSegment::cdf(double s) const {
  if (s <= lo_) return 0.0;
  return cdf_(std::min(s, hi_));
}

double AnalyticSegment::mass(double a, double b) const {
  a = std::max(a, lo_);
  b = std::min(b, hi_);
  if (!(a < b)) return 0.0;
  if (form_) return ExpSum(form_->scale, form_->rate).integral(a, b);
  return cdf_(b) - cdf_(a);
}

double Kernel::mass(double lo, double hi) const {
  switch (kind) {
    case Kind::none:
      return 0.0;
    case Kind::exponential:
      return ExpSum(form.scale, form.rate).integral(lo, hi);
    case Kind::cdf:
      return segment->mass(lo, hi);
  }
  return 0.0;
}

// ---------------------------------------------------------------- measure

FiniteMeasure::FiniteMeasure(Interval domain, std::vector<Atom> atoms, std::vector<DensityCell> cells,
                             std::vector<AnalyticSegment> segments)
    : domain_(domain), segments_(std::move(segments)) {
  if (!(domain_.lo < domain_.hi)) throw MalformedMeasure("domain must satisfy lo < hi");

  std::sort(atoms.begin(), atoms.end(), [](const Atom& a, const Atom& b) { return a.at < b.at; });
  for (const auto& a : atoms) {
    if (!domain_.contains(a.at)) throw MalformedMeasure("atom outside the domain");
    if (!(a.weight >= 0) || !std::isfinite(a.weight)) throw MalformedMeasure("atom weight must be finite and >= 0");
    if (a.weight == 0.0) continue;
    if (!atoms_.empty() && atoms_.back().at == a.at)
      atoms_.back().weight += a.weight;
    else
      atoms_.push_back(a);
  }

  struct Span {
    double lo, hi;
    std::string label;
  };
  std::vector<Span> spans;
  for (std::size_t i = 0; i < cells.size(); ++i) {
    const auto& c = cells[i];
    if (!std::isfinite(c.lo) || !std::isfinite(c.hi) || !(c.lo < c.hi))
      throw MalformedMeasure("cell #" + std::to_string(i) + " must be a bounded span with lo < hi");
    if (!(c.density >= 0) || !std::isfinite(c.density))
      throw MalformedMeasure("cell #" + std::to_string(i) + " has a negative or non-finite density");
    if (c.lo < domain_.lo || c.hi > domain_.hi)
      throw MalformedMeasure("cell #" + std::to_string(i) + " leaves the domain");
    spans.push_back({c.lo, c.hi, "cell #" + std::to_string(i) + " " + span_text(c.lo, c.hi)});
  }
  for (std::size_t i = 0; i < segments_.size(); ++i) {
    const auto& s = segments_[i];
    if (s.lo() < domain_.lo || s.hi() > domain_.hi)
      throw MalformedMeasure("segment '" + s.name() + "' leaves the domain");
    spans.push_back({s.lo(), s.hi(), "segment #" + std::to_string(i) + " '" + s.name() + "' " + span_text(s.lo(), s.hi())});
  }
  std::stable_sort(spans.begin(), spans.end(), [](const Span& a, const Span& b) { return a.lo < b.lo; });
  for (std::size_t i = 1; i < spans.size(); ++i)
    if (spans[i].lo < spans[i - 1].hi)
      throw MalformedMeasure(spans[i - 1].label + " overlaps " + spans[i].label);

  std::sort(cells.begin(), cells.end(), [](const DensityCell& a, const DensityCell& b) { return a.lo < b.lo; });
  cells_ = std::move(cells);
  std::sort(segments_.begin(), segments_.end(),
            [](const AnalyticSegment& a, const AnalyticSegment& b) { return a.lo() < b.lo(); });
}

FiniteMeasure FiniteMeasure::dirac(Interval domain, double at, double weight) {
  return FiniteMeasure(domain, {{at, weight}});
}

FiniteMeasure FiniteMeasure::uniform(Interval domain, double lo, double hi, double density) {
  return FiniteMeasure(domain, {}, {{lo, hi, density}});
}

double FiniteMeasure::atom_weight(double at) const {
  auto it = std::lower_bound(atoms_.begin(), atoms_.end(), at, [](const Atom& a, double x) { return a.at < x; });
  return it != atoms_.end() && it->at == at ? it->weight : 0.0;
}

Kernel FiniteMeasure::kernel_on(double lo, double hi) const {
  const double m = interior_point(lo, hi);
  auto it = std::upper_bound(cells_.begin(), cells_.end(), m, [](double x, const DensityCell& c) { return x < c.lo; });
  if (it != cells_.begin()) {
    const auto& c = *std::prev(it);
    if (m < c.hi) {
      if (c.density == 0.0) return {};
      return Kernel{Kernel::Kind::exponential, ExpDensity{c.density, 0.0}, nullptr};
    }
  }
  for (const auto& s : segments_) {
    if (s.lo() <= m && m < s.hi()) {
      if (s.form()) return Kernel{Kernel::Kind::exponential, *s.form(), nullptr};
      return Kernel{Kernel::Kind::cdf, {}, &s};
    }
  }
  return {};
}

std::vector<double> FiniteMeasure::breaks() const {
  std::vector<double> out{domain_.lo, domain_.hi};
  for (const auto& c : cells_) {
    out.push_back(c.lo);
    out.push_back(c.hi);
  }
  for (const auto& s : segments_) {
    out.push_back(s.lo());
    out.push_back(s.hi());
  }
  std::sort(out.begin(), out.end());
  out.erase(std::unique(out.begin(), out.end()), out.end());
  return out;
}

FiniteMeasure FiniteMeasure::with_atom(double at, double weight) const {
  auto atoms = atoms_;
  atoms.push_back({at, weight});
  return FiniteMeasure(domain_, std::move(atoms), cells_, segments_);
}

double total_mass(const FiniteMeasure& m) {
  CompensatedSum acc;
  for (const auto& a : m.atoms()) acc.add(a.weight);
  for (const auto& c : m.cells()) acc.add(c.density * (c.hi - c.lo));
  for (const auto& s : m.segments()) acc.add(s.mass(s.lo(), s.hi()));
  return acc.value();
}

// ---------------------------------------------------------------- refinement

Partition common_refinement(const std::vector<RefinementInput>& objs) {
  if (objs.empty()) throw InvalidArgument("common refinement of nothing");
  auto domain_of = [](const RefinementInput& o) {
    return std::visit([](const auto* p) { return p->domain(); }, o);
  };
  Partition part;
  part.domain = domain_of(objs.front());
  part.breaks = {part.domain.lo, part.domain.hi};
  for (const auto& o : objs) {
    require_same_domain(part.domain, domain_of(o), "common refinement");
    if (const auto* m = std::get_if<const FiniteMeasure*>(&o)) {
      part.breaks = merge_sorted(part.breaks, (*m)->breaks());
      for (const auto& a : (*m)->atoms()) part.points.push_back(a.at);
    } else {
      const auto* f = std::get<const PiecewiseFn*>(o);
      part.breaks = merge_sorted(part.breaks, f->breaks());
      for (const auto& pv : f->points()) part.points.push_back(pv.at);
    }
  }
  std::sort(part.points.begin(), part.points.end());
  part.points.erase(std::unique(part.points.begin(), part.points.end()), part.points.end());
  return part;
}

// ---------------------------------------------------------------- integration

IntegralParts integrate_parts(const PiecewiseFn& f, const FiniteMeasure& m) {
  require_same_domain(f.domain(), m.domain(), "integrate");
  const auto cuts = merge_sorted(f.breaks().empty() ? std::vector<double>{} : f.breaks(), m.breaks());
  CompensatedSum pos;
  CompensatedSum neg;
  bool pos_inf = false;
  bool neg_inf = false;
  auto add = [&](double v) {
    if (std::isinf(v))
      (v > 0 ? pos_inf : neg_inf) = true;
    else if (v > 0)
      pos.add(v);
    else if (v < 0)
      neg.add(-v);
  };

  for (std::size_t i = 0; i + 1 < cuts.size(); ++i) {
    const double lo = cuts[i];
    const double hi = cuts[i + 1];
    const Kernel k = m.kernel_on(lo, hi);
    if (k.kind == Kernel::Kind::none) continue;
    const Piece p = f.piece_on(lo, hi);
    if (p.is_constant()) {
      if (p.c0 == XReal(0.0)) continue;
      add(times_mass(p.c0, k.mass(lo, hi)).value());
      continue;
    }
    if (k.kind == Kernel::Kind::cdf)
      throw NoClosedForm("exponential function cell against segment '" + k.segment->name() +
                         "' without an exponential density form");
    const ExpSum e = p.as_expsum();
    const ExpSum density(k.form.scale, k.form.rate);
    double a = lo;
    auto sub = e.sign_changes(lo, hi);
    sub.push_back(hi);
    for (double b : sub) {
      add((e * density).integral(a, b));
      a = b;
    }
  }
  for (const auto& atom : m.atoms()) add(times_mass(f(atom.at), atom.weight).value());

  IntegralParts out;
  out.positive = pos_inf ? XReal::pos_inf() : XReal(pos.value());
  out.negative = neg_inf ? XReal::pos_inf() : XReal(neg.value());
  return out;
}

XReal integrate(const PiecewiseFn& f, const FiniteMeasure& m) {
  const auto parts = integrate_parts(f, m);
  if (parts.positive.is_pos_inf() && parts.negative.is_pos_inf())
    throw UndefinedIntegral("both the positive and the negative part of the integral are +inf");
  return parts.positive - parts.negative;
}

double tv_norm_diff(const FiniteMeasure& a, const FiniteMeasure& b) {
  require_same_domain(a.domain(), b.domain(), "tv_norm_diff");
  const auto cuts = merge_sorted(a.breaks(), b.breaks());
  CompensatedSum acc;
  for (std::size_t i = 0; i + 1 < cuts.size(); ++i) {
    const double lo = cuts[i];
    const double hi = cuts[i + 1];
    const Kernel ka = a.kernel_on(lo, hi);
    const Kernel kb = b.kernel_on(lo, hi);
    using K = Kernel::Kind;
    if (ka.kind == K::none && kb.kind == K::none) continue;
    if (ka.kind == K::none || kb.kind == K::none) {
      acc.add((ka.kind == K::none ? kb : ka).mass(lo, hi));
      continue;
    }
    if (ka.kind == K::exponential && kb.kind == K::exponential) {
      const ExpSum d = ExpSum(ka.form.scale, ka.form.rate) - ExpSum(kb.form.scale, kb.form.rate);
      double s = lo;
      auto sub = d.sign_changes(lo, hi);
      sub.push_back(hi);
      for (double t : sub) {
        acc.add(std::fabs(d.integral(s, t)));
        s = t;
      }
      continue;
    }
    if (ka.kind == K::cdf && kb.kind == K::cdf && *ka.segment == *kb.segment) continue;
    throw NoClosedForm("total variation between different CDF-only segments");
  }
  std::vector<double> locs;
  for (const auto& x : a.atoms()) locs.push_back(x.at);
  for (const auto& x : b.atoms()) locs.push_back(x.at);
  std::sort(locs.begin(), locs.end());
  locs.erase(std::unique(locs.begin(), locs.end()), locs.end());
  for (double x : locs) acc.add(std::fabs(a.atom_weight(x) - b.atom_weight(x)));
  return acc.value();
}

// ---------------------------------------------------------------- linear functions

LinearFn::LinearFn(Interval domain, std::vector<double> xs, std::vector<double> ys)
    : domain_(domain), xs_(std::move(xs)), ys_(std::move(ys)) {
  if (xs_.empty() || xs_.size() != ys_.size()) throw MalformedFunction("linear function needs matching knots");
  for (std::size_t i = 0; i < xs_.size(); ++i) {
    if (!std::isfinite(xs_[i]) || !std::isfinite(ys_[i])) throw MalformedFunction("linear knots must be finite");
    if (i > 0 && !(xs_[i - 1] < xs_[i])) throw MalformedFunction("linear knots must be increasing");
  }
}

LinearFn LinearFn::ramp(Interval domain, double x0, double y0, double x1, double y1) {
  return LinearFn(domain, {x0, x1}, {y0, y1});
}

double LinearFn::operator()(double s) const {
  if (s <= xs_.front()) return ys_.front();
  if (s >= xs_.back()) return ys_.back();
  auto idx = static_cast<std::size_t>(std::upper_bound(xs_.begin(), xs_.end(), s) - xs_.begin());
  const double x0 = xs_[idx - 1], x1 = xs_[idx];
  const double t = (s - x0) / (x1 - x0);
  return ys_[idx - 1] + t * (ys_[idx] - ys_[idx - 1]);
}

double integrate(const LinearFn& f, const FiniteMeasure& m) {
  require_same_domain(f.domain(), m.domain(), "integrate");
  std::vector<double> knots;
  for (double x : f.xs())
    if (m.domain().lo < x && x < m.domain().hi) knots.push_back(x);
  const auto cuts = merge_sorted(knots, m.breaks());
  CompensatedSum acc;
  for (std::size_t i = 0; i + 1 < cuts.size(); ++i) {
    const double lo = cuts[i];
    const double hi = cuts[i + 1];
    const Kernel k = m.kernel_on(lo, hi);
    if (k.kind == Kernel::Kind::none) continue;
    // f = alpha + gamma * s on this cell.
    double alpha = 0.0;
    double gamma = 0.0;
    const double mid = interior_point(lo, hi);
    if (mid <= f.xs().front() || mid >= f.xs().back()) {
      alpha = f(mid);
    } else {
      gamma = (f(hi) - f(lo)) / (hi - lo);
      alpha = f(lo) - gamma * lo;
    }
    if (gamma == 0.0) {
      acc.add(alpha * k.mass(lo, hi));
      continue;
    }
    if (k.kind == Kernel::Kind::cdf) throw NoClosedForm("linear ramp against a CDF-only segment");
    const double scale = k.form.scale;
    const double beta = k.form.rate;
    if (beta == 0.0) {
      acc.add(scale * (alpha * (hi - lo) + gamma * (hi * hi - lo * lo) / 2));
    } else {
      auto F = [&](double s) { return scale * std::exp(beta * s) * (alpha / beta + gamma * (s / beta - 1 / (beta * beta))); };
      acc.add(F(hi) - F(lo));
    }
  }
  for (const auto& a : m.atoms()) acc.add(f(a.at) * a.weight);
  return acc.value();
}

// ---------------------------------------------------------------- level sets

double set_mass(const FiniteMeasure& m, const PiecewiseFn& a, const PiecewiseFn& b,
                const std::function<bool(XReal, XReal)>& pred, const std::vector<double>& levels) {
  require_same_domain(m.domain(), a.domain(), "set_mass");
  require_same_domain(m.domain(), b.domain(), "set_mass");
  const auto cuts = merge_sorted(merge_sorted(a.breaks(), b.breaks()), m.breaks());
  CompensatedSum acc;
  for (std::size_t i = 0; i + 1 < cuts.size(); ++i) {
    const double lo = cuts[i];
    const double hi = cuts[i + 1];
    const Kernel k = m.kernel_on(lo, hi);
    if (k.kind == Kernel::Kind::none) continue;
    const Piece pa = a.piece_on(lo, hi);
    const Piece pb = b.piece_on(lo, hi);
    std::vector<double> sub;
    if (pa.is_finite() && pb.is_finite() && !(pa.is_constant() && pb.is_constant())) {
      const ExpSum d = pa.as_expsum() - pb.as_expsum();
      for (double t : levels) {
        auto r = (d - ExpSum(t, 0.0)).sign_changes(lo, hi);
        sub.insert(sub.end(), r.begin(), r.end());
      }
      std::sort(sub.begin(), sub.end());
      sub.erase(std::unique(sub.begin(), sub.end()), sub.end());
    }
    sub.push_back(hi);
    double s = lo;
    for (double t : sub) {
      const double x = interior_point(s, t);
      if (pred(pa.at(x), pb.at(x))) acc.add(k.mass(s, t));
      s = t;
    }
  }
  for (const auto& atom : m.atoms())
    if (pred(a(atom.at), b(atom.at))) acc.add(atom.weight);
  return acc.value();
}

}  // namespace mlim
