#include "mlim/uniform.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "mlim/compensated.hpp"
#include "mlim/errors.hpp"
#include "mlim/parallel.hpp"

namespace mlim {

namespace {

std::vector<double> merge_unique(std::vector<double> a, const std::vector<double>& b) {
  a.insert(a.end(), b.begin(), b.end());
  std::sort(a.begin(), a.end());
  a.erase(std::unique(a.begin(), a.end()), a.end());
  return a;
}

double finite_mass(XReal v, double w, double at) {
  if (w == 0.0) return 0.0;
  if (!v.is_finite()) {
    std::ostringstream os;
    os.precision(17);
    os << "infinite value at " << at << " carries positive mass";
    throw NonIntegrable(os.str());
  }
  return v.value() * w;
}

bool converging(Trend t) { return t == Trend::zero || t == Trend::vanishing; }

std::string csv_number(double v) {
  std::ostringstream os;
  os.precision(17);
  os << v;
  return os.str();
}

}  // namespace

SignedCellMeasure signed_gap(const PiecewiseFn& fn, const FiniteMeasure& mn, const PiecewiseFn& f, const FiniteMeasure& m) {
  const Interval& d = f.domain();
  if (!(fn.domain() == d) || !(mn.domain() == d) || !(m.domain() == d))
    throw DomainMismatch("signed gap across different domains");
  std::vector<double> cuts = merged_breaks(d, {&fn, &f});
  cuts = merge_unique(std::move(cuts), mn.breaks());
  cuts = merge_unique(std::move(cuts), m.breaks());

  SignedCellMeasure g;
  for (std::size_t i = 0; i + 1 < cuts.size(); ++i) {
    const double lo = cuts[i];
    const double hi = cuts[i + 1];
    const Kernel kn = mn.kernel_on(lo, hi);
    const Kernel k = m.kernel_on(lo, hi);
    const Piece pn = fn.piece_on(lo, hi);
    const Piece p = f.piece_on(lo, hi);
    const double wn = kn.mass(lo, hi);
    const double w = k.mass(lo, hi);
    if ((wn > 0 && !pn.is_finite()) || (w > 0 && !p.is_finite()))
      throw NonIntegrable("infinite value on " + to_string(Region{lo, hi, false}) + " carries positive mass");
    const bool active_n = wn > 0 && !(pn.is_constant() && pn.c0 == XReal(0.0));
    const bool active = w > 0 && !(p.is_constant() && p.c0 == XReal(0.0));
    if (!active_n && !active) continue;

    using K = Kernel::Kind;
    const bool cdf_n = active_n && kn.kind == K::cdf;
    const bool cdf = active && k.kind == K::cdf;
    if (cdf_n || cdf) {
      const bool constant = pn.is_constant() && p.is_constant();
      const bool one_sided = !active_n || !active;
      const bool same = kn.kind == K::cdf && k.kind == K::cdf && *kn.segment == *k.segment;
      if (!constant || !(one_sided || same))
        throw NoClosedForm("gap density against a CDF-only segment has no closed-form sign pattern");
      const double mass = (active_n ? pn.c0.value() * wn : 0.0) - (active ? p.c0.value() * w : 0.0);
      if (mass != 0.0) g.cells.push_back({Region{lo, hi, false}, mass});
      continue;
    }
    ExpSum density;
    if (active_n) density += pn.as_expsum() * ExpSum(kn.form.scale, kn.form.rate);
    if (active) density += -(p.as_expsum() * ExpSum(k.form.scale, k.form.rate));
    if (density.is_zero()) continue;
    auto sub = density.sign_changes(lo, hi);
    sub.push_back(hi);
    double a = lo;
    for (double b : sub) {
      const double mass = density.integral(a, b);
      if (!std::isfinite(mass)) throw NonIntegrable("gap density is not integrable on " + to_string(Region{a, b, false}));
      if (mass != 0.0) g.cells.push_back({Region{a, b, false}, mass});
      a = b;
    }
  }

  std::vector<double> locs;
  for (const auto& a : mn.atoms()) locs.push_back(a.at);
  for (const auto& a : m.atoms()) locs.push_back(a.at);
  locs = merge_unique(std::move(locs), {});
  for (double x : locs) {
    const double mass = finite_mass(fn(x), mn.atom_weight(x), x) - finite_mass(f(x), m.atom_weight(x), x);
    if (mass != 0.0) g.cells.push_back({Region{x, x, true}, mass});
  }
  return g;
}

HahnTotals hahn_totals(const SignedCellMeasure& g) {
  CompensatedSum pos;
  CompensatedSum neg;
  for (const auto& c : g.cells) {
    if (c.mass > 0)
      pos.add(c.mass);
    else if (c.mass < 0)
      neg.add(c.mass);
  }
  return HahnTotals{pos.value(), -neg.value()};
}

double uniform_fatou_gap(const SignedCellMeasure& g) { return -hahn_totals(g).negative; }

double uniform_sup_gap(const SignedCellMeasure& g) {
  const auto t = hahn_totals(g);
  return std::max(t.positive, t.negative);
}

std::vector<double> condition_undershoot(const FnSequence& seq, const PiecewiseFn& f, const FiniteMeasure& m, double eps) {
  if (!(eps > 0)) throw InvalidArgument("eps must be positive");
  std::vector<double> out(seq.n_max());
  parallel_for(seq.n_max(), [&](std::size_t i) {
    out[i] = set_mass(
        m, seq.at(i + 1), f, [eps](XReal a, XReal b) { return a <= b - XReal(eps); }, {-eps});
  });
  return out;
}

std::vector<double> conv_in_measure(const FnSequence& seq, const PiecewiseFn& f, const FiniteMeasure& m, double eps) {
  if (!(eps > 0)) throw InvalidArgument("eps must be positive");
  std::vector<double> out(seq.n_max());
  parallel_for(seq.n_max(), [&](std::size_t i) {
    out[i] = set_mass(
        m, seq.at(i + 1), f,
        [eps](XReal a, XReal b) {
          if (a == b) return false;
          if (!a.is_finite() || !b.is_finite()) return true;
          return std::fabs(a.value() - b.value()) >= eps;
        },
        {eps, -eps});
  });
  return out;
}

std::string to_string(Consistency c) {
  switch (c) {
    case Consistency::consistent: return "consistent";
    case Consistency::inconsistent: return "inconsistent";
    case Consistency::undetermined: return "undetermined";
  }
  return "undetermined";
}

std::string UniformReport::to_csv() const {
  std::string out = "n,inf_gap,sup_gap,cond_i,cond_ii\r\n";
  for (std::size_t i = 0; i < inf_gap.size(); ++i)
    out += std::to_string(i + 1) + "," + csv_number(inf_gap[i]) + "," + csv_number(sup_gap[i]) + "," +
           csv_number(cond_i[i]) + "," + csv_number(cond_ii[i]) + "\r\n";
  return out;
}

namespace {

Consistency compare(Trend gap, bool conditions_hold, bool conditions_fail) {
  if (converging(gap) && conditions_hold) return Consistency::consistent;
  if (gap == Trend::persistent && conditions_fail) return Consistency::consistent;
  if ((converging(gap) && conditions_fail) || (gap == Trend::persistent && conditions_hold))
    return Consistency::inconsistent;
  return Consistency::undetermined;
}

Conclusion from_trend(Trend t) {
  if (converging(t)) return Conclusion::holds;
  if (t == Trend::persistent) return Conclusion::violated;
  return Conclusion::inconclusive;
}

}  // namespace

UniformReport uniform_report(const Scenario& sc) {
  sc.validate();
  if (!sc.limit_function) throw InvalidArgument("scenario '" + sc.name + "' has no limit function");
  const PiecewiseFn& f = *sc.limit_function;
  const FiniteMeasure& m = sc.limit_measure;
  const std::size_t N = sc.n_max;
  const double K_max = sc.K_grid.back();

  UniformReport r;
  r.window_start = sc.window_start();
  r.inf_gap.assign(N, 0.0);
  r.sup_gap.assign(N, 0.0);
  r.variation.assign(N, 0.0);
  r.cond_ii.assign(N, 0.0);
  r.tv.assign(N, 0.0);
  parallel_for(N, [&](std::size_t i) {
    const PiecewiseFn fn = sc.f.at(i + 1);
    const FiniteMeasure mn = sc.measures.at(i + 1);
    const auto g = signed_gap(fn, mn, f, m);
    const auto t = hahn_totals(g);
    r.inf_gap[i] = -t.negative;
    r.sup_gap[i] = std::max(t.positive, t.negative);
    r.variation[i] = t.positive + t.negative;
    r.cond_ii[i] = tail_values(part(fn, PartSign::negative), mn, {K_max})[0];
    r.tv[i] = tv_norm_diff(mn, m);
  });
  r.cond_i = condition_undershoot(sc.f, f, m, sc.tol.eps);
  r.cond_i_dct = conv_in_measure(sc.f, f, m, sc.tol.eps);

  const double tol = sc.tol.gap;
  r.tv_trend = classify_trend(r.tv, 1, r.window_start, tol);
  r.fatou_trend = classify_trend(r.inf_gap, 1, r.window_start, tol);
  r.dct_trend = classify_trend(r.sup_gap, 1, r.window_start, tol);
  r.cond_i_trend = classify_trend(r.cond_i, 1, r.window_start, tol);
  r.cond_i_dct_trend = classify_trend(r.cond_i_dct, 1, r.window_start, tol);
  const auto window = r.window_start;
  r.aui_negative = verdict(
      tail_curve(sc.f.mapped([](const PiecewiseFn& x) { return part(x, PartSign::negative); }), sc.measures,
                 sc.K_grid, window, 8, sc.tol.stab),
      UiKind::aui, sc.tol.ui);
  r.aui_absolute = verdict(
      tail_curve(sc.f.mapped([](const PiecewiseFn& x) { return absolute(x); }), sc.measures, sc.K_grid, window, 8,
                 sc.tol.stab),
      UiKind::aui, sc.tol.ui);

  r.uniform_fatou = from_trend(r.fatou_trend);
  r.uniform_dct = from_trend(r.dct_trend);
  if (!converging(r.tv_trend)) {
    r.notes.push_back("total-variation convergence not observed (" + to_string(r.tv_trend) +
                      "); the uniform statements do not apply");
    return r;
  }
  const bool fatou_hold = converging(r.cond_i_trend) && r.aui_negative->passes;
  const bool fatou_fail = r.cond_i_trend == Trend::persistent || !r.aui_negative->passes;
  r.fatou_consistency = compare(r.fatou_trend, fatou_hold, fatou_fail);
  const bool dct_hold = converging(r.cond_i_dct_trend) && r.aui_absolute->passes;
  const bool dct_fail = r.cond_i_dct_trend == Trend::persistent || !r.aui_absolute->passes;
  r.dct_consistency = compare(r.dct_trend, dct_hold, dct_fail);
  r.fixture_bug = r.fatou_consistency == Consistency::inconsistent || r.dct_consistency == Consistency::inconsistent;
  if (r.fixture_bug) r.notes.push_back("observed gap trend contradicts the measure/integrability conditions");
  return r;
}

}  // namespace mlim
