#include "mlim/fatou.hpp"

#include <algorithm>
#include <cmath>

#include "mlim/errors.hpp"
#include "mlim/parallel.hpp"

namespace mlim {

namespace {

bool agree(XReal a, XReal b, double tol) {
  if (a == b) return true;
  if (!a.is_finite() || !b.is_finite()) return false;
  return std::fabs(a.value() - b.value()) <= tol;
}

SeqLimit window_extremum(const std::vector<XReal>& values, std::size_t window, double stab_tol, bool take_min) {
  if (values.empty() || window == 0) throw InvalidArgument("sequence limit over an empty window");
  window = std::min(window, values.size());
  SeqLimit r;
  r.window_start = values.size() - window + 1;
  r.window_end = values.size();
  XReal lo = values[r.window_start - 1];
  XReal hi = lo;
  for (std::size_t i = r.window_start - 1; i < values.size(); ++i) {
    lo = xmin(lo, values[i]);
    hi = xmax(hi, values[i]);
  }
  r.value = take_min ? lo : hi;
  r.stabilized = agree(lo, hi, stab_tol);
  return r;
}

std::size_t window_width(const Scenario& sc) { return sc.n_max - sc.window_start() + 1; }

std::vector<XReal> parallel_integrals(std::size_t n_max, const std::function<XReal(std::size_t)>& body) {
  std::vector<XReal> out(n_max);
  parallel_for(n_max, [&](std::size_t i) { out[i] = body(i + 1); });
  return out;
}

struct DominanceScan {
  bool holds = true;
  std::optional<std::size_t> index;
  std::optional<Region> witness;
};

DominanceScan scan_dominance(std::size_t n_max, const std::function<DominanceResult(std::size_t)>& check) {
  std::vector<DominanceResult> res(n_max);
  parallel_for(n_max, [&](std::size_t i) { res[i] = check(i + 1); });
  DominanceScan out;
  for (std::size_t i = 0; i < n_max; ++i) {
    if (!res[i].holds) {
      out.holds = false;
      out.index = i + 1;
      out.witness = res[i].witness;
      break;
    }
  }
  return out;
}

const FnSequence& require_g(const Scenario& sc) {
  if (!sc.g) throw InvalidArgument("scenario '" + sc.name + "' has no g_n sequence");
  return *sc.g;
}

UiVerdict aui_of(const Scenario& sc, const std::function<PiecewiseFn(const PiecewiseFn&)>& op) {
  const auto curve = tail_curve(sc.f.mapped(op), sc.measures, sc.K_grid, sc.window_start(), 8, sc.tol.stab);
  return verdict(curve, UiKind::aui, sc.tol.ui);
}

}  // namespace

void Scenario::validate() const {
  if (n_max == 0) throw InvalidArgument("n_max must be positive");
  if (f.n_max() != n_max || measures.n_max() != n_max || (g && g->n_max() != n_max))
    throw InvalidArgument("scenario '" + name + "': index ranges disagree with n_max");
  if (!(f.domain() == domain) || !(measures.domain() == domain) || !(limit_measure.domain() == domain) ||
      (g && !(g->domain() == domain)) || (limit_function && !(limit_function->domain() == domain)))
    throw DomainMismatch("scenario '" + name + "': objects on different domains");
  if (K_grid.empty()) throw InvalidArgument("scenario '" + name + "': empty K grid");
}

std::string to_string(Conclusion c) {
  switch (c) {
    case Conclusion::holds: return "holds";
    case Conclusion::violated: return "violated";
    case Conclusion::inconclusive: return "inconclusive";
  }
  return "inconclusive";
}

SeqLimit seq_liminf(const std::vector<XReal>& values, std::size_t window, double stab_tol) {
  return window_extremum(values, window, stab_tol, true);
}

SeqLimit seq_limsup(const std::vector<XReal>& values, std::size_t window, double stab_tol) {
  return window_extremum(values, window, stab_tol, false);
}

std::vector<XReal> integral_series(const FnSequence& seq, const MeasureSequence& measures) {
  if (seq.n_max() != measures.n_max()) throw InvalidArgument("function and measure index ranges differ");
  return parallel_integrals(seq.n_max(), [&](std::size_t n) { return integrate(seq.at(n), measures.at(n)); });
}

std::vector<BankFn> default_bank(const Interval& domain) {
  const double lo = domain.lo;
  const double hi = std::isfinite(domain.hi) ? domain.hi : lo + 64.0;
  const double w = (hi - lo) / 4;
  std::vector<BankFn> bank;
  bank.emplace_back(LinearFn(domain, {lo}, {1.0}));
  for (int q = 0; q < 4; ++q) bank.emplace_back(LinearFn::ramp(domain, lo + q * w, 0.0, lo + (q + 1) * w, 1.0));
  return bank;
}

GapReport fatou_report(const Scenario& sc) {
  sc.validate();
  GapReport r;
  r.integrals = integral_series(sc.f, sc.measures);
  r.rhs_window = seq_liminf(r.integrals, window_width(sc), sc.tol.stab);
  r.rhs = r.rhs_window.value;
  r.rhs_certainty = r.rhs_window.stabilized ? Certainty::exact : Certainty::window_truncated;
  const auto epi = epi_integral(sc.f, sc.limit_measure, EpiSide::liminf, sc.schedule, sc.epi_grid);
  r.lhs = epi.value;
  r.lhs_certainty = epi.certainty;
  r.lhs_method = epi.method;

  try {
    r.aui_negative_part = aui_of(sc, [](const PiecewiseFn& x) { return part(x, PartSign::negative); });
  } catch (const Error& e) {
    r.notes.push_back(std::string("a.u.i. diagnostic unavailable: ") + e.what());
  }
  try {
    r.weak = weak_gap_bank(sc.measures, sc.limit_measure, sc.bank.empty() ? default_bank(sc.domain) : sc.bank,
                           sc.certificate, sc.tol.gap);
  } catch (const Error& e) {
    r.notes.push_back(std::string("weak-convergence diagnostic unavailable: ") + e.what());
  }

  if (total_mass(sc.limit_measure) == 0.0) {
    r.degenerate = true;
    r.raw_rhs = r.rhs;
    r.lhs = 0.0;
    r.rhs = 0.0;
    r.gap = 0.0;
    r.conclusion = Conclusion::holds;
    r.notes.push_back("limit measure has zero mass; both sides reported as 0");
    return r;
  }

  r.gap = gap_difference(r.rhs, r.lhs);
  if (r.gap >= XReal(-sc.tol.gap))
    r.conclusion = Conclusion::holds;
  else if (r.lhs_certainty == Certainty::exact && r.rhs_certainty == Certainty::exact)
    r.conclusion = Conclusion::violated;
  else
    r.conclusion = Conclusion::inconclusive;

  if (r.conclusion == Conclusion::violated) {
    const bool aui = r.aui_negative_part && r.aui_negative_part->passes;
    const bool weak = r.weak && r.weak->certified;
    r.theorem_contradiction = aui && weak;
    if (!aui) r.notes.push_back("negative parts are not a.u.i.; the inequality is not guaranteed");
    if (!weak) r.notes.push_back("weak convergence is not certified");
  }
  if (!r.weak || !r.weak->certified) r.notes.push_back("weak convergence hypothesis: bank evidence only");
  return r;
}

namespace {

MinorantReport minorant_probe(const Scenario& sc, EpiSide side) {
  sc.validate();
  const FnSequence& g = require_g(sc);
  MinorantReport r;
  r.variant = to_string(side);
  const auto dom = scan_dominance(sc.n_max, [&](std::size_t n) { return dominates(sc.f.at(n), g.at(n)); });
  r.dominance = dom.holds;
  r.dominance_index = dom.index;
  r.dominance_witness = dom.witness;

  const auto epi = epi_integral(g, sc.limit_measure, side, sc.schedule, sc.epi_grid);
  r.lhs = epi.value;
  r.lhs_certainty = epi.certainty;
  const auto rhs = seq_liminf(integral_series(g, sc.measures), window_width(sc), sc.tol.stab);
  r.rhs = rhs.value;
  r.rhs_certainty = rhs.stabilized ? Certainty::exact : Certainty::window_truncated;

  r.finite = r.lhs > XReal::neg_inf();
  r.inequality = gap_difference(r.rhs, r.lhs) >= XReal(-sc.tol.gap);
  const bool lhs_exact = r.lhs_certainty == Certainty::exact;
  const bool rhs_exact = r.rhs_certainty == Certainty::exact;
  if (r.dominance && r.finite && r.inequality)
    r.conclusion = Conclusion::holds;
  else if (!r.dominance || (!r.finite && lhs_exact) || (!r.inequality && lhs_exact && rhs_exact))
    r.conclusion = Conclusion::violated;
  else
    r.conclusion = Conclusion::inconclusive;
  return r;
}

}  // namespace

MinorantReport minorant_check(const Scenario& sc) { return minorant_probe(sc, EpiSide::limsup); }

MinorantReport weakened_minorant_probe(const Scenario& sc) { return minorant_probe(sc, EpiSide::liminf); }

MajorantReport majorant_check(const Scenario& sc) {
  sc.validate();
  const FnSequence& g = require_g(sc);
  MajorantReport r;
  const auto dom = scan_dominance(sc.n_max, [&](std::size_t n) { return dominates(g.at(n), absolute(sc.f.at(n))); });
  r.dominance = dom.holds;
  r.dominance_index = dom.index;
  r.dominance_witness = dom.witness;

  const auto lhs = seq_limsup(integral_series(g, sc.measures), window_width(sc), sc.tol.stab);
  r.lhs = lhs.value;
  r.lhs_certainty = lhs.stabilized ? Certainty::exact : Certainty::window_truncated;
  const auto epi = epi_integral(g, sc.limit_measure, EpiSide::liminf, sc.schedule, sc.epi_grid);
  r.rhs = epi.value;
  r.rhs_certainty = epi.certainty;

  r.finite = r.rhs < XReal::pos_inf();
  r.inequality = gap_difference(r.rhs, r.lhs) >= XReal(-sc.tol.gap);
  const bool exact = r.lhs_certainty == Certainty::exact && r.rhs_certainty == Certainty::exact;
  if (r.dominance && r.finite && r.inequality)
    r.conclusion = Conclusion::holds;
  else if (!r.dominance || (!r.finite && r.rhs_certainty == Certainty::exact) || (!r.inequality && exact))
    r.conclusion = Conclusion::violated;
  else
    r.conclusion = Conclusion::inconclusive;
  return r;
}

DctReport dct_report(const Scenario& sc) {
  sc.validate();
  DctReport d;
  GapReport& r = d.gap;
  r.integrals = integral_series(sc.f, sc.measures);
  r.rhs_window = seq_liminf(r.integrals, window_width(sc), sc.tol.stab);
  r.rhs = r.rhs_window.value;
  r.rhs_certainty = r.rhs_window.stabilized ? Certainty::exact : Certainty::window_truncated;
  d.rhs_limsup = seq_limsup(r.integrals, window_width(sc), sc.tol.stab).value;
  const auto epi = epi_integral(sc.f, sc.limit_measure, EpiSide::liminf, sc.schedule, sc.epi_grid);
  r.lhs = epi.value;
  r.lhs_certainty = epi.certainty;
  r.lhs_method = epi.method;
  r.gap = gap_difference(r.rhs, r.lhs);

  const auto grid = sc.epi_grid.empty() ? default_epi_grid(sc.domain, sc.limit_measure) : sc.epi_grid;
  d.existence = epi_limit_exists(sc.f, sc.limit_measure, grid, sc.schedule, sc.tol.epi);
  d.limit_exists = d.existence.exists_almost_everywhere;
  try {
    d.aui_absolute = aui_of(sc, [](const PiecewiseFn& x) { return absolute(x); });
  } catch (const Error& e) {
    r.notes.push_back(std::string("a.u.i. diagnostic unavailable: ") + e.what());
  }
  if (sc.g) {
    try {
      d.majorant = majorant_check(sc);
    } catch (const Error& e) {
      r.notes.push_back(std::string("majorant diagnostic unavailable: ") + e.what());
    }
  }
  try {
    r.weak = weak_gap_bank(sc.measures, sc.limit_measure, sc.bank.empty() ? default_bank(sc.domain) : sc.bank,
                           sc.certificate, sc.tol.gap);
  } catch (const Error& e) {
    r.notes.push_back(std::string("weak-convergence diagnostic unavailable: ") + e.what());
  }
  const bool aui = d.aui_absolute && d.aui_absolute->passes;
  const bool majorant = d.majorant && d.majorant->conclusion == Conclusion::holds;
  d.sufficient = d.limit_exists && (aui || majorant);
  d.equality = agree(r.rhs, d.rhs_limsup, sc.tol.gap) && agree(r.lhs, r.rhs, sc.tol.gap);

  if (d.equality)
    r.conclusion = Conclusion::holds;
  else if (r.lhs_certainty == Certainty::exact && r.rhs_certainty == Certainty::exact)
    r.conclusion = Conclusion::violated;
  else
    r.conclusion = Conclusion::inconclusive;

  if (d.equality && !d.sufficient) r.notes.push_back("equality without sufficient condition");
  if (r.conclusion == Conclusion::violated) {
    r.theorem_contradiction = d.sufficient && d.existence.mass_exact && r.weak && r.weak->certified;
    if (!d.sufficient) r.notes.push_back("sufficient condition absent; equality is not guaranteed");
  }
  return d;
}

Theorem26Report theorem26_probe(const Scenario& sc) {
  sc.validate();
  const FnSequence& g = require_g(sc);
  std::vector<XReal> sups(sc.n_max);
  parallel_for(sc.n_max, [&](std::size_t i) { sups[i] = supremum(g.at(i + 1)); });
  for (std::size_t i = 0; i < sups.size(); ++i)
    if (!sups[i].is_finite() && sups[i] > XReal(0.0))
      throw PreconditionFailed("g_" + std::to_string(i + 1) + " is not bounded above");
  const std::size_t ws = sc.window_start();
  XReal early = XReal::neg_inf();
  XReal late = XReal::neg_inf();
  for (std::size_t i = 0; i < sups.size(); ++i) {
    XReal& bucket = i + 1 < ws ? early : late;
    bucket = xmax(bucket, sups[i]);
  }
  if (ws > 1 && late > early + XReal(sc.tol.gap))
    throw PreconditionFailed("sup g_n keeps growing over the trailing window (" + to_string(early) + " before, " +
                             to_string(late) + " inside); minorants are not uniformly bounded above");

  Theorem26Report r;
  r.upper_bound = xmax(early, late);
  r.minorant = minorant_check(sc);
  if (r.minorant.conclusion == Conclusion::holds) {
    r.shift = shift_search(sc.f.mapped([](const PiecewiseFn& x) { return part(x, PartSign::negative); }), sc.measures,
                           sc.tol.ui, sc.K_grid.back(), sc.n_max - 1);
    r.inconsistency = !r.shift.has_value();
  }
  return r;
}

}  // namespace mlim
