#pragma once

// Random generators and brute-force oracles shared by the tests. The oracles
// only use point evaluation and break lists, never the integration code.

#include <algorithm>
#include <cmath>
#include <random>
#include <vector>

#include "mlim/fatou.hpp"
#include "mlim/measure.hpp"
#include "mlim/piecewise.hpp"

namespace mlim::testing {

inline std::vector<double> random_breaks(std::mt19937_64& rng, const Interval& d, int count) {
  std::uniform_real_distribution<double> u(d.lo, d.hi);
  std::vector<double> b;
  for (int i = 0; i < count; ++i) b.push_back(u(rng));
  std::sort(b.begin(), b.end());
  b.erase(std::unique(b.begin(), b.end()), b.end());
  return b;
}

/// Step function with values in [lo, hi], optionally some point values.
inline PiecewiseFn random_step(std::mt19937_64& rng, const Interval& d, double lo, double hi, int max_cells = 8,
                               bool with_points = true) {
  std::uniform_int_distribution<int> cells(1, max_cells);
  std::uniform_real_distribution<double> value(lo, hi);
  auto b = random_breaks(rng, d, cells(rng) + 1);
  if (b.size() < 2) b = {d.lo, d.hi};
  std::vector<Piece> pieces;
  for (std::size_t i = 0; i + 1 < b.size(); ++i) pieces.push_back(Piece::constant(value(rng)));
  std::vector<PointValue> points;
  if (with_points && std::bernoulli_distribution(0.5)(rng)) points.push_back({b[b.size() / 2], value(rng)});
  return PiecewiseFn(d, b, pieces, value(rng), points);
}

inline FiniteMeasure random_measure(std::mt19937_64& rng, const Interval& d, int max_atoms = 3, int max_cells = 4) {
  std::uniform_int_distribution<int> na(0, max_atoms);
  std::uniform_real_distribution<double> at(d.lo, d.hi);
  std::uniform_real_distribution<double> w(0.05, 1.0);
  std::vector<Atom> atoms;
  for (int i = na(rng); i > 0; --i) atoms.push_back({at(rng), w(rng)});
  std::vector<DensityCell> cells;
  auto b = random_breaks(rng, d, 2 * std::uniform_int_distribution<int>(1, max_cells)(rng));
  for (std::size_t i = 0; i + 1 < b.size(); i += 2) cells.push_back({b[i], b[i + 1], w(rng)});
  if (atoms.empty() && cells.empty()) atoms.push_back({at(rng), 1.0});
  return FiniteMeasure(d, atoms, cells);
}

/// Sum of f over atoms plus a midpoint rule on the merged breaks of f and
/// every density cell; exact for step functions.
inline long double step_integral_oracle(const PiecewiseFn& f, const FiniteMeasure& m) {
  long double acc = 0;
  for (const auto& a : m.atoms()) {
    const XReal v = f(a.at);
    acc += static_cast<long double>(v.value()) * a.weight;
  }
  for (const auto& c : m.cells()) {
    std::vector<double> cuts{c.lo, c.hi};
    for (double b : f.breaks())
      if (b > c.lo && b < c.hi) cuts.push_back(b);
    std::sort(cuts.begin(), cuts.end());
    for (std::size_t i = 0; i + 1 < cuts.size(); ++i) {
      const double mid = cuts[i] + (cuts[i + 1] - cuts[i]) / 2;
      acc += static_cast<long double>(f(mid).value()) * c.density * (cuts[i + 1] - cuts[i]);
    }
  }
  return acc;
}

/// Composite Simpson rule for smooth integrands on [a, b].
template <class F>
double simpson(F&& g, double a, double b, int panels = 2000) {
  const double h = (b - a) / panels;
  long double acc = g(a) + g(b);
  for (int i = 1; i < panels; ++i) acc += (i % 2 ? 4.0L : 2.0L) * g(a + i * h);
  return static_cast<double>(acc * h / 3);
}

/// Pointwise sum of two step functions (constant pieces only).
inline PiecewiseFn add_steps(const PiecewiseFn& a, const PiecewiseFn& b) {
  const Interval& d = a.domain();
  std::vector<double> cuts{d.lo, d.hi};
  for (const auto* f : {&a, &b})
    for (double x : f->breaks()) cuts.push_back(x);
  std::sort(cuts.begin(), cuts.end());
  cuts.erase(std::unique(cuts.begin(), cuts.end()), cuts.end());
  std::vector<Piece> pieces;
  for (std::size_t i = 0; i + 1 < cuts.size(); ++i) {
    const double mid = cuts[i] + (cuts[i + 1] - cuts[i]) / 2;
    pieces.push_back(Piece::constant(a(mid) + b(mid)));
  }
  std::vector<PointValue> points;
  for (double x : cuts) points.push_back({x, a(x) + b(x)});
  for (const auto* f : {&a, &b})
    for (const auto& p : f->points())
      if (std::find(cuts.begin(), cuts.end(), p.at) == cuts.end()) points.push_back({p.at, a(p.at) + b(p.at)});
  std::sort(points.begin(), points.end(), [](const PointValue& x, const PointValue& y) { return x.at < y.at; });
  points.erase(std::unique(points.begin(), points.end(), [](const PointValue& x, const PointValue& y) { return x.at == y.at; }),
               points.end());
  return PiecewiseFn(d, cuts, pieces, 0.0, points);
}

/// Lower (or upper) semicontinuous envelope of a step function on a bounded
/// domain: every break and point value takes the min (max) of its own value
/// and the neighbouring cell values.
inline PiecewiseFn step_envelope(const PiecewiseFn& f, bool lower) {
  const Interval& d = f.domain();
  std::vector<double> locs{d.lo, d.hi};
  for (double x : f.breaks()) locs.push_back(x);
  for (const auto& p : f.points()) locs.push_back(p.at);
  std::sort(locs.begin(), locs.end());
  locs.erase(std::unique(locs.begin(), locs.end()), locs.end());
  std::vector<PointValue> points;
  for (std::size_t i = 0; i < locs.size(); ++i) {
    XReal v = f(locs[i]);
    auto pick = [&](XReal w) { v = lower ? xmin(v, w) : xmax(v, w); };
    if (i > 0) pick(f(locs[i - 1] + (locs[i] - locs[i - 1]) / 2));
    if (i + 1 < locs.size()) pick(f(locs[i] + (locs[i + 1] - locs[i]) / 2));
    points.push_back({locs[i], v});
  }
  std::vector<Piece> pieces;
  for (std::size_t i = 0; i + 1 < locs.size(); ++i)
    pieces.push_back(Piece::constant(f(locs[i] + (locs[i + 1] - locs[i]) / 2)));
  return PiecewiseFn(d, locs, pieces, 0.0, points);
}

/// Fatou-hypothesis scenario on [0, 1]: mu_n = mu + an atom of weight c/n
/// (so ||mu_n - mu|| = c/n), f_n = f + e_n with f >= -8 and
/// 8c/(n mu(S)) <= e_n <= 8c/(n mu(S)) + 1/n. Then int f_n dmu_n >= int f dmu
/// for every n and the epi-liminf of f_n is the lower envelope of f.
inline Scenario random_fatou_scenario(std::mt19937_64& rng, std::size_t n_max) {
  const Interval unit{0.0, 1.0};
  const FiniteMeasure mu = random_measure(rng, unit);
  const double mass = total_mass(mu);
  const double c = std::uniform_real_distribution<double>(0.01, 0.5)(rng);
  const double p = std::uniform_real_distribution<double>(0.0, 1.0)(rng);
  const PiecewiseFn f = random_step(rng, unit, -8, 8);
  std::vector<PiecewiseFn> fs;
  for (std::size_t n = 1; n <= n_max; ++n) {
    const double inv = 1.0 / static_cast<double>(n);
    const PiecewiseFn noise = random_step(rng, unit, 0.0, inv, 4, false);
    fs.push_back(add_steps(f, add_steps(noise, PiecewiseFn::constant(unit, 8 * c * inv / mass))));
  }
  Scenario sc;
  sc.name = "random_fatou";
  sc.domain = unit;
  sc.n_max = n_max;
  sc.measures = MeasureSequence(unit, n_max, [mu, c, p](std::size_t n) { return mu.with_atom(p, c / static_cast<double>(n)); });
  sc.limit_measure = mu;
  sc.f = FnSequence(unit, n_max, [fs](std::size_t n) { return fs[n - 1]; });
  sc.f.liminf_certificate = step_envelope(f, true);
  sc.f.limsup_certificate = step_envelope(f, false);
  sc.K_grid = {0.5, 1, 2, 4, 8, 16};
  sc.schedule = EpiSchedule::standard(n_max);
  sc.certificate = CertificateKind::tv;
  return sc;
}

}  // namespace mlim::testing
