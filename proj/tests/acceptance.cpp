// Acceptance harness: one PASS/FAIL line per criterion, nonzero exit on any
// failure. Tolerances are pinned here and nowhere else.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <numbers>
#include <random>
#include <sstream>
#include <string>

#include "mlim/compensated.hpp"
#include "mlim/gallery.hpp"
#include "mlim/integrability.hpp"
#include "mlim/uniform.hpp"
#include "support.hpp"

using namespace mlim;
using mlim::testing::random_fatou_scenario;
using mlim::testing::random_measure;
using mlim::testing::random_step;

namespace {

constexpr double kLn2 = std::numbers::ln2;

struct Outcome {
  bool pass = true;
  std::ostringstream why;
  void require(bool ok, const std::string& what) {
    if (!ok && pass) why << what;
    pass = pass && ok;
  }
};

int failures = 0;

void criterion(const char* id, const char* title, double budget_s, const std::function<void(Outcome&)>& body) {
  Outcome o;
  const auto t0 = std::chrono::steady_clock::now();
  try {
    body(o);
  } catch (const std::exception& e) {
    o.require(false, std::string("exception: ") + e.what());
  }
  const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  if (budget_s > 0) o.require(secs < budget_s, "runtime " + std::to_string(secs) + " s over budget");
  std::printf("[%s] %s %s (%.3f s)%s%s\n", o.pass ? "PASS" : "FAIL", id, title, secs, o.pass ? "" : ": ",
              o.pass ? "" : o.why.str().c_str());
  if (!o.pass) ++failures;
}

std::string num(double x) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", x);
  return buf;
}

FnSequence negative_parts(const FnSequence& f) {
  return f.mapped([](const PiecewiseFn& x) { return part(x, PartSign::negative); });
}

bool near(XReal x, double want, double tol) { return x.is_finite() && std::fabs(x.value() - want) <= tol; }

// Exhaustive inf and sup |.| over subsets, summed in cell order.
std::pair<double, double> enumerate_subsets(const SignedCellMeasure& g) {
  const std::size_t k = g.cells.size();
  double lo = 0.0;
  double hi = 0.0;
  for (std::uint32_t mask = 0; mask < (1u << k); ++mask) {
    CompensatedSum s;
    for (std::size_t i = 0; i < k; ++i)
      if (mask & (1u << i)) s.add(g.cells[i].mass);
    lo = std::min(lo, s.value());
    hi = std::max(hi, std::fabs(s.value()));
  }
  return {lo, hi};
}

}  // namespace

int main() {
  criterion("AC1", "staircase tails and integrals", 1.0, [](Outcome& o) {
    const Scenario sc = build_fixture("ex3_1", {.n_max = 64});
    const std::vector<double> Ks{0.5, 1, 2, 3, 4, 5, 6, 7, 8, 9, 10};
    const double tol = 1e-9 + staircase_residual();
    for (std::size_t n = 1; n <= 64; ++n) {
      const auto tails = tail_values(sc.f.at(n), sc.measures.at(n), Ks);
      for (std::size_t k = 0; k < Ks.size(); ++k) {
        const double c = std::ceil(Ks[k]);
        const double want = (c + 1) / std::ldexp(1.0, static_cast<int>(c) - 1);
        o.require(std::fabs(tails[k] - want) <= tol,
                  "tail n=" + std::to_string(n) + " K=" + num(Ks[k]) + " got " + num(tails[k]));
      }
    }
    const auto integrals = integral_series(sc.f, sc.measures);
    for (std::size_t n = 0; n < integrals.size(); ++n)
      o.require(near(integrals[n], -2.0, 1e-9), "integral n=" + std::to_string(n + 1));
  });

  criterion("AC2", "escaping block constants and verdicts", 10.0, [](Outcome& o) {
    const Scenario sc = build_fixture("ex3_3", {.n_max = 20});
    for (std::size_t n = 1; n <= 20; ++n) {
      o.require(near(integrate(sc.f.at(n), sc.limit_measure), -1.0 / (2 * kLn2), 1e-9), "int f_n n=" + std::to_string(n));
      o.require(near(integrate(sc.g->at(n), sc.limit_measure), -1.0 / kLn2, 1e-6), "int g_n n=" + std::to_string(n));
    }
    const auto epi_g = epi_integral(*sc.g, sc.limit_measure, EpiSide::liminf, sc.schedule, sc.epi_grid);
    o.require(near(epi_g.value, -1.0 / kLn2, 1e-6), "epi integral of g " + to_string(epi_g.value));
    const auto fr = fatou_report(sc);
    o.require(fr.conclusion == Conclusion::violated, "fatou not violated");
    o.require(near(fr.lhs, 0.0, 1e-9) && near(fr.rhs, -1.0 / (2 * kLn2), 1e-9),
              "fatou sides " + to_string(fr.lhs) + " / " + to_string(fr.rhs));
    const auto wr = weakened_minorant_probe(sc);
    o.require(wr.conclusion == Conclusion::holds, "weakened probe does not hold");
    o.require(near(wr.lhs, -1.0 / kLn2, 1e-6) && near(wr.rhs, -1.0 / kLn2, 1e-6), "weakened sides");
    const auto mr = minorant_check(sc);
    o.require(!mr.inequality, "minorant inequality unexpectedly holds");
    o.require(near(mr.lhs, 0.0, 1e-9) && near(mr.rhs, -1.0 / kLn2, 1e-6),
              "minorant sides " + to_string(mr.lhs) + " / " + to_string(mr.rhs));
  });

  criterion("AC3", "two-sided spike", 0.0, [](Outcome& o) {
    const Scenario sc = build_fixture("ex3_2");
    const auto curve = tail_curve(negative_parts(sc.f), sc.measures, sc.K_grid, sc.window_start());
    for (std::size_t k = 0; k < sc.K_grid.size(); ++k) {
      if (sc.K_grid[k] > static_cast<double>(sc.n_max) / 2) continue;
      o.require(curve.sup[k] == 1.0 && curve.limsup_window[k] == 1.0, "tail at K=" + num(sc.K_grid[k]));
    }
    o.require(!verdict(curve, UiKind::aui, sc.tol.ui).passes, "aui passes");
    o.require(!shift_search(negative_parts(sc.f), sc.measures, sc.tol.ui, sc.K_grid.back(), 50), "shift found");
    const auto d = dct_report(sc);
    o.require(d.equality, "dct equality fails");
    o.require(near(d.gap.lhs, 0.0, 1e-12) && near(d.gap.rhs, 0.0, 1e-12), "dct sides not 0 = 0");
    const auto u = uniform_report(sc);
    for (double g : u.sup_gap) o.require(std::fabs(g - 1.0) <= 1e-12, "uniform sup gap " + num(g));
  });

  criterion("AC4", "Fatou inequality on random scenarios", 0.0, [](Outcome& o) {
    std::mt19937_64 rng(2024);
    for (int trial = 0; trial < 200; ++trial) {
      const Scenario sc = random_fatou_scenario(rng, 32);
      const auto fr = fatou_report(sc);
      o.require(fr.gap.is_finite() ? fr.gap.value() >= -1e-9 : fr.gap.is_pos_inf(),
                "trial " + std::to_string(trial) + " gap " + to_string(fr.gap));
      o.require(fr.conclusion != Conclusion::violated, "trial " + std::to_string(trial) + " violated");
    }
  });

  criterion("AC5", "Hahn totals equal subset enumeration", 5.0, [](Outcome& o) {
    std::mt19937_64 rng(55);
    std::uniform_real_distribution<double> mass(-1.0, 1.0);
    const Interval unit{0.0, 1.0};
    int built = 0;
    while (built < 200) {
      SignedCellMeasure g;
      if (built % 2 == 0) {
        const int k = std::uniform_int_distribution<int>(0, 15)(rng);
        for (int i = 0; i < k; ++i) g.cells.push_back({Region{i / 16.0, (i + 1) / 16.0, false}, mass(rng)});
      } else {
        const auto m = random_measure(rng, unit, 2, 3);
        const auto mn = random_measure(rng, unit, 2, 3);
        g = signed_gap(random_step(rng, unit, -4, 4, 4), mn, random_step(rng, unit, -4, 4, 4), m);
        if (g.cells.size() > 15) continue;
      }
      ++built;
      const auto [lo, hi] = enumerate_subsets(g);
      o.require(uniform_fatou_gap(g) == lo, "inf mismatch " + num(uniform_fatou_gap(g)) + " vs " + num(lo));
      o.require(uniform_sup_gap(g) == hi, "sup mismatch " + num(uniform_sup_gap(g)) + " vs " + num(hi));
    }
  });

  criterion("AC6", "aui iff a shift exists", 0.0, [](Outcome& o) {
    struct Case {
      const char* id;
      bool aui;
      std::optional<std::size_t> shift;
    };
    for (const Case& c : {Case{"ex3_1", true, 0}, Case{"ex3_2", false, std::nullopt}, Case{"ex3_1_shifted", true, 1}}) {
      const Scenario sc = build_fixture(c.id);
      const auto neg = negative_parts(sc.f);
      const auto curve = tail_curve(neg, sc.measures, sc.K_grid, sc.window_start());
      const bool aui = verdict(curve, UiKind::aui, sc.tol.ui).passes;
      const auto shift = shift_search(neg, sc.measures, sc.tol.ui, sc.K_grid.back(), std::min<std::size_t>(50, sc.n_max - 1));
      o.require(aui == c.aui, std::string(c.id) + " aui");
      o.require(shift == c.shift, std::string(c.id) + " shift");
      o.require(aui == shift.has_value(), std::string(c.id) + " equivalence");
    }
  });

  criterion("AC7", "invariant suite", 0.0, [](Outcome& o) {
    std::mt19937_64 rng(7);
    const Interval unit{0.0, 1.0};
    std::uniform_real_distribution<double> u(0.0, 1.0);

    for (const auto& id : fixture_ids()) {
      const Scenario sc = build_fixture(id);
      const auto curve = tail_curve(negative_parts(sc.f), sc.measures, sc.K_grid, sc.window_start());
      for (std::size_t k = 0; k < curve.K_grid.size(); ++k) {
        o.require(curve.sup[k] >= curve.limsup_window[k], id + " sup below windowed limsup");
        if (k > 0) o.require(curve.sup[k] <= curve.sup[k - 1], id + " tail curve increases");
        for (const auto& row : curve.rows)
          if (k > 0) o.require(row[k] <= row[k - 1], id + " row increases in K");
      }
    }

    for (int trial = 0; trial < 20; ++trial) {
      const std::size_t n_max = 16;
      std::vector<PiecewiseFn> fs;
      for (std::size_t n = 0; n < n_max; ++n) fs.push_back(random_step(rng, unit, -5, 5));
      const FnSequence seq(unit, n_max, [fs](std::size_t n) { return fs[n - 1]; });
      std::vector<double> pts;
      for (int i = 0; i < 50; ++i) pts.push_back(u(rng));
      const auto sched = EpiSchedule::standard(n_max);
      const auto lo = epi_limit_batch(seq, pts, sched, EpiSide::liminf, true);
      const auto hi = epi_limit_batch(seq, pts, sched, EpiSide::limsup, true);
      for (std::size_t i = 0; i < pts.size(); ++i) o.require(lo[i].value <= hi[i].value, "epi liminf above limsup");
    }

    for (int trial = 0; trial < 200; ++trial) {
      const auto f = random_step(rng, unit, -10, 10);
      const auto m = random_measure(rng, unit);
      const auto parts = integrate_parts(f, m);
      o.require(integrate(f, m) == parts.positive - parts.negative, "positive/negative identity");
    }

    for (int trial = 0; trial < 100; ++trial) {
      const auto a = random_measure(rng, unit);
      const auto b = random_measure(rng, unit);
      const auto c = random_measure(rng, unit);
      o.require(tv_norm_diff(a, c) <= tv_norm_diff(a, b) + tv_norm_diff(b, c) + 1e-12, "tv triangle");
    }

    for (int trial = 0; trial < 200; ++trial) {
      const auto g = signed_gap(random_step(rng, unit, -4, 4), random_measure(rng, unit), random_step(rng, unit, -4, 4),
                                random_measure(rng, unit));
      o.require(uniform_fatou_gap(g) <= 0.0, "uniform Fatou gap positive");
    }
    for (const char* id : {"ex3_2", "classic_dct", "const_minus_one"}) {
      const auto rep = uniform_report(build_fixture(id));
      for (double gap : rep.inf_gap) o.require(gap <= 0.0, std::string(id) + " uniform Fatou gap positive");
    }
  });

  return failures == 0 ? 0 : 1;
}
