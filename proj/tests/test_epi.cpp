#include <doctest.h>

#include <numbers>
#include <random>

#include "mlim/epi.hpp"
#include "mlim/errors.hpp"
#include "mlim/gallery.hpp"
#include "support.hpp"

using namespace mlim;

namespace {

const Interval unit{0.0, 1.0};
const double ln2 = std::numbers::ln2;

FnSequence without_certificates(const FnSequence& f) {
  return f.mapped([](const PiecewiseFn& x) { return x; });
}

}  // namespace

TEST_CASE("standard schedule") {
  const auto s = EpiSchedule::standard(64);
  CHECK(s.N == std::vector<std::size_t>{2, 4, 8, 16, 32, 64});
  CHECK(s.delta.back() == 1.0 / 64);
  CHECK_NOTHROW(s.validate());
  CHECK(EpiSchedule::standard(1 << 20).size() == 12);
  CHECK_THROWS_AS(EpiSchedule::standard(1).validate(), ScheduleExhausted);
  EpiSchedule bad{{2, 2}, {0.5, 0.25}, 8};
  CHECK_THROWS_AS(bad.validate(), InvalidArgument);
}

TEST_CASE("ball extremum and semicontinuous envelopes") {
  const PiecewiseFn f(unit, {0.0, 0.5}, {Piece::constant(-1.0)}, 2.0, {{0.75, -5.0}});
  CHECK(ball_extremum(f, 0.6, 0.05, EpiSide::liminf) == XReal(2.0));
  CHECK(ball_extremum(f, 0.6, 0.2, EpiSide::liminf) == XReal(-5.0));
  CHECK(ball_extremum(f, 0.52, 0.05, EpiSide::liminf) == XReal(-1.0));
  CHECK(ball_extremum(f, 0.52, 0.05, EpiSide::limsup) == XReal(2.0));
  CHECK(envelope_at(f, 0.5, EpiSide::liminf) == XReal(-1.0));
  CHECK(envelope_at(f, 0.5, EpiSide::limsup) == XReal(2.0));
  CHECK(envelope_at(f, 0.75, EpiSide::liminf) == XReal(-5.0));
  CHECK(envelope_at(f, 0.75, EpiSide::limsup) == XReal(2.0));
}

TEST_CASE("certificates, eventual forms and scans") {
  const auto sc = build_fixture("ex3_2");
  const auto at0 = epi_liminf(sc.f, 0.0, sc.schedule);
  CHECK(at0.value.is_neg_inf());
  CHECK(at0.certainty == Certainty::exact);
  CHECK(epi_limsup(sc.f, 0.0, sc.schedule).value.is_pos_inf());

  const auto plain = without_certificates(sc.f);
  for (double s : {-0.7, -0.3, 0.2, 0.9}) {
    const auto scanned = epi_liminf(plain, s, sc.schedule);
    CHECK(scanned.source == "scan");
    CHECK(scanned.value == epi_liminf(sc.f, s, sc.schedule).value);
  }
  CHECK(epi_liminf(plain, 0.0, sc.schedule).value == XReal(-100.0));

  auto with_form = plain;
  with_form.eventual_form = sc.f.eventual_form;
  const auto ev = epi_liminf(with_form, 0.5, sc.schedule);
  CHECK(ev.value == XReal(0.0));
  CHECK(ev.certainty == Certainty::exact);
}

TEST_CASE("escaping block: eventual form settles every point") {
  const auto sc = build_fixture("ex3_3", {.n_max = 16});
  auto f = without_certificates(sc.f);
  f.eventual_form = sc.f.eventual_form;
  for (double s : {0.0, 0.5, 3.0, 7.5}) {
    const auto e = epi_liminf(f, s, sc.schedule);
    CHECK(e.value == XReal(0.0));
    CHECK(e.source == "eventual_form");
  }
}

TEST_CASE("epi-liminf never exceeds epi-limsup") {
  std::mt19937_64 rng(41);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  std::vector<PiecewiseFn> fs;
  for (int n = 0; n < 32; ++n) fs.push_back(testing::random_step(rng, unit, -5, 5));
  const FnSequence f(unit, 32, [fs](std::size_t n) { return fs[n - 1]; });
  const auto sched = EpiSchedule::standard(32);
  std::vector<double> points;
  for (int i = 0; i < 1000; ++i) points.push_back(u(rng));
  const auto lo = epi_limit_batch(f, points, sched, EpiSide::liminf);
  const auto hi = epi_limit_batch(f, points, sched, EpiSide::limsup);
  for (std::size_t i = 0; i < points.size(); ++i) {
    CHECK(lo[i].value <= hi[i].value);
    for (std::size_t j = 1; j < lo[i].inner.size(); ++j) CHECK(lo[i].inner[j] >= lo[i].inner[j - 1]);
  }
  const auto single = epi_liminf(f, points[17], sched);
  CHECK(single.value == lo[17].value);
}

TEST_CASE("epi-liminf never exceeds epi-limsup on the fixtures") {
  std::mt19937_64 rng(42);
  for (const char* id : {"ex3_1", "ex3_2", "ex3_3", "classic_spike"}) {
    const auto sc = build_fixture(id, {.n_max = 16});
    const double hi = std::isfinite(sc.domain.hi) ? sc.domain.hi : 30.0;
    std::uniform_real_distribution<double> u(sc.domain.lo, hi);
    std::vector<double> points{sc.domain.lo};
    for (int i = 0; i < 1000; ++i) points.push_back(u(rng));
    const auto lo = epi_limit_batch(sc.f, points, sc.schedule, EpiSide::liminf);
    const auto up = epi_limit_batch(sc.f, points, sc.schedule, EpiSide::limsup);
    for (std::size_t i = 0; i < points.size(); ++i) CHECK(lo[i].value <= up[i].value);
  }
}

TEST_CASE("limit existence and exception mass") {
  const auto sc2 = build_fixture("ex3_2");
  const auto e2 = epi_limit_exists(sc2.f, sc2.limit_measure, default_epi_grid(sc2.domain, sc2.limit_measure), sc2.schedule, 1e-9);
  CHECK(e2.exception_mass == 0.0);
  CHECK(e2.mass_exact);
  CHECK(e2.exists_almost_everywhere);

  const auto sc3 = build_fixture("ex3_3", {.n_max = 10});
  const auto e3 = epi_limit_exists(*sc3.g, sc3.limit_measure, default_epi_grid(sc3.domain, sc3.limit_measure), sc3.schedule, 1e-9);
  CHECK(e3.exception_mass == doctest::Approx(0.75 / ln2).epsilon(1e-14));
  CHECK_FALSE(e3.exists_almost_everywhere);
}

TEST_CASE("epi integrals") {
  const auto sc3 = build_fixture("ex3_3", {.n_max = 10});
  const auto g = epi_integral(*sc3.g, sc3.limit_measure, EpiSide::liminf, sc3.schedule, {});
  CHECK(g.value.value() == doctest::Approx(-1.0 / ln2).epsilon(1e-12));
  CHECK(g.certainty == Certainty::exact);
  CHECK(g.method == "certificate");

  const auto sc1 = build_fixture("ex3_1");
  CHECK(epi_integral(sc1.f, sc1.limit_measure, EpiSide::liminf, sc1.schedule, {}).value.is_neg_inf());
  CHECK(epi_integral(sc1.f, sc1.limit_measure, EpiSide::limsup, sc1.schedule, {}).value == XReal(0.0));

  const FnSequence c(unit, 8, [](std::size_t) { return PiecewiseFn::constant(unit, -2.0); });
  const auto leb = FiniteMeasure::uniform(unit, 0.0, 1.0);
  const auto sampled = epi_integral(c, leb, EpiSide::liminf, EpiSchedule::standard(8), {});
  CHECK(sampled.method == "sampled");
  CHECK(sampled.value.value() == doctest::Approx(-2.0));
  CHECK(sampled.certainty == Certainty::window_truncated);
  const auto atomic = epi_integral(c, FiniteMeasure::dirac(unit, 0.4, 3.0), EpiSide::liminf, EpiSchedule::standard(8), {});
  CHECK(atomic.value == XReal(-6.0));
}

TEST_CASE("default grid covers the domain and the atoms") {
  const auto g = default_epi_grid(unit, FiniteMeasure::dirac(unit, 1.0 / 3.0));
  CHECK(g.front() == 0.0);
  CHECK(g.back() == 1.0);
  CHECK(std::find(g.begin(), g.end(), 1.0 / 3.0) != g.end());
}
