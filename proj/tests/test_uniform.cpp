#include <doctest.h>

#include <random>

#include "mlim/compensated.hpp"
#include "mlim/errors.hpp"
#include "mlim/gallery.hpp"
#include "mlim/uniform.hpp"
#include "support.hpp"

using namespace mlim;

namespace {

const Interval unit{0.0, 1.0};
const FiniteMeasure leb = FiniteMeasure::uniform(unit, 0.0, 1.0);

SignedCellMeasure cells_of(std::initializer_list<double> masses) {
  SignedCellMeasure g;
  double at = 0.0;
  for (double m : masses) {
    g.cells.push_back({Region{at, at + 0.1, false}, m});
    at += 0.1;
  }
  return g;
}

Scenario with_limit(const FnSequence& f, const PiecewiseFn& limit, std::size_t n_max) {
  Scenario sc;
  sc.name = "uniform";
  sc.domain = unit;
  sc.n_max = n_max;
  sc.measures = MeasureSequence::constant(leb, n_max);
  sc.limit_measure = leb;
  sc.f = f;
  sc.limit_function = limit;
  sc.K_grid = default_k_grid();
  sc.schedule = EpiSchedule::standard(n_max);
  sc.certificate = CertificateKind::tv;
  return sc;
}

}  // namespace

TEST_CASE("signed gap of identical inputs is zero") {
  std::mt19937_64 rng(61);
  for (int trial = 0; trial < 50; ++trial) {
    const auto f = testing::random_step(rng, unit, -3, 3);
    const auto m = testing::random_measure(rng, unit);
    const auto g = signed_gap(f, m, f, m);
    CHECK(uniform_sup_gap(g) == 0.0);
    CHECK(uniform_fatou_gap(g) == 0.0);
  }
}

TEST_CASE("signed gap of the two-sided spike") {
  const auto sc = build_fixture("ex3_2", {.n_max = 16});
  const auto zero = PiecewiseFn::constant(sc.domain, 0.0);
  for (std::size_t n : {1, 4, 16}) {
    const auto g = signed_gap(sc.f.at(n), sc.limit_measure, zero, sc.limit_measure);
    const auto t = hahn_totals(g);
    CHECK(t.positive == doctest::Approx(1.0).epsilon(1e-15));
    CHECK(t.negative == doctest::Approx(1.0).epsilon(1e-15));
    CHECK(uniform_fatou_gap(g) == doctest::Approx(-1.0).epsilon(1e-15));
    CHECK(uniform_sup_gap(g) == doctest::Approx(1.0).epsilon(1e-15));
  }
}

TEST_CASE("signed gap on atoms") {
  const auto a = FiniteMeasure::dirac(unit, 0.0, 0.5);
  const auto g = signed_gap(PiecewiseFn::constant(unit, 2.0), a, PiecewiseFn::constant(unit, 1.0), a);
  REQUIRE(g.cells.size() == 1);
  CHECK(g.cells[0].mass == 0.5);
  CHECK(g.cells[0].region.is_point);
}

TEST_CASE("signed gap rejects non-integrable inputs") {
  const auto f = PiecewiseFn::constant(unit, XReal::neg_inf());
  CHECK_THROWS_AS(signed_gap(f, leb, PiecewiseFn::constant(unit, 0.0), leb), NonIntegrable);
}

TEST_CASE("uniform gaps from Hahn totals") {
  CHECK(uniform_fatou_gap(cells_of({})) == 0.0);
  CHECK(uniform_sup_gap(cells_of({0.3, -0.7})) == 0.7);
  CHECK(uniform_fatou_gap(cells_of({0.3, -0.7})) == -0.7);
  const auto f = PiecewiseFn::constant(unit, 1.0);
  const FiniteMeasure two = FiniteMeasure::uniform(unit, 0.0, 1.0, 2.0);
  for (int n : {1, 5, 10})
    CHECK(uniform_fatou_gap(signed_gap(f.plus_constant(-1.0 / n), two, f, two)) == doctest::Approx(-2.0 / n));
}

TEST_CASE("Hahn totals match subset enumeration") {
  std::mt19937_64 rng(62);
  std::uniform_real_distribution<double> mass(-1, 1);
  for (int trial = 0; trial < 50; ++trial) {
    SignedCellMeasure g;
    const int k = std::uniform_int_distribution<int>(0, 10)(rng);
    for (int i = 0; i < k; ++i) g.cells.push_back({Region{i * 0.1, i * 0.1 + 0.1, false}, mass(rng)});
    double lo = 0.0;
    double hi = 0.0;
    for (unsigned mask = 0; mask < (1u << k); ++mask) {
      CompensatedSum s;
      for (int i = 0; i < k; ++i)
        if (mask & (1u << i)) s.add(g.cells[i].mass);
      lo = std::min(lo, s.value());
      hi = std::max(hi, std::fabs(s.value()));
    }
    CHECK(uniform_fatou_gap(g) == lo);
    CHECK(uniform_sup_gap(g) == hi);
  }
}

TEST_CASE("undershoot and convergence-in-measure conditions") {
  const double eps = 0.1;
  const auto f = PiecewiseFn::constant(unit, 0.0);
  const FnSequence same(unit, 8, [f](std::size_t) { return f; });
  CHECK(condition_undershoot(same, f, leb, eps) == std::vector<double>(8, 0.0));
  CHECK(conv_in_measure(same, f, leb, eps) == std::vector<double>(8, 0.0));

  const FnSequence fixed(unit, 8, [](std::size_t) { return PiecewiseFn::indicator(unit, 0.5, 0.75, -0.2); });
  CHECK(condition_undershoot(fixed, f, leb, eps) == std::vector<double>(8, 0.25));
  const FnSequence sym(unit, 8, [](std::size_t) {
    return PiecewiseFn(unit, {0.5, 0.625, 0.75}, {Piece::constant(-0.2), Piece::constant(0.2)});
  });
  CHECK(conv_in_measure(sym, f, leb, eps) == std::vector<double>(8, 0.25));
  CHECK(condition_undershoot(sym, f, leb, eps) == std::vector<double>(8, 0.125));

  const FnSequence shrinking(unit, 8, [](std::size_t n) {
    return PiecewiseFn::indicator(unit, 0.0, 1.0 / static_cast<double>(n), -0.2);
  });
  const auto u = condition_undershoot(shrinking, f, leb, eps);
  const auto c = conv_in_measure(shrinking, f, leb, eps);
  for (std::size_t n = 1; n <= 8; ++n) {
    CHECK(u[n - 1] == doctest::Approx(1.0 / n));
    CHECK(c[n - 1] == doctest::Approx(1.0 / n));
  }
}

TEST_CASE("uniform report: identical sequence") {
  const auto f = PiecewiseFn::constant(unit, 0.5);
  const auto r = uniform_report(with_limit(FnSequence(unit, 16, [f](std::size_t) { return f; }), f, 16));
  for (double x : r.sup_gap) CHECK(x == 0.0);
  CHECK(r.uniform_fatou == Conclusion::holds);
  CHECK(r.uniform_dct == Conclusion::holds);
  CHECK(r.fatou_consistency == Consistency::consistent);
  CHECK(r.dct_consistency == Consistency::consistent);
  CHECK_FALSE(r.fixture_bug);
}

TEST_CASE("uniform report: vanishing shift") {
  const auto f = PiecewiseFn::constant(unit, 0.5);
  const FnSequence seq(unit, 32, [f](std::size_t n) { return f.plus_constant(1.0 / static_cast<double>(n)); });
  const auto r = uniform_report(with_limit(seq, f, 32));
  for (std::size_t n = 1; n <= 32; ++n) CHECK(r.sup_gap[n - 1] == doctest::Approx(1.0 / n));
  CHECK(r.uniform_dct == Conclusion::holds);
  CHECK(r.dct_consistency == Consistency::consistent);
}

TEST_CASE("uniform report: two-sided spike") {
  const auto r = uniform_report(build_fixture("ex3_2"));
  for (double x : r.sup_gap) CHECK(x == doctest::Approx(1.0).epsilon(1e-15));
  for (double x : r.inf_gap) {
    CHECK(x <= 0.0);
    CHECK(x == doctest::Approx(-1.0).epsilon(1e-15));
  }
  CHECK(r.uniform_fatou == Conclusion::violated);
  CHECK(r.uniform_dct == Conclusion::violated);
  CHECK(r.dct_consistency == Consistency::consistent);
  CHECK(r.fatou_consistency == Consistency::consistent);
  const auto csv = r.to_csv();
  CHECK(csv.rfind("n,inf_gap,sup_gap,cond_i,cond_ii\r\n", 0) == 0);
}

TEST_CASE("uniform Fatou gap is nonpositive on random gaps") {
  std::mt19937_64 rng(63);
  for (int trial = 0; trial < 200; ++trial) {
    const auto g = signed_gap(testing::random_step(rng, unit, -5, 5), testing::random_measure(rng, unit),
                              testing::random_step(rng, unit, -5, 5), testing::random_measure(rng, unit));
    CHECK(uniform_fatou_gap(g) <= 0.0);
    const auto t = hahn_totals(g);
    CHECK(uniform_sup_gap(g) <= t.positive + t.negative);
    CHECK(uniform_sup_gap(g) >= -uniform_fatou_gap(g));
  }
}
