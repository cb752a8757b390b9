#include <doctest.h>

#include <numbers>
#include <random>

#include "mlim/errors.hpp"
#include "mlim/fatou.hpp"
#include "mlim/gallery.hpp"
#include "support.hpp"

using namespace mlim;

namespace {

const Interval unit{0.0, 1.0};
const double ln2 = std::numbers::ln2;

Scenario constant_scenario(XReal f_value, std::optional<XReal> g_value, std::size_t n_max = 16) {
  Scenario sc;
  sc.name = "constant";
  sc.domain = unit;
  sc.n_max = n_max;
  const auto leb = FiniteMeasure::uniform(unit, 0.0, 1.0);
  sc.measures = MeasureSequence::constant(leb, n_max);
  sc.limit_measure = leb;
  const auto f = PiecewiseFn::constant(unit, f_value);
  sc.f = FnSequence(unit, n_max, [f](std::size_t) { return f; });
  sc.f.liminf_certificate = sc.f.limsup_certificate = f;
  if (g_value) {
    const auto g = PiecewiseFn::constant(unit, *g_value);
    FnSequence gs(unit, n_max, [g](std::size_t) { return g; });
    gs.liminf_certificate = gs.limsup_certificate = g;
    sc.g = gs;
  }
  sc.limit_function = f;
  sc.K_grid = default_k_grid();
  sc.schedule = EpiSchedule::standard(n_max);
  sc.certificate = CertificateKind::tv;
  return sc;
}

}  // namespace

TEST_CASE("windowed liminf") {
  const std::vector<XReal> c(10, XReal(2.5));
  const auto a = seq_liminf(c, 4);
  CHECK(a.value == XReal(2.5));
  CHECK(a.stabilized);
  std::vector<XReal> alt;
  for (int i = 0; i < 10; ++i) alt.push_back(i % 2);
  const auto b = seq_liminf(alt, 4);
  CHECK(b.value == XReal(0.0));
  CHECK_FALSE(b.stabilized);
  CHECK(seq_limsup(alt, 4).value == XReal(1.0));
  const std::vector<XReal> e(8, XReal(-0.5 / ln2));
  CHECK(seq_liminf(e, 8).value == XReal(-0.5 / ln2));
}

TEST_CASE("Fatou inequality on the fixtures") {
  const auto r3 = fatou_report(build_fixture("ex3_3"));
  CHECK(r3.lhs == XReal(0.0));
  CHECK(r3.rhs.value() == doctest::Approx(-0.5 / ln2).epsilon(1e-12));
  CHECK(r3.conclusion == Conclusion::violated);
  REQUIRE(r3.aui_negative_part);
  CHECK_FALSE(r3.aui_negative_part->passes);
  CHECK_FALSE(r3.theorem_contradiction);

  const auto rs = fatou_report(build_fixture("classic_spike"));
  CHECK(rs.lhs == XReal(0.0));
  CHECK(rs.rhs.value() == doctest::Approx(1.0));
  CHECK(rs.gap.value() == doctest::Approx(1.0));
  CHECK(rs.conclusion == Conclusion::holds);

  const auto r1 = fatou_report(build_fixture("ex3_1"));
  CHECK(r1.lhs.is_neg_inf());
  CHECK(r1.rhs.value() == doctest::Approx(-2.0).epsilon(1e-12));
  CHECK(r1.conclusion == Conclusion::holds);
}

TEST_CASE("violations need exact certainty on both sides") {
  auto sc = build_fixture("ex3_3", {.n_max = 12});
  sc.f.liminf_certificate.reset();
  sc.f.eventual_form = nullptr;
  const auto r = fatou_report(sc);
  CHECK(r.lhs_certainty == Certainty::window_truncated);
  CHECK(r.conclusion != Conclusion::violated);
}

TEST_CASE("minorant condition") {
  const auto m2 = minorant_check(build_fixture("ex3_2"));
  CHECK(m2.dominance);
  CHECK(m2.lhs == XReal(0.0));
  CHECK(m2.rhs == XReal(0.0));
  CHECK(m2.conclusion == Conclusion::holds);

  const auto m3 = minorant_check(build_fixture("ex3_3"));
  CHECK(m3.dominance);
  CHECK(m3.lhs == XReal(0.0));
  CHECK(m3.rhs.value() == doctest::Approx(-1.0 / ln2).epsilon(1e-12));
  CHECK_FALSE(m3.inequality);
  CHECK(m3.conclusion == Conclusion::violated);

  const auto m1 = minorant_check(build_fixture("ex3_1"));
  CHECK(m1.lhs == XReal(0.0));
  CHECK(m1.rhs.value() == doctest::Approx(-2.0).epsilon(1e-12));
  CHECK(m1.conclusion == Conclusion::violated);
}

TEST_CASE("dominance failures carry a witness") {
  auto sc = constant_scenario(0.0, XReal(1.0));
  const auto m = minorant_check(sc);
  CHECK_FALSE(m.dominance);
  CHECK(m.dominance_index == std::optional<std::size_t>(1));
  CHECK(m.dominance_witness);
  CHECK(m.conclusion == Conclusion::violated);
}

TEST_CASE("weakened minorant probe") {
  const auto w3 = weakened_minorant_probe(build_fixture("ex3_3"));
  CHECK(w3.lhs.value() == doctest::Approx(-1.0 / ln2).epsilon(1e-12));
  CHECK(w3.rhs.value() == doctest::Approx(-1.0 / ln2).epsilon(1e-12));
  CHECK(w3.conclusion == Conclusion::holds);

  const auto zero = weakened_minorant_probe(constant_scenario(0.0, XReal(0.0)));
  CHECK(zero.conclusion == Conclusion::holds);
  CHECK(zero.lhs == XReal(0.0));

  const auto w1 = weakened_minorant_probe(build_fixture("ex3_1"));
  CHECK(w1.lhs.is_neg_inf());
  CHECK_FALSE(w1.finite);
  CHECK(w1.conclusion == Conclusion::violated);
}

TEST_CASE("majorant and dominated convergence") {
  const auto sc = build_fixture("classic_dct");
  CHECK(majorant_check(sc).conclusion == Conclusion::holds);
  const auto d = dct_report(sc);
  CHECK(d.equality);
  CHECK(d.sufficient);
  CHECK(d.gap.lhs == XReal(1.0));

  const auto d2 = dct_report(build_fixture("ex3_2"));
  CHECK(d2.equality);
  CHECK_FALSE(d2.sufficient);
  REQUIRE(d2.aui_absolute);
  CHECK_FALSE(d2.aui_absolute->passes);
  CHECK(std::find(d2.gap.notes.begin(), d2.gap.notes.end(), "equality without sufficient condition") != d2.gap.notes.end());

  const auto z = constant_scenario(0.0, XReal(0.0));
  CHECK(fatou_report(z).conclusion == Conclusion::holds);
  CHECK(minorant_check(z).conclusion == Conclusion::holds);
  CHECK(majorant_check(z).conclusion == Conclusion::holds);
  const auto dz = dct_report(z);
  CHECK(dz.equality);
  CHECK(dz.sufficient);
}

TEST_CASE("dominated convergence through the two one-sided gaps") {
  for (const char* id : {"classic_dct", "ex3_2", "const_minus_one"}) {
    const auto sc = build_fixture(id);
    auto neg = sc;
    neg.f = sc.f.negated();
    const auto up = fatou_report(sc);
    const auto down = fatou_report(neg);
    const bool both = up.gap >= XReal(-sc.tol.gap) && down.gap >= XReal(-sc.tol.gap);
    CHECK(both == dct_report(sc).equality);
  }
}

TEST_CASE("shifting every f_n by a constant shifts both sides by c mu(S)") {
  std::mt19937_64 rng(51);
  for (int trial = 0; trial < 20; ++trial) {
    auto sc = testing::random_fatou_scenario(rng, 16);
    sc.measures = MeasureSequence::constant(sc.limit_measure, 16);
    const double c = std::uniform_real_distribution<double>(-3, 3)(rng);
    auto shifted = sc;
    shifted.f = sc.f.mapped([c](const PiecewiseFn& x) { return x.plus_constant(c); });
    shifted.f.liminf_certificate = sc.f.liminf_certificate->plus_constant(c);
    shifted.f.limsup_certificate = sc.f.limsup_certificate->plus_constant(c);
    const auto a = fatou_report(sc);
    const auto b = fatou_report(shifted);
    const double mass = total_mass(sc.limit_measure);
    CHECK(a.conclusion == b.conclusion);
    CHECK(b.lhs.value() == doctest::Approx(a.lhs.value() + c * mass).epsilon(1e-12).scale(1.0));
    CHECK(b.rhs.value() == doctest::Approx(a.rhs.value() + c * mass).epsilon(1e-12).scale(1.0));
  }
}

TEST_CASE("randomized Fatou hypotheses never produce a violation") {
  std::mt19937_64 rng(52);
  for (int trial = 0; trial < 40; ++trial) {
    const auto r = fatou_report(testing::random_fatou_scenario(rng, 16));
    CHECK(r.gap >= XReal(-1e-9));
    CHECK(r.conclusion == Conclusion::holds);
  }
}

TEST_CASE("degenerate limit measure") {
  auto sc = constant_scenario(3.0, std::nullopt);
  sc.limit_measure = FiniteMeasure(unit);
  sc.measures = MeasureSequence(unit, sc.n_max, [](std::size_t n) { return FiniteMeasure::dirac(unit, 0.5, 1.0 / static_cast<double>(n)); });
  const auto r = fatou_report(sc);
  CHECK(r.degenerate);
  CHECK(r.lhs == XReal(0.0));
  CHECK(r.rhs == XReal(0.0));
  CHECK(r.conclusion == Conclusion::holds);
  REQUIRE(r.raw_rhs);
  CHECK(r.raw_rhs->value() > 0.0);
}

TEST_CASE("bounded minorants imply a shift") {
  CHECK_THROWS_AS(theorem26_probe(build_fixture("ex3_2")), PreconditionFailed);
  const auto c = theorem26_probe(build_fixture("const_minus_one"));
  CHECK(c.shift == std::optional<std::size_t>(0));
  CHECK_FALSE(c.inconsistency);
  const auto s = theorem26_probe(build_fixture("classic_spike"));
  CHECK(s.minorant.conclusion == Conclusion::holds);
  CHECK(s.shift == std::optional<std::size_t>(0));
}

TEST_CASE("scenario validation") {
  auto sc = constant_scenario(1.0, std::nullopt);
  sc.n_max = 3;
  CHECK_THROWS_AS(sc.validate(), InvalidArgument);
  auto other = constant_scenario(1.0, std::nullopt);
  other.limit_measure = FiniteMeasure::uniform(Interval{0.0, 2.0}, 0.0, 1.0);
  CHECK_THROWS_AS(other.validate(), DomainMismatch);
}
