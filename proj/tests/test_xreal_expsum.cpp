#include <doctest.h>

#include <cmath>
#include <random>

#include "mlim/compensated.hpp"
#include "mlim/errors.hpp"
#include "mlim/expsum.hpp"
#include "mlim/xreal.hpp"
#include "support.hpp"

using namespace mlim;

TEST_CASE("xreal arithmetic follows the extended-real conventions") {
  CHECK(XReal(1.5) + XReal(2.0) == XReal(3.5));
  CHECK(XReal::pos_inf() + XReal(-1e300) == XReal::pos_inf());
  CHECK_THROWS_AS(XReal::pos_inf() + XReal::neg_inf(), UndefinedArithmetic);
  CHECK_THROWS_AS(XReal::neg_inf() - XReal::neg_inf(), UndefinedArithmetic);
  CHECK_THROWS_AS(XReal(std::nan("")), UndefinedArithmetic);
  CHECK(times_mass(XReal::neg_inf(), 0.0) == XReal(0.0));
  CHECK(times_mass(XReal::neg_inf(), 0.5) == XReal::neg_inf());
  CHECK(gap_difference(XReal::neg_inf(), XReal::neg_inf()) == XReal(0.0));
  CHECK(gap_difference(XReal(-2.0), XReal::neg_inf()) == XReal::pos_inf());
  CHECK(xmin(XReal(1.0), XReal::neg_inf()).is_neg_inf());
}

TEST_CASE("xreal text round trip") {
  for (double v : {0.0, -2.0, 0.1, 1.0 / 3.0, 1e-300, -std::ldexp(1.0, 60)}) CHECK(parse_xreal(to_string(XReal(v))) == XReal(v));
  CHECK(parse_xreal("inf").is_pos_inf());
  CHECK(parse_xreal("-inf").is_neg_inf());
  CHECK(to_string(XReal::neg_inf()) == "-inf");
}

TEST_CASE("compensated sum recovers what naive summation loses") {
  CompensatedSum s;
  s.add(1.0);
  for (int i = 0; i < 1000; ++i) s.add(1e-16);
  s.add(-1.0);
  CHECK(s.value() == doctest::Approx(1e-13).epsilon(1e-9));
}

TEST_CASE("exponential sum integrals agree with Simpson quadrature") {
  std::mt19937_64 rng(11);
  std::uniform_real_distribution<double> coef(-3, 3);
  std::uniform_real_distribution<double> rate(-2, 2);
  for (int trial = 0; trial < 50; ++trial) {
    ExpSum h;
    for (int k = 0; k < 3; ++k) h.add(coef(rng), rate(rng));
    const double a = -1.0 + trial * 0.01;
    const double b = a + 2.5;
    const double oracle = testing::simpson([&](double s) { return h(s); }, a, b);
    CHECK(h.integral(a, b) == doctest::Approx(oracle).epsilon(1e-9));
  }
}

TEST_CASE("exponential sum integrals on half lines") {
  const ExpSum decay(2.0, -std::log(2.0));
  CHECK(decay.integral(0.0, INFINITY) == doctest::Approx(2.0 / std::log(2.0)));
  CHECK(ExpSum(1.0, 0.5).integral(0.0, INFINITY) == INFINITY);
  ExpSum mixed(1.0, 0.5);
  mixed.add(-1.0, 1.0);
  CHECK(mixed.integral(0.0, INFINITY) == -INFINITY);
}

TEST_CASE("sign changes match a dense scan") {
  std::mt19937_64 rng(5);
  std::uniform_real_distribution<double> coef(-2, 2);
  std::uniform_real_distribution<double> rate(-3, 3);
  for (int trial = 0; trial < 100; ++trial) {
    ExpSum h;
    for (int k = 0; k < 3; ++k) h.add(coef(rng), rate(rng));
    const auto roots = h.sign_changes(-2.0, 2.0);
    int scanned = 0;
    double prev = h(-2.0);
    for (int i = 1; i <= 40000; ++i) {
      const double cur = h(-2.0 + i * 1e-4);
      if ((prev < 0 && cur > 0) || (prev > 0 && cur < 0)) ++scanned;
      if (cur != 0) prev = cur;
    }
    CHECK(roots.size() == static_cast<std::size_t>(scanned));
    for (double r : roots) CHECK(std::fabs(h(r)) < 1e-9);
  }
}

TEST_CASE("infimum and supremum bracket every sample") {
  ExpSum h(1.0, 1.0);
  h.add(-3.0, 0.0);
  h.add(1.0, -1.0);  // e^s + e^-s - 3, minimum -1 at s = 0
  CHECK(h.infimum(-1.0, 2.0) == doctest::Approx(-1.0));
  CHECK(h.supremum(-1.0, 2.0) == doctest::Approx(std::exp(2.0) + std::exp(-2.0) - 3));
  CHECK(h(INFINITY) == INFINITY);
  CHECK(ExpSum(4.0, -1.0)(INFINITY) == 0.0);
}

TEST_CASE("exponential sum capacity is enforced") {
  ExpSum h;
  for (int k = 0; k < 8; ++k) h.add(1.0, k);
  CHECK_THROWS_AS(h.add(1.0, 9.0), InvalidArgument);
  CHECK_THROWS_AS(h.add(INFINITY, 0.0), UndefinedArithmetic);
}
