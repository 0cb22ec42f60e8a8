#include <catch2/catch_amalgamated.hpp>

#include <random>

#include "qchom/quadext.hpp"

using qchom::QuadExt;
using qchom::Rational;

TEST_CASE("rational arithmetic normalizes") {
  Rational a(2, 4);
  CHECK(a.num() == 1);
  CHECK(a.den() == 2);
  Rational b(1, -3);
  CHECK(b.num() == -1);
  CHECK(b.den() == 3);
  CHECK((a + b) == Rational(1, 6));
  CHECK((a * b) == Rational(-1, 6));
  CHECK((a - a).is_zero());
  CHECK_THROWS_AS(Rational(1, 0), std::invalid_argument);
}

TEST_CASE("golden identity tau^2 = tau + 1 holds exactly") {
  QuadExt tau = QuadExt::golden();
  CHECK(tau * tau == tau + QuadExt(1));
}

TEST_CASE("quadext multiplication matches double arithmetic") {
  std::mt19937_64 rng(42);
  std::uniform_int_distribution<std::int64_t> num(-40, 40);
  std::uniform_int_distribution<std::int64_t> den(1, 12);
  for (int trial = 0; trial < 200; ++trial) {
    QuadExt x(Rational(num(rng), den(rng)), Rational(num(rng), den(rng)));
    QuadExt y(Rational(num(rng), den(rng)), Rational(num(rng), den(rng)));
    // identity check through the defining relation
    QuadExt tau = QuadExt::golden();
    CHECK((x + y) * tau == x * tau + y * tau);
    CHECK(std::abs((x * y).to_double() - x.to_double() * y.to_double()) <
          1e-9 * (1.0 + std::abs(x.to_double() * y.to_double())));
  }
}

TEST_CASE("zero test is exact") {
  QuadExt tau = QuadExt::golden();
  // tau^2 - tau - 1 = 0 exactly
  QuadExt z = tau * tau - tau - QuadExt(1);
  CHECK(z.is_zero());
  // 1 - tau is far from zero even though its double value is small-ish
  QuadExt w = QuadExt(1) - tau;
  CHECK_FALSE(w.is_zero());
  // a + b*tau with a, b != 0 is never zero
  QuadExt v(Rational(-13), Rational(8));  // -13 + 8 tau ~ -0.0557
  CHECK_FALSE(v.is_zero());
  CHECK(std::abs(v.to_double()) > 1e-3);
}
