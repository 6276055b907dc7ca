#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include "besi/diophantine.hpp"

using namespace besi;

namespace {
// sqrt(2) - 1 to 50 digits
const Rational kSqrt2m1 = parse_rational("0.41421356237309504880168872420969807856967187537694");
const Rational kTol50 = parse_rational("1e-49");
}  // namespace

TEST_CASE("convergent recurrences") {
  auto g = ContinuedFraction::golden();
  std::vector<long> fib{1, 1, 2, 3, 5, 8};
  for (long n = 0; n <= 5; ++n) CHECK(g.q(n) == fib[n]);
  auto s = ContinuedFraction::sqrt2_minus_1();
  std::vector<long> pell{1, 2, 5, 12, 29};
  for (long n = 0; n <= 4; ++n) CHECK(s.q(n) == pell[n]);
  CHECK(g.q(-1) == 0);
  CHECK(g.p(-1) == 1);
  for (long n = 1; n <= 40; ++n) {
    CHECK(gcd(g.p(n), g.q(n)) == 1);
    CHECK(g.q(n + 2) > 2 * g.q(n));
    CHECK(s.q(n) == 2 * s.q(n - 1) + s.q(n - 2));
  }
}

TEST_CASE("sandwich for sqrt2 - 1 at n = 2") {
  auto s = ContinuedFraction::sqrt2_minus_1();
  QInterval gap = approximation_gap(s, 2);
  CHECK(gap.lo > Rational(1, 120));
  CHECK(gap.hi < Rational(1, 60));
  Rational ref = abs_q(kSqrt2m1 - Rational(2, 5));
  CHECK(ref >= gap.lo - kTol50);
  CHECK(ref <= gap.hi + kTol50);
  CHECK(abs_q(ref - parse_rational("0.0142135623730950488")) < parse_rational("1e-18"));
}

TEST_CASE("distance to integers") {
  auto g = ContinuedFraction::golden();
  QInterval d3 = distance_to_integers(g, 3);
  CHECK(d3.lo > Rational(1, 10));
  CHECK(d3.hi < Rational(1, 5));

  auto s = ContinuedFraction::sqrt2_minus_1();
  QInterval d2 = distance_to_integers(s, 2);
  CHECK(d2.lo > Rational(1, 24));
  CHECK(d2.hi < Rational(1, 12));
  Rational ref = abs_q(5 * kSqrt2m1 - 2);
  CHECK(ref >= d2.lo - kTol50);
  CHECK(ref <= d2.hi + kTol50);

  // n = 0 holds when a_1 >= 2; for a_1 = 1 the nearest integer is p_1, not p_0
  QInterval s0 = distance_to_integers(s, 0);
  CHECK(s0.lo > Rational(1, 4));
  CHECK(s0.hi < Rational(1, 2));
  QInterval g0 = distance_to_integers(g, 0);
  CHECK(g0.hi < Rational(1, 2));
}

TEST_CASE("reduce_mod1") {
  auto g = ContinuedFraction::golden();
  AlphaApprox a20 = approx_at(g, 20);
  CHECK(g.q(20) == 10946);
  Reduced r0 = reduce_mod1(Rational(1, 3), 0, a20);
  CHECK(r0.value == Rational(1, 3));
  CHECK(r0.radius == 0);
  Reduced r = reduce_mod1(0, 100, a20);
  Rational expect(100, g.q(20) * g.q(21));
  expect.canonicalize();
  CHECK(r.radius == expect);
  CHECK_THROWS_AS(reduce_mod1(0, 100, a20, Rational(1, 1000000000)), Error);

  auto s = ContinuedFraction::sqrt2_minus_1();
  Reduced r29 = reduce_mod1(0, 29, approx_at(s, 10));
  QInterval d4 = distance_to_integers(s, 4);
  Rational dist = std::min<Rational>(r29.value, 1 - r29.value);
  CHECK(dist + r29.radius >= d4.lo);
  CHECK(dist - r29.radius <= d4.hi);
  Rational ref = frac(29 * kSqrt2m1);
  CHECK(abs_q(ref - r29.value) <= r29.radius);

  // sub-additivity
  Rational x(2, 7);
  AlphaApprox a = approx_at(g, 15);
  Reduced ab = reduce_mod1(x, 37, a);
  Reduced first = reduce_mod1(x, 12, a);
  Reduced second = reduce_mod1(first.value, 25, a);
  CHECK(abs_q(ab.value - second.value) <= ab.radius + first.radius + second.radius);
}

TEST_CASE("prefix enclosures and radii") {
  auto cf = ContinuedFraction::prefix({BigInt(3), BigInt(1), BigInt(4)});
  CHECK_FALSE(cf.infinite());
  CHECK_THROWS_AS(cf.quotient(4), Error);
  AlphaApprox a = approx_at(cf, 3);
  CHECK(a.radius * (cf.q(3) * (cf.q(3) + cf.q(2))) == 1);
  QInterval e = cf.enclosure(3);
  CHECK(e.contains(a.value));
  CHECK(e.width() == a.radius);
}

TEST_CASE("growth construction") {
  auto cf = construct_alpha_with_growth(2, 8, 4, 1);
  CHECK(cf.quotient(2) == 16);
  CHECK(cf.q(2) == 65);
  auto cf2 = construct_alpha_with_growth(2, 8, 4, 2);
  CHECK(cf2.q(3) >= 16900);
  CHECK(cf2.q(3) <= 33800);
  auto cf0 = construct_alpha_with_growth(2, 8, 4, 0);
  CHECK(cf0.known() == 1);
  auto alt = construct_alpha_with_growth(2, 8, 4, 2, "11");
  CHECK(alt.q(2) != cf2.q(2));
  for (int n = 1; n <= 1; ++n) {
    CHECK(4 * cf2.q(n) * cf2.q(n) <= cf2.q(n + 1));
    CHECK(cf2.q(n + 1) <= 8 * cf2.q(n) * cf2.q(n));
  }
}

TEST_CASE("rotation vectors") {
  Rational a(4, 3);
  GrowthConstants g = growth_constants(a);
  CHECK(g.A == 16);
  CHECK(g.B == 102);  // 16 * 4^(4/3) = 101.59...
  CHECK(g.C == 204);
  RotationVector v = construct_rotation_vector(a, 3, 1);
  CHECK(check_windows(v).ok);
  RotationVector w = construct_rotation_vector(a, 3, 1, "010");
  bool differ = false;
  for (int j = 1; j <= 3; ++j) differ = differ || v.q(1, j) != w.q(1, j);
  CHECK(differ);

  RotationVector v2 = construct_rotation_vector(a, 3, 2);
  CHECK(check_windows(v2).ok);
  CHECK(check_derived(v2).ok);
  RotationVector p = perturb_slot(v2, 2);
  auto S = v2.S;
  for (auto& row : S) row[1] = {Rational(4), g.C};
  CHECK(check_windows(p, S).ok);
}

TEST_CASE("independence scan") {
  auto g = ContinuedFraction::golden();
  CHECK(independence_scan(std::vector<ContinuedFraction>{g}, 10).empty());
  auto dup = independence_scan(std::vector<ContinuedFraction>{g, g}, 1);
  REQUIRE(dup.size() == 1);
  CHECK(dup[0] == IntVec{1, -1});
}
