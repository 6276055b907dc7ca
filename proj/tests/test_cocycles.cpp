#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include "besi/cocycles.hpp"

#include <cmath>
#include <random>

using namespace besi;

namespace {

const Rational kGolden50 = parse_rational("0.61803398874989484820458683436563811772030917980576");
const Rational kTiny = parse_rational("1e-45");

// distance from x to the nearest multiple of 1/q, times q
Rational dist_unit(const Rational& x, const BigInt& q) {
  Rational u = frac(Rational(x * q));
  return std::min<Rational>(u, 1 - u);
}

// nested point in the level sets [-h_n, h_n] + anchor/q_{k_n} + j/q_{k_n}
Rational nested_point(const CocycleFamily& fam, const Rational& anchor, const Rational& hfrac) {
  Rational lo = 0, hi = 1;
  for (const auto& lv : fam.pl) {
    Rational h = lv.delta * hfrac;
    BigInt j = ceil_q(Rational((lo + h) * lv.q - anchor));
    Rational c = (j + anchor) / lv.q;
    REQUIRE(c + h <= hi);
    lo = c - h;
    hi = c + h;
  }
  return (lo + hi) / 2;
}

}  // namespace

TEST_CASE("tent level values") {
  auto g = ContinuedFraction::golden();
  auto fam = tent_linear(g, 6);
  for (int n = 1; n <= 6; ++n) {
    BigInt q = g.q(n);
    CHECK(eval_level(fam, n, 0) == 0);
    Rational peak = Rational(n * g.q(n + 1), 2 * g.q(n - 1));
    peak.canonicalize();
    CHECK(eval_level(fam, n, Rational(1, 2 * q)) == peak);
    for (Rational x : {Rational(1, 7), Rational(3, 11), Rational(5, 13)}) {
      CHECK(eval_level(fam, n, x) == eval_level(fam, n, frac(Rational(-x))));
      CHECK(eval_level(fam, n, x) == fam.pl[n - 1].L * dist_unit(x, q) / q);
    }
  }
  Rational y(123, 457);
  Rational s = 0;
  for (int n = 1; n <= 6; ++n) s += eval_level(fam, n, y);
  CHECK(sum_levels(fam, y) == s);
}

TEST_CASE("trapezoid and eight-piece level values") {
  auto s2 = ContinuedFraction::sqrt2_minus_1();
  auto tr = trapezoid(s2, {1, 2, 3});
  for (int m = 1; m <= 3; ++m) {
    CHECK(eval_level(tr, m, tr.pl[m - 1].delta) == m);
    CHECK(eval_level(tr, m, Rational(2, 9)) == eval_level(tr, m, Rational(7, 9)));
  }
  auto g = ContinuedFraction::golden();
  auto gt = trapezoid(g, {1, 1});
  CHECK(gt.pl[0].knots.size() == 3);  // q_0 / q_2 = 1/2

  auto ep = eightpiece(g, {6, 20, 42}, 0);
  Rational M = 1;
  for (int n = 1; n <= 3; ++n) {
    M *= 33;
    BigInt q = ep.pl[n - 1].q;
    CHECK(eval_level(ep, n, Rational(1, 4 * q)) == M);
    CHECK(eval_level(ep, n, Rational(1, 2 * q)) == 2 * M);
    CHECK(eval_level(ep, n, Rational(3, 4 * q)) == M);
    CHECK(ep.pl[n - 1].L == M / ep.pl[n - 1].delta);
  }
  CHECK_FALSE(ep.odd);
  CHECK_THROWS_AS(eightpiece(g, {6, 21}, 0), Error);
}

TEST_CASE("phi at zero against a 50-digit oracle") {
  auto g = ContinuedFraction::golden();
  auto fam = tent_linear(g, 6);
  CertifiedValue v = eval_phi(fam, 0);
  Rational ref = 0;
  for (int n = 1; n <= 6; ++n) ref += fam.pl[n - 1].L * dist_unit(kGolden50, g.q(n)) / g.q(n);
  CHECK(abs_q(v.center - ref) <= v.radius + kTiny);
  CHECK(v.tail_lo == 0);
  CHECK(v.hi() > v.center);
}

TEST_CASE("birkhoff basics and cocycle identity") {
  auto g = ContinuedFraction::golden();
  auto fam = tent_linear(g, 6);
  Rational x(2, 9);
  CertifiedValue z = birkhoff(fam, x, 0);
  CHECK(z.center == 0);
  CHECK(z.radius == 0);
  CHECK(birkhoff(fam, x, 1).center == eval_phi(fam, x).center);
  std::mt19937_64 rng(7);
  for (int t = 0; t < 50; ++t) {
    long k = static_cast<long>(rng() % 20001) - 10000;
    long l = static_cast<long>(rng() % 20001) - 10000;
    CertifiedValue a = birkhoff(fam, x, k + l);
    CertifiedValue b = birkhoff(fam, x, k);
    Rational xk = frac(Rational(x + k * fam.approx.value));
    CertifiedValue c = birkhoff(fam, xk, l);
    CHECK(a.center == b.center + c.center);
  }
}

TEST_CASE("birkhoff against direct sums") {
  auto g = ContinuedFraction::golden();
  auto fam = tent_linear(g, 6);
  CHECK(g.q(3) == 3);
  CHECK(g.q(4) == 5);
  for (long k : {3L, 4L}) CHECK(birkhoff(fam, 0, k).center == direct_sum(fam, 0, k).center);
  Rational x(31, 97);
  auto [pos, neg] = direct_sums(fam, x, 500);
  for (long k = 0; k <= 500; ++k) {
    CHECK(birkhoff(fam, x, k).center == pos[k].center);
    CHECK(birkhoff(fam, x, -k).center == neg[k].center);
  }
  // negative convention: phi^(-k)(x) = -phi^(k)(x - k alpha)
  Rational xm = frac(Rational(x - 5 * fam.approx.value));
  CHECK(neg[5].center == -birkhoff(fam, xm, 5).center);

  auto s2 = ContinuedFraction::sqrt2_minus_1();
  auto ep = eightpiece(s2, {3, 9}, 1);
  auto [p2, n2] = direct_sums(ep, Rational(1, 3), 200);
  for (long k = 0; k <= 200; k += 7) CHECK(birkhoff(ep, Rational(1, 3), k).center == p2[k].center);
}

TEST_CASE("zero mean") {
  auto g = ContinuedFraction::golden();
  CHECK(integrate_phi_exact(tent_linear(g, 5)) == 0);
  CHECK(integrate_phi_exact(trapezoid(ContinuedFraction::sqrt2_minus_1(), {1, 2, 3})) == 0);
  CHECK(integrate_phi_exact(eightpiece(g, {6, 20}, 0)) == 0);
}

TEST_CASE("tent divergence certificates") {
  auto g = ContinuedFraction::golden();
  auto fam = tent_linear(g, 6);
  for (int n = 1; n <= 5; ++n) {
    for (BigInt k = g.q(n); k < g.q(n + 1); ++k) {
      for (int sg : {1, -1}) {
        BigInt kk = k * sg;
        DivergenceCertificate c = divergence_certificate(fam, 0, kk);
        CHECK(c.level == n + 1);
        CHECK(c.bound == Rational(n + 1) / 2);
        CHECK(c.holds);
        CHECK(c.consistent);
        CHECK(tent_level_certificate(fam, kk));
      }
    }
  }
  CHECK_THROWS_AS(divergence_certificate(fam, 0, g.q(7)), Error);
  CHECK_THROWS_AS(divergence_certificate(fam, Rational(1, 3), 2), Error);
}

TEST_CASE("eight-piece sign patterns") {
  auto g = ContinuedFraction::golden();
  std::vector<long> ks{6, 20, 42, 72};
  auto fam = eightpiece(g, ks, 0);
  struct Pattern {
    std::string type;
    Rational anchor, h;
  };
  std::vector<Pattern> pats{{"++", 0, Rational(1, 8)},
                            {"-+", Rational(1, 4), Rational(1, 4)},
                            {"--", Rational(1, 2), Rational(1, 8)},
                            {"+-", Rational(3, 4), Rational(1, 4)}};
  std::mt19937_64 rng(3);
  for (const auto& p : pats) {
    Rational x = nested_point(fam, p.anchor, p.h);
    for (int n = 1; n <= 4; ++n) {
      BigInt lo = g.q(n == 1 ? 0 : ks[n - 2]);
      BigInt hi = g.q(ks[n - 1]);
      bool quarter = p.type == "-+" || p.type == "+-";
      if (quarter) {
        lo = (lo + 3) / 4;
        hi = (hi + 3) / 4;
      }
      for (int t = 0; t < 12; ++t) {
        BigInt span = hi - lo;
        BigInt m = lo + BigInt(rng() % 1000003) % span;
        if (t == 0) m = lo;
        if (t == 1) m = hi - 1;
        if (m == 0) continue;
        for (int sg : {1, -1}) {
          DivergenceCertificate c = divergence_certificate(fam, x, BigInt(m * sg), p.type);
          CHECK(c.level == n);
          CHECK(c.holds);
          CHECK(c.consistent);
        }
      }
    }
  }
}

TEST_CASE("fourier closed form against exact quadrature") {
  auto s2 = ContinuedFraction::sqrt2_minus_1();
  auto fam = trapezoid(s2, {1, 2, 3});
  BigInt q3 = s2.q(3);
  CHECK(q3 == 12);
  for (long n = -48; n <= 48; ++n) {
    FourierValue a = fourier_closed_form(fam, n);
    FourierValue b = fourier_quadrature(fam, n);
    Interval ja = a.modulus.widen(a.tail), jb = b.modulus.widen(b.tail);
    CHECK_FALSE(ja.lt(jb));
    CHECK_FALSE(jb.lt(ja));
    if (n % 2 != 0 && n % 5 != 0) CHECK(a.modulus.hi_d() == 0);
  }
  CHECK(fourier_closed_form(fam, 0).modulus.hi_d() == 0);
  for (long s = 1; s <= 5; ++s) {
    const PLLevel& lv = fam.pl[1];
    double ref = -std::pow(std::sin(M_PI * s * Rational(lv.q * lv.delta).get_d()), 2) / (M_PI * M_PI * s * s);
    Interval gh = g_hat(fam, 2, s);
    CHECK(gh.lo_d() <= ref + 1e-15);
    CHECK(gh.hi_d() >= ref - 1e-15);
  }
}

TEST_CASE("log-bound parameter choice") {
  auto g = ContinuedFraction::golden();
  CHECK_THROWS_AS(choose_M_for_log_bound(g, Rational(1, 2), 5), Error);
  auto s2 = ContinuedFraction::sqrt2_minus_1();
  auto M1 = choose_M_for_log_bound(s2, Rational(1, 2), 1);
  REQUIRE(M1.size() == 1);
  // min(log 2, 1) = log 2, rounded down
  CHECK(M1[0] <= parse_rational("0.69314718055994530942"));
  CHECK(M1[0] >= parse_rational("0.69314718055994530"));
  auto tower = construct_log_tower(2, 3, Rational(1, 10), 1);
  auto M = choose_M_for_log_bound(tower, Rational(1, 2), 3);
  REQUIRE(M.size() == 3);
  for (int k = 1; k < 3; ++k) CHECK(M[k - 1] <= M[k]);
}

TEST_CASE("hoelder family") {
  auto cf = construct_alpha_with_growth(2, 8, 4, 6);
  Rational gamma(1, 8);
  auto fam = tent_holder(cf, gamma, 4);
  HolderReport lv = holder_levels(fam);
  CHECK(lv.ok);
  for (const auto& h : lv.levels) {
    CHECK(h.lip_ok);
    CHECK(h.sup_ok);
  }
  HolderReport est = holder_estimate(fam, 400, 11);
  CHECK(est.ok);
  CHECK(est.empirical <= lv.constant.hi_d());
  double prev = 0;
  for (int N = 1; N <= 4; ++N) {
    double r = holder_probe(fam, Rational(1, 2), N);
    CHECK(r > prev);
    prev = r;
  }
}

TEST_CASE("cosine family") {
  Rational a(4, 3);
  CHECK(abar_of(a, 3) == Rational(5, 27));
  auto g = ContinuedFraction::golden();
  Rational eps(1, 20);
  auto fam = cosine(g, a, 3, eps, 5);
  CertifiedValue v = eval_phi(fam, 0);
  long double ref = 0;
  for (int n = 1; n <= 5; ++n) {
    long double q = g.q(n).get_d(), qn = g.q(n + 1).get_d();
    long double beta = 1 + 5.0L / 27 - 0.05L;
    long double t = frac(Rational(kGolden50 * g.q(n))).get_d();
    ref += qn / std::pow(q, beta) * (1 - std::cos(2 * M_PIl * t));
  }
  CHECK(std::fabs(v.value() - static_cast<double>(ref)) < 1e-12);
  CHECK_THROWS_AS(cosine(g, a, 3, Rational(1, 5), 5), Error);

  auto rows = smoothness_certificate(fam);
  REQUIRE(rows.size() == 2);
  CHECK(rows[1].converges);
  double k0 = 2 * M_PI / std::pow(g.q(3).get_d(), 1 + 5.0 / 27 - 0.05);
  CHECK(std::fabs(rows[0].per_level[2].mid_d() - k0) < 1e-12);

  std::mt19937_64 rng(5);
  for (int t = 0; t < 5; ++t) {
    Rational x(static_cast<long>(rng() % 100000), 100000);
    Rational h(1, 1000000);
    double fd = (eval_phi(fam, Rational(x + h)).value() - eval_phi(fam, Rational(x - h)).value()) / 2e-6;
    Interval d = phi_derivative(fam, x);
    CHECK(std::fabs(fd - d.mid_d()) < 1e-5);
  }
}

TEST_CASE("cosine lower bound") {
  Rational a(4, 3);
  Rational e = pow_q(a, 3);
  auto cf = construct_alpha_with_growth(e, 8, 4, 6);
  Rational eps(1, 20);
  auto fam = cosine(cf, a, 3, eps, 5);
  int certified = 0;
  for (int n = 1; n <= 5; ++n) {
    BigInt qn = cf.q(n);
    BigInt top = cf.q(n + 1) / 4;
    for (BigInt m : {top, BigInt(top / 3)}) {
      CosineBound b;
      try {
        b = cosine_certificate(fam, 0, m, 8);
      } catch (const Error&) {
        continue;
      }
      if (!b.side_condition) continue;
      ++certified;
      CHECK(b.holds);
      CHECK(b.value.trunc_lo() >= -b.K.hi_q());
    }
  }
  CHECK(certified >= 2);
}
