#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include "besi/cantor.hpp"

#include <cmath>
#include <sstream>

using namespace besi;

TEST_CASE("translate counting") {
  Rational a(1, 10), h(1, 4), b(3, 2);
  CHECK(translate_lower_count(a, b, h) == 5);
  CHECK(translate_bound_holds(a, b, h));
  CHECK_FALSE(translate_bound_holds(Rational(1, 2), b, h));  // a > h
  // exact placements never undercount
  for (int s = 0; s < 40; ++s) {
    Rational off(s, 37);
    CHECK(translate_count(off, a, Rational(0), b, h) >= translate_lower_count(a, b, h));
  }
  CHECK(translate_count(Rational(0), a, Rational(0), b, h) == 6);
}

TEST_CASE("middle third") {
  auto s = middle_third(30);
  CHECK(s.depth() == 30);
  CHECK(verify_system(s).ok);
  CHECK(s.explicit_levels[11].size() == 4096);
  auto rep = falconer_lower_bound(s);
  REQUIRE(rep.rows.size() == 29);
  // log(2^{k-1}) / (k log 3 - log 2)
  for (const auto& r : rep.rows) {
    double k = r.k;
    double want = (k - 1) * std::log(2.0) / (k * std::log(3.0) - std::log(2.0));
    CHECK(r.ratio.mid_d() == doctest::Approx(want).epsilon(1e-13));
  }
  CHECK(rep.last.mid_d() == doctest::Approx(29 * std::log(2.0) / (30 * std::log(3.0) - std::log(2.0))));
  CHECK(rep.running_inf.mid_d() == doctest::Approx(rep.rows.front().ratio.mid_d()));

  Membership m = membership(s, Rational(1, 4), 12);  // 1/4 = 0.0202... in base 3
  CHECK(m.in);
  CHECK(m.witnesses.size() == 12);
  Membership out = membership(s, Rational(1, 2), 12);
  CHECK_FALSE(out.in);
  CHECK(out.failed_level == 1);

  // truncation appends one row and keeps the earlier ones
  auto shorter = falconer_lower_bound(middle_third(29));
  for (size_t i = 0; i < shorter.rows.size(); ++i)
    CHECK(shorter.rows[i].ratio.mid_d() == rep.rows[i].ratio.mid_d());

  CHECK(falconer_lower_bound(middle_third(1)).rows.empty());

  auto bad = middle_third(3);
  std::swap(bad.gap_bounds[1], bad.gap_bounds[2]);
  CHECK_THROWS_AS(falconer_lower_bound(bad), Error);
  CHECK_FALSE(verify_system(bad).ok);
}

TEST_CASE("subsequence selection") {
  auto g = ContinuedFraction::golden();
  auto even = select_subsequence(g, Parity::Even, SubsequenceRule::Separated, 4);
  CHECK(even.ks == std::vector<long>{6, 20, 42, 72});
  auto odd = select_subsequence(g, Parity::Odd, SubsequenceRule::Separated, 4);
  CHECK(odd.ks == std::vector<long>{5, 17, 37, 65});
  auto rep = check_subsequence(g, even, {33, 1089, 35937, 1185921});
  CHECK(rep.separated);
  CHECK(rep.amplitude_ratio);
  CHECK(rep.parity);
  Subsequence weak = even;
  weak.ks[3] = 70;
  CHECK_FALSE(check_subsequence(g, weak).separated);

  // depth 1: smallest index of the parity with q_{k-1} >= 4 q_{k_0}
  CHECK(select_subsequence(g, Parity::Even, SubsequenceRule::Separated, 1).ks[0] == 6);
  CHECK(select_subsequence(g, Parity::Odd, SubsequenceRule::Separated, 1).ks[0] == 5);

  // Fibonacci growth is too slow for the power rule
  CHECK_THROWS_AS(select_subsequence(g, Parity::Even, SubsequenceRule::Growth, 3, 0, 1, 2, 60), Error);
  try {
    select_subsequence(g, Parity::Even, SubsequenceRule::Growth, 3, 0, 1, 2, 60);
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::NoAdmissibleIndex);
  }

  auto cf = construct_alpha_with_growth(2, 8, 4, 12);
  auto w = select_subsequence(cf, Parity::Even, SubsequenceRule::Growth, 3, 0, 2, 8);
  CHECK(w.ks == std::vector<long>{2, 6, 10});
  auto wr = check_subsequence(cf, w);
  CHECK(wr.growth);
  CHECK(wr.failures.empty());
  // a prefix runs out of quotients
  auto pre = ContinuedFraction::prefix({BigInt(1), BigInt(1), BigInt(1), BigInt(1)});
  CHECK_THROWS_AS(select_subsequence(pre, Parity::Even, SubsequenceRule::Separated, 2), Error);
}

TEST_CASE("orbit-type sets") {
  auto g = ContinuedFraction::golden();
  auto fam = eightpiece(g, {6, 20, 42, 72}, 0);
  for (std::string t : {"++", "-+", "--", "+-"}) {
    auto set = build_orbit_type_set(fam, t, 4);
    CHECK(verify_system(set.system).ok);
    CHECK(set.certificates.separated);
    CHECK(set.certificates.amplitude_ratio);
    bool quarter = t == "-+" || t == "+-";
    for (int n = 1; n <= 4; ++n) {
      const LatticeLevel& lv = set.system.lattice[n - 1];
      CHECK(lv.q == g.q(fam.subsequence[n - 1]));
      CHECK(lv.length() == (quarter ? set.deltas[n - 1] / 2 : set.deltas[n - 1] / 4));
      CHECK(set.system.child_counts[n - 1] >= 2);
      if (n < 4) CHECK(lv.length() > Rational(4, g.q(fam.subsequence[n])));
    }
  }
  auto pp = build_orbit_type_set(fam, "++", 4);
  Membership z = membership(pp, 0, 4);
  CHECK(z.in);
  for (const auto& w : z.witnesses) CHECK(w == 0);

  auto mp = build_orbit_type_set(fam, "-+", 4);
  Membership a = membership(mp, Rational(1, 4 * g.q(6)), 1);
  CHECK(a.in);
  CHECK(a.witnesses[0] == 0);
  Membership off = membership(pp, Rational(1, 2) + Rational(1, 1000003), 4);
  CHECK_FALSE(off.in);
  CHECK(off.failed_level >= 1);

  // grid translates at the last level
  std::mt19937_64 rng(11);
  auto pts = sample_points(pp.system, 4, 3, rng);
  REQUIRE(pts.size() == 9);
  Rational step(1, pp.system.lattice[3].q);
  auto last = lattice_system({pp.system.lattice[3]}, "E_4");
  for (const auto& x : pts) {
    CHECK(membership(pp, x, 4).in);
    Membership here = membership(last, x, 1);
    CHECK(here.in);
    Membership there = membership(last, x + step, 1);
    CHECK(there.in);
    BigInt next = here.witnesses.back() + 1;
    if (next == pp.system.lattice[3].q) next = 0;
    CHECK(there.witnesses.back() == next);
  }

  CHECK_THROWS_AS(build_orbit_type_set(tent_linear(g, 3), "++", 1), Error);
  CHECK_THROWS_AS(orbit_type_shape("+0", false), Error);
}

TEST_CASE("odd parity moves the quarter sets") {
  auto g = ContinuedFraction::golden();
  auto sub = select_subsequence(g, Parity::Odd, SubsequenceRule::Separated, 3);
  auto fam = eightpiece(g, sub.ks, 0);
  CHECK(fam.odd);
  CHECK(orbit_type_shape("-+", true).first == Rational(3, 4));
  for (std::string t : {"++", "-+", "--", "+-"}) {
    auto set = build_orbit_type_set(fam, t, 3);
    std::mt19937_64 rng(5);
    bool quarter = t == "-+" || t == "+-";
    for (const auto& x : sample_points(set.system, 3, 2, rng))
      for (int n = 1; n <= 3; ++n) {
        BigInt lo = g.q(n == 1 ? 0 : sub.ks[n - 2]), hi = g.q(sub.ks[n - 1]);
        if (quarter) {
          lo = (lo + 3) / 4;
          hi = (hi + 3) / 4;
        }
        for (BigInt m : {lo, BigInt(hi - 1)})
          for (int sg : {1, -1}) CHECK(divergence_certificate(fam, x, BigInt(m * sg), t).holds);
      }
  }
}

TEST_CASE("dimension tables") {
  auto cf = construct_alpha_with_growth(2, 8, 4, 8);
  auto sub = select_subsequence(cf, Parity::Even, SubsequenceRule::Separated, 3);
  CHECK(sub.ks == std::vector<long>{2, 4, 6});
  auto fam = eightpiece(cf, sub.ks, 0);
  for (std::string t : {"++", "-+", "--", "+-"}) {
    auto set = build_orbit_type_set(fam, t, 3);
    auto rep = falconer_lower_bound(set.system);
    REQUIRE(rep.rows.size() == 2);
    for (const auto& r : rep.rows) CHECK(orbit_type_bound(cf, set, r.k).le(r.ratio));
    auto cover = covering_upper_bound(cf, set);
    REQUIRE(cover.size() == 3);
    // one level: log q_{k_1} / -log(delta_1 / 4)
    Rational d1(cf.q(0), cf.q(2) * cf.q(3));
    double want = std::log(cf.q(2).get_d()) / -std::log(d1.get_d() / 4);
    CHECK(cover[0].ratio.mid_d() == doctest::Approx(want).epsilon(1e-12));
  }
  CHECK_THROWS_AS(orbit_type_bound(cf, build_orbit_type_set(fam, "++", 3), 1), Error);

  // covering ratios under the power rule stay below 1/2 after the first level
  auto cw = construct_alpha_with_growth(2, 8, 4, 12);
  auto w = select_subsequence(cw, Parity::Even, SubsequenceRule::Growth, 3, 0, 2, 8);
  auto fw = eightpiece(cw, w.ks, 0);
  auto cov = covering_upper_bound(cw, build_orbit_type_set(fw, "++", 3));
  for (const auto& r : cov) CHECK(r.ratio.hi_d() < 0.5);
}

TEST_CASE("cosine factor systems") {
  RotationVector v = construct_rotation_vector(Rational(4, 3), 3, 4);
  for (int j = 0; j < 3; ++j) {
    const auto& cf = v.coords[j];
    auto sys = cosine_factor_system(cf, 3);
    CHECK(verify_system(sys).ok);
    for (int n = 1; n <= 3; ++n) {
      Rational r = sys.lattice[n - 1].half;
      CHECK(r * r * cf.q(n) * cf.q(n + 1) <= 1);
      // eps_n >= 1/(2 q_n)
      CHECK(sys.gap_bounds[n - 1] >= Rational(1, 2 * cf.q(n)));
      // m_n >= sqrt(q_n) / (2 sqrt(q_{n-1}))
      if (n >= 2) {
        Rational m = sys.child_counts[n - 1];
        CHECK(4 * m * m * cf.q(n - 1) >= cf.q(n));
      }
    }
  }
  auto one = cosine_factor_system(v.coords[0], 3);
  auto pb = product_dimension_bound({one, one, one});
  CHECK(pb.sum_last.mid_d() == doctest::Approx(3 * pb.factors[0].last.mid_d()));
}

TEST_CASE("csv export") {
  auto s = middle_third(2);
  std::ostringstream os;
  write_levels_csv(os, s);
  CHECK(os.str() ==
        "level,j,left_num,left_den,right_num,right_den\n"
        "1,0,0,1,1,3\n1,1,2,3,1,1\n"
        "2,0,0,1,1,9\n2,1,2,9,1,3\n2,2,2,3,7,9\n2,3,8,9,1,1\n");
  std::ostringstream b;
  write_bounds_csv(b, falconer_lower_bound(s));
  CHECK(b.str().rfind("level,m_k,eps_k_num,eps_k_den,ratio\n2,2,1,9,", 0) == 0);
}
