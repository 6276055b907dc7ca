#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include "besi/cantor.hpp"
#include "besi/flows.hpp"

#include <cmath>
#include <random>
#include <sstream>

using namespace besi;

namespace {

const double kTwoPi = 2 * std::acos(-1.0);

double dist3(const R3& a, const R3& b) {
  return std::max({std::fabs(a[0] - b[0]), std::fabs(a[1] - b[1]), std::fabs(a[2] - b[2])});
}
double dist3(const S3& a, const S3& b) { return std::max(std::abs(a[0] - b[0]), std::abs(a[1] - b[1])); }

double circ(double a, double b) {
  double d = std::fabs(a - b);
  return std::min(d, 1 - d);
}

DrivingFunction golden_psi(int depth = 3) { return psi_from_phi(tent_linear(ContinuedFraction::golden(), depth)); }

}  // namespace

TEST_CASE("bump") {
  Bump b;
  CHECK(b.integral() == 1);
  CHECK(b(0.1) == 0);
  CHECK(b(0.95) == 0);
  CHECK(b(0.5) == doctest::Approx(140.0 / 64 / 0.75));
  CHECK(b.antiderivative(0.5) == doctest::Approx(0.5));
  CHECK(b.antiderivative(Rational(1, 2)) == Rational(1, 2));
  // numerical derivative of B
  for (double z : {0.2, 0.37, 0.61, 0.8})
    CHECK((b.antiderivative(z + 1e-6) - b.antiderivative(z - 1e-6)) / 2e-6 == doctest::Approx(b(z)).epsilon(1e-6));
  CHECK_THROWS_AS(psi_from_phi(tent_linear(ContinuedFraction::golden(), 2), Rational(1, 2)), Error);
}

TEST_CASE("driving function from a cocycle") {
  auto psi = golden_psi();
  auto zero = psi_callable([](double, double) { return 0.0; }, psi.alpha);
  CHECK(zero(0.3, 0.4) == 0);
  CHECK(psi(0.3, 0.05) == 0);  // theta inside the bump margin

  std::mt19937_64 rng(3);
  std::uniform_real_distribution<double> U(0, 1);
  for (int i = 0; i < 10; ++i) {
    double w = U(rng);
    CertifiedValue e = eval_phi(*psi.fam, rational_from_double(w));
    double want = e.center.get_d();
    CHECK(psi.phi(w) == doctest::Approx(want).epsilon(1e-12));
    // the fiber integrand is continuous but only piecewise smooth
    CHECK(std::fabs(reconstruct_phi(psi, w) - want) < 2e-3 + e.radius.get_d());
  }
}

TEST_CASE("exact flow") {
  auto psi = golden_psi();
  ToralState st{0.21, 0.43, -0.5};
  FlowValue id = exact_flow(st, 0, psi);
  CHECK(id.state.omega == st.omega);
  CHECK(id.state.s == st.s);

  auto c = psi_callable([](double, double) { return 0.75; }, psi.alpha);
  CHECK(exact_flow(st, 3.3, c).state.s == doctest::Approx(st.s + 0.75 * 3.3).epsilon(1e-12));
  CHECK(exact_flow(st, -2.0, c).state.s == doctest::Approx(st.s - 1.5).epsilon(1e-12));

  // group property, also for the callable path
  auto wobble = psi_callable([](double w, double t) { return std::sin(kTwoPi * w) * std::cos(kTwoPi * t) + 0.2; },
                             psi.alpha);
  for (const DrivingFunction* f : {&psi, &wobble})
    for (double t1 : {0.7, -1.3, 2.25})
      for (double t2 : {0.4, -3.1}) {
        FlowValue a = exact_flow(exact_flow(st, t1, *f).state, t2, *f);
        FlowValue b = exact_flow(st, t1 + t2, *f);
        CHECK(circ(a.state.omega, b.state.omega) < 1e-12);
        CHECK(circ(a.state.theta, b.state.theta) < 1e-12);
        CHECK(std::fabs(a.state.s - b.state.s) < 1e-9);
      }

  // integer times from theta = 0 give the Birkhoff sums
  for (long n : {1L, 2L, 7L, 55L, -8L}) {
    Rational w(3, 11);
    CertifiedValue inc = fiber_increment(psi, w, 0, Rational(n));
    CertifiedValue ref = birkhoff(*psi.fam, w, BigInt(n));
    CHECK(inc.center == ref.center);
  }
  // the fiber increment is additive in rational time
  Rational w(2, 7), th(1, 3), t1(5, 4), t2(-17, 6);
  CertifiedValue a = fiber_increment(psi, w, th, t1);
  CertifiedValue b = fiber_increment(psi, Rational(w + t1 * psi.alpha_q), Rational(th + t1), t2);
  CertifiedValue ab = fiber_increment(psi, w, th, Rational(t1 + t2));
  CHECK(abs_q(Rational(a.center + b.center - ab.center)) <= a.radius + b.radius + ab.radius);
}

TEST_CASE("coordinate changes") {
  ToralState st{0.3, 0.7, 0.0};
  ToralState back = r3_to_toral(toral_to_r3(st));
  CHECK(circ(back.omega, st.omega) < 1e-12);
  CHECK(circ(back.theta, st.theta) < 1e-12);
  CHECK(std::fabs(back.s - st.s) < 1e-12);

  S3 z = toral_to_s3(st);
  CHECK(std::abs(z[0]) == doctest::Approx(1 / std::sqrt(2.0)));
  CHECK(std::abs(z[1]) == doctest::Approx(1 / std::sqrt(2.0)));

  std::mt19937_64 rng(9);
  std::uniform_real_distribution<double> U(0, 1);
  for (int i = 0; i < 200; ++i) {
    ToralState r{U(rng), U(rng), 4 * U(rng) - 2};
    ToralState a = r3_to_toral(toral_to_r3(r));
    ToralState b = s3_to_toral(toral_to_s3(r));
    CHECK(circ(a.omega, r.omega) < 1e-12);
    CHECK(circ(a.theta, r.theta) < 1e-12);
    CHECK(std::fabs(a.s - r.s) < 1e-12);
    CHECK(circ(b.omega, r.omega) < 1e-12);
    CHECK(circ(b.theta, r.theta) < 1e-12);
    CHECK(std::fabs(b.s - r.s) < 1e-12);
  }

  // limits of the fiber coordinate
  R3 far = toral_to_r3({0.3, 0.2, 4.0});
  CHECK(dist_to_S0(far) < 1e-20);
  CHECK(far[0] == doctest::Approx(std::cos(kTwoPi * 0.2)));
  R3 low = toral_to_r3({0.3, 0.2, -40.0});
  CHECK(dist_to_R0(low) < 1e-15);
  CHECK(low[2] == doctest::Approx(std::tan(std::acos(-1.0) * 0.3 - std::acos(-1.0) / 2)));

  CHECK_THROWS_AS(r3_to_toral({0, 0, 1}), Error);
  CHECK_THROWS_AS(r3_to_toral({1, 0, 0}), Error);
  CHECK_THROWS_AS(s3_to_toral({std::complex<double>(1, 0), 0}), Error);
}

TEST_CASE("invariant sets of the ambient systems") {
  auto psi = golden_psi();
  // S_0 is a circle of period 1. The RK4 stages leave the circle by ~(pi h)^2 / 2, which must stay
  // inside the guard: off it the driving term behaves like d log(1/d) and repels.
  auto tr = integrate_r3({0.6, 0.8, 0}, 0.25, 1e-4, psi);
  CHECK(dist3(tr.x.back(), R3{-0.8, 0.6, 0}) < 1e-10);
  // R_0: z(t) = tan(pi alpha t + arctan z)
  double z0 = 0.4;
  auto ax = integrate_r3({0, 0, z0}, 0.5, 1e-3, psi);
  CHECK(ax.x.back()[2] == doctest::Approx(std::tan(std::acos(-1.0) * psi.alpha * 0.5 + std::atan(z0))).epsilon(1e-10));
  CHECK(ax.x.back()[0] == 0);
  // S^1_-: z2 = 0 rotates z1 with speed 2 pi alpha
  std::complex<double> z1 = std::polar(1.0, 0.3);
  auto s1 = integrate_s3({z1, 0}, 1.5, 1e-3, psi, 1, false);
  CHECK(std::abs(s1.x.back()[0] - z1 * std::polar(1.0, kTwoPi * psi.alpha * 1.5)) < 1e-10);
  CHECK(std::abs(s1.x.back()[1]) == 0);
  // R_0 escapes in finite time
  CHECK_THROWS_AS(integrate_r3({0, 0, z0}, 5, 1e-3, psi), Error);
}

TEST_CASE("s3 integration") {
  auto psi = golden_psi();
  std::mt19937_64 rng(17);
  std::uniform_real_distribution<double> U(0, 1);
  for (int i = 0; i < 3; ++i) {
    ToralState st{U(rng), U(rng), 2 * U(rng) - 1};
    auto tr = integrate_s3(toral_to_s3(st), 10, 1e-3, psi, 100, false);
    CHECK(tr.max_drift < 1e-6);
    double worst = 0;
    for (size_t j = 0; j < tr.t.size(); ++j)
      worst = std::max(worst, dist3(tr.x[j], toral_to_s3(exact_flow(st, tr.t[j], psi).state)));
    CHECK(worst < 1e-6);
  }

  // d|z1|^2/dt = -2 Re(F conj(z1) conj(z2)) with F = z1 z2 psi, i.e. -2 |z1 z2|^2 psi
  ToralState st{0.37, 0.42, 0.3};
  double h = 1e-4;
  auto tr = integrate_s3(toral_to_s3(st), 0.05, h, psi, 1, false);
  for (size_t j = 1; j + 1 < tr.t.size(); j += 97) {
    double fd = (std::norm(tr.x[j + 1][0]) - std::norm(tr.x[j - 1][0])) / (2 * h);
    const S3& p = tr.x[j];
    ToralState q = s3_to_toral(p);
    double want = -2 * std::norm(p[0] * p[1]) * psi(q.omega, q.theta);
    CHECK(fd == doctest::Approx(want).epsilon(1e-5).scale(1));
  }

  // renormalization keeps the constraint at rounding level
  auto rn = integrate_s3(toral_to_s3(st), 2, 1e-3, psi, 100, true);
  const S3& e = rn.x.back();
  CHECK(std::fabs(std::norm(e[0]) + std::norm(e[1]) - 1) < 1e-14);
}

TEST_CASE("r3 integration") {
  auto zero = psi_callable([](double, double) { return 0.0; }, golden_psi().alpha);
  std::mt19937_64 rng(5);
  std::uniform_real_distribution<double> U(0, 1);
  for (int i = 0; i < 4; ++i) {
    ToralState st{U(rng), U(rng), 2 * U(rng) - 1};
    auto tr = integrate_r3(toral_to_r3(st), 10, 1e-3, zero, 100);
    CHECK(tr.max_drift < 1e-8);
  }

  // conjugacy in the perturbed system, away from the singular sets.
  // For s above ~2.6 the ambient point sits within 1e-6 of S_0 and doubles cannot resolve it.
  auto psi = golden_psi();
  int used = 0;
  for (int i = 0; i < 40 && used < 3; ++i) {
    ToralState st{U(rng), U(rng), 2 * U(rng) - 1};
    bool tame = true;
    for (int j = 0; j <= 100 && tame; ++j) {
      ToralState e = exact_flow(st, 0.1 * j, psi).state;
      tame = e.s < 2.2;
    }
    if (!tame) continue;
    ++used;
    auto tr = integrate_r3(toral_to_r3(st), 10, 1e-3, psi, 100);
    for (size_t j = 0; j < tr.t.size(); ++j) {
      R3 ex = toral_to_r3(exact_flow(st, tr.t[j], psi).state);
      double n = std::max({std::fabs(ex[0]), std::fabs(ex[1]), std::fabs(ex[2])});
      CHECK(dist3(tr.x[j], ex) / (1 + n * n) < 1e-4);
    }
  }
  CHECK(used == 3);

  std::ostringstream os;
  write_trajectory_csv(os, integrate_r3(toral_to_r3({0.3, 0.7, 0}), 0.01, 1e-3, psi, 5));
  CHECK(os.str().rfind("t,x,y,z,s,omega,theta,dist_to_S0,dist_to_R0\n", 0) == 0);
  std::ostringstream os2;
  write_trajectory_csv(os2, integrate_s3(toral_to_s3({0.3, 0.7, 0}), 0.01, 1e-3, psi, 5));
  CHECK(os2.str().rfind("t,re_z1,im_z1,re_z2,im_z2,s,omega,theta,dist_to_S1plus,dist_to_S1minus\n", 0) == 0);
}

TEST_CASE("limit sets") {
  auto g = ContinuedFraction::golden();
  auto fam = eightpiece(g, {6, 20, 42}, 0);
  auto psi = psi_from_phi(fam);

  // a point of F^{++} at level 3, omega - alpha theta = x with theta = 0
  auto set = build_orbit_type_set(fam, "++", 3);
  std::mt19937_64 rng(21);
  Rational x = sample_points(set.system, 3, 1, rng).front();
  REQUIRE(membership(set, x, 3).in);
  std::vector<BigInt> blocks{1, g.q(6), g.q(20), g.q(42)};
  LimitReport rep = classify_limit_set(AmbientSystem::S3, x, 0, 0, psi, 0, blocks, 64);
  CHECK(rep.forward_verdict == "+");
  CHECK(rep.backward_verdict == "+");
  REQUIRE(rep.forward_block_dist.size() == 3);
  CHECK(rep.forward_block_dist[2] < rep.forward_block_dist[0]);

  // every sign pattern: first sign is the backward trend, second the forward one
  for (const std::string t : {"++", "-+", "--", "+-"}) {
    auto st = build_orbit_type_set(fam, t, 3);
    std::mt19937_64 r2(1);
    for (const Rational& w : sample_points(st.system, 3, 2, r2)) {
      LimitReport lr = classify_limit_set(AmbientSystem::S3, w, 0, 0, psi, 0, blocks, 64);
      CHECK(lr.backward_verdict == t.substr(0, 1));
      CHECK(lr.forward_verdict == t.substr(1, 1));
    }
  }

  // the circle S^1_+ itself: s = +inf is out of reach, so check the invariant set directly
  std::complex<double> z2 = std::polar(1.0, 1.1);
  auto tr = integrate_s3({0, z2}, 3, 1e-3, psi, 100, false);
  for (const auto& p : tr.x) {
    CHECK(p[0] == 0.0);
    CHECK(dist_to_S1plus(p) < 1e-11);  // RK4 damps a rotation by (bh)^6 / 144 per step
  }

  // no driving term: each orbit stays on its torus
  auto zero = psi_from_phi(tent_custom(g, {Rational(0), Rational(0)}));
  LimitReport flat = classify_limit_set(AmbientSystem::R3, Rational(1, 3), Rational(1, 5), 0.5, zero, 1024);
  CHECK(flat.forward_verdict == "bounded");
  CHECK(flat.backward_verdict == "bounded");

  auto plain = psi_callable([](double, double) { return 1.0; }, psi.alpha);
  CHECK_THROWS_AS(classify_limit_set(AmbientSystem::S3, x, 0, 0, plain, 1024), Error);
}

TEST_CASE("hoelder lifts") {
  auto cf = construct_alpha_with_growth(2, 8, 4, 6);
  auto fam = tent_holder(cf, Rational(3, 20), 3);
  HolderReport hr = holder_levels(fam);
  REQUIRE(hr.ok);
  double M = hr.constant.hi_d();
  double sup = 0;
  for (const auto& lv : hr.levels) sup += lv.sup.get_d();
  auto psi = psi_from_phi(fam);
  auto f = [&](double w) { return psi.phi(w); };

  Lift1D L = holder_lift_1d(f, 0.15, M, sup);
  CHECK(L(0) == 0.0);
  for (double w : {0.0, 0.13, 0.5, 0.77}) {
    std::complex<double> z = std::polar(1.0, kTwoPi * w);
    CHECK(std::abs(L(z) - z * f(w)) < 1e-15);
  }
  LiftAudit a = audit_lift(L, 10000, 1);
  CHECK(a.ok);
  CHECK(a.constant == doctest::Approx(2 * (sup + M)));

  Lift1D c = holder_lift_1d([](double) { return 1.5; }, 1, 0, 1.5);
  CHECK(std::abs(c(std::complex<double>(0.3, 0.4)) - 1.5 * std::complex<double>(0.3, 0.4)) < 1e-15);
  CHECK(audit_lift(c, 2000, 2).ok);

  set_holder(psi, 0.15, M, sup);
  REQUIRE(psi.has_holder);
  Lift2D F = holder_lift_2d([&](double w, double t) { return psi(w, t); }, psi.gamma, psi.M, psi.C);
  CHECK(F(0, std::polar(1.0, 0.4)) == 0.0);
  std::complex<double> u = std::polar(1.0, 0.7), v = std::polar(1.0, 2.9);
  CHECK(std::abs(F(u, v) - u * v * psi(0.7 / kTwoPi, 2.9 / kTwoPi)) < 1e-15);
  CHECK(audit_lift(F, 10000, 3).ok);

  Lift2D one = holder_lift_2d([](double, double) { return 1.0; }, 1, 0, 1);
  LiftAudit ao = audit_lift(one, 4000, 4);
  CHECK(ao.worst <= 1 + 1e-12);
}
