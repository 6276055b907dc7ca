#include "besi/checks.hpp"

#include "besi/cantor.hpp"
#include "besi/flows.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <random>
#include <sstream>

namespace besi {

namespace {

using Clock = std::chrono::steady_clock;

double since(Clock::time_point t0) { return std::chrono::duration<double>(Clock::now() - t0).count(); }

std::string fmt(double x, int digits = 6) {
  std::ostringstream os;
  os.precision(digits);
  os << x;
  return os.str();
}

BigInt random_below(std::mt19937_64& rng, const BigInt& span) {
  // uniform enough for sampling: 64-bit chunks reduced mod span
  BigInt r = 0;
  for (size_t b = 0; b < bits(span) + 64; b += 64) r = (r << 64) + BigInt(std::to_string(rng()));
  return r % span;
}

struct Budget {
  double limit;
  bool ok(double s) const { return s < limit; }
};

CheckResult c01() {
  CheckResult r{1, "continued-fraction sandwich", true, "", 0};
  long checked = 0;
  for (const auto& cf : {ContinuedFraction::golden(), ContinuedFraction::sqrt2_minus_1()}) {
    for (long n = 0; n <= 25; ++n) {
      QInterval gap = approximation_gap(cf, n);
      BigInt qq = cf.q(n) * cf.q(n + 1);
      bool ok = gap.lo > Rational(1, 2 * qq) && gap.hi < Rational(1, qq);
      ++checked;
      if (!ok) {
        r.pass = false;
        r.detail += cf.describe() + " n=" + std::to_string(n) + " outside; ";
      }
    }
  }
  r.detail += std::to_string(checked) + " convergents in (1/(2 q_n q_{n+1}), 1/(q_n q_{n+1}))";
  return r;
}

CheckResult c02() {
  CheckResult r{2, "tent divergence, depth 6", true, "", 0};
  auto g = ContinuedFraction::golden();
  auto fam = tent_linear(g, 6);
  long checked = 0;
  for (int n = 1; n <= 5; ++n)
    for (BigInt k = g.q(n); k < g.q(n + 1); ++k)
      for (int sg : {1, -1}) {
        DivergenceCertificate c = divergence_certificate(fam, 0, BigInt(k * sg));
        ++checked;
        // M_{n(k)+1} / 2 with M_n = n
        bool ok = c.holds && c.bound == Rational(n + 1) / 2 && c.value.trunc_lo() >= c.bound;
        if (!ok) {
          r.pass = false;
          r.detail += "k=" + BigInt(k * sg).get_str() + " fails; ";
        }
      }
  r.detail += std::to_string(checked) + " k with q_1 <= |k| < q_6, phi^(k)(0) >= M_{n(k)+1}/2 exactly";
  return r;
}

CheckResult c03(std::uint64_t seed) {
  CheckResult r{3, "birkhoff vs direct summation", true, "", 0};
  auto fam = tent_linear(ContinuedFraction::golden(), 6);
  std::mt19937_64 rng(seed);
  const long K = 10000;
  long mism = 0;
  for (int i = 0; i < 100; ++i) {
    Rational x(static_cast<long>(rng() % 1000003), 1000003);
    x.canonicalize();
    auto [pos, neg] = direct_sums(fam, x, K);
    for (long k = 0; k <= K; ++k) {
      if (birkhoff(fam, x, BigInt(k)).center != pos[k].center) ++mism;
      if (birkhoff(fam, x, BigInt(-k)).center != neg[k].center) ++mism;
    }
  }
  r.pass = mism == 0;
  r.detail = "100 x, |k| <= 10^4, exact mismatches: " + std::to_string(mism);
  return r;
}

CheckResult c04() {
  CheckResult r{4, "fourier closed form and log bound", true, "", 0};
  // closed form against exact piecewise integration
  auto s2 = ContinuedFraction::sqrt2_minus_1();
  auto tr = trapezoid(s2, {1, 2, 3});
  long lim = 4 * s2.q(3).get_si();
  long disjoint = 0;
  for (long n = -lim; n <= lim; ++n) {
    FourierValue a = fourier_closed_form(tr, n), b = fourier_quadrature(tr, n);
    Interval ja = a.modulus.widen(a.tail), jb = b.modulus.widen(b.tail);
    if (ja.lt(jb) || jb.lt(ja)) ++disjoint;
  }
  r.detail = "|n| <= " + std::to_string(lim) + ": " + std::to_string(disjoint) + " disjoint enclosures";
  if (disjoint) r.pass = false;

  // log-tower alpha with M_k from choose_M_for_log_bound
  auto tw = construct_log_tower(2, 3, Rational(1, 10), 1);
  auto M = choose_M_for_log_bound(tw, Rational(1, 2), 3);
  auto fam = trapezoid(tw, M);
  BigInt top = tw.q(4);
  long scanned = 0, over = 0;
  auto scan = [&](const BigInt& n) {
    FourierValue f = fourier_closed_form(fam, n);
    Interval bound = Interval::of(n).log() / Interval::of(n);
    ++scanned;
    if (!f.modulus.widen(f.tail).le(bound)) ++over;
  };
  for (int m = 1; m <= 3; ++m) {
    BigInt q = tw.q(m);
    for (long s = 1; s <= 400; ++s) {
      BigInt n = q * s;
      if (n >= top) break;
      scan(n);
    }
    for (long j = 1; j <= 50; ++j) {
      BigInt n = q * (top / q / j);
      if (n > 0 && n < top) scan(n);
    }
  }
  r.detail += "; log tower (q_3 has " + std::to_string(bits(tw.q(3))) + " bits): " + std::to_string(scanned) +
              " n scanned, " + std::to_string(over) + " above log n / n";
  if (over) r.pass = false;
  Interval pi = Interval::pi();
  for (int m = 1; m <= 3; ++m) {
    // q_{m+1} / (4 q_{m-1}) < s < q_{m+1} / (2 q_{m-1})
    BigInt s = tw.q(m + 1) / (3 * tw.q(m - 1));
    bool in = Rational(s) > Rational(tw.q(m + 1), 4 * tw.q(m - 1)) && Rational(s) < Rational(tw.q(m + 1), 2 * tw.q(m - 1));
    BigInt n = s * tw.q(m);
    Interval lhs = fourier_closed_form(fam, n).modulus * Interval::of(n);
    Interval rhs = Interval::of(M[m - 1]) / (Interval::of(2L) * pi.sqr());
    bool ok = in && rhs.lt(lhs);
    r.detail += "; m=" + std::to_string(m) + " |n phi(n)| > M_m/(2 pi^2): " + (ok ? "yes" : "NO");
    if (!ok) r.pass = false;
  }
  return r;
}

CheckResult c05() {
  CheckResult r{5, "falconer oracle, middle third", true, "", 0};
  auto rep = falconer_lower_bound(middle_third(30));
  double target = std::log(2.0) / std::log(3.0);
  double last = rep.last.mid_d(), inf = rep.running_inf.mid_d();
  r.pass = std::fabs(last - target) <= 1e-6;
  r.detail = "level-30 ratio " + fmt(last, 10) + ", running infimum " + fmt(inf, 10) + ", log2/log3 " +
             fmt(target, 10) + ", gap " + fmt(std::fabs(last - target), 3) + " (tolerance 1e-6)";
  return r;
}

CheckResult c06(std::uint64_t seed) {
  CheckResult r{6, "orbit-type cantor pipeline", true, "", 0};
  auto cf = construct_alpha_with_growth(2, 8, 4, 8);
  auto sub = select_subsequence(cf, Parity::Even, SubsequenceRule::Separated, 3);
  auto fam = eightpiece(cf, sub.ks, 0);
  std::mt19937_64 rng(seed);
  long certs = 0, bad = 0;
  std::string rows;
  for (std::string t : {"++", "-+", "--", "+-"}) {
    OrbitTypeSet set = build_orbit_type_set(fam, t, 3);
    bool quarter = t == "-+" || t == "+-";
    bool ok = verify_system(set.system).ok && set.certificates.separated && set.certificates.amplitude_ratio;
    for (int n = 1; n <= 3; ++n) {
      ok = ok && set.system.lattice[n - 1].length() == (quarter ? set.deltas[n - 1] / 2 : set.deltas[n - 1] / 4);
      ok = ok && set.system.child_counts[n - 1] >= 2;
    }
    FalconerReport fr = falconer_lower_bound(set.system);
    for (const auto& row : fr.rows) {
      Interval sz = orbit_type_bound(cf, set, row.k);
      ok = ok && sz.le(row.ratio);
      rows += " " + t + ":k" + std::to_string(row.k) + " " + fmt(row.ratio.mid_d(), 4) + ">=" + fmt(sz.mid_d(), 4);
    }
    for (const Rational& x : sample_points(set.system, 3, 3, rng)) {
      ok = ok && membership(set, x, 3).in;
      for (int n = 1; n <= 3; ++n) {
        BigInt lo = cf.q(n == 1 ? 0 : sub.ks[n - 2]), hi = cf.q(sub.ks[n - 1]);
        if (quarter) {
          lo = (lo + 3) / 4;
          hi = (hi + 3) / 4;
        }
        std::vector<BigInt> ms{lo, BigInt(hi - 1), BigInt((lo + hi) / 2), BigInt(lo + random_below(rng, hi - lo))};
        for (const BigInt& m : ms) {
          if (m == 0) continue;
          for (int sg : {1, -1}) {
            DivergenceCertificate c = divergence_certificate(fam, x, BigInt(m * sg), t);
            ++certs;
            if (!(c.holds && c.consistent)) ++bad;
          }
        }
      }
    }
    if (!ok) {
      r.pass = false;
      r.detail += t + " structural check failed; ";
    }
  }
  if (bad) r.pass = false;
  r.detail += "ks {" + std::to_string(sub.ks[0]) + "," + std::to_string(sub.ks[1]) + "," + std::to_string(sub.ks[2]) +
              "}, " + std::to_string(certs) + " signed certificates, " + std::to_string(bad) + " failed;" + rows;
  return r;
}

CheckResult c07(std::uint64_t seed) {
  CheckResult r{7, "multidimensional cosine product", true, "", 0};
  Rational a(4, 3);
  RotationVector v = construct_rotation_vector(a, 3, 4);
  ProductCocycle p = product_cosine(v, Rational(1, 10), 3);
  std::vector<NestedIntervalSystem> sys;
  for (const auto& c : v.coords) sys.push_back(cosine_factor_system(c, 3));
  for (const auto& s : sys)
    if (!verify_system(s).ok) {
      r.pass = false;
      r.detail += "factor system invalid; ";
    }
  std::mt19937_64 rng(seed);
  int held = 0, side = 0;
  for (int i = 0; i < 20; ++i) {
    int n = 1 + (i / 3) % 3, j = 1 + i % 3;
    std::vector<Rational> x;
    for (const auto& s : sys) {
      auto pts = sample_points(s, 3, 1, rng);
      x.push_back(pts[rng() % pts.size()]);
    }
    BigInt lo = v.q(n + 1, j - 1) / 4 + 1, hi = v.q(n + 1, j) / 4;
    BigInt m = lo + random_below(rng, hi - lo + 1);
    if (i % 2) m = -m;
    CosineBound b = product_certificate(p, v, x, m);
    bool ok = b.in_range && b.value.trunc_lo() >= b.bound.hi_q();
    held += ok;
    side += b.side_condition;
  }
  if (held != 20) r.pass = false;
  Interval K = cosine_K(a, 3, Rational(1, 10));
  r.detail += std::to_string(held) + "/20 pairs with phi^(m)(x) >= theta |m|^{eps/a^d} - dK (K = " + fmt(K.mid_d()) +
              "), side condition met at " + std::to_string(side) + "/20;";
  double target = 27.0 / 91.0, worst = 1;
  for (size_t f = 0; f < sys.size(); ++f) {
    FalconerReport fr = falconer_lower_bound(sys[f]);
    r.detail += " F" + std::to_string(f + 1) + ":";
    for (const auto& row : fr.rows) {
      r.detail += " " + fmt(row.ratio.mid_d(), 4);
      worst = std::min(worst, row.ratio.lo_d());
      if (!(row.ratio.lo_d() >= 0.240)) r.pass = false;
    }
  }
  r.detail += "; min row " + fmt(worst, 4) + " vs 0.240 (1/(1+a^d) = 27/91 = " + fmt(target, 4) + ")";
  return r;
}

CheckResult c08(std::uint64_t seed) {
  CheckResult r{8, "flow conjugacy", true, "", 0};
  auto psi = psi_from_phi(tent_linear(ContinuedFraction::golden(), 3));
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> U(0, 1);
  double worst = 0, drift = 0;
  for (int i = 0; i < 10; ++i) {
    ToralState st{U(rng), U(rng), 2 * U(rng) - 1};
    auto tr = integrate_s3(toral_to_s3(st), 10, 1e-3, psi, 10, false);
    drift = std::max(drift, tr.max_drift);
    for (size_t k = 0; k < tr.t.size(); ++k) {
      S3 e = toral_to_s3(exact_flow(st, tr.t[k], psi).state);
      worst = std::max({worst, std::abs(e[0] - tr.x[k][0]), std::abs(e[1] - tr.x[k][1])});
    }
  }
  auto zero = psi_callable([](double, double) { return 0.0; }, psi.alpha);
  double fi = 0;
  for (int i = 0; i < 10; ++i) {
    ToralState st{U(rng), U(rng), 2 * U(rng) - 1};
    fi = std::max(fi, integrate_r3(toral_to_r3(st), 10, 1e-3, zero, 1000).max_drift);
  }
  r.pass = worst <= 1e-6 && drift <= 1e-6 && fi <= 1e-8;
  r.detail = "S3 sup error " + fmt(worst, 3) + " (<= 1e-6), sphere drift " + fmt(drift, 3) +
             " (<= 1e-6), R3 first-integral drift " + fmt(fi, 3) + " (<= 1e-8)";
  return r;
}

CheckResult c09(std::uint64_t seed) {
  CheckResult r{9, "hoelder certificates and lifts", true, "", 0};
  Rational gamma(3, 20);
  bool below = gamma < Rational(1, 6);  // 1 / ((1 + a) a), a = 2
  auto cf = construct_alpha_with_growth(2, 8, 4, 6);
  auto fam = tent_holder(cf, gamma, 4);
  HolderReport lv = holder_levels(fam);
  bool levels = lv.ok;
  for (const auto& h : lv.levels) levels = levels && h.lip_ok && h.sup_ok;
  HolderReport est = holder_estimate(fam, 10000, seed);
  bool sampled = est.ok && est.empirical <= lv.constant.hi_d();
  double M = lv.constant.hi_d(), sup = 0;
  for (const auto& h : lv.levels) sup += to_double_up(h.sup);
  auto psi = psi_from_phi(fam);
  Lift1D L1 = holder_lift_1d([&](double w) { return psi.phi(w); }, gamma.get_d(), M, sup);
  LiftAudit a1 = audit_lift(L1, 10000, seed + 1);
  set_holder(psi, gamma.get_d(), M, sup);
  Lift2D L2 = holder_lift_2d([&](double w, double t) { return psi(w, t); }, psi.gamma, psi.M, psi.C);
  LiftAudit a2 = audit_lift(L2, 10000, seed + 2);
  r.pass = below && levels && sampled && a1.ok && a2.ok;
  r.detail = std::string("gamma 3/20 < 1/6: ") + (below ? "yes" : "no") + "; level certificates " +
             (levels ? "hold" : "FAIL") + "; 10^4 pair ratios max " + fmt(est.empirical) + " <= D_{1-g} + 2 D_g = " +
             fmt(lv.constant.hi_d()) + "; lift audits " + fmt(a1.worst) + " <= " + fmt(a1.constant) + ", " +
             fmt(a2.worst) + " <= " + fmt(a2.constant);
  return r;
}

CheckResult c10() {
  CheckResult r{10, "rotation vector construction", true, "", 0};
  RotationVector v = construct_independent_vector(Rational(4, 3), 3, 2, 50);
  WindowReport nr = check_windows(v), dr = check_derived(v);
  auto rel = independence_scan(v, 50);
  r.pass = nr.ok && dr.ok && rel.empty();
  r.detail = std::string("growth windows ") + (nr.ok ? "hold" : "FAIL") + ", derived bounds " + (dr.ok ? "hold" : "FAIL") +
             ", relations of height <= 50: " + std::to_string(rel.size()) + ", q_2^(3) = " + v.q(2, 3).get_str();
  return r;
}

}  // namespace

CheckResult run_criterion(int id, std::uint64_t seed) {
  static const double budget[kCriteria] = {1, 10, 60, 30, 1, 300, 300, 120, 30, 60};
  auto t0 = Clock::now();
  CheckResult r;
  try {
    switch (id) {
      case 1: r = c01(); break;
      case 2: r = c02(); break;
      case 3: r = c03(seed); break;
      case 4: r = c04(); break;
      case 5: r = c05(); break;
      case 6: r = c06(seed); break;
      case 7: r = c07(seed); break;
      case 8: r = c08(seed); break;
      case 9: r = c09(seed); break;
      case 10: r = c10(); break;
      default: return {id, "unknown", false, "no such criterion", 0};
    }
  } catch (const std::exception& e) {
    r.id = id;
    r.pass = false;
    r.detail = std::string("error: ") + e.what();
  }
  r.seconds = since(t0);
  if (id >= 1 && id <= kCriteria && !Budget{budget[id - 1]}.ok(r.seconds)) {
    r.pass = false;
    r.detail += "; over the " + fmt(budget[id - 1]) + " s budget";
  }
  return r;
}

std::vector<int> suite_criteria(const std::string& suite) {
  if (suite == "diophantine") return {1, 10};
  if (suite == "cocycles") return {2, 3, 4, 9};
  if (suite == "cantor") return {5, 6, 7};
  if (suite == "flows") return {8};
  if (suite == "all") return {1, 2, 3, 4, 5, 6, 7, 8, 9, 10};
  throw Error(ErrorCode::ConfigError, "unknown suite '" + suite + "'");
}

}  // namespace besi
