#include "besi/cocycles.hpp"

#include <algorithm>
#include <climits>
#include <cmath>
#include <random>

namespace besi {

const char* kind_name(CocycleKind k) {
  switch (k) {
    case CocycleKind::Tent: return "tent";
    case CocycleKind::Trapezoid: return "trapezoid";
    case CocycleKind::EightPiece: return "eightpiece";
    case CocycleKind::Cosine: return "cosine";
  }
  return "?";
}

namespace {

// fractional part of x * q, computed on the numerator
Rational frac_times(const Rational& x, const BigInt& q) {
  BigInt r;
  BigInt num = x.get_num() * q;
  mpz_fdiv_r(r.get_mpz_t(), num.get_mpz_t(), x.get_den_mpz_t());
  Rational u(r, x.get_den());
  u.canonicalize();
  return u;
}

// lower end of x rounded down to a short dyadic
Rational round_down(const Interval& x, mpfr_prec_t bits = 64) {
  mpfr_t t;
  mpfr_init2(t, bits);
  mpfr_set(t, x.lo(), MPFR_RNDD);
  Rational r;
  mpfr_get_q(r.get_mpq_t(), t);
  mpfr_clear(t);
  return r;
}

Rational round_up(const Interval& x, mpfr_prec_t bits = 64) {
  mpfr_t t;
  mpfr_init2(t, bits);
  mpfr_set(t, x.hi(), MPFR_RNDU);
  Rational r;
  mpfr_get_q(r.get_mpq_t(), t);
  mpfr_clear(t);
  return r;
}

void need_q(const ContinuedFraction& cf, long n, const char* where) {
  if (cf.deepest(n) < n)
    throw Error(ErrorCode::DepthInsufficient,
                std::string(where) + ": needs q_" + std::to_string(n) + ", " +
                    std::to_string(cf.known()) + " quotients known");
}

AlphaApprox default_approx(const ContinuedFraction& cf, long top) {
  return approx_at(cf, cf.deepest(top + 64));
}

PLLevel tent_level(const ContinuedFraction& cf, long n, const Rational& M) {
  PLLevel lv;
  lv.index = n;
  lv.q = cf.q(n);
  lv.q_next = cf.q(n + 1);
  lv.q_base = cf.q(n - 1);
  lv.M = M;
  lv.L = M * lv.q * lv.q_next / lv.q_base;
  lv.delta = Rational(lv.q_base, lv.q * lv.q_next);
  lv.delta.canonicalize();
  lv.knots = {0, Rational(1, 2), 1};
  lv.values = {0, lv.L / (2 * lv.q), 0};
  lv.finish();
  return lv;
}

PLLevel trapezoid_level(const ContinuedFraction& cf, long m, const Rational& M) {
  PLLevel lv;
  lv.index = m;
  lv.q = cf.q(m);
  lv.q_next = cf.q(m + 1);
  lv.q_base = cf.q(m - 1);
  lv.M = M;
  lv.delta = Rational(lv.q_base, lv.q * lv.q_next);
  lv.delta.canonicalize();
  lv.L = M / lv.delta;
  Rational e = lv.q * lv.delta;
  if (e * 2 == 1) {
    // q_{m+1} = 2 q_{m-1}: the plateau shrinks to a point
    lv.knots = {0, e, 1};
    lv.values = {0, M, 0};
  } else {
    lv.knots = {0, e, 1 - e, 1};
    lv.values = {0, M, M, 0};
  }
  lv.finish();
  return lv;
}

PLLevel eight_level(const ContinuedFraction& cf, long k, long kprev, const Rational& M) {
  PLLevel lv;
  lv.index = k;
  lv.q = cf.q(k);
  lv.q_next = cf.q(k + 1);
  lv.q_base = cf.q(kprev);
  lv.M = M;
  lv.delta = Rational(lv.q_base, lv.q * lv.q_next);
  lv.delta.canonicalize();
  lv.L = M / lv.delta;
  Rational e = lv.q * lv.delta;
  Rational h(1, 2), qr(1, 4);
  std::vector<Rational> k8 = {0, e / 8, 5 * e / 8, qr - e / 2, qr + e / 2, h - 5 * e / 8, h - e / 8, h};
  std::vector<Rational> v8 = {0, 0, M / 2, M / 2, 3 * M / 2, 3 * M / 2, 2 * M, 2 * M};
  lv.knots = k8;
  lv.values = v8;
  for (int i = 6; i >= 0; --i) {
    lv.knots.push_back(1 - k8[i]);
    lv.values.push_back(v8[i]);
  }
  lv.finish();
  return lv;
}

// sum_{n>N} n / q_{n-1}, valid for any continuation of cf
Rational linear_tail(const ContinuedFraction& cf, long N) {
  long K = cf.deepest(N + 64) + 1;
  Rational s = 0;
  for (long n = N + 1; n <= K; ++n) s += Rational(n, cf.q(n - 1));
  s += Rational(7 * K + 24, 2 * cf.q(K - 1));
  s.canonicalize();
  return s;
}

Interval two_pi(mpfr_prec_t prec) { return Interval::pi(prec) * Interval::of(2L, prec); }

Interval cos_coef(const CosineLevel& c, mpfr_prec_t prec) {
  return Interval::of(c.q_next, prec) / Interval::of(c.q, prec).pow(Interval::of(c.beta, prec));
}

mpfr_prec_t cos_prec(const CosineLevel& c) {
  return static_cast<mpfr_prec_t>(bits(c.q_next) + 160);
}

// (2 pi)^{k+1} / q^{beta - k}
Interval cos_term(const BigInt& q, const Rational& beta, int k, mpfr_prec_t prec) {
  Interval tp = two_pi(prec);
  Interval p = Interval::of(1L, prec);
  for (int i = 0; i <= k; ++i) p = p * tp;
  return p / Interval::of(q, prec).pow(Interval::of(Rational(beta - k), prec));
}

// sum over n > N of (2 pi)^{k+1} q_n^{-(beta-k)} using q_{n+2} > 2 q_n
Interval cos_tail(const BigInt& q_first, const Rational& beta, int k, mpfr_prec_t prec) {
  Rational e = beta - k;
  if (sgn(e) <= 0) {
    return Interval::of(1e300, prec);
  }
  Interval r = Interval::of(2L, prec).pow(-Interval::of(e, prec));
  return cos_term(q_first, beta, k, prec) * Interval::of(2L, prec) /
         (Interval::of(1L, prec) - r);
}

CertifiedValue pl_birkhoff(const CocycleFamily& fam, const Rational& x, const BigInt& k) {
  CertifiedValue out;
  if (k == 0) return out;
  Rational y = frac(Rational(x + k * fam.approx.value));
  out.center = sum_levels(fam, y) - sum_levels(fam, frac(x));
  BigInt ak = abs(k);
  out.radius = fam.lip_total * ak * fam.approx.radius;
  out.tail_hi = fam.phi_tail * ak;
  out.tail_lo = out.tail_hi;
  if (fam.kind == CocycleKind::Tent && sgn(frac(x)) == 0) out.tail_lo = 0;
  return out;
}

CertifiedValue cos_birkhoff(const CocycleFamily& fam, const Rational& x, const BigInt& k) {
  CertifiedValue out;
  if (k == 0) return out;
  BigInt ak = abs(k);
  Rational shift = k * fam.approx.value;
  Interval acc = Interval::of(0L, 64);
  Interval lip = Interval::of(0L, 64);
  for (const auto& c : fam.cos) {
    mpfr_prec_t p = cos_prec(c);
    Interval tp = two_pi(p);
    Rational ux = frac_times(x, c.q);
    Rational uy = frac_times(Rational(x + shift), c.q);
    Interval coef = cos_coef(c, p);
    Interval d = (tp * Interval::of(ux, p)).cos() - (tp * Interval::of(uy, p)).cos();
    acc = acc + coef * d;
    lip = lip + coef * tp * Interval::of(c.q, p);
  }
  out = CertifiedValue::from_interval(acc);
  out.radius += round_up(lip * Interval::of(Rational(ak * fam.approx.radius), 256));
  out.tail_hi = fam.phi_tail * ak;
  out.tail_lo = out.tail_hi;
  return out;
}

struct CI {
  Interval re, im;
};
CI operator+(const CI& a, const CI& b) { return {a.re + b.re, a.im + b.im}; }
CI operator-(const CI& a, const CI& b) { return {a.re - b.re, a.im - b.im}; }
CI operator*(const CI& a, const CI& b) {
  return {a.re * b.re - a.im * b.im, a.re * b.im + a.im * b.re};
}

// e^{-2 pi i t}
CI expm(const Rational& t, mpfr_prec_t p) {
  Interval ang = two_pi(p) * Interval::of(frac(t), p);
  return {ang.cos(), -ang.sin()};
}

}  // namespace

// ---- PLLevel ------------------------------------------------------------------

void PLLevel::finish() {
  if (knots.size() < 2 || knots.size() != values.size())
    throw Error(ErrorCode::ConfigError, "level knots and values differ in length");
  if (knots.front() != 0 || knots.back() != 1)
    throw Error(ErrorCode::ConfigError, "level knots must span [0,1]");
  if (values.front() != values.back())
    throw Error(ErrorCode::ConfigError, "level is not periodic");
  slopes.clear();
  for (size_t i = 0; i + 1 < knots.size(); ++i) {
    if (!(knots[i] < knots[i + 1]))
      throw Error(ErrorCode::ConfigError, "level knots must increase");
    slopes.push_back((values[i + 1] - values[i]) / (knots[i + 1] - knots[i]));
    offsets.push_back(values[i] - slopes.back() * knots[i]);
  }
  B = 1;
  for (size_t i = 0; i < slopes.size(); ++i) {
    mpz_lcm(B.get_mpz_t(), B.get_mpz_t(), slopes[i].get_den_mpz_t());
    mpz_lcm(B.get_mpz_t(), B.get_mpz_t(), offsets[i].get_den_mpz_t());
  }
  A.clear();
  C.clear();
  kn.clear();
  kd.clear();
  for (size_t i = 0; i < slopes.size(); ++i) {
    A.push_back(slopes[i].get_num() * (B / slopes[i].get_den()));
    C.push_back(offsets[i].get_num() * (B / offsets[i].get_den()));
  }
  for (const auto& k : knots) {
    kn.push_back(k.get_num());
    kd.push_back(k.get_den());
  }
}

Rational PLLevel::eval_u(const Rational& u) const {
  auto it = std::upper_bound(knots.begin(), knots.end(), u);
  size_t i = static_cast<size_t>(it - knots.begin());
  i = i == 0 ? 0 : i - 1;
  if (i + 1 >= knots.size()) i = knots.size() - 2;
  Rational r;
  mpq_mul(r.get_mpq_t(), slopes[i].get_mpq_t(), u.get_mpq_t());
  mpq_add(r.get_mpq_t(), r.get_mpq_t(), offsets[i].get_mpq_t());
  return r;
}

Rational PLLevel::eval(const Rational& x) const { return eval_u(frac_times(x, q)); }

Rational PLLevel::sup() const { return *std::max_element(values.begin(), values.end()); }

Rational PLLevel::lipschitz() const {
  Rational m = 0;
  for (const auto& s : slopes) m = std::max<Rational>(m, abs_q(s));
  return m * q;
}

double CertifiedValue::total_radius() const {
  return to_double_up(radius + std::max<Rational>(tail_lo, tail_hi));
}

CertifiedValue CertifiedValue::from_interval(const Interval& x) {
  CertifiedValue v;
  Rational lo = x.lo_q(), hi = x.hi_q();
  v.center = (lo + hi) / 2;
  v.radius = (hi - lo) / 2;
  return v;
}

int CocycleFamily::depth() const {
  return static_cast<int>(piecewise_linear() ? pl.size() : cos.size());
}

Rational CocycleFamily::lipschitz_sum() const {
  Rational s = 0;
  for (const auto& lv : pl) s += lv.lipschitz();
  return s;
}

// ---- factories ------------------------------------------------------------------

CocycleFamily tent_linear(const ContinuedFraction& cf, int depth) {
  need_q(cf, depth + 1, "tent_linear");
  CocycleFamily f;
  f.kind = CocycleKind::Tent;
  f.alpha = cf;
  f.rule = "linear";
  for (int n = 1; n <= depth; ++n) f.pl.push_back(tent_level(cf, n, n));
  f.phi_tail = linear_tail(cf, depth);
  f.tail_note = "sum n/q_{n-1} over n > N, any continuation";
  set_approx(f, default_approx(cf, depth + 1));
  return f;
}

CocycleFamily tent_custom(const ContinuedFraction& cf, const std::vector<Rational>& M) {
  int depth = static_cast<int>(M.size());
  need_q(cf, depth + 1, "tent_custom");
  CocycleFamily f;
  f.kind = CocycleKind::Tent;
  f.alpha = cf;
  f.rule = "custom";
  for (int n = 1; n <= depth; ++n) f.pl.push_back(tent_level(cf, n, M[n - 1]));
  f.phi_tail = 0;
  f.tail_note = "finite family";
  set_approx(f, default_approx(cf, depth + 1));
  return f;
}

Interval lacunary_D(const Rational& beta) {
  Interval t = Interval::of(2L).pow(Interval::of(beta));
  return t / (t - Interval::of(1L));
}

CocycleFamily tent_holder(const ContinuedFraction& cf, const Rational& gamma, int depth) {
  if (sgn(gamma) <= 0 || gamma >= 1) throw Error(ErrorCode::ConfigError, "gamma must lie in (0,1)");
  need_q(cf, depth + 1, "tent_holder");
  CocycleFamily f;
  f.kind = CocycleKind::Tent;
  f.alpha = cf;
  f.rule = "holder";
  f.gamma = gamma;
  for (int n = 1; n <= depth; ++n) {
    BigInt w = cf.q(n) * cf.q(n + 1);
    mpfr_prec_t p = prec_for_bits(bits(w) + bits(cf.q(n - 1)));
    Interval m = Interval::of(cf.q(n - 1), p) /
                 (Interval::of(2L, p) * Interval::of(w, p).pow(Interval::of(gamma, p)));
    f.pl.push_back(tent_level(cf, n, round_down(m)));
  }
  // sum_{n>N} 1/(2 w_n^gamma) <= D_gamma / (2 w_{N+1}^gamma), w_{N+1} >= q_{N+1} q_{N+1 or N+2}
  long top = cf.deepest(depth + 2);
  BigInt w = cf.q(depth + 1) * cf.q(top);
  Interval t = lacunary_D(gamma) /
               (Interval::of(2L) * Interval::of(w, prec_for_bits(bits(w))).pow(Interval::of(gamma)));
  f.phi_tail = round_up(t);
  f.tail_note = "lacunary sum of w_n^-gamma / 2, any continuation";
  set_approx(f, default_approx(cf, depth + 1));
  return f;
}

CocycleFamily trapezoid(const ContinuedFraction& cf, const std::vector<Rational>& M) {
  int depth = static_cast<int>(M.size());
  need_q(cf, depth + 1, "trapezoid");
  CocycleFamily f;
  f.kind = CocycleKind::Trapezoid;
  f.alpha = cf;
  f.rule = "custom";
  for (int m = 1; m <= depth; ++m) f.pl.push_back(trapezoid_level(cf, m, M[m - 1]));
  f.phi_tail = 0;
  f.tail_note = "finite family";
  set_approx(f, default_approx(cf, depth + 1));
  return f;
}

std::vector<Rational> choose_M_for_log_bound(const ContinuedFraction& cf, const Rational& eps,
                                             int depth) {
  if (sgn(eps) <= 0 || eps >= 1) throw Error(ErrorCode::ConfigError, "eps must lie in (0,1)");
  need_q(cf, depth + 1, "choose_M_for_log_bound");
  std::vector<Rational> M;
  Interval prev_r;
  for (int k = 1; k <= depth; ++k) {
    BigInt qk = cf.q(k), qp = cf.q(k - 1);
    mpfr_prec_t p = prec_for_bits(bits(qk) + 2 * bits(qp));
    Interval r = Interval::of(qk, p).log() / (Interval::of(long(k), p) * Interval::of(qp, p).sqr());
    if (k >= 2 && !prev_r.lt(r))
      throw Error(ErrorCode::HypothesisFails,
                  "log q_k / (k q_{k-1}^2) is not increasing at k = " + std::to_string(k));
    prev_r = r;
    Interval cap = Interval::of(qp, p).pow(Interval::of(eps, p));
    M.push_back(round_down(r.min(cap)));
  }
  for (int k = 1; k < depth; ++k) {
    if (M[k] < M[k - 1])
      throw Error(ErrorCode::HypothesisFails, "M_k decreases at k = " + std::to_string(k + 1));
    Rational d0(cf.q(k - 1), cf.q(k) * cf.q(k + 1));
    Rational d1(cf.q(k), cf.q(k + 1) * cf.q(k + 2));
    d0.canonicalize();
    d1.canonicalize();
    if (!(d1 < d0))
      throw Error(ErrorCode::HypothesisFails, "delta_k does not decrease at k = " + std::to_string(k + 1));
  }
  return M;
}

CocycleFamily trapezoid_logrule(const ContinuedFraction& cf, const Rational& eps, int depth) {
  need_q(cf, depth + 2, "trapezoid_logrule");
  auto M = choose_M_for_log_bound(cf, eps, depth);
  CocycleFamily f = trapezoid(cf, M);
  f.rule = "logrule";
  f.eps = eps;
  // sum_{k>N} q_{k-1}^{eps-1} <= q_N^{eps-1} * 2 / (1 - 2^{-(1-eps)})
  BigInt qN = cf.q(depth);
  mpfr_prec_t p = prec_for_bits(bits(qN));
  Rational e1 = 1 - eps;
  Interval t = Interval::of(qN, p).pow(-Interval::of(e1, p)) * Interval::of(2L, p) /
               (Interval::of(1L, p) - Interval::of(2L, p).pow(-Interval::of(e1, p)));
  f.phi_tail = round_up(t);
  f.tail_note = "M_k <= q_{k-1}^eps continued, any continuation";
  return f;
}

CocycleFamily eightpiece(const ContinuedFraction& cf, const std::vector<long>& ks, long k0,
                         const std::vector<Rational>& M) {
  if (ks.empty()) throw Error(ErrorCode::ConfigError, "eightpiece needs at least one level");
  if (!M.empty() && M.size() != ks.size())
    throw Error(ErrorCode::ConfigError, "eightpiece: M and k lengths differ");
  long prev = k0;
  for (long k : ks) {
    if (k <= prev) throw Error(ErrorCode::ConfigError, "eightpiece: indices must increase");
    if ((k - ks[0]) % 2 != 0)
      throw Error(ErrorCode::ConfigError, "eightpiece: indices must share parity");
    prev = k;
  }
  need_q(cf, ks.back() + 1, "eightpiece");
  CocycleFamily f;
  f.kind = CocycleKind::EightPiece;
  f.alpha = cf;
  f.seed_index = k0;
  f.subsequence = ks;
  f.odd = (ks[0] % 2) != 0;
  prev = k0;
  Rational pw = 1;
  for (size_t i = 0; i < ks.size(); ++i) {
    pw *= 33;
    Rational m = M.empty() ? pw : M[i];
    f.pl.push_back(eight_level(cf, ks[i], prev, m));
    prev = ks[i];
  }
  if (M.empty()) {
    f.rule = "pow33";
    // M_n / q_{k_{n-1}} with q_{k_n} >= 64 q_{k_{n-1}}: ratio 33/64
    f.phi_tail = Rational(64, 31) * pw * 33 / cf.q(ks.back());
    f.phi_tail.canonicalize();
    f.tail_note = "assumes the selection rule keeps q_{k_n} >= 64 q_{k_{n-1}}";
  } else {
    f.rule = "custom";
    f.phi_tail = 0;
    f.tail_note = "finite family";
  }
  set_approx(f, default_approx(cf, ks.back() + 1));
  return f;
}

Rational abar_of(const Rational& a, int d) {
  Rational ad1 = pow_q(a, static_cast<unsigned long>(d - 1));
  return 2 * ad1 - ad1 * a - 1;
}

CocycleFamily cosine(const ContinuedFraction& cf, const Rational& a, int d, const Rational& eps,
                     int depth) {
  Rational abar = abar_of(a, d);
  if (sgn(eps) <= 0 || eps >= abar)
    throw Error(ErrorCode::ConfigError, "cosine: need 0 < eps < abar = " + to_string(abar));
  need_q(cf, depth + 1, "cosine");
  CocycleFamily f;
  f.kind = CocycleKind::Cosine;
  f.alpha = cf;
  f.rule = "cosine";
  f.a = a;
  f.eps = eps;
  f.abar = abar;
  f.dim = d;
  Rational beta = 1 + abar - eps;
  for (int n = 1; n <= depth; ++n) f.cos.push_back({n, cf.q(n), cf.q(n + 1), beta});
  long top = cf.deepest(depth + 1);
  mpfr_prec_t p = prec_for_bits(bits(cf.q(top)));
  f.phi_tail = round_up(cos_tail(cf.q(depth + 1), beta, 0, p));
  f.tail_note = "2 pi q_n^-(1+abar-eps) summed with q_{n+2} > 2 q_n";
  set_approx(f, default_approx(cf, depth + 1));
  return f;
}

ProductCocycle product_cosine(const RotationVector& v, const Rational& eps, int depth) {
  ProductCocycle p;
  for (const auto& c : v.coords) p.components.push_back(cosine(c, v.a, v.d(), eps, depth));
  return p;
}

void set_approx(CocycleFamily& fam, const AlphaApprox& a) {
  fam.approx = a;
  fam.lip_total = fam.lipschitz_sum();
  fam.level_den = 1;
  for (const auto& lv : fam.pl)
    mpz_lcm(fam.level_den.get_mpz_t(), fam.level_den.get_mpz_t(), lv.B.get_mpz_t());
  fam.level_mult.clear();
  for (const auto& lv : fam.pl) fam.level_mult.push_back(fam.level_den / lv.B);
}

Rational sum_levels(const CocycleFamily& fam, const Rational& y) {
  if (fam.level_mult.size() != fam.pl.size())
    throw Error(ErrorCode::ConfigError, "sum_levels: family not finalized");
  // y = Y/D, u_n = r_n/D with r_n = Y q_n mod D; f_n = (A r_n + C D) / (B D)
  const BigInt& D = y.get_den();
  thread_local BigInt r, t, lhs, rhs, total;
  total = 0;
  for (size_t l = 0; l < fam.pl.size(); ++l) {
    const PLLevel& lv = fam.pl[l];
    mpz_mul(t.get_mpz_t(), y.get_num_mpz_t(), lv.q.get_mpz_t());
    mpz_fdiv_r(r.get_mpz_t(), t.get_mpz_t(), D.get_mpz_t());
    // last knot i with kn_i / kd_i <= r / D
    size_t lo = 0, hi = lv.kn.size() - 1;
    while (hi - lo > 1) {
      size_t mid = (lo + hi) / 2;
      mpz_mul(lhs.get_mpz_t(), lv.kn[mid].get_mpz_t(), D.get_mpz_t());
      mpz_mul(rhs.get_mpz_t(), r.get_mpz_t(), lv.kd[mid].get_mpz_t());
      if (mpz_cmp(lhs.get_mpz_t(), rhs.get_mpz_t()) <= 0)
        lo = mid;
      else
        hi = mid;
    }
    mpz_mul(t.get_mpz_t(), lv.A[lo].get_mpz_t(), r.get_mpz_t());
    mpz_addmul(t.get_mpz_t(), lv.C[lo].get_mpz_t(), D.get_mpz_t());
    mpz_addmul(total.get_mpz_t(), t.get_mpz_t(), fam.level_mult[l].get_mpz_t());
  }
  Rational out(total, BigInt(fam.level_den * D));
  out.canonicalize();
  return out;
}

// ---- evaluation -----------------------------------------------------------------

Rational eval_level(const CocycleFamily& fam, int n, const Rational& x) {
  if (!fam.piecewise_linear())
    throw Error(ErrorCode::ConfigError, "eval_level: cosine levels are transcendental");
  if (n < 1 || n > fam.depth()) throw Error(ErrorCode::DepthInsufficient, "eval_level: no such level");
  return fam.pl[n - 1].eval(x);
}

Interval eval_level_cos(const CocycleFamily& fam, int n, const Rational& x, mpfr_prec_t prec) {
  if (fam.kind != CocycleKind::Cosine || n < 1 || n > fam.depth())
    throw Error(ErrorCode::ConfigError, "eval_level_cos: not a cosine level");
  const auto& c = fam.cos[n - 1];
  mpfr_prec_t p = prec ? prec : cos_prec(c);
  Interval ang = two_pi(p) * Interval::of(frac_times(x, c.q), p);
  return cos_coef(c, p) * (Interval::of(1L, p) - ang.cos());
}

CertifiedValue birkhoff(const CocycleFamily& fam, const Rational& x, const BigInt& k) {
  return fam.piecewise_linear() ? pl_birkhoff(fam, x, k) : cos_birkhoff(fam, x, k);
}

CertifiedValue eval_phi(const CocycleFamily& fam, const Rational& x) {
  return birkhoff(fam, x, BigInt(1));
}

namespace {

// phi(y) with no shared work between terms
Rational pl_phi_center(const CocycleFamily& fam, const Rational& y) {
  Rational z = frac(Rational(y + fam.approx.value));
  return sum_levels(fam, z) - sum_levels(fam, y);
}

Interval cos_phi(const CocycleFamily& fam, const Rational& y) {
  CertifiedValue v = cos_birkhoff(fam, y, BigInt(1));
  return Interval::hull(v.trunc_lo(), v.trunc_hi());
}

// |k|^2 + 2|k| approximation steps of size Lip * rad
Rational direct_radius(const CocycleFamily& fam, long k, const Rational& lip) {
  BigInt ak = std::labs(k);
  return lip * fam.approx.radius * (ak * ak + 2 * ak);
}

Rational cos_lipschitz(const CocycleFamily& fam) {
  Interval lip = Interval::of(0L, 64);
  for (const auto& c : fam.cos) {
    mpfr_prec_t p = cos_prec(c);
    lip = lip + cos_coef(c, p) * two_pi(p) * Interval::of(c.q, p);
  }
  return round_up(lip);
}

}  // namespace

std::pair<std::vector<CertifiedValue>, std::vector<CertifiedValue>> direct_sums(
    const CocycleFamily& fam, const Rational& x, long K) {
  std::vector<CertifiedValue> pos(static_cast<size_t>(K + 1)), neg(static_cast<size_t>(K + 1));
  const Rational& c = fam.approx.value;
  if (fam.piecewise_linear()) {
    const Rational& lip = fam.lip_total;
    Rational acc = 0;
    Rational y = frac(x);
    for (long i = 1; i <= K; ++i) {
      acc += pl_phi_center(fam, y);
      y = frac(Rational(y + c));
      pos[i].center = acc;
      pos[i].radius = direct_radius(fam, i, lip);
    }
    acc = 0;
    y = frac(x);
    for (long i = 1; i <= K; ++i) {
      y = frac(Rational(y - c));
      acc -= pl_phi_center(fam, y);
      neg[i].center = acc;
      neg[i].radius = direct_radius(fam, i, lip);
    }
  } else {
    Rational lip = cos_lipschitz(fam);
    Interval acc = Interval::of(0L, 64);
    Rational y = frac(x);
    for (long i = 1; i <= K; ++i) {
      acc = acc + cos_phi(fam, y);
      y = frac(Rational(y + c));
      pos[i] = CertifiedValue::from_interval(acc);
      pos[i].radius += direct_radius(fam, i, lip);
    }
    acc = Interval::of(0L, 64);
    y = frac(x);
    for (long i = 1; i <= K; ++i) {
      y = frac(Rational(y - c));
      acc = acc - cos_phi(fam, y);
      neg[i] = CertifiedValue::from_interval(acc);
      neg[i].radius += direct_radius(fam, i, lip);
    }
  }
  for (long i = 1; i <= K; ++i) {
    pos[i].tail_hi = pos[i].tail_lo = fam.phi_tail * i;
    neg[i].tail_hi = neg[i].tail_lo = fam.phi_tail * i;
  }
  return {std::move(pos), std::move(neg)};
}

CertifiedValue direct_sum(const CocycleFamily& fam, const Rational& x, long k) {
  auto [pos, neg] = direct_sums(fam, x, std::labs(k));
  return k >= 0 ? pos[k] : neg[-k];
}

CertifiedValue birkhoff(const ProductCocycle& p, const std::vector<Rational>& x, const BigInt& m) {
  if (x.size() != p.components.size())
    throw Error(ErrorCode::ConfigError, "product birkhoff: dimension mismatch");
  CertifiedValue out;
  for (size_t j = 0; j < x.size(); ++j) {
    CertifiedValue v = birkhoff(p.components[j], x[j], m);
    out.center += v.center;
    out.radius += v.radius;
    out.tail_lo += v.tail_lo;
    out.tail_hi += v.tail_hi;
  }
  return out;
}

Rational integrate_phi_exact(const CocycleFamily& fam, long max_pieces) {
  if (!fam.piecewise_linear())
    throw Error(ErrorCode::ConfigError, "integrate_phi_exact: piecewise-linear kinds only");
  Rational total = 0;
  auto integral = [&](const PLLevel& lv, const Rational& c) {
    std::vector<Rational> pts{0, 1};
    BigInt count = lv.q * BigInt(lv.knots.size());
    if (count > max_pieces) throw Error(ErrorCode::GridTooCoarse, "integrate_phi_exact: too many pieces");
    long q = lv.q.get_si();
    for (long j = 0; j < q; ++j)
      for (size_t i = 0; i + 1 < lv.knots.size(); ++i)
        pts.push_back(frac(Rational((j + lv.knots[i]) / lv.q - c)));
    std::sort(pts.begin(), pts.end());
    pts.erase(std::unique(pts.begin(), pts.end()), pts.end());
    Rational s = 0;
    Rational prev = lv.eval(Rational(pts[0] + c));
    for (size_t i = 1; i < pts.size(); ++i) {
      // right end is a knot of the shifted level; approach from the left
      Rational cur = i + 1 == pts.size() ? lv.eval(c) : lv.eval(Rational(pts[i] + c));
      s += (pts[i] - pts[i - 1]) * (prev + cur) / 2;
      prev = cur;
    }
    return s;
  };
  for (const auto& lv : fam.pl) total += integral(lv, fam.approx.value) - integral(lv, 0);
  return total;
}

// ---- certificates ---------------------------------------------------------------

bool tent_level_certificate(const CocycleFamily& fam, const BigInt& k) {
  if (fam.kind != CocycleKind::Tent) throw Error(ErrorCode::ConfigError, "tent certificate on non-tent family");
  BigInt ak = abs(k);
  int n = -1;
  for (int m = 0; m + 1 <= fam.depth(); ++m)
    if (fam.alpha.q(m) <= ak && ak < fam.alpha.q(m + 1)) n = m;
  if (n < 0) throw Error(ErrorCode::RangeUnresolved, "k outside the constructed tent ranges");
  const PLLevel& lv = fam.pl[n];
  Rational y = frac(Rational(k * fam.approx.value));
  Rational lo = lv.eval(y) - lv.lipschitz() * ak * fam.approx.radius;
  return lo >= lv.M / 2;
}

DivergenceCertificate divergence_certificate(const CocycleFamily& fam, const Rational& x,
                                             const BigInt& k, const std::string& type) {
  DivergenceCertificate c;
  BigInt ak = abs(k);
  if (fam.kind == CocycleKind::Tent) {
    if (sgn(frac(x)) != 0) throw Error(ErrorCode::HypothesisFails, "tent certificate needs x = 0");
    int n = -1;
    for (int m = 0; m + 1 <= fam.depth(); ++m)
      if (fam.alpha.q(m) <= ak && ak < fam.alpha.q(m + 1)) n = m;
    if (n < 0) throw Error(ErrorCode::RangeUnresolved, "k outside the constructed tent ranges");
    c.level = n + 1;
    c.bound = fam.pl[n].M / 2;
    c.sign = 1;
    c.rule = "f_{n+1}(k alpha) >= M_{n+1}/2";
  } else if (fam.kind == CocycleKind::EightPiece) {
    bool quarter = type == "-+" || type == "+-";
    if (!quarter && type != "++" && type != "--")
      throw Error(ErrorCode::ConfigError, "eightpiece certificate type must be ++, -+, --, +-");
    if (k == 0) throw Error(ErrorCode::RangeUnresolved, "m = 0");
    BigInt scaled = quarter ? BigInt(4 * ak) : ak;
    int n = -1;
    long prev = fam.seed_index;
    for (int i = 0; i < fam.depth(); ++i) {
      long ki = fam.subsequence[i];
      if (fam.alpha.q(prev) <= scaled && scaled < fam.alpha.q(ki)) n = i + 1;
      prev = ki;
    }
    if (n < 0) throw Error(ErrorCode::RangeUnresolved, "m outside the constructed eight-piece ranges");
    c.level = n;
    Rational Mn = fam.pl[n - 1].M;
    char s = k > 0 ? type[1] : type[0];
    c.sign = s == '+' ? 1 : -1;
    c.bound = (quarter ? Mn / 16 : Mn / 4) * c.sign;
    c.rule = quarter ? "M_n/16" : "M_n/4";
  } else {
    throw Error(ErrorCode::ConfigError, "divergence_certificate: use cosine_certificate");
  }
  c.value = birkhoff(fam, x, k);
  if (c.sign > 0) {
    c.holds = c.value.trunc_lo() >= c.bound;
    c.consistent = c.bound <= c.value.trunc_hi();
  } else {
    c.holds = c.value.trunc_hi() <= c.bound;
    c.consistent = c.bound >= c.value.trunc_lo();
  }
  return c;
}

Interval cosine_K(const Rational& a, int d, const Rational& eps) {
  Rational e = abar_of(a, d) - eps;
  Interval pi = Interval::pi();
  Interval two = Interval::of(2L);
  return two * pi.sqr() / (Interval::of(4L).pow(Interval::of(e)) - Interval::of(1L));
}

namespace {

Rational ad_of(const Rational& a, int d) { return pow_q(a, static_cast<unsigned long>(d)); }

void finish_bound(CosineBound& b, const BigInt& m, const Rational& a, int d, const Rational& eps,
                  const PowProduct& C0pow, long copies) {
  Rational ad = ad_of(a, d);
  Rational ex = eps / ad;
  // theta = C0^{-(1 + eps/a^d)}
  Interval c0 = eval_pow(C0pow);
  b.theta = Interval::of(1L) / c0.pow(Interval::of(Rational(1 + ex)));
  b.K = cosine_K(a, d, eps);
  Interval am = Interval::of(BigInt(abs(m)), prec_for_bits(bits(m)));
  b.bound = b.theta * am.pow(Interval::of(ex)) - Interval::of(copies) * b.K;
}

}  // namespace

CosineBound cosine_certificate(const CocycleFamily& fam, const Rational& x, const BigInt& m,
                               const Rational& C0) {
  if (fam.kind != CocycleKind::Cosine) throw Error(ErrorCode::ConfigError, "cosine_certificate: cosine only");
  CosineBound b;
  BigInt am = abs(m);
  Rational ad1 = pow_q(fam.a, static_cast<unsigned long>(fam.dim - 1));
  for (const auto& c : fam.cos) {
    bool lo = exact_le({{Rational(c.q), ad1}}, {{Rational(am), 1}});
    bool hi = 4 * am <= c.q_next;
    if (lo && hi) {
      b.level = static_cast<int>(c.index);
      b.side_condition = exact_le({{64, 1}, {C0, 1}}, {{Rational(c.q), fam.abar}});
      b.in_range = true;
      break;
    }
  }
  if (!b.in_range) throw Error(ErrorCode::RangeUnresolved, "m outside the constructed cosine ranges");
  finish_bound(b, m, fam.a, fam.dim, fam.eps, {{C0, 1}}, 1);
  b.value = birkhoff(fam, x, m);
  b.holds = b.side_condition && b.value.trunc_lo() >= b.bound.hi_q();
  return b;
}

CosineBound product_certificate(const ProductCocycle& p, const RotationVector& v,
                                const std::vector<Rational>& x, const BigInt& m) {
  int d = v.d();
  if (static_cast<int>(p.components.size()) != d)
    throw Error(ErrorCode::ConfigError, "product_certificate: dimension mismatch");
  CosineBound b;
  BigInt am = abs(m);
  const CocycleFamily& f0 = p.components[0];
  Rational ad1 = pow_q(v.a, static_cast<unsigned long>(d - 1));
  for (int n = 1; n <= f0.depth() && !b.in_range; ++n) {
    for (int j = 1; j <= d; ++j) {
      BigInt lower = v.q(n + 1, j - 1), upper = v.q(n + 1, j);
      if (lower <= 4 * am && 4 * am <= upper) {
        b.level = n;
        b.slot = j;
        BigInt qn = v.q(n, j);
        b.in_range = exact_le({{Rational(qn), ad1}}, {{Rational(am), 1}});
        break;
      }
    }
  }
  if (b.slot == 0) throw Error(ErrorCode::RangeUnresolved, "m outside the constructed product ranges");
  GrowthConstants g = growth_constants(v.a);
  Rational s = 0, ai = 1;
  for (int i = 0; i < d; ++i) {
    s += ai;
    ai *= v.a;
  }
  BigInt qn = v.q(b.level, b.slot);
  b.side_condition = exact_le({{64, 1}, {g.C, s}}, {{Rational(qn), f0.abar}});
  finish_bound(b, m, v.a, d, f0.eps, {{g.C, s}}, d);
  b.value = birkhoff(p, x, m);
  b.holds = b.in_range && b.side_condition && b.value.trunc_lo() >= b.bound.hi_q();
  return b;
}

// ---- Fourier --------------------------------------------------------------------

Interval g_hat(const CocycleFamily& fam, int m, long s) {
  if (fam.kind != CocycleKind::Trapezoid || m < 1 || m > fam.depth())
    throw Error(ErrorCode::ConfigError, "g_hat: trapezoid level required");
  const PLLevel& lv = fam.pl[m - 1];
  if (s == 0) return Interval::of(Rational(1 - lv.q * lv.delta));
  Interval pi = Interval::pi();
  Rational t = frac(Rational(s * lv.q * lv.delta));
  Interval sn = (pi * Interval::of(t)).sin();
  return -(sn.sqr() / (pi.sqr() * Interval::of(s).sqr()));
}

FourierValue fourier_closed_form(const CocycleFamily& fam, long n) { return fourier_closed_form(fam, BigInt(n)); }

FourierValue fourier_closed_form(const CocycleFamily& fam, const BigInt& n) {
  if (fam.kind != CocycleKind::Trapezoid)
    throw Error(ErrorCode::ConfigError, "fourier_closed_form: trapezoid family required");
  FourierValue out{Interval::of(0L), 0};
  if (n == 0) return out;
  BigInt an = abs(n);
  mpfr_prec_t p = 256;
  Interval pi = Interval::pi(p);
  Interval sum = Interval::of(0L, p);
  // fractional parts by integer remainders; n can have ~10^6 bits
  auto frac_of = [&](const Rational& x) {
    BigInt num = an * x.get_num();
    mpz_fdiv_r(num.get_mpz_t(), num.get_mpz_t(), x.get_den().get_mpz_t());
    return Interval::of(num, p) / Interval::of(x.get_den(), p);
  };
  for (const auto& lv : fam.pl) {
    if (BigInt(an % lv.q) != 0) continue;
    Interval sn = (pi * frac_of(lv.delta)).sin();
    sum = sum + Interval::of(Rational(lv.L * lv.q), p) * sn.sqr();
  }
  Interval c = frac_of(fam.approx.value);
  Interval r = Interval::of(an, p) * Interval::of(fam.approx.radius, p);
  if (!(r.hi_d() < 0.25)) throw Error(ErrorCode::PrecisionInsufficient, "fourier_closed_form: alpha approximation too coarse for n");
  Interval sa = (pi * (c - r).join(c + r)).sin().abs();
  out.modulus = Interval::of(2L, p) * sa * sum / (pi.sqr() * Interval::of(an, p).sqr());
  BigInt qn1 = fam.alpha.q(fam.pl.empty() ? 1 : fam.pl.back().index + 1);
  if (an >= qn1) out.tail = fam.phi_tail;
  return out;
}

FourierValue fourier_quadrature(const CocycleFamily& fam, long n, long max_pieces) {
  if (!fam.piecewise_linear())
    throw Error(ErrorCode::ConfigError, "fourier_quadrature: piecewise-linear kinds only");
  FourierValue out{Interval::of(0L), 0};
  if (n == 0 || fam.pl.empty()) return out;
  mpfr_prec_t p = 256;
  Interval pi = Interval::pi(p);
  Interval inv1 = Interval::of(1L, p) / (Interval::of(2L, p) * pi * Interval::of(n, p));
  Interval inv2 = inv1.sqr();
  CI total{Interval::of(0L, p), Interval::of(0L, p)};
  long pieces = 0;
  for (const auto& lv : fam.pl) {
    pieces += static_cast<long>(lv.q.get_si() * static_cast<long>(lv.knots.size() - 1));
    if (!lv.q.fits_slong_p() || pieces > max_pieces)
      throw Error(ErrorCode::GridTooCoarse, "fourier_quadrature: too many pieces");
    long q = lv.q.get_si();
    for (long j = 0; j < q; ++j) {
      for (size_t i = 0; i + 1 < lv.knots.size(); ++i) {
        Rational a = (j + lv.knots[i]) / lv.q;
        Rational b = (j + lv.knots[i + 1]) / lv.q;
        Interval s = Interval::of(Rational(lv.slopes[i] * lv.q), p);
        // e^{cx} ((v + s(x-a))/c - s/c^2) with 1/c = i/(2 pi n), -1/c^2 = 1/(4 pi^2 n^2)
        CI fb{s * inv2, Interval::of(lv.values[i + 1], p) * inv1};
        CI fa{s * inv2, Interval::of(lv.values[i], p) * inv1};
        total = total + expm(Rational(n * b), p) * fb - expm(Rational(n * a), p) * fa;
      }
    }
  }
  Rational c = frac(Rational(n * fam.approx.value));
  Rational r = std::labs(n) * fam.approx.radius;
  Interval ang = Interval::of(2L, p) * pi * Interval::hull(c - r, c + r, p);
  CI mult{ang.cos() - Interval::of(1L, p), ang.sin()};
  CI v = mult * total;
  out.modulus = (v.re.sqr() + v.im.sqr()).sqrt();
  BigInt qn1 = fam.alpha.q(fam.pl.back().index + 1);
  if (std::labs(n) >= qn1) out.tail = fam.phi_tail;
  return out;
}

// ---- Hoelder --------------------------------------------------------------------

HolderReport holder_levels(const CocycleFamily& fam) {
  if (fam.kind != CocycleKind::Tent || fam.rule != "holder")
    throw Error(ErrorCode::ConfigError, "holder_levels: tent family with the holder rule required");
  HolderReport r;
  r.gamma = fam.gamma;
  bool all = true;
  for (const auto& lv : fam.pl) {
    HolderLevel h;
    h.n = static_cast<int>(lv.index);
    h.lip = 2 * lv.L;
    h.sup = lv.L / (lv.q * lv.q_next);
    Rational g1 = 1 - fam.gamma;
    h.lip_ok = exact_le({{h.lip, 1}}, {{Rational(lv.q), g1}, {Rational(lv.q_next), g1}});
    h.sup_ok = exact_le({{h.sup, 1}, {Rational(lv.q), fam.gamma}, {Rational(lv.q_next), fam.gamma}},
                        {{1, 1}});
    all = all && h.lip_ok && h.sup_ok;
    r.levels.push_back(h);
  }
  r.constant = lacunary_D(1 - fam.gamma) + Interval::of(2L) * lacunary_D(fam.gamma);
  r.ok = all;
  return r;
}

HolderReport holder_estimate(const CocycleFamily& fam, long samples, std::uint64_t seed) {
  HolderReport r = holder_levels(fam);
  if (!r.ok) {
    for (const auto& h : r.levels)
      if (!h.lip_ok || !h.sup_ok)
        throw Error(ErrorCode::LevelBoundViolated,
                    "holder: level " + std::to_string(h.n) + " breaks the w_n bounds");
  }
  std::mt19937_64 rng(seed);
  const PLLevel& top = fam.pl.back();
  BigInt w = top.q * top.q_next;
  double lmin = -2.0 * std::log(w.get_d()), lmax = std::log(0.5);
  std::uniform_real_distribution<double> U(lmin, lmax);
  Interval worst = Interval::of(0L, 128);
  for (long i = 0; i < samples; ++i) {
    Rational x(static_cast<unsigned long>(rng() >> 11), 1UL << 53);
    x.canonicalize();
    Rational d = rational_from_double(std::exp(U(rng)));
    if (sgn(d) <= 0) continue;
    Rational y = frac(Rational(x + d));
    CertifiedValue vx = eval_phi(fam, x), vy = eval_phi(fam, y);
    Rational diff = abs_q(Rational(vx.center - vy.center)) + vx.radius + vy.radius;
    Interval ratio = Interval::of(diff, 128) / Interval::of(d, 128).pow(Interval::of(fam.gamma, 128));
    if (mpfr_greater_p(ratio.hi(), worst.hi())) {
      worst = ratio;
      r.worst_x = x.get_d();
      r.worst_y = y.get_d();
    }
  }
  r.empirical = worst.hi_d();
  r.ok = r.ok && worst.le(r.constant);
  return r;
}

double holder_probe(const CocycleFamily& fam, const Rational& gamma_prime, int level) {
  if (level < 1 || level > fam.depth()) throw Error(ErrorCode::DepthInsufficient, "holder_probe: no such level");
  // depth-`level` truncation, points -d/2 and d/2 around the kink at 0, d = 1/w_N
  CocycleFamily cut = fam;
  cut.pl.resize(static_cast<size_t>(level));
  set_approx(cut, fam.approx);
  const PLLevel& lv = cut.pl.back();
  BigInt w = lv.q * lv.q_next;
  Rational d(1, w);
  Rational x = frac(Rational(-d / 2)), y = d / 2;
  Rational diff = abs_q(Rational(eval_phi(cut, x).center - eval_phi(cut, y).center));
  if (sgn(diff) == 0) return 0;
  mpfr_prec_t p = prec_for_bits(bits(w));
  Interval ratio = Interval::of(diff, p) * Interval::of(w, p).pow(Interval::of(gamma_prime, p));
  return ratio.mid_d();
}

// ---- smoothness -----------------------------------------------------------------

std::vector<SmoothnessRow> smoothness_certificate(const CocycleFamily& fam) {
  if (fam.kind != CocycleKind::Cosine) throw Error(ErrorCode::ConfigError, "smoothness: cosine only");
  std::vector<SmoothnessRow> rows;
  Rational e = fam.abar - fam.eps;
  int kmax = static_cast<int>(ceil_q(e).get_si());
  Rational beta = 1 + e;
  long top = fam.alpha.deepest(fam.depth() + 1);
  mpfr_prec_t p = prec_for_bits(bits(fam.alpha.q(top)));
  for (int k = 0; k <= kmax; ++k) {
    SmoothnessRow row;
    row.k = k;
    row.sum = Interval::of(0L, p);
    for (const auto& c : fam.cos) {
      row.per_level.push_back(cos_term(c.q, beta, k, p));
      row.sum = row.sum + row.per_level.back();
    }
    row.converges = sgn(Rational(beta - k)) > 0;
    row.tail = cos_tail(fam.alpha.q(fam.depth() + 1), beta, k, p);
    rows.push_back(row);
  }
  return rows;
}

Interval phi_derivative(const CocycleFamily& fam, const Rational& x) {
  if (fam.kind != CocycleKind::Cosine) throw Error(ErrorCode::ConfigError, "phi_derivative: cosine only");
  Interval acc = Interval::of(0L, 64);
  Interval second = Interval::of(0L, 64);
  Rational y = x + fam.approx.value;
  for (const auto& c : fam.cos) {
    mpfr_prec_t p = cos_prec(c);
    Interval tp = two_pi(p);
    Interval w = tp * Interval::of(c.q, p);
    Interval coef = cos_coef(c, p) * w;
    Interval sx = (tp * Interval::of(frac_times(x, c.q), p)).sin();
    Interval sy = (tp * Interval::of(frac_times(y, c.q), p)).sin();
    acc = acc + coef * (sy - sx);
    second = second + coef * w;
  }
  return acc.widen(round_up(second * Interval::of(fam.approx.radius)));
}

}  // namespace besi
