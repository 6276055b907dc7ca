#include "besi/diophantine.hpp"

#include <algorithm>
#include <climits>
#include <cstdint>
#include <sstream>

namespace besi {

// ---- ContinuedFraction -------------------------------------------------------

ContinuedFraction ContinuedFraction::repeat_last(std::vector<BigInt> quotients) {
  if (quotients.empty()) throw Error(ErrorCode::ConfigError, "repeat-last needs at least one quotient");
  for (const auto& a : quotients)
    if (a < 1) throw Error(ErrorCode::ConfigError, "partial quotients must be positive");
  ContinuedFraction cf;
  cf.kind_ = Kind::RepeatLast;
  cf.head_ = std::move(quotients);
  return cf;
}

ContinuedFraction ContinuedFraction::prefix(std::vector<BigInt> quotients) {
  for (const auto& a : quotients)
    if (a < 1) throw Error(ErrorCode::ConfigError, "partial quotients must be positive");
  ContinuedFraction cf;
  cf.kind_ = Kind::Prefix;
  cf.head_ = std::move(quotients);
  return cf;
}

ContinuedFraction ContinuedFraction::generated(Generator g, std::string label) {
  ContinuedFraction cf;
  cf.kind_ = Kind::Generated;
  cf.gen_ = std::move(g);
  cf.label_ = std::move(label);
  return cf;
}

ContinuedFraction ContinuedFraction::golden() { return repeat_last({BigInt(1)}); }
ContinuedFraction ContinuedFraction::sqrt2_minus_1() { return repeat_last({BigInt(2)}); }

bool ContinuedFraction::infinite() const { return kind_ != Kind::Prefix; }

std::size_t ContinuedFraction::known() const {
  return kind_ == Kind::Prefix ? head_.size() : SIZE_MAX;
}

bool ContinuedFraction::has(long n) const {
  if (n < 1) return false;
  return infinite() || static_cast<std::size_t>(n) <= head_.size();
}

BigInt ContinuedFraction::quotient(long n) const {
  if (n < 1) throw Error(ErrorCode::QuotientUnavailable, "quotient index must be >= 1");
  switch (kind_) {
    case Kind::RepeatLast:
      return static_cast<std::size_t>(n) <= head_.size() ? head_[n - 1] : head_.back();
    case Kind::Prefix:
      if (static_cast<std::size_t>(n) > head_.size())
        throw Error(ErrorCode::QuotientUnavailable,
                    "a_" + std::to_string(n) + " not constructed (" + std::to_string(head_.size()) +
                        " known)");
      return head_[n - 1];
    case Kind::Generated: {
      BigInt a = gen_(static_cast<std::size_t>(n));
      if (a < 1) throw Error(ErrorCode::ConfigError, "generator produced a non-positive quotient");
      return a;
    }
  }
  return 0;
}

void ContinuedFraction::extend(long n) const {
  std::lock_guard<std::mutex> lock(cache_->mu);
  auto& P = cache_->p;
  auto& Q = cache_->q;
  long have = static_cast<long>(Q.size()) - 2;  // highest computed index
  for (long k = have + 1; k <= n; ++k) {
    BigInt a = quotient(k);
    P.push_back(a * P[k] + P[k - 1]);
    Q.push_back(a * Q[k] + Q[k - 1]);
  }
}

BigInt ContinuedFraction::q(long n) const {
  if (n < -1) throw Error(ErrorCode::QuotientUnavailable, "convergent index must be >= -1");
  extend(n);
  std::lock_guard<std::mutex> lock(cache_->mu);
  return cache_->q[n + 1];
}

BigInt ContinuedFraction::p(long n) const {
  if (n < -1) throw Error(ErrorCode::QuotientUnavailable, "convergent index must be >= -1");
  extend(n);
  std::lock_guard<std::mutex> lock(cache_->mu);
  return cache_->p[n + 1];
}

std::pair<BigInt, BigInt> ContinuedFraction::convergent(long n) const {
  extend(n);
  std::lock_guard<std::mutex> lock(cache_->mu);
  return {cache_->p[n + 1], cache_->q[n + 1]};
}

long ContinuedFraction::deepest(long cap) const {
  if (infinite()) return cap;
  return std::min<long>(cap, static_cast<long>(head_.size()));
}

QInterval ContinuedFraction::enclosure(long n) const {
  // alpha = [0; a_1..a_n, t] with t > 1 lies between p_n/q_n and the mediant with p_{n-1}/q_{n-1}
  auto [pn, qn] = convergent(n);
  auto [pm, qm] = convergent(n - 1);
  Rational c(pn, qn), m(pn + pm, qn + qm);
  c.canonicalize();
  m.canonicalize();
  return c < m ? QInterval{c, m} : QInterval{m, c};
}

std::optional<Interval> ContinuedFraction::closed_form(mpfr_prec_t prec) const {
  if (kind_ != Kind::RepeatLast) return std::nullopt;
  // tail t = [c; c, c, ...] = (c + sqrt(c^2 + 4)) / 2
  const BigInt& c = head_.back();
  long k = static_cast<long>(head_.size()) - 1;  // quotients before the periodic tail
  Interval ci = Interval::of(c, prec);
  Interval t = (ci + (ci.sqr() + Interval::of(4L, prec)).sqrt()) / Interval::of(2L, prec);
  auto [pk, qk] = convergent(k);
  auto [pm, qm] = convergent(k - 1);
  Interval num = Interval::of(pk, prec) * t + Interval::of(pm, prec);
  Interval den = Interval::of(qk, prec) * t + Interval::of(qm, prec);
  return num / den;
}

std::string ContinuedFraction::describe() const {
  std::ostringstream os;
  if (kind_ == Kind::Generated) return "generated:" + label_;
  os << "[0;";
  for (std::size_t i = 0; i < head_.size(); ++i) os << (i ? "," : "") << head_[i].get_str();
  os << (kind_ == Kind::RepeatLast ? ",...]" : "|?]");
  return os.str();
}

bool ContinuedFraction::same_as(const ContinuedFraction& o) const {
  if (kind_ != o.kind_) return false;
  if (kind_ == Kind::Generated) return cache_ == o.cache_;
  return head_ == o.head_;
}

// ---- approximations ----------------------------------------------------------

AlphaApprox approx_at(const ContinuedFraction& cf, long depth) {
  if (depth < 0) throw Error(ErrorCode::DepthInsufficient, "approximation depth must be >= 0");
  AlphaApprox a;
  a.depth = depth;
  auto [p, q] = cf.convergent(depth);
  a.value = Rational(p, q);
  a.value.canonicalize();
  if (cf.has(depth + 1)) {
    a.radius = Rational(1, q * cf.q(depth + 1));
  } else {
    a.radius = Rational(1, q * (q + cf.q(depth - 1)));
  }
  a.radius.canonicalize();
  return a;
}

AlphaApprox approx_for(const ContinuedFraction& cf, const Rational& tol, bool require) {
  long last = cf.infinite() ? LONG_MAX : static_cast<long>(cf.known());
  long n = 0;
  while (true) {
    AlphaApprox a = approx_at(cf, n);
    if (a.radius <= tol) return a;
    if (n >= last) {
      if (require)
        throw Error(ErrorCode::DepthInsufficient,
                    "alpha known to depth " + std::to_string(last) + " only; need radius <= " +
                        std::to_string(tol.get_d()));
      return a;
    }
    // jump ahead: radii shrink at least geometrically
    ++n;
  }
}

std::pair<BigInt, BigInt> convergents(const ContinuedFraction& cf, long n) { return cf.convergent(n); }

QInterval approximation_gap(const ContinuedFraction& cf, long n) {
  long deep = cf.deepest(n + 48);
  if (deep <= n)
    throw Error(ErrorCode::QuotientUnavailable, "need a_" + std::to_string(n + 1) + " for the gap");
  QInterval e = cf.enclosure(deep);
  Rational c(cf.p(n), cf.q(n));
  c.canonicalize();
  Rational a = abs_q(e.lo - c), b = abs_q(e.hi - c);
  if (e.contains(c)) return {Rational(0), std::max(a, b)};
  return a < b ? QInterval{a, b} : QInterval{b, a};
}

QInterval distance_to_integers(const ContinuedFraction& cf, long n) {
  long deep = cf.deepest(n + 48);
  if (deep <= n)
    throw Error(ErrorCode::QuotientUnavailable, "need a_" + std::to_string(n + 1) + " for ||q_n alpha||");
  QInterval e = cf.enclosure(deep);
  BigInt qn = cf.q(n);
  Rational lo = e.lo * qn, hi = e.hi * qn;
  Rational mid = (lo + hi) / 2;
  BigInt k = floor_q(mid + Rational(1, 2));
  Rational dl = lo - k, dh = hi - k;
  if (dl < Rational(-1, 2) || dh > Rational(1, 2))
    throw Error(ErrorCode::PrecisionInsufficient, "enclosure of q_n alpha too wide");
  if (sgn(dl) <= 0 && sgn(dh) >= 0) return {Rational(0), std::max(abs_q(dl), abs_q(dh))};
  Rational a = abs_q(dl), b = abs_q(dh);
  return a < b ? QInterval{a, b} : QInterval{b, a};
}

Reduced reduce_mod1(const Rational& x, const BigInt& m, const AlphaApprox& alpha) {
  Reduced r;
  r.value = frac(x + m * alpha.value);
  r.radius = alpha.radius * abs(m);
  r.straddles = r.value < r.radius || (1 - r.value) < r.radius;
  return r;
}

Reduced reduce_mod1(const Rational& x, const BigInt& m, const AlphaApprox& alpha,
                    const Rational& tol) {
  Reduced r = reduce_mod1(x, m, alpha);
  if (r.radius > tol)
    throw Error(ErrorCode::DepthInsufficient,
                "|m| * radius = " + std::to_string(r.radius.get_d()) + " exceeds tolerance");
  return r;
}

// ---- constructions -----------------------------------------------------------

namespace {

bool bit(const std::string& s, std::size_t& pos) {
  bool b = pos < s.size() && s[pos] == '1';
  ++pos;
  return b;
}

// smallest k >= 1 (or the next one if skip) with lo <= k*q1 + q0 <= hi, certified
BigInt pick_in_window(const Interval& lo, const Interval& hi, const BigInt& q1, const BigInt& q0,
                      bool skip, ErrorCode on_empty, const std::string& where) {
  BigInt k = ceil_q((lo.lo_q() - q0) / q1);
  if (k < 1) k = 1;
  int found = 0;
  for (int guard = 0; guard < 4096; ++guard, ++k) {
    BigInt c = k * q1 + q0;
    Interval ci = Interval::of(c, std::max<mpfr_prec_t>(lo.prec(), prec_for_bits(bits(c))));
    if (!lo.le(ci)) continue;
    if (!ci.le(hi)) break;
    if (found == 1 || !skip) return k;
    ++found;
  }
  if (found == 1) return k - 1;  // only one admissible value: no second branch
  throw Error(on_empty, "no admissible quotient for " + where);
}

Interval power(const BigInt& base, const Rational& e, mpfr_prec_t prec) {
  return Interval::of(base, prec).pow(Interval::of(e, prec));
}

mpfr_prec_t prec_for_power(const BigInt& base, const Rational& e) {
  double b = static_cast<double>(bits(base)) * std::max(1.0, e.get_d());
  return prec_for_bits(static_cast<size_t>(b) + 64);
}

}  // namespace

ContinuedFraction construct_alpha_with_growth(const Rational& e, const Rational& C0,
                                              const BigInt& seed, int levels,
                                              const std::string& choices) {
  if (e <= 1 && e != 1) throw Error(ErrorCode::ConfigError, "growth exponent must be >= 1");
  if (C0 <= 4) throw Error(ErrorCode::ConfigError, "C0 must exceed 4");
  if (seed < 1) throw Error(ErrorCode::ConfigError, "seed must be >= 1");
  std::vector<BigInt> a{seed};
  BigInt q0 = 1, q1 = seed;  // q_{n-1}, q_n
  std::size_t pos = 0;
  for (int n = 1; n <= levels; ++n) {
    mpfr_prec_t prec = prec_for_power(q1, e);
    Interval w = power(q1, e, prec);
    Interval lo = Interval::of(4L, prec) * w;
    Interval hi = Interval::of(C0, prec) * w;
    BigInt k = pick_in_window(lo, hi, q1, q0, bit(choices, pos), ErrorCode::NoAdmissibleQuotient,
                              "q_" + std::to_string(n + 1));
    a.push_back(k);
    BigInt q2 = k * q1 + q0;
    q0 = q1;
    q1 = q2;
  }
  return ContinuedFraction::prefix(a);
}

ContinuedFraction construct_log_tower(const BigInt& seed, int levels, const Rational& margin,
                                      const BigInt& pad) {
  if (seed < 2) throw Error(ErrorCode::ConfigError, "log tower seed must be >= 2");
  std::vector<BigInt> a{seed};
  BigInt q0 = 1, q1 = seed;
  const mpfr_prec_t prec = 256;
  Interval r = Interval::of(q1, prec).log();
  for (int k = 2; k <= levels; ++k) {
    Interval target = (Interval::of(long(k), prec) * Interval::of(BigInt(q1 * q1), prec) * r *
                       Interval::of(Rational(1 + margin), prec))
                          .exp();
    if (!mpfr_number_p(target.hi()))
      throw Error(ErrorCode::PrecisionInsufficient, "log tower level too large to represent");
    BigInt need = ceil_q(target.hi_q()) + 1;
    BigInt ak = ceil_q(Rational(need - q0, q1));
    if (ak < 1) ak = 1;
    a.push_back(ak);
    BigInt q2 = ak * q1 + q0;
    mpfr_prec_t p2 = std::max<mpfr_prec_t>(prec, 128);
    r = Interval::of(q2, p2).log() / Interval::of(BigInt(long(k) * q1 * q1), p2);
    q0 = q1;
    q1 = q2;
  }
  a.push_back(pad);
  return ContinuedFraction::prefix(a);
}

// ---- rotation vectors --------------------------------------------------------

BigInt RotationVector::q(long n, int j) const {
  int dd = d();
  if (j == 0) return n <= 1 ? BigInt(1) : coords[dd - 1].q(n - 1);
  if (j == dd + 1) return coords[0].q(n + 1);
  return coords[j - 1].q(n);
}

GrowthConstants growth_constants(const Rational& a) {
  GrowthConstants g;
  g.A = 16;
  Interval four_a = power(BigInt(4), a, 256) * Interval::of(16L, 256);
  BigInt c = floor_q(four_a.lo_q());
  if (c < 1) c = 1;
  while (!exact_le({{Rational(16), Rational(1)}, {Rational(4), a}}, {{Rational(c), Rational(1)}})) ++c;
  g.B = c;
  g.C = 2 * c;
  return g;
}

std::vector<std::vector<BoundPair>> uniform_bounds(int levels, int d, const BoundPair& b) {
  return std::vector<std::vector<BoundPair>>(levels, std::vector<BoundPair>(d, b));
}

RotationVector construct_rotation_vector(const Rational& a, int d, int levels,
                                         const std::vector<std::vector<BoundPair>>& S,
                                         const std::string& choices) {
  if (d < 1) throw Error(ErrorCode::ConfigError, "dimension must be >= 1");
  if (static_cast<int>(S.size()) < levels) throw Error(ErrorCode::ConfigError, "S shorter than levels");
  std::vector<std::vector<BigInt>> quot(d);
  std::vector<BigInt> qm(d, BigInt(0)), qc(d, BigInt(1));  // q_{n-2}, q_{n-1} per slot
  std::size_t pos = 0;
  BigInt last_d = 1;  // q_{n-1}^{(d)}
  for (int n = 1; n <= levels; ++n) {
    BigInt prev = last_d;
    for (int j = 0; j < d; ++j) {
      const BoundPair& bp = S[n - 1][j];
      mpfr_prec_t prec = prec_for_power(prev, a);
      Interval w = power(prev, a, prec);
      Interval lo = Interval::of(bp.A, prec) * w;
      Interval hi = Interval::of(bp.B, prec) * w;
      BigInt k = pick_in_window(lo, hi, qc[j], qm[j], bit(choices, pos), ErrorCode::WindowEmpty,
                                "q_" + std::to_string(n) + "^(" + std::to_string(j + 1) + ")");
      quot[j].push_back(k);
      BigInt qn = k * qc[j] + qm[j];
      qm[j] = qc[j];
      qc[j] = qn;
      prev = qn;
    }
    last_d = qc[d - 1];
  }
  RotationVector v;
  v.a = a;
  v.levels = levels;
  v.S = S;
  v.S.resize(levels);
  for (int j = 0; j < d; ++j) v.coords.push_back(ContinuedFraction::prefix(quot[j]));
  return v;
}

RotationVector construct_rotation_vector(const Rational& a, int d, int levels,
                                         const std::string& choices) {
  GrowthConstants g = growth_constants(a);
  return construct_rotation_vector(a, d, levels, uniform_bounds(levels, d, {g.A, g.B}), choices);
}

RotationVector perturb_slot(const RotationVector& v, int l, const std::string& choices) {
  int d = v.d();
  if (l < 1 || l > d) throw Error(ErrorCode::ConfigError, "slot out of range");
  GrowthConstants g = growth_constants(v.a);
  Rational inv_a = 1 / v.a;
  std::vector<BigInt> quot;
  BigInt qm = 0, qc = 1;
  std::size_t pos = 0;
  for (int n = 1; n <= v.levels; ++n) {
    BigInt left = l == 1 ? (n == 1 ? BigInt(1) : v.coords[d - 1].q(n - 1)) : v.q(n, l - 1);
    mpfr_prec_t prec = prec_for_power(left, v.a);
    Interval w = power(left, v.a, prec);
    Interval lo = Interval::of(Rational(4), prec) * w;
    Interval hi = Interval::of(g.C, prec) * w;
    // right neighbour: slot l+1 at level n, or slot 1 at level n+1
    bool has_right = l < d || n + 1 <= v.levels;
    if (has_right) {
      BigInt R = l < d ? v.q(n, l + 1) : v.coords[0].q(n + 1);
      const BoundPair& nb = l < d ? v.S[n - 1][l] : v.S[n][0];
      mpfr_prec_t p2 = std::max(prec, prec_for_bits(bits(R) + 64));
      Interval Ri = Interval::of(R, p2);
      Interval rlo = (Ri / Interval::of(nb.B, p2)).pow(Interval::of(inv_a, p2));
      Interval rhi = (Ri / Interval::of(nb.A, p2)).pow(Interval::of(inv_a, p2));
      lo = lo.max(rlo);
      hi = hi.min(rhi);
    }
    BigInt k = pick_in_window(lo, hi, qc, qm, bit(choices, pos), ErrorCode::WindowEmpty,
                              "perturbed q_" + std::to_string(n) + "^(" + std::to_string(l) + ")");
    quot.push_back(k);
    BigInt qn = k * qc + qm;
    qm = qc;
    qc = qn;
  }
  RotationVector out = v;
  out.coords[l - 1] = ContinuedFraction::prefix(quot);
  for (auto& row : out.S) row[l - 1] = {Rational(4), g.C};
  return out;
}

namespace {

bool sandwich(const Rational& A, const BigInt& prev, const Rational& a, const BigInt& q,
              const Rational& B) {
  PowProduct lo{{A, Rational(1)}, {Rational(prev), a}};
  PowProduct hi{{B, Rational(1)}, {Rational(prev), a}};
  PowProduct mid{{Rational(q), Rational(1)}};
  return exact_le(lo, mid) && exact_le(mid, hi);
}

std::string slot(long n, int j) {
  return "q_" + std::to_string(n) + "^(" + std::to_string(j) + ")";
}

}  // namespace

WindowReport check_windows(const RotationVector& v,
                              const std::vector<std::vector<BoundPair>>& S) {
  WindowReport r;
  for (int n = 1; n <= v.levels; ++n)
    for (int j = 1; j <= v.d(); ++j) {
      const BoundPair& bp = S[n - 1][j - 1];
      if (!sandwich(bp.A, v.q(n, j - 1), v.a, v.q(n, j), bp.B)) {
        r.ok = false;
        r.failures.push_back(slot(n, j));
      }
    }
  return r;
}

WindowReport check_windows(const RotationVector& v) { return check_windows(v, v.S); }

WindowReport check_derived(const RotationVector& v) {
  WindowReport r;
  GrowthConstants g = growth_constants(v.a);
  int d = v.d();
  Rational ad = 1, ad1 = 1, s = 0;
  for (int i = 0; i < d; ++i) {
    s += ad;
    ad1 = ad;
    ad *= v.a;
  }
  // ad = a^d, ad1 = a^{d-1}, s = 1 + a + ... + a^{d-1}
  for (int n = 1; n + 1 <= v.levels; ++n)
    for (int j = 1; j <= d; ++j) {
      BigInt qn = v.q(n, j);
      BigInt up = v.q(n + 1, j - 1);
      if (!exact_le({{Rational(4), Rational(1)}, {Rational(qn), ad1}}, {{Rational(up), Rational(1)}})) {
        r.ok = false;
        r.failures.push_back("zgor " + slot(n, j));
      }
      BigInt nx = v.q(n + 1, j);
      PowProduct lo{{Rational(4), Rational(1)}, {Rational(qn), ad}};
      PowProduct hi{{g.C, s}, {Rational(qn), ad}};
      PowProduct mid{{Rational(nx), Rational(1)}};
      if (!exact_le(lo, mid) || !exact_le(mid, hi)) {
        r.ok = false;
        r.failures.push_back("zdol " + slot(n, j));
      }
    }
  return r;
}

// ---- independence ------------------------------------------------------------

std::vector<IntVec> independence_scan(const std::vector<ContinuedFraction>& coords, long H,
                                      int max_slot) {
  using i128 = __int128;
  const int F = 100;
  int d = static_cast<int>(coords.size());
  int top = max_slot < 0 ? d : max_slot;
  if (H < 1 || d < 1) return {};
  if (H > 1000) throw Error(ErrorCode::ConfigError, "height too large for the fixed-point scan");
  BigInt scale = BigInt(1) << F;
  std::vector<i128> plo(d), phi(d);
  std::vector<int> group(d);
  for (int j = 0; j < d; ++j) {
    const auto& cf = coords[j];
    QInterval e = cf.enclosure(cf.deepest(400));
    BigInt lo = floor_q(e.lo * scale), hi = ceil_q(e.hi * scale);
    auto to128 = [](const BigInt& z) {
      BigInt hiw = z >> 64, low = z - (hiw << 64);
      return (static_cast<i128>(hiw.get_ui()) << 64) | static_cast<i128>(static_cast<unsigned __int128>(
                                                                mpz_getlimbn(low.get_mpz_t(), 0)));
    };
    plo[j] = to128(lo);
    phi[j] = to128(hi);
    group[j] = j;
    for (int i = 0; i < j; ++i)
      if (coords[i].same_as(cf)) {
        group[j] = group[i];
        break;
      }
  }
  std::vector<IntVec> out;
  IntVec m(d, 0);
  for (int j = 0; j < top; ++j) m[j] = -H;
  while (true) {
    // first nonzero entry positive
    int first = -1;
    for (int j = 0; j < top; ++j)
      if (m[j] != 0) {
        first = j;
        break;
      }
    if (first >= 0 && m[first] > 0) {
      i128 slo = 0, shi = 0;
      for (int j = 0; j < top; ++j) {
        if (m[j] >= 0) {
          slo += m[j] * plo[j];
          shi += m[j] * phi[j];
        } else {
          slo += m[j] * phi[j];
          shi += m[j] * plo[j];
        }
      }
      i128 fl_hi = shi >> F;                 // floor(shi / 2^F)
      i128 ce_lo = -((-slo) >> F);           // ceil(slo / 2^F)
      if (fl_hi >= ce_lo) {
        std::vector<long> per(d, 0);
        for (int j = 0; j < top; ++j) per[group[j]] += m[j];
        bool exact = std::all_of(per.begin(), per.end(), [](long x) { return x == 0; });
        if (!exact) {
          std::ostringstream os;
          os << "<m,alpha> interval straddles an integer at m=(";
          for (int j = 0; j < d; ++j) os << (j ? "," : "") << m[j];
          os << ")";
          throw Error(ErrorCode::PrecisionInsufficient, os.str());
        }
        out.push_back(m);
      }
    }
    int j = top - 1;
    while (j >= 0 && m[j] == H) {
      m[j] = -H;
      --j;
    }
    if (j < 0) break;
    ++m[j];
  }
  return out;
}

std::vector<IntVec> independence_scan(const RotationVector& v, long H) {
  return independence_scan(v.coords, H);
}

RotationVector construct_independent_vector(const Rational& a, int d, int levels, long H,
                                            const std::string& choices) {
  RotationVector v = construct_rotation_vector(a, d, levels, choices);
  for (int l = 1; l <= d; ++l) {
    bool done = false;
    for (int attempt = 0; attempt < 32 && !done; ++attempt) {
      // attempt bits select branches at the deepest levels first
      std::string stream(static_cast<std::size_t>(levels), '0');
      for (int b = 0; b < levels && b < 5; ++b)
        if (attempt >> b & 1) stream[levels - 1 - b] = '1';
      RotationVector w = perturb_slot(v, l, stream);
      try {
        if (independence_scan(w.coords, H, l).empty()) {
          v = w;
          done = true;
        }
      } catch (const Error& e) {
        if (e.code() != ErrorCode::PrecisionInsufficient) throw;
      }
    }
    if (!done) throw Error(ErrorCode::WindowEmpty, "no branch of slot " + std::to_string(l) + " passed the scan");
  }
  return v;
}

}  // namespace besi
