#include "besi/cantor.hpp"

#include <algorithm>
#include <sstream>

namespace besi {

namespace {

Rational canon(Rational r) {
  r.canonicalize();
  return r;
}

Interval log_of(const BigInt& m) { return Interval::of(m, prec_for_bits(bits(m))).log(); }

Interval log_of(const Rational& r) {
  size_t b = std::max(bits(r.get_num()), bits(r.get_den()));
  return Interval::of(r, prec_for_bits(b)).log();
}

// uniform in [0, n) for n > 0
BigInt random_below(const BigInt& n, std::mt19937_64& rng) {
  BigInt r = 0;
  size_t need = bits(n) + 64;
  for (size_t b = 0; b < need; b += 64) {
    r <<= 64;
    r += BigInt(std::to_string(rng()));
  }
  return BigInt(r % n);
}

}  // namespace

RInterval LatticeLevel::at(const BigInt& j) const {
  Rational c = canon((anchor + j) / q);
  return {c - half, c + half};
}

std::pair<BigInt, BigInt> LatticeLevel::inside(const Rational& lo, const Rational& hi) const {
  BigInt a = ceil_q(Rational((lo + half) * q - anchor));
  BigInt b = floor_q(Rational((hi - half) * q - anchor));
  return {a, b};
}

BigInt translate_lower_count(const Rational& a, const Rational& b, const Rational& h) {
  if (sgn(h) <= 0) throw Error(ErrorCode::ConfigError, "translate count: step must be positive");
  if (b < a) return 0;
  return floor_q(Rational((b - a) / h));
}

bool translate_bound_holds(const Rational& a, const Rational& b, const Rational& h) {
  if (!(sgn(a) > 0 && a < h && h < b)) return false;
  if (b < 4 * h) return true;
  return Rational(translate_lower_count(a, b, h)) * 4 * h >= b;
}

BigInt translate_count(const Rational& alo, const Rational& a, const Rational& blo,
                       const Rational& b, const Rational& h) {
  // blo <= alo + kh and alo + a + kh <= blo + b
  BigInt k0 = ceil_q(Rational((blo - alo) / h));
  BigInt k1 = floor_q(Rational((blo + b - alo - a) / h));
  return k1 >= k0 ? BigInt(k1 - k0 + 1) : BigInt(0);
}

NestedIntervalSystem middle_third(int levels, int explicit_cap) {
  if (levels < 1) throw Error(ErrorCode::ConfigError, "middle_third: need at least one level");
  NestedIntervalSystem s;
  s.label = "middle-third";
  std::vector<RInterval> cur{{Rational(0), Rational(1)}};
  Rational len = 1;
  for (int k = 1; k <= levels; ++k) {
    len /= 3;
    if (k <= explicit_cap) {
      std::vector<RInterval> next;
      next.reserve(2 * cur.size());
      for (const auto& iv : cur) {
        next.push_back({iv.lo, iv.lo + len});
        next.push_back({iv.hi - len, iv.hi});
      }
      s.explicit_levels.push_back(next);
      cur.swap(next);
    }
    s.child_counts.push_back(2);
    s.gap_bounds.push_back(len);
    s.max_length.push_back(len);
  }
  return s;
}

NestedIntervalSystem lattice_system(const std::vector<LatticeLevel>& levels, const std::string& label) {
  NestedIntervalSystem s;
  s.label = label;
  s.lattice = levels;
  Rational parent = 1;
  for (const auto& lv : levels) {
    Rational a = lv.length(), h = lv.step();
    s.child_counts.push_back(translate_lower_count(a, parent, h));
    s.gap_bounds.push_back(h - a);
    s.max_length.push_back(a);
    parent = a;
  }
  return s;
}

SystemReport verify_system(const NestedIntervalSystem& sys) {
  SystemReport r;
  auto fail = [&](int k, const std::string& what) {
    r.ok = false;
    r.failures.push_back("level " + std::to_string(k) + ": " + what);
  };
  int N = sys.depth();
  if (sys.gap_bounds.size() != static_cast<size_t>(N) || sys.max_length.size() != static_cast<size_t>(N)) {
    fail(0, "table sizes differ");
    return r;
  }
  for (int k = 1; k <= N; ++k) {
    if (sys.child_counts[k - 1] < 2) fail(k, "fewer than 2 children");
    if (sgn(sys.gap_bounds[k - 1]) <= 0) fail(k, "gap bound not positive");
    if (k > 1 && sys.gap_bounds[k - 1] > sys.gap_bounds[k - 2]) fail(k, "gap bounds increase");
    if (k > 1 && sys.max_length[k - 1] >= sys.max_length[k - 2]) fail(k, "lengths do not decrease");
  }
  if (sys.is_lattice()) {
    Rational plo = 0, phi = 1;
    for (int k = 1; k <= N; ++k) {
      const LatticeLevel& lv = sys.lattice[k - 1];
      Rational a = lv.length(), h = lv.step(), b = phi - plo;
      if (!(sgn(a) > 0 && a < h && h < b)) fail(k, "needs child length < step < parent length");
      if (b >= 4 * h && !translate_bound_holds(a, b, h)) fail(k, "translate count below b/(4h)");
      if (translate_lower_count(a, b, h) != sys.child_counts[k - 1]) fail(k, "child count differs from the translate count");
      if (h - a != sys.gap_bounds[k - 1]) fail(k, "gap bound differs from step minus length");
      // a concrete parent: exact count of translates inside it
      auto [j0, j1] = lv.inside(plo, phi);
      BigInt cnt = j1 >= j0 ? BigInt(j1 - j0 + 1) : BigInt(0);
      if (cnt < sys.child_counts[k - 1]) fail(k, "parent holds fewer children than m_k");
      if (cnt == 0) break;
      RInterval c = lv.at(j0);
      plo = c.lo;
      phi = c.hi;
    }
    return r;
  }
  const auto& L = sys.explicit_levels;
  for (size_t k = 1; k <= L.size(); ++k) {
    const auto& lev = L[k - 1];
    Rational maxlen = 0;
    for (size_t i = 0; i < lev.size(); ++i) {
      if (lev[i].hi <= lev[i].lo) fail(k, "empty interval");
      maxlen = std::max(maxlen, lev[i].length());
      if (i > 0 && lev[i].lo - lev[i - 1].hi < sys.gap_bounds[k - 1])
        fail(k, "consecutive intervals closer than eps_k");
    }
    if (maxlen != sys.max_length[k - 1]) fail(k, "max length differs");
    std::vector<RInterval> parents =
        k == 1 ? std::vector<RInterval>{{Rational(0), Rational(1)}} : L[k - 2];
    std::vector<long> count(parents.size(), 0);
    size_t p = 0;
    for (const auto& iv : lev) {
      while (p < parents.size() && parents[p].hi < iv.lo) ++p;
      if (p == parents.size() || !(parents[p].lo <= iv.lo && iv.hi <= parents[p].hi)) {
        fail(k, "interval outside every parent");
        continue;
      }
      ++count[p];
    }
    for (long c : count)
      if (BigInt(c) < sys.child_counts[k - 1]) {
        fail(k, "parent holds fewer children than m_k");
        break;
      }
  }
  return r;
}

// ---- subsequences ---------------------------------------------------------------

namespace {

bool parity_ok(long k, Parity p) { return (k % 2 == 0) == (p == Parity::Even); }

bool growth_power(const ContinuedFraction& cf, long k, long kp, long n) {
  BigInt base = cf.q(kp) * cf.q(kp + 1);
  BigInt pw;
  mpz_pow_ui(pw.get_mpz_t(), base.get_mpz_t(), static_cast<unsigned long>(n));
  return cf.q(k) >= pw;
}

bool growth_upper(const ContinuedFraction& cf, long k, const Rational& gamma, const Rational& C) {
  // q_{k+1} <= C q_k^gamma
  PowProduct lhs{{Rational(cf.q(k + 1)), Rational(1)}};
  PowProduct rhs{{C, Rational(1)}, {Rational(cf.q(k)), gamma}};
  return exact_le(lhs, rhs);
}

}  // namespace

Subsequence select_subsequence(const ContinuedFraction& cf, Parity parity, SubsequenceRule rule,
                               int depth, long k0, const Rational& gamma, const Rational& C,
                               long max_index) {
  if (depth < 1) throw Error(ErrorCode::ConfigError, "select_subsequence: depth must be positive");
  if (rule == SubsequenceRule::Growth && (sgn(C) <= 0 || sgn(gamma) <= 0))
    throw Error(ErrorCode::ConfigError, "select_subsequence: growth rule needs gamma > 0 and C > 0");
  Subsequence s;
  s.k0 = k0;
  s.parity = parity;
  s.rule = rule;
  s.gamma = gamma;
  s.C = C;
  long limit = cf.infinite() ? max_index : std::min<long>(max_index, cf.known() - 2);
  long prev = k0, prev2 = -1;
  for (int n = 1; n <= depth; ++n) {
    long found = -1;
    for (long k = prev + 1; k <= limit; ++k) {
      if (!parity_ok(k, parity)) continue;
      if (cf.q(k - 1) < 4 * cf.q(prev)) continue;
      if (rule == SubsequenceRule::Separated) {
        // q_{k_n} > 16 q_{k_{n-1}} q_{k_{n-1}+1} / q_{k_{n-2}}
        if (prev2 >= 0 && !(cf.q(k) * cf.q(prev2) > 16 * cf.q(prev) * cf.q(prev + 1))) continue;
      } else {
        if (!growth_power(cf, k, prev, n)) continue;
        if (!growth_upper(cf, k, gamma, C)) continue;
      }
      found = k;
      break;
    }
    if (found < 0)
      throw Error(ErrorCode::NoAdmissibleIndex,
                  "no " + std::string(parity == Parity::Even ? "even" : "odd") + " index for level " +
                      std::to_string(n) + " up to " + std::to_string(limit));
    s.ks.push_back(found);
    prev2 = prev;
    prev = found;
  }
  return s;
}

SubsequenceReport check_subsequence(const ContinuedFraction& cf, const Subsequence& s,
                                    const std::vector<Rational>& M) {
  SubsequenceReport r;
  auto note = [&](bool& flag, const std::string& what) {
    flag = false;
    r.failures.push_back(what);
  };
  std::vector<long> k{s.k0};
  k.insert(k.end(), s.ks.begin(), s.ks.end());
  for (size_t n = 1; n < k.size(); ++n) {
    std::string at = " at n = " + std::to_string(n);
    if (!parity_ok(k[n], s.parity)) note(r.parity, "parity" + at);
    if (k[n] <= k[n - 1]) note(r.separated, "indices not increasing" + at);
    if (cf.q(k[n] - 1) < 4 * cf.q(k[n - 1])) {
      note(r.separated, "q_{k_n - 1} < 4 q_{k_{n-1}}" + at);
      r.growth = false;
    }
    if (n >= 2 && !(cf.q(k[n]) * cf.q(k[n - 2]) > 16 * cf.q(k[n - 1]) * cf.q(k[n - 1] + 1)))
      note(r.separated, "q_{k_n} <= 16 q_{k_{n-1}} q_{k_{n-1}+1} / q_{k_{n-2}}" + at);
    if (!growth_power(cf, k[n], k[n - 1], static_cast<long>(n)))
      note(r.growth, "q_{k_n} < (q_{k_{n-1}} q_{k_{n-1}+1})^n" + at);
    if (sgn(s.C) > 0 && !growth_upper(cf, k[n], s.gamma, s.C))
      note(r.growth, "q_{k_n+1} > C q_{k_n}^gamma" + at);
  }
  if (sgn(s.C) <= 0) r.growth = false;
  for (size_t n = 1; n < M.size(); ++n)
    if (M[n] < 33 * M[n - 1]) note(r.amplitude_ratio, "M_{n+1} < 33 M_n at n = " + std::to_string(n));
  return r;
}

// ---- orbit-type sets ------------------------------------------------------------

std::pair<Rational, Rational> orbit_type_shape(const std::string& signs, bool odd) {
  // even k: alpha > p_k/q_k; odd k mirrors x -> -x, which swaps the quarter anchors
  if (signs == "++") return {Rational(0), Rational(1, 8)};
  if (signs == "--") return {Rational(1, 2), Rational(1, 8)};
  if (signs == "-+") return {odd ? Rational(3, 4) : Rational(1, 4), Rational(1, 4)};
  if (signs == "+-") return {odd ? Rational(1, 4) : Rational(3, 4), Rational(1, 4)};
  throw Error(ErrorCode::ConfigError, "orbit type must be ++, -+, --, +-");
}

OrbitTypeSet build_orbit_type_set(const CocycleFamily& fam, const std::string& signs, int depth) {
  if (fam.kind != CocycleKind::EightPiece)
    throw Error(ErrorCode::ConfigError, "build_orbit_type_set needs an eight-piece family");
  if (depth < 1 || depth > fam.depth())
    throw Error(ErrorCode::ConfigError, "build_orbit_type_set: depth outside the family");
  OrbitTypeSet s;
  s.signs = signs;
  s.k0 = fam.seed_index;
  s.ks.assign(fam.subsequence.begin(), fam.subsequence.begin() + depth);
  s.odd = fam.odd;
  auto [anchor, hfrac] = orbit_type_shape(signs, fam.odd);
  std::vector<LatticeLevel> levels;
  std::vector<Rational> M;
  for (int n = 0; n < depth; ++n) {
    const PLLevel& lv = fam.pl[n];
    s.anchors.push_back(anchor);
    s.deltas.push_back(lv.delta);
    levels.push_back({lv.q, anchor, canon(lv.delta * hfrac)});
    M.push_back(lv.M);
  }
  s.system = lattice_system(levels, "F" + signs);
  Subsequence sub;
  sub.k0 = s.k0;
  sub.ks = s.ks;
  sub.parity = fam.odd ? Parity::Odd : Parity::Even;
  s.certificates = check_subsequence(fam.alpha, sub, M);
  for (int n = 1; n <= depth; ++n)
    if (s.system.child_counts[n - 1] < 2)
      throw Error(ErrorCode::LevelBoundViolated,
                  "level " + std::to_string(n) + " parents hold fewer than two children");
  return s;
}

Membership membership(const NestedIntervalSystem& sys, const Rational& x, int level) {
  Membership m;
  if (level > sys.depth()) throw Error(ErrorCode::ConfigError, "membership: level beyond the system");
  if (sys.is_lattice()) {
    for (int n = 1; n <= level; ++n) {
      const LatticeLevel& lv = sys.lattice[n - 1];
      Rational r = x * lv.q - lv.anchor;
      BigInt j = floor_q(Rational(r + Rational(1, 2)));
      if (abs_q(Rational(r - j)) > lv.half * lv.q) {
        m.failed_level = n;
        return m;
      }
      BigInt w;
      mpz_fdiv_r(w.get_mpz_t(), j.get_mpz_t(), lv.q.get_mpz_t());
      m.witnesses.push_back(w);
    }
    m.in = true;
    return m;
  }
  if (level > static_cast<int>(sys.explicit_levels.size()))
    throw Error(ErrorCode::ConfigError, "membership: level beyond the explicit levels");
  for (int n = 1; n <= level; ++n) {
    const auto& lev = sys.explicit_levels[n - 1];
    auto it = std::upper_bound(lev.begin(), lev.end(), x,
                               [](const Rational& v, const RInterval& iv) { return v < iv.lo; });
    if (it == lev.begin() || !std::prev(it)->contains(x)) {
      m.failed_level = n;
      return m;
    }
    m.witnesses.push_back(BigInt(static_cast<long>(std::prev(it) - lev.begin())));
  }
  m.in = true;
  return m;
}

Membership membership(const OrbitTypeSet& set, const Rational& x, int level) {
  return membership(set.system, x, level);
}

std::vector<Rational> sample_points(const NestedIntervalSystem& sys, int level, int descents,
                                    std::mt19937_64& rng) {
  std::vector<Rational> out;
  for (int d = 0; d < descents; ++d) {
    Rational lo = 0, hi = 1;
    for (int n = 1; n <= level; ++n) {
      if (sys.is_lattice()) {
        const LatticeLevel& lv = sys.lattice[n - 1];
        auto [j0, j1] = lv.inside(lo, hi);
        if (j1 < j0) throw Error(ErrorCode::LevelBoundViolated, "parent without children");
        BigInt j = j0 + random_below(BigInt(j1 - j0 + 1), rng);
        RInterval c = lv.at(j);
        lo = c.lo;
        hi = c.hi;
      } else {
        std::vector<const RInterval*> kids;
        for (const auto& iv : sys.explicit_levels.at(n - 1))
          if (lo <= iv.lo && iv.hi <= hi) kids.push_back(&iv);
        if (kids.empty()) throw Error(ErrorCode::LevelBoundViolated, "parent without children");
        const RInterval* c = kids[rng() % kids.size()];
        lo = c->lo;
        hi = c->hi;
      }
    }
    Rational c = canon((lo + hi) / 2);
    out.push_back(c);
    out.push_back(canon((lo + c) / 2));
    out.push_back(canon((c + hi) / 2));
  }
  return out;
}

// ---- dimension bounds -----------------------------------------------------------

FalconerReport falconer_lower_bound(const NestedIntervalSystem& sys) {
  FalconerReport rep;
  int N = sys.depth();
  for (int k = 2; k <= N; ++k)
    if (sys.gap_bounds[k - 1] > sys.gap_bounds[k - 2])
      throw Error(ErrorCode::GapNonMonotone, "eps_" + std::to_string(k) + " > eps_" + std::to_string(k - 1));
  Interval logprod = Interval::of(0L);
  for (int k = 1; k <= N; ++k) {
    const BigInt& m = sys.child_counts[k - 1];
    if (m < 2) throw Error(ErrorCode::LevelBoundViolated, "m_" + std::to_string(k) + " < 2");
    if (k >= 2) {
      Rational me = m * sys.gap_bounds[k - 1];
      if (me >= 1) throw Error(ErrorCode::HypothesisFails, "m_k eps_k >= 1");
      FalconerRow row;
      row.k = k;
      row.m = m;
      row.eps = sys.gap_bounds[k - 1];
      row.ratio = logprod / (-log_of(canon(me)));
      if (rep.rows.empty())
        rep.running_inf = row.ratio;
      else
        rep.running_inf = rep.running_inf.min(row.ratio);
      rep.last = row.ratio;
      rep.rows.push_back(row);
    }
    logprod = logprod + log_of(m);
  }
  return rep;
}

Interval orbit_type_bound(const ContinuedFraction& cf, const OrbitTypeSet& set, int n) {
  if (n < 2 || n > static_cast<int>(set.ks.size()))
    throw Error(ErrorCode::ConfigError, "orbit_type_bound: need 2 <= n <= depth");
  auto k = [&](int i) { return i == 0 ? set.k0 : set.ks[i - 1]; };
  auto lq = [&](long i) { return log_of(cf.q(i)); };
  Interval num = lq(k(n - 1)) - log_of(BigInt(16)) - lq(k(n - 2)) - lq(k(n - 2) + 1);
  Interval den = lq(k(n - 1)) + lq(k(n - 1) + 1) + log_of(BigInt(32));
  return num / den;
}

std::vector<CoverRow> covering_upper_bound(const ContinuedFraction& cf, const OrbitTypeSet& set) {
  std::vector<CoverRow> rows;
  for (size_t n = 1; n <= set.ks.size(); ++n) {
    CoverRow r;
    r.n = static_cast<int>(n);
    r.ratio = log_of(cf.q(set.ks[n - 1])) / (-log_of(canon(set.deltas[n - 1] / 4)));
    rows.push_back(r);
  }
  return rows;
}

NestedIntervalSystem cosine_factor_system(const ContinuedFraction& cf, int levels) {
  std::vector<LatticeLevel> lv;
  for (int n = 1; n <= levels; ++n) {
    BigInt prod = cf.q(n) * cf.q(n + 1);
    BigInt s;
    mpz_sqrt(s.get_mpz_t(), prod.get_mpz_t());
    if (s * s != prod) s += 1;
    lv.push_back({cf.q(n), Rational(0), Rational(1, s)});
  }
  return lattice_system(lv, "F(j)");
}

ProductBound product_dimension_bound(const std::vector<NestedIntervalSystem>& systems) {
  ProductBound p;
  p.sum_last = Interval::of(0L);
  p.sum_inf = Interval::of(0L);
  for (const auto& s : systems) {
    FalconerReport r = falconer_lower_bound(s);
    if (r.rows.empty()) throw Error(ErrorCode::ConfigError, "product_dimension_bound: factor needs 2 levels");
    p.sum_last = p.sum_last + r.last;
    p.sum_inf = p.sum_inf + r.running_inf;
    p.factors.push_back(std::move(r));
  }
  return p;
}

void write_levels_csv(std::ostream& os, const NestedIntervalSystem& sys, long max_rows) {
  os << "level,j,left_num,left_den,right_num,right_den\n";
  auto row = [&](int k, const BigInt& j, const RInterval& iv) {
    os << k << ',' << j << ',' << iv.lo.get_num() << ',' << iv.lo.get_den() << ',' << iv.hi.get_num()
       << ',' << iv.hi.get_den() << '\n';
  };
  if (sys.is_lattice()) {
    for (int k = 1; k <= sys.depth(); ++k) {
      const LatticeLevel& lv = sys.lattice[k - 1];
      for (BigInt j = 0; j < lv.q && j < max_rows; ++j) row(k, j, lv.at(j));
    }
    return;
  }
  for (size_t k = 1; k <= sys.explicit_levels.size(); ++k) {
    const auto& lev = sys.explicit_levels[k - 1];
    for (size_t j = 0; j < lev.size() && static_cast<long>(j) < max_rows; ++j)
      row(static_cast<int>(k), BigInt(static_cast<long>(j)), lev[j]);
  }
}

void write_bounds_csv(std::ostream& os, const FalconerReport& rep) {
  os << "level,m_k,eps_k_num,eps_k_den,ratio\n";
  for (const auto& r : rep.rows) {
    std::ostringstream v;
    v.precision(17);
    v << r.ratio.mid_d();
    os << r.k << ',' << r.m << ',' << r.eps.get_num() << ',' << r.eps.get_den() << ',' << v.str() << '\n';
  }
}

}  // namespace besi
