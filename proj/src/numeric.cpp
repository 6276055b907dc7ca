#include "besi/numeric.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <sstream>

namespace besi {

const char* error_name(ErrorCode c) {
  switch (c) {
    case ErrorCode::DepthInsufficient: return "DepthInsufficient";
    case ErrorCode::NoAdmissibleQuotient: return "NoAdmissibleQuotient";
    case ErrorCode::WindowEmpty: return "WindowEmpty";
    case ErrorCode::PrecisionInsufficient: return "PrecisionInsufficient";
    case ErrorCode::RangeUnresolved: return "RangeUnresolved";
    case ErrorCode::GridTooCoarse: return "GridTooCoarse";
    case ErrorCode::HypothesisFails: return "HypothesisFails";
    case ErrorCode::LevelBoundViolated: return "LevelBoundViolated";
    case ErrorCode::NoAdmissibleIndex: return "NoAdmissibleIndex";
    case ErrorCode::GapNonMonotone: return "GapNonMonotone";
    case ErrorCode::QuadratureStalled: return "QuadratureStalled";
    case ErrorCode::SingularityApproach: return "SingularityApproach";
    case ErrorCode::OnSingularSet: return "OnSingularSet";
    case ErrorCode::Inconclusive: return "Inconclusive";
    case ErrorCode::QuotientUnavailable: return "QuotientUnavailable";
    case ErrorCode::ConfigError: return "ConfigError";
  }
  return "Unknown";
}

Error::Error(ErrorCode c, const std::string& what)
    : std::runtime_error(std::string(error_name(c)) + ": " + what), code_(c) {}

namespace {

BigInt parse_int(const std::string& s) {
  BigInt v;
  if (s.empty() || v.set_str(s, 10) != 0)
    throw Error(ErrorCode::ConfigError, "bad integer '" + s + "'");
  return v;
}

std::string trim(const std::string& s) {
  size_t a = 0, b = s.size();
  while (a < b && std::isspace(static_cast<unsigned char>(s[a]))) ++a;
  while (b > a && std::isspace(static_cast<unsigned char>(s[b - 1]))) --b;
  return s.substr(a, b - a);
}

}  // namespace

Rational parse_rational(const std::string& raw) {
  std::string s = trim(raw);
  auto slash = s.find('/');
  if (slash != std::string::npos) {
    BigInt n = parse_int(trim(s.substr(0, slash)));
    BigInt d = parse_int(trim(s.substr(slash + 1)));
    if (d == 0) throw Error(ErrorCode::ConfigError, "zero denominator in '" + s + "'");
    Rational r(n, d);
    r.canonicalize();
    return r;
  }
  // decimal with optional exponent
  size_t i = 0;
  bool neg = false;
  if (i < s.size() && (s[i] == '+' || s[i] == '-')) neg = s[i++] == '-';
  std::string digits;
  long scale = 0;
  bool seen_dot = false, any = false;
  for (; i < s.size(); ++i) {
    char c = s[i];
    if (std::isdigit(static_cast<unsigned char>(c))) {
      digits += c;
      any = true;
      if (seen_dot) ++scale;
    } else if (c == '.' && !seen_dot) {
      seen_dot = true;
    } else {
      break;
    }
  }
  if (!any) throw Error(ErrorCode::ConfigError, "bad number '" + raw + "'");
  long ex = 0;
  if (i < s.size() && (s[i] == 'e' || s[i] == 'E')) {
    ++i;
    std::string es = s.substr(i);
    if (es.empty()) throw Error(ErrorCode::ConfigError, "bad exponent in '" + raw + "'");
    try {
      size_t used = 0;
      ex = std::stol(es, &used);
      if (used != es.size()) throw std::invalid_argument("x");
    } catch (const std::exception&) {
      throw Error(ErrorCode::ConfigError, "bad exponent in '" + raw + "'");
    }
    i = s.size();
  }
  if (i != s.size()) throw Error(ErrorCode::ConfigError, "bad number '" + raw + "'");
  BigInt num = parse_int(digits);
  long p = ex - scale;
  BigInt ten;
  mpz_ui_pow_ui(ten.get_mpz_t(), 10, static_cast<unsigned long>(std::labs(p)));
  Rational r = p >= 0 ? Rational(num * ten) : Rational(num, ten);
  r.canonicalize();
  return neg ? Rational(-r) : r;
}

std::string to_string(const Rational& r) {
  return r.get_num().get_str() + "/" + r.get_den().get_str();
}

Rational rational_from_double(double x) {
  Rational r;
  mpq_set_d(r.get_mpq_t(), x);
  return r;
}

BigInt floor_div(const BigInt& a, const BigInt& b) {
  BigInt q;
  mpz_fdiv_q(q.get_mpz_t(), a.get_mpz_t(), b.get_mpz_t());
  return q;
}

BigInt floor_q(const Rational& x) { return floor_div(x.get_num(), x.get_den()); }

BigInt ceil_q(const Rational& x) {
  BigInt q;
  mpz_cdiv_q(q.get_mpz_t(), x.get_num_mpz_t(), x.get_den_mpz_t());
  return q;
}

Rational frac(const Rational& x) {
  BigInt r;
  mpz_fdiv_r(r.get_mpz_t(), x.get_num_mpz_t(), x.get_den_mpz_t());
  Rational f(r, x.get_den());
  f.canonicalize();
  return f;
}

Rational abs_q(const Rational& x) { return sgn(x) < 0 ? Rational(-x) : x; }

Rational pow_q(const Rational& x, unsigned long e) {
  BigInt n, d;
  mpz_pow_ui(n.get_mpz_t(), x.get_num_mpz_t(), e);
  mpz_pow_ui(d.get_mpz_t(), x.get_den_mpz_t(), e);
  return Rational(n, d);
}

size_t bits(const BigInt& x) { return x == 0 ? 0 : mpz_sizeinbase(x.get_mpz_t(), 2); }

double to_double_up(const Rational& x) {
  mpfr_t t;
  mpfr_init2(t, 64);
  mpfr_set_q(t, x.get_mpq_t(), MPFR_RNDU);
  double d = mpfr_get_d(t, MPFR_RNDU);
  mpfr_clear(t);
  return d;
}

mpfr_prec_t prec_for_bits(size_t b) {
  return static_cast<mpfr_prec_t>(std::max<size_t>(128, b + 96));
}

// ---- Interval -------------------------------------------------------------

Interval::Interval(mpfr_prec_t prec) : prec_(prec) {
  mpfr_init2(lo_, prec);
  mpfr_init2(hi_, prec);
  mpfr_set_zero(lo_, 1);
  mpfr_set_zero(hi_, 1);
}

Interval::Interval(const Interval& o) : prec_(o.prec_) {
  mpfr_init2(lo_, prec_);
  mpfr_init2(hi_, prec_);
  mpfr_set(lo_, o.lo_, MPFR_RNDD);
  mpfr_set(hi_, o.hi_, MPFR_RNDU);
}

Interval::Interval(Interval&& o) noexcept : prec_(o.prec_) {
  mpfr_init2(lo_, prec_);
  mpfr_init2(hi_, prec_);
  mpfr_swap(lo_, o.lo_);
  mpfr_swap(hi_, o.hi_);
}

Interval& Interval::operator=(const Interval& o) {
  if (this != &o) {
    set_prec(o.prec_);
    mpfr_set(lo_, o.lo_, MPFR_RNDD);
    mpfr_set(hi_, o.hi_, MPFR_RNDU);
  }
  return *this;
}

Interval& Interval::operator=(Interval&& o) noexcept {
  if (this != &o) {
    std::swap(prec_, o.prec_);
    mpfr_swap(lo_, o.lo_);
    mpfr_swap(hi_, o.hi_);
  }
  return *this;
}

Interval::~Interval() {
  mpfr_clear(lo_);
  mpfr_clear(hi_);
}

void Interval::set_prec(mpfr_prec_t p) {
  if (p == prec_) return;
  prec_ = p;
  mpfr_set_prec(lo_, p);
  mpfr_set_prec(hi_, p);
}

Interval Interval::of(const Rational& x, mpfr_prec_t prec) {
  Interval r(prec);
  mpfr_set_q(r.lo_, x.get_mpq_t(), MPFR_RNDD);
  mpfr_set_q(r.hi_, x.get_mpq_t(), MPFR_RNDU);
  return r;
}

Interval Interval::of(const BigInt& x, mpfr_prec_t prec) {
  Interval r(prec);
  mpfr_set_z(r.lo_, x.get_mpz_t(), MPFR_RNDD);
  mpfr_set_z(r.hi_, x.get_mpz_t(), MPFR_RNDU);
  return r;
}

Interval Interval::of(double x, mpfr_prec_t prec) {
  Interval r(prec);
  mpfr_set_d(r.lo_, x, MPFR_RNDD);
  mpfr_set_d(r.hi_, x, MPFR_RNDU);
  return r;
}

Interval Interval::of(long x, mpfr_prec_t prec) {
  Interval r(prec);
  mpfr_set_si(r.lo_, x, MPFR_RNDD);
  mpfr_set_si(r.hi_, x, MPFR_RNDU);
  return r;
}

Interval Interval::hull(const Rational& a, const Rational& b, mpfr_prec_t prec) {
  const Rational& l = a < b ? a : b;
  const Rational& h = a < b ? b : a;
  Interval r(prec);
  mpfr_set_q(r.lo_, l.get_mpq_t(), MPFR_RNDD);
  mpfr_set_q(r.hi_, h.get_mpq_t(), MPFR_RNDU);
  return r;
}

Interval Interval::pi(mpfr_prec_t prec) {
  Interval r(prec);
  mpfr_const_pi(r.lo_, MPFR_RNDD);
  mpfr_const_pi(r.hi_, MPFR_RNDU);
  return r;
}

double Interval::lo_d() const { return mpfr_get_d(lo_, MPFR_RNDD); }
double Interval::hi_d() const { return mpfr_get_d(hi_, MPFR_RNDU); }

double Interval::mid_d() const {
  mpfr_t m;
  mpfr_init2(m, prec_ + 1);
  mpfr_add(m, lo_, hi_, MPFR_RNDN);
  mpfr_div_2ui(m, m, 1, MPFR_RNDN);
  double d = mpfr_get_d(m, MPFR_RNDN);
  mpfr_clear(m);
  return d;
}

double Interval::rad_d() const {
  double m = mid_d();
  mpfr_t a, b;
  mpfr_init2(a, prec_ + 64);
  mpfr_init2(b, prec_ + 64);
  mpfr_d_sub(a, m, lo_, MPFR_RNDU);
  mpfr_sub_d(b, hi_, m, MPFR_RNDU);
  mpfr_max(a, a, b, MPFR_RNDU);
  double r = mpfr_get_d(a, MPFR_RNDU);
  mpfr_clear(a);
  mpfr_clear(b);
  return r < 0 ? 0.0 : r;
}

Rational Interval::lo_q() const {
  Rational r;
  mpfr_get_q(r.get_mpq_t(), lo_);
  return r;
}

Rational Interval::hi_q() const {
  Rational r;
  mpfr_get_q(r.get_mpq_t(), hi_);
  return r;
}

bool Interval::contains(const Rational& x) const {
  return mpfr_cmp_q(lo_, x.get_mpq_t()) <= 0 && mpfr_cmp_q(hi_, x.get_mpq_t()) >= 0;
}

bool Interval::contains_zero() const { return mpfr_sgn(lo_) <= 0 && mpfr_sgn(hi_) >= 0; }
bool Interval::pos() const { return mpfr_sgn(lo_) > 0; }
bool Interval::neg() const { return mpfr_sgn(hi_) < 0; }

Interval Interval::operator-() const {
  Interval r(prec_);
  mpfr_neg(r.lo_, hi_, MPFR_RNDD);
  mpfr_neg(r.hi_, lo_, MPFR_RNDU);
  return r;
}

Interval operator+(const Interval& a, const Interval& b) {
  Interval r(std::max(a.prec_, b.prec_));
  mpfr_add(r.lo_, a.lo_, b.lo_, MPFR_RNDD);
  mpfr_add(r.hi_, a.hi_, b.hi_, MPFR_RNDU);
  return r;
}

Interval operator-(const Interval& a, const Interval& b) {
  Interval r(std::max(a.prec_, b.prec_));
  mpfr_sub(r.lo_, a.lo_, b.hi_, MPFR_RNDD);
  mpfr_sub(r.hi_, a.hi_, b.lo_, MPFR_RNDU);
  return r;
}

namespace {

using BinOp = int (*)(mpfr_ptr, mpfr_srcptr, mpfr_srcptr, mpfr_rnd_t);

void corners(mpfr_ptr lo, mpfr_ptr hi, mpfr_srcptr a0, mpfr_srcptr a1, mpfr_srcptr b0,
             mpfr_srcptr b1, BinOp op, mpfr_prec_t prec) {
  mpfr_t t;
  mpfr_init2(t, prec);
  mpfr_srcptr as[2] = {a0, a1};
  mpfr_srcptr bs[2] = {b0, b1};
  bool first = true;
  for (auto x : as)
    for (auto y : bs) {
      op(t, x, y, MPFR_RNDD);
      if (first || mpfr_less_p(t, lo)) mpfr_set(lo, t, MPFR_RNDD);
      op(t, x, y, MPFR_RNDU);
      if (first || mpfr_greater_p(t, hi)) mpfr_set(hi, t, MPFR_RNDU);
      first = false;
    }
  mpfr_clear(t);
}

}  // namespace

Interval operator*(const Interval& a, const Interval& b) {
  mpfr_prec_t p = std::max(a.prec_, b.prec_);
  Interval r(p);
  corners(r.lo_, r.hi_, a.lo_, a.hi_, b.lo_, b.hi_, mpfr_mul, p);
  return r;
}

Interval operator/(const Interval& a, const Interval& b) {
  if (b.contains_zero())
    throw Error(ErrorCode::PrecisionInsufficient, "interval division by a range containing 0");
  mpfr_prec_t p = std::max(a.prec_, b.prec_);
  Interval r(p);
  corners(r.lo_, r.hi_, a.lo_, a.hi_, b.lo_, b.hi_, mpfr_div, p);
  return r;
}

Interval Interval::abs() const {
  if (mpfr_sgn(lo_) >= 0) return *this;
  if (mpfr_sgn(hi_) <= 0) return -*this;
  Interval r(prec_);
  mpfr_set_zero(r.lo_, 1);
  if (mpfr_cmpabs(lo_, hi_) > 0)
    mpfr_neg(r.hi_, lo_, MPFR_RNDU);
  else
    mpfr_set(r.hi_, hi_, MPFR_RNDU);
  return r;
}

Interval Interval::sqr() const {
  Interval a = abs();
  Interval r(prec_);
  mpfr_sqr(r.lo_, a.lo_, MPFR_RNDD);
  mpfr_sqr(r.hi_, a.hi_, MPFR_RNDU);
  return r;
}

Interval Interval::sqrt() const {
  if (mpfr_sgn(hi_) < 0) throw Error(ErrorCode::PrecisionInsufficient, "sqrt of negative interval");
  Interval r(prec_);
  if (mpfr_sgn(lo_) <= 0)
    mpfr_set_zero(r.lo_, 1);
  else
    mpfr_sqrt(r.lo_, lo_, MPFR_RNDD);
  mpfr_sqrt(r.hi_, hi_, MPFR_RNDU);
  return r;
}

Interval Interval::log() const {
  if (!pos()) throw Error(ErrorCode::PrecisionInsufficient, "log of non-positive interval");
  Interval r(prec_);
  mpfr_log(r.lo_, lo_, MPFR_RNDD);
  mpfr_log(r.hi_, hi_, MPFR_RNDU);
  return r;
}

Interval Interval::exp() const {
  Interval r(prec_);
  mpfr_exp(r.lo_, lo_, MPFR_RNDD);
  mpfr_exp(r.hi_, hi_, MPFR_RNDU);
  return r;
}

Interval Interval::pow(const Interval& e) const { return (e * log()).exp(); }

Interval Interval::atan() const {
  Interval r(prec_);
  mpfr_atan(r.lo_, lo_, MPFR_RNDD);
  mpfr_atan(r.hi_, hi_, MPFR_RNDU);
  return r;
}

namespace {

// f is 1-Lipschitz with range [-1,1]
Interval lipschitz_trig(const Interval& x, int (*f)(mpfr_ptr, mpfr_srcptr, mpfr_rnd_t)) {
  mpfr_prec_t p = x.prec();
  Interval r(p);
  mpfr_t m, rad, t;
  mpfr_inits2(p + 8, m, rad, t, (mpfr_ptr) nullptr);
  mpfr_sub(rad, x.hi(), x.lo(), MPFR_RNDU);
  if (mpfr_cmp_ui(rad, 2) > 0) {
    mpfr_set_si(const_cast<mpfr_ptr>(r.lo()), -1, MPFR_RNDD);
    mpfr_set_si(const_cast<mpfr_ptr>(r.hi()), 1, MPFR_RNDU);
  } else {
    mpfr_add(m, x.lo(), x.hi(), MPFR_RNDN);
    mpfr_div_2ui(m, m, 1, MPFR_RNDN);
    // radius around the (exact) point m
    mpfr_sub(rad, x.hi(), m, MPFR_RNDU);
    mpfr_sub(t, m, x.lo(), MPFR_RNDU);
    mpfr_max(rad, rad, t, MPFR_RNDU);
    mpfr_ptr lo = const_cast<mpfr_ptr>(r.lo());
    mpfr_ptr hi = const_cast<mpfr_ptr>(r.hi());
    f(lo, m, MPFR_RNDD);
    f(hi, m, MPFR_RNDU);
    mpfr_sub(lo, lo, rad, MPFR_RNDD);
    mpfr_add(hi, hi, rad, MPFR_RNDU);
    if (mpfr_cmp_si(lo, -1) < 0) mpfr_set_si(lo, -1, MPFR_RNDD);
    if (mpfr_cmp_si(hi, 1) > 0) mpfr_set_si(hi, 1, MPFR_RNDU);
  }
  mpfr_clears(m, rad, t, (mpfr_ptr) nullptr);
  return r;
}

}  // namespace

Interval Interval::sin() const { return lipschitz_trig(*this, mpfr_sin); }
Interval Interval::cos() const { return lipschitz_trig(*this, mpfr_cos); }

Interval Interval::widen(const Rational& r) const {
  Interval w = Interval::of(r, prec_);
  Interval out(prec_);
  mpfr_sub(out.lo_, lo_, w.hi_, MPFR_RNDD);
  mpfr_add(out.hi_, hi_, w.hi_, MPFR_RNDU);
  return out;
}

Interval Interval::max(const Interval& o) const {
  Interval r(std::max(prec_, o.prec_));
  mpfr_max(r.lo_, lo_, o.lo_, MPFR_RNDD);
  mpfr_max(r.hi_, hi_, o.hi_, MPFR_RNDU);
  return r;
}

Interval Interval::min(const Interval& o) const {
  Interval r(std::max(prec_, o.prec_));
  mpfr_min(r.lo_, lo_, o.lo_, MPFR_RNDD);
  mpfr_min(r.hi_, hi_, o.hi_, MPFR_RNDU);
  return r;
}

Interval Interval::join(const Interval& o) const {
  Interval r(std::max(prec_, o.prec_));
  mpfr_min(r.lo_, lo_, o.lo_, MPFR_RNDD);
  mpfr_max(r.hi_, hi_, o.hi_, MPFR_RNDU);
  return r;
}

bool Interval::lt(const Interval& o) const { return mpfr_less_p(hi_, o.lo_); }
bool Interval::le(const Interval& o) const { return mpfr_lessequal_p(hi_, o.lo_); }

std::string format_interval(const Interval& x, int digits) {
  std::ostringstream os;
  os.precision(digits);
  os << "[" << x.lo_d() << ", " << x.hi_d() << "]";
  return os.str();
}

// ---- exact power comparisons ---------------------------------------------

namespace {

struct Cleared {
  BigInt num = 1;
  BigInt den = 1;
};

constexpr double kMaxBits = 4.0e8;

void accumulate(const PowProduct& p, BigInt& L) {
  for (const auto& t : p) mpz_lcm(L.get_mpz_t(), L.get_mpz_t(), t.expo.get_den_mpz_t());
}

double estimate_bits(const PowProduct& p, const BigInt& L) {
  double total = 0;
  for (const auto& t : p) {
    Rational e = t.expo * L;
    double b = static_cast<double>(bits(t.base.get_num()) + bits(t.base.get_den()));
    total += std::fabs(e.get_d()) * b;
  }
  return total;
}

// side * prod base^(e*L) moved into num/den
void raise(const PowProduct& p, const BigInt& L, BigInt& num, BigInt& den) {
  for (const auto& t : p) {
    if (sgn(t.base) <= 0) throw Error(ErrorCode::PrecisionInsufficient, "power of non-positive base");
    Rational e = t.expo * L;
    BigInt ez = e.get_num();  // integer since L clears denominators
    bool negexp = ez < 0;
    if (negexp) ez = -ez;
    if (!ez.fits_ulong_p()) throw Error(ErrorCode::PrecisionInsufficient, "exponent too large");
    unsigned long k = ez.get_ui();
    BigInt a, b;
    mpz_pow_ui(a.get_mpz_t(), t.base.get_num_mpz_t(), k);
    mpz_pow_ui(b.get_mpz_t(), t.base.get_den_mpz_t(), k);
    if (negexp) std::swap(a, b);
    num *= a;
    den *= b;
  }
}

int exact_cmp(const PowProduct& lhs, const PowProduct& rhs) {
  BigInt L = 1;
  accumulate(lhs, L);
  accumulate(rhs, L);
  if (estimate_bits(lhs, L) + estimate_bits(rhs, L) > kMaxBits)
    throw Error(ErrorCode::PrecisionInsufficient, "exact power comparison too large");
  BigInt ln = 1, ld = 1, rn = 1, rd = 1;
  raise(lhs, L, ln, ld);
  raise(rhs, L, rn, rd);
  // lhs^L vs rhs^L, both positive
  return cmp(BigInt(ln * rd), BigInt(rn * ld));
}

}  // namespace

bool exact_le(const PowProduct& lhs, const PowProduct& rhs) { return exact_cmp(lhs, rhs) <= 0; }
bool exact_lt(const PowProduct& lhs, const PowProduct& rhs) { return exact_cmp(lhs, rhs) < 0; }

Interval eval_pow(const PowProduct& p, mpfr_prec_t prec) {
  Interval acc = Interval::of(1L, prec);
  for (const auto& t : p) {
    Interval b = Interval::of(t.base, prec);
    Interval e = Interval::of(t.expo, prec);
    acc = acc * b.pow(e);
  }
  return acc;
}

}  // namespace besi
