#pragma once

#include <gmpxx.h>
#include <mpfr.h>

#include <cstdint>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace besi {

using BigInt = mpz_class;
using Rational = mpq_class;

enum class ErrorCode {
  DepthInsufficient,
  NoAdmissibleQuotient,
  WindowEmpty,
  PrecisionInsufficient,
  RangeUnresolved,
  GridTooCoarse,
  HypothesisFails,
  LevelBoundViolated,
  NoAdmissibleIndex,
  GapNonMonotone,
  QuadratureStalled,
  SingularityApproach,
  OnSingularSet,
  Inconclusive,
  QuotientUnavailable,
  ConfigError,
};

const char* error_name(ErrorCode c);

class Error : public std::runtime_error {
 public:
  Error(ErrorCode c, const std::string& what);
  ErrorCode code() const { return code_; }

 private:
  ErrorCode code_;
};

// "p/q", "-3", "0.15", "1e-3" -> exact rational
Rational parse_rational(const std::string& s);
std::string to_string(const Rational& r);  // "num/den"
Rational rational_from_double(double x);   // exact binary value

BigInt floor_div(const BigInt& a, const BigInt& b);
BigInt floor_q(const Rational& x);
BigInt ceil_q(const Rational& x);
Rational frac(const Rational& x);  // x - floor(x), in [0,1)
Rational abs_q(const Rational& x);
Rational pow_q(const Rational& x, unsigned long e);
size_t bits(const BigInt& x);
double to_double_up(const Rational& x);  // >= x

// Closed interval with MPFR endpoints and outward rounding.
class Interval {
 public:
  explicit Interval(mpfr_prec_t prec = 256);
  Interval(const Interval& o);
  Interval(Interval&& o) noexcept;
  Interval& operator=(const Interval& o);
  Interval& operator=(Interval&& o) noexcept;
  ~Interval();

  static Interval of(const Rational& x, mpfr_prec_t prec = 256);
  static Interval of(const BigInt& x, mpfr_prec_t prec = 256);
  static Interval of(double x, mpfr_prec_t prec = 256);
  static Interval of(long x, mpfr_prec_t prec = 256);
  static Interval hull(const Rational& a, const Rational& b, mpfr_prec_t prec = 256);
  static Interval pi(mpfr_prec_t prec = 256);

  mpfr_prec_t prec() const { return prec_; }
  mpfr_srcptr lo() const { return lo_; }
  mpfr_srcptr hi() const { return hi_; }

  double lo_d() const;  // rounded down
  double hi_d() const;  // rounded up
  double mid_d() const;
  double rad_d() const;  // rounded up, covers mid_d()
  Rational lo_q() const;
  Rational hi_q() const;

  bool contains(const Rational& x) const;
  bool contains_zero() const;
  bool pos() const;  // lo > 0
  bool neg() const;  // hi < 0

  Interval operator-() const;
  friend Interval operator+(const Interval& a, const Interval& b);
  friend Interval operator-(const Interval& a, const Interval& b);
  friend Interval operator*(const Interval& a, const Interval& b);
  friend Interval operator/(const Interval& a, const Interval& b);

  Interval abs() const;
  Interval sqr() const;
  Interval sqrt() const;
  Interval log() const;
  Interval exp() const;
  Interval pow(const Interval& e) const;  // this > 0
  Interval sin() const;
  Interval cos() const;
  Interval atan() const;
  Interval widen(const Rational& r) const;
  Interval max(const Interval& o) const;
  Interval min(const Interval& o) const;
  Interval join(const Interval& o) const;

  // certain comparisons
  bool lt(const Interval& o) const;  // hi < o.lo
  bool le(const Interval& o) const;  // hi <= o.lo

 private:
  void set_prec(mpfr_prec_t p);
  mpfr_prec_t prec_;
  mpfr_t lo_, hi_;
};

std::string format_interval(const Interval& x, int digits = 17);

// prod b_i^{e_i} with integer bases > 0 and rational exponents
struct PowTerm {
  Rational base;
  Rational expo;
};
using PowProduct = std::vector<PowTerm>;

// exact comparison lhs <= rhs (both positive), by clearing exponent denominators.
// Throws PrecisionInsufficient if the required powers would be absurdly large.
bool exact_le(const PowProduct& lhs, const PowProduct& rhs);
bool exact_lt(const PowProduct& lhs, const PowProduct& rhs);

// interval evaluation of a power product
Interval eval_pow(const PowProduct& p, mpfr_prec_t prec = 256);

// precision (bits) enough to resolve integers of the given size
mpfr_prec_t prec_for_bits(size_t b);

}  // namespace besi
