#pragma once

#include "besi/numeric.hpp"

#include <functional>
#include <memory>
#include <mutex>
#include <optional>
#include <string>
#include <vector>

namespace besi {

// Exact rational interval [lo, hi].
struct QInterval {
  Rational lo, hi;
  bool contains(const Rational& x) const { return lo <= x && x <= hi; }
  Rational width() const { return hi - lo; }
};

// Irrational alpha in (0,1) given by partial quotients a_1, a_2, ...
//
// Three sources: a known prefix followed by a repeated last quotient (quadratic
// irrationals such as the golden ratio), a generator, or a finite prefix whose
// continuation is unknown (constructed numbers). For the last kind every
// enclosure is valid for all continuations.
class ContinuedFraction {
 public:
  using Generator = std::function<BigInt(std::size_t)>;

  static ContinuedFraction repeat_last(std::vector<BigInt> quotients);
  static ContinuedFraction prefix(std::vector<BigInt> quotients);
  static ContinuedFraction generated(Generator g, std::string label);
  static ContinuedFraction golden();
  static ContinuedFraction sqrt2_minus_1();

  bool infinite() const;
  std::size_t known() const;  // number of known quotients (SIZE_MAX if infinite)
  bool has(long n) const;     // is a_n available (n >= 1)
  BigInt quotient(long n) const;

  // convergents; n >= -1
  BigInt q(long n) const;
  BigInt p(long n) const;
  std::pair<BigInt, BigInt> convergent(long n) const;
  // deepest index whose convergent exists, capped at cap
  long deepest(long cap) const;

  // rational enclosure of alpha using quotients up to depth n
  QInterval enclosure(long n) const;
  // interval of alpha from the closed form when the tail is periodic
  std::optional<Interval> closed_form(mpfr_prec_t prec) const;

  std::string describe() const;
  bool same_as(const ContinuedFraction& o) const;

  const std::vector<BigInt>& prefix_quotients() const { return head_; }
  bool is_repeat_last() const { return kind_ == Kind::RepeatLast; }

 private:
  enum class Kind { RepeatLast, Prefix, Generated };
  struct Cache {
    std::mutex mu;
    std::vector<BigInt> p{1, 0}, q{0, 1};  // index n+1
  };
  void extend(long n) const;

  Kind kind_ = Kind::Prefix;
  std::vector<BigInt> head_;
  Generator gen_;
  std::string label_;
  std::shared_ptr<Cache> cache_ = std::make_shared<Cache>();
};

struct AlphaApprox {
  long depth = 0;
  Rational value;   // p_N / q_N
  Rational radius;  // |alpha - value| < radius
};

// approximation p_N/q_N with radius 1/(q_N q_{N+1}); at the last known quotient of
// a prefix the radius is 1/(q_N (q_N + q_{N-1})).
AlphaApprox approx_at(const ContinuedFraction& cf, long depth);
// shallowest approximation with radius <= tol (or the deepest available)
AlphaApprox approx_for(const ContinuedFraction& cf, const Rational& tol, bool require = true);

std::pair<BigInt, BigInt> convergents(const ContinuedFraction& cf, long n);

// certified enclosure of |alpha - p_n/q_n| (uses deeper quotients)
QInterval approximation_gap(const ContinuedFraction& cf, long n);
// certified enclosure of ||q_n alpha||
QInterval distance_to_integers(const ContinuedFraction& cf, long n);

struct Reduced {
  Rational value;   // fractional part of x + m * approx.value
  Rational radius;  // |m| * approx.radius
  bool straddles = false;
};
Reduced reduce_mod1(const Rational& x, const BigInt& m, const AlphaApprox& alpha);
Reduced reduce_mod1(const Rational& x, const BigInt& m, const AlphaApprox& alpha,
                    const Rational& tol);

// 4 q_n^e <= q_{n+1} <= C0 q_n^e, greedy minimal (a '1' in choices takes the
// next admissible quotient instead).
ContinuedFraction construct_alpha_with_growth(const Rational& e, const Rational& C0,
                                              const BigInt& seed, int levels,
                                              const std::string& choices = "");

// q_1 = seed and then log q_k >= k q_{k-1}^2 r_{k-1} (1 + margin), r_k = log q_k/(k q_{k-1}^2),
// followed by one padding quotient.
ContinuedFraction construct_log_tower(const BigInt& seed, int levels, const Rational& margin,
                                      const BigInt& pad);

// ---- rotation vectors -------------------------------------------------------

struct BoundPair {
  Rational A, B;
};

struct RotationVector {
  Rational a;                                // growth exponent
  std::vector<ContinuedFraction> coords;     // d coordinates
  int levels = 0;                            // constructed levels n = 1..levels
  std::vector<std::vector<BoundPair>> S;     // S[n-1][j-1]

  int d() const { return static_cast<int>(coords.size()); }
  // q_n^{(j)} with q_n^{(0)} = q_{n-1}^{(d)} and q_n^{(d+1)} = q_{n+1}^{(1)}
  BigInt q(long n, int j) const;
};

struct GrowthConstants {
  Rational A, B, C;  // A = 16, B = ceil(4^a A), C = 2B
};
GrowthConstants growth_constants(const Rational& a);

std::vector<std::vector<BoundPair>> uniform_bounds(int levels, int d, const BoundPair& b);

// greedy construction inside the windows given by S
RotationVector construct_rotation_vector(const Rational& a, int d, int levels,
                                         const std::vector<std::vector<BoundPair>>& S,
                                         const std::string& choices = "");
RotationVector construct_rotation_vector(const Rational& a, int d, int levels,
                                         const std::string& choices = "");

// replace slot l (1-based) by a new coordinate whose level-n denominators lie in
// I_n, with the relaxed (4, C) bounds in slot l.
RotationVector perturb_slot(const RotationVector& v, int l, const std::string& choices = "");

struct WindowReport {
  bool ok = true;
  std::vector<std::string> failures;
};
// exact recheck of A q^{(j-1)a} <= q^{(j)} <= B q^{(j-1)a}
WindowReport check_windows(const RotationVector& v);
WindowReport check_windows(const RotationVector& v,
                              const std::vector<std::vector<BoundPair>>& S);
// derived inequalities with C_a = C^{1+a+...+a^{d-1}}
WindowReport check_derived(const RotationVector& v);

using IntVec = std::vector<long>;
// all m with |m_i| <= H, m != 0, for which <m, alpha> is an integer
std::vector<IntVec> independence_scan(const RotationVector& v, long H);
std::vector<IntVec> independence_scan(const std::vector<ContinuedFraction>& coords, long H,
                                      int max_slot = -1);

// vector built slot by slot so that no m of height <= H in Z^{d,l} annihilates it
RotationVector construct_independent_vector(const Rational& a, int d, int levels, long H,
                                            const std::string& choices = "");

}  // namespace besi
