#pragma once

#include "besi/diophantine.hpp"

#include <cstdint>
#include <string>
#include <vector>

namespace besi {

enum class CocycleKind { Tent, Trapezoid, EightPiece, Cosine };
const char* kind_name(CocycleKind k);

// One 1/q-periodic piecewise-linear f_n. Knots are in period units u = q x in [0,1].
struct PLLevel {
  long index = 0;   // n, or k_n for the eight-piece family
  BigInt q;         // period denominator
  BigInt q_next;    // q_{index+1}
  BigInt q_base;    // q_{n-1} (or q_{k_{n-1}})
  Rational M, L, delta;
  std::vector<Rational> knots;
  std::vector<Rational> values;
  std::vector<Rational> slopes;  // per unit of u
  std::vector<Rational> offsets;  // value at u = 0 of each segment's line
  // integer form: on segment i, f = (A_i u + C_i) / B; knots kn_i / kd_i
  BigInt B;
  std::vector<BigInt> A, C, kn, kd;

  Rational eval_u(const Rational& u) const;  // u in [0,1)
  Rational eval(const Rational& x) const;
  Rational sup() const;  // max of f_n
  Rational lipschitz() const;  // max |slope| in x units
  void finish();  // checks knots and fills slopes
};

struct CosineLevel {
  long index = 0;
  BigInt q, q_next;
  Rational beta;  // 1 + abar - eps
};

// true value in [center - radius - tail_lo, center + radius + tail_hi]; radius covers
// the alpha approximation and rounding of the depth-N truncation, tails cover n > N.
struct CertifiedValue {
  Rational center;
  Rational radius;
  Rational tail_lo, tail_hi;

  double value() const { return center.get_d(); }
  double total_radius() const;
  Rational trunc_lo() const { return center - radius; }
  Rational trunc_hi() const { return center + radius; }
  Rational lo() const { return center - radius - tail_lo; }
  Rational hi() const { return center + radius + tail_hi; }
  static CertifiedValue from_interval(const Interval& x);
};

struct CocycleFamily {
  CocycleKind kind = CocycleKind::Tent;
  ContinuedFraction alpha;
  AlphaApprox approx;  // rational stand-in for alpha used by evaluations
  std::string rule;    // linear | holder | custom | logrule | pow33 | cosine
  std::vector<PLLevel> pl;
  std::vector<CosineLevel> cos;
  Rational gamma;               // holder rule
  Rational a, eps, abar;        // cosine
  int dim = 1;                  // cosine: d
  long seed_index = 0;          // eight-piece: k_0
  std::vector<long> subsequence;  // eight-piece: k_1..k_N
  bool odd = false;             // eight-piece parity
  // sum over n > N of ||f_n(. + alpha) - f_n||, under the family's growth assumptions
  Rational phi_tail;
  std::string tail_note;

  int depth() const;
  bool piecewise_linear() const { return kind != CocycleKind::Cosine; }
  Rational lipschitz_sum() const;  // sum of level Lipschitz constants
  Rational lip_total;  // cached lipschitz_sum(), filled by the factories
  BigInt level_den;    // lcm of the levels' B
  std::vector<BigInt> level_mult;  // level_den / B per level
};

struct ProductCocycle {
  std::vector<CocycleFamily> components;
};

// ---- factories --------------------------------------------------------------

// M_n = n
CocycleFamily tent_linear(const ContinuedFraction& cf, int depth);
// M_1..M_N given; f_n = 0 for n > N
CocycleFamily tent_custom(const ContinuedFraction& cf, const std::vector<Rational>& M);
// M_n = q_{n-1} / (2 (q_n q_{n+1})^gamma), rounded down to a rational
CocycleFamily tent_holder(const ContinuedFraction& cf, const Rational& gamma, int depth);

CocycleFamily trapezoid(const ContinuedFraction& cf, const std::vector<Rational>& M);
CocycleFamily trapezoid_logrule(const ContinuedFraction& cf, const Rational& eps, int depth);

// levels on q_{k_1}, ..., q_{k_N} with q_{k_0} the base; M empty means M_n = 33^n
CocycleFamily eightpiece(const ContinuedFraction& cf, const std::vector<long>& ks, long k0,
                         const std::vector<Rational>& M = {});

CocycleFamily cosine(const ContinuedFraction& cf, const Rational& a, int d, const Rational& eps,
                     int depth);
ProductCocycle product_cosine(const RotationVector& v, const Rational& eps, int depth);

Rational abar_of(const Rational& a, int d);

// rebind the alpha approximation used by evaluations
void set_approx(CocycleFamily& fam, const AlphaApprox& a);

// ---- evaluation --------------------------------------------------------------

Rational eval_level(const CocycleFamily& fam, int n, const Rational& x);  // 1-based n
Interval eval_level_cos(const CocycleFamily& fam, int n, const Rational& x, mpfr_prec_t prec = 0);

// sum_{n<=N} f_n(y) on a shared denominator
Rational sum_levels(const CocycleFamily& fam, const Rational& y);

CertifiedValue eval_phi(const CocycleFamily& fam, const Rational& x);
CertifiedValue birkhoff(const CocycleFamily& fam, const Rational& x, const BigInt& k);
// sum_{i<k} phi(x + i alpha), or the negative-k convention; O(|k|)
CertifiedValue direct_sum(const CocycleFamily& fam, const Rational& x, long k);
// running direct sums for k = 0..K (first) and k = 0, -1, ..., -K (second)
std::pair<std::vector<CertifiedValue>, std::vector<CertifiedValue>> direct_sums(
    const CocycleFamily& fam, const Rational& x, long K);

CertifiedValue birkhoff(const ProductCocycle& p, const std::vector<Rational>& x, const BigInt& m);

// exact integral over [0,1) of the depth-N truncation (piecewise-linear kinds)
Rational integrate_phi_exact(const CocycleFamily& fam, long max_pieces = 2000000);

// ---- certificates ------------------------------------------------------------

struct DivergenceCertificate {
  int level = 0;         // n for which the range holds
  Rational bound;        // signed: value >= bound if sign > 0, value <= bound if sign < 0
  int sign = 1;
  CertifiedValue value;  // truncation enclosure of phi^(k)(x)
  bool holds = false;    // certified on the truncation
  bool consistent = false;  // bound within value + radius
  std::string rule;
};

// Tent at x = 0; EightPiece with type "++", "-+", "--", "+-" (x in the level-N set)
DivergenceCertificate divergence_certificate(const CocycleFamily& fam, const Rational& x,
                                             const BigInt& k, const std::string& type = "");
// the per-level inequality f_{n+1}(k alpha) >= M_{n+1}/2 at the reduced point, exactly
bool tent_level_certificate(const CocycleFamily& fam, const BigInt& k);

struct CosineBound {
  int level = 0, slot = 0;
  bool in_range = false;      // q_n^{a^{d-1}} <= |m| <= q_{n+1}/4 and side condition
  bool side_condition = false;
  Interval theta, K, bound;   // bound = theta |m|^{eps/a^d} - K (or - dK for the product)
  CertifiedValue value;
  bool holds = false;
};
Interval cosine_K(const Rational& a, int d, const Rational& eps);
// single coordinate: C0 is the growth constant of the coordinate
CosineBound cosine_certificate(const CocycleFamily& fam, const Rational& x, const BigInt& m,
                               const Rational& C0);
// product on T^d with C_a; picks the slot j whose range contains |m|
CosineBound product_certificate(const ProductCocycle& p, const RotationVector& v,
                                const std::vector<Rational>& x, const BigInt& m);

// ---- Fourier -----------------------------------------------------------------

struct FourierValue {
  Interval modulus;  // |hat phi_N(n)|
  Rational tail;     // extra radius for the full series
};
FourierValue fourier_closed_form(const CocycleFamily& fam, long n);
FourierValue fourier_closed_form(const CocycleFamily& fam, const BigInt& n);
FourierValue fourier_quadrature(const CocycleFamily& fam, long n, long max_pieces = 4000000);
// hat g_m(s) = -sin^2(pi s q_m delta_m) / (pi^2 s^2)
Interval g_hat(const CocycleFamily& fam, int m, long s);

// M_k = min(log q_k / (k q_{k-1}^2), q_{k-1}^eps), rounded down
std::vector<Rational> choose_M_for_log_bound(const ContinuedFraction& cf, const Rational& eps,
                                             int depth);

// ---- Hoelder -----------------------------------------------------------------

struct HolderLevel {
  int n = 0;
  Rational lip;    // L(phi_n) = 2 L_n
  Rational sup;    // L_n / (q_n q_{n+1}) >= ||phi_n||
  bool lip_ok = false, sup_ok = false;
};
struct HolderReport {
  Rational gamma;
  std::vector<HolderLevel> levels;
  Interval constant;   // D_{1-gamma} + 2 D_gamma
  double empirical = 0;
  double worst_x = 0, worst_y = 0;
  bool ok = false;
};
Interval lacunary_D(const Rational& beta);
HolderReport holder_levels(const CocycleFamily& fam);
HolderReport holder_estimate(const CocycleFamily& fam, long samples, std::uint64_t seed);
// ratio |phi(x) - phi(y)| / |x - y|^gamma at the level-N breakpoint pair at distance 1/w_N
double holder_probe(const CocycleFamily& fam, const Rational& gamma_prime, int level);

// ---- smoothness (cosine) -----------------------------------------------------

struct SmoothnessRow {
  int k = 0;  // derivative order
  std::vector<Interval> per_level;  // (2 pi)^{k+1} / q_n^{beta - k}
  Interval sum, tail;
  bool converges = false;
};
std::vector<SmoothnessRow> smoothness_certificate(const CocycleFamily& fam);
// derivative of the depth-N truncation at x
Interval phi_derivative(const CocycleFamily& fam, const Rational& x);

}  // namespace besi
