#pragma once

#include "besi/cocycles.hpp"

#include <cstdint>
#include <ostream>
#include <random>
#include <string>
#include <vector>

namespace besi {

struct RInterval {
  Rational lo, hi;
  Rational length() const { return hi - lo; }
  bool contains(const Rational& x) const { return lo <= x && x <= hi; }
};

// q translates of [c - half, c + half] with c = (anchor + j) / q, j = 0..q-1
struct LatticeLevel {
  BigInt q;
  Rational anchor;  // in units of 1/q
  Rational half;
  Rational length() const { return 2 * half; }
  Rational step() const { return Rational(1, q); }
  RInterval at(const BigInt& j) const;
  // indices of the translates lying inside [lo, hi]
  std::pair<BigInt, BigInt> inside(const Rational& lo, const Rational& hi) const;
};

// E_1..E_N over E_0 = [0,1]. Levels are either explicit interval lists or lattices;
// a lattice system keeps at level k only the translates inside a level-(k-1) interval.
struct NestedIntervalSystem {
  std::string label;
  std::vector<std::vector<RInterval>> explicit_levels;
  std::vector<LatticeLevel> lattice;
  std::vector<BigInt> child_counts;  // m_k
  std::vector<Rational> gap_bounds;  // eps_k
  std::vector<Rational> max_length;

  int depth() const { return static_cast<int>(child_counts.size()); }
  bool is_lattice() const { return !lattice.empty(); }
};

// floor((b - a) / h), the guaranteed number of translates A + kh inside B
BigInt translate_lower_count(const Rational& a, const Rational& b, const Rational& h);
// a < h < b and, when b >= 4h, floor((b-a)/h) >= b/(4h)
bool translate_bound_holds(const Rational& a, const Rational& b, const Rational& h);
// exact number of k with [alo + kh, alo + a + kh] inside [blo, blo + b]
BigInt translate_count(const Rational& alo, const Rational& a, const Rational& blo,
                       const Rational& b, const Rational& h);

// middle-third system; levels beyond explicit_cap carry counts only
NestedIntervalSystem middle_third(int levels, int explicit_cap = 12);
NestedIntervalSystem lattice_system(const std::vector<LatticeLevel>& levels, const std::string& label);

struct SystemReport {
  bool ok = true;
  std::vector<std::string> failures;
};
SystemReport verify_system(const NestedIntervalSystem& sys);

// ---- subsequences ---------------------------------------------------------------

enum class Parity { Even, Odd };
enum class SubsequenceRule { Separated, Growth };

struct Subsequence {
  long k0 = 0;
  std::vector<long> ks;
  Parity parity = Parity::Even;
  SubsequenceRule rule = SubsequenceRule::Separated;
  Rational gamma, C;  // growth target
};

// greedy smallest admissible indices of the requested parity, searched up to max_index
Subsequence select_subsequence(const ContinuedFraction& cf, Parity parity, SubsequenceRule rule,
                               int depth, long k0 = 0, const Rational& gamma = 0,
                               const Rational& C = 0, long max_index = 4000);

struct SubsequenceReport {
  bool separated = true;  // q_{k_{n+1}} > 16 q_{k_n} q_{k_n+1} / q_{k_{n-1}}, q_{k_n - 1} >= 4 q_{k_{n-1}}
  bool amplitude_ratio = true;       // M_{n+1} >= 33 M_n
  bool growth = true;          // q_{k_n} >= (q_{k_{n-1}} q_{k_{n-1}+1})^n, ..., q_{k_n+1} <= C q^gamma
  bool parity = true;
  std::vector<std::string> failures;
};
SubsequenceReport check_subsequence(const ContinuedFraction& cf, const Subsequence& s,
                                    const std::vector<Rational>& M = {});

// ---- orbit-type sets ------------------------------------------------------------

struct OrbitTypeSet {
  std::string signs;  // "++", "-+", "--", "+-"
  long k0 = 0;
  std::vector<long> ks;
  bool odd = false;
  std::vector<Rational> anchors;  // per level, units of 1/q_{k_n}
  std::vector<Rational> deltas;   // delta_n
  NestedIntervalSystem system;
  SubsequenceReport certificates;
};

// anchor (units of 1/q) and half-width (units of delta) for a sign pattern
std::pair<Rational, Rational> orbit_type_shape(const std::string& signs, bool odd);

OrbitTypeSet build_orbit_type_set(const CocycleFamily& fam, const std::string& signs, int depth);

struct Membership {
  bool in = false;
  int failed_level = 0;  // first level not containing x (0 if none)
  std::vector<BigInt> witnesses;  // j_1..j_N
};
Membership membership(const OrbitTypeSet& set, const Rational& x, int level);
Membership membership(const NestedIntervalSystem& sys, const Rational& x, int level);

// points of the nested (children inside parents) system at level N: a random descent,
// then the centre and the two quarter points of the final interval
std::vector<Rational> sample_points(const NestedIntervalSystem& sys, int level, int descents,
                                    std::mt19937_64& rng);

// ---- dimension bounds -----------------------------------------------------------

struct FalconerRow {
  int k = 0;
  BigInt m;
  Rational eps;
  Interval ratio;  // log(m_1...m_{k-1}) / (-log(m_k eps_k))
};
struct FalconerReport {
  std::vector<FalconerRow> rows;
  Interval running_inf;  // min over computed rows
  Interval last;
};
FalconerReport falconer_lower_bound(const NestedIntervalSystem& sys);

// right side of the level-n (n >= 2) lower bound for F^{s-s+}
Interval orbit_type_bound(const ContinuedFraction& cf, const OrbitTypeSet& set, int n);

struct CoverRow {
  int n = 0;
  Interval ratio;  // log q_{k_n} / (-log(delta_n / 4))
};
std::vector<CoverRow> covering_upper_bound(const ContinuedFraction& cf, const OrbitTypeSet& set);

// F^{(j)} level n: [-r_n, r_n] + l/q_n with r_n = 1/ceil(sqrt(q_n q_{n+1})) <= 1/sqrt(q_n q_{n+1})
NestedIntervalSystem cosine_factor_system(const ContinuedFraction& cf, int levels);

struct ProductBound {
  std::vector<FalconerReport> factors;
  Interval sum_last, sum_inf;
};
ProductBound product_dimension_bound(const std::vector<NestedIntervalSystem>& systems);

// CSV: level, j, left_num, left_den, right_num, right_den (at most max_rows per level)
void write_levels_csv(std::ostream& os, const NestedIntervalSystem& sys, long max_rows = 64);
// CSV: level, m_k, eps_k_num, eps_k_den, ratio
void write_bounds_csv(std::ostream& os, const FalconerReport& rep);

}  // namespace besi
