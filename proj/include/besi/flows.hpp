#pragma once

#include "besi/cocycles.hpp"

#include <array>
#include <complex>
#include <functional>
#include <memory>
#include <ostream>
#include <random>
#include <string>
#include <vector>

namespace besi {

// b(z) = 140 t^3 (1-t)^3 / (1 - 2 eta), t = (z - eta) / (1 - 2 eta), zero off [eta, 1 - eta]
struct Bump {
  Rational eta{1, 8};
  double operator()(double z) const;
  double antiderivative(double z) const;   // B(z) = int_0^z b, z in [0,1]
  Rational antiderivative(const Rational& z) const;
  Rational integral() const { return antiderivative(Rational(1)); }
  double sup() const;   // max b
  double lip() const;   // max |b'|
};

struct ToralState {
  double omega = 0, theta = 0, s = 0;
};

struct FastPhi;

// psi(omega, theta) = phi(omega - {theta} alpha) b({theta}) when built from a cocycle
struct DrivingFunction {
  std::shared_ptr<const CocycleFamily> fam;  // null for a plain callable
  std::shared_ptr<const FastPhi> fast;
  std::function<double(double, double)> callable;
  Bump bump;
  double alpha = 0;
  Rational alpha_q;
  // Hoelder certificate of psi: |psi(w,t) - psi(w',t')| <= M (|w-w'| + |t-t'|)^gamma, ||psi|| <= C
  bool has_holder = false;
  double gamma = 1, M = 0, C = 0;

  double phi(double x) const;  // depth-N truncation, long double levels
  double operator()(double omega, double theta) const;
};

DrivingFunction psi_from_phi(const CocycleFamily& fam, const Rational& eta = Rational(1, 8));
DrivingFunction psi_callable(std::function<double(double, double)> f, double alpha);
// attach (gamma, M_phi, ||phi||) and derive the psi certificate
void set_holder(DrivingFunction& psi, double gamma, double M_phi, double sup_phi);

// 64-point Gauss-Legendre value of int_0^1 psi(omega + tau alpha, tau) dtau
double reconstruct_phi(const DrivingFunction& psi, double omega);

struct FlowValue {
  ToralState state;
  double radius = 0;  // on s
};
// fiber increment by the piecewise closed form (cocycle psi) or adaptive quadrature
FlowValue exact_flow(const ToralState& st, double t, const DrivingFunction& psi, double tol = 1e-12);
// exact rational version for integer-and-fraction bookkeeping: t = M - theta + f
CertifiedValue fiber_increment(const DrivingFunction& psi, const Rational& omega, const Rational& theta,
                               const Rational& t);

// ---- ambient systems -------------------------------------------------------------

using R3 = std::array<double, 3>;
using S3 = std::array<std::complex<double>, 2>;

constexpr double kGuardS0 = 1e-6;   // |r - 1| and |z| around S_0
constexpr double kGuardR0 = 1e-12;  // x^2 + y^2 around R_0

R3 toral_to_r3(const ToralState& st);
ToralState r3_to_toral(const R3& p);  // OnSingularSet on S_0 or R_0
S3 toral_to_s3(const ToralState& st);
ToralState s3_to_toral(const S3& p);  // OnSingularSet on S^1_+ or S^1_-

R3 rhs_r3(const R3& p, const DrivingFunction& psi);
S3 rhs_s3(const S3& p, const DrivingFunction& psi);
double first_integral_r3(const R3& p);  // ln((r+1)^2+z^2) - ln((r-1)^2+z^2)

template <class State>
struct Trajectory {
  std::vector<double> t;
  std::vector<State> x;
  double max_drift = 0;  // sphere constraint (S^3) or first integral (R^3, relative)
};

// fixed-step RK4, recording every `stride` steps (and the last point)
Trajectory<R3> integrate_r3(const R3& x0, double t_end, double h, const DrivingFunction& psi,
                            long stride = 1);
Trajectory<S3> integrate_s3(const S3& z0, double t_end, double h, const DrivingFunction& psi,
                            long stride = 1, bool renormalize = true);

void write_trajectory_csv(std::ostream& os, const Trajectory<R3>& tr);
void write_trajectory_csv(std::ostream& os, const Trajectory<S3>& tr);

// ---- limit sets ------------------------------------------------------------------

enum class AmbientSystem { R3, S3 };

struct LimitSample {
  double t = 0;
  double s = 0;
  double dist_plus = 0;   // S_0 (R^3) or S^1_+ (S^3)
  double dist_minus = 0;  // R_0 (R^3) or S^1_- (S^3)
};
struct LimitReport {
  std::vector<LimitSample> forward, backward;
  std::vector<double> block_ends;  // sample blocks [block_ends[i-1], block_ends[i])
  std::string forward_verdict, backward_verdict;  // "+", "-", "bounded"
  std::vector<double> forward_block_dist, backward_block_dist;  // worst distance per block
};

double dist_to_S0(const R3& p);
double dist_to_R0(const R3& p);
double dist_to_S1plus(const S3& p);
double dist_to_S1minus(const S3& p);

// samples at integer times n (and n / alpha on R^3, for R_0) in blocks between consecutive
// entries of `blocks` (default: powers of 2 up to the horizon), at most per_block per block.
// Needs a cocycle psi. Inconclusive if the fiber coordinate shows no trend.
LimitReport classify_limit_set(AmbientSystem sys, const Rational& omega, const Rational& theta, double s,
                               const DrivingFunction& psi, long horizon, std::vector<BigInt> blocks = {},
                               long per_block = 256);

// ---- Hoelder lifts ---------------------------------------------------------------

struct Lift1D {
  std::function<double(double)> f;
  double gamma = 1, constant = 0;  // 2(||f|| + M)
  std::complex<double> operator()(std::complex<double> z) const;
};
Lift1D holder_lift_1d(std::function<double(double)> f, double gamma, double M, double sup_f);

struct Lift2D {
  std::function<double(double, double)> psi;
  double gamma = 1, constant = 0;  // 4(C + M)
  std::complex<double> operator()(std::complex<double> z1, std::complex<double> z2) const;
};
Lift2D holder_lift_2d(std::function<double(double, double)> psi, double gamma, double M, double C);

struct LiftAudit {
  double worst = 0;  // max sampled ratio
  double constant = 0;
  bool ok = false;
};
LiftAudit audit_lift(const Lift1D& L, long samples, std::uint64_t seed);
LiftAudit audit_lift(const Lift2D& L, long samples, std::uint64_t seed);

}  // namespace besi
