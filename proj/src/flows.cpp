#include "besi/flows.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <cstdint>
#include <iomanip>

namespace besi {

namespace {

constexpr long double kTwoPiL = 6.283185307179586476925286766559005768L;
constexpr double kTwoPi = 6.283185307179586476925286766559005768;
constexpr double kPi = 3.141592653589793238462643383279502884;

double wrap(double x) {
  double f = x - std::floor(x);
  return f >= 1 ? 0 : f;
}

Rational canon(Rational r) {
  r.canonicalize();
  return r;
}

}  // namespace

// ---- bump ------------------------------------------------------------------------

double Bump::operator()(double z) const {
  double e = eta.get_d();
  if (z <= e || z >= 1 - e) return 0;
  double w = 1 - 2 * e;
  double t = (z - e) / w;
  double g = t * (1 - t);
  return 140 * g * g * g / w;
}

double Bump::antiderivative(double z) const {
  double e = eta.get_d();
  if (z <= e) return 0;
  if (z >= 1 - e) return 1;
  double t = (z - e) / (1 - 2 * e);
  double t4 = t * t * t * t;
  return t4 * (35 + t * (-84 + t * (70 - 20 * t)));
}

Rational Bump::antiderivative(const Rational& z) const {
  if (z <= eta) return 0;
  if (z >= 1 - eta) return 1;
  Rational t = canon((z - eta) / (1 - 2 * eta));
  Rational t4 = t * t * t * t;
  return canon(t4 * (35 + t * (-84 + t * (70 - 20 * t))));
}

double Bump::sup() const { return 140.0 / 64.0 / (1 - 2 * eta.get_d()) * (1 + 1e-12); }

double Bump::lip() const {
  // max of 3 t^2 (1-t)^2 (1-2t) at t = (3 - sqrt 3) / 6
  double t = (3 - std::sqrt(3.0)) / 6;
  double g = 3 * t * t * (1 - t) * (1 - t) * (1 - 2 * t);
  double w = 1 - 2 * eta.get_d();
  return 140 * g / (w * w) * (1 + 1e-9);
}

// ---- driving function ------------------------------------------------------------

struct FastPhi {
  struct Level {
    std::uint64_t q = 0;
    long double qa = 0;  // frac(q alpha), from the exact approximation
    std::vector<long double> knots, slopes, offsets;
    long double coef = 0;  // cosine
  };
  bool cosine = false;
  bool exact_only = false;  // some q above 2^64: evaluate through the rational path
  std::vector<Level> levels;
};

namespace {

// frac(q x) for a double x in [0,1), exact up to the final rounding
long double frac_qx(std::uint64_t q, double x) {
  if (x == 0) return 0;
  int e = 0;
  double m = std::frexp(x, &e);
  auto M = static_cast<std::uint64_t>(std::ldexp(m, 53));
  unsigned __int128 P = static_cast<unsigned __int128>(M) * q;
  int sh = 53 - e;
  if (sh >= 128) return std::ldexp(static_cast<long double>(P), -sh);
  unsigned __int128 low = P & ((static_cast<unsigned __int128>(1) << sh) - 1);
  return std::ldexp(static_cast<long double>(low), -sh);
}

long double level_value(const FastPhi& fp, const FastPhi::Level& lv, long double u) {
  if (fp.cosine) return lv.coef * (1 - std::cos(kTwoPiL * u));
  auto it = std::upper_bound(lv.knots.begin(), lv.knots.end(), u);
  size_t i = static_cast<size_t>(it - lv.knots.begin());
  i = i == 0 ? 0 : i - 1;
  if (i + 1 >= lv.knots.size()) i = lv.knots.size() - 2;
  return lv.slopes[i] * u + lv.offsets[i];
}

}  // namespace

// phi(x) = sum_n f_n(x + alpha) - f_n(x), level by level in the period variable u = q x
double DrivingFunction::phi(double x) const {
  if (!fast) throw Error(ErrorCode::ConfigError, "phi: driving function has no cocycle");
  double xr = x - std::floor(x);
  if (xr >= 1) xr = 0;
  if (fast->exact_only) return eval_phi(*fam, rational_from_double(xr)).center.get_d();
  long double s = 0;
  for (const auto& lv : fast->levels) {
    long double u = frac_qx(lv.q, xr);
    long double v = u + lv.qa;
    if (v >= 1) v -= 1;
    s += level_value(*fast, lv, v) - level_value(*fast, lv, u);
  }
  return static_cast<double>(s);
}

double DrivingFunction::operator()(double omega, double theta) const {
  if (!fam) return callable(omega, theta);
  double th = wrap(theta);
  double b = bump(th);
  if (b == 0) return 0;
  return phi(omega - th * alpha) * b;
}

DrivingFunction psi_from_phi(const CocycleFamily& fam, const Rational& eta) {
  if (!(sgn(eta) > 0 && eta < Rational(1, 2))) throw Error(ErrorCode::ConfigError, "bump margin must lie in (0, 1/2)");
  DrivingFunction d;
  d.fam = std::make_shared<CocycleFamily>(fam);
  d.bump.eta = eta;
  d.alpha_q = fam.approx.value;
  d.alpha = d.alpha_q.get_d();
  auto f = std::make_shared<FastPhi>();
  auto start = [&](const BigInt& q) {
    FastPhi::Level lv;
    if (!q.fits_ulong_p() || sizeof(unsigned long) < 8) {
      f->exact_only = true;
      return lv;
    }
    lv.q = q.get_ui();
    double hi = frac(Rational(q * d.alpha_q)).get_d();
    lv.qa = hi;
    Rational r = frac(Rational(q * d.alpha_q)) - Rational(hi);
    lv.qa += static_cast<long double>(r.get_d());
    return lv;
  };
  if (fam.kind == CocycleKind::Cosine) {
    f->cosine = true;
    for (const auto& c : fam.cos) {
      FastPhi::Level lv = start(c.q);
      Interval coef = Interval::of(c.q_next) / Interval::of(c.q).pow(Interval::of(c.beta));
      lv.coef = coef.mid_d();
      f->levels.push_back(lv);
    }
  } else {
    for (const auto& p : fam.pl) {
      FastPhi::Level lv = start(p.q);
      for (const auto& k : p.knots) lv.knots.push_back(k.get_d());
      for (const auto& s : p.slopes) lv.slopes.push_back(s.get_d());
      for (const auto& o : p.offsets) lv.offsets.push_back(o.get_d());
      f->levels.push_back(lv);
    }
  }
  d.fast = f;
  return d;
}

DrivingFunction psi_callable(std::function<double(double, double)> f, double alpha) {
  DrivingFunction d;
  d.callable = std::move(f);
  d.alpha = alpha;
  d.alpha_q = rational_from_double(alpha);
  return d;
}

void set_holder(DrivingFunction& psi, double gamma, double M_phi, double sup_phi) {
  if (!psi.fam) throw Error(ErrorCode::ConfigError, "set_holder needs a cocycle driving function");
  if (!(psi.alpha > 0 && psi.alpha < 1)) throw Error(ErrorCode::ConfigError, "set_holder: alpha outside (0,1)");
  psi.has_holder = true;
  psi.gamma = gamma;
  psi.M = psi.bump.sup() * M_phi + sup_phi * psi.bump.lip();
  psi.C = psi.bump.sup() * sup_phi;
}

namespace {

struct GaussRule {
  std::vector<long double> x, w;  // on [0,1]
};

const GaussRule& gauss64() {
  static const GaussRule rule = [] {
    const int n = 64;
    GaussRule g;
    for (int i = 1; i <= n; ++i) {
      long double z = std::cos(3.14159265358979323846264338327950288L * (i - 0.25L) / (n + 0.5L));
      long double dp = 0;
      for (int it = 0; it < 100; ++it) {
        long double p0 = 1, p1 = z;
        for (int k = 2; k <= n; ++k) {
          long double p2 = ((2 * k - 1) * z * p1 - (k - 1) * p0) / k;
          p0 = p1;
          p1 = p2;
        }
        dp = n * (z * p1 - p0) / (z * z - 1);
        long double dz = p1 / dp;
        z -= dz;
        if (std::fabs(dz) < 1e-19L) break;
      }
      g.x.push_back((1 - z) / 2);
      g.w.push_back(1 / ((1 - z * z) * dp * dp));
    }
    return g;
  }();
  return rule;
}

// adaptive Simpson on [a, b]
double simpson(const std::function<double(double)>& g, double a, double b, double fa, double fm, double fb,
               double whole, double tol, int depth) {
  double m = (a + b) / 2, lm = (a + m) / 2, rm = (m + b) / 2;
  double flm = g(lm), frm = g(rm);
  double left = (m - a) / 6 * (fa + 4 * flm + fm);
  double right = (b - m) / 6 * (fm + 4 * frm + fb);
  double delta = left + right - whole;
  if (std::fabs(delta) <= 15 * tol) return left + right + delta / 15;
  if (depth <= 0) throw Error(ErrorCode::QuadratureStalled, "adaptive quadrature did not reach the tolerance");
  return simpson(g, a, m, fa, flm, fm, left, tol / 2, depth - 1) +
         simpson(g, m, b, fm, frm, fb, right, tol / 2, depth - 1);
}

double integrate(const std::function<double(double)>& g, double a, double b, double tol) {
  if (a == b) return 0;
  double fa = g(a), fb = g(b), fm = g((a + b) / 2);
  double whole = (b - a) / 6 * (fa + 4 * fm + fb);
  return simpson(g, a, b, fa, fm, fb, whole, tol, 40);
}

}  // namespace

double reconstruct_phi(const DrivingFunction& psi, double omega) {
  const GaussRule& g = gauss64();
  long double s = 0;
  for (size_t i = 0; i < g.x.size(); ++i) {
    double tau = static_cast<double>(g.x[i]);
    s += g.w[i] * psi(omega + tau * psi.alpha, tau);
  }
  return static_cast<double>(s);
}

CertifiedValue fiber_increment(const DrivingFunction& psi, const Rational& omega, const Rational& theta,
                               const Rational& t) {
  if (!psi.fam) throw Error(ErrorCode::ConfigError, "fiber_increment needs a cocycle driving function");
  const CocycleFamily& fam = *psi.fam;
  // int_0^t psi = phi^(M)(x0) - phi(x0) B(theta0) + phi(x0 + M alpha) B(f), theta0 + t = M + f
  Rational th0 = frac(theta);
  Rational x0 = frac(Rational(omega - th0 * psi.alpha_q));
  Rational z = th0 + t;
  BigInt M = floor_q(z);
  Rational f = z - M;
  Rational B0 = psi.bump.antiderivative(th0), Bf = psi.bump.antiderivative(f);
  CertifiedValue out = birkhoff(fam, x0, M);
  if (sgn(B0) != 0) {
    CertifiedValue e0 = eval_phi(fam, x0);
    out.center -= B0 * e0.center;
    out.radius += B0 * e0.radius;
    out.tail_lo += B0 * e0.tail_hi;
    out.tail_hi += B0 * e0.tail_lo;
  }
  if (sgn(Bf) != 0) {
    Rational y = frac(Rational(x0 + M * psi.alpha_q));
    CertifiedValue e1 = eval_phi(fam, y);
    out.center += Bf * e1.center;
    out.radius += Bf * (e1.radius + fam.lip_total * abs(M) * fam.approx.radius);
    out.tail_lo += Bf * e1.tail_lo;
    out.tail_hi += Bf * e1.tail_hi;
  }
  out.center.canonicalize();
  out.radius.canonicalize();
  return out;
}

FlowValue exact_flow(const ToralState& st, double t, const DrivingFunction& psi, double tol) {
  FlowValue out;
  out.state.omega = wrap(st.omega + t * psi.alpha);
  out.state.theta = wrap(st.theta + t);
  if (t == 0) {
    out.state = st;
    return out;
  }
  if (psi.fam) {
    CertifiedValue c = fiber_increment(psi, rational_from_double(st.omega), rational_from_double(st.theta),
                                       rational_from_double(t));
    double v = c.center.get_d();
    out.state.s = st.s + v;
    out.radius = c.radius.get_d() + 4e-16 * (std::fabs(v) + std::fabs(st.s));
    return out;
  }
  // split at the integer crossings of theta + tau
  double a = std::min(0.0, t), b = std::max(0.0, t);
  std::function<double(double)> g = [&](double tau) { return psi(st.omega + tau * psi.alpha, st.theta + tau); };
  double sum = 0;
  double lo = a;
  long pieces = static_cast<long>(std::ceil(b - a)) + 2;
  double per = tol / static_cast<double>(pieces);
  while (lo < b) {
    double next = std::floor(st.theta + lo) + 1 - st.theta;
    if (next <= lo) next = lo + 1;
    double hi = std::min(b, next);
    sum += integrate(g, lo, hi, per);
    lo = hi;
  }
  out.state.s = st.s + (t >= 0 ? sum : -sum);
  out.radius = tol;
  return out;
}

// ---- coordinate changes ----------------------------------------------------------

R3 toral_to_r3(const ToralState& st) {
  double E = std::exp(-std::exp(st.s));
  double c = std::cos(kTwoPi * st.omega), sn = std::sin(kTwoPi * st.omega);
  double den = E * E - 2 * E * c + 1;
  double rho = -std::expm1(-2 * std::exp(st.s)) / den;
  return {rho * std::cos(kTwoPi * st.theta), rho * std::sin(kTwoPi * st.theta), -2 * E * sn / den};
}

ToralState r3_to_toral(const R3& p) {
  double r2 = p[0] * p[0] + p[1] * p[1];
  double r = std::sqrt(r2), z = p[2];
  if (r2 == 0) throw Error(ErrorCode::OnSingularSet, "point on R_0");
  double d2 = (r - 1) * (r - 1) + z * z;
  if (d2 == 0) throw Error(ErrorCode::OnSingularSet, "point on S_0");
  ToralState st;
  st.omega = wrap(std::atan2(-2 * z, r2 + z * z - 1) / kTwoPi);
  st.theta = wrap(std::atan2(p[1], p[0]) / kTwoPi);
  double u = 0.5 * std::log1p(4 * r / d2);
  st.s = std::log(u);
  return st;
}

S3 toral_to_s3(const ToralState& st) {
  // cos arctan e^s = 1 / sqrt(1 + e^{2s}), sin arctan e^s = 1 / sqrt(1 + e^{-2s})
  double c = 1 / std::sqrt(1 + std::exp(2 * st.s));
  double s = 1 / std::sqrt(1 + std::exp(-2 * st.s));
  return {std::polar(c, kTwoPi * st.omega), std::polar(s, kTwoPi * st.theta)};
}

ToralState s3_to_toral(const S3& p) {
  double a1 = std::abs(p[0]), a2 = std::abs(p[1]);
  if (a1 == 0) throw Error(ErrorCode::OnSingularSet, "point on S^1_+");
  if (a2 == 0) throw Error(ErrorCode::OnSingularSet, "point on S^1_-");
  ToralState st;
  st.omega = wrap(std::arg(p[0]) / kTwoPi);
  st.theta = wrap(std::arg(p[1]) / kTwoPi);
  st.s = std::log(a2) - std::log(a1);
  return st;
}

// ---- vector fields ---------------------------------------------------------------

R3 rhs_r3(const R3& p, const DrivingFunction& psi) {
  double x = p[0], y = p[1], z = p[2];
  double r2 = x * x + y * y, r = std::sqrt(r2);
  double A = 1 - r2 + z * z;
  double al = psi.alpha;
  R3 d{-kTwoPi * y + kTwoPi * al * x * z, kTwoPi * x + kTwoPi * al * y * z, kPi * al * A};
  bool near_r0 = r2 < kGuardR0;
  bool near_s0 = std::fabs(r - 1) < kGuardS0 && std::fabs(z) < kGuardS0;
  if (near_r0 || near_s0) return d;
  double d2 = (r - 1) * (r - 1) + z * z;
  double u = 0.5 * std::log1p(4 * r / d2);
  double omega = wrap(std::atan2(-2 * z, r2 + z * z - 1) / kTwoPi);
  double theta = wrap(std::atan2(y, x) / kTwoPi);
  double F = u * psi(omega, theta);
  if (F == 0) return d;
  d[0] += A * x / (2 * r) * F;
  d[1] += A * y / (2 * r) * F;
  d[2] -= z * r * F;
  return d;
}

S3 rhs_s3(const S3& p, const DrivingFunction& psi) {
  const auto& z1 = p[0];
  const auto& z2 = p[1];
  const std::complex<double> I(0, 1);
  double a = kTwoPi * psi.alpha, b = kTwoPi;
  std::complex<double> F = 0;
  if (z1 != 0.0 && z2 != 0.0) {
    double omega = wrap(std::arg(z1) / kTwoPi), theta = wrap(std::arg(z2) / kTwoPi);
    F = z1 * z2 * psi(omega, theta);
  }
  return {I * a * z1 - F * std::conj(z2), I * b * z2 + F * std::conj(z1)};
}

double first_integral_r3(const R3& p) {
  double r = std::hypot(p[0], p[1]), z = p[2];
  return std::log1p(4 * r / ((r - 1) * (r - 1) + z * z));
}

namespace {

R3 axpy(const R3& x, double h, const R3& k) { return {x[0] + h * k[0], x[1] + h * k[1], x[2] + h * k[2]}; }
S3 axpy(const S3& x, double h, const S3& k) { return {x[0] + h * k[0], x[1] + h * k[1]}; }

template <class State, class Rhs>
State rk4_step(const State& x, double h, Rhs f) {
  State k1 = f(x);
  State k2 = f(axpy(x, h / 2, k1));
  State k3 = f(axpy(x, h / 2, k2));
  State k4 = f(axpy(x, h, k3));
  State out = x;
  for (size_t i = 0; i < x.size(); ++i) out[i] = x[i] + h / 6 * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]);
  return out;
}

long step_count(double t_end, double h) {
  if (!(h > 0)) throw Error(ErrorCode::ConfigError, "step must be positive");
  double n = std::fabs(t_end) / h;
  long steps = std::lround(n);
  if (std::fabs(n - static_cast<double>(steps)) > 1e-9 * std::max(1.0, n))
    throw Error(ErrorCode::ConfigError, "t_end must be a multiple of the step");
  return steps;
}

}  // namespace

Trajectory<R3> integrate_r3(const R3& x0, double t_end, double h, const DrivingFunction& psi, long stride) {
  long steps = step_count(t_end, h);
  double hs = t_end >= 0 ? h : -h;
  Trajectory<R3> tr;
  R3 x = x0;
  double I0 = first_integral_r3(x0);
  tr.t.push_back(0);
  tr.x.push_back(x);
  auto f = [&](const R3& p) { return rhs_r3(p, psi); };
  for (long i = 1; i <= steps; ++i) {
    x = rk4_step(x, hs, f);
    if (!(std::isfinite(x[0]) && std::isfinite(x[1]) && std::isfinite(x[2])) || std::fabs(x[2]) > 1e8)
      throw Error(ErrorCode::SingularityApproach, "trajectory escapes along R_0 at t = " + std::to_string(i * hs));
    if (std::isfinite(I0) && I0 != 0) tr.max_drift = std::max(tr.max_drift, std::fabs(first_integral_r3(x) - I0) / std::fabs(I0));
    if (i % stride == 0 || i == steps) {
      tr.t.push_back(i * hs);
      tr.x.push_back(x);
    }
  }
  return tr;
}

Trajectory<S3> integrate_s3(const S3& z0, double t_end, double h, const DrivingFunction& psi, long stride,
                            bool renormalize) {
  long steps = step_count(t_end, h);
  double hs = t_end >= 0 ? h : -h;
  Trajectory<S3> tr;
  S3 x = z0;
  tr.t.push_back(0);
  tr.x.push_back(x);
  auto f = [&](const S3& p) { return rhs_s3(p, psi); };
  for (long i = 1; i <= steps; ++i) {
    x = rk4_step(x, hs, f);
    double n2 = std::norm(x[0]) + std::norm(x[1]);
    tr.max_drift = std::max(tr.max_drift, std::fabs(n2 - 1));
    if (renormalize) {
      double k = 1 / std::sqrt(n2);
      x[0] *= k;
      x[1] *= k;
    }
    if (i % stride == 0 || i == steps) {
      tr.t.push_back(i * hs);
      tr.x.push_back(x);
    }
  }
  return tr;
}

double dist_to_S0(const R3& p) { return std::hypot(std::hypot(p[0], p[1]) - 1, p[2]); }
double dist_to_R0(const R3& p) { return std::hypot(p[0], p[1]); }
double dist_to_S1plus(const S3& p) { return std::hypot(std::abs(p[0]), 1 - std::abs(p[1])); }
double dist_to_S1minus(const S3& p) { return std::hypot(std::abs(p[1]), 1 - std::abs(p[0])); }

void write_trajectory_csv(std::ostream& os, const Trajectory<R3>& tr) {
  os << "t,x,y,z,s,omega,theta,dist_to_S0,dist_to_R0\n" << std::setprecision(17);
  for (size_t i = 0; i < tr.t.size(); ++i) {
    const R3& p = tr.x[i];
    os << tr.t[i] << ',' << p[0] << ',' << p[1] << ',' << p[2] << ',';
    try {
      ToralState st = r3_to_toral(p);
      os << st.s << ',' << st.omega << ',' << st.theta;
    } catch (const Error&) {
      os << "nan,nan,nan";
    }
    os << ',' << dist_to_S0(p) << ',' << dist_to_R0(p) << '\n';
  }
}

void write_trajectory_csv(std::ostream& os, const Trajectory<S3>& tr) {
  os << "t,re_z1,im_z1,re_z2,im_z2,s,omega,theta,dist_to_S1plus,dist_to_S1minus\n" << std::setprecision(17);
  for (size_t i = 0; i < tr.t.size(); ++i) {
    const S3& p = tr.x[i];
    os << tr.t[i] << ',' << p[0].real() << ',' << p[0].imag() << ',' << p[1].real() << ',' << p[1].imag() << ',';
    try {
      ToralState st = s3_to_toral(p);
      os << st.s << ',' << st.omega << ',' << st.theta;
    } catch (const Error&) {
      os << "nan,nan,nan";
    }
    os << ',' << dist_to_S1plus(p) << ',' << dist_to_S1minus(p) << '\n';
  }
}

// ---- limit sets ------------------------------------------------------------------

namespace {

// evenly spread sample points of [lo, hi), at most k of them, ends included
std::vector<BigInt> block_points(const BigInt& lo, const BigInt& hi, long k) {
  std::vector<BigInt> out;
  BigInt span = hi - lo;
  if (span <= 0) return out;
  if (span <= k) {
    for (BigInt n = lo; n < hi; ++n) out.push_back(n);
    return out;
  }
  for (long i = 0; i < k; ++i) out.push_back(BigInt(lo + span * i / (k - 1) - (i == k - 1 ? 1 : 0)));
  return out;
}

struct Series {
  std::vector<LimitSample> samples;
  std::vector<double> smin, smax, dplus, dminus;
};

std::string trend(const Series& s) {
  size_t B = s.smin.size();
  if (B < 2) throw Error(ErrorCode::Inconclusive, "need at least two sample blocks");
  bool up = true, down = true;
  for (size_t i = 1; i < B; ++i) {
    up = up && s.smin[i] > s.smin[i - 1];
    down = down && s.smax[i] < s.smax[i - 1];
  }
  if (up) return "+";
  if (down) return "-";
  double lo = *std::min_element(s.smin.begin(), s.smin.end());
  double hi = *std::max_element(s.smax.begin(), s.smax.end());
  if (hi - lo <= 2 * (s.smax[0] - s.smin[0]) + 1e-12) return "bounded";
  throw Error(ErrorCode::Inconclusive, "fiber coordinate shows no monotone trend over the horizon");
}

}  // namespace

LimitReport classify_limit_set(AmbientSystem sys, const Rational& omega, const Rational& theta, double s,
                               const DrivingFunction& psi, long horizon, std::vector<BigInt> blocks,
                               long per_block) {
  if (!psi.fam) throw Error(ErrorCode::ConfigError, "classify_limit_set needs a cocycle driving function");
  if (blocks.empty()) {
    if (horizon < 4) throw Error(ErrorCode::ConfigError, "horizon too short");
    for (long b = 1; b <= horizon; b *= 2) blocks.push_back(BigInt(b));
  }
  LimitReport rep;
  for (const auto& b : blocks) rep.block_ends.push_back(b.get_d());
  const Rational al = psi.alpha_q;

  for (int dir : {1, -1}) {
    // integer times for S_0 and S^1; n / alpha for R_0
    Series plus, minus;
    for (size_t bi = 1; bi < blocks.size(); ++bi) {
      double lo_p = 1e300, hi_p = -1e300, lo_m = 1e300, hi_m = -1e300, dp = 0, dm = 0;
      for (const BigInt& k : block_points(blocks[bi - 1], blocks[bi], per_block)) {
        Rational t = Rational(k) * dir;
        CertifiedValue inc = fiber_increment(psi, omega, theta, t);
        ToralState st{wrap(Rational(omega + t * al).get_d()), wrap(Rational(theta + t).get_d()), s + inc.center.get_d()};
        LimitSample smp{t.get_d(), st.s, 0, 0};
        if (sys == AmbientSystem::S3) {
          S3 p = toral_to_s3(st);
          smp.dist_plus = dist_to_S1plus(p);
          smp.dist_minus = dist_to_S1minus(p);
        } else {
          R3 p = toral_to_r3(st);
          smp.dist_plus = dist_to_S0(p);
          smp.dist_minus = dist_to_R0(p);
        }
        lo_p = std::min(lo_p, smp.s);
        hi_p = std::max(hi_p, smp.s);
        dp = std::max(dp, smp.dist_plus);
        if (sys == AmbientSystem::S3) {
          dm = std::max(dm, smp.dist_minus);
        } else {
          // t' = n / alpha with n = round(k alpha)
          BigInt n = floor_q(Rational(Rational(k) * al + Rational(1, 2)));
          if (n == 0) n = 1;
          Rational t2 = canon(Rational(n) / al) * dir;
          CertifiedValue inc2 = fiber_increment(psi, omega, theta, t2);
          ToralState st2{wrap(Rational(omega + t2 * al).get_d()), wrap(Rational(theta + t2).get_d()), s + inc2.center.get_d()};
          R3 p2 = toral_to_r3(st2);
          lo_m = std::min(lo_m, st2.s);
          hi_m = std::max(hi_m, st2.s);
          dm = std::max(dm, dist_to_R0(p2));
        }
        (dir > 0 ? rep.forward : rep.backward).push_back(smp);
      }
      plus.smin.push_back(lo_p);
      plus.smax.push_back(hi_p);
      plus.dplus.push_back(dp);
      plus.dminus.push_back(dm);
      if (sys == AmbientSystem::R3) {
        minus.smin.push_back(lo_m);
        minus.smax.push_back(hi_m);
      }
    }
    std::string v = trend(plus);
    if (sys == AmbientSystem::R3 && v == "-" && trend(minus) != "-")
      throw Error(ErrorCode::Inconclusive, "samples at multiples of 1/alpha disagree");
    const std::vector<double>& dist = v == "-" ? plus.dminus : plus.dplus;
    if (v != "bounded")
      for (size_t i = 1; i < dist.size(); ++i)
        if (dist[i] > dist[i - 1] + 4 * std::numeric_limits<double>::epsilon())  // saturated distances jitter by an ulp
          throw Error(ErrorCode::Inconclusive, "distance to the candidate set is not monotone across blocks");
    if (dir > 0) {
      rep.forward_verdict = v;
      rep.forward_block_dist = dist;
    } else {
      rep.backward_verdict = v;
      rep.backward_block_dist = dist;
    }
  }
  return rep;
}

// ---- Hoelder lifts ---------------------------------------------------------------

std::complex<double> Lift1D::operator()(std::complex<double> z) const {
  if (z == 0.0) return 0;
  return z * f(wrap(std::arg(z) / kTwoPi));
}

Lift1D holder_lift_1d(std::function<double(double)> f, double gamma, double M, double sup_f) {
  Lift1D L;
  L.f = std::move(f);
  L.gamma = gamma;
  L.constant = 2 * (sup_f + M);
  return L;
}

std::complex<double> Lift2D::operator()(std::complex<double> z1, std::complex<double> z2) const {
  if (z1 == 0.0 || z2 == 0.0) return 0;
  return z1 * z2 * psi(wrap(std::arg(z1) / kTwoPi), wrap(std::arg(z2) / kTwoPi));
}

Lift2D holder_lift_2d(std::function<double(double, double)> psi, double gamma, double M, double C) {
  Lift2D L;
  L.psi = std::move(psi);
  L.gamma = gamma;
  L.constant = 4 * (C + M);
  return L;
}

namespace {

std::complex<double> disk_point(std::mt19937_64& rng) {
  std::uniform_real_distribution<double> u(0, 1);
  return std::polar(std::sqrt(u(rng)), kTwoPi * u(rng));
}

// a second point: far (uniform) or near (scale 10^{-U[0,8]})
std::complex<double> partner(std::complex<double> z, std::mt19937_64& rng, bool near) {
  if (!near) return disk_point(rng);
  std::uniform_real_distribution<double> u(0, 1);
  std::complex<double> w = z + std::polar(std::pow(10.0, -8 * u(rng)), kTwoPi * u(rng));
  if (std::abs(w) > 1) w /= std::abs(w);
  return w;
}

}  // namespace

LiftAudit audit_lift(const Lift1D& L, long samples, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  LiftAudit a;
  a.constant = L.constant;
  for (long i = 0; i < samples; ++i) {
    auto z = disk_point(rng);
    auto w = partner(z, rng, i % 2 == 1);
    double d = std::abs(z - w);
    if (d == 0) continue;
    a.worst = std::max(a.worst, std::abs(L(z) - L(w)) / std::pow(d, L.gamma));
  }
  a.ok = a.worst <= a.constant;
  return a;
}

LiftAudit audit_lift(const Lift2D& L, long samples, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  LiftAudit a;
  a.constant = L.constant;
  for (long i = 0; i < samples; ++i) {
    auto z1 = disk_point(rng), z2 = disk_point(rng);
    auto w1 = partner(z1, rng, i % 2 == 1), w2 = partner(z2, rng, i % 4 == 1);
    double d = std::abs(z1 - w1) + std::abs(z2 - w2);
    if (d == 0) continue;
    a.worst = std::max(a.worst, std::abs(L(z1, z2) - L(w1, w2)) / std::pow(d, L.gamma));
  }
  a.ok = a.worst <= a.constant;
  return a;
}

}  // namespace besi
