// besi: command-line driver for the alpha -> cocycle -> cantor -> flow pipeline
#include "besi/cantor.hpp"
#include "besi/checks.hpp"
#include "besi/cocycles.hpp"
#include "besi/diophantine.hpp"
#include "besi/flows.hpp"

#include <CLI11.hpp>
#include <json.hpp>

#include <algorithm>
#include <charconv>
#include <cmath>
#include <ctime>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <optional>
#include <random>
#include <sstream>

namespace fs = std::filesystem;
using json = nlohmann::json;
using namespace besi;

namespace {

constexpr const char* kVersion = "1.0.0";

enum Exit { kOk = 0, kVerifyFail = 1, kConfigError = 2, kNumericError = 3 };

[[noreturn]] void config_error(const std::string& msg) { throw Error(ErrorCode::ConfigError, msg); }

std::string num(double x) {
  if (std::isnan(x)) return "nan";
  if (std::isinf(x)) return x > 0 ? "inf" : "-inf";
  char buf[64];
  auto res = std::to_chars(buf, buf + sizeof buf, x);
  return std::string(buf, res.ptr);
}

std::string q(const Rational& r) { return to_string(r); }

Rational jrat(const json& v, const char* what) {
  if (v.is_string()) {
    try {
      return parse_rational(v.get<std::string>());
    } catch (const std::exception&) {
      config_error(std::string("bad rational for ") + what + ": " + v.get<std::string>());
    }
  }
  if (v.is_number_integer()) return Rational(v.get<long>());
  if (v.is_number_float()) return parse_rational(num(v.get<double>()));
  config_error(std::string("expected a number or \"p/q\" string for ") + what);
}

BigInt jint(const json& v, const char* what) {
  if (v.is_number_integer()) return BigInt(v.get<long>());
  if (v.is_string()) {
    try {
      return BigInt(v.get<std::string>());
    } catch (const std::exception&) {
    }
  }
  config_error(std::string("expected an integer for ") + what);
}

double jdouble(const json& v, const char* what) {
  if (v.is_number()) return v.get<double>();
  return jrat(v, what).get_d();
}

const json& section(const json& cfg, const char* name) {
  static const json empty = json::object();
  if (!cfg.contains(name)) return empty;
  if (!cfg[name].is_object()) config_error(std::string(name) + " must be an object");
  return cfg[name];
}

template <class T>
T get(const json& j, const char* key, T dflt) {
  if (!j.contains(key)) return dflt;
  try {
    return j[key].get<T>();
  } catch (const json::exception&) {
    config_error(std::string("bad value for ") + key);
  }
}

// FNV-1a over the canonical dump (keys are sorted)
std::string config_hash(const json& cfg) {
  std::uint64_t h = 1469598103934665603ull;
  for (unsigned char c : cfg.dump()) {
    h ^= c;
    h *= 1099511628211ull;
  }
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

// ---- pipeline objects ------------------------------------------------------------

ContinuedFraction build_alpha(const json& cfg) {
  const json& a = section(cfg, "alpha");
  std::string kind = get<std::string>(a, "kind", "golden");
  if (kind == "golden") return ContinuedFraction::golden();
  if (kind == "sqrt2m1") return ContinuedFraction::sqrt2_minus_1();
  if (kind == "quotients") {
    if (!a.contains("quotients") || !a["quotients"].is_array() || a["quotients"].empty())
      config_error("alpha.quotients must be a non-empty array");
    std::vector<BigInt> qs;
    for (const auto& v : a["quotients"]) {
      qs.push_back(jint(v, "alpha.quotients"));
      if (qs.back() < 1) config_error("partial quotients must be >= 1");
    }
    return get<bool>(a, "periodic", true) ? ContinuedFraction::repeat_last(qs) : ContinuedFraction::prefix(qs);
  }
  if (kind == "growth")
    return construct_alpha_with_growth(jrat(a.value("e", json(2)), "alpha.e"), jrat(a.value("C", json(8)), "alpha.C"),
                                       jint(a.value("seed", json(4)), "alpha.seed"), get<int>(a, "levels", 8),
                                       get<std::string>(a, "choices", ""));
  if (kind == "log_tower")
    return construct_log_tower(jint(a.value("seed", json(2)), "alpha.seed"), get<int>(a, "levels", 3),
                               jrat(a.value("margin", json("1/10")), "alpha.margin"),
                               jint(a.value("pad", json(1)), "alpha.pad"));
  config_error("unknown alpha.kind: " + kind);
}

std::vector<Rational> rat_list(const json& j, const char* key) {
  std::vector<Rational> out;
  if (!j.contains(key)) return out;
  if (!j[key].is_array()) config_error(std::string(key) + " must be an array");
  for (const auto& v : j[key]) out.push_back(jrat(v, key));
  return out;
}

Parity parse_parity(const std::string& s) {
  if (s == "even") return Parity::Even;
  if (s == "odd") return Parity::Odd;
  config_error("parity must be even or odd");
}

CocycleFamily build_cocycle(const json& cfg, const ContinuedFraction& cf) {
  const json& c = section(cfg, "cocycle");
  std::string fam = get<std::string>(c, "family", "tent_linear");
  int depth = get<int>(c, "depth", 4);
  if (depth < 1) config_error("cocycle.depth must be >= 1");
  if (fam == "tent_linear") return tent_linear(cf, depth);
  if (fam == "tent_custom") return tent_custom(cf, rat_list(c, "M"));
  if (fam == "tent_holder") return tent_holder(cf, jrat(c.value("gamma", json("3/20")), "cocycle.gamma"), depth);
  if (fam == "trapezoid") {
    if (get<std::string>(c, "rule", "custom") == "log")
      return trapezoid_logrule(cf, jrat(c.value("eps", json("1/2")), "cocycle.eps"), depth);
    return trapezoid(cf, rat_list(c, "M"));
  }
  if (fam == "eightpiece") {
    std::vector<long> ks;
    long k0 = get<long>(c, "k0", 0);
    if (c.contains("ks")) {
      ks = get<std::vector<long>>(c, "ks", {});
    } else {
      const json& s = section(c, "subsequence");
      std::string rule = get<std::string>(s, "rule", "separated");
      SubsequenceRule r = rule == "growth"      ? SubsequenceRule::Growth
                          : rule == "separated" ? SubsequenceRule::Separated
                                                : (config_error("unknown subsequence rule: " + rule), SubsequenceRule::Separated);
      ks = select_subsequence(cf, parse_parity(get<std::string>(s, "parity", "even")), r, depth, k0,
                              jrat(s.value("gamma", json(0)), "subsequence.gamma"),
                              jrat(s.value("C", json(0)), "subsequence.C"))
               .ks;
    }
    return eightpiece(cf, ks, k0, rat_list(c, "M"));
  }
  if (fam == "cosine")
    return cosine(cf, jrat(c.value("a", json("4/3")), "cocycle.a"), get<int>(c, "d", 1),
                  jrat(c.value("eps", json("1/10")), "cocycle.eps"), depth);
  config_error("unknown cocycle.family: " + fam);
}

bool orbit_type(const std::string& t) { return t == "++" || t == "-+" || t == "--" || t == "+-"; }

struct CantorBuild {
  std::string type;
  int depth = 0;
  NestedIntervalSystem sys;
  std::optional<OrbitTypeSet> set;
};

CantorBuild build_cantor(const json& cfg, const ContinuedFraction& cf, const CocycleFamily* fam) {
  const json& c = section(cfg, "cantor");
  CantorBuild b;
  b.type = get<std::string>(c, "type", "++");
  b.depth = get<int>(c, "depth", 3);
  if (b.depth < 1) config_error("cantor.depth must be >= 1");
  if (orbit_type(b.type)) {
    if (!fam || fam->kind != CocycleKind::EightPiece) config_error("orbit-type sets need an eightpiece cocycle");
    if (b.depth > fam->depth()) config_error("cantor.depth exceeds cocycle depth");
    b.set = build_orbit_type_set(*fam, b.type, b.depth);
    b.sys = b.set->system;
  } else if (b.type == "middle_third") {
    b.sys = middle_third(b.depth);
  } else if (b.type == "cosine_factor") {
    b.sys = cosine_factor_system(cf, b.depth);
  } else {
    config_error("unknown cantor.type: " + b.type);
  }
  return b;
}

// the cocycle a cantor request implies when none is given
json with_cantor_defaults(json cfg) {
  if (!cfg.contains("cantor")) return cfg;
  const json& c = section(cfg, "cantor");
  if (orbit_type(get<std::string>(c, "type", "++")) && !cfg.contains("cocycle"))
    cfg["cocycle"] = {{"family", "eightpiece"}, {"depth", get<int>(c, "depth", 3)},
                      {"subsequence", {{"parity", "even"}, {"rule", "separated"}}}};
  return cfg;
}

// ---- output ----------------------------------------------------------------------

class Sink {
 public:
  Sink(std::string dir, std::string hash) : dir_(std::move(dir)), hash_(std::move(hash)) {
    if (!dir_.empty()) fs::create_directories(dir_);
  }
  void csv(const std::string& name, const std::string& body) {
    emit(name, "# config_hash=" + hash_ + "\n" + body);
  }
  void js(const std::string& name, json j) {
    j["config_hash"] = hash_;
    emit(name, j.dump(2) + "\n");
  }
  std::vector<std::string> written;
  bool to_stdout() const { return dir_.empty(); }

 private:
  void emit(const std::string& name, const std::string& text) {
    written.push_back(name);
    if (dir_.empty()) {
      std::cout << text;
      return;
    }
    std::ofstream f(fs::path(dir_) / name, std::ios::binary);
    if (!f) config_error("cannot write " + (fs::path(dir_) / name).string());
    f << text;
  }
  std::string dir_, hash_;
};

// ---- stages ------------------------------------------------------------------------
// Each stage writes its files and returns false when a certificate or check fails.

bool stage_alpha(const json& cfg, Sink& out) {
  auto cf = build_alpha(cfg);
  long depth = get<long>(section(cfg, "alpha"), "depth", 20);
  long top = cf.deepest(depth);
  std::ostringstream os;
  os << "n,a_n,p_n,q_n,gap_lo,gap_hi,sandwich\n";
  bool ok = true;
  for (long n = 0; n <= top; ++n) {
    os << n << ',' << (n >= 1 ? cf.quotient(n).get_str() : "0") << ',' << cf.p(n) << ',' << cf.q(n) << ',';
    if (!cf.has(n + 2)) {
      os << ",,unavailable\n";  // the unknown continuation allows equality
      continue;
    }
    try {
      QInterval g = approximation_gap(cf, n);
      BigInt qq = cf.q(n) * cf.q(n + 1);
      bool s = g.lo > Rational(1) / (2 * qq) && g.hi < Rational(1) / qq;
      ok = ok && s;
      os << q(g.lo) << ',' << q(g.hi) << ',' << (s ? "ok" : "fail") << '\n';
    } catch (const Error&) {
      os << ",,unavailable\n";  // needs quotients past the known prefix
    }
  }
  out.csv("convergents.csv", os.str());
  return ok;
}

json level_json(const PLLevel& l) {
  json j{{"index", l.index}, {"q", l.q.get_str()}, {"M", q(l.M)}, {"L", q(l.L)}, {"delta", q(l.delta)}};
  for (const auto& k : l.knots) j["knots"].push_back(q(k));
  for (const auto& v : l.values) j["values"].push_back(q(v));
  return j;
}

bool stage_cocycle(const json& cfg, const CocycleFamily& fam, Sink& out) {
  json j{{"config", cfg},
         {"family", kind_name(fam.kind)},
         {"rule", fam.rule},
         {"alpha", fam.alpha.describe()},
         {"approx", {{"depth", fam.approx.depth}, {"value", q(fam.approx.value)}, {"radius", q(fam.approx.radius)}}},
         {"depth", fam.depth()},
         {"phi_tail", q(fam.phi_tail)},
         {"tail_note", fam.tail_note}};
  j["levels"] = json::array();
  if (fam.piecewise_linear()) {
    for (const auto& l : fam.pl) j["levels"].push_back(level_json(l));
    j["lipschitz_sum"] = q(fam.lip_total);
    try {
      j["integral"] = q(integrate_phi_exact(fam));
    } catch (const Error& e) {
      j["integral"] = std::string("unavailable: ") + error_name(e.code());
    }
  } else {
    for (const auto& l : fam.cos)
      j["levels"].push_back({{"index", l.index}, {"q", l.q.get_str()}, {"beta", q(l.beta)}});
  }
  if (fam.kind == CocycleKind::EightPiece) j["subsequence"] = fam.subsequence;
  out.js("cocycle.json", j);
  return true;
}

json value_json(const CertifiedValue& v) {
  return {{"center", q(v.center)}, {"radius", q(v.radius)}, {"tail_lo", q(v.tail_lo)}, {"tail_hi", q(v.tail_hi)},
          {"value", num(v.value())}};
}

// birkhoff sums at the requested k; tent cocycles at x = 0 also get the divergence table
bool stage_birkhoff(const json& cfg, const CocycleFamily& fam, Sink& out) {
  const json& b = section(cfg, "birkhoff");
  Rational x = jrat(b.value("x", json(0)), "birkhoff.x");
  long max_k = get<long>(b, "max_k", 100000);
  std::vector<BigInt> ks;
  if (b.contains("k")) {
    if (!b["k"].is_array()) config_error("birkhoff.k must be an array");
    for (const auto& v : b["k"]) ks.push_back(jint(v, "birkhoff.k"));
  } else if (b.contains("k_range")) {
    if (!b["k_range"].is_array() || b["k_range"].size() != 2) config_error("birkhoff.k_range must be [lo, hi)");
    BigInt lo = jint(b["k_range"][0], "k_range"), hi = jint(b["k_range"][1], "k_range");
    if (hi - lo > max_k) config_error("birkhoff.k_range larger than max_k");
    for (BigInt k = lo; k < hi; ++k) ks.push_back(k);
  } else if (fam.kind == CocycleKind::Tent && x == 0) {
    // every k with q_1 <= |k| < q_N
    const auto& cf = fam.alpha;
    BigInt lo = cf.q(1), hi = cf.q(fam.depth());
    if (2 * (hi - lo) > max_k) config_error("divergence table larger than birkhoff.max_k");
    for (BigInt k = lo; k < hi; ++k) {
      ks.push_back(k);
      ks.push_back(-k);
    }
  } else {
    ks = {BigInt(1), BigInt(-1)};
  }
  std::string type = get<std::string>(b, "type", "");
  bool certify = (fam.kind == CocycleKind::Tent && x == 0) || (fam.kind == CocycleKind::EightPiece && orbit_type(type));

  json j{{"config", cfg}, {"x", q(x)}, {"entries", json::array()}};
  bool ok = true;
  long held = 0;
  for (const BigInt& k : ks) {
    json e{{"k", k.get_str()}};
    if (certify) {
      DivergenceCertificate c = divergence_certificate(fam, x, k, type);
      e["value"] = value_json(c.value);
      e["level"] = c.level;
      e["bound"] = q(c.bound);
      e["sign"] = c.sign;
      e["rule"] = c.rule;
      e["holds"] = c.holds;
      ok = ok && c.holds;
      held += c.holds;
    } else {
      e["value"] = value_json(birkhoff(fam, x, k));
    }
    j["entries"].push_back(e);
  }
  if (certify) j["summary"] = {{"certificates", ks.size()}, {"holding", held}};
  out.js("certificates.json", j);
  return ok;
}

bool stage_fourier(const json& cfg, const CocycleFamily& fam, Sink& out) {
  const json& f = section(cfg, "fourier");
  std::vector<BigInt> ns;
  if (f.contains("n")) {
    for (const auto& v : f["n"]) ns.push_back(jint(v, "fourier.n"));
  } else {
    long nmax = get<long>(f, "n_max", 64);
    for (long n = 1; n <= nmax; ++n) ns.push_back(BigInt(n));
  }
  std::ostringstream os;
  os << "n,modulus_lo,modulus_hi,tail_num,tail_den\n";
  for (const BigInt& n : ns) {
    FourierValue v = fourier_closed_form(fam, n);
    os << n << ',' << num(v.modulus.lo_d()) << ',' << num(v.modulus.hi_d()) << ',' << v.tail.get_num() << ','
       << v.tail.get_den() << '\n';
  }
  out.csv("fourier.csv", os.str());
  return true;
}

json report_json(const SubsequenceReport& r) {
  return {{"separated", r.separated}, {"separated", r.amplitude_ratio}, {"growth", r.growth},
          {"parity", r.parity}, {"failures", r.failures}};
}

bool stage_cantor(const json& cfg, const CantorBuild& cb, std::uint64_t seed, Sink& out) {
  std::ostringstream lv;
  write_levels_csv(lv, cb.sys, get<long>(section(cfg, "cantor"), "max_rows", 64));
  out.csv("levels.csv", lv.str());

  SystemReport rep = verify_system(cb.sys);
  json j{{"config", cfg}, {"type", cb.type}, {"depth", cb.depth}, {"label", cb.sys.label}};
  for (const auto& m : cb.sys.child_counts) j["child_counts"].push_back(m.get_str());
  for (const auto& e : cb.sys.gap_bounds) j["gap_bounds"].push_back(q(e));
  for (const auto& l : cb.sys.max_length) j["max_length"].push_back(q(l));
  j["verify"] = {{"ok", rep.ok}, {"failures", rep.failures}};
  bool ok = rep.ok;
  if (cb.set) {
    j["subsequence"] = cb.set->ks;
    j["k0"] = cb.set->k0;
    j["certificates"] = report_json(cb.set->certificates);
    for (const auto& a : cb.set->anchors) j["anchors"].push_back(q(a));
  }
  // witnesses: sampled points with the indices of their enclosing intervals
  std::mt19937_64 rng(seed);
  j["samples"] = json::array();
  if (cb.sys.is_lattice() || cb.depth <= static_cast<int>(cb.sys.explicit_levels.size())) {
    int descents = get<int>(section(cfg, "cantor"), "samples", 2);
    for (const Rational& x : sample_points(cb.sys, cb.depth, descents, rng)) {
      Membership m = cb.set ? membership(*cb.set, x, cb.depth) : membership(cb.sys, x, cb.depth);
      json w{{"x", q(x)}, {"in", m.in}};
      for (const auto& i : m.witnesses) w["witnesses"].push_back(i.get_str());
      ok = ok && m.in;
      j["samples"].push_back(w);
    }
  }
  out.js("cantor.json", j);
  return ok;
}

json interval_json(const Interval& x) { return {{"lo", num(x.lo_d())}, {"hi", num(x.hi_d())}}; }

bool stage_dim(const json& cfg, const CantorBuild& cb, const ContinuedFraction& cf, Sink& out) {
  FalconerReport fr = falconer_lower_bound(cb.sys);
  std::ostringstream os;
  write_bounds_csv(os, fr);
  out.csv("bounds.csv", os.str());
  json j{{"config", cfg}, {"type", cb.type}, {"lower_bound", {{"running_inf", interval_json(fr.running_inf)},
                                                              {"last", interval_json(fr.last)}}}};
  if (cb.set) {
    for (int n = 2; n <= cb.depth; ++n) {
      try {
        j["orbit_type_bound"].push_back({{"n", n}, {"bound", interval_json(orbit_type_bound(cf, *cb.set, n))}});
      } catch (const Error& e) {
        j["orbit_type_bound"].push_back({{"n", n}, {"error", error_name(e.code())}});
      }
    }
    try {
      for (const auto& r : covering_upper_bound(cf, *cb.set))
        j["covering"].push_back({{"n", r.n}, {"ratio", interval_json(r.ratio)}});
    } catch (const Error& e) {
      j["covering_error"] = error_name(e.code());
    }
  }
  out.js("dim.json", j);
  return true;
}

struct FlowRequest {
  std::string system = "s3";
  ToralState x0{0.3, 0.2, 0.0};
  double t = 10, h = 1e-3;
  long stride = 100;
  Rational eta{1, 8};
};

FlowRequest flow_request(const json& cfg) {
  const json& f = section(cfg, "flow");
  FlowRequest r;
  r.system = get<std::string>(f, "system", "s3");
  if (r.system != "s3" && r.system != "r3") config_error("flow.system must be r3 or s3");
  if (f.contains("x0")) {
    if (!f["x0"].is_array() || f["x0"].size() != 3) config_error("flow.x0 must be [omega, theta, s]");
    r.x0 = {jdouble(f["x0"][0], "x0"), jdouble(f["x0"][1], "x0"), jdouble(f["x0"][2], "x0")};
  }
  if (f.contains("t")) r.t = jdouble(f["t"], "flow.t");
  if (f.contains("h")) r.h = jdouble(f["h"], "flow.h");
  r.stride = get<long>(f, "stride", 100);
  if (f.contains("eta")) r.eta = jrat(f["eta"], "flow.eta");
  if (!(r.h > 0) || !std::isfinite(r.t) || r.stride < 1) config_error("flow.h, flow.t or flow.stride invalid");
  return r;
}

double wrapped_gap(double a, double b) {
  double d = std::fabs(a - b);
  d -= std::floor(d);
  return std::min(d, 1 - d);
}

// integrate and compare the end point with the exact fiber flow
double run_flow(const json& cfg, const CocycleFamily& fam, double tol, Sink* out, json& summary) {
  FlowRequest r = flow_request(cfg);
  DrivingFunction psi = psi_from_phi(fam, r.eta);
  ToralState end;
  std::ostringstream os;
  double drift = 0;
  if (r.system == "s3") {
    auto tr = integrate_s3(toral_to_s3(r.x0), r.t, r.h, psi, r.stride);
    write_trajectory_csv(os, tr);
    end = s3_to_toral(tr.x.back());
    drift = tr.max_drift;
  } else {
    auto tr = integrate_r3(toral_to_r3(r.x0), r.t, r.h, psi, r.stride);
    write_trajectory_csv(os, tr);
    end = r3_to_toral(tr.x.back());
    drift = tr.max_drift;
  }
  FlowValue ex = exact_flow(r.x0, r.t, psi, std::min(tol, 1e-12));
  double err = std::max({std::fabs(end.s - ex.state.s) / std::max(1.0, std::fabs(ex.state.s)),
                         wrapped_gap(end.omega, ex.state.omega), wrapped_gap(end.theta, ex.state.theta)});
  summary = {{"config", cfg},
             {"system", r.system},
             {"x0", {num(r.x0.omega), num(r.x0.theta), num(r.x0.s)}},
             {"t", num(r.t)},
             {"h", num(r.h)},
             {"end", {num(end.omega), num(end.theta), num(end.s)}},
             {"exact_end", {num(ex.state.omega), num(ex.state.theta), num(ex.state.s)}},
             {"conjugacy_error", num(err)},
             {"max_drift", num(drift)},
             {"drift_of", r.system == "s3" ? "sphere constraint" : "first integral (constant only without forcing)"},
             {"tol", num(tol)}};
  if (out) out->csv("trajectory.csv", os.str());
  return err;
}

bool stage_flow(const json& cfg, const CocycleFamily& fam, double tol, Sink& out) {
  json s;
  double err = run_flow(cfg, fam, tol, &out, s);
  out.js("flow.json", s);
  return err <= tol;
}

bool stage_classify(const json& cfg, const CocycleFamily& fam, const Rational& omega, Sink& out) {
  const json& c = section(cfg, "classify");
  std::string sys = get<std::string>(c, "system", "s3");
  if (sys != "s3" && sys != "r3") config_error("classify.system must be r3 or s3");
  Rational theta = jrat(c.value("theta", json(0)), "classify.theta");
  double s = jdouble(c.value("s", json(0)), "classify.s");
  long per_block = get<long>(c, "per_block", 64);
  long horizon = get<long>(c, "horizon", 0);
  std::vector<BigInt> blocks;
  if (c.contains("blocks")) {
    for (const auto& v : c["blocks"]) blocks.push_back(jint(v, "classify.blocks"));
  } else if (fam.kind == CocycleKind::EightPiece && horizon == 0) {
    blocks.push_back(1);
    for (const auto& l : fam.pl) blocks.push_back(l.q);
  } else if (horizon == 0) {
    horizon = 1024;
  }
  DrivingFunction psi = psi_from_phi(fam);
  LimitReport rep = classify_limit_set(sys == "s3" ? AmbientSystem::S3 : AmbientSystem::R3, omega, theta, s, psi,
                                       horizon, blocks, per_block);
  json j{{"config", cfg},
         {"system", sys},
         {"omega", q(omega)},
         {"theta", q(theta)},
         {"forward", rep.forward_verdict},
         {"backward", rep.backward_verdict}};
  for (double b : rep.block_ends) j["block_ends"].push_back(num(b));
  for (double d : rep.forward_block_dist) j["forward_block_dist"].push_back(num(d));
  for (double d : rep.backward_block_dist) j["backward_block_dist"].push_back(num(d));
  out.js("classify.json", j);
  return true;
}

// ---- verification ---------------------------------------------------------------------

struct Check {
  std::string suite, name;
  bool pass = false;
  std::string detail;
};

Check verify_diophantine(const json& cfg) {
  auto cf = build_alpha(cfg);
  long depth = cf.deepest(get<long>(section(cfg, "alpha"), "depth", 20));
  long gap_ok = 0, dist_ok = 0, dist_total = 0, skipped = 0;
  for (long n = 0; n <= depth; ++n) {
    if (!cf.has(n + 2)) {
      ++skipped;
      continue;
    }
    try {
      QInterval g = approximation_gap(cf, n);
      BigInt q0 = cf.q(n), q1 = cf.q(n + 1);
      gap_ok += g.lo > Rational(1) / (2 * q0 * q1) && g.hi < Rational(1) / (q0 * q1);
      // at n = 0 with a_1 = 1 the nearest integer to alpha is 1, not p_0
      if (n == 0 && cf.quotient(1) == 1) continue;
      QInterval d = distance_to_integers(cf, n);
      ++dist_total;
      dist_ok += d.lo > Rational(1) / (2 * q1) && d.hi < Rational(1) / q1;
    } catch (const Error&) {
      ++skipped;
    }
  }
  long total = depth + 1 - skipped;
  Check c{"diophantine", "sandwich", gap_ok == total && dist_ok == dist_total && total > 0, ""};
  c.detail = std::to_string(gap_ok) + "/" + std::to_string(total) + " gaps, " + std::to_string(dist_ok) + "/" +
             std::to_string(dist_total) + " distances, " + std::to_string(skipped) + " beyond known quotients";
  return c;
}

std::vector<Check> verify_cocycles(const json& cfg, std::uint64_t seed) {
  auto cf = build_alpha(cfg);
  auto fam = build_cocycle(cfg, cf);
  const json& v = cfg.contains("verify") && cfg["verify"].is_object() ? cfg["verify"] : json::object();
  long K = get<long>(v, "K", 10000);
  int points = get<int>(v, "points", 3);
  std::mt19937_64 rng(seed);
  std::vector<Check> out;
  long mism = 0;
  for (int i = 0; i < points; ++i) {
    Rational x = i == 0 ? Rational(0) : Rational(static_cast<long>(rng() % 1000003)) / 1000003;
    auto [pos, neg] = direct_sums(fam, x, K);
    for (long k = 0; k <= K; ++k) {
      if (birkhoff(fam, x, BigInt(k)).center != pos[k].center) ++mism;
      if (birkhoff(fam, x, BigInt(-k)).center != neg[k].center) ++mism;
    }
  }
  out.push_back({"cocycles", "birkhoff_vs_direct", mism == 0,
                 std::to_string(points) + " x, |k| <= " + std::to_string(K) + ", mismatches " + std::to_string(mism)});
  if (fam.kind == CocycleKind::Tent) {
    BigInt lo = cf.q(1), hi = cf.q(fam.depth());
    long n = 0, bad = 0;
    for (BigInt k = lo; k < hi && n < 200000; ++k)
      for (int sg : {1, -1}) {
        ++n;
        bad += !divergence_certificate(fam, 0, BigInt(k * sg)).holds;
      }
    out.push_back({"cocycles", "tent_divergence", bad == 0,
                   std::to_string(n - bad) + "/" + std::to_string(n) + " certificates hold"});
  }
  return out;
}

Check verify_cantor(const json& cfg, std::uint64_t seed) {
  json full = with_cantor_defaults(cfg);
  auto cf = build_alpha(full);
  std::optional<CocycleFamily> fam;
  if (full.contains("cocycle")) fam = build_cocycle(full, cf);
  CantorBuild cb = build_cantor(full, cf, fam ? &*fam : nullptr);
  SystemReport rep = verify_system(cb.sys);
  bool ok = rep.ok;
  std::string detail = cb.type + " depth " + std::to_string(cb.depth) + ": nesting/gaps " + (rep.ok ? "ok" : "fail");
  if (cb.set) {
    const auto& c = cb.set->certificates;
    bool sub = c.separated && c.parity;
    ok = ok && sub;
    detail += ", subsequence " + std::string(sub ? "ok" : "fail");
  }
  if (cb.sys.is_lattice() || cb.depth <= static_cast<int>(cb.sys.explicit_levels.size())) {
    std::mt19937_64 rng(seed);
    long in = 0, n = 0;
    for (const Rational& x : sample_points(cb.sys, cb.depth, 2, rng)) {
      ++n;
      in += (cb.set ? membership(*cb.set, x, cb.depth) : membership(cb.sys, x, cb.depth)).in;
    }
    ok = ok && in == n;
    detail += ", samples " + std::to_string(in) + "/" + std::to_string(n);
  }
  for (const auto& f : rep.failures) detail += "; " + f;
  return {"cantor", "nested_system", ok, detail};
}

Check verify_flows(const json& cfg, double tol) {
  auto cf = build_alpha(cfg);
  auto fam = build_cocycle(cfg, cf);
  json s;
  double err = run_flow(cfg, fam, tol, nullptr, s);
  return {"flows", "conjugacy", err <= tol,
          s["system"].get<std::string>() + " error " + num(err) + " (tol " + num(tol) + "), drift " +
              s["max_drift"].get<std::string>()};
}

json defaults_for(const std::string& suite) {
  if (suite == "diophantine") return {{"alpha", {{"kind", "golden"}, {"depth", 20}}}};
  if (suite == "cocycles") return {{"alpha", {{"kind", "golden"}}}, {"cocycle", {{"family", "tent_linear"}, {"depth", 6}}}};
  if (suite == "cantor") return {{"alpha", {{"kind", "golden"}}}, {"cantor", {{"type", "++"}, {"depth", 3}}}};
  if (suite == "flows")
    return {{"alpha", {{"kind", "golden"}}},
            {"cocycle", {{"family", "tent_linear"}, {"depth", 3}}},
            {"flow", {{"system", "s3"}, {"x0", {0.3, 0.2, 0.0}}, {"t", 10}, {"h", 1e-3}}}};
  config_error("unknown suite: " + suite);
}

std::vector<std::string> suites_of(const std::string& suite) {
  if (suite == "all") return {"diophantine", "cocycles", "cantor", "flows"};
  if (suite == "diophantine" || suite == "cocycles" || suite == "cantor" || suite == "flows") return {suite};
  config_error("unknown suite: " + suite + " (diophantine, cocycles, cantor, flows, all)");
}

// with a config only the stages it describes are checked; an empty config checks nothing
std::vector<Check> run_verify(const std::string& suite, const json* cfg, std::uint64_t seed, double tol) {
  std::vector<Check> out;
  for (const auto& s : suites_of(suite)) {
    json c = cfg ? *cfg : defaults_for(s);
    try {
      if (s == "diophantine" && c.contains("alpha")) out.push_back(verify_diophantine(c));
      if (s == "cocycles" && c.contains("cocycle"))
        for (auto& k : verify_cocycles(c, seed)) out.push_back(k);
      if (s == "cantor" && c.contains("cantor")) out.push_back(verify_cantor(c, seed));
      if (s == "flows" && c.contains("flow")) out.push_back(verify_flows(c, tol));
    } catch (const Error& e) {
      if (e.code() == ErrorCode::ConfigError) throw;
      out.push_back({s, "error", false, e.what()});
    }
  }
  return out;
}

json checks_json(const std::vector<Check>& cs) {
  json j = json::array();
  for (const auto& c : cs) j.push_back({{"suite", c.suite}, {"name", c.name}, {"pass", c.pass}, {"detail", c.detail}});
  return j;
}

// ---- run --------------------------------------------------------------------------------

struct StageStatus {
  std::string name, status, error;
  std::vector<std::string> files;
};

int severity(const Error& e) { return e.code() == ErrorCode::ConfigError ? kConfigError : kNumericError; }

int combine(int a, int b) {
  auto rank = [](int c) { return c == kConfigError ? 3 : c == kNumericError ? 2 : c == kVerifyFail ? 1 : 0; };
  return rank(a) >= rank(b) ? a : b;
}

std::string gmp_mpfr_versions() { return std::string("gmp ") + gmp_version + ", mpfr " + mpfr_get_version(); }

std::string utc_now() {
  std::time_t t = std::time(nullptr);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", std::gmtime(&t));
  return buf;
}

int run_pipeline(json cfg, const std::string& dir, std::uint64_t seed, double tol) {
  cfg = with_cantor_defaults(cfg);
  std::string hash = config_hash(cfg);
  Sink out(dir, hash);
  std::vector<StageStatus> stages;
  int code = kOk;

  std::optional<ContinuedFraction> cf;
  std::optional<CocycleFamily> fam;
  std::optional<CantorBuild> cb;
  auto stage = [&](const std::string& name, bool wanted, auto&& body) {
    if (!wanted) return;
    StageStatus st{name, "ok", "", {}};
    size_t before = out.written.size();
    try {
      if (!body()) {
        st.status = "failed";
        code = combine(code, kVerifyFail);
      }
    } catch (const Error& e) {
      st.status = "error";
      st.error = e.what();
      code = combine(code, severity(e));
    }
    st.files.assign(out.written.begin() + before, out.written.end());
    stages.push_back(st);
  };
  auto need = [](const std::string& dep) {
    throw Error(ErrorCode::ConfigError, "upstream stage failed: " + dep);
  };

  bool want_cocycle = cfg.contains("cocycle") || cfg.contains("birkhoff") || cfg.contains("fourier") ||
                      cfg.contains("flow") || cfg.contains("classify");
  bool want_alpha = cfg.contains("alpha") || want_cocycle || cfg.contains("cantor");
  stage("alpha", want_alpha, [&] {
    cf = build_alpha(cfg);
    return stage_alpha(cfg, out);
  });
  stage("cocycle", want_cocycle, [&] {
    if (!cf) need("alpha");
    fam = build_cocycle(cfg, *cf);
    return stage_cocycle(cfg, *fam, out);
  });
  bool tent_table = fam && fam->kind == CocycleKind::Tent;
  stage("certificates", cfg.contains("birkhoff") || tent_table, [&] {
    if (!fam) need("cocycle");
    return stage_birkhoff(cfg, *fam, out);
  });
  stage("fourier", cfg.contains("fourier"), [&] {
    if (!fam) need("cocycle");
    return stage_fourier(cfg, *fam, out);
  });
  stage("cantor", cfg.contains("cantor"), [&] {
    if (!cf) need("alpha");
    cb = build_cantor(cfg, *cf, fam ? &*fam : nullptr);
    return stage_cantor(cfg, *cb, seed, out);
  });
  stage("dim", cfg.contains("cantor"), [&] {
    if (!cb) need("cantor");
    return stage_dim(cfg, *cb, *cf, out);
  });
  stage("flow", cfg.contains("flow"), [&] {
    if (!fam) need("cocycle");
    return stage_flow(cfg, *fam, tol, out);
  });
  stage("classify", cfg.contains("classify"), [&] {
    if (!fam) need("cocycle");
    Rational omega;
    const json& c = section(cfg, "classify");
    if (c.contains("omega")) {
      omega = jrat(c["omega"], "classify.omega");
    } else {
      if (!cb || !cb->set) need("cantor (orbit type)");
      std::mt19937_64 rng(seed);
      omega = sample_points(cb->sys, cb->depth, 1, rng).front();
    }
    return stage_classify(cfg, *fam, omega, out);
  });
  stage("verify", cfg.contains("verify"), [&] {
    const json& v = cfg["verify"];
    std::vector<Check> all;
    std::vector<std::string> suites;
    if (v.is_string()) suites.push_back(v.get<std::string>());
    else if (v.is_array()) suites = v.get<std::vector<std::string>>();
    else if (v.is_object()) suites = get<std::vector<std::string>>(v, "suites", {"all"});
    else config_error("verify must be a suite name, a list of them or an object");
    for (const auto& s : suites)
      for (auto& c : run_verify(s, &cfg, seed, tol)) all.push_back(c);
    bool ok = std::all_of(all.begin(), all.end(), [](const Check& c) { return c.pass; });
    out.js("verify.json", {{"checks", checks_json(all)}, {"pass", ok}});
    return ok;
  });

  json m{{"config", cfg},
         {"seed", seed},
         {"tol", num(tol)},
         {"versions", {{"besi", kVersion}, {"libraries", gmp_mpfr_versions()}}},
         {"created", utc_now()},
         {"exit_code", code}};
  m["stages"] = json::array();
  for (const auto& s : stages) {
    json j{{"name", s.name}, {"status", s.status}, {"files", s.files}};
    if (!s.error.empty()) j["error"] = s.error;
    m["stages"].push_back(j);
  }
  out.js("manifest.json", m);
  return code;
}

// ---- config loading --------------------------------------------------------------------

json load_json(const std::string& path) {
  std::ifstream f(path);
  if (!f) config_error("cannot read " + path);
  try {
    json j = json::parse(f);
    if (!j.is_object()) config_error(path + ": top level must be an object");
    return j;
  } catch (const json::parse_error& e) {
    config_error(path + ": " + e.what());
  }
}

// outputs of earlier commands embed their config; use it as the base
json config_from_input(const std::string& path) {
  json j = load_json(path);
  if (j.contains("config") && j["config"].is_object()) return j["config"];
  return j;
}

std::vector<double> parse_triple(const std::string& s) {
  std::vector<double> v;
  std::stringstream ss(s);
  std::string tok;
  while (std::getline(ss, tok, ',')) {
    try {
      v.push_back(parse_rational(tok).get_d());
    } catch (const std::exception&) {
      config_error("bad --x0 component: " + tok);
    }
  }
  if (v.size() != 3) config_error("--x0 needs omega,theta,s");
  return v;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"besi: certified cocycles, nested Cantor sets and flows"};
  app.require_subcommand(1);
  app.fallthrough();
  app.set_version_flag("--version", kVersion);

  std::string config_path, out_dir;
  std::uint64_t seed = 1;
  std::optional<int> depth;
  std::optional<double> tol;
  app.add_option("--config", config_path, "JSON experiment config");
  app.add_option("--out", out_dir, "output directory (stdout when omitted, except run)");
  app.add_option("--seed", seed, "random seed for sampling");
  app.add_option("--depth", depth, "override alpha/cocycle/cantor depth");
  app.add_option("--tol", tol, "tolerance for flow checks");

  auto* alpha = app.add_subcommand("alpha", "convergent table with certified gaps");
  auto* cocycle = app.add_subcommand("cocycle", "build a cocycle and print its levels");
  auto* birk = app.add_subcommand("birkhoff", "birkhoff sums and divergence certificates");
  std::vector<std::string> ks;
  std::string bx;
  birk->add_option("--k", ks, "times k (repeatable)");
  birk->add_option("--x", bx, "base point (p/q)");
  auto* four = app.add_subcommand("fourier", "closed-form Fourier moduli");
  long nmax = 0;
  four->add_option("--n-max", nmax, "scan 1..n");
  auto* cantor = app.add_subcommand("cantor", "nested interval systems");
  cantor->require_subcommand(1);
  auto* cbuild = cantor->add_subcommand("build", "build a set and sample witnesses");
  std::string ctype;
  cbuild->add_option("--type", ctype, "++, -+, --, +-, middle_third, cosine_factor");
  auto* cdim = cantor->add_subcommand("dim", "dimension bounds");
  std::string dim_input;
  cdim->add_option("--input", dim_input, "cantor.json from cantor build");
  auto* dim = app.add_subcommand("dim", "dimension bounds (same as cantor dim)");
  dim->add_option("--input", dim_input, "cantor.json from cantor build");
  auto* flow = app.add_subcommand("flow", "integrate r3 or s3, or classify a witness");
  flow->set_help_flag("--help", "Print this help message and exit");
  std::string fsys, psi_path, x0, witness_path;
  std::optional<double> ft, fh;
  long point = 0;
  flow->add_option("system", fsys, "r3, s3 or classify")->required()->check(CLI::IsMember({"r3", "s3", "classify"}));
  flow->add_option("--psi", psi_path, "cocycle.json from the cocycle command");
  flow->add_option("--x0", x0, "omega,theta,s");
  flow->add_option("--t", ft, "horizon");
  flow->add_option("--h", fh, "RK4 step");
  flow->add_option("--witness", witness_path, "cantor.json from cantor build");
  flow->add_option("--point", point, "sample index in the witness file");
  auto* classify = app.add_subcommand("classify", "limit-set trend of a witness orbit");
  classify->add_option("--witness", witness_path, "cantor.json from cantor build");
  classify->add_option("--point", point, "sample index in the witness file");
  classify->add_option("--type", ctype, "orbit type of the default witness set");
  flow->add_option("--type", ctype, "orbit type of the default witness set (classify)");
  auto* verify = app.add_subcommand("verify", "verification suite");
  std::string suite = "all";
  bool criteria = false;
  verify->add_option("suite", suite, "diophantine, cocycles, cantor, flows, all");
  verify->add_flag("--criteria", criteria, "run the acceptance criteria of the suite");
  auto* run = app.add_subcommand("run", "run every stage of the config into a bundle");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    int rc = app.exit(e);
    return rc == 0 ? kOk : kConfigError;
  }

  try {
    json cfg = json::object();
    bool have_config = !config_path.empty();
    if (have_config) cfg = load_json(config_path);
    if (!dim_input.empty()) cfg = config_from_input(dim_input);
    if (!psi_path.empty()) {
      json p = config_from_input(psi_path);
      for (const char* k : {"alpha", "cocycle"})
        if (p.contains(k)) cfg[k] = p[k];
    }
    if (!witness_path.empty()) {
      json w = config_from_input(witness_path);
      for (const char* k : {"alpha", "cocycle", "cantor"})
        if (w.contains(k)) cfg[k] = w[k];
    }
    if (cfg.contains("seed") && app.get_option("--seed")->count() == 0) seed = jint(cfg["seed"], "seed").get_ui();
    cfg["seed"] = seed;
    double tolerance = tol ? *tol : cfg.contains("tol") ? jdouble(cfg["tol"], "tol") : 1e-6;
    if (tol) cfg["tol"] = *tol;
    bool is_cantor = cantor->parsed() || dim->parsed() || (flow->parsed() && fsys == "classify") || classify->parsed();
    if (depth && *depth < 1) config_error("--depth must be >= 1");
    if (depth && (is_cantor || cfg.contains("cantor"))) cfg["cantor"]["depth"] = *depth;
    if (!ctype.empty()) cfg["cantor"]["type"] = ctype;
    if (is_cantor) cfg = with_cantor_defaults(cfg);
    if (depth) {
      if (alpha->parsed() || cfg.contains("alpha")) cfg["alpha"]["depth"] = *depth;
      if (!alpha->parsed()) cfg["cocycle"]["depth"] = *depth;
    }
    if (!ks.empty()) {
      cfg["birkhoff"]["k"] = json::array();
      for (const auto& k : ks) cfg["birkhoff"]["k"].push_back(k);
    }
    if (!bx.empty()) cfg["birkhoff"]["x"] = bx;
    if (nmax > 0) cfg["fourier"]["n_max"] = nmax;
    if (flow->parsed() && fsys != "classify") {
      cfg["flow"]["system"] = fsys;
      if (!x0.empty()) cfg["flow"]["x0"] = parse_triple(x0);
      if (ft) cfg["flow"]["t"] = *ft;
      if (fh) cfg["flow"]["h"] = *fh;
    }

    if (verify->parsed()) {
      std::vector<Check> checks;
      if (criteria) {
        for (int id : suite_criteria(suite)) {
          CheckResult r = run_criterion(id, seed);
          checks.push_back({suite, "c" + std::to_string(id) + " " + r.name, r.pass, r.detail});
        }
      } else {
        checks = run_verify(suite, have_config ? &cfg : nullptr, seed, tolerance);
      }
      bool ok = std::all_of(checks.begin(), checks.end(), [](const Check& c) { return c.pass; });
      json rep{{"suite", suite}, {"pass", ok}, {"checks", checks_json(checks)}};
      if (have_config) rep["config"] = cfg;
      Sink out(out_dir, config_hash(cfg));
      out.js("verify.json", rep);
      return ok ? kOk : kVerifyFail;
    }
    if (run->parsed()) return run_pipeline(cfg, out_dir.empty() ? "bundle" : out_dir, seed, tolerance);

    Sink out(out_dir, config_hash(cfg));
    ContinuedFraction cf = build_alpha(cfg);
    bool ok = true;
    if (alpha->parsed()) {
      ok = stage_alpha(cfg, out);
    } else if (cocycle->parsed()) {
      ok = stage_cocycle(cfg, build_cocycle(cfg, cf), out);
    } else if (birk->parsed()) {
      ok = stage_birkhoff(cfg, build_cocycle(cfg, cf), out);
    } else if (four->parsed()) {
      ok = stage_fourier(cfg, build_cocycle(cfg, cf), out);
    } else if (is_cantor) {
      std::optional<CocycleFamily> fam;
      if (cfg.contains("cocycle")) fam = build_cocycle(cfg, cf);
      CantorBuild cb = build_cantor(cfg, cf, fam ? &*fam : nullptr);
      if (cbuild->parsed()) {
        ok = stage_cantor(cfg, cb, seed, out);
      } else if (cdim->parsed() || dim->parsed()) {
        ok = stage_dim(cfg, cb, cf, out);
      } else {
        if (!fam) config_error("classify needs a cocycle");
        Rational omega;
        if (cfg.contains("classify") && cfg["classify"].contains("omega")) {
          omega = jrat(cfg["classify"]["omega"], "classify.omega");
        } else if (!witness_path.empty()) {
          json w = load_json(witness_path);
          if (!w.contains("samples") || point < 0 || point >= static_cast<long>(w["samples"].size()))
            config_error("witness file has no sample " + std::to_string(point));
          omega = jrat(w["samples"][point]["x"], "witness x");
        } else {
          std::mt19937_64 rng(seed);
          omega = sample_points(cb.sys, cb.depth, 1, rng).front();
        }
        ok = stage_classify(cfg, *fam, omega, out);
      }
    } else if (flow->parsed()) {
      ok = stage_flow(cfg, build_cocycle(cfg, cf), tolerance, out);
    }
    return ok ? kOk : kVerifyFail;
  } catch (const Error& e) {
    std::cerr << "besi: " << e.what() << '\n';
    return severity(e);
  } catch (const json::exception& e) {
    std::cerr << "besi: config: " << e.what() << '\n';
    return kConfigError;
  } catch (const fs::filesystem_error& e) {
    std::cerr << "besi: " << e.what() << '\n';
    return kConfigError;
  }
}
