#include "besi/cantor.hpp"
#include "besi/checks.hpp"
#include "besi/cocycles.hpp"
#include "besi/diophantine.hpp"
#include "besi/flows.hpp"

#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <random>

namespace py = pybind11;
using namespace besi;

namespace {

// ints, Fractions, decimal strings and "p/q" all go through str()
Rational to_q(const py::handle& h) { return parse_rational(py::str(h)); }

BigInt to_z(const py::handle& h) {
  Rational r = to_q(h);
  if (r.get_den() != 1) throw py::value_error("expected an integer");
  return r.get_num();
}

py::object py_int(const BigInt& z) { return py::module_::import("builtins").attr("int")(z.get_str()); }

py::object py_frac(const Rational& r) { return py::module_::import("fractions").attr("Fraction")(to_string(r)); }

py::dict value_dict(const CertifiedValue& v) {
  py::dict d;
  d["center"] = py_frac(v.center);
  d["radius"] = py_frac(v.radius);
  d["lo"] = py_frac(v.lo());
  d["hi"] = py_frac(v.hi());
  d["value"] = v.value();
  return d;
}

std::vector<BigInt> ints(const py::iterable& it) {
  std::vector<BigInt> out;
  for (auto h : it) out.push_back(to_z(h));
  return out;
}

std::vector<Rational> rats(const py::iterable& it) {
  std::vector<Rational> out;
  for (auto h : it) out.push_back(to_q(h));
  return out;
}

}  // namespace

PYBIND11_MODULE(_besi, m) {
  m.doc() = "certified cocycles over rotations, nested Cantor sets and suspension flows";

  py::register_exception<Error>(m, "BesiError");

  py::class_<ContinuedFraction>(m, "ContinuedFraction")
      .def_static("golden", &ContinuedFraction::golden)
      .def_static("sqrt2_minus_1", &ContinuedFraction::sqrt2_minus_1)
      .def_static("repeat_last", [](const py::iterable& a) { return ContinuedFraction::repeat_last(ints(a)); })
      .def_static("prefix", [](const py::iterable& a) { return ContinuedFraction::prefix(ints(a)); })
      .def_static("with_growth",
                  [](const py::object& e, const py::object& C, const py::object& seed, int levels) {
                    return construct_alpha_with_growth(to_q(e), to_q(C), to_z(seed), levels);
                  })
      .def("quotient", [](const ContinuedFraction& cf, long n) { return py_int(cf.quotient(n)); })
      .def("p", [](const ContinuedFraction& cf, long n) { return py_int(cf.p(n)); })
      .def("q", [](const ContinuedFraction& cf, long n) { return py_int(cf.q(n)); })
      .def("known", &ContinuedFraction::known)
      .def("__repr__", &ContinuedFraction::describe);

  m.def("approximation_gap", [](const ContinuedFraction& cf, long n) {
    QInterval g = approximation_gap(cf, n);
    return py::make_tuple(py_frac(g.lo), py_frac(g.hi));
  });
  m.def("distance_to_integers", [](const ContinuedFraction& cf, long n) {
    QInterval g = distance_to_integers(cf, n);
    return py::make_tuple(py_frac(g.lo), py_frac(g.hi));
  });

  py::class_<CocycleFamily>(m, "Cocycle")
      .def_property_readonly("kind", [](const CocycleFamily& f) { return std::string(kind_name(f.kind)); })
      .def_property_readonly("depth", &CocycleFamily::depth)
      .def_property_readonly("rule", [](const CocycleFamily& f) { return f.rule; })
      .def_property_readonly("levels", [](const CocycleFamily& f) {
        py::list out;
        for (const auto& l : f.pl) {
          py::dict d;
          d["index"] = l.index;
          d["q"] = py_int(l.q);
          d["M"] = py_frac(l.M);
          d["delta"] = py_frac(l.delta);
          out.append(d);
        }
        return out;
      });

  m.def("tent_linear", &tent_linear, py::arg("alpha"), py::arg("depth"));
  m.def("tent_custom", [](const ContinuedFraction& cf, const py::iterable& M) { return tent_custom(cf, rats(M)); });
  m.def("tent_holder", [](const ContinuedFraction& cf, const py::object& g, int depth) {
    return tent_holder(cf, to_q(g), depth);
  });
  m.def("trapezoid", [](const ContinuedFraction& cf, const py::iterable& M) { return trapezoid(cf, rats(M)); });
  m.def("eightpiece", [](const ContinuedFraction& cf, std::vector<long> ks, long k0) { return eightpiece(cf, ks, k0); },
        py::arg("alpha"), py::arg("ks"), py::arg("k0") = 0);

  m.def("phi", [](const CocycleFamily& f, const py::object& x) { return value_dict(eval_phi(f, to_q(x))); });
  m.def("birkhoff", [](const CocycleFamily& f, const py::object& x, const py::object& k) {
    return value_dict(birkhoff(f, to_q(x), to_z(k)));
  });
  m.def("direct_sum", [](const CocycleFamily& f, const py::object& x, long k) {
    return value_dict(direct_sum(f, to_q(x), k));
  });
  m.def(
      "divergence_certificate",
      [](const CocycleFamily& f, const py::object& x, const py::object& k, const std::string& type) {
        DivergenceCertificate c = divergence_certificate(f, to_q(x), to_z(k), type);
        py::dict d = value_dict(c.value);
        d["level"] = c.level;
        d["bound"] = py_frac(c.bound);
        d["sign"] = c.sign;
        d["holds"] = c.holds;
        return d;
      },
      py::arg("cocycle"), py::arg("x"), py::arg("k"), py::arg("type") = "");
  m.def("fourier", [](const CocycleFamily& f, const py::object& n) {
    FourierValue v = fourier_closed_form(f, to_z(n));
    return py::make_tuple(v.modulus.lo_d(), v.modulus.hi_d(), py_frac(v.tail));
  });

  py::class_<OrbitTypeSet>(m, "OrbitTypeSet")
      .def_property_readonly("signs", [](const OrbitTypeSet& s) { return s.signs; })
      .def_property_readonly("ks", [](const OrbitTypeSet& s) { return s.ks; })
      .def_property_readonly("depth", [](const OrbitTypeSet& s) { return s.system.depth(); })
      .def("sample",
           [](const OrbitTypeSet& s, int descents, std::uint64_t seed) {
             std::mt19937_64 rng(seed);
             py::list out;
             for (const auto& x : sample_points(s.system, s.system.depth(), descents, rng)) out.append(py_frac(x));
             return out;
           },
           py::arg("descents") = 1, py::arg("seed") = 1)
      .def("contains", [](const OrbitTypeSet& s, const py::object& x) {
        return membership(s, to_q(x), s.system.depth()).in;
      });
  m.def("orbit_type_set", &build_orbit_type_set, py::arg("cocycle"), py::arg("signs"), py::arg("depth"));

  m.def("middle_third_lower_bound", [](int levels) {
    FalconerReport r = falconer_lower_bound(middle_third(levels));
    return py::make_tuple(r.last.lo_d(), r.last.hi_d());
  });

  py::class_<DrivingFunction>(m, "DrivingFunction")
      .def("__call__", &DrivingFunction::operator())
      .def("phi", &DrivingFunction::phi)
      .def_readonly("alpha", &DrivingFunction::alpha);
  m.def("psi_from_phi", [](const CocycleFamily& f) { return psi_from_phi(f); });
  m.def("exact_flow", [](double omega, double theta, double s, double t, const DrivingFunction& psi) {
    FlowValue v = exact_flow({omega, theta, s}, t, psi);
    return py::make_tuple(v.state.omega, v.state.theta, v.state.s);
  });
  m.def(
      "integrate_s3",
      [](double omega, double theta, double s, double t, double h, const DrivingFunction& psi, long stride) {
        auto tr = integrate_s3(toral_to_s3({omega, theta, s}), t, h, psi, stride);
        py::list out;
        for (size_t i = 0; i < tr.t.size(); ++i) {
          ToralState st = s3_to_toral(tr.x[i]);
          out.append(py::make_tuple(tr.t[i], st.omega, st.theta, st.s));
        }
        return out;
      },
      py::arg("omega"), py::arg("theta"), py::arg("s"), py::arg("t"), py::arg("h"), py::arg("psi"),
      py::arg("stride") = 1);
  m.def(
      "classify",
      [](const py::object& omega, const DrivingFunction& psi, const py::iterable& blocks, long per_block) {
        LimitReport r = classify_limit_set(AmbientSystem::S3, to_q(omega), 0, 0, psi, 0, ints(blocks), per_block);
        return py::make_tuple(r.backward_verdict, r.forward_verdict);
      },
      py::arg("omega"), py::arg("psi"), py::arg("blocks"), py::arg("per_block") = 64);

  m.def("run_criterion", [](int id, std::uint64_t seed) {
    CheckResult r = run_criterion(id, seed);
    py::dict d;
    d["id"] = r.id;
    d["name"] = r.name;
    d["pass"] = r.pass;
    d["detail"] = r.detail;
    d["seconds"] = r.seconds;
    return d;
  }, py::arg("id"), py::arg("seed") = 1);
}
