#include <pybind11/complex.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "rirkit/casestudies.hpp"
#include "rirkit/error.hpp"
#include "rirkit/nyquist.hpp"
#include "rirkit/rir.hpp"
#include "rirkit/transfer.hpp"

namespace py = pybind11;
using namespace rirkit;

namespace {

py::dict verdict_dict(const RIRVerdict& v) {
  py::dict d;
  d["class"] = to_string(v.cls.class_name);
  d["n_unstable"] = v.cls.n_unstable;
  d["pip"] = v.cls.pip;
  d["peak_omega"] = v.cls.peak_omega;
  d["peak_gain"] = v.cls.peak_gain;
  d["peak_unique"] = v.cls.peak_unique;
  d["theta_p"] = v.theta_p;
  d["theta_rate"] = v.theta_rate;
  d["rho"] = v.rho;
  d["lower_bound"] = v.lower_bound;
  d["status"] = to_string(v.status);
  d["explanation"] = v.explanation;
  return d;
}

}  // namespace

PYBIND11_MODULE(_rirkit, m) {
  m.doc() = "Robust instability radius toolkit";

  auto base = py::register_exception<Error>(m, "RirkitError", PyExc_RuntimeError);
  py::register_exception<InvalidInput>(m, "InvalidInput", base.ptr());
  py::register_exception<PreconditionError>(m, "PreconditionError", base.ptr());
  py::register_exception<VerificationError>(m, "VerificationError", base.ptr());
  py::register_exception<NumericalError>(m, "NumericalError", base.ptr());

  py::class_<RationalTF>(m, "TransferFunction")
      .def(py::init<std::vector<double>, std::vector<double>>(), py::arg("num"), py::arg("den"))
      .def_property_readonly("num", [](const RationalTF& g) { return g.num().coeffs(); })
      .def_property_readonly("den", [](const RationalTF& g) { return g.den().coeffs(); })
      .def_property_readonly("zeros", [](const RationalTF& g) {
        return std::vector<cplx>(g.zeros().begin(), g.zeros().end());
      })
      .def_property_readonly("poles", [](const RationalTF& g) {
        return std::vector<cplx>(g.poles().begin(), g.poles().end());
      })
      .def("__call__", [](const RationalTF& g, cplx z) { return g(z); })
      .def("__mul__", [](const RationalTF& a, const RationalTF& b) { return a * b; })
      .def("__mul__", [](const RationalTF& a, double s) { return s * a; })
      .def("__rmul__", [](const RationalTF& a, double s) { return s * a; })
      .def("__repr__", [](const RationalTF& g) {
        return "TransferFunction(order=" + std::to_string(g.order()) + ")";
      });

  m.def("unstable_pole_count", [](const RationalTF& g) { return unstable_pole_count(g); });
  m.def("logderiv", [](const RationalTF& g, double w) {
    const DerivativeSample s = logderiv(g, w);
    return py::dict(py::arg("value") = s.value, py::arg("gain_log") = s.gain_log,
                    py::arg("phase") = s.phase, py::arg("gain_rate") = s.gain_rate,
                    py::arg("phase_rate") = s.phase_rate);
  });
  m.def("linf_norm", [](const RationalTF& g) {
    const PeakInfo p = linf_norm(g);
    return py::make_tuple(p.norm, p.omega);
  });
  m.def("analyze", [](const RationalTF& g) { return verdict_dict(exact_rir_analyze(g)); });
  m.def("synth", [](const RationalTF& g) {
    const SynthResult s = synth_marginal_perturbation(g);
    py::dict d;
    d["analysis"] = verdict_dict(s.analysis);
    d["c"] = s.spec.c;
    d["a"] = s.spec.a;
    d["scale"] = s.spec.scale;
    d["constant"] = s.spec.constant;
    d["f"] = s.f;
    d["single_mode"] = s.verdict.single_mode;
    return d;
  });
  m.def("closed_loop_poles", [](const RationalTF& L) { return closed_loop_poles(L).expanded(); });
  m.def("pcr_max_search",
        [](double w, double th, int order, int trials, std::uint64_t seed) {
          const PcrSearchResult r = pcr_max_search(w, th, order, trials, seed);
          return py::make_tuple(r.best, r.bound);
        },
        py::arg("omega"), py::arg("theta"), py::arg("max_order") = 4, py::arg("trials") = 20000,
        py::arg("seed") = 1);

  m.def("maglev_zoh", [](double k, double p, double tau, double T) {
    return maglev_zoh({k, p, tau, T});
  });
  m.def("maglev_upper_bound", [](double k, double p, double tau, double T, double eps) {
    const MaglevBound b = maglev_upper_bound({k, p, tau, T}, eps);
    return py::dict(py::arg("P") = b.P, py::arg("abar") = b.abar, py::arg("ratio") = b.ratio,
                    py::arg("validated") = b.validated);
  }, py::arg("k"), py::arg("p"), py::arg("tau"), py::arg("T"), py::arg("eps") = 0.01);

  m.def("fhn_search_eo", []() {
    const FHNSearch s = fhn_search_eo(FHNModel{});
    py::dict d;
    d["e_o"] = s.e_o;
    d["x"] = s.fixed_point.xbar;
    d["y"] = s.fixed_point.ybar;
    d["g_eo"] = s.g_eo;
    d["omega_p"] = s.omega_p;
    d["status"] = to_string(s.analysis.status);
    return d;
  });
  m.def("fhn_simulate", [](double eps, int steps, double dx, double dy) {
    const FHNModel model;
    const FHNSearch s = fhn_search_eo(model);
    const FHNPerturbation p = fhn_perturbation(s.e_o, s.g_eo, eps);
    const FixedPoint fp = fhn_fixed_point(model, p.dc);
    const Trajectory tr = fhn_simulate(model, p.delta, steps, fp.xbar + dx, fp.ybar + dy);
    return py::make_tuple(tr.x, tr.y, oscillation_amplitude(tr.x).amplitude);
  }, py::arg("eps"), py::arg("steps") = 200000, py::arg("dx") = 0.05, py::arg("dy") = 0.0);
}
