#include <pybind11/numpy.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <string>
#include <vector>

#include "tandem/boxma.hpp"
#include "tandem/chain.hpp"
#include "tandem/experiment.hpp"
#include "tandem/heavytail.hpp"
#include "tandem/kappa.hpp"
#include "tandem/numerics.hpp"
#include "tandem/random.hpp"
#include "tandem/tandemsim.hpp"

namespace py = pybind11;
using namespace tandem;

namespace {

py::array_t<double> to_array(const std::vector<double>& v) {
  py::array_t<double> a(static_cast<py::ssize_t>(v.size()));
  std::copy(v.begin(), v.end(), a.mutable_data());
  return a;
}

py::dict simulate_py(double lambda, double nu, double b, std::size_t busy_periods, std::uint64_t seed) {
  const ServiceDistribution dist(nu, b);
  RandomStream rng(seed);
  SimulationResult res;
  {
    py::gil_scoped_release release;
    res = simulate(lambda, dist, busy_periods, rng);
  }
  std::vector<double> m, idle, r, carry, jobs;
  for (const auto& p : res.busy_periods) {
    m.push_back(p.max_service);
    idle.push_back(p.idle_after);
    r.push_back(p.r_value);
    carry.push_back(p.carry_in);
    jobs.push_back(static_cast<double>(p.jobs));
  }
  const auto rec = verify_recursion(res.busy_periods);
  py::dict out;
  out["max_service"] = to_array(m);
  out["idle"] = to_array(idle);
  out["r"] = to_array(r);
  out["carry_in"] = to_array(carry);
  out["jobs"] = to_array(jobs);
  out["recursion_violations"] = rec.violations.size();
  out["recursion_max_rel_error"] = rec.max_rel_error;
  return out;
}

py::tuple run_py(const std::string& config, const std::string& out_dir) {
  nlohmann::json doc;
  try {
    doc = nlohmann::json::parse(config);
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError("", e.what());
  }
  const auto spec = ExperimentSpec::from_json(doc);
  RunReport report;
  {
    py::gil_scoped_release release;
    report = run(spec);
    if (!out_dir.empty()) write_outputs(report, out_dir);
  }
  py::dict tables;
  for (const auto& t : report.tables) {
    py::dict cols;
    for (const auto& c : t.columns) cols[py::str(c)] = to_array(t.column(c));
    tables[py::str(t.name)] = cols;
  }
  return py::make_tuple(report.to_json().dump(), tables);
}

}  // namespace

PYBIND11_MODULE(_core, m) {
  m.doc() = "Heavy-traffic laboratory for a tandem queue with reused Pareto service times";
  py::register_exception<ConfigError>(m, "ConfigError", PyExc_ValueError);
  py::register_exception<NumericalError>(m, "NumericalError", PyExc_ArithmeticError);

  m.attr("__version__") = version_string();

  m.def("tail_constant", &tail_constant, py::arg("nu"));
  m.def("pareto_laplace", &pareto_laplace, py::arg("s"), py::arg("nu"));

  py::class_<ServiceDistribution>(m, "ServiceDistribution")
      .def(py::init<double, double>(), py::arg("nu"), py::arg("scale") = 1.0)
      .def_property_readonly("nu", &ServiceDistribution::nu)
      .def_property_readonly("scale", &ServiceDistribution::scale)
      .def("tail", &ServiceDistribution::tail)
      .def("cdf", &ServiceDistribution::cdf)
      .def("density", &ServiceDistribution::density)
      .def("mean", &ServiceDistribution::mean);

  m.def(
      "solve_m",
      [](double lambda, double nu, double b, double w) { return solve_m_at(lambda, ServiceDistribution(nu, b), w); },
      py::arg("lam"), py::arg("nu"), py::arg("b"), py::arg("w"));
  m.def(
      "solve_kappa",
      [](double lambda, double nu, double gamma, double y) { return solve_kappa(KappaParams{lambda, nu, gamma}, y); },
      py::arg("lam"), py::arg("nu"), py::arg("gamma"), py::arg("y"));

  py::class_<LimitCdf>(m, "LimitCdf")
      .def(py::init([](double lambda, double nu, double gamma) {
             return LimitCdf{KappaFunction(KappaParams{lambda, nu, gamma})};
           }),
           py::arg("lam"), py::arg("nu"), py::arg("gamma"))
      .def("kappa", [](const LimitCdf& c, double y) { return c.kappa().value(y); }, py::arg("y"))
      .def("phi", &LimitCdf::phi, py::arg("t"), py::arg("x"))
      .def("density", &LimitCdf::density, py::arg("t"), py::arg("x"))
      .def("quantile", &LimitCdf::quantile, py::arg("t"), py::arg("u"))
      .def(
          "phi_infinity",
          [](const LimitCdf& c, double x) { return c.phi_infinity(x).value; }, py::arg("x"));

  m.def(
      "schedule",
      [](double nu, double b, double gamma, double n) {
        const auto s = schedule(ServiceDistribution(nu, b), gamma, n);
        py::dict d;
        d["n"] = s.n;
        d["lambda_n"] = s.lambda_n;
        d["rho_n"] = s.rho_n;
        d["lambda"] = s.lambda;
        return d;
      },
      py::arg("nu"), py::arg("b"), py::arg("gamma"), py::arg("n"));

  m.def("simulate", &simulate_py, py::arg("lam"), py::arg("nu"), py::arg("b"), py::arg("busy_periods"),
        py::arg("seed") = 1);
  m.def("_run", &run_py, py::arg("config"), py::arg("out_dir") = "");
  m.def("kinds", &kind_names);
}
