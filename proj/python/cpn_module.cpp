// Python bindings: posterior math, the testbench registry and single runs.
// Configs and traces cross the boundary as JSON text.
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "json.hpp"

#include "cpn/error.hpp"
#include "cpn/fom.hpp"
#include "cpn/harness.hpp"
#include "cpn/optimizer.hpp"
#include "cpn/posterior.hpp"
#include "cpn/testbench.hpp"

namespace py = pybind11;
using namespace pybind11::literals;

namespace {

std::vector<double> to_vector(std::span<const double> s) { return {s.begin(), s.end()}; }

const cpn::Testbench& bench(const std::string& name) { return cpn::find_testbench(name); }

}  // namespace

PYBIND11_MODULE(_cpn, m) {
  m.doc() = "Discrete-posterior Bayesian optimization core";

  auto base = py::register_exception<cpn::Error>(m, "CpnError");
  py::register_exception<cpn::ConfigError>(m, "ConfigError", base);
  py::register_exception<cpn::ContractError>(m, "ContractError", base);
  py::register_exception<cpn::InvalidPosterior>(m, "InvalidPosterior", base);
  py::register_exception<cpn::BackendError>(m, "BackendError", base);

  py::class_<cpn::DiscretePosterior>(m, "DiscretePosterior")
      .def(py::init<std::vector<double>, std::vector<double>>(), "centers"_a, "probs"_a)
      .def_property_readonly("centers", [](const cpn::DiscretePosterior& p) { return to_vector(p.centers()); })
      .def_property_readonly("probs", [](const cpn::DiscretePosterior& p) { return to_vector(p.probs()); })
      .def("quantile", &cpn::DiscretePosterior::quantile, "u"_a)
      .def("__len__", &cpn::DiscretePosterior::size)
      .def("__repr__", [](const cpn::DiscretePosterior& p) {
        return "<DiscretePosterior with " + std::to_string(p.size()) + " bins>";
      });

  m.def("moments", [](const cpn::DiscretePosterior& p) {
    const auto mo = cpn::moments(p);
    return py::make_tuple(mo.mean, mo.variance);
  }, "Mean and variance of a discrete posterior.");
  m.def("dei", &cpn::dei, "posterior"_a, "f_star"_a);
  m.def("closed_form_ei", [](double mean, double std, double f_star) {
    return cpn::closed_form_ei({mean, std}, f_star);
  }, "mean"_a, "std"_a, "f_star"_a);
  m.def("discretize_gaussian", [](double mean, double std, std::size_t bins, double span_sigmas) {
    return cpn::discretize_gaussian({mean, std}, bins, span_sigmas);
  }, "mean"_a, "std"_a, "bins"_a, "span_sigmas"_a = cpn::kDefaultSpanSigmas);
  m.def("feasibility_mass", &cpn::feasibility_mass, "posterior"_a, "threshold"_a);

  m.def("testbenches", [] {
    std::vector<std::string> names;
    for (const auto& [name, tb] : cpn::registry()) names.push_back(name);
    return names;
  });
  m.def("bounds", [](const std::string& name) {
    const auto& tb = bench(name);
    return py::make_tuple(to_vector(tb.space.lower()), to_vector(tb.space.upper()));
  }, "testbench"_a);
  m.def("metric_names", [](const std::string& name) { return bench(name).specs.names(); }, "testbench"_a);
  m.def("evaluate", [](const std::string& name, const std::vector<double>& x) {
    return cpn::evaluate_aligned(bench(name), x);
  }, "testbench"_a, "x"_a, "Metrics in spec order.");
  m.def("fom", [](const std::string& name, const std::vector<double>& metrics) {
    return cpn::fom(bench(name).specs, metrics);
  }, "testbench"_a, "metrics"_a);

  m.def("r_squared", [](const std::vector<double>& predictions, const std::vector<double>& truths) {
    return cpn::r_squared(predictions, truths);
  }, "predictions"_a, "truths"_a);

  // JSON text in, JSON text out; the Python wrapper does the (de)serialization
  m.def("run_json", [](const std::string& config) {
    const auto rc = cpn::run_config_from_json(nlohmann::json::parse(config));
    cpn::RunTrace trace;
    {
      py::gil_scoped_release release;
      trace = cpn::run(rc);
    }
    return cpn::to_json(trace).dump();
  }, "config"_a);
  m.def("random_search_json", [](const std::string& config) {
    const auto rc = cpn::run_config_from_json(nlohmann::json::parse(config));
    py::gil_scoped_release release;
    return cpn::to_json(cpn::random_search(rc)).dump();
  }, "config"_a);
  m.def("audit_trace_json", [](const std::string& trace) {
    return cpn::audit_trace(cpn::trace_from_json(nlohmann::json::parse(trace)));
  }, "trace"_a);
}
