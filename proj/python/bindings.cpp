#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "fdra/dcpower.hpp"
#include "fdra/experiment.hpp"
#include "fdra/pairwise.hpp"
#include "fdra/schemes.hpp"

namespace py = pybind11;
using namespace fdra;

namespace {

// Runs a config given as text and returns (output text, infeasible count).
std::pair<std::string, int> run_config(const std::string& text, int threads, const std::string& format) {
  const auto config = experiment::parse_config(text);
  const bool json = format.empty() ? config.format == experiment::OutputFormat::Json : format == "json";
  if (!format.empty() && format != "csv" && format != "json") throw py::value_error("format must be csv or json");
  if (config.axis == experiment::SweepAxis::Convergence) {
    const auto t = experiment::run_convergence(config, threads);
    return {json ? experiment::to_json(config, t) : experiment::to_csv(t), t.infeasible_outputs};
  }
  const auto t = experiment::run_experiment(config, threads);
  return {json ? experiment::to_json(config, t) : experiment::to_csv(t), t.infeasible_outputs};
}

py::dict replay_drop(const std::string& text, double axis_value, int drop, const std::string& scheme_name) {
  const auto config = experiment::parse_config(text);
  const auto d = experiment::draw_drop(config, axis_value, drop);
  const auto scheme = schemes::parse_scheme(scheme_name);
  if (!scheme) throw py::value_error("unknown scheme '" + scheme_name + "'");
  schemes::SchemeResult r;
  const double sum = schemes::run_scheme(*scheme, d.scenario, d.channels, &r);
  py::dict out;
  out["seed"] = d.seed;
  out["sum_rate"] = sum;
  out["dl_user"] = r.assignment.dl_user;
  out["ul_user"] = r.assignment.ul_user;
  out["p_dl"] = r.powers.dl;
  out["p_ul"] = r.powers.ul;
  if (scheme != schemes::Scheme::UpperBound) {
    out["feasible"] = check_feasible(d.scenario, r.assignment, r.powers).feasible;
  }
  return out;
}

}  // namespace

PYBIND11_MODULE(_core, m) {
  m.doc() = "Full-duplex OFDMA resource allocation";

  py::register_exception<experiment::ConfigError>(m, "ConfigError", PyExc_ValueError);

  py::class_<pairwise::PairInstance>(m, "PairInstance")
      .def(py::init<>())
      .def_readwrite("w_k", &pairwise::PairInstance::w_k)
      .def_readwrite("v_j", &pairwise::PairInstance::v_j)
      .def_readwrite("g_k", &pairwise::PairInstance::g_k)
      .def_readwrite("g_j", &pairwise::PairInstance::g_j)
      .def_readwrite("I_kj", &pairwise::PairInstance::I_kj)
      .def_readwrite("N_k", &pairwise::PairInstance::N_k)
      .def_readwrite("N0", &pairwise::PairInstance::N0)
      .def_readwrite("P_max1", &pairwise::PairInstance::P_max1)
      .def_readwrite("P_max2", &pairwise::PairInstance::P_max2)
      .def_readwrite("beta", &pairwise::PairInstance::beta);

  py::class_<pairwise::PairSolution>(m, "PairSolution")
      .def_readonly("p_dl", &pairwise::PairSolution::p_dl)
      .def_readonly("p_ul", &pairwise::PairSolution::p_ul)
      .def_readonly("objective", &pairwise::PairSolution::objective)
      .def_property_readonly("candidate",
                             [](const pairwise::PairSolution& s) { return std::string(pairwise::to_string(s.candidate)); });

  m.def("pair_objective", &pairwise::pair_objective, py::arg("instance"), py::arg("p_dl"), py::arg("p_ul"));
  m.def(
      "solve_pair",
      [](const pairwise::PairInstance& inst, bool exclusive) {
        return pairwise::solve_pair(inst, exclusive ? pairwise::CandidateSet::Exclusive : pairwise::CandidateSet::Full);
      },
      py::arg("instance"), py::arg("exclusive") = false);

  m.def("waterfill", &dcpower::waterfill, py::arg("weights"), py::arg("gains"), py::arg("noises"), py::arg("budget"));

  m.def("templates", &experiment::builtin_template_names);
  m.def("schemes", [] {
    std::vector<std::string> names;
    for (auto s : schemes::all_schemes()) names.emplace_back(schemes::to_string(s));
    return names;
  });
  m.def("parse_beta", &experiment::parse_beta, py::arg("text"));
  m.def("run_config", &run_config, py::arg("text"), py::arg("threads") = 1, py::arg("format") = "",
        py::call_guard<py::gil_scoped_release>(),
        "Run an experiment config given as text. Returns (output, infeasible_outputs).");
  m.def("replay_drop", &replay_drop, py::arg("text"), py::arg("axis_value"), py::arg("drop"), py::arg("scheme"),
        "Regenerate one drop of a config and run one scheme on it.");
}
