// Python extension: JSON-described specifications in, NumPy arrays out.
#include <pybind11/eigen.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <optional>
#include <sstream>

#include "opmeans/campaign.hpp"

namespace py = pybind11;
using namespace opmeans;

namespace {

Ensemble to_ensemble(const std::vector<Matrix>& ms) {
  Ensemble as;
  as.reserve(ms.size());
  for (const Matrix& m : ms) as.push_back(validate_spd(m));
  return as;
}

SolverConfig solver(std::optional<double> tol, std::optional<int> max_iters) {
  SolverConfig cfg;
  if (tol) cfg.dt_tol = *tol;
  if (max_iters) cfg.max_iters = *max_iters;
  cfg.validate();
  return cfg;
}

py::dict result_dict(const MeanResult& r) {
  py::dict d;
  d["value"] = r.value.matrix();
  d["iterations"] = r.iterations;
  d["residual_dt"] = r.residual_dt;
  d["enclosure_gap"] = r.enclosure_gap ? py::cast(*r.enclosure_gap) : py::none();
  return d;
}

}  // namespace

PYBIND11_MODULE(_opmeans, m) {
  m.doc() = "Operator means of positive definite matrices";

  // The module attribute keeps the exception type alive for the translator.
  static PyObject* error_type = py::exception<Error>(m, "OpmeansError").ptr();
  py::register_exception_translator([](std::exception_ptr p) {
    try {
      if (p) std::rethrow_exception(p);
    } catch (const Error& e) {
      py::object exc = py::reinterpret_borrow<py::object>(error_type)(e.what());
      exc.attr("code") = std::string(to_string(e.code()));
      PyErr_SetObject(error_type, exc.ptr());
    }
  });

  m.def("kantorovich", &kantorovich, py::arg("h"), py::arg("p"));

  m.def(
      "rep_eval",
      [](const std::string& f, double t) { return rep_eval(repfn_from_json(Json::parse(f)), t); },
      py::arg("spec_json"), py::arg("t"));

  m.def(
      "deformed_rep",
      [](const std::string& tau, const std::string& sigma, double t) {
        return deformed_rep(repfn_from_json(Json::parse(tau)), repfn_from_json(Json::parse(sigma)), t);
      },
      py::arg("tau_json"), py::arg("sigma_json"), py::arg("t"));

  m.def(
      "two_var_mean",
      [](const std::string& f, const Matrix& a, const Matrix& b) {
        return two_var_mean(repfn_from_json(Json::parse(f)), validate_spd(a), validate_spd(b)).matrix();
      },
      py::arg("spec_json"), py::arg("a"), py::arg("b"));

  m.def(
      "mean",
      [](const std::string& spec, const std::vector<Matrix>& ms, std::optional<double> tol,
         std::optional<int> max_iters) {
        const SolverConfig cfg = solver(tol, max_iters);
        const Ensemble as = to_ensemble(ms);
        MeanResult r;
        {
          py::gil_scoped_release release;
          r = evaluate(multimean_from_json(Json::parse(spec), cfg), as, cfg);
        }
        return result_dict(r);
      },
      py::arg("spec_json"), py::arg("matrices"), py::arg("tol") = py::none(),
      py::arg("max_iters") = py::none());

  m.def(
      "thompson_distance",
      [](const Matrix& a, const Matrix& b) { return thompson_distance(validate_spd(a), validate_spd(b)); },
      py::arg("a"), py::arg("b"));

  m.def(
      "random_spd",
      [](Eigen::Index dim, double lo, double hi, std::uint64_t seed) {
        return random_spd(dim, lo, hi, seed).matrix();
      },
      py::arg("dim"), py::arg("m"), py::arg("M"), py::arg("seed"));

  m.def(
      "run_campaign",
      [](const std::string& config, int threads) {
        const CampaignConfig c = campaign_from_json(Json::parse(config));
        std::ostringstream out;
        CampaignSummary s;
        {
          py::gil_scoped_release release;
          s = run_campaign(c, {}, threads, out);
        }
        return py::make_tuple(out.str(), campaign_exit_code(s));
      },
      py::arg("config_json"), py::arg("threads") = 1);

  m.def(
      "search",
      [](const std::string& tau, double r, const std::string& mode) -> py::object {
        const auto cx = optimality_scan(repfn_from_json(Json::parse(tau)), r, parse_optimality_mode(mode));
        if (!cx) return py::none();
        return py::str(to_json(*cx).dump());
      },
      py::arg("tau_json"), py::arg("r"), py::arg("mode"));
}
