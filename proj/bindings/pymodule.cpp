#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <cstdint>
#include <string>
#include <vector>

#include "metadistill/axioms.hpp"
#include "metadistill/diagnostics.hpp"
#include "metadistill/engine.hpp"
#include "metadistill/io.hpp"
#include "metadistill/reference_scenarios.hpp"
#include "metadistill/version.hpp"

namespace py = pybind11;
namespace md = metadistill;

namespace {

md::Distribution dist_of(const std::vector<double>& probs) {
  return md::Distribution::from_probabilities(probs);
}

std::vector<md::Distribution> dists_of(const std::vector<std::vector<double>>& raw) {
  std::vector<md::Distribution> out;
  out.reserve(raw.size());
  for (const auto& r : raw) out.push_back(dist_of(r));
  return out;
}

md::OperatorConfig operator_of(const std::string& operator_json) {
  return md::operator_config_from_json(md::parse_json_text(operator_json, "<operator>"));
}

}  // namespace

PYBIND11_MODULE(_core, m) {
  m.doc() = "Anchored recursive distillation laboratory (C++ core)";
  m.attr("__version__") = md::kVersion;

  py::register_exception_translator([](std::exception_ptr p) {
    try {
      if (p) std::rethrow_exception(p);
    } catch (const md::Error& e) {
      if (md::is_validation_error(e.code())) {
        PyErr_SetString(PyExc_ValueError, e.what());
      } else {
        PyErr_SetString(PyExc_RuntimeError, e.what());
      }
    }
  });

  m.def(
      "normalize",
      [](const std::vector<double>& raw) { return md::normalize(raw).probs(); },
      py::arg("raw"), "Rescale a strictly positive vector onto the simplex.");

  m.def(
      "divergence",
      [](const std::string& kind, const std::vector<double>& p, const std::vector<double>& q) {
        return md::divergence(md::divergence_kind_from_name(kind), dist_of(p), dist_of(q));
      },
      py::arg("kind"), py::arg("p"), py::arg("q"),
      "Pointwise divergence; kinds: kl, reverse_kl, total_variation, jensen_shannon, "
      "chi_squared, hellinger_squared.");

  m.def(
      "convex_combine",
      [](double lam, const std::vector<double>& p, const std::vector<double>& q) {
        return md::convex_combine(lam, dist_of(p), dist_of(q)).probs();
      },
      py::arg("lam"), py::arg("p"), py::arg("q"));

  m.def(
      "effective_anchor",
      [](const std::vector<double>& q, const std::vector<double>& t0) {
        return md::effective_anchor(dist_of(q), dist_of(t0));
      },
      py::arg("q"), py::arg("t0"),
      "min_i q_i / t0_i: the largest alpha for which q is an anchored mixture of t0.");

  m.def(
      "generation_weights",
      [](const std::string& scheme_json, int g) {
        const md::json j = md::parse_json_text(scheme_json, "<scheme>");
        md::json wrapper{{"kind", "generalized_mixture"},
                         {"alpha", 0.5},
                         {"generation_weight_scheme", j}};
        return md::generation_weights(
            md::operator_config_from_json(wrapper).generation_scheme, g);
      },
      py::arg("scheme_json"), py::arg("g"));

  m.def(
      "build_meta_teacher",
      [](const std::string& operator_json, double alpha_g,
         const std::vector<std::vector<double>>& teachers,
         const std::vector<std::vector<double>>& students) {
        return md::build_meta_teacher(operator_of(operator_json), alpha_g, dists_of(teachers),
                                      dists_of(students))
            .probs();
      },
      py::arg("operator_json"), py::arg("alpha_g"), py::arg("teachers"), py::arg("students"));

  m.def(
      "check_axioms",
      [](const std::string& operator_json, int trials, std::uint64_t seed) {
        return md::axiom_report_to_json(md::check_axioms(operator_of(operator_json), trials, seed))
            .dump();
      },
      py::arg("operator_json"), py::arg("trials") = 1000, py::arg("seed") = 1,
      "Run the axiom conformance harness; returns the report as a JSON string.");

  m.def(
      "run_scenario",
      [](const std::string& scenario_json) {
        const md::Scenario scenario =
            md::scenario_from_json(md::parse_json_text(scenario_json, "<scenario>"), "scenario");
        const md::GenerationTrace trace = md::run(scenario);
        std::optional<md::ConvergenceSummary> summary;
        if (trace.generations() >= 3 && trace.baseline_divergence() > 1e-14) {
          summary = md::summarize(trace);
        }
        return md::trace_to_json(trace, summary, scenario).dump();
      },
      py::arg("scenario_json"),
      "Simulate a scenario; returns the trace (with diagnostics) as a JSON string.");

  m.def(
      "fixed_point_residual",
      [](const std::string& operator_json, const std::vector<double>& t0,
         const std::vector<double>& candidate) {
        return md::fixed_point_residual(operator_of(operator_json),
                                        md::ConditionalModel::single(dist_of(t0)),
                                        md::ConditionalModel::single(dist_of(candidate)));
      },
      py::arg("operator_json"), py::arg("t0"), py::arg("candidate"));

  m.def("reference_anchored_scenario",
        [] { return md::scenario_to_json(md::reference_anchored_scenario()).dump(); });
  m.def("reference_drift_scenario",
        [] { return md::scenario_to_json(md::reference_drift_scenario()).dump(); });
}
