// Thin binding. Documents cross the boundary as JSON text; the python package decodes them.
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "vignette/codec.hpp"
#include "vignette/harness/harness.hpp"
#include "vignette/llm/mock.hpp"
#include "vignette/stats/stats.hpp"

namespace py = pybind11;
using namespace vignette;

namespace {

harness::RunOptions options(const std::string& mode, std::uint64_t seed, int activity_ticks, double ms_per_tick) {
  harness::RunOptions o;
  auto m = planner::parse_mode(mode);
  if (!m) throw std::invalid_argument("unknown mode '" + mode + "'");
  o.config.mode = *m;
  o.config.seed = seed;
  o.config.activity_ticks = activity_ticks;
  o.config.ms_per_tick = ms_per_tick;
  return o;
}

llm::Gateway gateway(const std::string& mock_json) {
  return llm::Gateway(std::make_shared<llm::ScriptedMock>(llm::MockScript::from_json(Json::parse(mock_json))));
}

stats::RankingDataset dataset(const std::vector<std::string>& conditions, const std::vector<std::vector<int>>& ranks) {
  stats::RankingDataset d;
  d.conditions = conditions;
  d.ranks = ranks;
  for (std::size_t i = 0; i < ranks.size(); ++i) d.evaluators.push_back(std::to_string(i + 1));
  stats::validate(d);
  return d;
}

}  // namespace

PYBIND11_MODULE(_core, m) {
  m.doc() = "Interactive vignette engine: spec codec, trace replay and ranking statistics";

  static PyObject* spec_error = py::register_exception<SpecError>(m, "SpecError", PyExc_ValueError).ptr();
  py::register_exception<stats::DatasetError>(m, "DatasetError", PyExc_ValueError);
  py::register_exception<llm::ScriptError>(m, "ScriptError", PyExc_ValueError);
  // InvalidSpecError keeps its structured report on the exception object
  py::register_exception_translator([](std::exception_ptr p) {
    try {
      if (p) std::rethrow_exception(p);
    } catch (const InvalidSpecError& e) {
      py::object err = py::handle(spec_error)(e.what());
      err.attr("violations") = to_json(e.report()).dump();
      PyErr_SetObject(spec_error, err.ptr());
    }
  });

  m.def("canonicalize_spec", [](const std::string& text) { return encode_spec(decode_spec(text)); },
        "Decode, validate and re-encode a spec document in canonical form.");
  m.def("validate_spec", [](const std::string& text) { return to_json(validate_spec(spec_from_json(Json::parse(text)))).dump(); },
        "Violation report as JSON text, without raising on invalid specs.");
  m.def("generate_spec", [](std::uint64_t seed) { return encode_spec(harness::generate_spec(seed)); }, py::arg("seed"));

  m.def(
      "run_trace",
      [](const std::string& spec, const std::string& trace, const std::string& mock, const std::string& mode, std::uint64_t seed,
         int activity_ticks, double ms_per_tick) {
        const auto s = decode_spec(spec);
        const auto t = harness::trace_from_json(Json::parse(trace));
        auto gw = gateway(mock);
        harness::RunResult r;
        {
          py::gil_scoped_release release;
          r = harness::run_trace(s, t, gw, options(mode, seed, activity_ticks, ms_per_tick));
        }
        Json out = {{"ended", r.ended},
                    {"final_tick", r.final_tick},
                    {"bottleneck_safe", r.ok()},
                    {"problems", r.problems},
                    {"table", runtime::to_json(r.table)},
                    {"table_csv", runtime::to_csv(r.table, s)}};
        return std::make_pair(out.dump(), runtime::to_ndjson(r.log));
      },
      py::arg("spec"), py::arg("trace"), py::arg("mock"), py::arg("mode") = "cd", py::arg("seed") = 1, py::arg("activity_ticks") = 80,
      py::arg("ms_per_tick") = 100.0);
  m.def(
      "random_trace",
      [](const std::string& spec, const std::string& mock, std::uint64_t trace_seed, const std::string& mode, std::uint64_t seed) {
        auto gw = gateway(mock);
        return harness::to_json(harness::random_trace(decode_spec(spec), gw, trace_seed, options(mode, seed, 80, 100.0))).dump();
      },
      py::arg("spec"), py::arg("mock"), py::arg("trace_seed"), py::arg("mode") = "cd", py::arg("seed") = 1);

  m.def("parse_rankings", [](const std::string& text) {
    const auto d = stats::parse_rankings_csv(text);
    return std::make_pair(d.conditions, d.ranks);
  });
  m.def("friedman", [](const std::vector<std::string>& c, const std::vector<std::vector<int>>& r) {
    const auto f = stats::friedman_test(dataset(c, r));
    return py::dict(py::arg("chi_square") = f.chi_square, py::arg("df") = f.df, py::arg("p_value") = f.p_value, py::arg("n") = f.n,
                    py::arg("k") = f.k, py::arg("rank_sums") = f.rank_sums);
  });
  m.def("mean_rankings", [](const std::vector<std::string>& c, const std::vector<std::vector<int>>& r) { return stats::mean_rankings(dataset(c, r)); });
  m.def("nemenyi", [](const std::vector<std::string>& c, const std::vector<std::vector<int>>& r) { return stats::nemenyi_posthoc(dataset(c, r)); });
  m.def("pairwise_table", [](const std::vector<std::string>& c, const std::vector<std::vector<int>>& r, double alpha) {
    const auto d = dataset(c, r);
    return stats::format_pairwise_table(d, stats::nemenyi_posthoc(d), alpha);
  }, py::arg("conditions"), py::arg("ranks"), py::arg("alpha") = 0.01);
  m.def("critical_difference", &stats::nemenyi_critical_difference, py::arg("k"), py::arg("n"), py::arg("alpha") = 0.05);
  m.def("studentized_range_quantile", &stats::studentized_range_quantile, py::arg("alpha"), py::arg("k"));
}
