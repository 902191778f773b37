#include <optional>
#include <set>
#include <string>
#include <vector>

#include <pybind11/pybind11.h>
#include <pybind11/stl.h>
#include <pybind11/stl/filesystem.h>

#include "livesurvey/config.hpp"
#include "livesurvey/diff.hpp"
#include "livesurvey/document.hpp"
#include "livesurvey/error.hpp"
#include "livesurvey/metrics.hpp"
#include "livesurvey/mock.hpp"
#include "livesurvey/report.hpp"
#include "livesurvey/text.hpp"

namespace py = pybind11;
using namespace livesurvey;

namespace {

py::dict summary_row(const SummaryRow& row) {
  py::dict d;
  d["method"] = row.method;
  d["metric"] = row.metric;
  d["group"] = row.group;
  d["n"] = row.n;
  d["mean"] = row.mean;
  d["stddev"] = row.stddev;
  return d;
}

}  // namespace

PYBIND11_MODULE(_core, m) {
  m.doc() = "Survey maintenance metrics, diffing and benchmark runner";

  static py::exception<Error> error(m, "Error");
  py::register_exception_translator([](std::exception_ptr p) {
    try {
      if (p) std::rethrow_exception(p);
    } catch (const Error& e) {
      py::object exc = static_cast<py::object&>(error)(std::string(to_string(e.kind())) + ": " + e.what());
      exc.attr("kind") = to_string(e.kind());
      PyErr_SetObject(error.ptr(), exc.ptr());
    }
  });

  m.def("rouge_l", &rouge_l, py::arg("candidate"), py::arg("reference"), py::arg("beta") = 1.0);
  m.def("bleu_4", &bleu_4, py::arg("candidate"), py::arg("reference"));
  m.def("cosine", [](const std::vector<double>& x, const std::vector<double>& y) {
    return cosine(x, y);
  });
  m.def("tokenize", &tokenize, py::arg("text"));
  m.def("lcs_length", [](const std::vector<int>& a, const std::vector<int>& b) {
    return lcs_length(a, b);
  });

  m.def("validate_document", [](const std::string& raw) { validate_document(parse_document(raw)); },
        py::arg("survey_json"), "Parses and validates a survey document; raises Error on failure.");
  m.def("normalize_document", [](const std::string& raw) {
    return serialize_document(parse_document(raw));
  }, py::arg("survey_json"));
  m.def("document_edits", [](const std::string& before, const std::string& after,
                            const std::set<std::string>& scope) {
    const EditScript script = token_diff(parse_document(before), parse_document(after));
    py::dict d;
    d["delta_tokens"] = delta_tokens(script);
    d["delta_out"] = delta_out(script, scope);
    return d;
  }, py::arg("before"), py::arg("after"), py::arg("scope") = std::set<std::string>{},
     "Token edits between two survey documents and how many fall outside `scope` regions.");
  m.def("section_region", [](const std::string& id) { return section_region(id); });
  m.def("table_region", [](const std::string& id) { return table_region(id); });

  m.def("hash_embed", [](const std::vector<std::string>& texts, std::uint64_t seed,
                         std::size_t dimension) {
    HashEmbedder embedder(seed, dimension);
    return embedder.embed(texts);
  }, py::arg("texts"), py::arg("seed") = 0, py::arg("dimension") = 64);

  m.def("run_benchmark", [](const std::filesystem::path& config_path,
                            const std::vector<std::string>& methods,
                            const std::optional<std::filesystem::path>& out_dir) {
    const RunConfig config = load_config(config_path);
    BenchmarkRun run;
    {
      py::gil_scoped_release release;
      run = run_benchmark(config, methods);
      if (out_dir) write_report(*out_dir, run.header, run.evaluations);
    }
    py::list rows;
    for (const auto& row : summarize(run.evaluations)) rows.append(summary_row(row));
    py::dict result;
    result["summary"] = rows;
    result["text"] = summary_text(run.header, summarize(run.evaluations));
    result["steps"] = run.evaluations.size();
    return result;
  }, py::arg("config"), py::arg("methods") = std::vector<std::string>{},
     py::arg("out_dir") = std::nullopt);
}
