#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <filesystem>
#include <sstream>

#include "tailgen/config.hpp"
#include "tailgen/dataset.hpp"
#include "tailgen/errors.hpp"
#include "tailgen/pipeline.hpp"
#include "tailgen/templates.hpp"

namespace py = pybind11;

namespace {

py::dict summary_to_dict(const tailgen::RunSummary& s) {
  py::dict d;
  py::list classes;
  for (const auto& c : s.classes) {
    py::dict row;
    row["class_id"] = c.class_id;
    row["label"] = c.label;
    row["original"] = c.original;
    row["captioned"] = c.captioned;
    row["expanded"] = c.expanded_kept;
    row["generated"] = c.generated;
    row["accepted"] = c.accepted;
    row["rejected"] = c.rejected;
    row["status"] = c.status;
    classes.append(row);
  }
  d["classes"] = classes;
  d["stalled_classes"] = s.stalled_classes;
  d["accepted_total"] = s.total_accepted;
  d["rejected_total"] = s.total_rejected;
  d["mixed_emitted"] = s.mixed_emitted;
  d["out_dir"] = s.out_dir.string();
  py::dict calls;
  for (int i = 0; i < tailgen::kRequestKindCount; ++i) {
    auto kind = static_cast<tailgen::RequestKind>(i);
    calls[py::str(std::string(tailgen::kind_name(kind)))] = s.tallies.for_kind(kind);
  }
  calls["cache_hits"] = s.tallies.cache_hits;
  calls["retries"] = s.tallies.retries;
  d["backend_calls"] = calls;
  return d;
}

}  // namespace

PYBIND11_MODULE(_core, m) {
  m.doc() = "Long-tail dataset curation and augmentation pipeline.";

  py::register_exception<tailgen::ValidationError>(m, "ValidationError", PyExc_ValueError);
  py::register_exception<tailgen::BackendError>(m, "BackendError", PyExc_RuntimeError);
  py::register_exception<tailgen::IntegrityError>(m, "IntegrityError", PyExc_RuntimeError);

  m.def(
      "run",
      [](const std::string& manifest, const std::string& out, const std::string& config) {
        tailgen::PipelineConfig cfg;
        if (!config.empty()) {
          // accept either a path to a config file or inline key=value text
          if (std::filesystem::exists(config)) {
            cfg = tailgen::load_config(config);
          } else {
            std::istringstream in(config);
            cfg = tailgen::parse_config_text(in);
          }
        }
        return summary_to_dict(tailgen::run_pipeline(cfg, manifest, out));
      },
      py::arg("manifest"), py::arg("out"), py::arg("config") = std::string(),
      "Execute a full generation run into the given directory. The config "
      "argument may be a file path or inline key=value lines.");

  m.def(
      "resume",
      [](const std::string& out) { return summary_to_dict(tailgen::resume_run(out)); },
      py::arg("out"), "Continue an interrupted run.");

  m.def(
      "emit_mix",
      [](const std::string& out, int num, std::uint64_t seed) {
        return summary_to_dict(tailgen::emit_mix_only(out, num, seed));
      },
      py::arg("out"), py::arg("num"), py::arg("seed"),
      "Re-emit mixed samples from a finished run's accepted pool.");

  m.def(
      "manifest_stats",
      [](const std::string& path) {
        tailgen::DatasetManifest manifest = tailgen::load_manifest(path);
        tailgen::SplitStats stats = tailgen::split_stats(manifest);
        py::dict d;
        d["classes"] = manifest.num_classes;
        d["many"] = stats.many_count;
        d["medium"] = stats.medium_count;
        d["few"] = stats.few_count;
        d["imbalance_factor"] = stats.imbalance_factor;
        return d;
      },
      py::arg("path"), "Split statistics for a dataset manifest.");

  m.def("render_description", &tailgen::render_template1, py::arg("label"),
        py::arg("features"), py::arg("scene"),
        "Render the canonical one-line class description.");

  m.def(
      "parse_description",
      [](const std::string& text, const std::string& label) {
        tailgen::Description d = tailgen::parse_template1(text, label);
        py::dict out;
        out["features"] = d.features;
        out["scene"] = d.scene;
        out["canonical"] = d.raw_text;
        return out;
      },
      py::arg("text"), py::arg("label"),
      "Parse a class description sentence into features and scene.");

  m.def(
      "normalize_text",
      [](const std::string& text) { return tailgen::normalize_text(text); },
      py::arg("text"), "Dedup normalization: lowercase, collapsed whitespace.");
}
