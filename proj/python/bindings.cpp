#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "scenecraft/error.hpp"
#include "scenecraft/metrics/metrics.hpp"
#include "scenecraft/scene/serialize.hpp"
#include "scenecraft/script/driver.hpp"
#include "scenecraft/stochastic/noise.hpp"

namespace py = pybind11;
using namespace scenecraft;
using nlohmann::json;

// JSON crosses the boundary as text; the Python package wraps it in dicts.
PYBIND11_MODULE(_core, m) {
  m.doc() = "Scene construction core";

  PYBIND11_CONSTINIT static py::gil_safe_call_once_and_store<py::object> error_type;
  error_type.call_once_and_store_result([&]() { return py::exception<Error>(m, "Error"); });
  py::register_exception_translator([](std::exception_ptr p) {
    try {
      if (p) std::rethrow_exception(p);
    } catch (const Error& e) {
      py::object type = error_type.get_stored();
      py::object inst = type(py::str(e.what()));
      inst.attr("code") = std::string(to_string(e.code()));
      inst.attr("details") = e.details().dump();
      PyErr_SetObject(type.ptr(), inst.ptr());
    }
  });

  py::class_<scene::Scene>(m, "Scene")
      .def(py::init<>())
      .def_static("from_json", [](const std::string& text) { return scene::deserialize_scene(text); })
      .def_static("load", [](const std::string& path) { return scene::load_scene(path); })
      .def("to_json", [](const scene::Scene& s) { return scene::serialize_scene(s); })
      .def("save", [](const scene::Scene& s, const std::string& path) { scene::save_scene(path, s); })
      .def_readwrite("seed", &scene::Scene::seed)
      .def_property_readonly("object_ids",
                             [](const scene::Scene& s) {
                               std::vector<std::string> ids;
                               for (const auto& [id, o] : s.objects) ids.push_back(id);
                               return ids;
                             })
      .def_property_readonly("room_ids",
                             [](const scene::Scene& s) {
                               std::vector<std::string> ids;
                               for (const auto& r : s.rooms) ids.push_back(r.id);
                               return ids;
                             })
      .def("__eq__", [](const scene::Scene& a, const scene::Scene& b) { return a == b; })
      .def("__len__", [](const scene::Scene& s) { return s.objects.size(); });

  m.def("op_names", &script::op_names);

  m.def(
      "apply_op",
      [](scene::Scene& s, const std::string& op, const std::string& args, std::uint64_t seed,
         const std::string& style, const std::string& prompt) {
        Rng rng = derive_stream(seed, 0, op);
        return script::apply_op(s, op, json::parse(args), rng, {style, prompt}).dump();
      },
      py::arg("scene"), py::arg("op"), py::arg("args"), py::arg("seed") = 0, py::arg("style") = "none",
      py::arg("prompt") = "", "Runs one operation in place on the scene; returns the report as JSON text.");

  m.def(
      "run_script",
      [](const std::string& script_text, const scene::Scene& initial, std::optional<std::string> style) {
        const auto script = script::parse_script(json::parse(script_text));
        script::RunOptions opts;
        opts.style = std::move(style);
        auto r = script::run_script(script, initial, opts);
        return py::make_tuple(r.scene, script::log_to_json(r).dump());
      },
      py::arg("script"), py::arg("scene") = scene::Scene{}, py::arg("style") = std::nullopt);

  m.def(
      "metrics_report",
      [](const scene::Scene& s, double hr, std::uint64_t seed, int samples) {
        metrics::ReportConfig cfg;
        cfg.robot_half_width = hr;
        cfg.seed = seed;
        cfg.oob_samples = samples;
        return metrics::to_json(metrics::metrics_report(s, cfg)).dump();
      },
      py::arg("scene"), py::arg("hr") = 0.35, py::arg("seed") = 0, py::arg("samples") = 256);

  m.def("select_style", [](const std::string& prompt) { return std::string(stochastic::to_string(stochastic::select_style(prompt))); });

  m.def(
      "apply_noise",
      [](double x, double y, double theta_deg, const std::string& category, const std::string& style,
         std::uint64_t seed) {
        Rng rng = derive_stream(seed, 0, "noise");
        const auto p = stochastic::apply_noise(geom::Pose2(x, y, theta_deg), scene::category_from_string(category),
                                               stochastic::style_from_string(style), rng);
        return py::make_tuple(p.x, p.y, p.theta_deg);
      },
      py::arg("x"), py::arg("y"), py::arg("theta_deg"), py::arg("category"), py::arg("style"), py::arg("seed") = 0);
}
