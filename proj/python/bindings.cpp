#include <pybind11/pybind11.h>
#include <pybind11/stl.h>
#include <pybind11/stl/filesystem.h>

#include "advattr/eval.hpp"
#include "advattr/experiment.hpp"
#include "advattr/losses.hpp"
#include "advattr/pareto.hpp"
#include "advattr/selfcheck.hpp"

namespace py = pybind11;
using namespace advattr;

namespace {

py::dict report_dict(const EvalReport& r) {
  py::list embedders;
  for (const auto& e : r.embedders) {
    py::dict d;
    d["name"] = e.name;
    d["holdout"] = e.holdout;
    d["tau"] = e.tau;
    d["asr"] = e.asr;
    embedders.append(d);
  }
  py::dict out;
  out["arm"] = r.arm;
  out["pair_count"] = r.pair_count;
  out["mean_mse"] = r.mean_mse;
  out["mean_stealthy_loss"] = r.mean_stealthy_loss;
  out["holdout_asr"] = r.holdout_asr();
  out["embedders"] = embedders;
  return out;
}

}  // namespace

PYBIND11_MODULE(_core, m) {
  m.doc() = "Attribute-space adversarial noise: world, losses, weight solver, runner";

  py::register_exception<ConfigError>(m, "ConfigError", PyExc_ValueError);
  py::register_exception<NumericError>(m, "NumericError", PyExc_ArithmeticError);
  py::register_exception<ShapeError>(m, "ShapeError", PyExc_ValueError);

  py::class_<WorldConfig>(m, "WorldConfig")
      .def(py::init<>())
      .def_readwrite("latent_dim", &WorldConfig::latent_dim)
      .def_readwrite("image_dim", &WorldConfig::image_dim)
      .def_readwrite("hidden_dim", &WorldConfig::hidden_dim)
      .def_readwrite("embed_dim", &WorldConfig::embed_dim)
      .def_readwrite("num_attributes", &WorldConfig::num_attributes)
      .def_readwrite("num_sources", &WorldConfig::num_sources)
      .def_readwrite("num_targets", &WorldConfig::num_targets)
      .def_readwrite("num_embedders", &WorldConfig::num_embedders)
      .def_readwrite("embedder_correlation", &WorldConfig::embedder_correlation)
      .def("validate", &WorldConfig::validate);

  py::class_<World>(m, "World")
      .def_readonly("config", &World::config)
      .def_readonly("seed", &World::seed)
      .def_readonly("source_codes", &World::source_codes)
      .def_readonly("source_images", &World::source_images)
      .def_readonly("target_images", &World::target_images)
      .def_property_readonly("attribute_names", [](const World& w) { return w.attributes.names; })
      .def_property_readonly("attribute_directions",
                             [](const World& w) { return w.attributes.directions; })
      .def_property_readonly("embedder_names",
                             [](const World& w) {
                               std::vector<std::string> names;
                               for (const auto& e : w.embedders) names.push_back(e.name);
                               return names;
                             })
      .def("checksum", &World::checksum)
      .def("synthesize", [](const World& w, const Vec& code) { return synthesize(w.generator, code); })
      .def("encode", [](const World& w, const Vec& image) { return encode(w.encoder, image); })
      .def("embed", [](const World& w, const std::string& name,
                       const Vec& image) { return embed(w.embedder(name), image); })
      .def("middle_features", [](const World& w, const std::string& name, const Vec& image) {
        return middle_features(w.embedder(name), image);
      });

  m.def("make_world", &make_world, py::arg("config"), py::arg("seed"));

  m.def("cosine_similarity", [](const Vec& a, const Vec& b) {
    if (a.size() != b.size()) throw ShapeError("cosine_similarity: length mismatch");
    return cosine_similarity(a, b);
  });

  m.def(
      "pareto_weights",
      [](const Vec& gs, const Vec& ga, double c1, double c2) {
        if (gs.size() != ga.size()) throw ShapeError("gradient length mismatch");
        const TradeoffWeights w = pareto_weights(GradientPair{gs, ga}, c1, c2);
        return std::make_pair(w.stealthy, w.adversarial);
      },
      py::arg("g_stealthy"), py::arg("g_adversarial"), py::arg("c1") = 0.1, py::arg("c2") = 0.1);
  m.def(
      "brute_force_weights",
      [](const Vec& gs, const Vec& ga, double c1, double c2, double resolution) {
        if (gs.size() != ga.size()) throw ShapeError("gradient length mismatch");
        const TradeoffWeights w = brute_force_weights(GradientPair{gs, ga}, c1, c2, resolution);
        return std::make_pair(w.stealthy, w.adversarial);
      },
      py::arg("g_stealthy"), py::arg("g_adversarial"), py::arg("c1") = 0.1, py::arg("c2") = 0.1,
      py::arg("resolution") = 1e-4);
  m.def("pareto_objective", [](const Vec& gs, const Vec& ga, double w1, double w2) {
    if (gs.size() != ga.size()) throw ShapeError("gradient length mismatch");
    return pareto_objective(GradientPair{gs, ga}, TradeoffWeights{w1, w2});
  });

  m.def("select_attribute", [](const std::vector<double>& gains) { return select_attribute(gains); });
  m.def(
      "far_threshold",
      [](const std::vector<double>& scores, double far) { return far_threshold_from_scores(scores, far); },
      py::arg("scores"), py::arg("far") = 0.01);
  m.def(
      "attack_success_rate",
      [](const std::vector<double>& scores, double tau) {
        return attack_success_rate_from_scores(scores, tau);
      },
      py::arg("scores"), py::arg("tau"));
  m.def("mse", [](const Vec& a, const Vec& b) { return mse(a, b); });

  m.def("config_keys", &config_keys);
  m.def("parse_config", [](const std::string& text) { return ExperimentConfig::parse(text).serialize(); },
        "Validates config text and returns its canonical form.");
  m.def("config_hash", [](const std::string& text) { return ExperimentConfig::parse(text).hash(); });

  m.def(
      "run_arms",
      [](const std::string& text, std::optional<std::uint64_t> seed) {
        ExperimentConfig config = ExperimentConfig::parse(text);
        if (seed) config.seed = *seed;
        std::vector<ArmResult> arms;
        std::vector<EvalReport> baselines;
        {
          py::gil_scoped_release release;
          const World world = make_world(config.world, config.seed);
          const Calibration cal = calibrate(world, config.eval);
          arms = run_arms(world, config, cal);
          baselines = baseline_reports(world, config, cal);
        }
        py::list reports;
        for (const auto& a : arms) reports.append(report_dict(a.report));
        for (const auto& b : baselines) reports.append(report_dict(b));
        return reports;
      },
      py::arg("config_text"), py::arg("seed") = py::none(),
      "Trains and evaluates every configured arm in memory; returns arm reports then baselines.");

  m.def(
      "run_experiment",
      [](const std::string& text, const std::filesystem::path& output_dir,
         std::optional<std::uint64_t> seed) {
        ExperimentConfig config = ExperimentConfig::parse(text);
        config.output_dir = output_dir;
        if (seed) config.seed = *seed;
        RunArtifacts art;
        {
          py::gil_scoped_release release;
          art = run_experiment(config);
        }
        py::dict out;
        out["config_hash"] = art.config_hash;
        out["config"] = art.config_snapshot;
        out["metadata"] = art.metadata;
        out["schema"] = art.schema;
        out["train_logs"] = art.train_logs;
        out["checkpoints"] = art.checkpoints;
        out["eval_report"] = art.eval_report;
        out["eval_rows"] = art.eval_rows;
        out["attribute_frequency"] = art.attribute_frequency;
        out["summary"] = art.summary;
        return out;
      },
      py::arg("config_text"), py::arg("output_dir"), py::arg("seed") = py::none());

  m.def("self_check", [](std::uint64_t seed) {
    py::list out;
    for (const auto& line : self_check(WorldConfig{}, seed)) {
      py::dict d;
      d["name"] = line.name;
      d["value"] = line.value;
      d["bound"] = line.bound;
      d["pass"] = line.pass;
      out.append(d);
    }
    return out;
  }, py::arg("seed") = 1);
}
