#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <cmath>
#include <memory>
#include <string>
#include <utility>
#include <vector>

#include <json.hpp>

#include "fedsim/datagen.hpp"
#include "fedsim/federation.hpp"
#include "fedsim/harness.hpp"
#include "fedsim/param_vector.hpp"
#include "fedsim/privacy.hpp"
#include "fedsim/rng.hpp"

namespace py = pybind11;
using namespace fedsim;

namespace {

nlohmann::json record_json(const MetricRecord& r) {
  nlohmann::json doc = {{"round", r.round},
                        {"train_loss", r.train_loss},
                        {"test_loss", r.test_loss},
                        {"train_accuracy", r.train_accuracy},
                        {"test_accuracy", r.test_accuracy},
                        {"test_f1", r.test_f1},
                        {"scalars_up", r.scalars_up},
                        {"scalars_down", r.scalars_down}};
  doc["epsilon"] = std::isfinite(r.epsilon) ? nlohmann::json(r.epsilon) : nlohmann::json();
  return doc;
}

std::string run_experiment_json(const std::string& config_json) {
  const ExperimentConfig cfg = config_from_json(nlohmann::json::parse(config_json));
  const ExperimentResult result = run_experiment(cfg);
  nlohmann::json doc = {{"config", config_to_json(result.config)},
                        {"reached_target", result.reached_target},
                        {"rounds_run", result.rounds_run},
                        {"scalars_up_at_target", result.scalars_up_at_target}};
  doc["final_epsilon"] =
      std::isfinite(result.final_epsilon) ? nlohmann::json(result.final_epsilon) : nlohmann::json();
  doc["records"] = nlohmann::json::array();
  for (const MetricRecord& r : result.records) doc["records"].push_back(record_json(r));
  return doc.dump();
}

std::vector<double> clip_vector(std::vector<double> delta, double bound) {
  auto layout =
      std::make_shared<ParamLayout>(std::vector<TensorSpec>{{"delta", delta.size(), 1}});
  return clip_update(ParamVector(std::move(layout), std::move(delta)), bound).values();
}

std::vector<std::pair<std::size_t, std::size_t>> segment_timestamps(
    const std::vector<double>& timestamps, double gap_seconds) {
  KeypressLog log;
  log.timestamps = timestamps;
  std::vector<std::pair<std::size_t, std::size_t>> out;
  for (const IndexRange& r : segment_sessions(log, gap_seconds)) out.emplace_back(r.begin, r.end);
  return out;
}

}  // namespace

PYBIND11_MODULE(_fedsim, m) {
  m.doc() = "native core of the deterministic federated training simulator";

  py::class_<Rng>(m, "Rng")
      .def(py::init<std::uint64_t>(), py::arg("seed"))
      .def("split", &Rng::split, py::arg("stream"))
      .def("next_u64", &Rng::next_u64)
      .def("uniform", &Rng::uniform)
      .def("uniform_index", &Rng::uniform_index, py::arg("n"))
      .def("uniform_symmetric", &Rng::uniform_symmetric, py::arg("r"))
      .def("gaussian", &Rng::gaussian)
      .def("sample_indices", &Rng::sample_indices, py::arg("n"), py::arg("k"));

  py::class_<MomentsAccountant>(m, "MomentsAccountant")
      .def(py::init<std::size_t>(), py::arg("max_order") = 64)
      .def("compose_round", &MomentsAccountant::compose_round, py::arg("sampling_prob"),
           py::arg("noise_multiplier"))
      .def("epsilon_at_delta", &MomentsAccountant::epsilon_at_delta, py::arg("delta"))
      .def_property_readonly("rounds_composed", &MomentsAccountant::rounds_composed)
      .def_property_readonly("unbounded", &MomentsAccountant::unbounded)
      .def_property_readonly("log_moments", &MomentsAccountant::log_moments);

  m.def("round_log_moment", &round_log_moment, py::arg("sampling_prob"),
        py::arg("noise_multiplier"), py::arg("order"));
  m.def("rounds_until_budget", &rounds_until_budget, py::arg("sampling_prob"),
        py::arg("noise_multiplier"), py::arg("delta"), py::arg("epsilon_budget"),
        py::arg("max_order") = 64);

  m.def("clip_update", &clip_vector, py::arg("delta"), py::arg("bound"),
        "Scale delta onto the L2 ball of the given radius if it lies outside.");

  m.def(
      "gen_classification",
      [](std::uint64_t seed, std::size_t n, std::size_t classes, std::size_t dim,
         double separation) {
        const LabeledVectorDataset data = gen_classification(seed, n, classes, dim, separation);
        py::dict out;
        out["features"] = data.features;
        out["labels"] = data.labels;
        out["classes"] = data.classes;
        return out;
      },
      py::arg("seed"), py::arg("n"), py::arg("classes"), py::arg("dim"), py::arg("separation"));

  m.def("segment_sessions", &segment_timestamps, py::arg("timestamps"),
        py::arg("gap_seconds") = 5.0,
        "Half-open [begin, end) session slices of a strictly increasing timestamp list.");

  m.def("f1_macro", &f1_macro, py::arg("predictions"), py::arg("labels"));
  m.def("accuracy", &accuracy, py::arg("predictions"), py::arg("labels"));

  m.def("run_experiment_json", &run_experiment_json, py::arg("config_json"),
        "Run one experiment from a JSON config string; returns the result as JSON.");
}
