#include <pybind11/pybind11.h>
#include <pybind11/stl.h>
#include <pybind11/stl/filesystem.h>

#include "riskstab/pipeline.hpp"

namespace py = pybind11;
namespace rs = riskstab;

namespace {

rs::RiskTrajectory make_trajectory(std::string episode_id,
                                   const std::vector<std::pair<double, double>>& points,
                                   double reference_time) {
  rs::RiskTrajectory traj;
  traj.episode_id = std::move(episode_id);
  traj.reference_time = reference_time;
  for (const auto& [t, s] : points) traj.points.push_back({t, s});
  traj.validate();
  return traj;
}

py::object value_to_py(const rs::ObservationValue& v) {
  return std::visit(
      [](const auto& x) -> py::object {
        using V = std::decay_t<decltype(x)>;
        if constexpr (std::is_same_v<V, rs::Numeric>) return py::float_(x.value);
        else if constexpr (std::is_same_v<V, rs::CodedNumeric>) return py::make_tuple(x.code, x.value);
        else if constexpr (std::is_same_v<V, rs::Text>) return py::str(x.text);
        else return py::make_tuple(x.code);
      },
      v);
}

}  // namespace

PYBIND11_MODULE(_core, m) {
  m.doc() = "Risk-trajectory evaluation: labels, matched sampling, accuracy and stability metrics";

  py::register_exception<rs::Error>(m, "RiskstabError", PyExc_RuntimeError);

  py::class_<rs::Episode>(m, "Episode")
      .def_readonly("id", &rs::Episode::id)
      .def_readonly("event_time", &rs::Episode::event_time)
      .def_readonly("metadata", &rs::Episode::metadata)
      .def_property_readonly("observations",
                             [](const rs::Episode& e) {
                               py::list out;
                               for (const auto& o : e.observations) {
                                 out.append(py::make_tuple(std::string(rs::to_string(o.modality)),
                                                           value_to_py(o.value), o.t));
                               }
                               return out;
                             })
      .def("__len__", [](const rs::Episode& e) { return e.observations.size(); })
      .def("__repr__", [](const rs::Episode& e) {
        return "<Episode " + e.id + " with " + std::to_string(e.observations.size()) + " observations>";
      });

  py::class_<rs::RiskTrajectory>(m, "RiskTrajectory")
      .def(py::init(&make_trajectory), py::arg("episode_id"), py::arg("points"), py::arg("reference_time"))
      .def_readonly("episode_id", &rs::RiskTrajectory::episode_id)
      .def_readonly("reference_time", &rs::RiskTrajectory::reference_time)
      .def_property_readonly("points", [](const rs::RiskTrajectory& t) {
        std::vector<std::pair<double, double>> out;
        for (const auto& p : t.points) out.emplace_back(p.t, p.score);
        return out;
      });

  py::class_<rs::StabilityResult>(m, "StabilityResult")
      .def_readonly("episode_id", &rs::StabilityResult::episode_id)
      .def_readonly("lc", &rs::StabilityResult::lc)
      .def_readonly("pair_count", &rs::StabilityResult::pair_count)
      .def_readonly("degenerate", &rs::StabilityResult::degenerate);

  py::class_<rs::AlertTrace>(m, "AlertTrace")
      .def_readonly("episode_id", &rs::AlertTrace::episode_id)
      .def_readonly("states", &rs::AlertTrace::states)
      .def_readonly("flips", &rs::AlertTrace::flips);

  py::class_<rs::EvalInstance>(m, "EvalInstance")
      .def_readonly("episode_id", &rs::EvalInstance::episode_id)
      .def_readonly("reference_time", &rs::EvalInstance::reference_time)
      .def_readonly("label", &rs::EvalInstance::label)
      .def_readonly("elapsed_history", &rs::EvalInstance::elapsed_history);

  py::class_<rs::FoldRow>(m, "FoldRow")
      .def_readonly("task", &rs::FoldRow::task)
      .def_readonly("fold", &rs::FoldRow::fold)
      .def_readonly("b", &rs::FoldRow::b)
      .def_readonly("auroc", &rs::FoldRow::auroc)
      .def_readonly("auprc", &rs::FoldRow::auprc)
      .def_readonly("f1", &rs::FoldRow::f1)
      .def_readonly("stability", &rs::FoldRow::stability)
      .def_readonly("stability_inclusive", &rs::FoldRow::stability_inclusive)
      .def_readonly("flips", &rs::FoldRow::flips)
      .def_readonly("n", &rs::FoldRow::n)
      .def_readonly("n_positive", &rs::FoldRow::n_positive)
      .def_readonly("n_degenerate", &rs::FoldRow::n_degenerate)
      .def_readonly("prevalence", &rs::FoldRow::prevalence);

  py::class_<rs::MeanStd>(m, "MeanStd")
      .def_readonly("mean", &rs::MeanStd::mean)
      .def_readonly("std", &rs::MeanStd::std);

  py::class_<rs::AggregateRow>(m, "AggregateRow")
      .def_readonly("task", &rs::AggregateRow::task)
      .def_readonly("b", &rs::AggregateRow::b)
      .def_readonly("folds", &rs::AggregateRow::folds)
      .def_readonly("auroc", &rs::AggregateRow::auroc)
      .def_readonly("auprc", &rs::AggregateRow::auprc)
      .def_readonly("f1", &rs::AggregateRow::f1)
      .def_readonly("stability", &rs::AggregateRow::stability)
      .def_readonly("stability_inclusive", &rs::AggregateRow::stability_inclusive)
      .def_readonly("flips", &rs::AggregateRow::flips)
      .def_readonly("n", &rs::AggregateRow::n)
      .def_readonly("prevalence", &rs::AggregateRow::prevalence);

  py::class_<rs::MetricReport>(m, "MetricReport")
      .def_readonly("folds", &rs::MetricReport::folds)
      .def_readonly("aggregate", &rs::MetricReport::aggregate)
      .def("table", &rs::format_report_table);

  using Scores = const std::vector<double>&;
  m.def("auroc", [](Scores pos, Scores neg) { return rs::auroc(pos, neg); }, py::arg("scores_pos"),
        py::arg("scores_neg"));
  m.def("auprc", [](Scores pos, Scores neg) { return rs::auprc(pos, neg); }, py::arg("scores_pos"),
        py::arg("scores_neg"));
  m.def("f1_at_threshold", [](Scores pos, Scores neg, double tau) { return rs::f1_at_threshold(pos, neg, tau); },
        py::arg("scores_pos"), py::arg("scores_neg"), py::arg("tau") = 0.5);
  m.def("stability_lc", &rs::stability_lc, py::arg("trajectory"), py::arg("b"), py::arg("c") = 1.0 / 6.0);
  m.def("flip_count", &rs::flip_count, py::arg("trajectory"), py::arg("b"), py::arg("tau") = 0.5);
  m.def("label_at", &rs::label_at, py::arg("event_time"), py::arg("reference_time"), py::arg("horizon_h"));
  m.def("ks_distance", [](Scores a, Scores b) { return rs::ks_distance(a, b); }, py::arg("a"), py::arg("b"));
  m.def("aggregate_folds", &rs::aggregate_folds, py::arg("rows"));

  m.def("preset_names", &rs::preset_names);
  m.def(
      "preset_horizon", [](const std::string& name) { return rs::preset(name).config.horizon_h; },
      py::arg("name"));
  m.def(
      "preset_probe_radii", [](const std::string& name) { return rs::preset(name).config.probe_radii_b; },
      py::arg("name"));

  m.def("parse_event_file", [](const std::filesystem::path& p) { return rs::parse_event_file(p); },
        py::arg("path"));
  m.def(
      "generate_cohort",
      [](std::size_t n, double prevalence, std::uint64_t seed, double hazard_lift, std::optional<double> mean_duration,
         double observation_rate, const std::string& profile, std::optional<double> horizon_h) {
        rs::SynthConfig cfg;
        cfg.n_episodes = n;
        cfg.prevalence = prevalence;
        cfg.seed = seed;
        cfg.hazard_lift = hazard_lift;
        cfg.mean_duration = mean_duration.value_or(rs::profile_duration(profile));
        cfg.observation_rate = observation_rate;
        cfg.profile = profile;
        cfg.horizon_h = horizon_h.value_or(rs::profile_horizon(profile));
        return rs::generate_cohort(cfg);
      },
      py::arg("n"), py::arg("prevalence") = 0.1, py::arg("seed") = 0, py::arg("hazard_lift") = 2.0,
      py::arg("mean_duration") = py::none(), py::arg("observation_rate") = 6.0, py::arg("profile") = "generic",
      py::arg("horizon_h") = py::none());
  m.def("write_event_file", &rs::write_event_file, py::arg("path"), py::arg("episodes"));
  m.def(
      "sample_reference_times",
      [](const std::vector<rs::Episode>& cohort, double h, std::uint64_t seed) {
        return rs::sample_reference_times(rs::truncate_horizon(cohort, h), h, seed).instances;
      },
      py::arg("cohort"), py::arg("horizon_h"), py::arg("seed") = 0);

  m.def(
      "run_pipeline",
      [](const std::filesystem::path& events, const std::filesystem::path& out_dir, const std::string& task,
         const std::string& scorer, std::uint64_t seed, std::size_t folds,
         const std::optional<std::filesystem::path>& trajectories) {
        rs::RunConfig cfg;
        const auto& names = rs::preset_names();
        cfg.task = std::find(names.begin(), names.end(), task) != names.end() ? rs::preset(task)
                                                                              : rs::load_task_file(task);
        cfg.events = events;
        cfg.out_dir = out_dir;
        cfg.scorer = rs::parse_scorer(scorer);
        cfg.seed = seed;
        cfg.folds = folds;
        if (trajectories) cfg.trajectories = *trajectories;
        py::gil_scoped_release release;
        return rs::run_pipeline(cfg);
      },
      py::arg("events"), py::arg("out_dir"), py::arg("task"), py::arg("scorer") = "windowed_mean",
      py::arg("seed") = 0, py::arg("folds") = 5, py::arg("trajectories") = py::none());
}
