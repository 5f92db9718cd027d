// Command-line front end: each pipeline stage as a subcommand, plus `run`.

#include <cstdio>
#include <fstream>
#include <iostream>

#include <CLI11.hpp>

#include "riskstab/pipeline.hpp"

namespace rs = riskstab;

namespace {

struct CommonFlags {
  std::string config;
  std::string task;
  std::vector<double> b;
  std::optional<double> tau;
  std::optional<std::size_t> folds;
  std::optional<std::uint64_t> seed;
  std::string out;
};

void add_common(CLI::App* app, CommonFlags& f, bool with_eval_flags) {
  app->add_option("--config", f.config, "Run configuration file (key = value)");
  app->add_option("--task", f.task, "Task preset name or path to a task file");
  app->add_option("--seed", f.seed, "Random seed");
  app->add_option("--out", f.out, "Output directory");
  app->add_option("--folds", f.folds, "Number of cross-validation folds");
  if (with_eval_flags) {
    app->add_option("--b", f.b, "Probe radius in hours (repeatable)")->take_all();
    app->add_option("--tau", f.tau, "Alert threshold");
  }
}

rs::RunConfig resolve(const CommonFlags& f) {
  rs::RunConfig cfg;
  if (!f.config.empty()) cfg = rs::load_run_config(f.config);
  if (!f.task.empty()) {
    const auto& names = rs::preset_names();
    cfg.task = std::find(names.begin(), names.end(), f.task) != names.end() ? rs::preset(f.task)
                                                                          : rs::load_task_file(f.task);
  }
  if (!f.b.empty()) cfg.task.config.probe_radii_b = f.b;
  if (f.tau) cfg.task.config.alert_threshold_tau = *f.tau;
  if (f.folds) cfg.folds = *f.folds;
  if (f.seed) cfg.seed = *f.seed;
  if (!f.out.empty()) cfg.out_dir = f.out;
  cfg.task.validate();
  if (cfg.folds < 2) throw rs::Error(rs::ErrorKind::InvalidConfig, "folds must be at least 2");
  return cfg;
}

void ensure_dir(const std::filesystem::path& dir) {
  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  if (ec) throw rs::Error(rs::ErrorKind::Io, "cannot create " + dir.string());
}

std::vector<rs::Episode> load_events(const std::string& path) {
  std::vector<std::string> warnings;
  auto episodes = rs::parse_event_file(path, &warnings);
  for (const auto& w : warnings) std::cerr << "warning: " << w << "\n";
  return episodes;
}

void write_table(const rs::OutputPaths& out, const rs::MetricReport& report) {
  rs::write_report(out.report, report);
  const auto table = rs::format_report_table(report);
  std::ofstream(out.report_table, std::ios::binary | std::ios::trunc) << table;
  std::cout << table;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Evaluate early-event-prediction risk trajectories: accuracy, stability and alert flips"};
  app.require_subcommand(1);

  CommonFlags flags;
  std::string events, instances, trajectories, rows, scorer = "windowed_mean";

  auto* validate = app.add_subcommand("validate", "Parse and validate an event file");
  validate->add_option("--events", events, "Event file")->required();

  auto* label = app.add_subcommand("label", "Detect events and write labels.jsonl");
  label->add_option("--events", events, "Event file")->required();
  add_common(label, flags, false);

  auto* sample = app.add_subcommand("sample", "Truncate, sample reference times, assign folds");
  sample->add_option("--events", events, "Event file")->required();
  add_common(sample, flags, false);

  auto* score = app.add_subcommand("score", "Score instances with a bundled synthetic scorer");
  score->add_option("--events", events, "Event file")->required();
  score->add_option("--instances", instances, "Instances file")->required();
  score->add_option("--scorer", scorer, "oracle | windowed_mean | noisy:SIGMA | constant:VALUE");
  add_common(score, flags, true);

  auto* evaluate = app.add_subcommand("evaluate", "Compute per-fold metrics from trajectories");
  evaluate->add_option("--instances", instances, "Instances file")->required();
  evaluate->add_option("--trajectories", trajectories, "Trajectory file")->required();
  add_common(evaluate, flags, true);

  auto* report = app.add_subcommand("report", "Aggregate fold rows into a report");
  report->add_option("--rows", rows, "Fold rows file (folds.jsonl)")->required();
  report->add_option("--out", flags.out, "Output directory");

  rs::SynthConfig synth_cfg;
  auto* synth = app.add_subcommand("synth", "Generate a synthetic cohort event file");
  synth->add_option("--n", synth_cfg.n_episodes, "Number of episodes");
  synth->add_option("--prevalence", synth_cfg.prevalence, "Fraction of positive episodes");
  synth->add_option("--duration", synth_cfg.mean_duration, "Mean episode duration (hours)");
  synth->add_option("--rate", synth_cfg.observation_rate, "Biomarker observations per hour");
  synth->add_option("--lift", synth_cfg.hazard_lift, "Biomarker rise before the event");
  synth->add_option("--horizon", synth_cfg.horizon_h, "Hours of pre-event drift");
  synth->add_option("--profile", synth_cfg.profile, "generic or a task preset name");
  synth->add_option("--seed", synth_cfg.seed, "Random seed");
  synth->add_option("--out", flags.out, "Output directory")->required();

  auto* run = app.add_subcommand("run", "Run the full pipeline");
  run->add_option("--events", events, "Event file (overrides config)");
  run->add_option("--trajectories", trajectories, "External trajectory file");
  run->add_option("--scorer", scorer, "Bundled scorer when no trajectory file is given");
  add_common(run, flags, true);

  CLI11_PARSE(app, argc, argv);

  try {
    if (*validate) {
      const auto episodes = load_events(events);
      std::size_t n_obs = 0;
      for (const auto& e : episodes) n_obs += e.observations.size();
      std::cout << episodes.size() << " episodes, " << n_obs << " observations: ok\n";
    } else if (*label) {
      const auto cfg = resolve(flags);
      ensure_dir(cfg.out_dir);
      const auto labeled = rs::label_cohort(load_events(events), cfg.task);
      rs::write_labels(rs::OutputPaths(cfg.out_dir).labels, labeled.labels);
      std::size_t pos = 0;
      for (const auto& e : labeled.episodes) pos += e.event_time ? 1 : 0;
      std::cout << labeled.labels.size() << " episodes, " << labeled.episodes.size() << " in cohort, "
                << pos << " positive\n";
    } else if (*sample) {
      const auto cfg = resolve(flags);
      ensure_dir(cfg.out_dir);
      const rs::OutputPaths out(cfg.out_dir);
      const auto labeled = rs::label_cohort(load_events(events), cfg.task);
      rs::write_labels(out.labels, labeled.labels);
      const auto set = rs::build_instances(labeled.episodes, cfg.task, cfg.folds, cfg.seed);
      rs::write_instances(out.instances, set.records);
      std::cout << set.records.size() << " instances written to " << out.instances.string() << "\n";
    } else if (*score) {
      auto cfg = resolve(flags);
      ensure_dir(cfg.out_dir);
      const auto labeled = rs::label_cohort(load_events(events), cfg.task);
      const auto truncated = rs::truncate_horizon(labeled.episodes, cfg.task.config.horizon_h);
      const auto records = rs::read_instances(instances);
      auto spec = rs::parse_scorer(scorer);
      spec.seed = cfg.seed;
      const auto scored = rs::score_instances(truncated, records, cfg.task.config, spec);
      rs::write_trajectories(rs::OutputPaths(cfg.out_dir).trajectories, scored);
      std::cout << scored.size() << " trajectories scored with " << rs::to_string(spec) << "\n";
    } else if (*evaluate) {
      const auto cfg = resolve(flags);
      ensure_dir(cfg.out_dir);
      const rs::OutputPaths out(cfg.out_dir);
      const auto records = rs::read_instances(instances);
      auto fold_rows = rs::evaluate_folds(records, rs::read_trajectories(trajectories), cfg.task, cfg.folds);
      rs::write_fold_rows(out.fold_rows, fold_rows);
      write_table(out, rs::aggregate_folds(std::move(fold_rows)));
    } else if (*report) {
      const std::filesystem::path dir = flags.out.empty() ? std::filesystem::path("out") : std::filesystem::path(flags.out);
      ensure_dir(dir);
      write_table(rs::OutputPaths(dir), rs::aggregate_folds(rs::read_fold_rows(rows)));
    } else if (*synth) {
      ensure_dir(flags.out);
      if (synth->count("--horizon") == 0) synth_cfg.horizon_h = rs::profile_horizon(synth_cfg.profile);
      if (synth->count("--duration") == 0) synth_cfg.mean_duration = rs::profile_duration(synth_cfg.profile);
      const auto cohort = rs::generate_cohort(synth_cfg);
      const auto path = std::filesystem::path(flags.out) / "events.jsonl";
      rs::write_event_file(path, cohort);
      std::cout << cohort.size() << " episodes written to " << path.string() << "\n";
    } else if (*run) {
      auto cfg = resolve(flags);
      if (!events.empty()) cfg.events = events;
      if (!trajectories.empty()) cfg.trajectories = trajectories;
      if (run->count("--scorer") > 0 || flags.config.empty()) cfg.scorer = rs::parse_scorer(scorer);
      if (cfg.events.empty()) throw rs::Error(rs::ErrorKind::InvalidConfig, "no events file given");
      const auto result = rs::run_pipeline(cfg);
      std::cout << rs::format_report_table(result);
    }
  } catch (const rs::Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
