#include "riskstab/pipeline.hpp"

#include <charconv>
#include <fstream>
#include <set>

namespace riskstab {
namespace {

template <typename Fn>
auto stage(const char* name, Fn fn) -> decltype(fn()) {
  try {
    return fn();
  } catch (const Error& e) {
    if (!e.stage().empty()) throw;
    throw e.with_stage(name);
  }
}

std::uint64_t to_u64(const KeyValueDoc::Entry& e) {
  std::uint64_t v = 0;
  const auto [ptr, ec] = std::from_chars(e.value.data(), e.value.data() + e.value.size(), v);
  if (ec != std::errc() || ptr != e.value.data() + e.value.size()) {
    throw Error(ErrorKind::InvalidConfig, "line " + std::to_string(e.line) + ": '" + e.key +
                                              "' must be a non-negative integer", e.line);
  }
  return v;
}

}  // namespace

void RunConfig::validate() const {
  task.validate();
  if (folds < 2) throw Error(ErrorKind::InvalidConfig, "folds must be at least 2");
  if (!trajectories.empty() && trajectories == events) {
    throw Error(ErrorKind::InvalidConfig, "events and trajectories paths must differ");
  }
  if (!trajectories.empty()) {
    const OutputPaths out(out_dir);
    for (const auto& p : {out.instances, out.fold_rows, out.report, out.labels}) {
      if (std::filesystem::weakly_canonical(p) == std::filesystem::weakly_canonical(trajectories)) {
        throw Error(ErrorKind::InvalidConfig, "trajectories path collides with an output file");
      }
    }
  }
  scorer.validate();
}

RunConfig load_run_config(const std::filesystem::path& path) {
  const auto doc = KeyValueDoc::load(path);
  const auto base = path.parent_path();
  auto resolve = [&](const std::string& p) {
    std::filesystem::path q(p);
    return q.is_relative() ? base / q : q;
  };
  RunConfig cfg;
  KeyValueDoc task_doc;
  for (const auto& e : doc.entries) {
    if (e.key == "task") task_doc.entries.push_back({"preset", e.value, e.line});
    else if (e.key == "task_file") cfg.task = load_task_file(resolve(e.value));
    else if (e.key == "events") cfg.events = resolve(e.value);
    else if (e.key == "out") cfg.out_dir = resolve(e.value);
    else if (e.key == "trajectories") cfg.trajectories = resolve(e.value);
    else if (e.key == "scorer") cfg.scorer = parse_scorer(e.value);
    else if (e.key == "seed") cfg.seed = to_u64(e);
    else if (e.key == "folds") cfg.folds = static_cast<std::size_t>(to_u64(e));
    else task_doc.entries.push_back(e);
  }
  cfg.task = task_from_doc(task_doc, cfg.task);
  return cfg;
}

OutputPaths::OutputPaths(const std::filesystem::path& dir)
    : labels(dir / "labels.jsonl"),
      instances(dir / "instances.jsonl"),
      trajectories(dir / "trajectories.jsonl"),
      fold_rows(dir / "folds.jsonl"),
      report(dir / "report.jsonl"),
      report_table(dir / "report.txt") {}

LabeledCohort label_cohort(std::span<const Episode> episodes, const TaskSpec& task) {
  LabeledCohort out;
  for (const auto& e : episodes) {
    auto label = label_episode(e, task);
    if (label.included) {
      Episode kept = e;
      kept.event_time = label.event_time;
      out.episodes.push_back(std::move(kept));
    }
    out.labels.push_back(std::move(label));
  }
  return out;
}

SampledSet build_instances(std::span<const Episode> labeled, const TaskSpec& task, std::size_t k,
                           std::uint64_t seed) {
  SampledSet set;
  set.truncated = truncate_horizon(labeled, task.config.horizon_h);
  set.sampling = sample_reference_times(set.truncated, task.config.horizon_h, seed);
  set.folds = assign_folds(set.sampling.instances, k, seed);
  for (const auto& inst : set.sampling.instances) {
    set.records.push_back({inst, set.folds.fold_of.at(inst.episode_id)});
  }
  return set;
}

std::vector<RiskTrajectory> score_instances(std::span<const Episode> truncated,
                                            std::span<const InstanceRecord> records,
                                            const TaskConfig& cfg, ScorerSpec scorer) {
  scorer.horizon_h = cfg.horizon_h;
  std::map<std::string, const Episode*> by_id;
  for (const auto& e : truncated) by_id.emplace(e.id, &e);
  Hours b_max = 0.0;
  for (Hours b : cfg.probe_radii_b) b_max = std::max(b_max, b);

  std::vector<RiskTrajectory> out;
  out.reserve(records.size());
  for (const auto& rec : records) {
    const auto it = by_id.find(rec.instance.episode_id);
    if (it == by_id.end()) {
      throw Error(ErrorKind::MissingTrajectory, "no episode for instance " + rec.instance.episode_id);
    }
    const auto probes = make_probes(*it->second, rec.instance.reference_time, b_max, cfg.probe_policy);
    out.push_back(score_trajectory(*it->second, probes, scorer, rec.instance.reference_time));
  }
  return out;
}

std::vector<FoldRow> evaluate_folds(std::span<const InstanceRecord> records,
                                    const std::map<std::string, RiskTrajectory>& trajectories,
                                    const TaskSpec& task, std::size_t k) {
  std::vector<std::vector<EvalInstance>> per_fold(k);
  for (const auto& rec : records) {
    if (rec.fold >= k) {
      throw Error(ErrorKind::InvalidConfig, "instance " + rec.instance.episode_id + " has fold " +
                                                std::to_string(rec.fold) + " >= k");
    }
    per_fold[rec.fold].push_back(rec.instance);
  }
  std::vector<FoldRow> rows;
  for (std::size_t f = 0; f < k; ++f) {
    auto fold_rows = evaluate_fold(per_fold[f], trajectories, task.config, f, task.name);
    rows.insert(rows.end(), fold_rows.begin(), fold_rows.end());
  }
  return rows;
}

MetricReport run_pipeline(const RunConfig& cfg) {
  stage("config", [&] { cfg.validate(); return 0; });
  const OutputPaths out(cfg.out_dir);
  stage("io", [&] {
    std::error_code ec;
    std::filesystem::create_directories(cfg.out_dir, ec);
    if (ec) throw Error(ErrorKind::Io, "cannot create " + cfg.out_dir.string() + ": " + ec.message());
    return 0;
  });

  const auto episodes = stage("parse", [&] { return parse_event_file(cfg.events); });
  const auto labeled = stage("label", [&] { return label_cohort(episodes, cfg.task); });
  stage("label", [&] { write_labels(out.labels, labeled.labels); return 0; });

  const auto set = stage("sample", [&] { return build_instances(labeled.episodes, cfg.task, cfg.folds, cfg.seed); });
  stage("sample", [&] { write_instances(out.instances, set.records); return 0; });

  const auto trajectories = stage("score", [&] {
    if (!cfg.trajectories.empty()) return read_trajectories(cfg.trajectories);
    ScorerSpec scorer = cfg.scorer;
    scorer.seed = cfg.seed;
    auto scored = score_instances(set.truncated, set.records, cfg.task.config, scorer);
    write_trajectories(out.trajectories, scored);
    std::map<std::string, RiskTrajectory> by_id;
    for (auto& t : scored) by_id.emplace(t.episode_id, std::move(t));
    return by_id;
  });

  auto rows = stage("evaluate", [&] { return evaluate_folds(set.records, trajectories, cfg.task, cfg.folds); });
  stage("evaluate", [&] { write_fold_rows(out.fold_rows, rows); return 0; });

  auto report = stage("report", [&] { return aggregate_folds(std::move(rows)); });
  stage("report", [&] {
    write_report(out.report, report);
    std::ofstream table(out.report_table, std::ios::binary | std::ios::trunc);
    if (!table) throw Error(ErrorKind::Io, "cannot write " + out.report_table.string());
    table << format_report_table(report);
    return 0;
  });
  return report;
}

}  // namespace riskstab
