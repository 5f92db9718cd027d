#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "riskstab/io.hpp"
#include "riskstab/metrics.hpp"
#include "riskstab/sampling.hpp"
#include "riskstab/synth.hpp"
#include "riskstab/task.hpp"

namespace riskstab {

struct RunConfig {
  TaskSpec task = preset("sepsis");
  std::filesystem::path events;
  std::filesystem::path out_dir = "out";
  /// External trajectory file; when empty the bundled `scorer` is used.
  std::filesystem::path trajectories;
  ScorerSpec scorer;
  std::uint64_t seed = 0;
  std::size_t folds = 5;

  /// Throws InvalidConfig when k < 2 or paths collide.
  void validate() const;
};

/// Keys: task (preset name), task_file, events, out, trajectories, scorer,
/// seed, folds. Any task key (horizon_h, probe_radius_b, ...) overrides the
/// selected task. Relative paths resolve against the config file directory.
RunConfig load_run_config(const std::filesystem::path& path);

/// Output file names inside RunConfig::out_dir.
struct OutputPaths {
  std::filesystem::path labels, instances, trajectories, fold_rows, report, report_table;
  explicit OutputPaths(const std::filesystem::path& dir);
};

/// Labels every episode with the task's detector; included episodes come
/// back with event_time set to the detected onset.
struct LabeledCohort {
  std::vector<TaskLabel> labels;
  std::vector<Episode> episodes;  // included only
};
LabeledCohort label_cohort(std::span<const Episode> episodes, const TaskSpec& task);

/// truncate -> sample -> fold. Folds and sampling share `seed`.
struct SampledSet {
  std::vector<Episode> truncated;
  SamplingResult sampling;
  FoldAssignment folds;
  std::vector<InstanceRecord> records;
};
SampledSet build_instances(std::span<const Episode> labeled, const TaskSpec& task, std::size_t k,
                           std::uint64_t seed);

/// Probes and scores every instance with a bundled scorer.
std::vector<RiskTrajectory> score_instances(std::span<const Episode> truncated,
                                            std::span<const InstanceRecord> records,
                                            const TaskConfig& cfg, ScorerSpec scorer);

/// One evaluate_fold call per fold, rows ordered by fold then b.
std::vector<FoldRow> evaluate_folds(std::span<const InstanceRecord> records,
                                    const std::map<std::string, RiskTrajectory>& trajectories,
                                    const TaskSpec& task, std::size_t k);

/// label -> truncate -> sample -> fold -> score/read -> evaluate -> aggregate,
/// writing every artifact into cfg.out_dir. Errors carry their stage name.
MetricReport run_pipeline(const RunConfig& cfg);

}  // namespace riskstab
