#pragma once

#include <filesystem>
#include <iosfwd>
#include <map>
#include <string>
#include <vector>

#include "riskstab/event_model.hpp"
#include "riskstab/metrics.hpp"
#include "riskstab/sampling.hpp"
#include "riskstab/task.hpp"

namespace riskstab {

// All files are JSON Lines: one object per line, blank lines skipped.
//
//   events        {episode_id, modality, code?, value, t_hours}
//   labels        {episode_id, included, exclusion, event_time, trace: [{criterion, t_hours}]}
//   instances     {episode_id, T_hours, label, elapsed_history, fold}
//   trajectories  {episode_id, T_hours, t, score}          one row per probe
//   fold rows     {task, fold, b, auroc, auprc, f1, stability, stability_inclusive,
//                  flips, n, n_positive, n_degenerate, prevalence}
//   report        fold rows, then per-b rows with fold = "mean" and fold = "std"

/// Groups records by episode_id (first-appearance order) and validates each
/// episode. Unknown fields are reported once each through `warnings`.
std::vector<Episode> parse_events(std::istream& in, std::vector<std::string>* warnings = nullptr);
std::vector<Episode> parse_event_file(const std::filesystem::path& path,
                                      std::vector<std::string>* warnings = nullptr);
void write_events(std::ostream& out, const std::vector<Episode>& episodes);
void write_event_file(const std::filesystem::path& path, const std::vector<Episode>& episodes);

void write_labels(const std::filesystem::path& path, const std::vector<TaskLabel>& labels);
std::vector<TaskLabel> read_labels(const std::filesystem::path& path);

struct InstanceRecord {
  EvalInstance instance;
  std::size_t fold = 0;
  bool operator==(const InstanceRecord&) const = default;
};

void write_instances(const std::filesystem::path& path, const std::vector<InstanceRecord>& records);
std::vector<InstanceRecord> read_instances(const std::filesystem::path& path);

void write_trajectories(const std::filesystem::path& path, const std::vector<RiskTrajectory>& trajectories);
/// Rows of one episode must be contiguous or not; they are grouped by id and
/// each trajectory is validated.
std::map<std::string, RiskTrajectory> read_trajectories(const std::filesystem::path& path);

void write_fold_rows(const std::filesystem::path& path, const std::vector<FoldRow>& rows);
std::vector<FoldRow> read_fold_rows(const std::filesystem::path& path);

void write_report(const std::filesystem::path& path, const MetricReport& report);
/// Aligned plain-text table of fold and aggregate rows.
std::string format_report_table(const MetricReport& report);

}  // namespace riskstab
