#pragma once

#include <map>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "riskstab/event_model.hpp"
#include "riskstab/sampling.hpp"

namespace riskstab {

struct RiskPoint {
  Hours t = 0.0;
  double score = 0.0;
  bool operator==(const RiskPoint&) const = default;
};

/// Risk scores of one episode as its input prefix grows.
struct RiskTrajectory {
  std::string episode_id;
  std::vector<RiskPoint> points;
  Hours reference_time = 0.0;

  bool operator==(const RiskTrajectory&) const = default;

  /// Throws InvalidTrajectory unless probe times strictly increase and every
  /// score is a finite value in [0, 1].
  void validate() const;
  /// Points with t in [T - b, T + b].
  std::span<const RiskPoint> window(Hours b) const;
};

/// Mann-Whitney AUROC with half credit for ties. Exact up to the final division.
double auroc(std::span<const double> scores_pos, std::span<const double> scores_neg);

/// Average precision: step integral of precision over recall, equal scores
/// form one threshold.
double auprc(std::span<const double> scores_pos, std::span<const double> scores_neg);

/// F1 with prediction = score >= tau; 0 when precision + recall is 0.
double f1_at_threshold(std::span<const double> scores_pos, std::span<const double> scores_neg,
                       double tau);

struct StabilityResult {
  std::string episode_id;
  double lc = 0.0;  // risk per hour
  std::size_t pair_count = 0;
  bool degenerate = true;
};

/// Mean |f(t) - f(t')| / |t - t'| over unordered probe pairs inside
/// [T - b, T + b] that are at most c apart. No pairs gives 0 and degenerate.
StabilityResult stability_lc(const RiskTrajectory& traj, Hours b, Hours c);

struct AlertTrace {
  std::string episode_id;
  std::vector<std::pair<Hours, int>> states;
  std::size_t flips = 0;
};

/// Thresholded alert states (score >= tau) inside [T - b, T + b] and the
/// number of changes between consecutive probes.
AlertTrace flip_count(const RiskTrajectory& traj, Hours b, double tau);

struct FoldRow {
  std::string task;
  std::size_t fold = 0;
  Hours b = 0.0;
  double auroc = 0.0;
  double auprc = 0.0;
  double f1 = 0.0;
  double stability = 0.0;            // mean over non-degenerate instances
  double stability_inclusive = 0.0;  // mean over all instances, degenerate as 0
  double flips = 0.0;
  std::size_t n = 0;
  std::size_t n_positive = 0;
  std::size_t n_degenerate = 0;
  double prevalence = 0.0;

  bool operator==(const FoldRow&) const = default;
};

/// Score at the latest probe at or before T.
double score_at_reference(const RiskTrajectory& traj);

/// Metric rows for one fold, one per probe radius in cfg. Trajectories are
/// looked up by episode id.
std::vector<FoldRow> evaluate_fold(std::span<const EvalInstance> instances,
                                   const std::map<std::string, RiskTrajectory>& trajectories,
                                   const TaskConfig& cfg, std::size_t fold = 0,
                                   const std::string& task = {});

struct MeanStd {
  double mean = 0.0;
  double std = 0.0;  // population standard deviation
  bool operator==(const MeanStd&) const = default;
};

MeanStd mean_std(std::span<const double> values);

struct AggregateRow {
  std::string task;
  Hours b = 0.0;
  std::size_t folds = 0;
  MeanStd auroc, auprc, f1, stability, stability_inclusive, flips;
  std::size_t n = 0;
  std::size_t n_positive = 0;
  double prevalence = 0.0;

  bool operator==(const AggregateRow&) const = default;
};

struct MetricReport {
  std::vector<FoldRow> folds;
  std::vector<AggregateRow> aggregate;  // one per probe radius, ascending b
};

MetricReport aggregate_folds(std::vector<FoldRow> rows);

}  // namespace riskstab
