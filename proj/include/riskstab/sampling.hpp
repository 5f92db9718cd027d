#pragma once

#include <cstdint>
#include <map>
#include <span>
#include <string>
#include <vector>

#include "riskstab/event_model.hpp"

namespace riskstab {

struct EvalInstance {
  std::string episode_id;
  Hours reference_time = 0.0;
  int label = 0;
  Hours elapsed_history = 0.0;  // reference_time - first observation time

  bool operator==(const EvalInstance&) const = default;
};

/// Drops observations in the final h hours of each episode and removes
/// episodes whose event is at or before h, or that end up empty.
std::vector<Episode> truncate_horizon(std::span<const Episode> cohort, Hours horizon_h);

/// Decile bins over the positives' elapsed history. Bin k covers
/// [edges[k], edges[k+1]), the last bin is closed; a single edge is a point bin.
struct HistoryBins {
  std::vector<Hours> edges;
  std::vector<double> weights;  // share of positives per bin

  std::size_t size() const { return weights.size(); }
  Hours lower(std::size_t k) const { return edges[k]; }
  Hours upper(std::size_t k) const { return edges.size() == 1 ? edges[0] : edges[k + 1]; }
  std::size_t bin_of(Hours elapsed) const;
};

HistoryBins decile_bins(std::span<const Hours> positive_elapsed);

struct SamplingResult {
  std::vector<EvalInstance> instances;
  std::vector<std::string> unmatched;  // negatives too short to reach any bin
  std::vector<std::string> infeasible;  // positives with no observation before the event
};

/// One reference time per episode. Positives draw T uniformly from
/// [t_E - h, t_E) (clipped to the first observation); negatives are matched to
/// the positives' elapsed-history deciles. Throws InsufficientSupport when no
/// negative can reach a populated bin.
SamplingResult sample_reference_times(std::span<const Episode> cohort, Hours horizon_h,
                                      std::uint64_t seed);

/// Unmatched baseline: negatives draw T uniformly over their own span.
SamplingResult sample_reference_times_naive(std::span<const Episode> cohort, Hours horizon_h,
                                            std::uint64_t seed);

/// Two-sample Kolmogorov-Smirnov statistic.
double ks_distance(std::span<const double> a, std::span<const double> b);

struct FoldAssignment {
  std::size_t k = 0;
  std::map<std::string, std::size_t> fold_of;

  bool operator==(const FoldAssignment&) const = default;
};

/// Label-stratified random partition into k folds.
FoldAssignment assign_folds(std::span<const EvalInstance> instances, std::size_t k,
                            std::uint64_t seed);

}  // namespace riskstab
