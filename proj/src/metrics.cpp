#include "riskstab/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <functional>

namespace riskstab {
namespace {

void require_both(std::span<const double> pos, std::span<const double> neg, const char* what) {
  if (pos.empty() || neg.empty()) {
    throw Error(ErrorKind::OneClassOnly, std::string(what) + " needs positive and negative scores");
  }
}

}  // namespace

void RiskTrajectory::validate() const {
  for (std::size_t i = 0; i < points.size(); ++i) {
    const auto& p = points[i];
    if (!std::isfinite(p.t) || !std::isfinite(p.score) || p.score < 0.0 || p.score > 1.0) {
      throw Error(ErrorKind::InvalidTrajectory,
                  "trajectory " + episode_id + ": point " + std::to_string(i) + " out of range", i);
    }
    if (i > 0 && !(p.t > points[i - 1].t)) {
      throw Error(ErrorKind::InvalidTrajectory,
                  "trajectory " + episode_id + ": probe times must strictly increase at point " +
                      std::to_string(i),
                  i);
    }
  }
  if (!std::isfinite(reference_time)) {
    throw Error(ErrorKind::InvalidTrajectory, "trajectory " + episode_id + ": reference time not finite");
  }
}

std::span<const RiskPoint> RiskTrajectory::window(Hours b) const {
  const Hours lo = reference_time - b;
  const Hours hi = reference_time + b;
  const auto first = std::lower_bound(points.begin(), points.end(), lo,
                                      [](const RiskPoint& p, Hours t) { return p.t < t; });
  const auto last = std::upper_bound(first, points.end(), hi,
                                     [](Hours t, const RiskPoint& p) { return t < p.t; });
  return {points.data() + (first - points.begin()), static_cast<std::size_t>(last - first)};
}

double auroc(std::span<const double> scores_pos, std::span<const double> scores_neg) {
  require_both(scores_pos, scores_neg, "AUROC");
  std::vector<double> neg(scores_neg.begin(), scores_neg.end());
  std::sort(neg.begin(), neg.end());
  // Twice the Mann-Whitney U, kept integral so ties stay exact.
  std::uint64_t twice_u = 0;
  for (double p : scores_pos) {
    const auto below = std::lower_bound(neg.begin(), neg.end(), p) - neg.begin();
    const auto tied = std::upper_bound(neg.begin(), neg.end(), p) - neg.begin() - below;
    twice_u += 2 * static_cast<std::uint64_t>(below) + static_cast<std::uint64_t>(tied);
  }
  const double pairs = static_cast<double>(scores_pos.size()) * static_cast<double>(scores_neg.size());
  return static_cast<double>(twice_u) / (2.0 * pairs);
}

double auprc(std::span<const double> scores_pos, std::span<const double> scores_neg) {
  require_both(scores_pos, scores_neg, "AUPRC");
  std::vector<std::pair<double, int>> ranked;
  ranked.reserve(scores_pos.size() + scores_neg.size());
  for (double s : scores_pos) ranked.emplace_back(s, 1);
  for (double s : scores_neg) ranked.emplace_back(s, 0);
  std::sort(ranked.begin(), ranked.end(), [](const auto& a, const auto& b) { return a.first > b.first; });

  const double total_pos = static_cast<double>(scores_pos.size());
  std::size_t tp = 0;
  std::size_t fp = 0;
  double ap = 0.0;
  for (std::size_t i = 0; i < ranked.size();) {
    std::size_t group_tp = 0;
    const double s = ranked[i].first;
    for (; i < ranked.size() && ranked[i].first == s; ++i) {
      if (ranked[i].second) ++group_tp;
      else ++fp;
    }
    tp += group_tp;
    if (group_tp > 0) {
      const double precision = static_cast<double>(tp) / static_cast<double>(tp + fp);
      ap += (static_cast<double>(group_tp) / total_pos) * precision;
    }
  }
  return ap;
}

double f1_at_threshold(std::span<const double> scores_pos, std::span<const double> scores_neg,
                       double tau) {
  if (!(tau > 0.0 && tau < 1.0)) throw Error(ErrorKind::InvalidConfig, "tau must lie in (0, 1)");
  const auto tp = std::count_if(scores_pos.begin(), scores_pos.end(), [&](double s) { return s >= tau; });
  const auto fp = std::count_if(scores_neg.begin(), scores_neg.end(), [&](double s) { return s >= tau; });
  const auto fn = static_cast<std::ptrdiff_t>(scores_pos.size()) - tp;
  if (tp == 0) return 0.0;
  const double precision = static_cast<double>(tp) / static_cast<double>(tp + fp);
  const double recall = static_cast<double>(tp) / static_cast<double>(tp + fn);
  return 2.0 * precision * recall / (precision + recall);
}

StabilityResult stability_lc(const RiskTrajectory& traj, Hours b, Hours c) {
  StabilityResult r;
  r.episode_id = traj.episode_id;
  const auto pts = traj.window(b);
  double sum = 0.0;
  for (std::size_t i = 0; i < pts.size(); ++i) {
    for (std::size_t j = i + 1; j < pts.size(); ++j) {
      const Hours dt = pts[j].t - pts[i].t;
      if (dt > c) break;
      if (!(dt > 0.0)) continue;
      sum += std::abs(pts[j].score - pts[i].score) / dt;
      ++r.pair_count;
    }
  }
  r.degenerate = r.pair_count == 0;
  r.lc = r.degenerate ? 0.0 : sum / static_cast<double>(r.pair_count);
  return r;
}

AlertTrace flip_count(const RiskTrajectory& traj, Hours b, double tau) {
  AlertTrace trace;
  trace.episode_id = traj.episode_id;
  for (const auto& p : traj.window(b)) {
    const int s = p.score >= tau ? 1 : 0;
    if (!trace.states.empty() && trace.states.back().second != s) ++trace.flips;
    trace.states.emplace_back(p.t, s);
  }
  return trace;
}

double score_at_reference(const RiskTrajectory& traj) {
  const auto it = std::upper_bound(traj.points.begin(), traj.points.end(), traj.reference_time,
                                   [](Hours t, const RiskPoint& p) { return t < p.t; });
  if (it == traj.points.begin()) {
    throw Error(ErrorKind::MissingTrajectory,
                "trajectory " + traj.episode_id + " has no probe at or before its reference time");
  }
  return std::prev(it)->score;
}

std::vector<FoldRow> evaluate_fold(std::span<const EvalInstance> instances,
                                   const std::map<std::string, RiskTrajectory>& trajectories,
                                   const TaskConfig& cfg, std::size_t fold, const std::string& task) {
  std::vector<const RiskTrajectory*> matched;
  std::vector<double> pos;
  std::vector<double> neg;
  for (const auto& inst : instances) {
    const auto it = trajectories.find(inst.episode_id);
    if (it == trajectories.end()) {
      throw Error(ErrorKind::MissingTrajectory, "no trajectory for episode " + inst.episode_id);
    }
    const auto& traj = it->second;
    if (std::abs(traj.reference_time - inst.reference_time) > 1e-9) {
      throw Error(ErrorKind::TrajectoryMismatch,
                  "trajectory for " + inst.episode_id + " is anchored at a different reference time");
    }
    matched.push_back(&traj);
    (inst.label ? pos : neg).push_back(score_at_reference(traj));
  }
  const double roc = auroc(pos, neg);
  const double pr = auprc(pos, neg);
  const double f1 = f1_at_threshold(pos, neg, cfg.alert_threshold_tau);

  std::vector<FoldRow> rows;
  for (Hours b : cfg.probe_radii_b) {
    FoldRow row;
    row.task = task;
    row.fold = fold;
    row.b = b;
    row.auroc = roc;
    row.auprc = pr;
    row.f1 = f1;
    row.n = instances.size();
    row.n_positive = pos.size();
    row.prevalence = static_cast<double>(pos.size()) / static_cast<double>(instances.size());
    double lc_sum = 0.0;
    double flip_sum = 0.0;
    for (const auto* traj : matched) {
      const auto st = stability_lc(*traj, b, cfg.pairing_window_c);
      if (st.degenerate) ++row.n_degenerate;
      lc_sum += st.lc;
      flip_sum += static_cast<double>(flip_count(*traj, b, cfg.alert_threshold_tau).flips);
    }
    const std::size_t live = row.n - row.n_degenerate;
    row.stability = live == 0 ? 0.0 : lc_sum / static_cast<double>(live);
    row.stability_inclusive = lc_sum / static_cast<double>(row.n);
    row.flips = flip_sum / static_cast<double>(row.n);
    rows.push_back(row);
  }
  return rows;
}

MeanStd mean_std(std::span<const double> values) {
  MeanStd r;
  if (values.empty()) return r;
  const double n = static_cast<double>(values.size());
  double sum = 0.0;
  for (double v : values) sum += v;
  r.mean = sum / n;
  double sq = 0.0;
  for (double v : values) sq += (v - r.mean) * (v - r.mean);
  r.std = std::sqrt(sq / n);
  return r;
}

MetricReport aggregate_folds(std::vector<FoldRow> rows) {
  if (rows.empty()) throw Error(ErrorKind::EmptyInput, "no fold rows to aggregate");
  MetricReport report;
  std::map<Hours, std::vector<const FoldRow*>> by_b;
  for (const auto& r : rows) by_b[r.b].push_back(&r);
  for (const auto& [b, group] : by_b) {
    AggregateRow agg;
    agg.task = group.front()->task;
    agg.b = b;
    agg.folds = group.size();
    auto collect = [&](double FoldRow::*field) {
      std::vector<double> v;
      for (const auto* r : group) v.push_back(r->*field);
      return mean_std(v);
    };
    agg.auroc = collect(&FoldRow::auroc);
    agg.auprc = collect(&FoldRow::auprc);
    agg.f1 = collect(&FoldRow::f1);
    agg.stability = collect(&FoldRow::stability);
    agg.stability_inclusive = collect(&FoldRow::stability_inclusive);
    agg.flips = collect(&FoldRow::flips);
    for (const auto* r : group) {
      agg.n += r->n;
      agg.n_positive += r->n_positive;
    }
    agg.prevalence = agg.n == 0 ? 0.0 : static_cast<double>(agg.n_positive) / static_cast<double>(agg.n);
    report.aggregate.push_back(agg);
  }
  report.folds = std::move(rows);
  return report;
}

}  // namespace riskstab
