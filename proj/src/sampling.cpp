#include "riskstab/sampling.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>

namespace riskstab {
namespace {

using Rng = std::mt19937_64;

Rng make_rng(std::uint64_t seed, std::uint64_t stream) {
  std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                    static_cast<std::uint32_t>(stream)};
  return Rng(seq);
}

Hours uniform(Rng& rng, Hours lo, Hours hi) {
  if (!(hi > lo)) return lo;
  return std::uniform_real_distribution<Hours>(lo, hi)(rng);
}

/// Uniform on the half-open [lo, hi).
Hours uniform_half_open(Rng& rng, Hours lo, Hours hi) {
  if (!(hi > lo)) return lo;
  Hours t = uniform(rng, lo, hi);
  return t < hi ? t : std::nextafter(hi, lo);
}

struct Split {
  std::vector<const Episode*> positives;
  std::vector<const Episode*> negatives;
};

Split split_by_outcome(std::span<const Episode> cohort) {
  Split s;
  for (const auto& e : cohort) {
    if (e.observations.empty()) continue;
    (e.event_time ? s.positives : s.negatives).push_back(&e);
  }
  return s;
}

/// Positives first, in cohort order; returns the instances and the ids of
/// infeasible positives.
void sample_positives(const Split& split, Hours horizon_h, Rng& rng, SamplingResult& out,
                      std::vector<EvalInstance>& positives) {
  for (const Episode* e : split.positives) {
    const Hours first = *e->first_time();
    const Hours event = *e->event_time;
    const Hours lo = std::max(event - horizon_h, first);
    if (!(lo < event)) {
      out.infeasible.push_back(e->id);
      continue;
    }
    const Hours t = uniform_half_open(rng, lo, event);
    positives.push_back({e->id, t, 1, t - first});
  }
}

/// Reassembles instances in cohort order.
std::vector<EvalInstance> in_cohort_order(std::span<const Episode> cohort,
                                          std::vector<EvalInstance> instances) {
  std::map<std::string, std::size_t> pos;
  for (std::size_t i = 0; i < cohort.size(); ++i) pos.emplace(cohort[i].id, i);
  std::stable_sort(instances.begin(), instances.end(), [&](const auto& a, const auto& b) {
    return pos.at(a.episode_id) < pos.at(b.episode_id);
  });
  return instances;
}

}  // namespace

std::vector<Episode> truncate_horizon(std::span<const Episode> cohort, Hours horizon_h) {
  std::vector<Episode> out;
  for (const auto& e : cohort) {
    if (e.event_time && *e.event_time <= horizon_h) continue;
    if (e.observations.empty()) continue;
    const Hours cutoff = *e.last_time() - horizon_h;
    Episode kept = e;
    const auto end = std::upper_bound(kept.observations.begin(), kept.observations.end(), cutoff,
                                      [](Hours t, const Observation& o) { return t < o.t; });
    kept.observations.erase(end, kept.observations.end());
    if (kept.observations.empty()) continue;
    out.push_back(std::move(kept));
  }
  return out;
}

std::size_t HistoryBins::bin_of(Hours elapsed) const {
  if (edges.size() == 1) return 0;
  const auto it = std::upper_bound(edges.begin(), edges.end(), elapsed);
  const auto idx = static_cast<std::size_t>(std::max<std::ptrdiff_t>(it - edges.begin() - 1, 0));
  return std::min(idx, size() - 1);
}

HistoryBins decile_bins(std::span<const Hours> positive_elapsed) {
  if (positive_elapsed.empty()) throw Error(ErrorKind::EmptyInput, "no positive instances to bin");
  std::vector<Hours> sorted(positive_elapsed.begin(), positive_elapsed.end());
  std::sort(sorted.begin(), sorted.end());
  HistoryBins bins;
  const std::size_t n = sorted.size();
  for (std::size_t q = 0; q <= 10; ++q) {
    const Hours edge = sorted[(q * (n - 1)) / 10];
    if (bins.edges.empty() || edge > bins.edges.back()) bins.edges.push_back(edge);
  }
  bins.weights.assign(bins.edges.size() == 1 ? 1 : bins.edges.size() - 1, 0.0);
  for (Hours v : sorted) bins.weights[bins.bin_of(v)] += 1.0;
  for (auto& w : bins.weights) w /= static_cast<double>(n);
  return bins;
}

SamplingResult sample_reference_times(std::span<const Episode> cohort, Hours horizon_h,
                                      std::uint64_t seed) {
  Rng rng = make_rng(seed, 0);
  const Split split = split_by_outcome(cohort);
  SamplingResult out;
  std::vector<EvalInstance> instances;
  sample_positives(split, horizon_h, rng, out, instances);
  if (instances.empty()) {
    throw Error(ErrorKind::InsufficientSupport, "no feasible positive episode to match against");
  }

  std::vector<Hours> elapsed;
  for (const auto& inst : instances) elapsed.push_back(inst.elapsed_history);
  const HistoryBins bins = decile_bins(elapsed);

  struct Candidate {
    const Episode* episode;
    Hours reach;  // longest elapsed history this negative can offer
  };
  std::vector<Candidate> pool;
  for (const Episode* e : split.negatives) {
    const Hours reach = *e->last_time() - *e->first_time();
    if (reach < bins.lower(0)) {
      out.unmatched.push_back(e->id);
    } else {
      pool.push_back({e, reach});
    }
  }

  // Largest-remainder targets per bin.
  const std::size_t n_neg = pool.size();
  std::vector<std::size_t> target(bins.size());
  std::vector<std::pair<double, std::size_t>> remainders;
  std::size_t assigned = 0;
  for (std::size_t k = 0; k < bins.size(); ++k) {
    const double exact = bins.weights[k] * static_cast<double>(n_neg);
    target[k] = static_cast<std::size_t>(std::floor(exact));
    assigned += target[k];
    remainders.emplace_back(exact - std::floor(exact), k);
  }
  std::stable_sort(remainders.begin(), remainders.end(),
                   [](const auto& a, const auto& b) { return a.first > b.first; });
  for (std::size_t i = 0; assigned < n_neg; ++i, ++assigned) ++target[remainders[i].second];

  // Fill from the highest bin down: high bins can only take long episodes.
  std::vector<bool> used(pool.size(), false);
  std::size_t carry = 0;
  for (std::size_t k = bins.size(); k-- > 0;) {
    const std::size_t want = target[k] + carry;
    std::vector<std::size_t> eligible;
    for (std::size_t i = 0; i < pool.size(); ++i) {
      if (!used[i] && pool[i].reach >= bins.lower(k)) eligible.push_back(i);
    }
    if (eligible.empty() && target[k] > 0) {
      throw Error(ErrorKind::InsufficientSupport,
                  "no negative episode reaches elapsed-history bin " + std::to_string(k) + " [" +
                      std::to_string(bins.lower(k)) + ", " + std::to_string(bins.upper(k)) + "]",
                  k);
    }
    std::shuffle(eligible.begin(), eligible.end(), rng);
    const std::size_t take = std::min(want, eligible.size());
    carry = want - take;
    for (std::size_t j = 0; j < take; ++j) {
      const auto& c = pool[eligible[j]];
      used[eligible[j]] = true;
      const Hours lo = bins.lower(k);
      const Hours hi = std::min(bins.upper(k), c.reach);
      const bool closed = k + 1 == bins.size();
      const Hours e = closed ? uniform(rng, lo, hi) : uniform_half_open(rng, lo, hi);
      const Hours first = *c.episode->first_time();
      instances.push_back({c.episode->id, first + e, 0, e});
    }
  }
  out.instances = in_cohort_order(cohort, std::move(instances));
  return out;
}

SamplingResult sample_reference_times_naive(std::span<const Episode> cohort, Hours horizon_h,
                                            std::uint64_t seed) {
  Rng rng = make_rng(seed, 0);
  const Split split = split_by_outcome(cohort);
  SamplingResult out;
  std::vector<EvalInstance> instances;
  sample_positives(split, horizon_h, rng, out, instances);
  for (const Episode* e : split.negatives) {
    const Hours first = *e->first_time();
    const Hours t = uniform(rng, first, *e->last_time());
    instances.push_back({e->id, t, 0, t - first});
  }
  out.instances = in_cohort_order(cohort, std::move(instances));
  return out;
}

double ks_distance(std::span<const double> a, std::span<const double> b) {
  if (a.empty() || b.empty()) throw Error(ErrorKind::EmptyInput, "ks_distance needs two non-empty samples");
  std::vector<double> x(a.begin(), a.end());
  std::vector<double> y(b.begin(), b.end());
  std::sort(x.begin(), x.end());
  std::sort(y.begin(), y.end());
  const double nx = static_cast<double>(x.size());
  const double ny = static_cast<double>(y.size());
  std::size_t i = 0;
  std::size_t j = 0;
  double d = 0.0;
  while (i < x.size() && j < y.size()) {
    const double v = std::min(x[i], y[j]);
    while (i < x.size() && x[i] == v) ++i;
    while (j < y.size() && y[j] == v) ++j;
    d = std::max(d, std::abs(static_cast<double>(i) / nx - static_cast<double>(j) / ny));
  }
  return d;
}

FoldAssignment assign_folds(std::span<const EvalInstance> instances, std::size_t k,
                            std::uint64_t seed) {
  if (k < 2) throw Error(ErrorKind::InvalidConfig, "fold count must be at least 2");
  if (instances.empty()) throw Error(ErrorKind::EmptyInput, "no instances to split");
  std::vector<std::size_t> pos;
  std::vector<std::size_t> neg;
  for (std::size_t i = 0; i < instances.size(); ++i) (instances[i].label ? pos : neg).push_back(i);
  if (pos.size() < k) {
    throw Error(ErrorKind::TooFewPositives, std::to_string(pos.size()) + " positives cannot fill " +
                                                std::to_string(k) + " folds");
  }
  Rng rng = make_rng(seed, 1);
  std::shuffle(pos.begin(), pos.end(), rng);
  std::shuffle(neg.begin(), neg.end(), rng);

  FoldAssignment folds;
  folds.k = k;
  std::size_t slot = 0;
  for (const auto* group : {&pos, &neg}) {
    for (std::size_t idx : *group) folds.fold_of[instances[idx].episode_id] = slot++ % k;
  }
  return folds;
}

}  // namespace riskstab
