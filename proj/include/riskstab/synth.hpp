#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "riskstab/event_model.hpp"
#include "riskstab/metrics.hpp"

namespace riskstab {

/// Lab code of the planted biomarker.
inline constexpr std::string_view kBiomarkerCode = "BIOMARKER";
inline constexpr double kBiomarkerMean = 1.0;
inline constexpr double kBiomarkerSd = 0.25;

struct SynthConfig {
  std::size_t n_episodes = 1000;
  double prevalence = 0.1;
  Hours mean_duration = 24.0;
  double observation_rate = 6.0;  // per hour
  double hazard_lift = 2.0;       // biomarker rise over the h hours before the event
  Hours horizon_h = 1.5;
  /// Which raw records encode the event: a task preset name, or "generic"
  /// (admin marker `event_code`).
  std::string profile = "generic";
  std::string event_code = "EVENT";
  std::uint64_t seed = 0;

  void validate() const;
};

/// Drift length matching a profile: the preset horizon, or 1.5 h for "generic".
Hours profile_horizon(std::string_view profile);

/// Mean duration long enough for negatives to cover the positives' history
/// after truncation: max(24, 8 h).
Hours profile_duration(std::string_view profile);

/// Deterministic under cfg.seed. Exactly round(n * prevalence) positives, each
/// with event_time set to the planted onset.
std::vector<Episode> generate_cohort(const SynthConfig& cfg);

struct ScorerSpec {
  enum class Kind { oracle, windowed_mean, noisy, constant };
  Kind kind = Kind::windowed_mean;
  double sigma = 0.0;   // noisy
  double value = 0.5;   // constant
  Hours horizon_h = 1.5;  // oracle
  std::uint64_t seed = 0;  // noisy

  void validate() const;
};

/// Parses "oracle", "windowed_mean", "noisy:SIGMA" or "constant:VALUE".
ScorerSpec parse_scorer(std::string_view text);
std::string to_string(const ScorerSpec& spec);

/// Probe times for one instance: every observation in [T - b, T + b] plus T
/// itself (every_observation), or T + k*step (fixed_grid); clipped to
/// [0, span end] where the span ends at the last observation or the event.
std::vector<Hours> make_probes(const Episode& episode, Hours reference_time, Hours b,
                               const ProbePolicy& policy);

/// Scores each probe on the prefix available at that time.
/// Throws ProbeOutOfRange for unsorted probes or probes outside the span.
RiskTrajectory score_trajectory(const Episode& episode, std::span<const Hours> probes,
                                const ScorerSpec& spec, Hours reference_time);

}  // namespace riskstab
