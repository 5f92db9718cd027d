#include "riskstab/synth.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <numeric>
#include <random>

#include "riskstab/labeling.hpp"
#include "riskstab/task.hpp"

namespace riskstab {
namespace {

using Rng = std::mt19937_64;

Rng episode_rng(std::uint64_t seed, std::uint64_t index) {
  std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                    static_cast<std::uint32_t>(index), static_cast<std::uint32_t>(index >> 32), 0x5eedu};
  return Rng(seq);
}

std::uint64_t fnv1a(std::string_view s) {
  std::uint64_t h = 1469598103934665603ull;
  for (unsigned char c : s) {
    h ^= c;
    h *= 1099511628211ull;
  }
  return h;
}

double uniform(Rng& rng, double lo, double hi) { return std::uniform_real_distribution<double>(lo, hi)(rng); }
double normal(Rng& rng, double mean, double sd) { return std::normal_distribution<double>(mean, sd)(rng); }

Observation lab(std::string code, double value, Hours t) {
  return {Modality::lab, CodedNumeric{std::move(code), value}, t};
}
Observation vital(std::string code, double value, Hours t) {
  return {Modality::vital, CodedNumeric{std::move(code), value}, t};
}
Observation marker(Modality m, std::string code, Hours t) { return {m, Marker{std::move(code)}, t}; }

double biomarker_drift(const SynthConfig& cfg, std::optional<Hours> event, Hours t) {
  if (!event) return 0.0;
  const Hours start = *event - cfg.horizon_h;
  if (t <= start) return 0.0;
  if (t >= *event) return cfg.hazard_lift;
  return cfg.hazard_lift * (t - start) / cfg.horizon_h;
}

/// Sampling times: admission at 0, then a Poisson process up to `duration`.
std::vector<Hours> sampling_times(Rng& rng, double rate, Hours duration) {
  std::vector<Hours> times{0.0};
  std::exponential_distribution<double> gap(rate);
  for (Hours t = gap(rng); t <= duration; t += gap(rng)) times.push_back(t);
  return times;
}

void plant_profile(const SynthConfig& cfg, Rng& rng, Episode& e, Hours duration,
                   std::optional<Hours> event) {
  auto& obs = e.observations;
  const auto& p = cfg.profile;
  if (p == "hyperkalemia" || p == "hypoglycemia") {
    const bool potassium = p == "hyperkalemia";
    const std::string code = potassium ? "LOINC/2823-3" : "LOINC/14749-6";
    for (Hours t = uniform(rng, 0.0, 2.0); t <= duration; t += uniform(rng, 1.0, 3.0)) {
      const double v = potassium ? std::clamp(normal(rng, 4.2, 0.4), 3.0, 6.0)
                                 : std::clamp(normal(rng, 6.0, 0.6), 3.5, 9.0);
      obs.push_back(lab(code, v, t));
    }
    if (event) obs.push_back(lab(code, potassium ? 7.6 : 2.4, *event));
  } else if (p == "decompensation") {
    // Vitals alongside the biomarker draw; kept inside normal ranges.
    for (Hours t = 0.0; t <= duration; t += uniform(rng, 0.1, 0.5)) {
      obs.push_back(vital("HR", std::clamp(normal(rng, 80.0, 6.0), 60.0, 95.0), t));
      obs.push_back(vital("SBP", std::clamp(normal(rng, 122.0, 8.0), 100.0, 150.0), t));
      obs.push_back(vital("SPO2", std::clamp(normal(rng, 97.0, 1.0), 94.0, 100.0), t));
    }
    if (event) obs.push_back(vital("HR", 125.0, *event));
  } else if (p == "sepsis") {
    obs.push_back(vital("TEMP", 38.9, 0.0));
    obs.push_back(vital("HR", 96.0, 0.1));
    if (event) {
      obs.push_back(marker(Modality::procedure, "BLOOD_CULTURE", *event - 1.0));
      for (Hours t = *event - 36.0; t <= *event + 48.0 + 1e-9; t += 12.0) {
        obs.push_back(marker(Modality::medication, "ABX_IV", t));
      }
      obs.push_back(lab("LACTATE", 2.6, *event));
    } else {
      const Hours culture = uniform(rng, 2.0, duration / 2.0);
      obs.push_back(marker(Modality::procedure, "BLOOD_CULTURE", culture));
      obs.push_back(marker(Modality::medication, "ABX_IV", culture + 0.5));
      obs.push_back(marker(Modality::medication, "ABX_IV", culture + 12.5));
      obs.push_back(lab("LACTATE", std::clamp(normal(rng, 1.2, 0.2), 0.5, 1.8), culture));
    }
  } else {
    std::string code = cfg.event_code;
    if (p == "icu_transfer") code = "ICU_TRANSFER";
    if (p == "mortality") code = "DEATH";
    if (event) obs.push_back(marker(Modality::admin, code, *event));
  }
}

}  // namespace

Hours profile_horizon(std::string_view profile) {
  if (profile == "generic") return 1.5;
  return preset(profile).config.horizon_h;
}

Hours profile_duration(std::string_view profile) { return std::max(24.0, 8.0 * profile_horizon(profile)); }

namespace {

Episode make_episode(const SynthConfig& cfg, std::size_t index, bool positive) {
  Rng rng = episode_rng(cfg.seed, index);
  const bool sepsis = cfg.profile == "sepsis";
  Hours duration = cfg.mean_duration * uniform(rng, 0.5, 1.5);
  if (sepsis) duration = std::max(duration, 96.0);

  std::optional<Hours> event;
  if (positive) {
    if (sepsis) {
      event = uniform(rng, 40.0, duration - 50.0);
    } else {
      event = std::max(duration * uniform(rng, 0.6, 1.0), 2.0 * cfg.horizon_h);
      duration = std::max(duration, *event);
    }
  }

  Episode e;
  char id[32];
  std::snprintf(id, sizeof(id), "ep%06zu", index);
  e.id = id;
  for (Hours t : sampling_times(rng, cfg.observation_rate, duration)) {
    const double v = normal(rng, kBiomarkerMean, kBiomarkerSd) + biomarker_drift(cfg, event, t);
    e.observations.push_back(lab(std::string(kBiomarkerCode), v, t));
  }
  plant_profile(cfg, rng, e, duration, event);
  e.event_time = event;
  return validate_episode(std::move(e));
}

double logistic(double x) { return 1.0 / (1.0 + std::exp(-x)); }

double windowed_mean(std::span<const Observation> seen, Hours t) {
  double sum = 0.0;
  std::size_t n = 0;
  std::optional<double> last;
  for (auto it = seen.rbegin(); it != seen.rend(); ++it) {
    if (it->modality != Modality::lab || it->code() != kBiomarkerCode) continue;
    const double v = *it->number();
    if (!last) last = v;
    if (it->t <= t - 1.0) break;
    sum += v;
    ++n;
  }
  const double mean = n > 0 ? sum / static_cast<double>(n) : last.value_or(kBiomarkerMean);
  return logistic((mean - (kBiomarkerMean + 2.0 * kBiomarkerSd)) / kBiomarkerSd);
}

}  // namespace

void SynthConfig::validate() const {
  if (n_episodes == 0) throw Error(ErrorKind::InvalidConfig, "n_episodes must be positive");
  if (!(prevalence > 0.0 && prevalence < 1.0)) throw Error(ErrorKind::InvalidConfig, "prevalence must lie in (0, 1)");
  if (!(mean_duration > 0.0) || !(observation_rate > 0.0) || !(horizon_h > 0.0)) {
    throw Error(ErrorKind::InvalidConfig, "duration, rate and horizon must be positive");
  }
  if (!(hazard_lift >= 0.0) || !std::isfinite(hazard_lift)) {
    throw Error(ErrorKind::InvalidConfig, "hazard_lift must be non-negative");
  }
  const auto& names = preset_names();
  if (profile != "generic" && std::find(names.begin(), names.end(), profile) == names.end()) {
    throw Error(ErrorKind::InvalidConfig, "unknown synth profile '" + profile + "'");
  }
}

std::vector<Episode> generate_cohort(const SynthConfig& cfg) {
  cfg.validate();
  const auto n_pos = static_cast<std::size_t>(
      std::llround(cfg.prevalence * static_cast<double>(cfg.n_episodes)));
  std::vector<std::size_t> order(cfg.n_episodes);
  std::iota(order.begin(), order.end(), 0);
  Rng rng = episode_rng(cfg.seed, ~std::uint64_t{0});
  std::shuffle(order.begin(), order.end(), rng);
  std::vector<bool> positive(cfg.n_episodes, false);
  for (std::size_t i = 0; i < n_pos && i < order.size(); ++i) positive[order[i]] = true;

  std::vector<Episode> cohort;
  cohort.reserve(cfg.n_episodes);
  for (std::size_t i = 0; i < cfg.n_episodes; ++i) cohort.push_back(make_episode(cfg, i, positive[i]));
  return cohort;
}

void ScorerSpec::validate() const {
  if (kind == Kind::noisy && !(sigma >= 0.0 && std::isfinite(sigma))) {
    throw Error(ErrorKind::InvalidConfig, "noise sigma must be non-negative");
  }
  if (kind == Kind::constant && !(value >= 0.0 && value <= 1.0)) {
    throw Error(ErrorKind::InvalidConfig, "constant score must lie in [0, 1]");
  }
  if (kind == Kind::oracle && !(horizon_h > 0.0)) throw Error(ErrorKind::InvalidConfig, "oracle horizon must be positive");
}

ScorerSpec parse_scorer(std::string_view text) {
  ScorerSpec spec;
  const auto colon = text.find(':');
  const auto kind = text.substr(0, colon);
  double arg = 0.0;
  const bool has_arg = colon != std::string_view::npos;
  if (has_arg) {
    const auto a = text.substr(colon + 1);
    const auto [ptr, ec] = std::from_chars(a.data(), a.data() + a.size(), arg);
    if (ec != std::errc() || ptr != a.data() + a.size()) {
      throw Error(ErrorKind::InvalidConfig, "bad scorer argument in '" + std::string(text) + "'");
    }
  }
  if (kind == "oracle" && !has_arg) spec.kind = ScorerSpec::Kind::oracle;
  else if (kind == "windowed_mean" && !has_arg) spec.kind = ScorerSpec::Kind::windowed_mean;
  else if (kind == "noisy" && has_arg) { spec.kind = ScorerSpec::Kind::noisy; spec.sigma = arg; }
  else if (kind == "constant" && has_arg) { spec.kind = ScorerSpec::Kind::constant; spec.value = arg; }
  else throw Error(ErrorKind::InvalidConfig, "unknown scorer '" + std::string(text) + "'");
  spec.validate();
  return spec;
}

std::string to_string(const ScorerSpec& spec) {
  switch (spec.kind) {
    case ScorerSpec::Kind::oracle: return "oracle";
    case ScorerSpec::Kind::windowed_mean: return "windowed_mean";
    case ScorerSpec::Kind::noisy: return "noisy:" + format_double(spec.sigma);
    case ScorerSpec::Kind::constant: return "constant:" + format_double(spec.value);
  }
  return "";
}

namespace {
Hours span_end(const Episode& e) {
  Hours end = e.last_time().value_or(0.0);
  if (e.event_time) end = std::max(end, *e.event_time);
  return end;
}
}  // namespace

std::vector<Hours> make_probes(const Episode& episode, Hours reference_time, Hours b,
                               const ProbePolicy& policy) {
  const Hours lo = std::max(0.0, reference_time - b);
  const Hours hi = std::min(span_end(episode), reference_time + b);
  std::vector<Hours> probes;
  if (policy.kind == ProbePolicy::Kind::every_observation) {
    for (const auto& o : episode.observations) {
      if (o.t >= lo && o.t <= hi) probes.push_back(o.t);
    }
    probes.push_back(reference_time);
  } else {
    const auto k_lo = static_cast<long long>(std::ceil(-b / policy.step - 1e-9));
    const auto k_hi = static_cast<long long>(std::floor(b / policy.step + 1e-9));
    for (long long k = k_lo; k <= k_hi; ++k) {
      const Hours t = reference_time + static_cast<double>(k) * policy.step;
      if (k == 0 || (t >= lo && t <= hi)) probes.push_back(k == 0 ? reference_time : t);
    }
  }
  std::sort(probes.begin(), probes.end());
  probes.erase(std::unique(probes.begin(), probes.end()), probes.end());
  return probes;
}

RiskTrajectory score_trajectory(const Episode& episode, std::span<const Hours> probes,
                                const ScorerSpec& spec, Hours reference_time) {
  spec.validate();
  const Hours end = span_end(episode);
  for (std::size_t i = 0; i < probes.size(); ++i) {
    if (!(probes[i] >= 0.0 && probes[i] <= end) || (i > 0 && !(probes[i] > probes[i - 1]))) {
      throw Error(ErrorKind::ProbeOutOfRange,
                  "probe " + std::to_string(i) + " at t = " + std::to_string(probes[i]) +
                      " is outside episode " + episode.id + " or out of order",
                  i);
    }
  }
  RiskTrajectory traj;
  traj.episode_id = episode.id;
  traj.reference_time = reference_time;
  traj.points.reserve(probes.size());

  const std::uint64_t id_hash = fnv1a(episode.id);
  std::seed_seq noise_seq{static_cast<std::uint32_t>(spec.seed), static_cast<std::uint32_t>(spec.seed >> 32),
                          static_cast<std::uint32_t>(id_hash), static_cast<std::uint32_t>(id_hash >> 32)};
  Rng noise(noise_seq);
  std::normal_distribution<double> gauss(0.0, 1.0);
  for (Hours t : probes) {
    double s = 0.0;
    switch (spec.kind) {
      case ScorerSpec::Kind::oracle:
        s = label_at(episode.event_time, t, spec.horizon_h) ? 1.0 : 0.01;
        break;
      case ScorerSpec::Kind::windowed_mean:
        s = windowed_mean(prefix(episode, t), t);
        break;
      case ScorerSpec::Kind::noisy:
        s = std::clamp(windowed_mean(prefix(episode, t), t) + spec.sigma * gauss(noise), 0.0, 1.0);
        break;
      case ScorerSpec::Kind::constant:
        s = spec.value;
        break;
    }
    traj.points.push_back({t, s});
  }
  return traj;
}

}  // namespace riskstab
