#include "riskstab/labeling.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace riskstab {
namespace {

constexpr Hours kCohortWindow = 24.0;
constexpr Hours kSirsPairing = 12.0;

bool finite_positive(double v) { return std::isfinite(v) && v > 0.0; }

bool has_code(const Observation& obs, std::string_view code) { return obs.code() == code; }

/// First observation of `modality` with `code` at or before `until` whose
/// value satisfies `pred`.
template <typename Pred>
std::optional<Hours> first_reading(const Episode& episode, Modality modality,
                                   std::string_view code, Hours until, Pred pred) {
  for (const auto& obs : episode.observations) {
    if (obs.t > until) break;
    if (obs.modality != modality || !has_code(obs, code)) continue;
    const auto v = obs.number();
    if (v && pred(*v)) return obs.t;
  }
  return std::nullopt;
}

std::optional<Hours> first_marker(const Episode& episode, std::string_view code) {
  for (const auto& obs : episode.observations) {
    if (has_code(obs, code)) return obs.t;
  }
  return std::nullopt;
}

struct LabReading {
  Hours t;
  double value;
};

std::vector<LabReading> lab_series(const Episode& episode, std::string_view code) {
  std::vector<LabReading> out;
  for (const auto& obs : episode.observations) {
    if (obs.modality != Modality::lab || !has_code(obs, code)) continue;
    if (const auto v = obs.number()) out.push_back({obs.t, *v});
  }
  return out;
}

bool in_window(Hours t, Hours lo, Hours hi) { return t >= lo && t <= hi; }

/// Earliest reading after the baseline (first value) inside [lo, hi] that
/// satisfies pred(value, baseline).
template <typename Pred>
std::optional<Hours> baseline_criterion(const std::vector<LabReading>& series, Hours lo, Hours hi,
                                        Pred pred) {
  if (series.empty()) return std::nullopt;
  const double baseline = series.front().value;
  for (std::size_t i = 1; i < series.size(); ++i) {
    if (in_window(series[i].t, lo, hi) && pred(series[i].value, baseline)) return series[i].t;
  }
  return std::nullopt;
}

}  // namespace

bool crosses(Direction direction, double value, double threshold) {
  return direction == Direction::above ? value > threshold : value < threshold;
}

int label_at(std::optional<Hours> event_time, Hours reference_time, Hours horizon_h) {
  if (!event_time) return 0;
  return (*event_time > reference_time && *event_time <= reference_time + horizon_h) ? 1 : 0;
}

void ThresholdRule::validate() const {
  if (code_set.empty()) throw Error(ErrorKind::InvalidConfig, "threshold rule " + name + " has no codes");
  if (!std::isfinite(threshold)) {
    throw Error(ErrorKind::InvalidConfig, "threshold rule " + name + " threshold not finite");
  }
}

std::optional<Hours> detect_threshold_event(const Episode& episode, const ThresholdRule& rule) {
  for (const auto& obs : episode.observations) {
    if (obs.modality != Modality::lab) continue;
    const auto* coded = std::get_if<CodedNumeric>(&obs.value);
    if (coded == nullptr || !rule.code_set.contains(coded->code)) continue;
    if (crosses(rule.direction, coded->value, rule.threshold)) return obs.t;
  }
  return std::nullopt;
}

std::string_view vital_code(VitalSign vital) {
  switch (vital) {
    case VitalSign::heart_rate: return "HR";
    case VitalSign::systolic_bp: return "SBP";
    case VitalSign::spo2: return "SPO2";
  }
  return "";
}

void VitalRule::validate() const {
  if (!finite_positive(threshold)) {
    throw Error(ErrorKind::InvalidConfig, "vital rule " + name + " threshold must be positive");
  }
}

std::vector<VitalRule> default_vital_rules() {
  return {
      {VitalSign::heart_rate, Direction::above, 100.0, "tachycardia"},
      {VitalSign::systolic_bp, Direction::below, 90.0, "hypotension"},
      {VitalSign::spo2, Direction::below, 90.0, "hypoxia"},
  };
}

DecompensationResult detect_decompensation_onset(const Episode& episode,
                                                 const std::vector<VitalRule>& rules) {
  const bool any_vital = std::any_of(episode.observations.begin(), episode.observations.end(),
                                     [](const Observation& o) { return o.modality == Modality::vital; });
  if (!any_vital) throw Error(ErrorKind::MissingVitals, "episode " + episode.id + " has no vitals");

  DecompensationResult result;
  std::optional<Hours> onset;
  for (const auto& rule : rules) {
    const auto code = vital_code(rule.vital);
    bool first = true;
    for (const auto& obs : episode.observations) {
      if (obs.modality != Modality::vital || !has_code(obs, code)) continue;
      const auto v = obs.number();
      if (!v) continue;
      const bool fires = crosses(rule.direction, *v, rule.threshold);
      if (first) {
        if (fires) return result;  // abnormal on arrival: outside the cohort
        first = false;
        continue;
      }
      if (fires) {
        if (!onset || obs.t < *onset) onset = obs.t;
        break;
      }
    }
  }
  result.in_cohort = true;
  result.onset = onset;
  return result;
}

CohortDecision sepsis_cohort_filter(const Episode& episode, const SepsisCodes& codes) {
  CohortDecision decision;
  const auto temp_time = first_reading(episode, Modality::vital, codes.temperature, kCohortWindow,
                                       [](double v) { return v < 36.0 || v > 38.5; });
  if (!temp_time) return decision;
  decision.criteria_trace.push_back({"temperature", *temp_time});

  const auto wbc_time = first_reading(episode, Modality::lab, codes.wbc, kCohortWindow,
                                      [](double v) { return v > 12.0 || v < 4.0; });
  const auto hr_time = first_reading(episode, Modality::vital, codes.heart_rate, kCohortWindow,
                                     [](double v) { return v > 90.0; });
  const auto rr_time = first_reading(episode, Modality::vital, codes.resp_rate, kCohortWindow,
                                     [](double v) { return v > 20.0; });
  if (wbc_time) decision.criteria_trace.push_back({"wbc", *wbc_time});
  if (hr_time) decision.criteria_trace.push_back({"heart_rate", *hr_time});
  if (rr_time) decision.criteria_trace.push_back({"resp_rate", *rr_time});
  if (!wbc_time && !hr_time && !rr_time) return decision;

  bool paired = false;
  Hours first_met = *temp_time;
  for (const auto& t : {wbc_time, hr_time, rr_time}) {
    if (!t) continue;
    paired = paired || std::abs(*t - *temp_time) <= kSirsPairing;
    first_met = std::min(first_met, *t);
  }
  if (!paired) return decision;

  for (const auto& obs : episode.observations) {
    if (obs.t > first_met) break;
    if (obs.modality == Modality::medication && codes.iv_antibiotics.contains(std::string(obs.code()))) {
      return decision;
    }
  }
  decision.criteria_trace.push_back({"no_prior_iv_antibiotic", first_met});
  decision.included = true;
  return decision;
}

void EsofaConfig::validate() const {
  for (double v : {culture_window_days, antibiotic_coverage_hours, max_gap_between_doses_hours,
                   lactate_threshold, bilirubin_threshold, platelet_threshold,
                   platelet_decline_frac, creatinine_doubling_frac}) {
    if (!finite_positive(v)) throw Error(ErrorKind::InvalidConfig, "eSOFA thresholds must be positive");
  }
}

std::vector<CoverageInterval> antibiotic_coverage(const Episode& episode,
                                                  const std::set<std::string>& codes,
                                                  Hours max_gap) {
  std::vector<CoverageInterval> out;
  for (const auto& obs : episode.observations) {
    if (obs.modality != Modality::medication || !codes.contains(std::string(obs.code()))) continue;
    if (!out.empty() && obs.t - out.back().end <= max_gap) {
      out.back().end = obs.t;
    } else {
      out.push_back({obs.t, obs.t});
    }
  }
  return out;
}

LabelOutcome esofa_sepsis_label(const Episode& episode, const EsofaConfig& cfg) {
  LabelOutcome outcome;
  outcome.episode_id = episode.id;
  const auto& codes = cfg.codes;
  const Hours half_window = cfg.culture_window_days * 24.0;

  std::vector<Hours> cultures;
  for (const auto& obs : episode.observations) {
    if (has_code(obs, codes.blood_culture)) cultures.push_back(obs.t);
  }
  if (cultures.empty()) return outcome;

  const auto courses = antibiotic_coverage(episode, codes.antibiotics, cfg.max_gap_between_doses_hours);
  const auto vasopressor = first_marker(episode, codes.vasopressor);
  const auto ventilation = first_marker(episode, codes.mechanical_ventilation);
  const auto creatinine = lab_series(episode, codes.creatinine);
  const auto bilirubin = lab_series(episode, codes.bilirubin);
  const auto platelets = lab_series(episode, codes.platelets);
  const auto lactate = lab_series(episode, codes.lactate);
  const auto eskd = episode.metadata.find("eskd");
  const bool skip_creatinine = eskd != episode.metadata.end() && eskd->second == "true";

  std::optional<Hours> best;
  for (Hours culture : cultures) {
    const Hours lo = culture - half_window;
    const Hours hi = culture + half_window;

    std::optional<Hours> course_start;
    for (const auto& course : courses) {
      if (in_window(course.start, lo, hi) && course.length() >= cfg.antibiotic_coverage_hours) {
        course_start = course.start;
        break;
      }
    }
    if (!course_start) continue;

    std::vector<TraceEntry> organ;
    if (vasopressor && in_window(*vasopressor, lo, hi)) organ.push_back({"vasopressor", *vasopressor});
    if (ventilation && in_window(*ventilation, lo, hi)) {
      organ.push_back({"mechanical_ventilation", *ventilation});
    }
    if (!skip_creatinine) {
      if (auto t = baseline_criterion(creatinine, lo, hi, [&](double v, double base) {
            return base > 0.0 && v >= cfg.creatinine_doubling_frac * base;
          })) {
        organ.push_back({"creatinine", *t});
      }
    }
    if (auto t = baseline_criterion(bilirubin, lo, hi, [&](double v, double base) {
          return v >= cfg.bilirubin_threshold && base > 0.0 && v >= 2.0 * base;
        })) {
      organ.push_back({"bilirubin", *t});
    }
    if (auto t = baseline_criterion(platelets, lo, hi, [&](double v, double base) {
          return base >= cfg.platelet_threshold && v < cfg.platelet_threshold &&
                 v <= (1.0 - cfg.platelet_decline_frac) * base;
        })) {
      organ.push_back({"platelets", *t});
    }
    for (const auto& r : lactate) {
      if (in_window(r.t, lo, hi) && r.value >= cfg.lactate_threshold) {
        organ.push_back({"lactate", r.t});
        break;
      }
    }
    if (organ.empty()) continue;

    Hours organ_time = std::numeric_limits<Hours>::infinity();
    for (const auto& e : organ) organ_time = std::min(organ_time, e.time);
    const Hours onset = std::max({culture, *course_start, organ_time});
    if (!best || onset < *best) {
      best = onset;
      outcome.criteria_trace.clear();
      outcome.criteria_trace.push_back({"culture", culture});
      outcome.criteria_trace.push_back({"QAD", *course_start});
      outcome.criteria_trace.insert(outcome.criteria_trace.end(), organ.begin(), organ.end());
    }
  }
  outcome.event_time = best;
  outcome.positive = best.has_value();
  return outcome;
}

std::optional<Hours> generic_event_label(const Episode& episode, std::string_view event_code) {
  for (const auto& obs : episode.observations) {
    if (const auto* m = std::get_if<Marker>(&obs.value); m && m->code == event_code) return obs.t;
  }
  return std::nullopt;
}

}  // namespace riskstab
