#pragma once

#include <optional>
#include <set>
#include <string>
#include <vector>

#include "riskstab/event_model.hpp"

namespace riskstab {

enum class Direction { above, below };

/// Strict crossing: above fires on v > threshold, below on v < threshold.
bool crosses(Direction direction, double value, double threshold);

/// y(T): 1 iff event_time lies in (T, T + h].
int label_at(std::optional<Hours> event_time, Hours reference_time, Hours horizon_h);

struct ThresholdRule {
  std::string name;
  std::set<std::string> code_set;
  Direction direction = Direction::above;
  double threshold = 0.0;

  bool operator==(const ThresholdRule&) const = default;
  void validate() const;
};

/// Earliest lab observation in `rule.code_set` that strictly crosses the threshold.
std::optional<Hours> detect_threshold_event(const Episode& episode, const ThresholdRule& rule);

enum class VitalSign { heart_rate, systolic_bp, spo2 };

/// Observation code under which a vital sign is recorded ("HR", "SBP", "SPO2").
std::string_view vital_code(VitalSign vital);

struct VitalRule {
  VitalSign vital = VitalSign::heart_rate;
  Direction direction = Direction::above;
  double threshold = 0.0;
  std::string name;

  bool operator==(const VitalRule&) const = default;
  void validate() const;
};

/// HR > 100 (tachycardia), SBP < 90 (hypotension), SpO2 < 90 (hypoxia).
std::vector<VitalRule> default_vital_rules();

struct DecompensationResult {
  bool in_cohort = false;
  std::optional<Hours> onset;
};

/// Onset of new tachycardia/hypotension/hypoxia. Episodes whose first reading
/// of any monitored vital already fires are reported as not in cohort.
/// Throws MissingVitals when the episode has no vital observations.
DecompensationResult detect_decompensation_onset(const Episode& episode,
                                                 const std::vector<VitalRule>& rules);

/// Observation codes the sepsis engines look for.
struct SepsisCodes {
  std::string temperature = "TEMP";    // vital, degrees C
  std::string heart_rate = "HR";       // vital, beats/min
  std::string resp_rate = "RR";        // vital, breaths/min
  std::string wbc = "WBC";             // lab, 10^3 cells/uL
  std::set<std::string> iv_antibiotics{"ABX_IV"};
  std::set<std::string> antibiotics{"ABX_IV", "ABX_PO"};
  std::string blood_culture = "BLOOD_CULTURE";
  std::string vasopressor = "VASOPRESSOR";
  std::string mechanical_ventilation = "MECH_VENT";
  std::string creatinine = "CREATININE";  // mg/dL
  std::string bilirubin = "BILIRUBIN";    // mg/dL
  std::string platelets = "PLATELETS";    // 10^3 cells/uL
  std::string lactate = "LACTATE";        // mmol/L

  bool operator==(const SepsisCodes&) const = default;
};

struct TraceEntry {
  std::string criterion;
  Hours time = 0.0;

  bool operator==(const TraceEntry&) const = default;
};

struct CohortDecision {
  bool included = false;
  std::vector<TraceEntry> criteria_trace;
};

/// Suspected-infection inclusion: abnormal temperature within 24 h, a SIRS-type
/// sign within 24 h and within 12 h of the temperature, and no IV antibiotic at
/// or before the first criterion time.
CohortDecision sepsis_cohort_filter(const Episode& episode, const SepsisCodes& codes = {});

struct EsofaConfig {
  Hours culture_window_days = 2.0;
  Hours antibiotic_coverage_hours = 72.0;
  Hours max_gap_between_doses_hours = 24.0;
  double lactate_threshold = 2.0;
  double bilirubin_threshold = 2.0;
  double platelet_threshold = 100.0;
  double platelet_decline_frac = 0.5;
  double creatinine_doubling_frac = 2.0;
  SepsisCodes codes;

  bool operator==(const EsofaConfig&) const = default;
  void validate() const;
};

struct LabelOutcome {
  std::string episode_id;
  std::optional<Hours> event_time;
  bool positive = false;
  std::vector<TraceEntry> criteria_trace;
};

/// Chained antibiotic intervals: consecutive doses at most `max_gap` apart
/// join one interval spanning first to last dose.
struct CoverageInterval {
  Hours start = 0.0;
  Hours end = 0.0;
  Hours length() const { return end - start; }
};
std::vector<CoverageInterval> antibiotic_coverage(const Episode& episode,
                                                  const std::set<std::string>& codes,
                                                  Hours max_gap);

/// eSOFA-style sepsis label. Onset is the earliest time at which a blood
/// culture, a qualifying antibiotic course and an organ-dysfunction criterion
/// are all satisfied around the same culture.
LabelOutcome esofa_sepsis_label(const Episode& episode, const EsofaConfig& cfg = {});

/// First occurrence of marker(event_code).
std::optional<Hours> generic_event_label(const Episode& episode, std::string_view event_code);

}  // namespace riskstab
