#pragma once

#include <map>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "riskstab/error.hpp"

namespace riskstab {

/// Hours since episode start.
using Hours = double;

enum class Modality { vital, lab, medication, procedure, waveform_summary, text, admin };

std::string_view to_string(Modality m);
std::optional<Modality> parse_modality(std::string_view name);

struct Numeric {
  double value = 0.0;
  bool operator==(const Numeric&) const = default;
};

struct CodedNumeric {
  std::string code;
  double value = 0.0;
  bool operator==(const CodedNumeric&) const = default;
};

struct Text {
  std::string text;
  bool operator==(const Text&) const = default;
};

struct Marker {
  std::string code;
  bool operator==(const Marker&) const = default;
};

using ObservationValue = std::variant<Numeric, CodedNumeric, Text, Marker>;

struct Observation {
  Modality modality = Modality::vital;
  ObservationValue value;
  Hours t = 0.0;

  bool operator==(const Observation&) const = default;

  /// Code of a coded_numeric or marker payload; empty otherwise.
  std::string_view code() const;
  /// Numeric payload of a numeric or coded_numeric observation.
  std::optional<double> number() const;
};

/// Whether `value`'s variant is allowed for `modality`.
bool variant_permitted(Modality modality, const ObservationValue& value);

struct Episode {
  std::string id;
  std::vector<Observation> observations;
  std::optional<Hours> event_time;
  std::map<std::string, std::string> metadata;

  bool operator==(const Episode&) const = default;

  std::optional<Hours> first_time() const;
  std::optional<Hours> last_time() const;
};

/// Checks every invariant and returns the episode with observations
/// stably sorted by time. Empty episodes pass with metadata["empty"] = "true".
Episode validate_episode(Episode raw);

/// Validates each episode and rejects duplicate ids.
std::vector<Episode> validate_cohort(std::vector<Episode> raw);

/// Observations with t <= at, in order. The boundary is included.
std::span<const Observation> prefix(const Episode& episode, Hours at);

struct ProbePolicy {
  enum class Kind { every_observation, fixed_grid };
  Kind kind = Kind::every_observation;
  Hours step = 0.0;  // fixed_grid only

  bool operator==(const ProbePolicy&) const = default;
};

struct TaskConfig {
  Hours horizon_h = 1.0;
  std::vector<Hours> probe_radii_b{0.5};
  Hours pairing_window_c = 1.0 / 6.0;
  double alert_threshold_tau = 0.5;
  ProbePolicy probe_policy;

  bool operator==(const TaskConfig&) const = default;

  /// Throws InvalidConfig when any invariant fails.
  void validate() const;
};

}  // namespace riskstab
