#include "riskstab/event_model.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <set>
#include <utility>

namespace riskstab {
namespace {

constexpr std::array<std::pair<Modality, std::string_view>, 7> kModalityNames{{
    {Modality::vital, "vital"},
    {Modality::lab, "lab"},
    {Modality::medication, "medication"},
    {Modality::procedure, "procedure"},
    {Modality::waveform_summary, "waveform_summary"},
    {Modality::text, "text"},
    {Modality::admin, "admin"},
}};

bool finite_payload(const ObservationValue& value) {
  if (const auto* n = std::get_if<Numeric>(&value)) return std::isfinite(n->value);
  if (const auto* c = std::get_if<CodedNumeric>(&value)) return std::isfinite(c->value);
  return true;
}

}  // namespace

std::string_view to_string(Modality m) {
  for (const auto& [mod, name] : kModalityNames) {
    if (mod == m) return name;
  }
  return "unknown";
}

std::optional<Modality> parse_modality(std::string_view name) {
  for (const auto& [mod, n] : kModalityNames) {
    if (n == name) return mod;
  }
  return std::nullopt;
}

std::string_view Observation::code() const {
  if (const auto* c = std::get_if<CodedNumeric>(&value)) return c->code;
  if (const auto* m = std::get_if<Marker>(&value)) return m->code;
  return {};
}

std::optional<double> Observation::number() const {
  if (const auto* n = std::get_if<Numeric>(&value)) return n->value;
  if (const auto* c = std::get_if<CodedNumeric>(&value)) return c->value;
  return std::nullopt;
}

bool variant_permitted(Modality modality, const ObservationValue& value) {
  const bool numeric = std::holds_alternative<Numeric>(value);
  const bool coded = std::holds_alternative<CodedNumeric>(value);
  const bool text = std::holds_alternative<Text>(value);
  const bool marker = std::holds_alternative<Marker>(value);
  switch (modality) {
    case Modality::lab: return coded;
    case Modality::text: return text;
    case Modality::medication: return marker || coded;
    case Modality::vital:
    case Modality::waveform_summary: return numeric || coded;
    case Modality::procedure: return marker || coded;
    case Modality::admin: return marker || coded || text;
  }
  return false;
}

std::optional<Hours> Episode::first_time() const {
  if (observations.empty()) return std::nullopt;
  return observations.front().t;
}

std::optional<Hours> Episode::last_time() const {
  if (observations.empty()) return std::nullopt;
  return observations.back().t;
}

Episode validate_episode(Episode raw) {
  if (raw.id.empty()) throw Error(ErrorKind::EmptyId, "episode id is empty");
  for (std::size_t i = 0; i < raw.observations.size(); ++i) {
    const auto& obs = raw.observations[i];
    const std::string where = "episode " + raw.id + ", observation " + std::to_string(i);
    if (!std::isfinite(obs.t)) {
      throw Error(ErrorKind::NonFiniteValue, where + ": timestamp is not finite", i);
    }
    if (obs.t < 0.0) {
      throw Error(ErrorKind::NegativeTimestamp, where + ": t = " + std::to_string(obs.t), i);
    }
    if (!finite_payload(obs.value)) {
      throw Error(ErrorKind::NonFiniteValue, where + ": value is not finite", i);
    }
    if (const auto* c = std::get_if<CodedNumeric>(&obs.value); c && c->code.empty()) {
      throw Error(ErrorKind::InvalidVariant, where + ": coded value without a code", i);
    }
    if (!variant_permitted(obs.modality, obs.value)) {
      throw Error(ErrorKind::InvalidVariant,
                  where + ": value kind not allowed for modality " +
                      std::string(to_string(obs.modality)),
                  i);
    }
  }
  if (raw.event_time) {
    if (!std::isfinite(*raw.event_time)) {
      throw Error(ErrorKind::NonFiniteValue, "episode " + raw.id + ": event time is not finite");
    }
    if (*raw.event_time < 0.0) {
      throw Error(ErrorKind::NegativeTimestamp, "episode " + raw.id + ": negative event time");
    }
  }
  std::stable_sort(raw.observations.begin(), raw.observations.end(),
                   [](const Observation& a, const Observation& b) { return a.t < b.t; });
  if (raw.observations.empty()) raw.metadata["empty"] = "true";
  return raw;
}

std::vector<Episode> validate_cohort(std::vector<Episode> raw) {
  std::set<std::string> seen;
  for (auto& episode : raw) {
    episode = validate_episode(std::move(episode));
    if (!seen.insert(episode.id).second) {
      throw Error(ErrorKind::DuplicateEpisode, "episode id " + episode.id + " appears twice");
    }
  }
  return raw;
}

std::span<const Observation> prefix(const Episode& episode, Hours at) {
  const auto& obs = episode.observations;
  const auto end = std::upper_bound(obs.begin(), obs.end(), at,
                                    [](Hours t, const Observation& o) { return t < o.t; });
  return {obs.data(), static_cast<std::size_t>(end - obs.begin())};
}

void TaskConfig::validate() const {
  auto positive = [](double v) { return std::isfinite(v) && v > 0.0; };
  if (!positive(horizon_h)) throw Error(ErrorKind::InvalidConfig, "horizon h must be positive");
  if (probe_radii_b.empty()) throw Error(ErrorKind::InvalidConfig, "at least one probe radius b");
  if (!positive(pairing_window_c)) {
    throw Error(ErrorKind::InvalidConfig, "pairing window c must be positive");
  }
  for (double b : probe_radii_b) {
    if (!positive(b)) throw Error(ErrorKind::InvalidConfig, "probe radius b must be positive");
    if (pairing_window_c > 2.0 * b) {
      throw Error(ErrorKind::InvalidConfig, "pairing window c exceeds 2b for b = " + std::to_string(b));
    }
  }
  if (!(alert_threshold_tau > 0.0 && alert_threshold_tau < 1.0)) {
    throw Error(ErrorKind::InvalidConfig, "alert threshold tau must lie in (0, 1)");
  }
  if (probe_policy.kind == ProbePolicy::Kind::fixed_grid && !positive(probe_policy.step)) {
    throw Error(ErrorKind::InvalidConfig, "fixed grid probe step must be positive");
  }
}

}  // namespace riskstab
