#pragma once

#include <string>
#include <vector>

#include "riskstab/event_model.hpp"

namespace riskstab::testing {

inline Observation lab(std::string code, double v, Hours t) {
  return {Modality::lab, CodedNumeric{std::move(code), v}, t};
}
inline Observation vital(std::string code, double v, Hours t) {
  return {Modality::vital, CodedNumeric{std::move(code), v}, t};
}
inline Observation med(std::string code, Hours t) { return {Modality::medication, Marker{std::move(code)}, t}; }
inline Observation proc(std::string code, Hours t) { return {Modality::procedure, Marker{std::move(code)}, t}; }
inline Observation admin(std::string code, Hours t) { return {Modality::admin, Marker{std::move(code)}, t}; }

inline Episode episode(std::string id, std::vector<Observation> obs) {
  return validate_episode(Episode{std::move(id), std::move(obs), std::nullopt, {}});
}

/// Episode with one numeric vital per timestamp.
inline Episode timeline(std::string id, const std::vector<Hours>& times) {
  std::vector<Observation> obs;
  for (Hours t : times) obs.push_back({Modality::vital, Numeric{1.0}, t});
  return episode(std::move(id), std::move(obs));
}

}  // namespace riskstab::testing
