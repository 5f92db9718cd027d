#pragma once

#include <filesystem>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "riskstab/event_model.hpp"
#include "riskstab/labeling.hpp"

namespace riskstab {

/// A plain-text `key = value` document. `#` starts a comment; keys may repeat.
struct KeyValueDoc {
  struct Entry {
    std::string key;
    std::string value;
    std::size_t line = 0;
  };
  std::vector<Entry> entries;

  static KeyValueDoc parse(std::string_view text);
  static KeyValueDoc load(const std::filesystem::path& path);
};

enum class Detector { threshold, decompensation, sepsis, marker };

std::string_view to_string(Detector d);

/// Everything needed to label and evaluate one prediction task.
struct TaskSpec {
  std::string name;
  Detector detector = Detector::marker;
  TaskConfig config;
  ThresholdRule threshold_rule;                          // threshold
  std::vector<VitalRule> vital_rules = default_vital_rules();  // decompensation
  EsofaConfig esofa;                                     // sepsis
  std::string event_code;                                // marker

  bool operator==(const TaskSpec&) const = default;
  void validate() const;
};

/// Names of the shipped presets.
const std::vector<std::string>& preset_names();
/// Built-in preset; throws InvalidConfig for unknown names.
TaskSpec preset(std::string_view name);

/// Applies `doc` on top of `base`. A `preset` key, when present, replaces
/// `base` before the remaining keys apply.
TaskSpec task_from_doc(const KeyValueDoc& doc, TaskSpec base = {});
TaskSpec load_task_file(const std::filesystem::path& path);
std::string to_task_text(const TaskSpec& spec);

struct TaskLabel {
  std::string episode_id;
  bool included = true;
  std::string exclusion;  // reason when not included
  std::optional<Hours> event_time;
  std::vector<TraceEntry> criteria_trace;

  bool operator==(const TaskLabel&) const = default;
};

/// Runs the task's detector on one episode.
TaskLabel label_episode(const Episode& episode, const TaskSpec& spec);

/// Shortest round-trip text for a double.
std::string format_double(double v);

}  // namespace riskstab
