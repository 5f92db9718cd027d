#include "riskstab/task.hpp"

#include <charconv>
#include <fstream>
#include <sstream>

namespace riskstab {
namespace {

std::string trim(std::string_view s) {
  const auto first = s.find_first_not_of(" \t\r");
  if (first == std::string_view::npos) return {};
  const auto last = s.find_last_not_of(" \t\r");
  return std::string(s.substr(first, last - first + 1));
}

std::vector<std::string> split(std::string_view s, char sep) {
  std::vector<std::string> out;
  std::size_t start = 0;
  while (true) {
    const auto pos = s.find(sep, start);
    auto item = trim(s.substr(start, pos == std::string_view::npos ? std::string_view::npos : pos - start));
    if (!item.empty()) out.push_back(std::move(item));
    if (pos == std::string_view::npos) break;
    start = pos + 1;
  }
  return out;
}

std::vector<std::string> words(std::string_view s) {
  std::vector<std::string> out;
  std::istringstream in{std::string(s)};
  for (std::string w; in >> w;) out.push_back(w);
  return out;
}

[[noreturn]] void bad(const KeyValueDoc::Entry& e, const std::string& what) {
  throw Error(ErrorKind::InvalidConfig, "line " + std::to_string(e.line) + " (" + e.key + "): " + what,
              e.line);
}

double to_double(const KeyValueDoc::Entry& e, std::string_view text) {
  double v = 0.0;
  const auto s = trim(text);
  const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc() || ptr != s.data() + s.size()) bad(e, "not a number: '" + s + "'");
  return v;
}

Direction to_direction(const KeyValueDoc::Entry& e, std::string_view text) {
  if (text == "above") return Direction::above;
  if (text == "below") return Direction::below;
  bad(e, "direction must be above or below");
}

VitalSign to_vital(const KeyValueDoc::Entry& e, std::string_view text) {
  if (text == "heart_rate") return VitalSign::heart_rate;
  if (text == "systolic_bp") return VitalSign::systolic_bp;
  if (text == "spo2") return VitalSign::spo2;
  bad(e, "unknown vital '" + std::string(text) + "'");
}

std::string_view vital_name(VitalSign v) {
  switch (v) {
    case VitalSign::heart_rate: return "heart_rate";
    case VitalSign::systolic_bp: return "systolic_bp";
    case VitalSign::spo2: return "spo2";
  }
  return "";
}

std::string join(const std::set<std::string>& items) {
  std::string out;
  for (const auto& s : items) out += (out.empty() ? "" : ", ") + s;
  return out;
}

bool set_esofa(EsofaConfig& cfg, const KeyValueDoc::Entry& e) {
  const std::string_view key = e.key;
  if (!key.starts_with("esofa.")) return false;
  const auto field = key.substr(6);
  auto& c = cfg.codes;
  if (field == "culture_window_days") cfg.culture_window_days = to_double(e, e.value);
  else if (field == "antibiotic_coverage_hours") cfg.antibiotic_coverage_hours = to_double(e, e.value);
  else if (field == "max_gap_between_doses_hours") cfg.max_gap_between_doses_hours = to_double(e, e.value);
  else if (field == "lactate_threshold") cfg.lactate_threshold = to_double(e, e.value);
  else if (field == "bilirubin_threshold") cfg.bilirubin_threshold = to_double(e, e.value);
  else if (field == "platelet_threshold") cfg.platelet_threshold = to_double(e, e.value);
  else if (field == "platelet_decline_frac") cfg.platelet_decline_frac = to_double(e, e.value);
  else if (field == "creatinine_doubling_frac") cfg.creatinine_doubling_frac = to_double(e, e.value);
  else if (field == "code.temperature") c.temperature = e.value;
  else if (field == "code.heart_rate") c.heart_rate = e.value;
  else if (field == "code.resp_rate") c.resp_rate = e.value;
  else if (field == "code.wbc") c.wbc = e.value;
  else if (field == "code.iv_antibiotics") { auto v = split(e.value, ','); c.iv_antibiotics = {v.begin(), v.end()}; }
  else if (field == "code.antibiotics") { auto v = split(e.value, ','); c.antibiotics = {v.begin(), v.end()}; }
  else if (field == "code.blood_culture") c.blood_culture = e.value;
  else if (field == "code.vasopressor") c.vasopressor = e.value;
  else if (field == "code.mechanical_ventilation") c.mechanical_ventilation = e.value;
  else if (field == "code.creatinine") c.creatinine = e.value;
  else if (field == "code.bilirubin") c.bilirubin = e.value;
  else if (field == "code.platelets") c.platelets = e.value;
  else if (field == "code.lactate") c.lactate = e.value;
  else bad(e, "unknown eSOFA field");
  return true;
}

TaskSpec make_preset(std::string_view name) {
  TaskSpec spec;
  spec.name = std::string(name);
  spec.config.probe_radii_b = {0.5, 4.0};
  if (name == "hyperkalemia") {
    spec.detector = Detector::threshold;
    spec.config.horizon_h = 1.0;
    spec.threshold_rule = {"potassium_above_7",
                           {"LOINC/LG7931-1", "LOINC/LP386618-5", "LOINC/LG10990-6", "LOINC/6298-4",
                            "LOINC/2823-3"},
                           Direction::above,
                           7.0};
  } else if (name == "hypoglycemia") {
    spec.detector = Detector::threshold;
    spec.config.horizon_h = 1.0;
    spec.threshold_rule = {"glucose_below_3",
                           {"SNOMED/33747003", "LOINC/LP416145-3", "LOINC/14749-6"},
                           Direction::below,
                           3.0};
  } else if (name == "decompensation") {
    spec.detector = Detector::decompensation;
    spec.config.horizon_h = 1.5;
  } else if (name == "sepsis") {
    spec.detector = Detector::sepsis;
    spec.config.horizon_h = 1.5;
  } else if (name == "icu_transfer") {
    spec.detector = Detector::marker;
    spec.config.horizon_h = 6.0;
    spec.config.probe_radii_b = {3.0};
    spec.event_code = "ICU_TRANSFER";
  } else if (name == "mortality") {
    spec.detector = Detector::marker;
    spec.config.horizon_h = 12.0;
    spec.config.probe_radii_b = {3.0};
    spec.event_code = "DEATH";
  } else {
    throw Error(ErrorKind::InvalidConfig, "unknown task preset '" + std::string(name) + "'");
  }
  return spec;
}

}  // namespace

std::string format_double(double v) {
  char buf[64];
  const auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, ptr);
}

KeyValueDoc KeyValueDoc::parse(std::string_view text) {
  KeyValueDoc doc;
  std::size_t line_no = 0;
  std::size_t start = 0;
  while (start <= text.size()) {
    const auto end = text.find('\n', start);
    std::string_view line = text.substr(start, end == std::string_view::npos ? std::string_view::npos : end - start);
    ++line_no;
    if (const auto hash = line.find('#'); hash != std::string_view::npos) line = line.substr(0, hash);
    const auto stripped = trim(line);
    if (!stripped.empty()) {
      const auto eq = stripped.find('=');
      if (eq == std::string::npos) {
        throw Error(ErrorKind::InvalidConfig, "line " + std::to_string(line_no) + ": expected key = value",
                    line_no);
      }
      doc.entries.push_back({trim(std::string_view(stripped).substr(0, eq)),
                             trim(std::string_view(stripped).substr(eq + 1)), line_no});
    }
    if (end == std::string_view::npos) break;
    start = end + 1;
  }
  return doc;
}

KeyValueDoc KeyValueDoc::load(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorKind::Io, "cannot open " + path.string());
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse(buf.str());
}

std::string_view to_string(Detector d) {
  switch (d) {
    case Detector::threshold: return "threshold";
    case Detector::decompensation: return "decompensation";
    case Detector::sepsis: return "sepsis";
    case Detector::marker: return "marker";
  }
  return "";
}

void TaskSpec::validate() const {
  config.validate();
  switch (detector) {
    case Detector::threshold: threshold_rule.validate(); break;
    case Detector::decompensation:
      if (vital_rules.empty()) throw Error(ErrorKind::InvalidConfig, "decompensation needs vital rules");
      for (const auto& r : vital_rules) r.validate();
      break;
    case Detector::sepsis: esofa.validate(); break;
    case Detector::marker:
      if (event_code.empty()) throw Error(ErrorKind::InvalidConfig, "marker task needs an event_code");
      break;
  }
}

const std::vector<std::string>& preset_names() {
  static const std::vector<std::string> names{"hyperkalemia", "hypoglycemia", "decompensation",
                                              "sepsis",       "icu_transfer", "mortality"};
  return names;
}

TaskSpec preset(std::string_view name) { return make_preset(name); }

TaskSpec task_from_doc(const KeyValueDoc& doc, TaskSpec base) {
  TaskSpec spec = std::move(base);
  for (const auto& e : doc.entries) {
    if (e.key == "preset") spec = preset(e.value);
  }
  bool vitals_reset = false;
  for (const auto& e : doc.entries) {
    const auto& k = e.key;
    if (k == "preset") continue;
    if (k == "name") spec.name = e.value;
    else if (k == "detector") {
      if (e.value == "threshold") spec.detector = Detector::threshold;
      else if (e.value == "decompensation") spec.detector = Detector::decompensation;
      else if (e.value == "sepsis") spec.detector = Detector::sepsis;
      else if (e.value == "marker") spec.detector = Detector::marker;
      else bad(e, "unknown detector");
    } else if (k == "horizon_h") spec.config.horizon_h = to_double(e, e.value);
    else if (k == "probe_radius_b") {
      spec.config.probe_radii_b.clear();
      for (const auto& item : split(e.value, ',')) spec.config.probe_radii_b.push_back(to_double(e, item));
    } else if (k == "pairing_window_c") spec.config.pairing_window_c = to_double(e, e.value);
    else if (k == "alert_threshold_tau") spec.config.alert_threshold_tau = to_double(e, e.value);
    else if (k == "probe_policy") {
      const auto w = words(e.value);
      if (w.size() == 1 && w[0] == "every_observation") spec.config.probe_policy = {};
      else if (w.size() == 2 && w[0] == "fixed_grid") {
        spec.config.probe_policy = {ProbePolicy::Kind::fixed_grid, to_double(e, w[1])};
      } else bad(e, "expected 'every_observation' or 'fixed_grid STEP'");
    } else if (k == "rule.name") spec.threshold_rule.name = e.value;
    else if (k == "rule.codes") {
      const auto v = split(e.value, ',');
      spec.threshold_rule.code_set = {v.begin(), v.end()};
    } else if (k == "rule.direction") spec.threshold_rule.direction = to_direction(e, e.value);
    else if (k == "rule.threshold") spec.threshold_rule.threshold = to_double(e, e.value);
    else if (k == "vital_rule") {
      const auto w = words(e.value);
      if (w.size() != 4) bad(e, "expected 'NAME VITAL above|below THRESHOLD'");
      if (!vitals_reset) {
        spec.vital_rules.clear();
        vitals_reset = true;
      }
      spec.vital_rules.push_back({to_vital(e, w[1]), to_direction(e, w[2]), to_double(e, w[3]), w[0]});
    } else if (k == "event_code") spec.event_code = e.value;
    else if (!set_esofa(spec.esofa, e)) bad(e, "unknown key");
  }
  spec.validate();
  return spec;
}

TaskSpec load_task_file(const std::filesystem::path& path) { return task_from_doc(KeyValueDoc::load(path)); }

std::string to_task_text(const TaskSpec& spec) {
  std::ostringstream out;
  const auto& c = spec.config;
  out << "name = " << spec.name << "\n";
  out << "detector = " << to_string(spec.detector) << "\n";
  out << "horizon_h = " << format_double(c.horizon_h) << "\n";
  out << "probe_radius_b = ";
  for (std::size_t i = 0; i < c.probe_radii_b.size(); ++i) {
    out << (i ? ", " : "") << format_double(c.probe_radii_b[i]);
  }
  out << "\n";
  out << "pairing_window_c = " << format_double(c.pairing_window_c) << "\n";
  out << "alert_threshold_tau = " << format_double(c.alert_threshold_tau) << "\n";
  if (c.probe_policy.kind == ProbePolicy::Kind::fixed_grid) {
    out << "probe_policy = fixed_grid " << format_double(c.probe_policy.step) << "\n";
  } else {
    out << "probe_policy = every_observation\n";
  }
  switch (spec.detector) {
    case Detector::threshold: {
      const auto& r = spec.threshold_rule;
      out << "rule.name = " << r.name << "\n";
      out << "rule.codes = " << join(r.code_set) << "\n";
      out << "rule.direction = " << (r.direction == Direction::above ? "above" : "below") << "\n";
      out << "rule.threshold = " << format_double(r.threshold) << "\n";
      break;
    }
    case Detector::decompensation:
      for (const auto& r : spec.vital_rules) {
        out << "vital_rule = " << r.name << " " << vital_name(r.vital) << " "
            << (r.direction == Direction::above ? "above" : "below") << " " << format_double(r.threshold)
            << "\n";
      }
      break;
    case Detector::sepsis: {
      const auto& s = spec.esofa;
      out << "esofa.culture_window_days = " << format_double(s.culture_window_days) << "\n";
      out << "esofa.antibiotic_coverage_hours = " << format_double(s.antibiotic_coverage_hours) << "\n";
      out << "esofa.max_gap_between_doses_hours = " << format_double(s.max_gap_between_doses_hours) << "\n";
      out << "esofa.lactate_threshold = " << format_double(s.lactate_threshold) << "\n";
      out << "esofa.bilirubin_threshold = " << format_double(s.bilirubin_threshold) << "\n";
      out << "esofa.platelet_threshold = " << format_double(s.platelet_threshold) << "\n";
      out << "esofa.platelet_decline_frac = " << format_double(s.platelet_decline_frac) << "\n";
      out << "esofa.creatinine_doubling_frac = " << format_double(s.creatinine_doubling_frac) << "\n";
      const auto& k = s.codes;
      out << "esofa.code.temperature = " << k.temperature << "\n";
      out << "esofa.code.heart_rate = " << k.heart_rate << "\n";
      out << "esofa.code.resp_rate = " << k.resp_rate << "\n";
      out << "esofa.code.wbc = " << k.wbc << "\n";
      out << "esofa.code.iv_antibiotics = " << join(k.iv_antibiotics) << "\n";
      out << "esofa.code.antibiotics = " << join(k.antibiotics) << "\n";
      out << "esofa.code.blood_culture = " << k.blood_culture << "\n";
      out << "esofa.code.vasopressor = " << k.vasopressor << "\n";
      out << "esofa.code.mechanical_ventilation = " << k.mechanical_ventilation << "\n";
      out << "esofa.code.creatinine = " << k.creatinine << "\n";
      out << "esofa.code.bilirubin = " << k.bilirubin << "\n";
      out << "esofa.code.platelets = " << k.platelets << "\n";
      out << "esofa.code.lactate = " << k.lactate << "\n";
      break;
    }
    case Detector::marker: out << "event_code = " << spec.event_code << "\n"; break;
  }
  return out.str();
}

TaskLabel label_episode(const Episode& episode, const TaskSpec& spec) {
  TaskLabel label;
  label.episode_id = episode.id;
  switch (spec.detector) {
    case Detector::threshold:
      label.event_time = detect_threshold_event(episode, spec.threshold_rule);
      if (label.event_time) label.criteria_trace.push_back({spec.threshold_rule.name, *label.event_time});
      break;
    case Detector::decompensation: {
      DecompensationResult r;
      try {
        r = detect_decompensation_onset(episode, spec.vital_rules);
      } catch (const Error& e) {
        if (e.kind() != ErrorKind::MissingVitals) throw;
        label.included = false;
        label.exclusion = "missing_vitals";
        return label;
      }
      if (!r.in_cohort) {
        label.included = false;
        label.exclusion = "abnormal_initial_vitals";
        return label;
      }
      label.event_time = r.onset;
      if (r.onset) label.criteria_trace.push_back({"decompensation", *r.onset});
      break;
    }
    case Detector::sepsis: {
      auto cohort = sepsis_cohort_filter(episode, spec.esofa.codes);
      if (!cohort.included) {
        label.included = false;
        label.exclusion = "sepsis_cohort";
        label.criteria_trace = std::move(cohort.criteria_trace);
        return label;
      }
      auto outcome = esofa_sepsis_label(episode, spec.esofa);
      label.event_time = outcome.event_time;
      label.criteria_trace = std::move(outcome.criteria_trace);
      break;
    }
    case Detector::marker:
      label.event_time = generic_event_label(episode, spec.event_code);
      if (label.event_time) label.criteria_trace.push_back({spec.event_code, *label.event_time});
      break;
  }
  return label;
}

}  // namespace riskstab
