#include "riskstab/io.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <set>
#include <sstream>

#include <nlohmann/json.hpp>

namespace riskstab {
namespace {

using nlohmann::json;
using nlohmann::ordered_json;

std::ifstream open_in(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorKind::Io, "cannot open " + path.string());
  return in;
}

std::ofstream open_out(const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error(ErrorKind::Io, "cannot write " + path.string());
  return out;
}

[[noreturn]] void malformed(std::size_t line, const std::string& what) {
  throw Error(ErrorKind::MalformedRecord, "line " + std::to_string(line) + ": " + what, line);
}

/// Calls fn(record, line) for each non-blank line.
template <typename Fn>
void for_each_record(std::istream& in, Fn fn) {
  std::string text;
  std::size_t line = 0;
  while (std::getline(in, text)) {
    ++line;
    if (text.find_first_not_of(" \t\r") == std::string::npos) continue;
    json record;
    try {
      record = json::parse(text);
    } catch (const json::parse_error& e) {
      malformed(line, std::string("not valid JSON: ") + e.what());
    }
    if (!record.is_object()) malformed(line, "record is not an object");
    fn(record, line);
  }
}

const json& field(const json& r, const char* key, std::size_t line) {
  const auto it = r.find(key);
  if (it == r.end() || it->is_null()) malformed(line, std::string("missing field '") + key + "'");
  return *it;
}

double number_field(const json& r, const char* key, std::size_t line) {
  const auto& v = field(r, key, line);
  if (!v.is_number()) malformed(line, std::string("field '") + key + "' is not a number");
  return v.get<double>();
}

std::string string_field(const json& r, const char* key, std::size_t line) {
  const auto& v = field(r, key, line);
  if (!v.is_string()) malformed(line, std::string("field '") + key + "' is not a string");
  return v.get<std::string>();
}

std::size_t count_field(const json& r, const char* key, std::size_t line) {
  const auto& v = field(r, key, line);
  if (!v.is_number_unsigned() && !(v.is_number_integer() && v.get<long long>() >= 0)) {
    malformed(line, std::string("field '") + key + "' is not a non-negative integer");
  }
  return v.get<std::size_t>();
}

template <typename Row>
void write_lines(const std::filesystem::path& path, const std::vector<Row>& rows) {
  auto out = open_out(path);
  for (const auto& row : rows) out << row.dump() << '\n';
  if (!out) throw Error(ErrorKind::Io, "failed writing " + path.string());
}

ordered_json fold_row_json(const FoldRow& r) {
  ordered_json j;
  j["task"] = r.task;
  j["fold"] = r.fold;
  j["b"] = r.b;
  j["auroc"] = r.auroc;
  j["auprc"] = r.auprc;
  j["f1"] = r.f1;
  j["stability"] = r.stability;
  j["stability_inclusive"] = r.stability_inclusive;
  j["flips"] = r.flips;
  j["n"] = r.n;
  j["n_positive"] = r.n_positive;
  j["n_degenerate"] = r.n_degenerate;
  j["prevalence"] = r.prevalence;
  return j;
}

}  // namespace

std::vector<Episode> parse_events(std::istream& in, std::vector<std::string>* warnings) {
  static const std::set<std::string> known{"episode_id", "modality", "code", "value", "t_hours"};
  std::set<std::string> warned;
  std::vector<Episode> episodes;
  std::map<std::string, std::size_t> index;
  std::map<std::string, std::vector<std::size_t>> lines;  // per episode, per observation

  for_each_record(in, [&](const json& r, std::size_t line) {
    for (const auto& [key, _] : r.items()) {
      if (!known.contains(key) && warned.insert(key).second && warnings) {
        warnings->push_back("line " + std::to_string(line) + ": ignoring unknown field '" + key + "'");
      }
    }
    const std::string id = string_field(r, "episode_id", line);
    if (id.empty()) malformed(line, "empty episode_id");
    const std::string mod_name = string_field(r, "modality", line);
    const auto modality = parse_modality(mod_name);
    if (!modality) {
      throw Error(ErrorKind::UnknownModality, "line " + std::to_string(line) + ": '" + mod_name + "'", line);
    }
    const double t = number_field(r, "t_hours", line);
    if (t < 0.0) {
      throw Error(ErrorKind::NegativeTimestamp, "line " + std::to_string(line) + ": t_hours = " +
                                                    format_double(t), line);
    }
    std::optional<std::string> code;
    if (const auto it = r.find("code"); it != r.end() && !it->is_null()) {
      if (!it->is_string()) malformed(line, "field 'code' is not a string");
      code = it->get<std::string>();
      if (code->empty()) code.reset();
    }
    const auto& v = field(r, "value", line);
    ObservationValue value;
    if (v.is_number()) {
      const double x = v.get<double>();
      if (code) value = CodedNumeric{*code, x};
      else value = Numeric{x};
    } else if (v.is_string()) {
      if (*modality == Modality::text) value = Text{v.get<std::string>()};
      else value = Marker{code.value_or(v.get<std::string>())};
    } else {
      malformed(line, "field 'value' must be a number or a string");
    }
    Observation obs{*modality, std::move(value), t};
    if (!variant_permitted(obs.modality, obs.value)) {
      throw Error(ErrorKind::InvalidVariant,
                  "line " + std::to_string(line) + ": value kind not allowed for modality " + mod_name, line);
    }

    auto [it, inserted] = index.emplace(id, episodes.size());
    if (inserted) episodes.push_back(Episode{id, {}, std::nullopt, {}});
    episodes[it->second].observations.push_back(std::move(obs));
    lines[id].push_back(line);
  });

  for (auto& e : episodes) {
    try {
      e = validate_episode(std::move(e));
    } catch (const Error& err) {
      if (!err.index()) throw;
      const std::size_t line = lines[e.id][*err.index()];
      throw Error(err.kind(), "line " + std::to_string(line) + ": " + err.what(), line);
    }
  }
  return episodes;
}

std::vector<Episode> parse_event_file(const std::filesystem::path& path, std::vector<std::string>* warnings) {
  auto in = open_in(path);
  return parse_events(in, warnings);
}

void write_events(std::ostream& out, const std::vector<Episode>& episodes) {
  for (const auto& e : episodes) {
    for (const auto& o : e.observations) {
      ordered_json j;
      j["episode_id"] = e.id;
      j["modality"] = std::string(to_string(o.modality));
      std::visit(
          [&](const auto& v) {
            using V = std::decay_t<decltype(v)>;
            if constexpr (std::is_same_v<V, Numeric>) {
              j["value"] = v.value;
            } else if constexpr (std::is_same_v<V, CodedNumeric>) {
              j["code"] = v.code;
              j["value"] = v.value;
            } else if constexpr (std::is_same_v<V, Text>) {
              j["value"] = v.text;
            } else {
              j["code"] = v.code;
              j["value"] = v.code;
            }
          },
          o.value);
      j["t_hours"] = o.t;
      out << j.dump() << '\n';
    }
  }
}

void write_event_file(const std::filesystem::path& path, const std::vector<Episode>& episodes) {
  auto out = open_out(path);
  write_events(out, episodes);
  if (!out) throw Error(ErrorKind::Io, "failed writing " + path.string());
}

void write_labels(const std::filesystem::path& path, const std::vector<TaskLabel>& labels) {
  std::vector<ordered_json> rows;
  for (const auto& l : labels) {
    ordered_json j;
    j["episode_id"] = l.episode_id;
    j["included"] = l.included;
    j["exclusion"] = l.exclusion;
    j["event_time"] = l.event_time ? ordered_json(*l.event_time) : ordered_json(nullptr);
    j["trace"] = ordered_json::array();
    for (const auto& t : l.criteria_trace) j["trace"].push_back({{"criterion", t.criterion}, {"t_hours", t.time}});
    rows.push_back(std::move(j));
  }
  write_lines(path, rows);
}

std::vector<TaskLabel> read_labels(const std::filesystem::path& path) {
  auto in = open_in(path);
  std::vector<TaskLabel> out;
  for_each_record(in, [&](const json& r, std::size_t line) {
    TaskLabel l;
    l.episode_id = string_field(r, "episode_id", line);
    const auto& inc = field(r, "included", line);
    if (!inc.is_boolean()) malformed(line, "field 'included' is not a boolean");
    l.included = inc.get<bool>();
    if (const auto it = r.find("exclusion"); it != r.end() && it->is_string()) l.exclusion = it->get<std::string>();
    if (const auto it = r.find("event_time"); it != r.end() && !it->is_null()) {
      if (!it->is_number()) malformed(line, "field 'event_time' is not a number");
      l.event_time = it->get<double>();
    }
    if (const auto it = r.find("trace"); it != r.end() && it->is_array()) {
      for (const auto& t : *it) {
        l.criteria_trace.push_back({string_field(t, "criterion", line), number_field(t, "t_hours", line)});
      }
    }
    out.push_back(std::move(l));
  });
  return out;
}

void write_instances(const std::filesystem::path& path, const std::vector<InstanceRecord>& records) {
  std::vector<ordered_json> rows;
  for (const auto& rec : records) {
    ordered_json j;
    j["episode_id"] = rec.instance.episode_id;
    j["T_hours"] = rec.instance.reference_time;
    j["label"] = rec.instance.label;
    j["elapsed_history"] = rec.instance.elapsed_history;
    j["fold"] = rec.fold;
    rows.push_back(std::move(j));
  }
  write_lines(path, rows);
}

std::vector<InstanceRecord> read_instances(const std::filesystem::path& path) {
  auto in = open_in(path);
  std::vector<InstanceRecord> out;
  for_each_record(in, [&](const json& r, std::size_t line) {
    InstanceRecord rec;
    rec.instance.episode_id = string_field(r, "episode_id", line);
    rec.instance.reference_time = number_field(r, "T_hours", line);
    const auto label = count_field(r, "label", line);
    if (label > 1) malformed(line, "label must be 0 or 1");
    rec.instance.label = static_cast<int>(label);
    rec.instance.elapsed_history = number_field(r, "elapsed_history", line);
    rec.fold = count_field(r, "fold", line);
    out.push_back(std::move(rec));
  });
  return out;
}

void write_trajectories(const std::filesystem::path& path, const std::vector<RiskTrajectory>& trajectories) {
  std::vector<ordered_json> rows;
  for (const auto& traj : trajectories) {
    for (const auto& p : traj.points) {
      ordered_json j;
      j["episode_id"] = traj.episode_id;
      j["T_hours"] = traj.reference_time;
      j["t"] = p.t;
      j["score"] = p.score;
      rows.push_back(std::move(j));
    }
  }
  write_lines(path, rows);
}

std::map<std::string, RiskTrajectory> read_trajectories(const std::filesystem::path& path) {
  auto in = open_in(path);
  std::map<std::string, RiskTrajectory> out;
  for_each_record(in, [&](const json& r, std::size_t line) {
    const auto id = string_field(r, "episode_id", line);
    const double ref = number_field(r, "T_hours", line);
    auto [it, inserted] = out.try_emplace(id);
    auto& traj = it->second;
    if (inserted) {
      traj.episode_id = id;
      traj.reference_time = ref;
    } else if (traj.reference_time != ref) {
      malformed(line, "episode " + id + " has more than one T_hours");
    }
    traj.points.push_back({number_field(r, "t", line), number_field(r, "score", line)});
  });
  for (auto& [_, traj] : out) traj.validate();
  return out;
}

void write_fold_rows(const std::filesystem::path& path, const std::vector<FoldRow>& rows) {
  std::vector<ordered_json> lines;
  for (const auto& r : rows) lines.push_back(fold_row_json(r));
  write_lines(path, lines);
}

std::vector<FoldRow> read_fold_rows(const std::filesystem::path& path) {
  auto in = open_in(path);
  std::vector<FoldRow> out;
  for_each_record(in, [&](const json& r, std::size_t line) {
    FoldRow row;
    row.task = string_field(r, "task", line);
    row.fold = count_field(r, "fold", line);
    row.b = number_field(r, "b", line);
    row.auroc = number_field(r, "auroc", line);
    row.auprc = number_field(r, "auprc", line);
    row.f1 = number_field(r, "f1", line);
    row.stability = number_field(r, "stability", line);
    row.stability_inclusive = number_field(r, "stability_inclusive", line);
    row.flips = number_field(r, "flips", line);
    row.n = count_field(r, "n", line);
    row.n_positive = count_field(r, "n_positive", line);
    row.n_degenerate = count_field(r, "n_degenerate", line);
    row.prevalence = number_field(r, "prevalence", line);
    out.push_back(std::move(row));
  });
  return out;
}

void write_report(const std::filesystem::path& path, const MetricReport& report) {
  std::vector<ordered_json> lines;
  for (const auto& r : report.folds) lines.push_back(fold_row_json(r));
  for (const auto& a : report.aggregate) {
    for (const bool is_std : {false, true}) {
      auto pick = [&](const MeanStd& m) { return is_std ? m.std : m.mean; };
      ordered_json j;
      j["task"] = a.task;
      j["fold"] = is_std ? "std" : "mean";
      j["b"] = a.b;
      j["auroc"] = pick(a.auroc);
      j["auprc"] = pick(a.auprc);
      j["f1"] = pick(a.f1);
      j["stability"] = pick(a.stability);
      j["stability_inclusive"] = pick(a.stability_inclusive);
      j["flips"] = pick(a.flips);
      j["n"] = a.n;
      j["prevalence"] = a.prevalence;
      lines.push_back(std::move(j));
    }
  }
  write_lines(path, lines);
}

std::string format_report_table(const MetricReport& report) {
  std::ostringstream out;
  char buf[256];
  std::snprintf(buf, sizeof(buf), "%-16s %-5s %6s %8s %8s %8s %10s %10s %8s %7s %10s\n", "task", "fold",
                "b", "auroc", "auprc", "f1", "stability", "stab_all", "flips", "n", "prevalence");
  out << buf;
  for (const auto& r : report.folds) {
    std::snprintf(buf, sizeof(buf), "%-16s %-5zu %6.2f %8.4f %8.4f %8.4f %10.4f %10.4f %8.3f %7zu %10.4f\n",
                  r.task.c_str(), r.fold, r.b, r.auroc, r.auprc, r.f1, r.stability, r.stability_inclusive,
                  r.flips, r.n, r.prevalence);
    out << buf;
  }
  for (const auto& a : report.aggregate) {
    std::snprintf(buf, sizeof(buf), "%-16s %-5s %6.2f %8.4f %8.4f %8.4f %10.4f %10.4f %8.3f %7zu %10.4f\n",
                  a.task.c_str(), "mean", a.b, a.auroc.mean, a.auprc.mean, a.f1.mean, a.stability.mean,
                  a.stability_inclusive.mean, a.flips.mean, a.n, a.prevalence);
    out << buf;
    std::snprintf(buf, sizeof(buf), "%-16s %-5s %6.2f %8.4f %8.4f %8.4f %10.4f %10.4f %8.3f %7s %10s\n",
                  a.task.c_str(), "std", a.b, a.auroc.std, a.auprc.std, a.f1.std, a.stability.std,
                  a.stability_inclusive.std, a.flips.std, "", "");
    out << buf;
  }
  return out.str();
}

}  // namespace riskstab
