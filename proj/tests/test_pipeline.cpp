#include <doctest.h>

#include <filesystem>
#include <fstream>
#include <sstream>

#include "riskstab/error.hpp"
#include "riskstab/pipeline.hpp"

using namespace riskstab;
namespace fs = std::filesystem;

namespace {

fs::path scratch(const std::string& name) {
  const fs::path dir = fs::path(RISKSTAB_TEST_TMP) / "pipeline" / name;
  fs::remove_all(dir);
  fs::create_directories(dir);
  return dir;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

fs::path synth_events(const fs::path& dir, const std::string& profile, std::size_t n = 400) {
  SynthConfig cfg;
  cfg.n_episodes = n;
  cfg.profile = profile;
  cfg.horizon_h = profile_horizon(profile);
  cfg.mean_duration = profile_duration(profile);
  cfg.seed = 21;
  const auto path = dir / "events.jsonl";
  write_event_file(path, generate_cohort(cfg));
  return path;
}

std::string stage_of(const RunConfig& cfg) {
  try {
    run_pipeline(cfg);
  } catch (const Error& e) {
    return e.stage();
  }
  return "none";
}

}  // namespace

TEST_CASE("sepsis cohort with the oracle scorer") {
  const auto dir = scratch("sepsis");
  RunConfig cfg;
  cfg.task = preset("sepsis");
  cfg.events = synth_events(dir, "sepsis");
  cfg.out_dir = dir / "out";
  cfg.scorer = parse_scorer("oracle");
  const auto report = run_pipeline(cfg);
  REQUIRE(report.aggregate.size() == 2);
  for (const auto& agg : report.aggregate) {
    CHECK(agg.auroc.mean >= 0.99);
    CHECK(agg.folds == 5);
  }
  CHECK(report.folds.size() == 10);
  const OutputPaths out(cfg.out_dir);
  for (const auto& p : {out.labels, out.instances, out.trajectories, out.fold_rows, out.report, out.report_table}) {
    CHECK(fs::exists(p));
  }
}

TEST_CASE("pipeline reruns are byte-identical") {
  const auto dir = scratch("rerun");
  RunConfig cfg;
  cfg.task = preset("icu_transfer");
  cfg.events = synth_events(dir, "icu_transfer");
  cfg.scorer = parse_scorer("noisy:0.2");
  cfg.seed = 5;
  cfg.out_dir = dir / "a";
  run_pipeline(cfg);
  cfg.out_dir = dir / "b";
  run_pipeline(cfg);
  const OutputPaths a(dir / "a"), b(dir / "b");
  CHECK(slurp(a.instances) == slurp(b.instances));
  CHECK(slurp(a.trajectories) == slurp(b.trajectories));
  CHECK(slurp(a.fold_rows) == slurp(b.fold_rows));
  CHECK(slurp(a.report) == slurp(b.report));
  CHECK(slurp(a.report_table) == slurp(b.report_table));
  CHECK_FALSE(slurp(a.report).empty());

  cfg.seed = 6;
  cfg.out_dir = dir / "c";
  run_pipeline(cfg);
  CHECK(slurp(OutputPaths(dir / "c").instances) != slurp(a.instances));
}

TEST_CASE("external trajectories reproduce the bundled scorer") {
  const auto dir = scratch("external");
  RunConfig cfg;
  cfg.task = preset("hyperkalemia");
  cfg.events = synth_events(dir, "hyperkalemia");
  cfg.scorer = parse_scorer("windowed_mean");
  cfg.out_dir = dir / "first";
  const auto first = run_pipeline(cfg);
  fs::copy_file(OutputPaths(cfg.out_dir).trajectories, dir / "scores.jsonl");
  cfg.trajectories = dir / "scores.jsonl";
  cfg.out_dir = dir / "second";
  const auto second = run_pipeline(cfg);
  CHECK(first.folds == second.folds);
}

TEST_CASE("errors carry their stage") {
  const auto dir = scratch("errors");
  RunConfig cfg;
  cfg.task = preset("mortality");
  cfg.out_dir = dir / "out";

  cfg.events = dir / "missing.jsonl";
  CHECK(stage_of(cfg) == "parse");

  cfg.events = synth_events(dir, "mortality", 200);
  cfg.folds = 1;
  CHECK(stage_of(cfg) == "config");

  cfg.folds = 500;  // more folds than positives
  CHECK(stage_of(cfg) == "sample");

  cfg.folds = 5;
  {
    std::ofstream bad(dir / "bad_scores.jsonl");
    bad << R"({"episode_id":"nobody","T_hours":1,"t":1,"score":0.5})" << "\n";
  }
  cfg.trajectories = dir / "bad_scores.jsonl";
  CHECK(stage_of(cfg) == "evaluate");
}

TEST_CASE("run configuration files") {
  const auto dir = scratch("config");
  {
    std::ofstream out(dir / "run.cfg");
    out << "# demo\n"
           "task = hyperkalemia\n"
           "events = data/events.jsonl\n"
           "out = results\n"
           "scorer = noisy:0.1\n"
           "seed = 42\n"
           "folds = 3\n"
           "probe_radius_b = 2\n";
  }
  const auto cfg = load_run_config(dir / "run.cfg");
  CHECK(cfg.task.name == "hyperkalemia");
  CHECK(cfg.task.config.horizon_h == 1.0);
  CHECK(cfg.task.config.probe_radii_b == std::vector<Hours>{2.0});
  CHECK(cfg.events == dir / "data" / "events.jsonl");
  CHECK(cfg.out_dir == dir / "results");
  CHECK(cfg.scorer.sigma == 0.1);
  CHECK(cfg.seed == 42);
  CHECK(cfg.folds == 3);

  {
    std::ofstream out(dir / "bad.cfg");
    out << "task = sepsis\nseed = many\n";
  }
  CHECK_THROWS_AS(load_run_config(dir / "bad.cfg"), Error);
}
