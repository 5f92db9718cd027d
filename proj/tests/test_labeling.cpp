#include <doctest.h>

#include <random>

#include "helpers.hpp"
#include "riskstab/labeling.hpp"

using namespace riskstab;
using namespace riskstab::testing;

TEST_CASE("label_at uses the half-open interval (T, T+h]") {
  CHECK(label_at(2.0, 1.0, 1.5) == 1);
  CHECK(label_at(1.0, 1.0, 1.5) == 0);
  CHECK(label_at(2.5, 1.0, 1.5) == 1);
  CHECK(label_at(2.5000001, 1.0, 1.5) == 0);
  CHECK(label_at(std::nullopt, 1.0, 1.5) == 0);
}

TEST_CASE("label_at is monotone in the horizon") {
  std::mt19937_64 rng(3);
  std::uniform_real_distribution<double> u(0.0, 10.0);
  for (int i = 0; i < 2000; ++i) {
    const double e = u(rng), t = u(rng), h1 = u(rng) + 0.01, h2 = u(rng) + 0.01;
    CHECK(label_at(e, t, std::min(h1, h2)) <= label_at(e, t, std::max(h1, h2)));
  }
}

namespace {
const ThresholdRule kPotassium{"k_above_7", {"K"}, Direction::above, 7.0};
}

TEST_CASE("threshold event: earliest strict crossing") {
  CHECK(detect_threshold_event(episode("a", {lab("K", 7.2, 3.0), lab("K", 7.5, 5.0)}), kPotassium) == 3.0);
  CHECK(detect_threshold_event(episode("b", {lab("K", 6.9, 1), lab("K", 7.0, 2), lab("K", 7.1, 3)}),
                               kPotassium) == 3.0);
  const ThresholdRule glucose{"g_below_3", {"G"}, Direction::below, 3.0};
  CHECK_FALSE(detect_threshold_event(episode("c", {lab("G", 3.0, 1), lab("G", 4.0, 2)}), glucose));
  CHECK(detect_threshold_event(episode("d", {lab("G", 2.9, 4)}), glucose) == 4.0);
}

TEST_CASE("threshold event ignores other codes and modalities") {
  const auto e = episode("a", {lab("NA", 9.0, 1.0), vital("K", 9.0, 2.0), lab("K", 8.0, 3.0)});
  CHECK(detect_threshold_event(e, kPotassium) == 3.0);
}

TEST_CASE("threshold event matches an exhaustive scan on random episodes") {
  std::mt19937_64 rng(5);
  std::uniform_real_distribution<double> t(0.0, 50.0);
  std::normal_distribution<double> v(6.0, 0.8);
  for (int trial = 0; trial < 100; ++trial) {
    std::vector<Observation> obs;
    const int n = 1 + static_cast<int>(rng() % 1000);
    for (int i = 0; i < n; ++i) obs.push_back(lab(rng() % 4 ? "K" : "NA", v(rng), t(rng)));
    const auto e = episode("e", obs);
    std::optional<Hours> brute;
    for (const auto& o : obs) {
      if (o.code() == "K" && *o.number() > 7.0 && (!brute || o.t < *brute)) brute = o.t;
    }
    CHECK(detect_threshold_event(e, kPotassium) == brute);
  }
}

TEST_CASE("decompensation onset") {
  const auto rules = default_vital_rules();
  SUBCASE("new tachycardia") {
    const auto r = detect_decompensation_onset(episode("a", {vital("HR", 80, 0.0), vital("HR", 112, 0.5)}), rules);
    CHECK(r.in_cohort);
    CHECK(r.onset == 0.5);
  }
  SUBCASE("abnormal on arrival") {
    const auto r = detect_decompensation_onset(episode("a", {vital("HR", 120, 0.0), vital("HR", 80, 0.5)}), rules);
    CHECK_FALSE(r.in_cohort);
    CHECK_FALSE(r.onset);
  }
  SUBCASE("normal throughout") {
    const auto r = detect_decompensation_onset(
        episode("a", {vital("HR", 80, 0.0), vital("SBP", 120, 0.0), vital("SPO2", 98, 0.1), vital("HR", 90, 1.0)}),
        rules);
    CHECK(r.in_cohort);
    CHECK_FALSE(r.onset);
  }
  SUBCASE("earliest across rules") {
    const auto r = detect_decompensation_onset(
        episode("a", {vital("HR", 80, 0.0), vital("SBP", 120, 0.0), vital("SBP", 85, 2.0), vital("HR", 130, 3.0)}),
        rules);
    CHECK(r.onset == 2.0);
  }
  SUBCASE("first low SpO2 excludes") {
    const auto r = detect_decompensation_onset(episode("a", {vital("HR", 80, 0.0), vital("SPO2", 88, 0.2)}), rules);
    CHECK_FALSE(r.in_cohort);
  }
  SUBCASE("no vitals") {
    try {
      detect_decompensation_onset(episode("a", {lab("K", 4, 0)}), rules);
      FAIL("expected MissingVitals");
    } catch (const Error& e) {
      CHECK(e.kind() == ErrorKind::MissingVitals);
    }
  }
}

TEST_CASE("decompensation onset matches an exhaustive scan") {
  std::mt19937_64 rng(8);
  std::uniform_real_distribution<double> t(0.0, 10.0);
  std::normal_distribution<double> hr(85, 10);
  const auto rules = std::vector<VitalRule>{default_vital_rules()[0]};
  for (int trial = 0; trial < 300; ++trial) {
    std::vector<Observation> obs;
    for (int i = 0; i < 20; ++i) obs.push_back(vital("HR", hr(rng), t(rng)));
    const auto e = episode("e", obs);
    const auto r = detect_decompensation_onset(e, rules);
    const bool first_abnormal = *e.observations.front().number() > 100;
    CHECK(r.in_cohort == !first_abnormal);
    if (!first_abnormal) {
      std::optional<Hours> brute;
      for (std::size_t i = 1; i < e.observations.size(); ++i) {
        if (*e.observations[i].number() > 100) { brute = e.observations[i].t; break; }
      }
      CHECK(r.onset == brute);
    }
  }
}

TEST_CASE("sepsis cohort filter") {
  SUBCASE("fever and tachycardia, no antibiotics") {
    const auto d = sepsis_cohort_filter(episode("a", {vital("TEMP", 39.0, 2), vital("HR", 95, 3)}));
    CHECK(d.included);
  }
  SUBCASE("normal temperature") {
    const auto d = sepsis_cohort_filter(episode("a", {vital("TEMP", 37.0, 2), vital("HR", 95, 3)}));
    CHECK_FALSE(d.included);
  }
  SUBCASE("SIRS sign more than 12 h from the temperature") {
    const auto d = sepsis_cohort_filter(
        episode("a", {vital("TEMP", 35.5, 2), vital("HR", 95, 20), vital("RR", 16, 3), lab("WBC", 8, 3)}));
    CHECK_FALSE(d.included);
  }
  SUBCASE("no SIRS sign at all") {
    CHECK_FALSE(sepsis_cohort_filter(episode("a", {vital("TEMP", 39.0, 2), vital("HR", 80, 3)})).included);
  }
  SUBCASE("temperature after 24 h") {
    CHECK_FALSE(sepsis_cohort_filter(episode("a", {vital("TEMP", 39.0, 25), vital("HR", 95, 24)})).included);
  }
  SUBCASE("WBC low counts") {
    CHECK(sepsis_cohort_filter(episode("a", {vital("TEMP", 35.0, 1), lab("WBC", 3.5, 5)})).included);
  }
  SUBCASE("IV antibiotic at the first criterion time excludes") {
    const auto d = sepsis_cohort_filter(episode("a", {med("ABX_IV", 2), vital("TEMP", 39.0, 2), vital("HR", 95, 3)}));
    CHECK_FALSE(d.included);
  }
  SUBCASE("IV antibiotic after the first criterion is fine") {
    const auto d = sepsis_cohort_filter(episode("a", {vital("TEMP", 39.0, 2), med("ABX_IV", 2.5), vital("HR", 95, 3)}));
    CHECK(d.included);
  }
  SUBCASE("oral antibiotic before does not exclude") {
    CHECK(sepsis_cohort_filter(episode("a", {med("ABX_PO", 0), vital("TEMP", 39.0, 2), vital("HR", 95, 3)})).included);
  }
}

TEST_CASE("generic event label takes the first marker") {
  CHECK(generic_event_label(episode("a", {admin("ICU_TRANSFER", 5.0)}), "ICU_TRANSFER") == 5.0);
  CHECK_FALSE(generic_event_label(episode("a", {admin("OTHER", 5.0)}), "ICU_TRANSFER"));
  CHECK(generic_event_label(episode("a", {admin("DEATH", 9), admin("DEATH", 7)}), "DEATH") == 7.0);
}
