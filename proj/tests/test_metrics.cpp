#include <doctest.h>

#include <cmath>
#include <random>

#include "oracles.hpp"
#include "riskstab/error.hpp"
#include "riskstab/metrics.hpp"

using namespace riskstab;
using V = std::vector<double>;

namespace {

RiskTrajectory traj(std::string id, std::vector<std::pair<double, double>> pts, Hours ref) {
  RiskTrajectory t{std::move(id), {}, ref};
  for (const auto& [time, s] : pts) t.points.push_back({time, s});
  return t;
}

std::vector<std::pair<double, double>> pairs(const RiskTrajectory& t) {
  std::vector<std::pair<double, double>> out;
  for (const auto& p : t.points) out.emplace_back(p.t, p.score);
  return out;
}

V random_scores(std::mt19937_64& rng, std::size_t n, bool coarse) {
  V out(n);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  for (auto& v : out) v = coarse ? static_cast<double>(rng() % 5) / 4.0 : u(rng);
  return out;
}

}  // namespace

TEST_CASE("auroc examples") {
  CHECK(auroc(V{0.9, 0.8}, V{0.1, 0.2}) == 1.0);
  CHECK(auroc(V{0.5, 0.5}, V{0.5, 0.5, 0.5}) == 0.5);
  CHECK(auroc(V{0.8, 0.3}, V{0.5, 0.1}) == 0.75);
  CHECK_THROWS_AS(auroc(V{}, V{0.1}), Error);
  CHECK_THROWS_AS(auroc(V{0.1}, V{}), Error);
}

TEST_CASE("auprc examples") {
  CHECK(auprc(V{0.9}, V{0.1, 0.2, 0.3}) == 1.0);
  CHECK(auprc(V{0.9, 0.4}, V{0.6, 0.2}) == doctest::Approx(1.0 * 0.5 + (2.0 / 3.0) * 0.5).epsilon(1e-15));
  CHECK(auprc(V{0.0}, V{0.1, 0.2, 0.3, 0.4, 0.5, 0.6, 0.7, 0.8, 0.9}) == doctest::Approx(0.1).epsilon(1e-15));
  CHECK_THROWS_AS(auprc(V{0.9}, V{}), Error);
}

TEST_CASE("f1 examples") {
  CHECK(f1_at_threshold(V{0.9}, V{0.1}, 0.5) == 1.0);
  CHECK(f1_at_threshold(V{0.4}, V{0.1}, 0.5) == 0.0);
  CHECK(f1_at_threshold(V{0.9, 0.4}, V{0.6, 0.1}, 0.5) == 0.5);
  CHECK(f1_at_threshold(V{0.5}, V{0.1}, 0.5) == 1.0);  // score >= tau is an alert
  CHECK_THROWS_AS(f1_at_threshold(V{0.9}, V{0.1}, 0.0), Error);
  CHECK_THROWS_AS(f1_at_threshold(V{0.9}, V{0.1}, 1.0), Error);
}

TEST_CASE("ranking metrics agree with brute force") {
  std::mt19937_64 rng(17);
  for (int trial = 0; trial < 300; ++trial) {
    const bool coarse = trial % 2 == 0;
    const V pos = random_scores(rng, 1 + rng() % 40, coarse);
    const V neg = random_scores(rng, 1 + rng() % 40, coarse);
    const auto r = oracle::auroc(pos, neg);
    CHECK(auroc(pos, neg) == r.value());
    CHECK(std::abs(auprc(pos, neg) - oracle::auprc(pos, neg)) <= 1e-12);
    CHECK(std::abs(f1_at_threshold(pos, neg, 0.5) - oracle::f1(pos, neg, 0.5)) <= 1e-12);
  }
}

TEST_CASE("auroc symmetry and invariances") {
  std::mt19937_64 rng(23);
  for (int trial = 0; trial < 200; ++trial) {
    V pos = random_scores(rng, 1 + rng() % 30, trial % 3 == 0);
    V neg = random_scores(rng, 1 + rng() % 30, trial % 3 == 0);
    const double a = auroc(pos, neg);
    CHECK(auroc(neg, pos) == doctest::Approx(1.0 - a).epsilon(1e-15));
    V pos2 = pos, neg2 = neg;
    for (auto& v : pos2) v = std::exp(3.0 * v) + 10.0;  // strictly increasing map
    for (auto& v : neg2) v = std::exp(3.0 * v) + 10.0;
    CHECK(auroc(pos2, neg2) == a);
    CHECK(auprc(pos2, neg2) == doctest::Approx(auprc(pos, neg)).epsilon(1e-12));
    std::shuffle(pos.begin(), pos.end(), rng);
    std::shuffle(neg.begin(), neg.end(), rng);
    CHECK(auroc(pos, neg) == a);
  }
}

TEST_CASE("stability examples") {
  const auto flat = traj("a", {{0.0, 0.5}, {0.1, 0.5}, {0.2, 0.5}}, 0.1);
  const auto r0 = stability_lc(flat, 1.0, 1.0 / 6.0);
  CHECK(r0.lc == 0.0);
  CHECK(r0.pair_count == 2);  // 0.0 and 0.2 are more than c apart
  CHECK_FALSE(r0.degenerate);

  const auto one = stability_lc(traj("b", {{0.0, 0.2}, {0.1, 0.8}}, 0.0), 1.0, 1.0 / 6.0);
  CHECK(one.pair_count == 1);
  CHECK(one.lc == doctest::Approx(6.0).epsilon(1e-12));

  const auto skip = stability_lc(traj("c", {{0.0, 0.3}, {0.1, 0.4}, {0.3, 0.9}}, 0.1), 1.0, 1.0 / 6.0);
  CHECK(skip.pair_count == 1);
  CHECK(skip.lc == doctest::Approx(1.0).epsilon(1e-12));

  const auto lone = stability_lc(traj("d", {{0.0, 0.3}, {5.0, 0.9}}, 0.0), 1.0, 1.0 / 6.0);
  CHECK(lone.degenerate);
  CHECK(lone.lc == 0.0);
  CHECK(lone.pair_count == 0);
}

TEST_CASE("stability is invariant to translation and scales with score") {
  std::mt19937_64 rng(31);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  for (int trial = 0; trial < 100; ++trial) {
    RiskTrajectory t{"x", {}, 2.0};
    double time = 0.0;
    for (int i = 0; i < 30; ++i) t.points.push_back({time += 0.01 + 0.2 * u(rng), 0.5 * u(rng)});
    t.reference_time = t.points[15].t;
    const auto base = stability_lc(t, 1.0, 1.0 / 6.0);

    RiskTrajectory shifted = t;
    for (auto& p : shifted.points) p.t += 100.0;
    shifted.reference_time += 100.0;
    const auto moved = stability_lc(shifted, 1.0, 1.0 / 6.0);
    CHECK(moved.pair_count == base.pair_count);
    CHECK(moved.lc == doctest::Approx(base.lc).epsilon(1e-6));

    RiskTrajectory doubled = t;
    for (auto& p : doubled.points) p.score *= 2.0;
    CHECK(stability_lc(doubled, 1.0, 1.0 / 6.0).lc == doctest::Approx(2.0 * base.lc).epsilon(1e-12));
  }
}

TEST_CASE("stability agrees with the double loop") {
  std::mt19937_64 rng(41);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  for (int trial = 0; trial < 300; ++trial) {
    RiskTrajectory t{"x", {}, 0.0};
    double time = 0.0;
    const std::size_t n = 1 + rng() % 60;
    for (std::size_t i = 0; i < n; ++i) t.points.push_back({time += 0.3 * u(rng) + 1e-3, u(rng)});
    t.reference_time = t.points[rng() % n].t;
    const double b = 2.0 * u(rng);
    const double c = 0.4 * u(rng);
    const auto got = stability_lc(t, b, c);
    const auto want = oracle::stability(pairs(t), t.reference_time, b, c);
    CHECK(got.pair_count == want.pairs);
    CHECK(got.degenerate == want.degenerate);
    CHECK(std::abs(got.lc - want.lc) <= 1e-12);
  }
}

TEST_CASE("flip examples") {
  const auto f = flip_count(traj("a", {{0, 0.2}, {1, 0.6}, {2, 0.4}, {3, 0.7}}, 1.5), 5.0, 0.5);
  CHECK(f.flips == 3);
  REQUIRE(f.states.size() == 4);
  CHECK(f.states[0].second == 0);
  CHECK(f.states[1].second == 1);
  CHECK(f.states[2].second == 0);
  CHECK(f.states[3].second == 1);
  CHECK(flip_count(traj("b", {{0, 0.1}, {1, 0.2}}, 0.5), 5.0, 0.5).flips == 0);
  CHECK(flip_count(traj("c", {{0, 0.9}}, 0.0), 5.0, 0.5).flips == 0);
  // Only probes inside [T - b, T + b] count.
  CHECK(flip_count(traj("d", {{0, 0.9}, {5, 0.1}, {6, 0.9}}, 6.0), 1.0, 0.5).flips == 1);
}

TEST_CASE("trajectory validation") {
  CHECK_THROWS_AS(traj("a", {{1, 0.2}, {1, 0.3}}, 1).validate(), Error);
  CHECK_THROWS_AS(traj("a", {{1, 0.2}, {0.5, 0.3}}, 1).validate(), Error);
  CHECK_THROWS_AS(traj("a", {{1, 1.2}}, 1).validate(), Error);
  CHECK_THROWS_AS(traj("a", {{1, std::nan("")}}, 1).validate(), Error);
  CHECK_NOTHROW(traj("a", {{0, 0.0}, {1, 1.0}}, 1).validate());
}

TEST_CASE("score_at_reference uses the latest probe at or before T") {
  CHECK(score_at_reference(traj("a", {{0, 0.1}, {1, 0.2}, {2, 0.3}}, 1.5)) == 0.2);
  CHECK(score_at_reference(traj("a", {{0, 0.1}, {1, 0.2}, {2, 0.3}}, 2.0)) == 0.3);
}

TEST_CASE("evaluate_fold with a perfect scorer") {
  const std::vector<EvalInstance> inst{{"p", 1.0, 1, 1.0}, {"n", 1.0, 0, 1.0}};
  std::map<std::string, RiskTrajectory> trajs{{"p", traj("p", {{0.5, 0.9}, {1.0, 0.9}}, 1.0)},
                                             {"n", traj("n", {{0.5, 0.1}, {1.0, 0.1}}, 1.0)}};
  TaskConfig cfg;
  cfg.probe_radii_b = {0.5, 4.0};
  const auto rows = evaluate_fold(inst, trajs, cfg, 2, "demo");
  REQUIRE(rows.size() == 2);
  CHECK(rows[0].b == 0.5);
  CHECK(rows[1].b == 4.0);
  for (const auto& r : rows) {
    CHECK(r.auroc == 1.0);
    CHECK(r.flips == 0.0);
    CHECK(r.fold == 2);
    CHECK(r.task == "demo");
    CHECK(r.prevalence == 0.5);
  }

  trajs.erase("n");
  CHECK_THROWS_AS(evaluate_fold(inst, trajs, cfg), Error);
  trajs.emplace("n", traj("n", {{0.5, 0.1}}, 0.5));
  try {
    evaluate_fold(inst, trajs, cfg);
    FAIL("expected TrajectoryMismatch");
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::TrajectoryMismatch);
  }
}

TEST_CASE("evaluate_fold equals the composition of the oracles") {
  std::mt19937_64 rng(5);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  std::vector<EvalInstance> inst;
  std::map<std::string, RiskTrajectory> trajs;
  for (int i = 0; i < 60; ++i) {
    const std::string id = "e" + std::to_string(i);
    RiskTrajectory t{id, {}, 0.0};
    double time = 0.0;
    for (int j = 0; j < 25; ++j) t.points.push_back({time += 0.05 + 0.3 * u(rng), u(rng)});
    t.reference_time = t.points[12].t;
    inst.push_back({id, t.reference_time, i % 4 == 0 ? 1 : 0, t.reference_time});
    trajs.emplace(id, t);
  }
  TaskConfig cfg;
  cfg.probe_radii_b = {0.5, 4.0};
  const auto rows = evaluate_fold(inst, trajs, cfg);
  V pos, neg;
  for (const auto& x : inst) (x.label ? pos : neg).push_back(trajs.at(x.episode_id).points[12].score);
  for (const auto& row : rows) {
    CHECK(row.auroc == oracle::auroc(pos, neg).value());
    CHECK(std::abs(row.auprc - oracle::auprc(pos, neg)) <= 1e-12);
    CHECK(std::abs(row.f1 - oracle::f1(pos, neg, 0.5)) <= 1e-12);
    double lc = 0.0, fl = 0.0;
    std::size_t live = 0;
    for (const auto& x : inst) {
      const auto& t = trajs.at(x.episode_id);
      const auto s = oracle::stability(pairs(t), t.reference_time, row.b, cfg.pairing_window_c);
      lc += s.lc;
      live += !s.degenerate;
      fl += static_cast<double>(oracle::flips(pairs(t), t.reference_time, row.b, 0.5));
    }
    CHECK(std::abs(row.stability - lc / static_cast<double>(live)) <= 1e-12);
    CHECK(std::abs(row.flips - fl / static_cast<double>(inst.size())) <= 1e-12);
    CHECK(row.n_degenerate == inst.size() - live);
  }
}

TEST_CASE("aggregate_folds") {
  FoldRow a{"t", 0, 0.5, 0.6, 0.3, 0.2, 1.0, 1.0, 0.5, 10, 2, 0, 0.2};
  FoldRow b = a;
  b.fold = 1;
  b.auroc = 0.8;
  const auto rep = aggregate_folds({a, b});
  REQUIRE(rep.aggregate.size() == 1);
  CHECK(rep.aggregate[0].auroc.mean == doctest::Approx(0.7).epsilon(1e-15));
  CHECK(rep.aggregate[0].auroc.std == doctest::Approx(0.1).epsilon(1e-12));
  CHECK(rep.aggregate[0].auprc.std == 0.0);
  CHECK(rep.aggregate[0].n == 20);
  CHECK(rep.folds.size() == 2);

  FoldRow c = a;
  c.b = 4.0;
  const auto multi = aggregate_folds({a, c, b, c});
  REQUIRE(multi.aggregate.size() == 2);
  CHECK(multi.aggregate[0].b == 0.5);
  CHECK(multi.aggregate[1].b == 4.0);
  CHECK(multi.aggregate[1].auroc.std == 0.0);
  CHECK_THROWS_AS(aggregate_folds({}), Error);
}

TEST_CASE("mean_std agrees with the long-double oracle") {
  std::mt19937_64 rng(2);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  for (int trial = 0; trial < 200; ++trial) {
    V v(1 + rng() % 10);
    for (auto& x : v) x = u(rng);
    const auto got = mean_std(v);
    const auto [m, s] = oracle::mean_std(v);
    CHECK(std::abs(got.mean - m) <= 1e-12);
    CHECK(std::abs(got.std - s) <= 1e-12);
  }
}

TEST_CASE("removing an interior grid point never adds pairs") {
  std::mt19937_64 rng(12);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  for (int trial = 0; trial < 100; ++trial) {
    const double step = (1.0 / 6.0) * (0.2 + 0.8 * u(rng));
    RiskTrajectory t{"g", {}, 1.0};
    for (int i = 0; i < 20; ++i) t.points.push_back({i * step, u(rng)});
    const auto full = stability_lc(t, 10.0, 1.0 / 6.0);
    const auto drop = 1 + rng() % 18;
    t.points.erase(t.points.begin() + static_cast<std::ptrdiff_t>(drop));
    CHECK(stability_lc(t, 10.0, 1.0 / 6.0).pair_count <= full.pair_count);
  }
}

TEST_CASE("flips are invariant to monotone maps that keep the threshold") {
  std::mt19937_64 rng(13);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  for (int trial = 0; trial < 200; ++trial) {
    RiskTrajectory t{"m", {}, 2.0};
    for (int i = 0; i < 30; ++i) t.points.push_back({0.15 * i, u(rng)});
    RiskTrajectory mapped = t;
    // Piecewise-linear, strictly increasing, with 0.5 -> 0.5.
    for (auto& p : mapped.points) p.score = p.score < 0.5 ? p.score * p.score * 2.0 : 0.5 + (p.score - 0.5) * 0.3;
    CHECK(flip_count(mapped, 1.5, 0.5).flips == flip_count(t, 1.5, 0.5).flips);
  }
}
