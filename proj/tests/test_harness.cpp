#include <doctest.h>

#include <algorithm>
#include <cmath>

#include "seqtest/errors.hpp"
#include "seqtest/harness.hpp"
#include "support.hpp"

using namespace seqtest;
using testsupport::vec;

namespace {

ExperimentConfig two_box_cfg(double eps, std::int64_t trials) {
  ExperimentConfig cfg;
  cfg.family = two_box_family(2, 0.1);
  cfg.schedule.eps = eps;
  cfg.trials = trials;
  cfg.seed = 42;
  return cfg;
}

}  // namespace

TEST_CASE("family templates") {
  const HypothesisFamily f = two_box_family(3, 0.2);
  CHECK(f.bodies[0].lower()[0] == 0.2);
  CHECK(f.bodies[0].upper()[0] == 1.2);
  CHECK(f.bodies[0].upper()[2] == 1.0);
  CHECK(f.bodies[1].lower()[1] == -1.0);
  const HypothesisFamily q = four_squares_family();
  CHECK(q.size() == 4);
  CHECK(q.distinct_colors().size() == 4);
  CHECK(q.bodies[3].upper()[0] == -0.01);
  CHECK_THROWS_AS(four_squares_family(1.5), InputError);
}

TEST_CASE("config parsing") {
  const ExperimentConfig c = parse_experiment_config(R"({
    "schema": "v1",
    "scheme": {"gaussian": true, "n": 2},
    "bodies": [{"box": {"lower": [0.1, 0], "upper": [1.1, 1]}},
               {"polytope": {"A": [[1, 0], [0, 1], [-1, 0], [0, -1]], "b": [0, 0, 1, 1]}}],
    "colors": [3, 4],
    "eps": 0.05,
    "kbar": [1, 2, 4, 8, 16, 32, 64, 128, 256, 512, 1024, 2048, 4096, 8192, 16384],
    "cut_policy": "smart",
    "trials": 9,
    "seed": 18446744073709551615,
    "mu_sampling": {"kind": "grid", "resolution": 5},
    "overrides": {"S": 6, "r": {"2": 0.5}}
  })");
  CHECK(c.family.size() == 2);
  CHECK(c.family.colors == std::vector<int>{3, 4});
  CHECK_FALSE(c.family.bodies[1].is_box());
  CHECK(c.schedule.eps == 0.05);
  CHECK(c.schedule.cut_policy == CutPolicy::Smart);
  CHECK(c.schedule.S == 6);
  CHECK(c.schedule.r_override.at(2) == 0.5);
  CHECK(c.seed == 18446744073709551615ULL);
  CHECK(c.mu_sampling == MuSampling::Grid);
  CHECK(c.grid_resolution == 5);

  // echo parses back to the same document
  CHECK(config_json(parse_experiment_config(config_json(c))) == config_json(c));

  CHECK_THROWS_AS(parse_experiment_config("{"), ConfigError);
  CHECK_THROWS_AS(parse_experiment_config(R"({"schema": "v2"})"), ConfigError);
  CHECK_THROWS_AS(parse_experiment_config(R"({"schema": "v1", "family": {"template": "x"}})"),
                  ConfigError);
  CHECK_THROWS_AS(parse_experiment_config(
                      R"({"schema": "v1", "family": {"template": "two_box"}, "trials": 0})"),
                  ConfigError);
  CHECK_THROWS_AS(
      parse_experiment_config(R"({"schema": "v1", "family": {"template": "two_box"},
                                  "mu_sampling": {"kind": "grid", "resolution": 1}})"),
      ConfigError);
  CHECK_THROWS_AS(parse_experiment_config(R"({"schema": "v1", "family": {"template": "two_box"},
                                              "cut_policy": "fancy"})"),
                  ConfigError);
  CHECK_THROWS_AS(parse_experiment_config(R"({"schema": "v1", "scheme": {"kind": "gaussian", "n": 2},
                                              "bodies": [{"box": {"lower": [0, 0], "upper": [1, 1]}}],
                                              "colors": [1, 2]})"),
                  ConfigError);
}

TEST_CASE("trial seeds and parameter draws") {
  CHECK(trial_seed(1, 0) != trial_seed(1, 1));
  CHECK(trial_seed(1, 0) != trial_seed(2, 0));
  CHECK(trial_seed(7, 3) == trial_seed(7, 3));

  ExperimentConfig cfg = two_box_cfg(0.1, 10);
  Rng rng(1);
  for (int i = 0; i < 500; ++i) {
    const Vector mu = draw_mu(cfg, i, rng);
    CHECK((cfg.family.bodies[0].contains(mu) || cfg.family.bodies[1].contains(mu)));
  }
  cfg.mu_sampling = MuSampling::Fixed;
  cfg.fixed_points = {vec({0.5, 0.5}), vec({-0.5, -0.5})};
  CHECK(draw_mu(cfg, 3, rng) == vec({-0.5, -0.5}));

  // discrete family: draws stay on the simplex
  ExperimentConfig d;
  d.family.scheme = SchemeKind::discrete(3);
  Matrix A(1, 3);
  A << 1, 0, 0;
  Vector b1(1), b2(1);
  b1 << 0.3;
  Matrix A2 = -A;
  b2 << -0.6;
  d.family.bodies = {ConvexBody::polytope(A, b1, true, 1e-3), ConvexBody::polytope(A2, b2, true, 1e-3)};
  d.family.colors = {1, 2};
  for (int i = 0; i < 200; ++i) {
    const Vector mu = draw_mu(d, i, rng);
    CHECK(std::abs(mu.sum() - 1.0) < 1e-12);
    CHECK((mu[0] <= 0.3 + 1e-12 || mu[0] >= 0.6 - 1e-12));
  }
}

TEST_CASE("one trial, fixed parameter, rerun gives the same record") {
  ExperimentConfig cfg = two_box_cfg(0.01, 1);
  cfg.mu_sampling = MuSampling::Fixed;
  cfg.fixed_points = {vec({0.6, 0.2})};
  const SequentialTest test = build_sequential(cfg.family, cfg.schedule);
  const ExperimentReport a = run_experiment(cfg, test);
  const ExperimentReport b = run_experiment(cfg, test);
  REQUIRE(a.records.size() == 1);
  CHECK(trials_csv(a.records) == trials_csv(b.records));
  CHECK(a.records[0].mu == vec({0.6, 0.2}));
  CHECK(a.records[0].color_true == 1);
}

TEST_CASE("determinism across reruns and thread counts") {
  ExperimentConfig cfg = two_box_cfg(0.05, 300);
  const SequentialTest test = build_sequential(cfg.family, cfg.schedule);
  const ExperimentReport a = run_experiment(cfg, test, 1);
  const ExperimentReport b = run_experiment(cfg, test, 3);
  CHECK(trials_csv(a.records) == trials_csv(b.records));
  CHECK(report_json(cfg, test, a) == report_json(cfg, test, b));
  cfg.seed = 43;
  CHECK(trials_csv(run_experiment(cfg, test).records) != trials_csv(a.records));
}

TEST_CASE("aggregates are recomputable from the records") {
  ExperimentConfig cfg = two_box_cfg(0.05, 301);
  const ExperimentReport r = run_experiment(cfg);
  std::vector<std::int64_t> obs;
  double sum = 0.0;
  int wrong = 0, none = 0, late = 0;
  for (const TrialRecord& t : r.records) {
    obs.push_back(t.observations);
    sum += static_cast<double>(t.observations);
    wrong += t.color_accepted && *t.color_accepted != t.color_true;
    none += !t.color_accepted;
    late += t.late;
    CHECK(t.correct == (t.color_accepted == t.color_true));
    CHECK(t.late == (t.correct && t.observations > t.k_s_star));
  }
  std::sort(obs.begin(), obs.end());
  CHECK(r.observations.median == static_cast<double>(obs[150]));
  CHECK(r.observations.mean == sum / 301);
  CHECK(r.observations.min == obs.front());
  CHECK(r.observations.max == obs.back());
  CHECK(r.error_rate == wrong / 301.0);
  CHECK(r.no_decision_rate == none / 301.0);
  CHECK(r.late_rate == late / 301.0);

  ObservationStats even = observation_stats({r.records[0], r.records[1]});
  CHECK(even.median == 0.5 * (r.records[0].observations + r.records[1].observations));
}

TEST_CASE("loose eps on a well separated family stops at stage 1") {
  ExperimentConfig cfg;
  cfg.family = {SchemeKind::gaussian(2),
                {ConvexBody::box(vec({0, 0}), vec({0.1, 0.1})),
                 ConvexBody::box(vec({6, 0}), vec({6.1, 0.1}))},
                {1, 2}};
  cfg.schedule.eps = 0.5;
  cfg.trials = 400;
  const ExperimentReport r = run_experiment(cfg);
  CHECK(r.error_rate <= 0.5 + 4 * std::sqrt(0.25 / 400));
  const auto at1 = std::count_if(r.records.begin(), r.records.end(),
                                 [](const TrialRecord& t) { return t.stage == 1; });
  CHECK(at1 > 200);
}

TEST_CASE("raising eps never increases S") {
  const HypothesisFamily f = four_squares_family();
  int prev = std::numeric_limits<int>::max();
  for (double eps : {1e-6, 1e-4, 0.001, 0.01, 0.05, 0.1, 0.3, 0.6, 0.9}) {
    ScheduleConfig cfg;
    cfg.eps = eps;
    const int S = compute_schedule(f, cfg, 5e-5).S;
    CHECK(S <= prev);
    prev = S;
  }
}

TEST_CASE("volume table") {
  ExperimentConfig cfg;
  cfg.schedule.eps = 0.01;
  cfg.volume_dims = {2, 3};
  cfg.volume_samples = 200000;
  cfg.schedule.r_override[11] = 0.0092;
  const std::vector<VolumeRow> rows = volumes_report(cfg, 11);
  REQUIRE(rows.size() == 4);
  CHECK(rows[0].policy == "default");
  CHECK(rows[0].exact);
  CHECK(rows[0].volume == doctest::Approx(0.318).epsilon(1e-12));
  CHECK(rows[2].volume == doctest::Approx(0.318).epsilon(1e-12));
  CHECK(rows[1].policy == "smart");
  CHECK(rows[1].volume < 0.318 / 5);
  CHECK(rows[1].stderr_ > 0.0);

  cfg.schedule.r_override[11] = 0.0;
  const std::vector<VolumeRow> zero = volumes_report(cfg, 11);
  REQUIRE(zero.size() == 2);
  CHECK(zero[0].volume == 0.0);
  CHECK_THROWS_AS(volumes_report(cfg, 40), ConfigError);

  const std::string csv = volumes_csv(rows);
  CHECK(csv.rfind("n,policy,r,volume,stderr,exact\n", 0) == 0);
  CHECK(csv.find("2,default,0.0092,") != std::string::npos);
}

TEST_CASE("stopping-stage profile") {
  ExperimentConfig cfg;
  cfg.family = four_squares_family();
  cfg.schedule.eps = 0.01;
  cfg.schedule.S = 20;
  const SequentialTest test = build_sequential(cfg.family, cfg.schedule);
  const std::vector<ProfilePoint> pts = profile_grid(cfg, test, 21);
  REQUIRE(pts.size() == 441);
  double lo = 1e9, hi = 0.0;
  for (const ProfilePoint& p : pts) {
    const bool inside = std::abs(p.x) >= 0.01 && std::abs(p.y) >= 0.01;
    CHECK(p.inside == inside);
    if (!p.inside) continue;
    const int ss = s_star(vec({p.x, p.y}), test);
    CHECK(p.ln_k_sstar == std::log(static_cast<double>(std::min(test.stage(ss).k_s, test.K))));
    CHECK(p.ln_k_sstar <= p.ln_k_sbar + 1e-12);
    lo = std::min(lo, p.ln_k_sstar);
    hi = std::max(hi, p.ln_k_sstar);
  }
  // deep corner vs the grid line next to an axis
  auto at = [&](double x, double y) {
    for (const ProfilePoint& p : pts) {
      if (std::abs(p.x - x) < 1e-9 && std::abs(p.y - y) < 1e-9) return p.ln_k_sstar;
    }
    return -1.0;
  };
  CHECK(at(1.0, 1.0) == lo);
  CHECK(at(0.1, 0.5) > at(0.5, 0.5));
  CHECK(std::abs(at(0.5, 0.5) - lo) < 2.0);
  CHECK(hi > lo);

  // on a facing face the default cut passes once r(s) <= d
  int expect = test.schedule.S;
  for (int s = test.schedule.S; s >= 1 && test.schedule.r_s[s - 1] <= test.d; --s) expect = s;
  CHECK(expect == 19);
  CHECK(s_star(vec({0.01, 0.5}), test) == expect);

  ExperimentConfig c3 = cfg;
  c3.family = two_box_family(3, 0.1);
  ScheduleConfig sc;
  const SequentialTest t3 = build_sequential(c3.family, sc);
  CHECK_THROWS_AS(profile_grid(c3, t3, 5), Unsupported);

  const std::string csv = profile_csv(pts);
  CHECK(csv.rfind("x,y,ln_k_sstar,ln_k_sbar\n", 0) == 0);
  CHECK(csv.find("0,0,,\n") != std::string::npos);
}

TEST_CASE("Wilson interval") {
  const Interval i = wilson_interval(10, 100);
  CHECK(i.lower == doctest::Approx(0.0552).epsilon(1e-3));
  CHECK(i.upper == doctest::Approx(0.1744).epsilon(1e-3));
  const Interval z = wilson_interval(0, 50);
  CHECK(z.lower == 0.0);
  CHECK(z.upper == doctest::Approx(3.8415 / (50 + 3.8415)).epsilon(1e-4));
  CHECK(wilson_interval(50, 50).upper == 1.0);
  CHECK_THROWS_AS(wilson_interval(0, 0), InputError);
}

TEST_CASE("calibration") {
  ExperimentConfig cfg = two_box_cfg(0.99, 500);
  const Calibration c = calibrate_risk(cfg);
  CHECK_FALSE(c.violation);
  CHECK(c.failure_rate <= 0.99);

  cfg.trials = 100;
  CHECK_THROWS_AS(calibrate_risk(cfg), ConfigError);

  // parameter on the facing face of X1
  ExperimentConfig face = two_box_cfg(0.1, 600);
  face.mu_sampling = MuSampling::Fixed;
  face.fixed_points = {vec({0.1, 0.5})};
  const Calibration f = calibrate_risk(face);
  CHECK(f.failure_rate <= 0.1 + 4 * std::sqrt(0.09 / 600));
  CHECK_FALSE(f.violation);
  const SequentialTest test = build_sequential(face.family, face.schedule);
  const std::string doc = calibration_json(face, test, f);
  CHECK(doc.find("\"failure_ci\"") != std::string::npos);
}
