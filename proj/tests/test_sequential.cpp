#include <doctest.h>

#include <cmath>

#include "seqtest/analysis.hpp"
#include "seqtest/errors.hpp"
#include "seqtest/harness.hpp"
#include "support.hpp"

using namespace seqtest;
using testsupport::vec;

namespace {

const SequentialTest& two_box_test() {
  static const SequentialTest t = [] {
    ScheduleConfig cfg;
    cfg.eps = 0.01;
    return build_sequential(two_box_family(2, 0.1), cfg);
  }();
  return t;
}

const SequentialTest& four_squares_test() {
  static const SequentialTest t = [] {
    ScheduleConfig cfg;
    cfg.eps = 0.01;
    cfg.S = 20;
    return build_sequential(four_squares_family(), cfg);
  }();
  return t;
}

bool in_cell(const Cell& c, const Vector& x) { return c.body.contains(x, 1e-9); }

}  // namespace

TEST_CASE("schedule of the two-box family") {
  ScheduleConfig cfg;
  cfg.eps = 0.01;
  const Schedule sch = compute_schedule(two_box_family(2, 0.1), cfg, 0.00125);
  CHECK(sch.S == 14);
  // 2^13 > ln(5600)/d and 2^12 < ln(5200)/d
  CHECK(8192 > std::log(14 * 4 / 0.01) / 0.00125);
  CHECK(4096 < std::log(13 * 4 / 0.01) / 0.00125);
  CHECK(sch.r_s[10] == doctest::Approx(std::log(5600.0) / 1024).epsilon(1e-14));
  CHECK(sch.r_s[10] == doctest::Approx(0.008428).epsilon(1e-4));
  for (int s = 0; s < sch.S; ++s) {
    CHECK(sch.eps_s[s] == doctest::Approx(0.01 / 28).epsilon(1e-14));
    CHECK(sch.delta_s[s] == doctest::Approx(std::exp(-sch.r_s[s])).epsilon(1e-14));
    CHECK(sch.kbar[s] == (std::int64_t{1} << s));
  }
  cfg.r_override[11] = 0.0092;
  CHECK(compute_schedule(2, cfg, 0.00125).r_s[10] == 0.0092);
  cfg.S = 3;
  CHECK(compute_schedule(2, cfg, 0.00125).S == 3);
}

TEST_CASE("four-squares schedule: formula gives 19, experiments use 20") {
  ScheduleConfig cfg;
  cfg.eps = 0.01;
  CHECK(compute_schedule(4, cfg, 5e-5).S == 19);
}

TEST_CASE("schedule config validation") {
  ScheduleConfig cfg;
  cfg.kbar = {1, 2, 5};
  CHECK_THROWS_AS(validate_schedule_config(cfg), ConfigError);
  cfg.kbar = {2, 3};
  CHECK_THROWS_AS(validate_schedule_config(cfg), ConfigError);
  cfg.kbar = {1, 2, 3, 4};
  CHECK_NOTHROW(validate_schedule_config(cfg));
  cfg.eps = 1.5;
  CHECK_THROWS_AS(validate_schedule_config(cfg), ConfigError);
  CHECK_THROWS_AS(cut_policy_from_string("clever"), ConfigError);
  CHECK(cut_policy_from_string("smart") == CutPolicy::Smart);
}

TEST_CASE("default cut of the two-box pair") {
  const HypothesisFamily f = two_box_family(2, 0.1);
  const SaddlePoint sp = solve_pairwise(f.scheme, f.bodies[0], f.bodies[1]);
  const Cut c = default_cut(sp, 0.0092);
  CHECK(std::abs(c(vec({0.418, 0.3}))) <= 1e-12);
  CHECK(c(vec({0.5, 0.3})) < 0.0);
  CHECK(c(vec({0.3, 0.3})) > 0.0);
  CHECK(std::abs(default_cut(sp, 0.0)(vec({0.05, 0.7}))) <= 1e-12);
  CHECK(std::abs(default_cut(sp, 0.00125)(vec({0.1, 0.7}))) <= 1e-12);
  CHECK_THROWS_AS(default_cut(sp, -0.1), InputError);

  // retained side keeps psi against X2 below -r
  const OpponentRate psiY(f.scheme, f.bodies[1]);
  Rng rng(3);
  for (int i = 0; i < 1000; ++i) {
    const Vector x = sample_uniform(f.bodies[0], rng);
    if (c(x) <= 0.0) CHECK(psiY(x).value <= -0.0092 + 1e-12);
  }
}

TEST_CASE("partition of the two-box family") {
  const HypothesisFamily f = two_box_family(2, 0.1);
  const Partition mid = partition_stage(f, 11, 0.008428, CutPolicy::Default, false);
  CHECK(mid.cells.size() == 4);
  const Partition last = partition_stage(f, 14, 0.0003, CutPolicy::Default, true);
  REQUIRE(last.cells.size() == 2);
  CHECK(last.cells[0].bad_against == -1);

  // r far beyond -opt: the bad cell is all of X_j, the good cell is gone
  const Partition big = partition_stage(f, 1, 1.0, CutPolicy::Default, false);
  for (const Cell& c : big.cells) CHECK(c.bad_against != -1);
  Rng rng(9);
  for (int j = 0; j < 2; ++j) {
    for (int i = 0; i < 1000; ++i) {
      const Vector x = sample_uniform(f.bodies[j], rng);
      bool covered = false;
      for (const Cell& c : big.cells) covered |= c.origin == j && in_cell(c, x);
      CHECK(covered);
    }
  }
}

TEST_CASE("cells cover their bodies at every stage") {
  const SequentialTest& t = four_squares_test();
  Rng rng(10);
  for (const StageComponent& st : t.stages) {
    CHECK(st.size() <= 16);
    for (int j = 0; j < t.family.size(); ++j) {
      for (int i = 0; i < 200; ++i) {
        const Vector x = sample_uniform(t.family.bodies[j], rng);
        bool covered = false;
        for (const Cell& c : st.cells) covered |= c.origin == j && in_cell(c, x);
        CHECK(covered);
      }
    }
  }
}

TEST_CASE("build_stage: one color needs no discrimination") {
  const HypothesisFamily f = two_box_family(2, 0.1);
  Partition p;
  p.cells = {{f.bodies[0], 0, 1, -1}, {f.bodies[1], 1, 1, -1}};
  p.cuts.assign(2, std::vector<Cut>(2, Cut::retain_all(2)));
  const StageComponent st = build_stage(f, p, 1, 0.01, 0.5, std::exp(-0.5), 1);
  CHECK(st.k_s == 1);
  CHECK(st.closeness.isZero());
  const std::vector<Observation> w = {Observation{vec({0.3, 0.2})}};
  SampleStatistic stat(2);
  stat.add(w[0]);
  CHECK(stage_accept(st, stat).size() == 2);
}

TEST_CASE("build_stage: k_s is minimal and below the row-sum bound") {
  const SequentialTest& t = two_box_test();
  for (const StageComponent& st : t.stages) {
    CHECK(st.k_s <= st.kbar_s);
    CHECK(st.norm < st.eps_s);
    CHECK(st.achieved <= st.eps_s);
    if (st.k_s > 1) {
      CHECK(log_risk_matrix_norm(st.risks, st.closeness, st.k_s - 1) >= std::log(st.eps_s));
    }
    double worst = 0.0;
    for (int q = 0; q < st.size(); ++q) {
      for (int q2 = 0; q2 < st.size(); ++q2) {
        if (st.closeness(q, q2) != 0.0) worst = std::max(worst, st.risks(q, q2));
      }
    }
    if (worst > 0.0) {
      std::int64_t k = 1;
      while (st.size() * std::pow(worst, static_cast<double>(k)) >= st.eps_s) ++k;
      CHECK(st.k_s <= k);
    }
  }
}

TEST_CASE("last stage: closeness is the same-color relation") {
  const SequentialTest& t = two_box_test();
  const StageComponent& last = t.stage(t.schedule.S);
  REQUIRE(last.size() == 2);
  CHECK(last.closeness(0, 1) == 1.0);
  CHECK(last.closeness(1, 0) == 1.0);
  const SequentialTest& f = four_squares_test();
  const StageComponent& l4 = f.stage(f.schedule.S);
  REQUIRE(l4.size() == 4);
  for (int q = 0; q < 4; ++q) {
    for (int q2 = 0; q2 < 4; ++q2) {
      CHECK(l4.closeness(q, q2) == (l4.cells[q].color != l4.cells[q2].color ? 1.0 : 0.0));
    }
  }
}

TEST_CASE("two-box sequential build") {
  const SequentialTest& t = two_box_test();
  CHECK(t.schedule.S == 14);
  CHECK(t.d == doctest::Approx(0.00125).epsilon(1e-9));
  CHECK(t.K == t.stage(14).k_s);
  CHECK(t.K <= 8192);
  for (std::size_t i = 1; i < t.order.size(); ++i) {
    CHECK(t.stages[t.order[i - 1]].k_s <= t.stages[t.order[i]].k_s);
  }
  for (const StageComponent& st : t.stages) CHECK(st.active == (st.k_s <= t.K));
}

TEST_CASE("smart-cut build of the two-box family") {
  ScheduleConfig cfg;
  cfg.eps = 0.01;
  cfg.cut_policy = CutPolicy::Smart;
  const SequentialTest t = build_sequential(two_box_family(2, 0.1), cfg);
  CHECK(t.schedule.S == 14);
  for (const StageComponent& st : t.stages) CHECK(st.k_s <= st.kbar_s);
}

TEST_CASE("S = 1 collapses to the pairwise test") {
  ScheduleConfig cfg;
  cfg.eps = 0.01;
  cfg.S = 1;
  const HypothesisFamily f = two_box_family(2, 0.1);
  const SequentialTest t = build_sequential(f, cfg);
  REQUIRE(t.stages.size() == 1);
  const StageComponent& st = t.stage(1);
  CHECK(st.size() == 2);
  const Detector det = build_detector(solve_pairwise(f.scheme, f.bodies[0], f.bodies[1]), f.scheme);
  Rng rng(4);
  for (int i = 0; i < 200; ++i) {
    const std::vector<Observation> w = sample(f.scheme, vec({0.05, 0.5}), rng, t.K);
    const Verdict v = run_sequential(t, w);
    double val = -st.shifts(0, 1);
    for (const Observation& o : w) val += det.affine(o);
    if (val > 0) CHECK(v.accepted_color == 1);
    else CHECK(v.accepted_color == 2);
    CHECK(v.observations_used == t.K);
    CHECK(v.stage == 1);
  }
  CHECK(s_star(vec({0.2, 0.5}), t) == 1);
}

TEST_CASE("run_sequential input checks and trace") {
  const SequentialTest& t = two_box_test();
  Rng rng(1);
  const std::vector<Observation> shortw = sample(t.family.scheme, vec({0.5, 0.5}), rng, 10);
  try {
    run_sequential(t, shortw);
    FAIL("expected an input error");
  } catch (const InputError& e) {
    CHECK(std::string(e.what()).find(std::to_string(t.K)) != std::string::npos);
  }
  const std::vector<Observation> w = sample(t.family.scheme, vec({1.0, 0.5}), rng, t.K);
  const Verdict v = run_sequential(t, w, true);
  CHECK(v.accepted_color == 1);
  CHECK(!v.trace.empty());
  CHECK(v.trace.back().s == v.stage);
  CHECK(v.position == static_cast<int>(v.trace.size()));
  // the lazy run sees the same observations
  std::size_t next = 0;
  const Verdict lazy = run_sequential(t, [&] { return w[next++]; });
  CHECK(lazy.accepted_color == v.accepted_color);
  CHECK(lazy.observations_used == v.observations_used);
  CHECK(next == static_cast<std::size_t>(v.observations_used));
}

TEST_CASE("deep parameter: correct color by stage sbar, with probability 1 - eps") {
  const SequentialTest& t = two_box_test();
  const SeparationReport sep = separation(t.family);
  const Vector mu = vec({0.9, 0.5});
  const int sbar = s_bar_gaussian(mu, t, sep);
  Rng rng(123);
  const int M = 1000;
  int good = 0;
  for (int m = 0; m < M; ++m) {
    const Verdict v = run_sequential(t, [&] { return sample_one(t.family.scheme, mu, rng); });
    good += v.accepted_color == 1 && v.observations_used <= t.stage(sbar).k_s;
  }
  CHECK(good / double(M) >= 1 - 0.01 - 4 * std::sqrt(0.01 * 0.99 / M));
}

TEST_CASE("serialization round trip is bit-stable") {
  const SequentialTest& t = four_squares_test();
  const std::string a = serialize(t);
  const SequentialTest back = deserialize(a);
  CHECK(serialize(back) == a);
  CHECK(back.K == t.K);
  CHECK(back.order == t.order);
  for (std::size_t s = 0; s < t.stages.size(); ++s) {
    CHECK((back.stages[s].shifts.array() == t.stages[s].shifts.array()).all());
    CHECK(back.stages[s].r_s == t.stages[s].r_s);
  }
  Rng r1(5), r2(5);
  const Vector mu = vec({-0.3, 0.05});
  const Verdict v1 = run_sequential(t, [&] { return sample_one(t.family.scheme, mu, r1); });
  const Verdict v2 = run_sequential(back, [&] { return sample_one(t.family.scheme, mu, r2); });
  CHECK(v1.accepted_color == v2.accepted_color);
  CHECK(v1.observations_used == v2.observations_used);
  CHECK_THROWS_AS(deserialize("{\"format\": \"other\"}"), ConfigError);
}

// ---------------------------------------------------------------------------
// analysis

TEST_CASE("separation values") {
  CHECK(separation(two_box_family(2, 0.1)).d == doctest::Approx(0.00125).epsilon(1e-9));
  CHECK(separation(four_squares_family()).d == doctest::Approx(5e-5).epsilon(1e-9));
  const double tdist = 0.7;
  HypothesisFamily single{SchemeKind::gaussian(2),
                          {ConvexBody::box(vec({0, 0}), vec({0, 0})),
                           ConvexBody::box(vec({tdist, 0}), vec({tdist, 0}))},
                          {1, 2}};
  CHECK(separation(single).d == doctest::Approx(tdist * tdist / 8).epsilon(1e-12));
  HypothesisFamily overlap = single;
  overlap.bodies[1] = ConvexBody::box(vec({-1, -1}), vec({1, 1}));
  CHECK_THROWS_AS(separation(overlap), AssumptionViolation);
}

TEST_CASE("lower bound K+") {
  const KPlus a = k_plus(0.01, 5e-5);
  CHECK(a.k_plus == doctest::Approx((0.5 * std::log(100.0) - std::log(2.0)) / 5e-5).epsilon(1e-12));
  CHECK(a.k_plus == doctest::Approx(32188.8).epsilon(1e-5));
  CHECK(a.floor_bound == doctest::Approx(23025.9).epsilon(1e-5));
  CHECK(k_plus(0.01, 0.00125).k_plus == doctest::Approx(1287.6).epsilon(1e-4));
  CHECK(k_plus(0.25 - 1e-12, 1.0).k_plus < 1e-11);
  CHECK(k_plus(0.25 - 1e-12, 1.0).k_plus > 0.0);
  for (double eps : {0.2, 0.1, 0.01, 1e-4}) {
    for (double d : {1e-4, 0.01, 0.5}) {
      CHECK(sample_size_for_risk(std::exp(-d), eps) >= k_plus(eps, d).floor_bound);
    }
  }
}

TEST_CASE("worst-case bound") {
  const WorstCaseBound w = worst_case_bound(4, 0.01, 5e-5, 5.0);
  CHECK(w.holds_premise);
  CHECK(w.bound == doctest::Approx(25 * std::log(1600.0) / 5e-5).epsilon(1e-12));
  CHECK(w.bound == doctest::Approx(3.689e6).epsilon(1e-3));
  CHECK(524288 <= w.bound);
  const WorstCaseBound one = worst_case_bound(3, 0.1, 1.0, 2.0);
  CHECK(one.holds_premise);
  CHECK(one.bound == doctest::Approx(std::max(1.0, 10 * std::log(90.0))).epsilon(1e-14));
  CHECK_FALSE(worst_case_bound(2, 0.1, 1e-40, 1.0).holds_premise);

  // random families: when the premise holds, kbar(S) respects the bound
  Rng rng(50);
  std::uniform_real_distribution<double> ud(0.01, 1.0), ue(0.001, 0.24);
  for (int t = 0; t < 50; ++t) {
    const int n = 1 + t % 3;
    const HypothesisFamily f = two_box_family(n, ud(rng));
    ScheduleConfig cfg;
    cfg.eps = ue(rng);
    const double d = separation(f).d;
    const Schedule sch = compute_schedule(f, cfg, d);
    const WorstCaseBound b = worst_case_bound(2, cfg.eps, d);
    if (b.holds_premise) CHECK(static_cast<double>(sch.kbar.back()) <= b.bound);
  }
}

TEST_CASE("stage bounds s* and sbar") {
  const SequentialTest& t = two_box_test();
  CHECK(s_star(vec({1.1, 1.0}), t) <= 10);
  CHECK(s_star(vec({0.1, 0.5}), t) == t.schedule.S);
  CHECK_THROWS_AS(s_star(vec({0.05, 0.5}), t), InputError);

  const SequentialTest& f = four_squares_test();
  const SeparationReport sep = separation(f.family);
  CHECK(depth(vec({0.5, 0.5}), f) == doctest::Approx(0.49).epsilon(1e-12));
  CHECK(s_bar_gaussian(vec({0.5, 0.5}), f, sep) == 14);

  ScheduleConfig cfg;
  cfg.eps = 0.01;
  const SequentialTest f19 = build_sequential(four_squares_family(), cfg);
  CHECK(f19.schedule.S == 19);
  CHECK(s_bar_gaussian(vec({0.01, 0.5}), f19, sep) == 19);

  const HypothesisFamily far{SchemeKind::gaussian(2),
                             {ConvexBody::box(vec({10, 10}), vec({110, 110})),
                              ConvexBody::box(vec({-110, -110}), vec({-10, -10}))},
                             {1, 2}};
  const SequentialTest tf = build_sequential(far, cfg);
  CHECK(s_bar_gaussian(vec({60, 60}), tf, separation(far)) == 1);

  HypothesisFamily pf{SchemeKind::poisson(1),
                      {ConvexBody::box(vec({1}), vec({2})), ConvexBody::box(vec({4}), vec({5}))},
                      {1, 2}};
  const SequentialTest tp = build_sequential(pf, cfg);
  CHECK_THROWS_AS(s_bar_gaussian(vec({1.5}), tp, separation(pf)), Unsupported);
}

TEST_CASE("s* never exceeds sbar") {
  for (const SequentialTest* t : {&two_box_test(), &four_squares_test()}) {
    const SeparationReport sep = separation(t->family);
    ExperimentConfig cfg;
    cfg.family = t->family;
    Rng rng(77);
    for (int i = 0; i < 1000; ++i) {
      const Vector mu = draw_mu(cfg, i, rng);
      const int ss = s_star(mu, *t);
      CHECK(ss >= 1);
      CHECK(ss <= t->schedule.S);
      CHECK(ss <= s_bar_gaussian(mu, *t, sep));
    }
  }
}
