#include "seqtest/sequential.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <set>

#include "parallel.hpp"
#include "seqtest/analysis.hpp"
#include "seqtest/errors.hpp"

namespace seqtest {

std::vector<int> HypothesisFamily::distinct_colors() const {
  std::set<int> s(colors.begin(), colors.end());
  return {s.begin(), s.end()};
}

void validate_family(const HypothesisFamily& family) {
  if (family.scheme.n < 1) throw InputError("scheme dimension must be >= 1");
  if (family.bodies.empty()) throw InputError("family has no parameter sets");
  if (family.colors.size() != family.bodies.size()) {
    throw InputError("one color per parameter set is required");
  }
  for (const ConvexBody& b : family.bodies) check_body_in_domain(family.scheme, b);
  if (family.distinct_colors().size() < 2) throw InputError("at least two colors are required");
}

std::string to_string(CutPolicy policy) {
  return policy == CutPolicy::Default ? "default" : "smart";
}

CutPolicy cut_policy_from_string(const std::string& name) {
  if (name == "default") return CutPolicy::Default;
  if (name == "smart") return CutPolicy::Smart;
  throw ConfigError("unknown cut policy '" + name + "'");
}

void validate_schedule_config(const ScheduleConfig& cfg) {
  if (!(cfg.eps > 0.0) || !(cfg.eps < 1.0)) throw ConfigError("eps must lie in (0, 1)");
  if (!(cfg.tol > 0.0)) throw ConfigError("solver tolerance must be positive");
  if (cfg.S && *cfg.S < 1) throw ConfigError("S must be >= 1");
  if (!cfg.kbar.empty()) {
    if (cfg.kbar.front() != 1) throw ConfigError("kbar(1) must equal 1");
    for (std::size_t i = 1; i < cfg.kbar.size(); ++i) {
      if (!(cfg.kbar[i - 1] < cfg.kbar[i] && cfg.kbar[i] <= 2 * cfg.kbar[i - 1])) {
        throw ConfigError("kbar must satisfy kbar(s) < kbar(s+1) <= 2 kbar(s)");
      }
    }
  }
  for (const auto& [s, r] : cfg.r_override) {
    if (s < 1 || !(r >= 0.0) || !std::isfinite(r)) {
      throw ConfigError("r overrides need a stage >= 1 and a finite r >= 0");
    }
  }
}

std::int64_t kbar_value(const ScheduleConfig& cfg, int s) {
  if (s < 1) throw InputError("stage index must be >= 1");
  if (cfg.kbar.empty()) {
    if (s > 62) throw ConfigError("kbar(s) = 2^(s-1) overflows beyond s = 62");
    return std::int64_t{1} << (s - 1);
  }
  if (static_cast<std::size_t>(s) > cfg.kbar.size()) {
    throw ConfigError("explicit kbar schedule is shorter than the number of stages");
  }
  return cfg.kbar[s - 1];
}

Schedule compute_schedule(int J, const ScheduleConfig& cfg, double d) {
  validate_schedule_config(cfg);
  if (!(d > 0.0)) throw InputError("separation d must be positive");
  if (J < 2) throw InputError("at least two parameter sets are required");
  Schedule out;
  out.J = J;
  const double J2 = static_cast<double>(J) * J;
  auto log_term = [&](int S) { return std::log(S * J2 / cfg.eps); };
  if (cfg.S) {
    out.S = *cfg.S;
  } else {
    int S = 1;
    while (!(static_cast<double>(kbar_value(cfg, S)) > log_term(S) / d)) ++S;
    out.S = S;
  }
  const int S = out.S;
  for (int s = 1; s <= S; ++s) {
    const std::int64_t kb = kbar_value(cfg, s);
    double r = log_term(S) / static_cast<double>(kb);
    if (auto it = cfg.r_override.find(s); it != cfg.r_override.end()) r = it->second;
    out.kbar.push_back(kb);
    out.eps_s.push_back(cfg.eps / (2.0 * S));
    out.r_s.push_back(r);
    out.delta_s.push_back(std::exp(-r));
  }
  return out;
}

Schedule compute_schedule(const HypothesisFamily& family, const ScheduleConfig& cfg, double d) {
  return compute_schedule(family.size(), cfg, d);
}

Cut default_cut(const SaddlePoint& saddle, double r) {
  if (!(r >= 0.0)) throw InputError("cut margin r must be >= 0");
  Cut c;
  c.normal = saddle.grad_mu;
  c.offset = saddle.opt - saddle.grad_mu.dot(saddle.mu_star) + r;
  return c;
}

namespace {

bool nonempty(const ConvexBody& body) { return is_nonempty(body.lp_A(), body.lp_b(), false, 1e-9); }

}  // namespace

Partition partition_stage(const HypothesisFamily& family, int /*s*/, double r_s, CutPolicy policy,
                          bool last, double tol, int threads) {
  validate_family(family);
  const int J = family.size();
  const int n = family.scheme.n;
  Partition out;
  out.last = last;
  out.cuts.assign(J, std::vector<Cut>(J, Cut::retain_all(n)));

  std::vector<std::pair<int, int>> work;
  if (!last) {
    for (int j = 0; j < J; ++j) {
      for (int j2 = 0; j2 < J; ++j2) {
        if (family.colors[j] != family.colors[j2]) work.emplace_back(j, j2);
      }
    }
  }
  std::vector<char> fell_back(work.size(), 0);
  detail::parallel_for(work.size(), threads, [&](std::size_t w) {
    const auto [j, j2] = work[w];
    const ConvexBody& X = family.bodies[j];
    const ConvexBody& Y = family.bodies[j2];
    if (policy == CutPolicy::Smart) {
      try {
        const SmartCut sc = smart_cut(family.scheme, X, OpponentRate(family.scheme, Y), r_s, tol);
        out.cuts[j][j2] = sc.cut;
        return;
      } catch (const CutInfeasible&) {
        fell_back[w] = 1;
      }
    }
    out.cuts[j][j2] = default_cut(solve_pairwise(family.scheme, X, Y, {tol}), r_s);
  });
  for (std::size_t w = 0; w < work.size(); ++w) {
    if (fell_back[w]) out.smart_fallbacks.push_back(work[w]);
  }

  for (int j = 0; j < J; ++j) {
    const ConvexBody& X = family.bodies[j];
    const int color = family.colors[j];
    ConvexBody good = X;
    bool good_possible = true;
    for (int j2 = 0; j2 < J; ++j2) {
      if (family.colors[j2] == color) continue;
      const Cut& c = out.cuts[j][j2];
      if (c.is_constant()) {
        if (c.offset > 0.0) good_possible = false;
        continue;
      }
      good = good.with_constraint(c.normal, -c.offset);
    }
    if (good_possible && nonempty(good)) out.cells.push_back({good, j, color, -1});
    for (int j2 = 0; j2 < J; ++j2) {
      if (family.colors[j2] == color) continue;
      const Cut& c = out.cuts[j][j2];
      if (c.is_constant()) {
        if (c.offset >= 0.0) out.cells.push_back({X, j, color, j2});
        continue;
      }
      ConvexBody bad = X.with_constraint(-c.normal, c.offset);
      if (nonempty(bad)) out.cells.push_back({std::move(bad), j, color, j2});
    }
  }
  return out;
}

StageComponent build_stage(const HypothesisFamily& family, Partition partition, int s,
                           double eps_s, double r_s, double delta_s, std::int64_t kbar_s,
                           double tol, int threads, bool enforce_kbar) {
  if (partition.cells.empty()) throw InputError("stage has no cells");
  if (!(eps_s > 0.0) || !(eps_s < 1.0)) throw InputError("eps_s must lie in (0, 1)");
  StageComponent st;
  st.s = s;
  st.eps_s = eps_s;
  st.r_s = r_s;
  st.delta_s = delta_s;
  st.kbar_s = kbar_s;
  const bool last = partition.last;
  st.cells = std::move(partition.cells);
  st.cuts = std::move(partition.cuts);
  const int L = st.size();

  std::vector<std::pair<int, int>> work;
  for (int q = 0; q < L; ++q) {
    for (int q2 = q + 1; q2 < L; ++q2) {
      if (st.cells[q].color != st.cells[q2].color) work.emplace_back(q, q2);
    }
  }
  st.pairs.resize(work.size());
  detail::parallel_for(work.size(), threads, [&](std::size_t w) {
    const auto [q, q2] = work[w];
    const SaddlePoint sp =
        solve_pairwise(family.scheme, st.cells[q].body, st.cells[q2].body, {tol});
    StagePair& p = st.pairs[w];
    p.q = q;
    p.q2 = q2;
    p.mu_star = sp.mu_star;
    p.nu_star = sp.nu_star;
    p.opt = std::min(0.0, sp.opt);
    p.affine = half_log_ratio(family.scheme, sp.mu_star, sp.nu_star);
  });

  st.risks = Matrix::Ones(L, L);
  st.closeness = Matrix::Zero(L, L);
  for (const StagePair& p : st.pairs) {
    const double risk = std::exp(p.opt);
    if (risk >= 1.0 - 1e-12) {
      throw AssumptionViolation("cells " + std::to_string(p.q) + " and " + std::to_string(p.q2) +
                                " of stage " + std::to_string(s) +
                                " have different colors but overlap (risk not below one)");
    }
    st.risks(p.q, p.q2) = st.risks(p.q2, p.q) = risk;
    if (risk <= delta_s || last) st.closeness(p.q, p.q2) = st.closeness(p.q2, p.q) = 1.0;
  }

  // smallest k with ||D(k)|| < eps_s: doubling, then bisection
  const double target = std::log(eps_s);
  auto below = [&](std::int64_t k) {
    return log_risk_matrix_norm(st.risks, st.closeness, k) < target;
  };
  std::int64_t hi = 1;
  while (!below(hi)) {
    if (hi > (std::int64_t{1} << 61)) throw SolverFailure("stage sample size search overflowed", 0.0);
    hi *= 2;
  }
  std::int64_t lo = hi / 2;  // fails the test when hi > 1
  while (hi - lo > 1) {
    const std::int64_t mid = lo + (hi - lo) / 2;
    if (below(mid)) hi = mid;
    else lo = mid;
  }
  st.k_s = hi;
  if (enforce_kbar && st.k_s > kbar_s) {
    throw AssumptionViolation("stage " + std::to_string(s) + " needs k = " +
                              std::to_string(st.k_s) + " observations, above kbar = " +
                              std::to_string(kbar_s));
  }
  st.norm = std::exp(log_risk_matrix_norm(st.risks, st.closeness, st.k_s));

  const double max_entry = st.closeness.isZero(0.0) ? 0.0 : st.norm;
  double eta = std::min(1e-9 * (max_entry + 1.0), 0.5 * (eps_s - st.norm) / L);
  if (!(eta > 0.0)) eta = 1e-300;
  for (int attempt = 0;; ++attempt) {
    const ShiftResult sr = optimal_shifts(st.risks, st.closeness, st.k_s, eta);
    st.shifts = sr.alpha;
    st.achieved = sr.achieved;
    if (st.achieved <= eps_s) break;
    if (attempt == 6) {
      throw SolverFailure("stage shifts do not reach the stage risk " + std::to_string(eps_s),
                          st.achieved - eps_s);
    }
    eta *= 1e-2;
  }
  return st;
}

std::vector<std::vector<Detector>> stage_detectors(const StageComponent& stage,
                                                   const SchemeKind& scheme) {
  const int L = stage.size();
  Detector zero;
  zero.scheme = scheme;
  zero.affine = {Vector::Zero(scheme.n), 0.0};
  std::vector<std::vector<Detector>> table(L, std::vector<Detector>(L, zero));
  for (const StagePair& p : stage.pairs) {
    Detector d;
    d.scheme = scheme;
    d.mu_star = p.mu_star;
    d.nu_star = p.nu_star;
    d.risk_log = p.opt;
    d.affine = p.affine;
    table[p.q][p.q2] = d.with_shift(stage.shifts(p.q, p.q2));
    table[p.q2][p.q] = d.negated().with_shift(stage.shifts(p.q2, p.q));
  }
  return table;
}

SequentialTest build_sequential(const HypothesisFamily& family, const ScheduleConfig& cfg) {
  validate_family(family);
  validate_schedule_config(cfg);
  SequentialTest test;
  test.family = family;
  test.config = cfg;
  const SeparationReport sep = separation(family, cfg.tol, cfg.threads);
  test.d = sep.d;
  test.schedule = compute_schedule(family, cfg, sep.d);
  const int S = test.schedule.S;
  for (int s = 1; s <= S; ++s) {
    const double r = test.schedule.r_s[s - 1];
    Partition part = partition_stage(family, s, r, cfg.cut_policy, s == S, cfg.tol, cfg.threads);
    // an overridden S carries no guarantee that the last stage fits in kbar(S)
    const bool enforce = !(cfg.S && s == S);
    test.stages.push_back(build_stage(family, std::move(part), s, test.schedule.eps_s[s - 1], r,
                                      test.schedule.delta_s[s - 1], test.schedule.kbar[s - 1],
                                      cfg.tol, cfg.threads, enforce));
  }
  test.K = test.stages.back().k_s;
  for (StageComponent& st : test.stages) st.active = st.k_s <= test.K;
  for (int i = 0; i < S; ++i) {
    if (test.stages[i].active) test.order.push_back(i);
  }
  std::stable_sort(test.order.begin(), test.order.end(),
                   [&](int a, int b) { return test.stages[a].k_s < test.stages[b].k_s; });
  return test;
}

std::vector<int> stage_accept(const StageComponent& stage, const SampleStatistic& stat) {
  const int L = stage.size();
  Matrix values = Matrix::Zero(L, L);
  const double k = static_cast<double>(stat.count);
  for (const StagePair& p : stage.pairs) {
    if (stage.closeness(p.q, p.q2) == 0.0) continue;
    const double base = p.affine.a.dot(stat.sum) + p.affine.b * k;
    values(p.q, p.q2) = base - stage.shifts(p.q, p.q2);
    values(p.q2, p.q) = -base - stage.shifts(p.q2, p.q);
  }
  return accept_from_values(values, stage.closeness);
}

namespace {

template <class Advance>
Verdict run_core(const SequentialTest& test, Advance&& advance, bool record) {
  Verdict v;
  int position = 0;
  for (int idx : test.order) {
    ++position;
    const StageComponent& st = test.stages[idx];
    const SampleStatistic& stat = advance(st.k_s);
    const std::vector<int> accepted = stage_accept(st, stat);
    if (record) v.trace.push_back({st.s, st.k_s, accepted});
    if (accepted.empty()) continue;
    const int color = st.cells[accepted.front()].color;
    const bool single = std::all_of(accepted.begin(), accepted.end(),
                                    [&](int q) { return st.cells[q].color == color; });
    if (single) {
      v.accepted_color = color;
      v.stage = st.s;
      v.position = position;
      v.observations_used = st.k_s;
      return v;
    }
  }
  v.stage = test.stages.empty() ? 0 : test.stages.back().s;
  v.position = position;
  v.observations_used = test.K;
  return v;
}

}  // namespace

Verdict run_sequential(const SequentialTest& test, std::span<const Observation> stream,
                       bool record) {
  if (static_cast<std::int64_t>(stream.size()) < test.K) {
    throw InputError("observation stream has " + std::to_string(stream.size()) +
                     " entries; the test needs K = " + std::to_string(test.K));
  }
  SampleStatistic stat(test.family.scheme.n);
  std::size_t used = 0;
  auto advance = [&](std::int64_t k) -> const SampleStatistic& {
    while (static_cast<std::int64_t>(used) < k) {
      check_observation(test.family.scheme, stream[used]);
      stat.add(stream[used++]);
    }
    return stat;
  };
  return run_core(test, advance, record);
}

Verdict run_sequential(const SequentialTest& test, const std::function<Observation()>& draw,
                       bool record) {
  SampleStatistic stat(test.family.scheme.n);
  auto advance = [&](std::int64_t k) -> const SampleStatistic& {
    while (stat.count < k) stat.add(draw());
    return stat;
  };
  return run_core(test, advance, record);
}

}  // namespace seqtest
