#pragma once

// The staged sequential test: schedule of stage tolerances, cuts of the
// parameter sets into cells, per-stage aggregated tests and their execution
// on a shared observation stream.

#include <functional>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "seqtest/multitest.hpp"

namespace seqtest {

struct HypothesisFamily {
  SchemeKind scheme;
  std::vector<ConvexBody> bodies;
  std::vector<int> colors;  // colors[j] for body j

  int size() const { return static_cast<int>(bodies.size()); }
  std::vector<int> distinct_colors() const;
};

/// Dimensions, parameter domains, matching color list and at least two
/// colors. Disjointness of cross-color bodies is checked by `separation`.
void validate_family(const HypothesisFamily& family);

enum class CutPolicy { Default, Smart };
std::string to_string(CutPolicy policy);
CutPolicy cut_policy_from_string(const std::string& name);

struct ScheduleConfig {
  double eps = 0.01;
  /// Explicit kbar(1), kbar(2), ...; empty means kbar(s) = 2^(s-1).
  std::vector<std::int64_t> kbar;
  CutPolicy cut_policy = CutPolicy::Default;
  std::optional<int> S;               // overrides the computed number of stages
  std::map<int, double> r_override;   // stage s -> r(s)
  double tol = 1e-9;                  // saddle-point tolerance
  int threads = 1;
};

/// Throws ConfigError unless kbar(1) = 1 and kbar(s) < kbar(s+1) <= 2 kbar(s).
void validate_schedule_config(const ScheduleConfig& cfg);

std::int64_t kbar_value(const ScheduleConfig& cfg, int s);

struct Schedule {
  int S = 0;
  std::int64_t J = 0;
  // index s - 1
  std::vector<std::int64_t> kbar;
  std::vector<double> eps_s;
  std::vector<double> r_s;
  std::vector<double> delta_s;
};

/// S is the smallest integer with kbar(S) > ln(S J^2 / eps) / d unless
/// overridden; eps_s = eps / (2S), r(s) = ln(S J^2 / eps) / kbar(s),
/// delta_s = exp(-r(s)).
Schedule compute_schedule(int J, const ScheduleConfig& cfg, double d);
Schedule compute_schedule(const HypothesisFamily& family, const ScheduleConfig& cfg, double d);

/// l(mu) = psi(mu*, nu*) + e^T (mu - mu*) + r, with e the mu-gradient at the
/// saddle. Its retained side {l <= 0} satisfies psi_Y <= -r.
Cut default_cut(const SaddlePoint& saddle, double r);

struct Cell {
  ConvexBody body;
  int origin = 0;         // index j of the parent body
  int color = 0;
  int bad_against = -1;   // j' whose cut is violated; -1 for the good cell
};

struct Partition {
  std::vector<Cell> cells;
  /// cuts[j][j'] for bodies of different colors (retain-all elsewhere).
  std::vector<std::vector<Cut>> cuts;
  /// Pairs whose smart cut was infeasible and fell back to the default cut.
  std::vector<std::pair<int, int>> smart_fallbacks;
  /// Trivial last-stage partition: every cross-color pair must be told apart.
  bool last = false;
};

/// Cells of stage s. `last` selects the trivial partition (cells = bodies).
Partition partition_stage(const HypothesisFamily& family, int s, double r_s,
                          CutPolicy policy, bool last, double tol = 1e-9, int threads = 1);

struct StagePair {
  int q = 0;
  int q2 = 0;
  ParameterPoint mu_star;
  ParameterPoint nu_star;
  double opt = 0.0;
  AffineFunctional affine;  // 1/2 ln(p_mu* / p_nu*), unshifted
};

struct StageComponent {
  int s = 0;
  double eps_s = 0.0;
  double r_s = 0.0;
  double delta_s = 0.0;
  std::int64_t kbar_s = 0;
  std::vector<Cell> cells;
  std::vector<std::vector<Cut>> cuts;
  std::vector<StagePair> pairs;  // cross-color cell pairs, q < q2
  Matrix risks;                  // L x L, 1 for same-color pairs
  Matrix closeness;              // C^s
  Matrix shifts;                 // alpha^(s)
  std::int64_t k_s = 0;
  double norm = 0.0;             // ||D(k_s)||
  double achieved = 0.0;         // shift_risk at alpha^(s)
  bool active = true;            // false when k_s exceeds k_S

  int size() const { return static_cast<int>(cells.size()); }
};

/// Cross-color detectors, closeness, k_s and shifts for one stage. Throws
/// AssumptionViolation when a cross-color risk is not below one, or when
/// k_s would exceed kbar_s (checked only if enforce_kbar).
StageComponent build_stage(const HypothesisFamily& family, Partition partition, int s,
                           double eps_s, double r_s, double delta_s, std::int64_t kbar_s,
                           double tol = 1e-9, int threads = 1, bool enforce_kbar = true);

/// Shifted detector table of a stage, indexed by cells.
std::vector<std::vector<Detector>> stage_detectors(const StageComponent& stage,
                                                   const SchemeKind& scheme);

struct SequentialTest {
  HypothesisFamily family;
  ScheduleConfig config;
  Schedule schedule;
  double d = 0.0;
  std::vector<StageComponent> stages;  // schedule order s = 1..S
  std::vector<int> order;              // run order: indices into stages, active ones by k_s
  std::int64_t K = 0;                  // k of the last stage

  const StageComponent& stage(int s) const { return stages.at(s - 1); }
};

SequentialTest build_sequential(const HypothesisFamily& family, const ScheduleConfig& cfg);

struct StageRecord {
  int s = 0;
  std::int64_t k = 0;
  std::vector<int> accepted_cells;
};

struct Verdict {
  std::optional<int> accepted_color;
  int stage = 0;       // schedule index s of the terminating stage
  int position = 0;    // 1-based rank of that stage in the run order
  std::int64_t observations_used = 0;
  std::vector<StageRecord> trace;  // filled when recording
};

/// Cells accepted by the stage test given the statistic of the first k_s
/// observations.
std::vector<int> stage_accept(const StageComponent& stage, const SampleStatistic& stat);

/// Runs on a materialized stream; throws InputError when it is shorter
/// than K.
Verdict run_sequential(const SequentialTest& test, std::span<const Observation> stream,
                       bool record = false);

/// Runs drawing observations one at a time, only as far as needed.
Verdict run_sequential(const SequentialTest& test, const std::function<Observation()>& draw,
                       bool record = false);

/// Versioned JSON document of a built test, and back.
std::string serialize(const SequentialTest& test);
SequentialTest deserialize(const std::string& text);

}  // namespace seqtest
