#pragma once

// Config-driven Monte Carlo experiments: simulated runs of a built test,
// risk calibration, bad-cell volume tables and stopping-stage profiles.

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "seqtest/analysis.hpp"

namespace seqtest {

/// Two boxes X1 = [delta, 1 + delta] x [0, 1]^(n-1), X2 = [-1, 0]^n, one
/// color each, Gaussian observations.
HypothesisFamily two_box_family(int n, double delta);

/// The square [m, 1]^2 and its reflections in the axes and the origin, four
/// colors, Gaussian observations.
HypothesisFamily four_squares_family(double margin = 0.01);

enum class MuSampling { Uniform, Grid, Fixed };

struct ExperimentConfig {
  HypothesisFamily family;
  ScheduleConfig schedule;
  std::int64_t trials = 2000;
  std::uint64_t seed = 1;
  MuSampling mu_sampling = MuSampling::Uniform;
  int grid_resolution = 2;
  std::vector<ParameterPoint> fixed_points;
  // volume table (two-box template)
  std::vector<int> volume_dims = {2, 3, 4, 5, 6};
  double volume_delta = 0.1;
  int volume_stage = 11;
  std::int64_t volume_samples = 1000000;
  // profile grid
  int profile_resolution = 101;
};

/// Parses the "v1" JSON schema. Throws ConfigError on any problem.
ExperimentConfig parse_experiment_config(const std::string& json_text);
ExperimentConfig load_experiment_config(const std::string& path);

/// Per-trial seed derived from the experiment seed and the trial index.
std::uint64_t trial_seed(std::uint64_t seed, std::uint64_t index);

/// Parameter for trial t under the configured sampling rule.
ParameterPoint draw_mu(const ExperimentConfig& cfg, std::int64_t trial, Rng& rng);

struct TrialRecord {
  std::int64_t trial = 0;
  std::uint64_t seed = 0;
  ParameterPoint mu;
  int color_true = 0;
  std::optional<int> color_accepted;
  int stage = 0;
  int position = 0;
  std::int64_t observations = 0;
  int s_star = 0;
  std::int64_t k_s_star = 0;
  bool correct = false;  // true color accepted
  bool wrong = false;    // another color accepted
  bool late = false;     // correct, but more observations than k(s*(mu))
};

struct ObservationStats {
  double mean = 0.0;
  double median = 0.0;
  double q10 = 0.0;
  double q25 = 0.0;
  double q75 = 0.0;
  double q90 = 0.0;
  std::int64_t min = 0;
  std::int64_t max = 0;
};

/// Quantiles by linear interpolation between order statistics.
ObservationStats observation_stats(const std::vector<TrialRecord>& records);

struct ExperimentReport {
  std::vector<TrialRecord> records;
  double error_rate = 0.0;        // wrong-color acceptances / trials
  double no_decision_rate = 0.0;
  double late_rate = 0.0;
  ObservationStats observations;
};

/// Builds the test once and runs every trial on a lazily drawn stream.
ExperimentReport run_experiment(const ExperimentConfig& cfg, const SequentialTest& test,
                                int threads = 1);
ExperimentReport run_experiment(const ExperimentConfig& cfg, int threads = 1);

struct VolumeRow {
  int n = 0;
  std::string policy;
  double r = 0.0;
  double volume = 0.0;
  double stderr_ = 0.0;
  bool exact = false;
};

/// Bad-cell volumes of X1 against X2 for the two-box template at the
/// configured stage, default and smart cuts.
std::vector<VolumeRow> volumes_report(const ExperimentConfig& cfg, int stage);

struct ProfilePoint {
  double x = 0.0;
  double y = 0.0;
  bool inside = false;
  double ln_k_sstar = 0.0;
  double ln_k_sbar = 0.0;
};

/// ln k(s*(mu)) and ln k(sbar(mu)) over a resolution x resolution grid
/// spanning the bounding box of the union (first two coordinates).
std::vector<ProfilePoint> profile_grid(const ExperimentConfig& cfg, const SequentialTest& test,
                                       int resolution);

struct Interval {
  double lower = 0.0;
  double upper = 0.0;
};

/// Wilson score interval at 95%.
Interval wilson_interval(std::int64_t successes, std::int64_t trials, double z = 1.959963984540054);

struct Calibration {
  std::int64_t trials = 0;
  double eps = 0.0;
  double wrong_rate = 0.0;
  double no_decision_rate = 0.0;
  double late_rate = 0.0;
  double failure_rate = 0.0;         // wrong or late
  double strict_failure_rate = 0.0;  // wrong, late or no decision
  Interval wrong_ci, no_decision_ci, failure_ci, strict_failure_ci;
  bool violation = false;  // lower confidence bound of the failure rate above eps
  ExperimentReport report;
};

/// Requires at least 500 trials.
Calibration calibrate_risk(const ExperimentConfig& cfg, const SequentialTest& test,
                           int threads = 1);
Calibration calibrate_risk(const ExperimentConfig& cfg, int threads = 1);

/// The configuration echoed back as "v1" JSON.
std::string config_json(const ExperimentConfig& cfg);

/// Report documents; byte-identical for identical inputs.
std::string report_json(const ExperimentConfig& cfg, const SequentialTest& test,
                        const ExperimentReport& report);
std::string calibration_json(const ExperimentConfig& cfg, const SequentialTest& test,
                             const Calibration& cal);
std::string trials_csv(const std::vector<TrialRecord>& records);
std::string volumes_csv(const std::vector<VolumeRow>& rows);
std::string profile_csv(const std::vector<ProfilePoint>& points);

}  // namespace seqtest
