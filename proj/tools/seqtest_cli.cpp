// seqtest command line: builds staged tests from JSON configs and runs the
// Monte Carlo experiments.

#include <CLI11.hpp>
#include <json.hpp>

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>

#include "seqtest/errors.hpp"
#include "seqtest/harness.hpp"

namespace fs = std::filesystem;
using namespace seqtest;
using Json = nlohmann::ordered_json;

namespace {

struct Common {
  std::string config;
  std::optional<std::uint64_t> seed;
  std::string out = ".";
  std::optional<int> threads;
  std::string format = "csv";
};

void add_common(CLI::App* app, Common& c) {
  app->add_option("--config", c.config, "experiment config (JSON, schema v1)")->required();
  app->add_option("--seed", c.seed, "overrides the config seed");
  app->add_option("--out", c.out, "output directory");
  app->add_option("--threads", c.threads, "worker threads")->check(CLI::PositiveNumber);
  app->add_option("--format", c.format, "table format")->check(CLI::IsMember({"csv", "json"}));
}

ExperimentConfig load(const Common& c) {
  ExperimentConfig cfg = load_experiment_config(c.config);
  if (c.seed) cfg.seed = *c.seed;
  if (c.threads) cfg.schedule.threads = *c.threads;
  return cfg;
}

void write_file(const Common& c, const std::string& name, const std::string& text) {
  fs::create_directories(c.out);
  const fs::path p = fs::path(c.out) / name;
  std::ofstream f(p, std::ios::binary);
  if (!f) throw ConfigError("cannot write '" + p.string() + "'");
  f << text;
  std::cout << p.string() << '\n';
}

Json vec(const Vector& v) { return std::vector<double>(v.data(), v.data() + v.size()); }

// CSV header row -> array of objects, used for --format json tables
std::string csv_to_json(const std::string& csv) {
  std::istringstream in(csv);
  std::string line;
  std::getline(in, line);
  std::vector<std::string> header;
  {
    std::istringstream h(line);
    for (std::string f; std::getline(h, f, ',');) header.push_back(f);
  }
  Json rows = Json::array();
  while (std::getline(in, line)) {
    std::istringstream r(line);
    Json row;
    std::size_t i = 0;
    for (std::string f; i < header.size(); ++i) {
      if (!std::getline(r, f, ',')) f.clear();
      if (f.empty()) {
        row[header[i]] = nullptr;
        continue;
      }
      char* end = nullptr;
      const double x = std::strtod(f.c_str(), &end);
      if (*end == '\0') row[header[i]] = x;
      else row[header[i]] = f;
    }
    rows.push_back(row);
  }
  return rows.dump(1);
}

void table(const Common& c, const std::string& stem, const std::string& csv) {
  if (c.format == "json") write_file(c, stem + ".json", csv_to_json(csv));
  else write_file(c, stem + ".csv", csv);
}

int solve_pair(const Common& c, int i, int j) {
  const ExperimentConfig cfg = load(c);
  const HypothesisFamily& f = cfg.family;
  if (i < 0 || j < 0 || i >= f.size() || j >= f.size() || i == j) {
    throw ConfigError("pair indices must be distinct bodies in 0.." + std::to_string(f.size() - 1));
  }
  const SaddlePoint sp = solve_pairwise(f.scheme, f.bodies[i], f.bodies[j], {cfg.schedule.tol});
  Json out;
  out["i"] = i;
  out["j"] = j;
  out["opt"] = sp.opt;
  out["risk"] = std::exp(sp.opt);
  out["mu_star"] = vec(sp.mu_star);
  out["nu_star"] = vec(sp.nu_star);
  out["certified_gap"] = sp.certified_gap;
  out["iterations"] = sp.iterations;
  write_file(c, "pair.json", out.dump(1));
  return 0;
}

int build(const Common& c) {
  const ExperimentConfig cfg = load(c);
  const SequentialTest test = build_sequential(cfg.family, cfg.schedule);
  write_file(c, "test.json", serialize(test));
  return 0;
}

int run(const Common& c, const std::vector<double>& mu_in) {
  const ExperimentConfig cfg = load(c);
  const SequentialTest test = build_sequential(cfg.family, cfg.schedule);
  Rng rng(trial_seed(cfg.seed, 0));
  const Vector mu = mu_in.empty() ? draw_mu(cfg, 0, rng)
                                  : Vector(Eigen::Map<const Vector>(mu_in.data(), mu_in.size()));
  if (mu.size() != cfg.family.scheme.n) throw ConfigError("--mu has the wrong length");
  check_parameter(cfg.family.scheme, mu);
  const Verdict v = run_sequential(test, [&] { return sample_one(cfg.family.scheme, mu, rng); }, true);
  Json out;
  out["mu"] = vec(mu);
  out["accepted_color"] = v.accepted_color ? Json(*v.accepted_color) : Json(nullptr);
  out["stage"] = v.stage;
  out["position"] = v.position;
  out["observations"] = v.observations_used;
  Json trace = Json::array();
  for (const StageRecord& r : v.trace) {
    trace.push_back({{"s", r.s}, {"k", r.k}, {"accepted_cells", r.accepted_cells}});
  }
  out["trace"] = trace;
  write_file(c, "run.json", out.dump(1));
  return 0;
}

int simulate(const Common& c) {
  const ExperimentConfig cfg = load(c);
  const SequentialTest test = build_sequential(cfg.family, cfg.schedule);
  const ExperimentReport rep = run_experiment(cfg, test, cfg.schedule.threads);
  write_file(c, "report.json", report_json(cfg, test, rep));
  table(c, "trials", trials_csv(rep.records));
  return 0;
}

int volumes(const Common& c, std::optional<int> stage) {
  const ExperimentConfig cfg = load(c);
  table(c, "volumes", volumes_csv(volumes_report(cfg, stage.value_or(cfg.volume_stage))));
  return 0;
}

int profile(const Common& c, std::optional<int> resolution) {
  const ExperimentConfig cfg = load(c);
  const SequentialTest test = build_sequential(cfg.family, cfg.schedule);
  table(c, "profile", profile_csv(profile_grid(cfg, test, resolution.value_or(cfg.profile_resolution))));
  return 0;
}

int calibrate(const Common& c, bool assert_ok) {
  const ExperimentConfig cfg = load(c);
  const SequentialTest test = build_sequential(cfg.family, cfg.schedule);
  const Calibration cal = calibrate_risk(cfg, test, cfg.schedule.threads);
  write_file(c, "calibration.json", calibration_json(cfg, test, cal));
  table(c, "trials", trials_csv(cal.report.records));
  if (assert_ok && cal.violation) {
    std::cerr << "calibration failed: failure rate " << cal.failure_rate << ", CI lower bound "
              << cal.failure_ci.lower << " > eps " << cal.eps << '\n';
    return 4;
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"staged sequential tests of convex composite hypotheses"};
  app.require_subcommand(1);

  Common c;
  int pi = 0, pj = 1;
  std::vector<double> mu;
  std::optional<int> stage, resolution;
  bool assert_ok = false;

  auto* sp = app.add_subcommand("solve-pair", "saddle point of psi over two bodies");
  add_common(sp, c);
  sp->add_option("-i", pi, "first body (0-based)");
  sp->add_option("-j", pj, "second body (0-based)");
  auto* bu = app.add_subcommand("build", "build the staged test and write it as JSON");
  add_common(bu, c);
  auto* ru = app.add_subcommand("run", "one run on a simulated stream");
  add_common(ru, c);
  ru->add_option("--mu", mu, "true parameter (default: first draw of the sampling rule)")
      ->delimiter(',');
  auto* si = app.add_subcommand("simulate", "Monte Carlo trials");
  add_common(si, c);
  auto* vo = app.add_subcommand("volumes", "bad-cell volume table for the two-box family");
  add_common(vo, c);
  vo->add_option("--stage", stage, "stage s");
  auto* pr = app.add_subcommand("profile", "ln k(s*) over a grid");
  add_common(pr, c);
  pr->add_option("--resolution", resolution, "points per axis");
  auto* ca = app.add_subcommand("calibrate", "empirical risk with Wilson intervals");
  add_common(ca, c);
  ca->add_flag("--assert", assert_ok, "exit 4 when the risk bound is violated");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }

  try {
    if (*sp) return solve_pair(c, pi, pj);
    if (*bu) return build(c);
    if (*ru) return run(c, mu);
    if (*si) return simulate(c);
    if (*vo) return volumes(c, stage);
    if (*pr) return profile(c, resolution);
    if (*ca) return calibrate(c, assert_ok);
  } catch (const ConfigError& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return 2;
  } catch (const InputError& e) {
    std::cerr << "input error: " << e.what() << '\n';
    return 2;
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 3;
  }
  return 0;
}
