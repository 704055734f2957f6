#include "seqtest/harness.hpp"

#include <algorithm>
#include <cmath>
#include <charconv>
#include <fstream>
#include <limits>
#include <sstream>

#include "json_io.hpp"
#include "parallel.hpp"
#include "seqtest/errors.hpp"

namespace seqtest {

using detail::Json;
using detail::to_json;

HypothesisFamily two_box_family(int n, double delta) {
  if (n < 1) throw InputError("dimension must be >= 1");
  if (!(delta > 0.0)) throw InputError("delta must be positive");
  Vector l1 = Vector::Zero(n), u1 = Vector::Ones(n);
  l1[0] = delta;
  u1[0] = 1.0 + delta;
  return {SchemeKind::gaussian(n),
          {ConvexBody::box(l1, u1), ConvexBody::box(-Vector::Ones(n), Vector::Zero(n))},
          {1, 2}};
}

HypothesisFamily four_squares_family(double margin) {
  if (!(margin > 0.0) || !(margin < 1.0)) throw InputError("margin must lie in (0, 1)");
  HypothesisFamily f;
  f.scheme = SchemeKind::gaussian(2);
  // X1, then reflections in the x2 axis, the x1 axis and the origin
  const double signs[4][2] = {{1, 1}, {-1, 1}, {1, -1}, {-1, -1}};
  for (int j = 0; j < 4; ++j) {
    Vector lo(2), hi(2);
    for (int i = 0; i < 2; ++i) {
      lo[i] = signs[j][i] > 0 ? margin : -1.0;
      hi[i] = signs[j][i] > 0 ? 1.0 : -margin;
    }
    f.bodies.push_back(ConvexBody::box(lo, hi));
    f.colors.push_back(j + 1);
  }
  return f;
}

// ---------------------------------------------------------------------------
// configuration

namespace {

template <class T>
T get_or(const Json& j, const char* key, T fallback) {
  if (!j.contains(key) || j.at(key).is_null()) return fallback;
  return j.at(key).get<T>();
}

HypothesisFamily family_from_json(const Json& j) {
  if (j.contains("family")) {
    const Json& f = j.at("family");
    const std::string name = f.at("template").get<std::string>();
    if (name == "two_box") return two_box_family(get_or(f, "n", 2), get_or(f, "delta", 0.1));
    if (name == "four_squares") return four_squares_family(get_or(f, "margin", 0.01));
    throw ConfigError("unknown family template '" + name + "'");
  }
  HypothesisFamily family;
  const Json& sc = j.at("scheme");
  std::string kind;
  if (sc.contains("kind")) {
    kind = sc.at("kind").get<std::string>();
  } else {
    for (const char* k : {"gaussian", "poisson", "discrete"}) {
      if (sc.contains(k)) kind = k;
    }
  }
  try {
    family.scheme = {scheme_type_from_string(kind), sc.at("n").get<int>()};
  } catch (const InputError& e) {
    throw ConfigError(e.what());
  }
  if (family.scheme.n < 1) throw ConfigError("scheme dimension must be >= 1");
  for (const Json& b : j.at("bodies")) family.bodies.push_back(detail::body_from_json(b));
  family.colors = j.at("colors").get<std::vector<int>>();
  return family;
}

}  // namespace

ExperimentConfig parse_experiment_config(const std::string& json_text) {
  Json j;
  try {
    j = Json::parse(json_text);
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError(std::string("config is not valid JSON: ") + e.what());
  }
  ExperimentConfig cfg;
  try {
    const std::string schema = get_or<std::string>(j, "schema", "");
    if (schema != "v1") throw ConfigError("config schema must be \"v1\"");
    cfg.family = family_from_json(j);
    try {
      validate_family(cfg.family);
    } catch (const InputError& e) {
      throw ConfigError(std::string("invalid family: ") + e.what());
    } catch (const InvalidParameter& e) {
      throw ConfigError(std::string("invalid family: ") + e.what());
    }

    ScheduleConfig& sc = cfg.schedule;
    sc.eps = get_or(j, "eps", 0.01);
    sc.kbar = get_or(j, "kbar", std::vector<std::int64_t>{});
    sc.cut_policy = cut_policy_from_string(get_or<std::string>(j, "cut_policy", "default"));
    sc.tol = get_or(j, "tol", 1e-9);
    if (j.contains("overrides")) {
      const Json& o = j.at("overrides");
      if (o.contains("S") && !o.at("S").is_null()) sc.S = o.at("S").get<int>();
      if (o.contains("r")) {
        for (const auto& [k, v] : o.at("r").items()) sc.r_override[std::stoi(k)] = v.get<double>();
      }
    }
    sc.threads = get_or(j, "threads", 1);
    if (sc.threads < 1) throw ConfigError("threads must be >= 1");
    validate_schedule_config(sc);

    cfg.trials = get_or<std::int64_t>(j, "trials", 2000);
    if (cfg.trials < 1) throw ConfigError("trials must be >= 1");
    cfg.seed = get_or<std::uint64_t>(j, "seed", 1);

    if (j.contains("mu_sampling")) {
      const Json& m = j.at("mu_sampling");
      const std::string kind = m.is_string() ? m.get<std::string>() : m.at("kind").get<std::string>();
      if (kind == "uniform") {
        cfg.mu_sampling = MuSampling::Uniform;
      } else if (kind == "grid") {
        cfg.mu_sampling = MuSampling::Grid;
        cfg.grid_resolution = m.at("resolution").get<int>();
        if (cfg.grid_resolution < 2) throw ConfigError("grid resolution must be >= 2");
      } else if (kind == "fixed") {
        cfg.mu_sampling = MuSampling::Fixed;
        for (const Json& p : m.at("points")) {
          Vector mu = detail::vector_from_json(p);
          if (mu.size() != cfg.family.scheme.n) throw ConfigError("fixed point has wrong length");
          cfg.fixed_points.push_back(std::move(mu));
        }
        if (cfg.fixed_points.empty()) throw ConfigError("fixed sampling needs at least one point");
      } else {
        throw ConfigError("unknown mu_sampling '" + kind + "'");
      }
    }
    if (j.contains("volumes")) {
      const Json& v = j.at("volumes");
      cfg.volume_dims = get_or(v, "dims", cfg.volume_dims);
      cfg.volume_delta = get_or(v, "delta", cfg.volume_delta);
      cfg.volume_stage = get_or(v, "stage", cfg.volume_stage);
      cfg.volume_samples = get_or(v, "samples", cfg.volume_samples);
      if (cfg.volume_samples < 1000) throw ConfigError("volume samples must be >= 1000");
    }
    if (j.contains("profile")) {
      cfg.profile_resolution = get_or(j.at("profile"), "resolution", cfg.profile_resolution);
      if (cfg.profile_resolution < 2) throw ConfigError("profile resolution must be >= 2");
    }
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError(std::string("malformed config: ") + e.what());
  }
  return cfg;
}

ExperimentConfig load_experiment_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot read config file '" + path + "'");
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_experiment_config(ss.str());
}

std::string config_json(const ExperimentConfig& cfg) {
  Json j;
  j["schema"] = "v1";
  j["scheme"] = {{"kind", to_string(cfg.family.scheme.type)}, {"n", cfg.family.scheme.n}};
  Json bodies = Json::array();
  for (const ConvexBody& b : cfg.family.bodies) bodies.push_back(detail::body_to_json(b));
  j["bodies"] = bodies;
  j["colors"] = cfg.family.colors;
  j["eps"] = cfg.schedule.eps;
  j["kbar"] = cfg.schedule.kbar;
  j["cut_policy"] = to_string(cfg.schedule.cut_policy);
  j["tol"] = cfg.schedule.tol;
  Json o;
  o["S"] = cfg.schedule.S ? Json(*cfg.schedule.S) : Json(nullptr);
  Json r = Json::object();
  for (const auto& [s, v] : cfg.schedule.r_override) r[std::to_string(s)] = v;
  o["r"] = r;
  j["overrides"] = o;
  j["trials"] = cfg.trials;
  j["seed"] = cfg.seed;
  Json m;
  switch (cfg.mu_sampling) {
    case MuSampling::Uniform: m["kind"] = "uniform"; break;
    case MuSampling::Grid:
      m["kind"] = "grid";
      m["resolution"] = cfg.grid_resolution;
      break;
    case MuSampling::Fixed: {
      m["kind"] = "fixed";
      Json pts = Json::array();
      for (const Vector& p : cfg.fixed_points) pts.push_back(to_json(p));
      m["points"] = pts;
      break;
    }
  }
  j["mu_sampling"] = m;
  return j.dump(1);
}

// ---------------------------------------------------------------------------
// trials

namespace {

std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

int color_of(const HypothesisFamily& f, const Vector& mu) {
  for (int j = 0; j < f.size(); ++j) {
    if (f.bodies[j].contains(mu, 1e-12)) return f.colors[j];
  }
  throw InputError("parameter lies in none of the sets");
}

bool in_union(const HypothesisFamily& f, const Vector& mu) {
  return std::any_of(f.bodies.begin(), f.bodies.end(),
                     [&](const ConvexBody& b) { return b.contains(mu, 0.0); });
}

void union_bbox(const HypothesisFamily& f, Vector& lo, Vector& hi) {
  lo = f.bodies.front().bbox_lower();
  hi = f.bodies.front().bbox_upper();
  for (const ConvexBody& b : f.bodies) {
    lo = lo.cwiseMin(b.bbox_lower());
    hi = hi.cwiseMax(b.bbox_upper());
  }
}

std::vector<Vector> grid_points(const HypothesisFamily& f, int res) {
  Vector lo, hi;
  union_bbox(f, lo, hi);
  const int n = f.scheme.n;
  std::vector<Vector> pts;
  std::vector<int> idx(n, 0);
  for (;;) {
    Vector x(n);
    for (int i = 0; i < n; ++i) x[i] = lo[i] + (hi[i] - lo[i]) * idx[i] / (res - 1);
    if (in_union(f, x)) pts.push_back(x);
    int i = 0;
    while (i < n && ++idx[i] == res) idx[i++] = 0;
    if (i == n) break;
  }
  return pts;
}

}  // namespace

std::uint64_t trial_seed(std::uint64_t seed, std::uint64_t index) {
  return splitmix64(splitmix64(seed) ^ splitmix64(index + 0x632be59bd9b4e019ULL));
}

ParameterPoint draw_mu(const ExperimentConfig& cfg, std::int64_t trial, Rng& rng) {
  const HypothesisFamily& f = cfg.family;
  switch (cfg.mu_sampling) {
    case MuSampling::Fixed:
      return cfg.fixed_points[static_cast<std::size_t>(trial) % cfg.fixed_points.size()];
    case MuSampling::Grid: {
      const std::vector<Vector> pts = grid_points(f, cfg.grid_resolution);
      if (pts.empty()) throw ConfigError("no grid point falls inside the parameter sets");
      return pts[static_cast<std::size_t>(trial) % pts.size()];
    }
    case MuSampling::Uniform:
      break;
  }
  const int n = f.scheme.n;
  const bool simplex = std::all_of(f.bodies.begin(), f.bodies.end(),
                                   [](const ConvexBody& b) { return b.simplex_restricted(); });
  Vector lo, hi;
  union_bbox(f, lo, hi);
  std::uniform_real_distribution<double> unif(0.0, 1.0);
  std::exponential_distribution<double> expo(1.0);
  for (int attempt = 0; attempt < 10000000; ++attempt) {
    Vector x(n);
    if (simplex) {
      for (int i = 0; i < n; ++i) x[i] = expo(rng);
      x /= x.sum();
      for (const ConvexBody& b : f.bodies) {
        if (b.contains(x, 1e-12)) return x;
      }
      continue;
    }
    for (int i = 0; i < n; ++i) x[i] = lo[i] + unif(rng) * (hi[i] - lo[i]);
    if (in_union(f, x)) return x;
  }
  throw ConfigError("uniform sampling over the union of the sets failed (zero volume?)");
}

ObservationStats observation_stats(const std::vector<TrialRecord>& records) {
  ObservationStats st;
  if (records.empty()) return st;
  std::vector<double> v;
  v.reserve(records.size());
  double sum = 0.0;
  for (const TrialRecord& r : records) {
    v.push_back(static_cast<double>(r.observations));
    sum += static_cast<double>(r.observations);
  }
  std::sort(v.begin(), v.end());
  auto quantile = [&](double p) {
    const double pos = p * static_cast<double>(v.size() - 1);
    const auto i = static_cast<std::size_t>(std::floor(pos));
    const double frac = pos - static_cast<double>(i);
    return i + 1 < v.size() ? v[i] + frac * (v[i + 1] - v[i]) : v[i];
  };
  st.mean = sum / static_cast<double>(v.size());
  st.median = quantile(0.5);
  st.q10 = quantile(0.10);
  st.q25 = quantile(0.25);
  st.q75 = quantile(0.75);
  st.q90 = quantile(0.90);
  st.min = static_cast<std::int64_t>(v.front());
  st.max = static_cast<std::int64_t>(v.back());
  return st;
}

ExperimentReport run_experiment(const ExperimentConfig& cfg, const SequentialTest& test,
                                int threads) {
  if (cfg.trials < 1) throw ConfigError("trials must be >= 1");
  ExperimentReport rep;
  rep.records.resize(static_cast<std::size_t>(cfg.trials));
  const SchemeKind scheme = test.family.scheme;
  // grid points are enumerated once, not per trial
  ExperimentConfig local = cfg;
  std::vector<Vector> grid;
  if (cfg.mu_sampling == MuSampling::Grid) {
    grid = grid_points(cfg.family, cfg.grid_resolution);
    if (grid.empty()) throw ConfigError("no grid point falls inside the parameter sets");
    local.mu_sampling = MuSampling::Fixed;
    local.fixed_points = grid;
  }
  detail::parallel_for(rep.records.size(), threads, [&](std::size_t t) {
    TrialRecord& rec = rep.records[t];
    rec.trial = static_cast<std::int64_t>(t);
    rec.seed = trial_seed(cfg.seed, t);
    Rng rng(rec.seed);
    rec.mu = draw_mu(local, rec.trial, rng);
    rec.color_true = color_of(test.family, rec.mu);
    const Verdict v = run_sequential(test, [&] { return sample_one(scheme, rec.mu, rng); });
    rec.color_accepted = v.accepted_color;
    rec.stage = v.stage;
    rec.position = v.position;
    rec.observations = v.observations_used;
    rec.s_star = s_star(rec.mu, test);
    rec.k_s_star = test.stage(rec.s_star).k_s;
    rec.correct = v.accepted_color && *v.accepted_color == rec.color_true;
    rec.wrong = v.accepted_color && *v.accepted_color != rec.color_true;
    rec.late = rec.correct && rec.observations > rec.k_s_star;
  });
  std::int64_t wrong = 0, none = 0, late = 0;
  for (const TrialRecord& r : rep.records) {
    wrong += r.wrong;
    none += !r.color_accepted.has_value();
    late += r.late;
  }
  const double N = static_cast<double>(cfg.trials);
  rep.error_rate = wrong / N;
  rep.no_decision_rate = none / N;
  rep.late_rate = late / N;
  rep.observations = observation_stats(rep.records);
  return rep;
}

ExperimentReport run_experiment(const ExperimentConfig& cfg, int threads) {
  const SequentialTest test = build_sequential(cfg.family, cfg.schedule);
  return run_experiment(cfg, test, threads);
}

// ---------------------------------------------------------------------------
// volumes and profiles

std::vector<VolumeRow> volumes_report(const ExperimentConfig& cfg, int stage) {
  std::vector<VolumeRow> rows;
  for (int n : cfg.volume_dims) {
    const HypothesisFamily f = two_box_family(n, cfg.volume_delta);
    const SchemeKind& scheme = f.scheme;
    const SeparationReport sep = separation(f, cfg.schedule.tol);
    const Schedule sch = compute_schedule(f, cfg.schedule, sep.d);
    if (stage < 1 || stage > sch.S) {
      throw ConfigError("volume stage " + std::to_string(stage) + " outside 1.." +
                        std::to_string(sch.S));
    }
    const double r = sch.r_s[stage - 1];
    const ConvexBody& X1 = f.bodies[0];
    const ConvexBody& X2 = f.bodies[1];
    Rng rng(trial_seed(cfg.seed, static_cast<std::uint64_t>(n)));

    const Cut dc[] = {default_cut(solve_pairwise(scheme, X1, X2, {cfg.schedule.tol}), r)};
    const VolumeEstimate dv = region_volume(X1, dc, rng, cfg.volume_samples);
    rows.push_back({n, "default", r, dv.estimate, dv.stderr_, dv.exact});

    if (r > 0.0) {
      VolumeRow row{n, "smart", r, 0.0, 0.0, true};
      try {
        const SmartCut sc = smart_cut(scheme, X1, OpponentRate(scheme, X2), r, cfg.schedule.tol);
        if (!sc.separating) {
          const Cut c[] = {sc.cut};
          const VolumeEstimate sv = region_volume(X1, c, rng, cfg.volume_samples);
          row.volume = sv.estimate;
          row.stderr_ = sv.stderr_;
          row.exact = sv.exact;
        }
      } catch (const CutInfeasible&) {
        row.policy = "smart-fallback-default";
        row.volume = dv.estimate;
        row.stderr_ = dv.stderr_;
        row.exact = dv.exact;
      }
      rows.push_back(row);
    }
  }
  return rows;
}

std::vector<ProfilePoint> profile_grid(const ExperimentConfig& cfg, const SequentialTest& test,
                                       int resolution) {
  if (resolution < 2) throw InputError("grid resolution must be >= 2");
  const HypothesisFamily& f = test.family;
  if (f.scheme.type != SchemeType::Gaussian) throw Unsupported("profiles need a Gaussian family");
  if (f.scheme.n != 2) throw Unsupported("profiles are drawn over two-dimensional families");
  (void)cfg;
  const SeparationReport sep = separation(f, test.config.tol);
  Vector lo, hi;
  union_bbox(f, lo, hi);
  std::vector<ProfilePoint> pts;
  for (int iy = 0; iy < resolution; ++iy) {
    for (int ix = 0; ix < resolution; ++ix) {
      ProfilePoint p;
      p.x = lo[0] + (hi[0] - lo[0]) * ix / (resolution - 1);
      p.y = lo[1] + (hi[1] - lo[1]) * iy / (resolution - 1);
      Vector mu(2);
      mu << p.x, p.y;
      p.inside = in_union(f, mu);
      if (p.inside) {
        const auto k_of = [&](int s) {
          return static_cast<double>(std::min(test.stage(s).k_s, test.K));
        };
        p.ln_k_sstar = std::log(k_of(s_star(mu, test)));
        p.ln_k_sbar = std::log(k_of(s_bar_gaussian(mu, test, sep)));
      }
      pts.push_back(p);
    }
  }
  return pts;
}

// ---------------------------------------------------------------------------
// calibration

Interval wilson_interval(std::int64_t successes, std::int64_t trials, double z) {
  if (trials < 1) throw InputError("Wilson interval needs at least one trial");
  const double n = static_cast<double>(trials);
  const double p = static_cast<double>(successes) / n;
  const double z2 = z * z;
  const double center = (p + z2 / (2 * n)) / (1 + z2 / n);
  const double half = z * std::sqrt(p * (1 - p) / n + z2 / (4 * n * n)) / (1 + z2 / n);
  return {successes == 0 ? 0.0 : std::max(0.0, center - half),
          successes == trials ? 1.0 : std::min(1.0, center + half)};
}

Calibration calibrate_risk(const ExperimentConfig& cfg, const SequentialTest& test, int threads) {
  if (cfg.trials < 500) throw ConfigError("calibration needs at least 500 trials");
  Calibration cal;
  cal.trials = cfg.trials;
  cal.eps = test.config.eps;
  cal.report = run_experiment(cfg, test, threads);
  std::int64_t wrong = 0, none = 0, late = 0;
  for (const TrialRecord& r : cal.report.records) {
    wrong += r.wrong;
    none += !r.color_accepted.has_value();
    late += r.late;
  }
  const double N = static_cast<double>(cfg.trials);
  cal.wrong_rate = wrong / N;
  cal.no_decision_rate = none / N;
  cal.late_rate = late / N;
  cal.failure_rate = (wrong + late) / N;
  cal.strict_failure_rate = (wrong + late + none) / N;
  cal.wrong_ci = wilson_interval(wrong, cfg.trials);
  cal.no_decision_ci = wilson_interval(none, cfg.trials);
  cal.failure_ci = wilson_interval(wrong + late, cfg.trials);
  cal.strict_failure_ci = wilson_interval(wrong + late + none, cfg.trials);
  cal.violation = cal.failure_ci.lower > cal.eps;
  return cal;
}

Calibration calibrate_risk(const ExperimentConfig& cfg, int threads) {
  const SequentialTest test = build_sequential(cfg.family, cfg.schedule);
  return calibrate_risk(cfg, test, threads);
}

// ---------------------------------------------------------------------------
// output documents

namespace {

std::string num(double x) {
  if (std::isnan(x)) return "nan";
  char buf[40];
  const auto res = std::to_chars(buf, buf + sizeof buf, x);
  return std::string(buf, res.ptr);
}

Json build_metadata(const SequentialTest& test) {
  Json b;
  b["S"] = test.schedule.S;
  b["J"] = test.schedule.J;
  b["d"] = test.d;
  b["K"] = test.K;
  Json stages = Json::array();
  for (const StageComponent& st : test.stages) {
    stages.push_back({{"s", st.s},
                      {"k_s", st.k_s},
                      {"kbar_s", st.kbar_s},
                      {"eps_s", st.eps_s},
                      {"r_s", st.r_s},
                      {"delta_s", st.delta_s},
                      {"cells", st.size()},
                      {"norm", st.norm},
                      {"achieved", st.achieved},
                      {"active", st.active}});
  }
  b["stages"] = stages;
  return b;
}

Json stats_json(const ObservationStats& s) {
  return {{"mean", s.mean}, {"median", s.median}, {"q10", s.q10}, {"q25", s.q25},
          {"q75", s.q75},   {"q90", s.q90},       {"min", s.min}, {"max", s.max}};
}

}  // namespace

std::string report_json(const ExperimentConfig& cfg, const SequentialTest& test,
                        const ExperimentReport& report) {
  Json j;
  j["config"] = Json::parse(config_json(cfg));
  j["build"] = build_metadata(test);
  j["trials"] = report.records.size();
  j["error_rate"] = report.error_rate;
  j["no_decision_rate"] = report.no_decision_rate;
  j["late_rate"] = report.late_rate;
  j["observations"] = stats_json(report.observations);
  return j.dump(1);
}

std::string calibration_json(const ExperimentConfig& cfg, const SequentialTest& test,
                             const Calibration& cal) {
  Json j;
  j["config"] = Json::parse(config_json(cfg));
  j["build"] = build_metadata(test);
  auto ci = [](const Interval& i) { return Json::array({i.lower, i.upper}); };
  j["calibration"] = {{"trials", cal.trials},
                      {"eps", cal.eps},
                      {"wrong_rate", cal.wrong_rate},
                      {"wrong_ci", ci(cal.wrong_ci)},
                      {"no_decision_rate", cal.no_decision_rate},
                      {"no_decision_ci", ci(cal.no_decision_ci)},
                      {"late_rate", cal.late_rate},
                      {"failure_rate", cal.failure_rate},
                      {"failure_ci", ci(cal.failure_ci)},
                      {"strict_failure_rate", cal.strict_failure_rate},
                      {"strict_failure_ci", ci(cal.strict_failure_ci)},
                      {"violation", cal.violation}};
  j["observations"] = stats_json(cal.report.observations);
  return j.dump(1);
}

std::string trials_csv(const std::vector<TrialRecord>& records) {
  std::ostringstream os;
  const int n = records.empty() ? 0 : static_cast<int>(records.front().mu.size());
  os << "trial,seed";
  for (int i = 0; i < n; ++i) os << ",mu" << i + 1;
  os << ",color_true,color_accepted,stage,observations,s_star,correct,late\n";
  for (const TrialRecord& r : records) {
    os << r.trial << ',' << r.seed;
    for (int i = 0; i < n; ++i) os << ',' << num(r.mu[i]);
    os << ',' << r.color_true << ',' << (r.color_accepted ? std::to_string(*r.color_accepted) : "none")
       << ',' << r.stage << ',' << r.observations << ',' << r.s_star << ',' << int(r.correct)
       << ',' << int(r.late) << '\n';
  }
  return os.str();
}

std::string volumes_csv(const std::vector<VolumeRow>& rows) {
  std::ostringstream os;
  os << "n,policy,r,volume,stderr,exact\n";
  for (const VolumeRow& r : rows) {
    os << r.n << ',' << r.policy << ',' << num(r.r) << ',' << num(r.volume) << ','
       << num(r.stderr_) << ',' << int(r.exact) << '\n';
  }
  return os.str();
}

std::string profile_csv(const std::vector<ProfilePoint>& points) {
  std::ostringstream os;
  os << "x,y,ln_k_sstar,ln_k_sbar\n";
  for (const ProfilePoint& p : points) {
    os << num(p.x) << ',' << num(p.y) << ',';
    if (p.inside) os << num(p.ln_k_sstar) << ',' << num(p.ln_k_sbar) << '\n';
    else os << ",\n";
  }
  return os.str();
}

}  // namespace seqtest
