#include "json_io.hpp"
#include "seqtest/sequential.hpp"

namespace seqtest {

using detail::Json;
using detail::to_json;

namespace {

constexpr const char* kFormat = "seqtest.sequential";
constexpr int kVersion = 1;

Json cut_to_json(const Cut& c) { return {{"normal", to_json(c.normal)}, {"offset", c.offset}}; }

Cut cut_from_json(const Json& j) {
  return {detail::vector_from_json(j.at("normal")), j.at("offset").get<double>()};
}

Json stage_to_json(const StageComponent& st) {
  Json out;
  out["s"] = st.s;
  out["eps_s"] = st.eps_s;
  out["r_s"] = st.r_s;
  out["delta_s"] = st.delta_s;
  out["kbar_s"] = st.kbar_s;
  out["k_s"] = st.k_s;
  out["norm"] = st.norm;
  out["achieved"] = st.achieved;
  out["active"] = st.active;
  Json cells = Json::array();
  for (const Cell& c : st.cells) {
    cells.push_back({{"body", detail::body_to_json(c.body)},
                     {"origin", c.origin},
                     {"color", c.color},
                     {"bad_against", c.bad_against}});
  }
  out["cells"] = cells;
  Json cuts = Json::array();
  for (const auto& row : st.cuts) {
    Json r = Json::array();
    for (const Cut& c : row) r.push_back(cut_to_json(c));
    cuts.push_back(r);
  }
  out["cuts"] = cuts;
  Json pairs = Json::array();
  for (const StagePair& p : st.pairs) {
    pairs.push_back({{"q", p.q},
                     {"q2", p.q2},
                     {"mu_star", to_json(p.mu_star)},
                     {"nu_star", to_json(p.nu_star)},
                     {"opt", p.opt},
                     {"a", to_json(p.affine.a)},
                     {"b", p.affine.b}});
  }
  out["pairs"] = pairs;
  out["risks"] = to_json(st.risks);
  out["closeness"] = to_json(st.closeness);
  out["shifts"] = to_json(st.shifts);
  return out;
}

StageComponent stage_from_json(const Json& j) {
  StageComponent st;
  st.s = j.at("s").get<int>();
  st.eps_s = j.at("eps_s").get<double>();
  st.r_s = j.at("r_s").get<double>();
  st.delta_s = j.at("delta_s").get<double>();
  st.kbar_s = j.at("kbar_s").get<std::int64_t>();
  st.k_s = j.at("k_s").get<std::int64_t>();
  st.norm = j.at("norm").get<double>();
  st.achieved = j.at("achieved").get<double>();
  st.active = j.at("active").get<bool>();
  for (const Json& c : j.at("cells")) {
    st.cells.push_back({detail::body_from_json(c.at("body")), c.at("origin").get<int>(),
                        c.at("color").get<int>(), c.at("bad_against").get<int>()});
  }
  for (const Json& row : j.at("cuts")) {
    std::vector<Cut> r;
    for (const Json& c : row) r.push_back(cut_from_json(c));
    st.cuts.push_back(std::move(r));
  }
  for (const Json& p : j.at("pairs")) {
    StagePair sp;
    sp.q = p.at("q").get<int>();
    sp.q2 = p.at("q2").get<int>();
    sp.mu_star = detail::vector_from_json(p.at("mu_star"));
    sp.nu_star = detail::vector_from_json(p.at("nu_star"));
    sp.opt = p.at("opt").get<double>();
    sp.affine = {detail::vector_from_json(p.at("a")), p.at("b").get<double>()};
    st.pairs.push_back(std::move(sp));
  }
  st.risks = detail::matrix_from_json(j.at("risks"));
  st.closeness = detail::matrix_from_json(j.at("closeness"));
  st.shifts = detail::matrix_from_json(j.at("shifts"));
  return st;
}

}  // namespace

std::string serialize(const SequentialTest& test) {
  Json out;
  out["format"] = kFormat;
  out["version"] = kVersion;
  out["scheme"] = {{"kind", to_string(test.family.scheme.type)}, {"n", test.family.scheme.n}};
  Json bodies = Json::array();
  for (const ConvexBody& b : test.family.bodies) bodies.push_back(detail::body_to_json(b));
  out["bodies"] = bodies;
  out["colors"] = test.family.colors;

  const ScheduleConfig& cfg = test.config;
  Json c;
  c["eps"] = cfg.eps;
  c["kbar"] = cfg.kbar;
  c["cut_policy"] = to_string(cfg.cut_policy);
  c["S"] = cfg.S ? Json(*cfg.S) : Json(nullptr);
  Json r = Json::object();
  for (const auto& [s, v] : cfg.r_override) r[std::to_string(s)] = v;
  c["r_override"] = r;
  c["tol"] = cfg.tol;
  out["config"] = c;

  const Schedule& sch = test.schedule;
  out["schedule"] = {{"S", sch.S},       {"J", sch.J},         {"kbar", sch.kbar},
                     {"eps_s", sch.eps_s}, {"r_s", sch.r_s},   {"delta_s", sch.delta_s}};
  out["d"] = test.d;
  out["K"] = test.K;
  out["order"] = test.order;
  Json stages = Json::array();
  for (const StageComponent& st : test.stages) stages.push_back(stage_to_json(st));
  out["stages"] = stages;
  return out.dump(1);
}

SequentialTest deserialize(const std::string& text) {
  Json j;
  try {
    j = Json::parse(text);
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError(std::string("not a JSON document: ") + e.what());
  }
  try {
    if (j.value("format", "") != kFormat) throw ConfigError("not a serialized sequential test");
    if (j.value("version", 0) != kVersion) {
      throw ConfigError("unsupported sequential test version " + j.at("version").dump());
    }
    SequentialTest t;
    t.family.scheme = {scheme_type_from_string(j.at("scheme").at("kind").get<std::string>()),
                       j.at("scheme").at("n").get<int>()};
    for (const Json& b : j.at("bodies")) t.family.bodies.push_back(detail::body_from_json(b));
    t.family.colors = j.at("colors").get<std::vector<int>>();

    const Json& c = j.at("config");
    t.config.eps = c.at("eps").get<double>();
    t.config.kbar = c.at("kbar").get<std::vector<std::int64_t>>();
    t.config.cut_policy = cut_policy_from_string(c.at("cut_policy").get<std::string>());
    if (!c.at("S").is_null()) t.config.S = c.at("S").get<int>();
    for (const auto& [k, v] : c.at("r_override").items()) {
      t.config.r_override[std::stoi(k)] = v.get<double>();
    }
    t.config.tol = c.at("tol").get<double>();

    const Json& s = j.at("schedule");
    t.schedule.S = s.at("S").get<int>();
    t.schedule.J = s.at("J").get<std::int64_t>();
    t.schedule.kbar = s.at("kbar").get<std::vector<std::int64_t>>();
    t.schedule.eps_s = s.at("eps_s").get<std::vector<double>>();
    t.schedule.r_s = s.at("r_s").get<std::vector<double>>();
    t.schedule.delta_s = s.at("delta_s").get<std::vector<double>>();
    t.d = j.at("d").get<double>();
    t.K = j.at("K").get<std::int64_t>();
    t.order = j.at("order").get<std::vector<int>>();
    for (const Json& st : j.at("stages")) t.stages.push_back(stage_from_json(st));
    return t;
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError(std::string("malformed sequential test document: ") + e.what());
  } catch (const InputError& e) {
    throw ConfigError(std::string("invalid sequential test document: ") + e.what());
  }
}

}  // namespace seqtest
