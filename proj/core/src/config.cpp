#include "dpcm/config.hpp"

#include <cmath>
#include <fstream>
#include <set>
#include <sstream>
#include <stdexcept>

#include <json.hpp>

namespace dpcm {

namespace {

using nlohmann::json;

[[noreturn]] void fail(const std::string& origin, const std::string& what) {
  throw std::invalid_argument(origin + ": " + what);
}

void check_keys(const json& obj, const std::string& origin,
                const std::string& section, const std::set<std::string>& allowed) {
  if (!obj.is_object()) fail(origin, section + " must be an object");
  for (const auto& item : obj.items()) {
    if (!allowed.count(item.key())) {
      fail(origin, "unknown key \"" + item.key() + "\" in " + section);
    }
  }
}

double get_num(const json& obj, const std::string& origin,
               const std::string& section, const std::string& key, double dflt) {
  if (!obj.contains(key)) return dflt;
  const json& v = obj.at(key);
  if (!v.is_number()) fail(origin, section + "." + key + " must be a number");
  return v.get<double>();
}

int get_int(const json& obj, const std::string& origin,
            const std::string& section, const std::string& key, int dflt) {
  if (!obj.contains(key)) return dflt;
  const json& v = obj.at(key);
  if (!v.is_number_integer()) {
    fail(origin, section + "." + key + " must be an integer");
  }
  return v.get<int>();
}

FluxScheme parse_scheme(const std::string& s, const std::string& origin,
                        const std::string& key) {
  if (s == "sg" || s == "scharfetter_gummel") {
    return FluxScheme::scharfetter_gummel;
  }
  if (s == "sqra") return FluxScheme::sqra_geometric;
  if (s == "centered") return FluxScheme::centered;
  fail(origin, key + " must be one of sg, sqra, centered; got \"" + s + "\"");
}

std::string scheme_name(FluxScheme s) {
  switch (s) {
    case FluxScheme::scharfetter_gummel:
      return "sg";
    case FluxScheme::sqra_geometric:
      return "sqra";
    case FluxScheme::centered:
      return "centered";
  }
  return "sg";
}

}  // namespace

std::vector<double> RunConfig::sweep_grid() const {
  std::vector<double> grid;
  grid.reserve(sweep_points);
  if (sweep_points == 1) {
    grid.push_back(sweep_v_min);
    return grid;
  }
  for (int p = 0; p < sweep_points; ++p) {
    grid.push_back(sweep_v_min + (sweep_v_max - sweep_v_min) * p /
                                     (sweep_points - 1));
  }
  return grid;
}

void RunConfig::validate() const {
  raw.validate();
  spec.validate();
  solver.validate();
  if (n_cells < 2) throw std::invalid_argument("mesh.n_cells must be >= 2");
  if (!(t_end > 0.0)) throw std::invalid_argument("run.t_end must be positive");
  if (snapshot_stride < 0) {
    throw std::invalid_argument("run.snapshot_stride must be nonnegative");
  }
  for (double t : snapshot_times) {
    if (!(t >= 0.0)) {
      throw std::invalid_argument("run.snapshot_times must be nonnegative");
    }
  }
  if (!(u1_init > 0.0 && u1_init < spec.ubar1)) {
    throw std::invalid_argument(
        "initial.u1 violates admissibility: need 0 < u1 < ubar1 = " +
        std::to_string(spec.ubar1));
  }
  if (!(u2_init > 0.0)) {
    throw std::invalid_argument(
        "initial.u2 violates admissibility: need u2 > 0");
  }
  if (sweep_points < 1) {
    throw std::invalid_argument("sweep.n_points must be at least 1");
  }
  if (sweep_points > 1 && !(sweep_v_max > sweep_v_min)) {
    throw std::invalid_argument("sweep.v_max must exceed sweep.v_min");
  }
  if (!(sweep_t_max > 0.0)) {
    throw std::invalid_argument("sweep.t_max must be positive");
  }
  if (output_dir.empty()) {
    throw std::invalid_argument("output_dir must not be empty");
  }
}

RunConfig parse_config_text(const std::string& text, const std::string& origin) {
  json doc;
  try {
    doc = json::parse(text);
  } catch (const json::parse_error& e) {
    fail(origin, std::string("parse error: ") + e.what());
  }
  check_keys(doc, origin, "document",
             {"model", "mesh", "solver", "run", "initial", "sweep",
              "output_dir"});

  RunConfig cfg;

  if (doc.contains("model")) {
    const json& m = doc.at("model");
    check_keys(m, origin, "model",
               {"lambda2", "alpha0", "alpha1", "dpsi_pzc0", "dpsi_pzc1", "V",
                "rho_hl", "z1", "z2", "d1", "d2", "ubar1", "ubar2",
                "ubar2_met", "variant", "kinetics"});
    ModelSpec& s = cfg.spec;
    s.lambda2 = get_num(m, origin, "model", "lambda2", 0.5);
    s.alpha0 = get_num(m, origin, "model", "alpha0", 1.0);
    s.alpha1 = get_num(m, origin, "model", "alpha1", 1.0);
    s.dpsi_pzc0 = get_num(m, origin, "model", "dpsi_pzc0", 0.1);
    s.dpsi_pzc1 = get_num(m, origin, "model", "dpsi_pzc1", 0.2);
    s.V = get_num(m, origin, "model", "V", 0.3);
    s.rho_hl = get_num(m, origin, "model", "rho_hl", -5.0);
    s.z1 = get_int(m, origin, "model", "z1", 3);
    s.z2 = get_int(m, origin, "model", "z2", -1);
    s.d1 = get_num(m, origin, "model", "d1", 1.0);
    s.d2 = get_num(m, origin, "model", "d2", 10.0);
    s.ubar1 = get_num(m, origin, "model", "ubar1", 4.0);
    s.ubar2 = get_num(m, origin, "model", "ubar2", 1.0);
    s.ubar2_met = get_num(m, origin, "model", "ubar2_met", 1.0);
    if (m.contains("variant")) {
      const std::string v = m.at("variant").get<std::string>();
      if (v == "vdpcm") {
        s.variant = Variant::vdpcm;
      } else if (v == "legacy") {
        s.variant = Variant::legacy;
      } else {
        fail(origin, "model.variant must be vdpcm or legacy, got \"" + v + "\"");
      }
    }
    if (m.contains("kinetics")) {
      const json& kk = m.at("kinetics");
      check_keys(kk, origin, "model.kinetics",
                 {"k10", "m10", "k11", "m11", "k20", "m20", "k21", "m21"});
      auto g = [&](const char* key, double dflt) {
        return get_num(kk, origin, "model.kinetics", key, dflt);
      };
      cfg.raw.k[0][0] = g("k10", 0.4);
      cfg.raw.m[0][0] = g("m10", 0.6);
      cfg.raw.k[0][1] = g("k11", 0.5);
      cfg.raw.m[0][1] = g("m11", 0.5);
      cfg.raw.k[1][0] = g("k20", 0.8);
      cfg.raw.m[1][0] = g("m20", 0.4);
      cfg.raw.k[1][1] = g("k21", 0.6);
      cfg.raw.m[1][1] = g("m21", 0.6);
    }
  } else {
    // defaults of the shipped parameter set
    cfg.spec.lambda2 = 0.5;
    cfg.spec.dpsi_pzc0 = 0.1;
    cfg.spec.dpsi_pzc1 = 0.2;
    cfg.spec.V = 0.3;
    cfg.spec.d2 = 10.0;
    cfg.spec.ubar1 = 4.0;
  }
  if (!doc.contains("model") || !doc.at("model").contains("kinetics")) {
    cfg.raw.k[0][0] = 0.4;
    cfg.raw.m[0][0] = 0.6;
    cfg.raw.k[0][1] = 0.5;
    cfg.raw.m[0][1] = 0.5;
    cfg.raw.k[1][0] = 0.8;
    cfg.raw.m[1][0] = 0.4;
    cfg.raw.k[1][1] = 0.6;
    cfg.raw.m[1][1] = 0.6;
  }
  cfg.spec.kin = derive_scaled_kinetics(cfg.raw, cfg.spec.V, cfg.spec.z1,
                                        cfg.spec.z2, cfg.spec.ubar2);

  if (doc.contains("mesh")) {
    const json& m = doc.at("mesh");
    check_keys(m, origin, "mesh", {"n_cells"});
    cfg.n_cells = get_int(m, origin, "mesh", "n_cells", 100);
  }

  if (doc.contains("solver")) {
    const json& sv = doc.at("solver");
    check_keys(sv, origin, "solver",
               {"dt", "newton_tol", "newton_max_iter", "max_backtracks",
                "max_dt_halvings", "recovery_streak", "steady_tol", "trunc_M",
                "reg_mu", "cation_scheme", "electron_scheme", "full_implicit"});
    SolverConfig& c = cfg.solver;
    c.dt = get_num(sv, origin, "solver", "dt", c.dt);
    c.newton_tol = get_num(sv, origin, "solver", "newton_tol", c.newton_tol);
    c.newton_max_iter =
        get_int(sv, origin, "solver", "newton_max_iter", c.newton_max_iter);
    c.max_backtracks =
        get_int(sv, origin, "solver", "max_backtracks", c.max_backtracks);
    c.max_dt_halvings =
        get_int(sv, origin, "solver", "max_dt_halvings", c.max_dt_halvings);
    c.recovery_streak =
        get_int(sv, origin, "solver", "recovery_streak", c.recovery_streak);
    c.steady_tol = get_num(sv, origin, "solver", "steady_tol", c.steady_tol);
    if (sv.contains("trunc_M") && !sv.at("trunc_M").is_null()) {
      c.trunc_M = get_num(sv, origin, "solver", "trunc_M", 0.0);
    }
    if (sv.contains("reg_mu") && !sv.at("reg_mu").is_null()) {
      c.reg_mu = get_num(sv, origin, "solver", "reg_mu", 0.0);
    }
    if (sv.contains("cation_scheme")) {
      c.schemes.cation = parse_scheme(sv.at("cation_scheme").get<std::string>(),
                                      origin, "solver.cation_scheme");
    }
    if (sv.contains("electron_scheme")) {
      c.schemes.electron =
          parse_scheme(sv.at("electron_scheme").get<std::string>(), origin,
                       "solver.electron_scheme");
    }
    if (sv.contains("full_implicit")) {
      c.full_implicit = sv.at("full_implicit").get<bool>();
    }
  }

  if (doc.contains("run")) {
    const json& r = doc.at("run");
    check_keys(r, origin, "run", {"t_end", "snapshot_times", "snapshot_stride"});
    cfg.t_end = get_num(r, origin, "run", "t_end", cfg.t_end);
    if (r.contains("snapshot_times")) {
      cfg.snapshot_times.clear();
      for (const json& t : r.at("snapshot_times")) {
        if (!t.is_number()) {
          fail(origin, "run.snapshot_times entries must be numbers");
        }
        cfg.snapshot_times.push_back(t.get<double>());
      }
    }
    cfg.snapshot_stride =
        get_int(r, origin, "run", "snapshot_stride", cfg.snapshot_stride);
  }

  if (doc.contains("initial")) {
    const json& in = doc.at("initial");
    check_keys(in, origin, "initial", {"u1", "u2"});
    cfg.u1_init = get_num(in, origin, "initial", "u1", cfg.u1_init);
    cfg.u2_init = get_num(in, origin, "initial", "u2", cfg.u2_init);
  }

  if (doc.contains("sweep")) {
    const json& sw = doc.at("sweep");
    check_keys(sw, origin, "sweep", {"v_min", "v_max", "n_points", "t_max"});
    cfg.sweep_v_min = get_num(sw, origin, "sweep", "v_min", cfg.sweep_v_min);
    cfg.sweep_v_max = get_num(sw, origin, "sweep", "v_max", cfg.sweep_v_max);
    cfg.sweep_points = get_int(sw, origin, "sweep", "n_points", cfg.sweep_points);
    cfg.sweep_t_max = get_num(sw, origin, "sweep", "t_max", cfg.sweep_t_max);
  }

  if (doc.contains("output_dir")) {
    cfg.output_dir = doc.at("output_dir").get<std::string>();
  }

  try {
    cfg.validate();
  } catch (const std::invalid_argument& e) {
    fail(origin, e.what());
  }
  return cfg;
}

RunConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) {
    throw std::invalid_argument("cannot open config file: " + path);
  }
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse_config_text(buf.str(), path);
}

std::string dump_config(const RunConfig& cfg) {
  json doc;
  json& m = doc["model"];
  m["lambda2"] = cfg.spec.lambda2;
  m["alpha0"] = cfg.spec.alpha0;
  m["alpha1"] = cfg.spec.alpha1;
  m["dpsi_pzc0"] = cfg.spec.dpsi_pzc0;
  m["dpsi_pzc1"] = cfg.spec.dpsi_pzc1;
  m["V"] = cfg.spec.V;
  m["rho_hl"] = cfg.spec.rho_hl;
  m["z1"] = cfg.spec.z1;
  m["z2"] = cfg.spec.z2;
  m["d1"] = cfg.spec.d1;
  m["d2"] = cfg.spec.d2;
  m["ubar1"] = cfg.spec.ubar1;
  m["ubar2"] = cfg.spec.ubar2;
  m["ubar2_met"] = cfg.spec.ubar2_met;
  m["variant"] = cfg.spec.variant == Variant::vdpcm ? "vdpcm" : "legacy";
  json& kk = m["kinetics"];
  kk["k10"] = cfg.raw.k[0][0];
  kk["m10"] = cfg.raw.m[0][0];
  kk["k11"] = cfg.raw.k[0][1];
  kk["m11"] = cfg.raw.m[0][1];
  kk["k20"] = cfg.raw.k[1][0];
  kk["m20"] = cfg.raw.m[1][0];
  kk["k21"] = cfg.raw.k[1][1];
  kk["m21"] = cfg.raw.m[1][1];

  doc["mesh"]["n_cells"] = cfg.n_cells;

  json& sv = doc["solver"];
  sv["dt"] = cfg.solver.dt;
  sv["newton_tol"] = cfg.solver.newton_tol;
  sv["newton_max_iter"] = cfg.solver.newton_max_iter;
  sv["max_backtracks"] = cfg.solver.max_backtracks;
  sv["max_dt_halvings"] = cfg.solver.max_dt_halvings;
  sv["recovery_streak"] = cfg.solver.recovery_streak;
  sv["steady_tol"] = cfg.solver.steady_tol;
  if (cfg.solver.trunc_M) sv["trunc_M"] = *cfg.solver.trunc_M;
  if (cfg.solver.reg_mu) sv["reg_mu"] = *cfg.solver.reg_mu;
  sv["cation_scheme"] = scheme_name(cfg.solver.schemes.cation);
  sv["electron_scheme"] = scheme_name(cfg.solver.schemes.electron);
  sv["full_implicit"] = cfg.solver.full_implicit;

  json& r = doc["run"];
  r["t_end"] = cfg.t_end;
  r["snapshot_times"] = cfg.snapshot_times;
  r["snapshot_stride"] = cfg.snapshot_stride;

  doc["initial"]["u1"] = cfg.u1_init;
  doc["initial"]["u2"] = cfg.u2_init;

  json& sw = doc["sweep"];
  sw["v_min"] = cfg.sweep_v_min;
  sw["v_max"] = cfg.sweep_v_max;
  sw["n_points"] = cfg.sweep_points;
  sw["t_max"] = cfg.sweep_t_max;

  doc["output_dir"] = cfg.output_dir;
  return doc.dump(2) + "\n";
}

}  // namespace dpcm
