#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "dpcm/config.hpp"
#include "dpcm/csv.hpp"
#include "dpcm/experiments.hpp"
#include "dpcm/svg.hpp"

namespace fs = std::filesystem;
using namespace dpcm;

namespace {

struct CliOptions {
  std::string config_path;
  std::string out_dir;
  std::optional<int> mesh;
  std::optional<double> dt;
  std::optional<double> t_end;
  std::optional<std::string> variant;
  std::optional<long> seed;  // accepted for interface parity; runs are deterministic
  int jobs = 1;
};

RunConfig effective_config(const CliOptions& opt) {
  RunConfig cfg = opt.config_path.empty() ? parse_config_text("{}", "<defaults>")
                                          : load_config(opt.config_path);
  if (opt.mesh) cfg.n_cells = *opt.mesh;
  if (opt.dt) cfg.solver.dt = *opt.dt;
  if (opt.t_end) cfg.t_end = *opt.t_end;
  if (opt.variant) {
    if (*opt.variant == "vdpcm") {
      cfg.spec.variant = Variant::vdpcm;
    } else if (*opt.variant == "legacy") {
      cfg.spec.variant = Variant::legacy;
    } else {
      throw std::invalid_argument("--variant must be vdpcm or legacy");
    }
  }
  if (!opt.out_dir.empty()) {
    cfg.output_dir = opt.out_dir;
  } else if (const char* env = std::getenv("DPCM_OUT_DIR")) {
    if (opt.config_path.empty() || cfg.output_dir == "out") cfg.output_dir = env;
  }
  cfg.validate();
  return cfg;
}

std::string time_tag(double t) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%g", t);
  return buf;
}

CsvTable snapshot_table(const State& s, const Mesh& mesh) {
  CsvTable t;
  t.columns = {"x", "u1", "u2", "u0", "v0", "v1", "v2", "xi1", "xi2"};
  for (int k = 0; k < mesh.n_cells; ++k) {
    t.rows.push_back({mesh.center(k), s.u1[k], s.u2[k], s.u0[k], s.v0[k],
                      s.v1[k], s.v2[k], s.xi1[k], s.xi2[k]});
  }
  return t;
}

CsvTable ledger_table(const EnergyLedger& led) {
  CsvTable t;
  t.columns = {"t",       "phi",       "psi",       "psi_g0",
               "psi_g1",  "psi_tot",   "diss_bulk", "diss_boundary"};
  for (std::size_t j = 0; j < led.size(); ++j) {
    t.rows.push_back({led.times[j], led.phi[j], led.psi[j], led.psi_gamma0[j],
                      led.psi_gamma1[j], led.psi_tot[j], led.diss_bulk[j],
                      led.diss_boundary[j]});
  }
  return t;
}

CsvTable iv_table(const SweepResult& sweep) {
  CsvTable t;
  t.columns = {"V", "current", "t_steady", "converged"};
  for (const auto& p : sweep.points) {
    t.rows.push_back({p.V, p.current, p.t_steady, p.converged ? 1.0 : 0.0});
  }
  return t;
}

void plot_iv(const SweepResult& sweep, const std::string& label,
             const fs::path& path) {
  PlotSeries s;
  s.label = label;
  for (const auto& p : sweep.points) {
    if (!p.converged) continue;  // flagged points excluded by default
    s.x.push_back(p.V);
    s.y.push_back(p.current);
  }
  if (s.x.empty()) return;  // nothing converged; CSV still records everything
  emit_svg_plot({s}, "Steady total current vs applied potential",
                "applied potential V", "total current", path.string());
}

void plot_profiles(const State& s, const Mesh& mesh, const std::string& title,
                   const fs::path& path) {
  PlotSeries u1{"u1", {}, {}}, u2{"u2", {}, {}}, v0{"v0", {}, {}};
  for (int k = 0; k < mesh.n_cells; ++k) {
    const double x = mesh.center(k);
    u1.x.push_back(x);
    u1.y.push_back(s.u1[k]);
    u2.x.push_back(x);
    u2.y.push_back(s.u2[k]);
    v0.x.push_back(x);
    v0.y.push_back(s.v0[k]);
  }
  emit_svg_plot({u1, u2, v0}, title, "x", "profile", path.string());
}

// Advances through snapshot times <= t_end, writing a profile CSV per
// snapshot, then on to t_end. Returns the failure message, empty on success.
std::string run_with_outputs(const RunConfig& cfg, const fs::path& out,
                             EnergyLedger& ledger, State& final_state) {
  const Mesh mesh(cfg.n_cells);
  const Field u1_in(cfg.n_cells, cfg.u1_init);
  const Field u2_in(cfg.n_cells, cfg.u2_init);
  State s = initial_state(u1_in, u2_in, cfg.spec, mesh);

  std::vector<double> times;
  for (double t : cfg.snapshot_times) {
    if (t > 0.0 && t <= cfg.t_end) times.push_back(t);
  }
  std::sort(times.begin(), times.end());
  times.push_back(cfg.t_end);

  for (double t : times) {
    if (t > s.time) {
      AdvanceResult res = advance(std::move(s), cfg.spec, mesh, cfg.solver, t,
                                  &ledger);
      s = std::move(res.state);
      if (!res.completed) {
        final_state = std::move(s);
        return res.error;
      }
    }
    const std::string tag = t == cfg.t_end ? "final" : time_tag(t);
    write_csv(snapshot_table(s, mesh), (out / ("profiles_" + tag + ".csv")).string());
  }
  final_state = std::move(s);
  return "";
}

int cmd_run(const CliOptions& opt) {
  const RunConfig cfg = effective_config(opt);
  const fs::path out(cfg.output_dir);
  fs::create_directories(out);

  EnergyLedger ledger;
  State final_state;
  const std::string err = run_with_outputs(cfg, out, ledger, final_state);
  write_csv(ledger_table(ledger), (out / "ledger.csv").string());
  if (!err.empty()) {
    std::cerr << "simulation failed: " << err << "\n";
    return 2;
  }
  const Mesh mesh(cfg.n_cells);
  plot_profiles(final_state, mesh, "Final profiles", out / "profiles_final.svg");
  PlotSeries e{"psi_tot", ledger.times, ledger.psi_tot};
  emit_svg_plot({e}, "Total free energy", "t", "psi_tot",
                (out / "energy.svg").string());
  std::cout << "run complete: t = " << final_state.time << ", outputs in "
            << out.string() << "\n";
  return 0;
}

int cmd_sweep(const CliOptions& opt) {
  const RunConfig cfg = effective_config(opt);
  const fs::path out(cfg.output_dir);
  fs::create_directories(out);

  const Mesh mesh(cfg.n_cells);
  const Field u1_in(cfg.n_cells, cfg.u1_init);
  const Field u2_in(cfg.n_cells, cfg.u2_init);
  const SweepResult sweep =
      potential_sweep(cfg.sweep_grid(), cfg.spec, mesh, cfg.solver, u1_in,
                      u2_in, cfg.sweep_t_max, opt.jobs);
  write_csv(iv_table(sweep), (out / "iv_curve.csv").string());
  plot_iv(sweep, cfg.spec.variant == Variant::vdpcm ? "vdpcm" : "legacy",
          out / "iv_curve.svg");

  int failures = 0;
  for (const auto& p : sweep.points) {
    if (!p.error.empty()) {
      std::cerr << "sweep point V = " << p.V << " failed: " << p.error << "\n";
      ++failures;
    }
  }
  if (failures == static_cast<int>(sweep.points.size())) {
    std::cerr << "all sweep points failed\n";
    return 2;
  }
  std::cout << "sweep complete: " << sweep.points.size() - failures << "/"
            << sweep.points.size() << " points converged, outputs in "
            << out.string() << "\n";
  return 0;
}

int cmd_compare(const CliOptions& opt) {
  const RunConfig cfg = effective_config(opt);
  const fs::path out(cfg.output_dir);
  fs::create_directories(out);

  ModelSpec spec_v = cfg.spec;
  spec_v.variant = Variant::vdpcm;
  ModelSpec spec_l = cfg.spec;
  spec_l.variant = Variant::legacy;

  const Mesh mesh(cfg.n_cells);
  const Field u1_in(cfg.n_cells, cfg.u1_init);
  const Field u2_in(cfg.n_cells, cfg.u2_init);
  std::vector<double> times;
  for (double t : cfg.snapshot_times) {
    if (t <= cfg.t_end) times.push_back(t);
  }
  times.push_back(cfg.t_end);

  const ComparisonBundle bundle =
      compare_models(spec_v, spec_l, mesh, cfg.solver, u1_in, u2_in, times,
                     cfg.sweep_grid(), cfg.sweep_t_max, opt.jobs);

  nlohmann::json report;
  report["vdpcm_completed"] = bundle.a_completed;
  report["legacy_completed"] = bundle.b_completed;
  if (!bundle.error_a.empty()) report["vdpcm_error"] = bundle.error_a;
  if (!bundle.error_b.empty()) report["legacy_error"] = bundle.error_b;
  report["snapshots"] = nlohmann::json::array();
  for (const auto& snap : bundle.snapshots) {
    const std::string tag = time_tag(snap.time);
    write_csv(snapshot_table(snap.a, mesh),
              (out / ("profiles_" + tag + "_vdpcm.csv")).string());
    write_csv(snapshot_table(snap.b, mesh),
              (out / ("profiles_" + tag + "_legacy.csv")).string());
    nlohmann::json j;
    j["t"] = snap.time;
    j["linf_u1"] = snap.linf_u1;
    j["l2_u1"] = snap.l2_u1;
    j["linf_u2"] = snap.linf_u2;
    j["l2_u2"] = snap.l2_u2;
    j["linf_v0"] = snap.linf_v0;
    j["l2_v0"] = snap.l2_v0;
    report["snapshots"].push_back(j);
  }
  write_csv(iv_table(bundle.iv_a), (out / "iv_vdpcm.csv").string());
  write_csv(iv_table(bundle.iv_b), (out / "iv_legacy.csv").string());
  {
    PlotSeries a{"vdpcm", {}, {}}, b{"legacy", {}, {}};
    for (const auto& p : bundle.iv_a.points) {
      if (!p.converged) continue;
      a.x.push_back(p.V);
      a.y.push_back(p.current);
    }
    for (const auto& p : bundle.iv_b.points) {
      if (!p.converged) continue;
      b.x.push_back(p.V);
      b.y.push_back(p.current);
    }
    if (!a.x.empty() || !b.x.empty()) {
      emit_svg_plot({a, b}, "IV curves, both variants", "applied potential V",
                    "total current", (out / "iv_compare.svg").string());
    }
  }
  std::ofstream rf(out / "comparison_report.json", std::ios::binary);
  rf << report.dump(2) << "\n";

  if (!bundle.a_completed || !bundle.b_completed) {
    std::cerr << "comparison incomplete: vdpcm " << bundle.error_a
              << " / legacy " << bundle.error_b << "\n";
    return 2;
  }
  std::cout << "comparison complete, outputs in " << out.string() << "\n";
  return 0;
}

int cmd_check_energy(const CliOptions& opt) {
  RunConfig cfg = effective_config(opt);
  cfg.spec.variant = Variant::vdpcm;
  const fs::path out(cfg.output_dir);
  fs::create_directories(out);

  EnergyLedger ledger;
  State final_state;
  const std::string err = run_with_outputs(cfg, out, ledger, final_state);
  write_csv(ledger_table(ledger), (out / "ledger.csv").string());
  if (!err.empty()) {
    // decay violations abort advance with a diagnostic naming the rise
    if (err.find("free-energy decay violated") != std::string::npos) {
      std::cerr << err << "\n";
      return 3;
    }
    std::cerr << "simulation failed: " << err << "\n";
    return 2;
  }
  const double slack = 10.0 * cfg.solver.newton_tol;
  for (std::size_t j = 1; j < ledger.size(); ++j) {
    if (ledger.psi_tot[j] > ledger.psi_tot[j - 1] + slack) {
      std::cerr << "energy decay violated at t = " << ledger.times[j] << ": "
                << ledger.psi_tot[j] - ledger.psi_tot[j - 1] << " rise\n";
      return 3;
    }
    if (ledger.diss_bulk[j] < -slack || ledger.diss_boundary[j] < -slack) {
      std::cerr << "negative dissipation at t = " << ledger.times[j] << "\n";
      return 3;
    }
  }
  std::cout << "energy ledger verified over " << ledger.size()
            << " rows; psi_tot nonincreasing\n";
  return 0;
}

int cmd_validate_config(const CliOptions& opt) {
  const RunConfig cfg = effective_config(opt);
  std::cout << "config valid: " << cfg.n_cells << " cells, t_end = "
            << cfg.t_end << ", variant "
            << (cfg.spec.variant == Variant::vdpcm ? "vdpcm" : "legacy")
            << "\n";
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Finite-volume corrosion-layer simulator"};
  app.require_subcommand(1);
  app.fallthrough();  // global flags may follow the subcommand

  CliOptions opt;
  app.add_option("--config", opt.config_path, "Config file (JSON)");
  app.add_option("--out", opt.out_dir, "Output directory");
  app.add_option("--mesh", opt.mesh, "Number of mesh cells")
      ->check(CLI::Range(2, 1000000));
  app.add_option("--dt", opt.dt, "Time step");
  app.add_option("--t-end", opt.t_end, "Final time");
  app.add_option("--variant", opt.variant, "Model variant (vdpcm|legacy)");
  app.add_option("--seed", opt.seed, "Ignored; runs are deterministic");
  app.add_option("--jobs", opt.jobs, "Parallel sweep workers")
      ->check(CLI::Range(1, 1024));

  auto* c_run = app.add_subcommand("run", "Single simulation to t_end");
  auto* c_sweep = app.add_subcommand("sweep", "IV curve over applied potentials");
  auto* c_compare = app.add_subcommand("compare", "vdpcm vs legacy comparison");
  auto* c_check = app.add_subcommand("check-energy", "Run and verify the ledger");
  auto* c_validate = app.add_subcommand("validate-config", "Validate the config");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e) == 0 ? 0 : 1;
  }

  try {
    if (c_run->parsed()) return cmd_run(opt);
    if (c_sweep->parsed()) return cmd_sweep(opt);
    if (c_compare->parsed()) return cmd_compare(opt);
    if (c_check->parsed()) return cmd_check_energy(opt);
    if (c_validate->parsed()) return cmd_validate_config(opt);
  } catch (const std::invalid_argument& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  }
  return 1;
}
