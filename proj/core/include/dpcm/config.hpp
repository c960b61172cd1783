#ifndef DPCM_CONFIG_HPP
#define DPCM_CONFIG_HPP

#include <string>
#include <vector>

#include "dpcm/physics.hpp"
#include "dpcm/stepper.hpp"

namespace dpcm {

/// Everything a run needs, loaded from a JSON file. The ModelSpec is fully
/// derived (scaled kinetics included) and validated; raw rate constants are
/// kept for round-tripping.
struct RunConfig {
  RawKinetics raw;
  ModelSpec spec;
  int n_cells = 100;
  SolverConfig solver;

  double t_end = 20.0;
  std::vector<double> snapshot_times{18.0, 1510.0};
  int snapshot_stride = 0;  // ledger rows per snapshot row; 0 = final only

  double u1_init = 2.0;
  double u2_init = 1.0;

  double sweep_v_min = -0.2;
  double sweep_v_max = 0.8;
  int sweep_points = 11;
  double sweep_t_max = 50.0;

  std::string output_dir = "out";

  std::vector<double> sweep_grid() const;

  /// Cross-field checks beyond ModelSpec/SolverConfig validation (mesh size,
  /// H5 admissibility of the initial data, sweep grid, time horizon).
  void validate() const;
};

/// Parses and validates a config from JSON text. `origin` names the source in
/// diagnostics. Unknown keys anywhere in the document are errors.
RunConfig parse_config_text(const std::string& text, const std::string& origin);

/// Reads the file and delegates to parse_config_text.
RunConfig load_config(const std::string& path);

/// Serializes back to the JSON schema accepted by parse_config_text;
/// dump-then-load reproduces an equivalent config.
std::string dump_config(const RunConfig& cfg);

}  // namespace dpcm

#endif
