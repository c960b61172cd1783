#ifndef DPCM_EXPERIMENTS_HPP
#define DPCM_EXPERIMENTS_HPP

#include <string>
#include <vector>

#include "dpcm/mesh.hpp"
#include "dpcm/physics.hpp"
#include "dpcm/state.hpp"
#include "dpcm/stepper.hpp"

namespace dpcm {

/// Total current z1 J1 + z2 J2 sampled on every face (boundary faces use the
/// kinetic fluxes, interior faces the same schemes as the stepper, frozen at
/// this state). Returns (spatial mean, max deviation from the mean); at steady
/// state the deviation is at most steady_tol.
std::pair<double, double> total_current(const State& state,
                                        const ModelSpec& spec, const Mesh& mesh,
                                        const SchemeConfig& schemes);

/// One point of a potential sweep.
struct SweepPoint {
  double V = 0.0;
  double current = 0.0;
  double t_steady = 0.0;  // end time when steadiness was not detected
  bool converged = false;
  State final_state;
  std::string error;
};

/// IV-curve data; points sorted by V.
struct SweepResult {
  std::vector<SweepPoint> points;
};

/// Runs advance(..., stop_at_steady) once per applied potential, starting each
/// run from the same initial densities. V enters the outer potentials and f^1
/// via ModelSpec::with_applied_potential. Up to `jobs` points run concurrently;
/// per-point failures set converged = false and the sweep continues.
SweepResult potential_sweep(const std::vector<double>& V_values,
                            const ModelSpec& spec_template, const Mesh& mesh,
                            const SolverConfig& cfg, const Field& u1_in,
                            const Field& u2_in, double t_max, int jobs = 1);

/// Paired profiles of the two variants at one snapshot time, with L-inf and
/// L2 discrepancies of (u1, u2, v0).
struct ComparisonSnapshot {
  double time = 0.0;
  State a, b;  // a: first spec (vdpcm), b: second (legacy)
  double linf_u1 = 0.0, l2_u1 = 0.0;
  double linf_u2 = 0.0, l2_u2 = 0.0;
  double linf_v0 = 0.0, l2_v0 = 0.0;
};

struct ComparisonBundle {
  std::vector<ComparisonSnapshot> snapshots;
  SweepResult iv_a, iv_b;
  bool a_completed = false, b_completed = false;
  std::string error_a, error_b;
};

/// Runs both variants from identical initial data, capturing paired snapshots
/// at the requested times (plus t = 0 is allowed in the list) and, when
/// V_values is nonempty, both IV curves. The two specs must differ only in
/// the variant field.
ComparisonBundle compare_models(const ModelSpec& spec_a, const ModelSpec& spec_b,
                                const Mesh& mesh, const SolverConfig& cfg,
                                const Field& u1_in, const Field& u2_in,
                                const std::vector<double>& snapshot_times,
                                const std::vector<double>& V_values = {},
                                double sweep_t_max = 0.0, int jobs = 1);

}  // namespace dpcm

#endif
