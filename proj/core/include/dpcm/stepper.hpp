#ifndef DPCM_STEPPER_HPP
#define DPCM_STEPPER_HPP

#include <array>
#include <optional>
#include <string>
#include <vector>

#include "dpcm/energy.hpp"
#include "dpcm/flux.hpp"
#include "dpcm/mesh.hpp"
#include "dpcm/physics.hpp"
#include "dpcm/state.hpp"

namespace dpcm {

/// Time-integration and nonlinear-solve parameters.
struct SolverConfig {
  double dt = 1e-3;
  double newton_tol = 1e-8;  // max-norm residual tolerance
  int newton_max_iter = 50;
  int max_backtracks = 30;      // Armijo halvings per Newton iteration
  int max_dt_halvings = 8;      // step-rejection floor dt / 2^8
  int recovery_streak = 5;      // successes before dt is doubled back
  std::optional<double> trunc_M;  // truncation level, off by default
  std::optional<double> reg_mu;   // boundary regularization, off by default
  double steady_tol = 1e-8;
  SchemeConfig schemes;
  bool full_implicit = false;  // evaluate mobilities at the new time level

  void validate() const;  // throws std::invalid_argument
};

/// Outcome of a single nonlinear solve.
struct StepReport {
  int newton_iters = 0;
  double residual = 0.0;
  int damping_events = 0;
  double energy_decrement = 0.0;
  double diss_bulk = 0.0;
  double diss_boundary = 0.0;
  bool accepted = false;
  std::string error;
};

/// Block-tridiagonal Newton system (3x3 blocks per cell, row-major).
struct NewtonSystem {
  std::vector<double> residual;
  std::vector<std::array<double, 9>> diag, lower, upper;
  void resize(int n_cells);
};

/// Semi-implicit residual of one step evaluated at the potential iterate x
/// (layout per cell: v0, v1, v2). Mobilities and kinetic prefactors are frozen
/// at the previous state, densities and electrochemical potentials implicit.
/// Fills the Jacobian blocks when want_jacobian is set.
void assemble_system(const std::vector<double>& x, const State& prev,
                     const ModelSpec& spec, const Mesh& mesh,
                     const SolverConfig& cfg, double dt, NewtonSystem& sys,
                     bool want_jacobian);

/// Builds a fully consistent State from a potential vector.
State state_from_potentials(const std::vector<double>& x, double time,
                            const ModelSpec& spec, const Mesh& mesh,
                            std::optional<double> trunc_M = std::nullopt);

std::vector<double> potentials_from_state(const State& state);

/// Damped Newton solve of one implicit step of size dt.
std::pair<State, StepReport> newton_solve(const State& prev,
                                          const ModelSpec& spec,
                                          const Mesh& mesh,
                                          const SolverConfig& cfg, double dt);

/// Consistent initial state from admissible densities
/// (0 < u1 < ubar1 and u2 > 0 cellwise); throws std::invalid_argument naming
/// the first offending cell otherwise.
State initial_state(const Field& u1_in, const Field& u2_in,
                    const ModelSpec& spec, const Mesh& mesh);

/// True when both the density rate max_i ||u_new - u_prev||_inf / dt and the
/// spatial variation of the total current fall below steady_tol.
bool detect_steady(const State& prev, const State& next, const ModelSpec& spec,
                   const Mesh& mesh, const SolverConfig& cfg);

struct AdvanceResult {
  State state;
  bool completed = false;
  bool reached_steady = false;
  double t_steady = 0.0;
  long steps = 0;
  std::string error;
};

/// Repeated newton_solve with fixed dt (halving on failure, restored after a
/// success streak), appending one ledger row per accepted step. In vdpcm mode a
/// total free-energy increase beyond 10 x newton_tol aborts with a diagnostic.
/// With stop_at_steady, returns as soon as detect_steady fires.
AdvanceResult advance(State state, const ModelSpec& spec, const Mesh& mesh,
                      const SolverConfig& cfg, double t_end,
                      EnergyLedger* ledger = nullptr,
                      bool stop_at_steady = false);

}  // namespace dpcm

#endif
