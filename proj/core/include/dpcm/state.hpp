#ifndef DPCM_STATE_HPP
#define DPCM_STATE_HPP

#include "dpcm/mesh.hpp"
#include "dpcm/physics.hpp"

namespace dpcm {

/// Fully consistent simulation state at one time level:
/// u_i = ubar_i e_i(v_i) cellwise, u0 = z1 u1 + z2 u2 + rho_hl, v0 solves the
/// Robin Poisson problem for u0, and xi_i = v_i + z_i v0 (cell values).
struct State {
  double time = 0.0;
  Field u1, u2, u0;
  Field v0, v1, v2;
  double v0_trace0 = 0.0;
  double v0_trace1 = 0.0;
  Field xi1, xi2;

  double v0_trace(Boundary g) const {
    return g == Boundary::solution ? v0_trace0 : v0_trace1;
  }
  /// Electrochemical potential at the boundary point: adjacent-cell chemical
  /// potential plus z_i times the v0 trace.
  double xi_at_boundary(int species, Boundary g, const ModelSpec& spec) const {
    const int k = g == Boundary::solution ? 0 : static_cast<int>(v1.size()) - 1;
    const double vi = species == 1 ? v1[k] : v2[k];
    return vi + spec.z(species) * v0_trace(g);
  }
  double v_at_boundary_cell(int species, Boundary g) const {
    const int k = g == Boundary::solution ? 0 : static_cast<int>(v1.size()) - 1;
    return species == 1 ? v1[k] : v2[k];
  }
};

}  // namespace dpcm

#endif
