#ifndef DPCM_POISSON_HPP
#define DPCM_POISSON_HPP

#include "dpcm/mesh.hpp"
#include "dpcm/physics.hpp"

namespace dpcm {

/// Electrostatic potential: cell values plus the two boundary traces.
struct PoissonSolution {
  Field v0;
  double trace0 = 0.0;
  double trace1 = 0.0;
};

/// Boundary trace of v0 recovered from the Robin ghost relation with the
/// half-cell gradient: lambda^2 (v0_cell - v0_G)/(h/2) * (+-1) + beta v0_G = f.
double robin_trace(double v0_adjacent, Boundary g, const ModelSpec& spec,
                   const Mesh& mesh);

/// d trace / d v0_adjacent (the trace is affine in the adjacent cell value).
double robin_trace_deriv(Boundary g, const ModelSpec& spec, const Mesh& mesh);

/// Solves the two-point FV discretization of -lambda^2 v0'' = u0 with Robin
/// conditions lambda^2 v0' . nu + beta^G v0 = f^G. Tridiagonal; always uniquely
/// solvable for beta^G > 0.
PoissonSolution solve_poisson(const Field& u0, const ModelSpec& spec,
                              const Mesh& mesh);

}  // namespace dpcm

#endif
