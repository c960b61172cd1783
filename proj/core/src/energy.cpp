#include "dpcm/energy.hpp"

#include <cmath>
#include <limits>
#include <stdexcept>

#include "dpcm/poisson.hpp"

namespace dpcm {

double phi_species(int species, double v) {
  if (species == 1) {
    // log(1+e^v) - log 2, overflow-safe softplus
    const double softplus =
        v > 30.0 ? v + std::log1p(std::exp(-v)) : std::log1p(std::exp(v));
    return softplus - std::log(2.0);
  }
  return std::expm1(v);
}

double psi_species(int species, double w) {
  constexpr double inf = std::numeric_limits<double>::infinity();
  auto xlogx = [](double x) { return x > 0.0 ? x * std::log(x) : 0.0; };
  if (species == 1) {
    if (w < 0.0 || w > 1.0) return inf;
    return xlogx(w) + xlogx(1.0 - w) + std::log(2.0);
  }
  if (w < 0.0) return inf;
  return xlogx(w) - w + 1.0;
}

namespace {

// lambda^2/2 sum of squared two-point gradients, half-cells included.
double gradient_energy(const Field& v0, double trace0, double trace1,
                       const ModelSpec& spec, const Mesh& mesh) {
  const double h = mesh.h;
  double q = 0.0;
  for (int k = 0; k + 1 < mesh.n_cells; ++k) {
    const double dv = v0[k + 1] - v0[k];
    q += dv * dv / h;
  }
  const double dl = v0[0] - trace0;
  const double dr = trace1 - v0[mesh.n_cells - 1];
  q += dl * dl / (0.5 * h) + dr * dr / (0.5 * h);
  return 0.5 * spec.lambda2 * q;
}

}  // namespace

double landau_energy(const Field& v0, double trace0, double trace1,
                     const Field& v1, const Field& v2, const ModelSpec& spec,
                     const Mesh& mesh) {
  double e = gradient_energy(v0, trace0, trace1, spec, mesh);
  for (int k = 0; k < mesh.n_cells; ++k) {
    e += mesh.h * (spec.ubar1 * phi_species(1, v1[k]) +
                   spec.ubar2 * phi_species(2, v2[k]));
  }
  const double b0 = spec.beta(Boundary::solution);
  const double b1 = spec.beta(Boundary::metal);
  e += 0.5 * b0 * trace0 * trace0 - spec.f(Boundary::solution) * trace0;
  e += 0.5 * b1 * trace1 * trace1 - spec.f(Boundary::metal) * trace1;
  return e;
}

namespace {

double helmholtz_from_fields(const Field& u1, const Field& u2, const Field& v0,
                             double trace0, double trace1,
                             const ModelSpec& spec, const Mesh& mesh) {
  double e = gradient_energy(v0, trace0, trace1, spec, mesh);
  for (int k = 0; k < mesh.n_cells; ++k) {
    e += mesh.h * (spec.ubar1 * psi_species(1, u1[k] / spec.ubar1) +
                   spec.ubar2 * psi_species(2, u2[k] / spec.ubar2));
  }
  e += 0.5 * spec.beta(Boundary::solution) * trace0 * trace0;
  e += 0.5 * spec.beta(Boundary::metal) * trace1 * trace1;
  return e;
}

}  // namespace

double helmholtz_energy(const Field& u1, const Field& u2,
                        const ModelSpec& spec, const Mesh& mesh) {
  Field u0(mesh.n_cells);
  for (int k = 0; k < mesh.n_cells; ++k) {
    u0[k] = charge_density(u1[k], u2[k], spec);
  }
  const PoissonSolution sol = solve_poisson(u0, spec, mesh);
  return helmholtz_from_fields(u1, u2, sol.v0, sol.trace0, sol.trace1, spec,
                               mesh);
}

double helmholtz_energy(const State& state, const ModelSpec& spec,
                        const Mesh& mesh) {
  return helmholtz_from_fields(state.u1, state.u2, state.v0, state.v0_trace0,
                               state.v0_trace1, spec, mesh);
}

namespace {

// Boundary flux of one step exactly as the stepper evaluates it: prefactor at
// the (truncated) previous potentials, g at the new trace-based gap. The
// legacy electron/metal law is implicit in the new state.
double step_boundary_flux(int species, Boundary g, const State& prev,
                          const State& next, const ModelSpec& spec,
                          std::optional<double> mu,
                          std::optional<double> trunc_M) {
  if (species == 2 && g == Boundary::metal && spec.variant == Variant::legacy) {
    return legacy_electron_metal_flux(next.u2.back(), next.v0_trace1, spec);
  }
  double vprev = prev.v_at_boundary_cell(species, g);
  if (trunc_M) vprev = truncate(vprev, *trunc_M);
  const double y =
      next.xi_at_boundary(species, g, spec) - spec.xi_ext(species, g);
  const double gval = mu ? kinetic_g_regularized(species, g, y, *mu)
                         : kinetic_g(species, g, y);
  return kinetic_prefactor_r(species, g, vprev, spec) * gval;
}

}  // namespace

std::pair<double, double> boundary_energy_increment(
    const State& prev, const State& next, double dt, const ModelSpec& spec,
    std::optional<double> mu, std::optional<double> trunc_M) {
  double inc[2] = {0.0, 0.0};
  for (Boundary g : {Boundary::solution, Boundary::metal}) {
    for (int i : {1, 2}) {
      const double flux = step_boundary_flux(i, g, prev, next, spec, mu, trunc_M);
      inc[idx(g)] += dt * flux * spec.xi_ext(i, g);
    }
  }
  return {inc[0], inc[1]};
}

std::pair<double, double> dissipation_rates(
    const State& prev, const State& next, double dt, const ModelSpec& spec,
    const Mesh& mesh, const SchemeConfig& schemes, std::optional<double> mu,
    std::optional<double> trunc_M) {
  double bulk = 0.0;
  for (int i : {1, 2}) {
    const Field& xi = i == 1 ? next.xi1 : next.xi2;
    for (int k = 0; k + 1 < mesh.n_cells; ++k) {
      const double cond =
          frozen_edge_conductance(i, schemes.scheme(i), prev, k, spec, trunc_M);
      const double dxi = xi[k] - xi[k + 1];
      bulk += dt * cond * dxi * dxi / mesh.h;
    }
  }
  double bdry = 0.0;
  for (Boundary g : {Boundary::solution, Boundary::metal}) {
    for (int i : {1, 2}) {
      const double flux = step_boundary_flux(i, g, prev, next, spec, mu, trunc_M);
      const double gap =
          next.xi_at_boundary(i, g, spec) - spec.xi_ext(i, g);
      bdry += dt * flux * gap;
    }
  }
  return {bulk, bdry};
}

}  // namespace dpcm
