#include "dpcm/flux.hpp"

#include <cmath>

namespace dpcm {

double bernoulli(double x) {
  const double ax = std::abs(x);
  if (ax < 1e-4) {
    // B(x) = 1 - x/2 + x^2/12 - x^4/720 + ...
    return 1.0 - 0.5 * x + x * x / 12.0;
  }
  if (x > 700.0) return 0.0;
  if (x < -700.0) return -x;
  return x / std::expm1(x);
}

double sg_edge_flux(double u_K, double u_L, double dpot, double d, double h) {
  return (d / h) * (bernoulli(-dpot) * u_K - bernoulli(dpot) * u_L);
}

double sqra_edge_flux(double v1_K, double v1_L, double xi_K, double xi_L,
                      const ModelSpec& spec, double h) {
  const double s =
      std::sqrt(mobility_sigma(1, v1_K, spec) * mobility_sigma(1, v1_L, spec));
  return s * (xi_K - xi_L) / h;
}

double centered_edge_flux(double sigma_K, double sigma_L, double xi_K,
                          double xi_L, double h) {
  return 0.5 * (sigma_K + sigma_L) * (xi_K - xi_L) / h;
}

double edge_conductance(int species, FluxScheme scheme, double v_K, double v_L,
                        double xi_K, double xi_L, double dpot,
                        const ModelSpec& spec) {
  switch (scheme) {
    case FluxScheme::sqra_geometric:
      return std::sqrt(mobility_sigma(species, v_K, spec) *
                       mobility_sigma(species, v_L, spec));
    case FluxScheme::centered:
      return 0.5 * (mobility_sigma(species, v_K, spec) +
                    mobility_sigma(species, v_L, spec));
    case FluxScheme::scharfetter_gummel: {
      // Exact rewrite of the SG flux as conductance times (xi_K - xi_L)/h;
      // symmetric in K <-> L.
      const double u_L = spec.ubar(species) * statistics_e(species, v_L);
      return spec.d(species) * u_L * bernoulli(dpot) / bernoulli(xi_K - xi_L);
    }
  }
  return 0.0;
}

double frozen_edge_conductance(int species, FluxScheme scheme,
                               const State& state, int k,
                               const ModelSpec& spec,
                               std::optional<double> trunc_M) {
  const Field& v = species == 1 ? state.v1 : state.v2;
  const Field& xi = species == 1 ? state.xi1 : state.xi2;
  double vK = v[k], vL = v[k + 1];
  if (trunc_M) {
    vK = truncate(vK, *trunc_M);
    vL = truncate(vL, *trunc_M);
  }
  const double dpot = spec.z(species) * (state.v0[k] - state.v0[k + 1]);
  return edge_conductance(species, scheme, vK, vL, xi[k], xi[k + 1], dpot,
                          spec);
}

double boundary_flux(int species, Boundary g, const State& state,
                     const ModelSpec& spec, std::optional<double> mu) {
  if (species == 2 && g == Boundary::metal &&
      spec.variant == Variant::legacy) {
    const double u2 = state.u2[state.u2.size() - 1];
    return legacy_electron_metal_flux(u2, state.v0_trace1, spec);
  }
  const double v = state.v_at_boundary_cell(species, g);
  const double y = state.xi_at_boundary(species, g, spec) - spec.xi_ext(species, g);
  const double gval = mu ? kinetic_g_regularized(species, g, y, *mu)
                         : kinetic_g(species, g, y);
  return kinetic_prefactor_r(species, g, v, spec) * gval;
}

}  // namespace dpcm
