#ifndef DPCM_FLUX_HPP
#define DPCM_FLUX_HPP

#include <optional>

#include "dpcm/mesh.hpp"
#include "dpcm/physics.hpp"
#include "dpcm/state.hpp"

namespace dpcm {

/// Two-point numerical flux family for the species equations.
enum class FluxScheme { scharfetter_gummel, sqra_geometric, centered };

/// Per-species flux scheme assignment. Defaults follow the model: cations use
/// the square-root (geometric-mean) mobility flux, electrons Scharfetter-Gummel.
struct SchemeConfig {
  FluxScheme cation = FluxScheme::sqra_geometric;
  FluxScheme electron = FluxScheme::scharfetter_gummel;
  FluxScheme scheme(int species) const {
    return species == 1 ? cation : electron;
  }
};

/// Bernoulli function B(x) = x/(e^x - 1), B(0) = 1, series branch near 0.
double bernoulli(double x);

/// Scharfetter-Gummel flux oriented K -> L.
/// dpot is the electrostatic drop z (v0_K - v0_L); the flux vanishes exactly
/// when u_L/u_K = e^{dpot}, i.e. at equal electrochemical potentials.
double sg_edge_flux(double u_K, double u_L, double dpot, double d, double h);

/// Square-root-approximation flux for the cations, oriented K -> L:
/// geometric mean of sigma_1 at the two cells times (xi_K - xi_L)/h.
double sqra_edge_flux(double v1_K, double v1_L, double xi_K, double xi_L,
                      const ModelSpec& spec, double h);

/// Arithmetic-mean mobility baseline flux, oriented K -> L.
double centered_edge_flux(double sigma_K, double sigma_L, double xi_K,
                          double xi_L, double h);

/// Nonnegative edge conductance sigma~ such that the scheme's edge flux equals
/// sigma~ (xi_K - xi_L)/h when evaluated at the given cell values. For
/// Scharfetter-Gummel this is the exact rewrite d u_L B(dpot)/B(xi_K - xi_L);
/// the stepper freezes it at the previous time level.
double edge_conductance(int species, FluxScheme scheme, double v_K, double v_L,
                        double xi_K, double xi_L, double dpot,
                        const ModelSpec& spec);

/// Edge conductance for interior edge k (between cells k and k+1) evaluated at
/// a full state, with optional truncation of the chemical potentials at level
/// M. This is what the stepper freezes at the previous time level.
double frozen_edge_conductance(int species, FluxScheme scheme,
                               const State& state, int k,
                               const ModelSpec& spec,
                               std::optional<double> trunc_M = std::nullopt);

/// Outward boundary flux J_i . nu^G = r_i^G(v_i) g_i^G(xi_i - xi_i^G), with the
/// v0 trace entering xi_i at the boundary point and v_i taken from the adjacent
/// cell. With mu set, g is replaced by its regularized continuation. The legacy
/// variant substitutes the original electron/metal law at (2, 1).
double boundary_flux(int species, Boundary g, const State& state,
                     const ModelSpec& spec,
                     std::optional<double> mu = std::nullopt);

}  // namespace dpcm

#endif
