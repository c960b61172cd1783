#ifndef DPCM_ENERGY_HPP
#define DPCM_ENERGY_HPP

#include <optional>
#include <utility>
#include <vector>

#include "dpcm/flux.hpp"
#include "dpcm/mesh.hpp"
#include "dpcm/physics.hpp"
#include "dpcm/state.hpp"

namespace dpcm {

/// Primitive of e_i with phi_i(0) = 0:
/// phi_1(v) = log(1+e^v) - log 2, phi_2(v) = e^v - 1.
double phi_species(int species, double v);

/// Convex entropy density, the Legendre transform of phi_i:
/// psi_1(w) = w log w + (1-w) log(1-w) + log 2 on [0,1],
/// psi_2(w) = w log w - w + 1 on [0,inf); +infinity outside the domain.
double psi_species(int species, double w);

/// Discrete Landau free energy of a potential triplet. The v0 traces are the
/// eliminated Robin ghost values; quadrature matches the flux discretization
/// (two-point edge gradients, half-cell boundary gradients, midpoint cells).
double landau_energy(const Field& v0, double trace0, double trace1,
                     const Field& v1, const Field& v2, const ModelSpec& spec,
                     const Mesh& mesh);

/// Discrete Helmholtz free energy of a density pair: solves the Robin Poisson
/// problem for v0* from u0 = z1 u1 + z2 u2 + rho_hl, then evaluates
/// lambda^2/2 |grad v0*|^2 + sum ubar_i psi_i(u_i/ubar_i) + boundary terms.
double helmholtz_energy(const Field& u1, const Field& u2,
                        const ModelSpec& spec, const Mesh& mesh);

/// Same functional evaluated with the state's own (converged) v0.
double helmholtz_energy(const State& state, const ModelSpec& spec,
                        const Mesh& mesh);

/// Energy carried out of the layer through each interface during one step,
/// dt * sum_i r_i^G(v_i^prev) g(xi_i^new - xi_i^G) xi_i^G, matching the
/// stepper's semi-implicit boundary flux evaluation.
std::pair<double, double> boundary_energy_increment(
    const State& prev, const State& next, double dt, const ModelSpec& spec,
    std::optional<double> mu = std::nullopt,
    std::optional<double> trunc_M = std::nullopt);

/// Bulk and boundary dissipation of one step, both nonnegative by
/// construction; the bulk sum uses the same frozen edge conductances as the
/// flux scheme.
std::pair<double, double> dissipation_rates(
    const State& prev, const State& next, double dt, const ModelSpec& spec,
    const Mesh& mesh, const SchemeConfig& schemes,
    std::optional<double> mu = std::nullopt,
    std::optional<double> trunc_M = std::nullopt);

/// Time series of the free-energy bookkeeping along a run.
struct EnergyLedger {
  std::vector<double> times;
  std::vector<double> phi, psi, psi_gamma0, psi_gamma1, psi_tot;
  std::vector<double> diss_bulk, diss_boundary;

  void append(double t, double phi_v, double psi_v, double pg0, double pg1,
              double db, double dbd) {
    times.push_back(t);
    phi.push_back(phi_v);
    psi.push_back(psi_v);
    psi_gamma0.push_back(pg0);
    psi_gamma1.push_back(pg1);
    psi_tot.push_back(psi_v + pg0 + pg1);
    diss_bulk.push_back(db);
    diss_boundary.push_back(dbd);
  }
  std::size_t size() const { return times.size(); }
};

}  // namespace dpcm

#endif
