#ifndef DPCM_PHYSICS_HPP
#define DPCM_PHYSICS_HPP

#include <array>
#include <string>

namespace dpcm {

/// Model variant: the dissipative formulation (vdpcm) or the legacy
/// diffusion-Poisson coupled model with linear cation mobility and the
/// original electron/metal boundary law.
enum class Variant { vdpcm, legacy };

/// Interface index: gamma = 0 is the oxide/solution side (x = 0),
/// gamma = 1 the oxide/metal side (x = 1).
enum class Boundary : int { solution = 0, metal = 1 };

inline int idx(Boundary g) { return static_cast<int>(g); }

/// Raw Butler-Volmer rate constants k_i^gamma, m_i^gamma. All strictly positive.
struct RawKinetics {
  // [species-1][gamma]
  std::array<std::array<double, 2>, 2> k{{{1.0, 1.0}, {1.0, 1.0}}};
  std::array<std::array<double, 2>, 2> m{{{1.0, 1.0}, {1.0, 1.0}}};

  /// Throws std::invalid_argument if any rate constant is not strictly positive.
  void validate() const;
};

/// Scaled interface kinetics seen by the solver: amplitudes kappa_i^gamma and
/// the V-independent parts of the outer electrochemical potentials.
/// The actual outer potential at the metal side is xi_base + z_i * V.
struct ScaledKinetics {
  std::array<std::array<double, 2>, 2> kappa{};    // [species-1][gamma]
  std::array<std::array<double, 2>, 2> xi_base{};  // [species-1][gamma]
  double k2_met = 1.0;  // k_2^1, kept for the electron/metal laws
  double m2_met = 1.0;  // m_2^1 (equals kappa[1][1])
};

/// One-way constructor from raw rate constants to the scaled form.
/// kappa_i^G = 2 sqrt(k m) for the sinh-type interfaces, xi_1^0 = log(m/k),
/// xi_1^1 = log(k/m) + z1 V, and the electron/metal side keeps (m_2^1, k_2^1)
/// with xi_2^1 = log(k_2^1 / (m_2^1 ubar2)) + z2 V.
ScaledKinetics derive_scaled_kinetics(const RawKinetics& raw, double V, int z1,
                                      int z2, double ubar2 = 1.0);

/// Full scaled parameter set of the model plus variant switches.
/// Construct via validate()d aggregate; boundary data f^G and beta^G are
/// derived from (lambda2, alpha_G, dpsi_pzc_G, V).
struct ModelSpec {
  double lambda2 = 1.0;  // scaled squared Debye length
  double alpha0 = 1.0;   // interface capacitance parameters
  double alpha1 = 1.0;
  double dpsi_pzc0 = 0.0;  // voltages of zero charge
  double dpsi_pzc1 = 0.0;
  double V = 0.0;  // applied potential (dimensionless)

  double rho_hl = -5.0;  // host-lattice charge density
  int z1 = 3;
  int z2 = -1;
  double d1 = 1.0;
  double d2 = 1.0;
  double ubar1 = 1.0;      // maximum cation occupancy
  double ubar2 = 1.0;      // electron reference occupancy
  double ubar2_met = 1.0;  // metal electron density of state (legacy law)

  ScaledKinetics kin;
  Variant variant = Variant::vdpcm;

  double beta(Boundary g) const {
    return lambda2 / (g == Boundary::solution ? alpha0 : alpha1);
  }
  /// f^0 = (lambda^2/alpha_0) dpsi_pzc0, f^1 = (lambda^2/alpha_1)(V - dpsi_pzc1).
  double f(Boundary g) const {
    return g == Boundary::solution ? beta(g) * dpsi_pzc0
                                   : beta(g) * (V - dpsi_pzc1);
  }
  /// Outer electrochemical potential xi_i^G (includes the z_i V shift at gamma=1).
  double xi_ext(int species, Boundary g) const {
    double base = kin.xi_base[species - 1][idx(g)];
    return g == Boundary::metal ? base + (species == 1 ? z1 : z2) * V : base;
  }
  int z(int species) const { return species == 1 ? z1 : z2; }
  double d(int species) const { return species == 1 ? d1 : d2; }
  double ubar(int species) const { return species == 1 ? ubar1 : ubar2; }

  /// Throws std::invalid_argument when a positivity constraint is violated.
  void validate() const;

  /// Copy with a different applied potential; updates f^1 and the outer
  /// potentials at the metal interface consistently.
  ModelSpec with_applied_potential(double V_new) const;
};

/// Occupancy fraction e_i(v): e_1 = e^v/(1+e^v) (overflow-safe), e_2 = e^v.
double statistics_e(int species, double v);

/// Derivative e_i'(v).
double statistics_e_deriv(int species, double v);

/// Inverse of statistics_e. Throws std::domain_error outside the admissible
/// range (w in (0,1) for species 1, w > 0 for species 2).
double statistics_e_inv(int species, double w);

/// Mobility sigma_i(v). vdpcm: sigma_i = d_i ubar_i e_i'(v);
/// legacy: sigma_1 = d_1 u_1 while sigma_2 is unchanged.
double mobility_sigma(int species, double v, const ModelSpec& spec);

/// Kinetic rate prefactor r_i^G(v) > 0.
double kinetic_prefactor_r(int species, Boundary g, double v,
                           const ModelSpec& spec);

/// Dimensionless interface rate g_i^G(y): sinh(y/2) except g_2^1(y) = 1-e^{-y}.
double kinetic_g(int species, Boundary g, double y);
double kinetic_g_deriv(int species, Boundary g, double y);

/// Lipschitz continuation of kinetic_g outside [-mu, mu] with slope g'(mu).
double kinetic_g_regularized(int species, Boundary g, double y, double mu);
double kinetic_g_regularized_deriv(int species, Boundary g, double y,
                                   double mu);

/// u_0 = z_1 u_1 + z_2 u_2 + rho_hl.
double charge_density(double u1, double u2, const ModelSpec& spec);

/// T_M(v) = max(-M, min(M, v)).
double truncate(double v, double M);

/// Original electron/metal boundary flux
/// J_2(1) = m u_2(1) - k ubar2_met log(1 + e^{z2 (V - v0(1))}).
/// Throws std::logic_error unless spec.variant == legacy.
double legacy_electron_metal_flux(double u2_at_1, double v0_at_1,
                                  const ModelSpec& spec);

/// Dissipative electron/metal boundary flux J_2(1) = m u_2(1) - k e^{z2 (V - v0(1))}.
/// Throws std::logic_error unless spec.variant == vdpcm.
double new_electron_metal_flux(double u2_at_1, double v0_at_1,
                               const ModelSpec& spec);

}  // namespace dpcm

#endif
