#include "dpcm/physics.hpp"

#include <cmath>
#include <stdexcept>

namespace dpcm {

namespace {

void require_positive(double x, const std::string& name) {
  if (!(x > 0.0)) {
    throw std::invalid_argument(name + " must be strictly positive, got " +
                                std::to_string(x));
  }
}

}  // namespace

void RawKinetics::validate() const {
  for (int i = 0; i < 2; ++i) {
    for (int g = 0; g < 2; ++g) {
      require_positive(k[i][g], "k_" + std::to_string(i + 1) + "^" +
                                    std::to_string(g));
      require_positive(m[i][g], "m_" + std::to_string(i + 1) + "^" +
                                    std::to_string(g));
    }
  }
}

ScaledKinetics derive_scaled_kinetics(const RawKinetics& raw, double V, int z1,
                                      int z2, double ubar2) {
  raw.validate();
  require_positive(ubar2, "ubar2");
  (void)z1;
  (void)z2;
  ScaledKinetics out;
  out.kappa[0][0] = 2.0 * std::sqrt(raw.k[0][0] * raw.m[0][0]);
  out.kappa[0][1] = 2.0 * std::sqrt(raw.k[0][1] * raw.m[0][1]);
  out.kappa[1][0] = 2.0 * std::sqrt(raw.k[1][0] * raw.m[1][0]);
  out.kappa[1][1] = raw.m[1][1];  // r_2^1 is built on m_2^1
  out.xi_base[0][0] = std::log(raw.m[0][0] / raw.k[0][0]);
  out.xi_base[0][1] = std::log(raw.k[0][1] / raw.m[0][1]);  // + z1 V at use
  out.xi_base[1][0] = std::log(raw.m[1][0] / raw.k[1][0]);
  // The ubar2 factor makes r g reproduce m u2 - k e^{z2 (V - v0)} exactly.
  out.xi_base[1][1] = std::log(raw.k[1][1] / (raw.m[1][1] * ubar2));
  out.k2_met = raw.k[1][1];
  out.m2_met = raw.m[1][1];
  (void)V;
  return out;
}

void ModelSpec::validate() const {
  require_positive(lambda2, "lambda2");
  require_positive(alpha0, "alpha0");
  require_positive(alpha1, "alpha1");
  require_positive(d1, "d1");
  require_positive(d2, "d2");
  require_positive(ubar1, "ubar1");
  require_positive(ubar2, "ubar2");
  require_positive(ubar2_met, "ubar2_met");
  for (int i = 0; i < 2; ++i) {
    for (int g = 0; g < 2; ++g) {
      require_positive(kin.kappa[i][g], "kappa_" + std::to_string(i + 1) +
                                            "^" + std::to_string(g));
      if (!std::isfinite(kin.xi_base[i][g])) {
        throw std::invalid_argument("xi_" + std::to_string(i + 1) + "^" +
                                    std::to_string(g) + " must be finite");
      }
    }
  }
  require_positive(kin.k2_met, "k_2^1");
  require_positive(kin.m2_met, "m_2^1");
  if (z1 == 0 && z2 == 0) {
    // allowed individually (used in decoupled tests) but both zero with
    // rho_hl != 0 makes the Poisson data inconsistent with neutrality; no
    // constraint imposed here.
  }
}

ModelSpec ModelSpec::with_applied_potential(double V_new) const {
  ModelSpec out = *this;
  out.V = V_new;
  return out;
}

double statistics_e(int species, double v) {
  if (species == 1) {
    // branch form keeps the exponential bounded
    if (v >= 0.0) return 1.0 / (1.0 + std::exp(-v));
    const double e = std::exp(v);
    return e / (1.0 + e);
  }
  return std::exp(v);
}

double statistics_e_deriv(int species, double v) {
  if (species == 1) {
    const double e = std::exp(-std::abs(v));
    const double q = 1.0 + e;
    return e / (q * q);
  }
  return std::exp(v);
}

double statistics_e_inv(int species, double w) {
  if (species == 1) {
    if (!(w > 0.0 && w < 1.0)) {
      throw std::domain_error(
          "species-1 occupancy fraction must lie in (0,1), got " +
          std::to_string(w));
    }
    return std::log(w / (1.0 - w));
  }
  if (!(w > 0.0)) {
    throw std::domain_error(
        "species-2 occupancy fraction must be positive, got " +
        std::to_string(w));
  }
  return std::log(w);
}

double mobility_sigma(int species, double v, const ModelSpec& spec) {
  if (species == 1 && spec.variant == Variant::legacy) {
    return spec.d1 * spec.ubar1 * statistics_e(1, v);
  }
  return spec.d(species) * spec.ubar(species) * statistics_e_deriv(species, v);
}

double kinetic_prefactor_r(int species, Boundary g, double v,
                           const ModelSpec& spec) {
  const double kappa = spec.kin.kappa[species - 1][idx(g)];
  if (species == 1) {
    // ubar1 e^{v/2}/(1+e^v) = ubar1 / (2 cosh(v/2)), overflow-safe
    return kappa * spec.ubar1 / (2.0 * std::cosh(0.5 * v));
  }
  if (g == Boundary::solution) {
    return kappa * std::sqrt(spec.ubar2) * std::exp(0.5 * v);
  }
  return kappa * spec.ubar2 * std::exp(v);
}

double kinetic_g(int species, Boundary g, double y) {
  if (species == 2 && g == Boundary::metal) return -std::expm1(-y);
  return std::sinh(0.5 * y);
}

double kinetic_g_deriv(int species, Boundary g, double y) {
  if (species == 2 && g == Boundary::metal) return std::exp(-y);
  return 0.5 * std::cosh(0.5 * y);
}

double kinetic_g_regularized(int species, Boundary g, double y, double mu) {
  if (std::abs(y) <= mu) return kinetic_g(species, g, y);
  const double slope = kinetic_g_deriv(species, g, mu);
  if (y > mu) return kinetic_g(species, g, mu) + (y - mu) * slope;
  return kinetic_g(species, g, -mu) + (y + mu) * slope;
}

double kinetic_g_regularized_deriv(int species, Boundary g, double y,
                                   double mu) {
  if (std::abs(y) <= mu) return kinetic_g_deriv(species, g, y);
  return kinetic_g_deriv(species, g, mu);
}

double charge_density(double u1, double u2, const ModelSpec& spec) {
  return spec.z1 * u1 + spec.z2 * u2 + spec.rho_hl;
}

double truncate(double v, double M) { return std::max(-M, std::min(M, v)); }

double legacy_electron_metal_flux(double u2_at_1, double v0_at_1,
                                  const ModelSpec& spec) {
  if (spec.variant != Variant::legacy) {
    throw std::logic_error(
        "legacy_electron_metal_flux called under the vdpcm variant");
  }
  const double y = spec.z2 * (spec.V - v0_at_1);
  const double softplus =
      y > 30.0 ? y + std::log1p(std::exp(-y)) : std::log1p(std::exp(y));
  return spec.kin.m2_met * u2_at_1 -
         spec.kin.k2_met * spec.ubar2_met * softplus;
}

double new_electron_metal_flux(double u2_at_1, double v0_at_1,
                               const ModelSpec& spec) {
  if (spec.variant != Variant::vdpcm) {
    throw std::logic_error(
        "new_electron_metal_flux called under the legacy variant");
  }
  const double y = spec.z2 * (spec.V - v0_at_1);
  return spec.kin.m2_met * u2_at_1 - spec.kin.k2_met * std::exp(y);
}

}  // namespace dpcm
