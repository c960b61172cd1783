#include <cmath>
#include <stdexcept>

#include <doctest.h>

#include "dpcm/physics.hpp"
#include "test_util.hpp"

using namespace dpcm;
using testutil::default_spec;

TEST_CASE("statistics round trip") {
  for (double v = -30.0; v <= 30.0; v += 0.37) {
    // above v ~ 10 the 1 - e_1(v) cancellation costs digits (the relative
    // error grows like eps * e^v); restrict the strict check accordingly
    if (v <= 15.0) {
      const double tol1 = v <= 10.0 ? 1e-12 : 1e-9;
      CHECK(statistics_e_inv(1, statistics_e(1, v)) ==
            doctest::Approx(v).epsilon(tol1));
    }
    CHECK(statistics_e_inv(2, statistics_e(2, v)) == doctest::Approx(v).epsilon(1e-12));
  }
  for (double w = 1e-6; w < 1.0; w += 0.013) {
    CHECK(statistics_e(1, statistics_e_inv(1, w)) == doctest::Approx(w).epsilon(1e-12));
  }
  for (double w = 1e-6; w < 50.0; w += 0.7) {
    CHECK(statistics_e(2, statistics_e_inv(2, w)) == doctest::Approx(w).epsilon(1e-12));
  }
}

TEST_CASE("statistics bounds and monotonicity") {
  double prev1 = -1.0, prev2 = -1.0;
  // |v| <= 30 keeps 1 - e1 above double rounding so strict bounds are testable
  for (double v = -30.0; v <= 30.0; v += 0.5) {
    const double e1 = statistics_e(1, v);
    const double e2 = statistics_e(2, v);
    CHECK(e1 > 0.0);
    CHECK(e1 < 1.0);
    CHECK(e2 > 0.0);
    CHECK(e1 > prev1);
    CHECK(e2 > prev2);
    prev1 = e1;
    prev2 = e2;
  }
  // overflow safety far out (saturates to the closed interval bounds)
  CHECK(std::isfinite(statistics_e(1, 1000.0)));
  CHECK(statistics_e(1, 1000.0) <= 1.0);
  CHECK(statistics_e(1, 1000.0) == doctest::Approx(1.0));
  CHECK(statistics_e(1, -1000.0) >= 0.0);
}

TEST_CASE("statistics_e_inv domain errors") {
  CHECK_THROWS_AS(statistics_e_inv(1, 0.0), std::domain_error);
  CHECK_THROWS_AS(statistics_e_inv(1, 1.0), std::domain_error);
  CHECK_THROWS_AS(statistics_e_inv(1, -0.3), std::domain_error);
  CHECK_THROWS_AS(statistics_e_inv(2, 0.0), std::domain_error);
  CHECK_THROWS_AS(statistics_e_inv(2, -1.0), std::domain_error);
}

TEST_CASE("statistics derivative matches finite differences") {
  const double fd_h = 1e-6;
  for (double v = -20.0; v <= 20.0; v += 0.41) {
    for (int i : {1, 2}) {
      const double fd =
          (statistics_e(i, v + fd_h) - statistics_e(i, v - fd_h)) / (2 * fd_h);
      CHECK(statistics_e_deriv(i, v) == doctest::Approx(fd).epsilon(1e-8));
    }
  }
}

TEST_CASE("mobility laws") {
  const ModelSpec vd = default_spec(Variant::vdpcm);
  const ModelSpec lg = default_spec(Variant::legacy);
  for (double v = -8.0; v <= 8.0; v += 0.3) {
    const double u1 = vd.ubar1 * statistics_e(1, v);
    // vdpcm cation mobility carries the vacancy factor (ubar1 - u1)/ubar1
    CHECK(mobility_sigma(1, v, vd) ==
          doctest::Approx(vd.d1 * u1 * (vd.ubar1 - u1) / vd.ubar1).epsilon(1e-12));
    // legacy keeps the linear law sigma_1 = d1 u1
    CHECK(mobility_sigma(1, v, lg) == doctest::Approx(lg.d1 * u1).epsilon(1e-12));
    // electrons identical in both variants
    CHECK(mobility_sigma(2, v, vd) == doctest::Approx(mobility_sigma(2, v, lg)));
    CHECK(mobility_sigma(2, v, vd) ==
          doctest::Approx(vd.d2 * vd.ubar2 * std::exp(v)).epsilon(1e-12));
  }
}

// Dual evaluation of the interface laws: the factorized r(v) g(xi - xi^G) form
// against the raw forward-minus-backward rate expressions, on a grid of
// (chemical potential, electrostatic potential) pairs.
TEST_CASE("Butler-Volmer reparameterization equivalence on all four interfaces") {
  const ModelSpec spec = default_spec();
  const RawKinetics raw = [] {
    RawKinetics r;
    r.k[0][0] = 0.4;
    r.m[0][0] = 0.6;
    r.k[0][1] = 0.5;
    r.m[0][1] = 0.5;
    r.k[1][0] = 0.8;
    r.m[1][0] = 0.4;
    r.k[1][1] = 0.6;
    r.m[1][1] = 0.6;
    return r;
  }();
  const double V = spec.V;
  for (int a = 0; a < 100; ++a) {
    const double v = -5.0 + 10.0 * a / 99.0;
    for (int b = 0; b < 100; ++b) {
      const double v0 = -2.0 + 4.0 * b / 99.0;
      const double u1 = spec.ubar1 * statistics_e(1, v);
      const double u2 = spec.ubar2 * statistics_e(2, v);

      // cation, solution side
      {
        const double fact = kinetic_prefactor_r(1, Boundary::solution, v, spec) *
                            kinetic_g(1, Boundary::solution,
                                      v + spec.z1 * v0 -
                                          spec.xi_ext(1, Boundary::solution));
        const double bv = raw.k[0][0] * u1 * std::exp(0.5 * spec.z1 * v0) -
                          raw.m[0][0] * (spec.ubar1 - u1) *
                              std::exp(-0.5 * spec.z1 * v0);
        CHECK(fact == doctest::Approx(bv).epsilon(1e-10));
      }
      // cation, metal side (z1 V shift included in xi_ext)
      {
        const double fact = kinetic_prefactor_r(1, Boundary::metal, v, spec) *
                            kinetic_g(1, Boundary::metal,
                                      v + spec.z1 * v0 -
                                          spec.xi_ext(1, Boundary::metal));
        const double bv =
            raw.m[0][1] * u1 * std::exp(0.5 * spec.z1 * (v0 - V)) -
            raw.k[0][1] * (spec.ubar1 - u1) * std::exp(-0.5 * spec.z1 * (v0 - V));
        CHECK(fact == doctest::Approx(bv).epsilon(1e-10));
      }
      // electron, solution side
      {
        const double fact = kinetic_prefactor_r(2, Boundary::solution, v, spec) *
                            kinetic_g(2, Boundary::solution,
                                      v + spec.z2 * v0 -
                                          spec.xi_ext(2, Boundary::solution));
        const double bv = raw.k[1][0] / std::sqrt(spec.ubar2) * u2 *
                              std::exp(0.5 * spec.z2 * v0) -
                          raw.m[1][0] * std::sqrt(spec.ubar2) *
                              std::exp(-0.5 * spec.z2 * v0);
        CHECK(fact == doctest::Approx(bv).epsilon(1e-10));
      }
      // electron, metal side: r g reproduces m u2 - k e^{z2 (V - v0)}
      {
        const double fact = kinetic_prefactor_r(2, Boundary::metal, v, spec) *
                            kinetic_g(2, Boundary::metal,
                                      v + spec.z2 * v0 -
                                          spec.xi_ext(2, Boundary::metal));
        const double bv = raw.m[1][1] * u2 -
                          raw.k[1][1] * std::exp(spec.z2 * (V - v0));
        CHECK(fact == doctest::Approx(bv).epsilon(1e-10));
      }
    }
  }
}

TEST_CASE("interface rate g: sign, monotonicity, dissipativity") {
  for (int i : {1, 2}) {
    for (Boundary g : {Boundary::solution, Boundary::metal}) {
      CHECK(kinetic_g(i, g, 0.0) == 0.0);
      double prev = kinetic_g(i, g, -10.0);
      for (double y = -9.9; y <= 10.0; y += 0.1) {
        const double val = kinetic_g(i, g, y);
        CHECK(val > prev);          // strictly increasing
        CHECK(y * val >= 0.0);      // dissipative
        prev = val;
      }
      // derivative consistency
      for (double y = -6.0; y <= 6.0; y += 0.37) {
        const double fd =
            (kinetic_g(i, g, y + 1e-6) - kinetic_g(i, g, y - 1e-6)) / 2e-6;
        CHECK(kinetic_g_deriv(i, g, y) == doctest::Approx(fd).epsilon(1e-7));
      }
    }
  }
  // sinh-type rates are odd
  for (double y = 0.0; y <= 8.0; y += 0.25) {
    CHECK(kinetic_g(1, Boundary::solution, -y) ==
          doctest::Approx(-kinetic_g(1, Boundary::solution, y)));
  }
}

TEST_CASE("regularized g: continuation properties") {
  const double mu = 2.5;
  for (int i : {1, 2}) {
    for (Boundary g : {Boundary::solution, Boundary::metal}) {
      // identical inside [-mu, mu]
      for (double y = -mu; y <= mu; y += 0.1) {
        CHECK(kinetic_g_regularized(i, g, y, mu) == kinetic_g(i, g, y));
      }
      // continuous and C1 at the junctions, affine outside
      const double slope = kinetic_g_deriv(i, g, mu);
      for (double y : {mu + 1.0, mu + 5.0, mu + 20.0}) {
        CHECK(kinetic_g_regularized(i, g, y, mu) ==
              doctest::Approx(kinetic_g(i, g, mu) + (y - mu) * slope));
        CHECK(kinetic_g_regularized_deriv(i, g, y, mu) == slope);
        CHECK(kinetic_g_regularized(i, g, -y, mu) ==
              doctest::Approx(kinetic_g(i, g, -mu) - (y - mu) * slope));
      }
      // still dissipative and monotone across the junction
      double prev = kinetic_g_regularized(i, g, -mu - 3.0, mu);
      for (double y = -mu - 2.9; y <= mu + 3.0; y += 0.1) {
        const double val = kinetic_g_regularized(i, g, y, mu);
        CHECK(val > prev);
        CHECK(y * val >= 0.0);
        prev = val;
      }
    }
  }
}

TEST_CASE("scaled kinetics derivation") {
  RawKinetics raw;
  raw.k[0][0] = 0.4;
  raw.m[0][0] = 0.6;
  raw.k[0][1] = 0.5;
  raw.m[0][1] = 0.5;
  raw.k[1][0] = 0.8;
  raw.m[1][0] = 0.4;
  raw.k[1][1] = 0.6;
  raw.m[1][1] = 0.6;
  const ScaledKinetics kin = derive_scaled_kinetics(raw, 0.3, 3, -1, 1.0);
  CHECK(kin.kappa[0][0] == doctest::Approx(2.0 * std::sqrt(0.4 * 0.6)));
  CHECK(kin.kappa[0][1] == doctest::Approx(2.0 * std::sqrt(0.5 * 0.5)));
  CHECK(kin.kappa[1][0] == doctest::Approx(2.0 * std::sqrt(0.8 * 0.4)));
  CHECK(kin.kappa[1][1] == doctest::Approx(0.6));  // m_2^1
  CHECK(kin.xi_base[0][0] == doctest::Approx(std::log(0.6 / 0.4)));
  CHECK(kin.xi_base[0][1] == doctest::Approx(0.0));
  CHECK(kin.xi_base[1][0] == doctest::Approx(std::log(0.4 / 0.8)));
  CHECK(kin.xi_base[1][1] == doctest::Approx(std::log(0.6 / 0.6)));
  CHECK(kin.k2_met == 0.6);
  CHECK(kin.m2_met == 0.6);
}

TEST_CASE("validation rejects nonpositive parameters") {
  RawKinetics raw;
  raw.k[0][1] = -0.2;
  CHECK_THROWS_AS(raw.validate(), std::invalid_argument);

  ModelSpec s = default_spec();
  s.lambda2 = 0.0;
  CHECK_THROWS_AS(s.validate(), std::invalid_argument);
  s = default_spec();
  s.kin.kappa[1][0] = -1.0;
  CHECK_THROWS_AS(s.validate(), std::invalid_argument);
  s = default_spec();
  s.ubar1 = -4.0;
  CHECK_THROWS_AS(s.validate(), std::invalid_argument);
  CHECK_NOTHROW(default_spec().validate());
}

TEST_CASE("boundary data f and beta") {
  const ModelSpec s = default_spec();
  CHECK(s.beta(Boundary::solution) == doctest::Approx(s.lambda2 / s.alpha0));
  CHECK(s.beta(Boundary::metal) == doctest::Approx(s.lambda2 / s.alpha1));
  CHECK(s.f(Boundary::solution) ==
        doctest::Approx(s.beta(Boundary::solution) * s.dpsi_pzc0));
  CHECK(s.f(Boundary::metal) ==
        doctest::Approx(s.beta(Boundary::metal) * (s.V - s.dpsi_pzc1)));
  const ModelSpec s2 = s.with_applied_potential(0.7);
  CHECK(s2.f(Boundary::metal) ==
        doctest::Approx(s2.beta(Boundary::metal) * (0.7 - s.dpsi_pzc1)));
  CHECK(s2.xi_ext(1, Boundary::metal) ==
        doctest::Approx(s.xi_ext(1, Boundary::metal) + s.z1 * 0.4));
}

TEST_CASE("electron/metal laws and overflow safety") {
  ModelSpec lg = default_spec(Variant::legacy);
  ModelSpec vd = default_spec(Variant::vdpcm);
  CHECK_THROWS_AS(legacy_electron_metal_flux(1.0, 0.0, vd), std::logic_error);
  CHECK_THROWS_AS(new_electron_metal_flux(1.0, 0.0, lg), std::logic_error);
  // moderate argument: softplus branch agrees with the naive formula
  const double y = lg.z2 * (lg.V - 0.2);
  CHECK(legacy_electron_metal_flux(1.3, 0.2, lg) ==
        doctest::Approx(lg.kin.m2_met * 1.3 -
                        lg.kin.k2_met * lg.ubar2_met * std::log(1.0 + std::exp(y))));
  // huge argument stays finite (naive exp would overflow)
  // v0 = V + 800 makes y = z2 (V - v0) = +800 with z2 = -1
  CHECK(std::isfinite(legacy_electron_metal_flux(1.0, lg.V + 800.0, lg)));
  CHECK(std::isfinite(new_electron_metal_flux(1.0, -500.0, vd)));
}

TEST_CASE("charge density and truncation") {
  const ModelSpec s = default_spec();
  CHECK(charge_density(2.0, 1.0, s) == doctest::Approx(0.0));
  CHECK(charge_density(1.0, 2.0, s) == doctest::Approx(3.0 - 2.0 - 5.0));
  CHECK(truncate(0.3, 2.0) == 0.3);
  CHECK(truncate(5.0, 2.0) == 2.0);
  CHECK(truncate(-5.0, 2.0) == -2.0);
}
