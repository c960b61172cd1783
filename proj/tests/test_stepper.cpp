#include <cmath>
#include <random>
#include <stdexcept>

#include <doctest.h>

#include "dpcm/stepper.hpp"
#include "test_util.hpp"

using namespace dpcm;
using testutil::default_spec;
using testutil::equilibrium_spec;

namespace {

// Applies the assembled block-tridiagonal Jacobian to a direction vector.
std::vector<double> apply_jacobian(const NewtonSystem& sys,
                                   const std::vector<double>& d) {
  const int n = static_cast<int>(sys.diag.size());
  std::vector<double> out(3 * n, 0.0);
  auto mul = [&](const std::array<double, 9>& blk, int row_cell, int col_cell) {
    for (int r = 0; r < 3; ++r) {
      for (int c = 0; c < 3; ++c) {
        out[3 * row_cell + r] += blk[3 * r + c] * d[3 * col_cell + c];
      }
    }
  };
  for (int k = 0; k < n; ++k) {
    mul(sys.diag[k], k, k);
    if (k > 0) mul(sys.lower[k], k, k - 1);
    if (k < n - 1) mul(sys.upper[k], k, k + 1);
  }
  return out;
}

}  // namespace

TEST_CASE("equilibrium is an exact fixed point of the residual") {
  const ModelSpec spec = equilibrium_spec();
  const Mesh mesh(16);
  const SolverConfig cfg;
  const State s = initial_state(Field(16, 2.0), Field(16, 1.0), spec, mesh);
  NewtonSystem sys;
  assemble_system(potentials_from_state(s), s, spec, mesh, cfg, cfg.dt, sys,
                  false);
  for (double r : sys.residual) CHECK(std::abs(r) <= 1e-12);

  auto [next, rep] = newton_solve(s, spec, mesh, cfg, cfg.dt);
  CHECK(rep.accepted);
  CHECK(rep.newton_iters == 0);
  for (int k = 0; k < 16; ++k) {
    CHECK(std::abs(next.u1[k] - s.u1[k]) <= 1e-12);
    CHECK(std::abs(next.u2[k] - s.u2[k]) <= 1e-12);
    CHECK(std::abs(next.v0[k] - s.v0[k]) <= 1e-12);
  }
}

TEST_CASE("time term scales linearly in 1/dt") {
  const ModelSpec spec = default_spec();
  const Mesh mesh(8);
  const SolverConfig cfg;
  const State s = initial_state(Field(8, 2.0), Field(8, 1.0), spec, mesh);
  // evaluate away from the previous state so the time term is nonzero
  std::vector<double> x = potentials_from_state(s);
  for (double& xi : x) xi += 0.05;
  NewtonSystem r1, r2, r4;
  assemble_system(x, s, spec, mesh, cfg, 1e-3, r1, false);
  assemble_system(x, s, spec, mesh, cfg, 2e-3, r2, false);
  assemble_system(x, s, spec, mesh, cfg, 4e-3, r4, false);
  for (int k = 0; k < 8; ++k) {
    // Poisson rows carry no time term
    CHECK(r1.residual[3 * k] == doctest::Approx(r2.residual[3 * k]).epsilon(1e-13));
    for (int i : {1, 2}) {
      const double d12 = r1.residual[3 * k + i] - r2.residual[3 * k + i];
      const double d24 = r2.residual[3 * k + i] - r4.residual[3 * k + i];
      CHECK(d12 == doctest::Approx(2.0 * d24).epsilon(1e-10));
    }
  }
}

TEST_CASE("Jacobian matches finite differences at random states") {
  const ModelSpec spec = default_spec();
  const Mesh mesh(12);
  const SolverConfig cfg;
  std::mt19937 rng(20240817);
  std::uniform_real_distribution<double> unif(-0.5, 0.5);

  const State base = initial_state(Field(12, 2.0), Field(12, 1.0), spec, mesh);
  for (int trial = 0; trial < 20; ++trial) {
    std::vector<double> x = potentials_from_state(base);
    for (double& xi : x) xi += unif(rng);
    std::vector<double> d(x.size());
    for (double& di : d) di = unif(rng);

    NewtonSystem sys;
    assemble_system(x, base, spec, mesh, cfg, cfg.dt, sys, true);
    const std::vector<double> jd = apply_jacobian(sys, d);

    const double eps = 1e-6;
    std::vector<double> xp = x, xm = x;
    for (std::size_t j = 0; j < x.size(); ++j) {
      xp[j] += eps * d[j];
      xm[j] -= eps * d[j];
    }
    NewtonSystem rp, rm;
    assemble_system(xp, base, spec, mesh, cfg, cfg.dt, rp, false);
    assemble_system(xm, base, spec, mesh, cfg, cfg.dt, rm, false);

    double num = 0.0, den = 0.0;
    for (std::size_t j = 0; j < x.size(); ++j) {
      const double fd = (rp.residual[j] - rm.residual[j]) / (2.0 * eps);
      num = std::max(num, std::abs(fd - jd[j]));
      den = std::max(den, std::abs(jd[j]));
    }
    CHECK(num <= 1e-6 * std::max(den, 1.0));
  }
}

// Decoupled scalar reduction: z1 = z2 = 0 and symmetric cation kinetics on a
// two-cell mesh keep both cells identical, so each implicit step solves
//   h (ubar1 e1(v) - u_prev)/dt + r(v_prev) sinh(v/2) = 0
// for a single scalar v; a bisection root is the oracle.
TEST_CASE("scalar-cell implicit-Euler oracle") {
  ModelSpec spec;
  spec.z1 = 0;
  spec.z2 = 0;
  spec.ubar1 = 4.0;
  spec.lambda2 = 0.5;
  RawKinetics raw;
  raw.k[0][0] = raw.m[0][0] = raw.k[0][1] = raw.m[0][1] = 0.5;
  raw.k[1][0] = raw.m[1][0] = 1.0;
  raw.k[1][1] = raw.m[1][1] = 1.0;
  spec.kin = derive_scaled_kinetics(raw, 0.0, spec.z1, spec.z2, spec.ubar2);

  const Mesh mesh(2);
  SolverConfig cfg;
  cfg.dt = 5e-2;
  cfg.newton_tol = 1e-13;
  State s = initial_state(Field(2, 1.0), Field(2, 1.0), spec, mesh);

  const double kappa = spec.kin.kappa[0][0];
  for (int step = 0; step < 5; ++step) {
    const double u_prev = s.u1[0];
    const double v_prev = s.v1[0];
    const double r_prev = kappa * spec.ubar1 / (2.0 * std::cosh(0.5 * v_prev));
    auto F = [&](double v) {
      return mesh.h * (spec.ubar1 * statistics_e(1, v) - u_prev) / cfg.dt +
             r_prev * std::sinh(0.5 * v);
    };
    double lo = -10.0, hi = 10.0;
    for (int it = 0; it < 200; ++it) {
      const double mid = 0.5 * (lo + hi);
      (F(mid) > 0.0 ? hi : lo) = mid;
    }
    const double v_oracle = 0.5 * (lo + hi);

    auto [next, rep] = newton_solve(s, spec, mesh, cfg, cfg.dt);
    REQUIRE(rep.accepted);
    CHECK(next.v1[0] == doctest::Approx(v_oracle).epsilon(1e-10));
    CHECK(next.v1[1] == doctest::Approx(v_oracle).epsilon(1e-10));
    // electrons started at their fixed point and must not move
    CHECK(std::abs(next.v2[0]) <= 1e-12);
    s = std::move(next);
  }
  // relaxation toward the kinetic equilibrium v = 0
  CHECK(std::abs(s.v1[0]) < std::abs(statistics_e_inv(1, 0.25)));
}

TEST_CASE("small perturbations converge in a few Newton iterations") {
  const ModelSpec spec = equilibrium_spec();
  const Mesh mesh(16);
  SolverConfig cfg;
  Field u1(16, 2.0), u2(16, 1.0);
  for (int k = 0; k < 16; ++k) u1[k] += 0.01 * std::sin(2.0 * M_PI * (k + 0.5) / 16.0);
  const State s = initial_state(u1, u2, spec, mesh);
  auto [next, rep] = newton_solve(s, spec, mesh, cfg, cfg.dt);
  CHECK(rep.accepted);
  CHECK(rep.newton_iters <= 5);
  CHECK(rep.residual <= cfg.newton_tol);
  CHECK(rep.damping_events == 0);
}

TEST_CASE("initial_state admissibility errors name the offending cell") {
  const ModelSpec spec = default_spec();
  const Mesh mesh(8);
  Field u1(8, 2.0), u2(8, 1.0);
  SUBCASE("u1 at zero") {
    u1[3] = 0.0;
    CHECK_THROWS_WITH_AS(initial_state(u1, u2, spec, mesh),
                         doctest::Contains("cell 3"), std::invalid_argument);
  }
  SUBCASE("u1 at the occupancy limit") {
    u1[5] = spec.ubar1;
    CHECK_THROWS_WITH_AS(initial_state(u1, u2, spec, mesh),
                         doctest::Contains("cell 5"), std::invalid_argument);
  }
  SUBCASE("u2 negative") {
    u2[0] = -0.5;
    CHECK_THROWS_WITH_AS(initial_state(u1, u2, spec, mesh),
                         doctest::Contains("cell 0"), std::invalid_argument);
  }
  SUBCASE("length mismatch") {
    CHECK_THROWS_AS(initial_state(Field(7, 2.0), u2, spec, mesh),
                    std::invalid_argument);
  }
}

TEST_CASE("initial_state at the statistics midpoints") {
  const ModelSpec spec = default_spec();
  const Mesh mesh(6);
  const State s = initial_state(Field(6, spec.ubar1 / 2.0),
                                Field(6, spec.ubar2), spec, mesh);
  for (int k = 0; k < 6; ++k) {
    CHECK(std::abs(s.v1[k]) <= 1e-14);
    CHECK(std::abs(s.v2[k]) <= 1e-14);
    CHECK(s.u0[k] == doctest::Approx(charge_density(s.u1[k], s.u2[k], spec)));
  }
}

TEST_CASE("detect_steady basics") {
  const ModelSpec spec = equilibrium_spec();
  const Mesh mesh(8);
  SolverConfig cfg;
  cfg.steady_tol = 0.5;
  const State s = initial_state(Field(8, 2.0), Field(8, 1.0), spec, mesh);
  State same = s;
  same.time = s.time + 1.0;
  CHECK(detect_steady(s, same, spec, mesh, cfg));
  State moved = same;
  moved.u1[2] += 1.0;
  CHECK_FALSE(detect_steady(s, moved, spec, mesh, cfg));
}

TEST_CASE("advance: equilibrium data stay constant with constant energy") {
  const ModelSpec spec = equilibrium_spec();
  const Mesh mesh(12);
  SolverConfig cfg;
  EnergyLedger led;
  State s0 = initial_state(Field(12, 2.0), Field(12, 1.0), spec, mesh);
  const AdvanceResult res = advance(std::move(s0), spec, mesh, cfg, 0.05, &led);
  REQUIRE(res.completed);
  CHECK(res.steps == 50);
  for (int k = 0; k < 12; ++k) {
    CHECK(res.state.u1[k] == doctest::Approx(2.0).epsilon(1e-12));
    CHECK(res.state.u2[k] == doctest::Approx(1.0).epsilon(1e-12));
  }
  for (std::size_t j = 0; j < led.size(); ++j) {
    CHECK(std::abs(led.psi_tot[j]) <= 1e-12);
  }
}

TEST_CASE("advance reaches steady state and reports the detection time") {
  const ModelSpec spec = default_spec();
  const Mesh mesh(16);
  SolverConfig cfg;
  cfg.dt = 1e-2;
  cfg.steady_tol = 1e-7;
  State s0 = initial_state(Field(16, 2.0), Field(16, 1.0), spec, mesh);
  const AdvanceResult res =
      advance(std::move(s0), spec, mesh, cfg, 100.0, nullptr, true);
  REQUIRE(res.completed);
  CHECK(res.reached_steady);
  CHECK(res.t_steady < 100.0);
  CHECK(res.state.time == doctest::Approx(res.t_steady));
}

TEST_CASE("dt refinement shows first-order convergence") {
  const ModelSpec spec = default_spec();
  const Mesh mesh(16);
  const Field u1(16, 2.0), u2(16, 1.0);
  auto final_u1 = [&](double dt) {
    SolverConfig cfg;
    cfg.dt = dt;
    State s0 = initial_state(u1, u2, spec, mesh);
    const AdvanceResult res = advance(std::move(s0), spec, mesh, cfg, 0.2);
    REQUIRE(res.completed);
    return res.state.u1;
  };
  const Field a = final_u1(4e-3), b = final_u1(2e-3), c = final_u1(1e-3);
  double e1 = 0.0, e2 = 0.0;
  for (int k = 0; k < 16; ++k) {
    e1 = std::max(e1, std::abs(a[k] - b[k]));
    e2 = std::max(e2, std::abs(b[k] - c[k]));
  }
  const double order = std::log2(e1 / e2);
  CHECK(order > 0.8);
  CHECK(order < 1.2);
}

TEST_CASE("truncation at a generous level is inert") {
  const ModelSpec spec = default_spec();
  const Mesh mesh(16);
  SolverConfig plain;
  SolverConfig trunc = plain;
  trunc.trunc_M = 50.0;
  State a0 = initial_state(Field(16, 2.0), Field(16, 1.0), spec, mesh);
  State b0 = a0;
  const AdvanceResult ra = advance(std::move(a0), spec, mesh, plain, 0.1);
  const AdvanceResult rb = advance(std::move(b0), spec, mesh, trunc, 0.1);
  REQUIRE(ra.completed);
  REQUIRE(rb.completed);
  for (int k = 0; k < 16; ++k) {
    CHECK(std::abs(ra.state.u1[k] - rb.state.u1[k]) <= 1e-12);
    CHECK(std::abs(ra.state.u2[k] - rb.state.u2[k]) <= 1e-12);
    CHECK(std::abs(ra.state.v0[k] - rb.state.v0[k]) <= 1e-12);
  }
}

TEST_CASE("mu-regularization: wide window inert, invariant violation caught") {
  const ModelSpec spec = default_spec();
  const Mesh mesh(12);
  SolverConfig plain;
  State s0 = initial_state(Field(12, 2.0), Field(12, 1.0), spec, mesh);

  SolverConfig reg = plain;
  reg.trunc_M = 50.0;
  reg.reg_mu = 20.0;  // far wider than any boundary gap in this run
  State r0 = s0;
  const AdvanceResult ra = advance(std::move(s0), spec, mesh, plain, 0.05);
  const AdvanceResult rb = advance(std::move(r0), spec, mesh, reg, 0.05);
  REQUIRE(ra.completed);
  REQUIRE(rb.completed);
  for (int k = 0; k < 12; ++k) {
    CHECK(std::abs(ra.state.u1[k] - rb.state.u1[k]) <= 1e-12);
  }

  SolverConfig bad = reg;
  bad.reg_mu = 200.0;  // violates mu <= M - max_i(|z_i| C1 + |xi_i^G|)
  State b0 = initial_state(Field(12, 2.0), Field(12, 1.0), spec, mesh);
  const AdvanceResult rc = advance(std::move(b0), spec, mesh, bad, 0.05);
  CHECK_FALSE(rc.completed);
  CHECK(rc.error.find("regularization invariant") != std::string::npos);
}

TEST_CASE("solver config validation") {
  SolverConfig cfg;
  CHECK_NOTHROW(cfg.validate());
  cfg.dt = 0.0;
  CHECK_THROWS_AS(cfg.validate(), std::invalid_argument);
  cfg = SolverConfig{};
  cfg.trunc_M = -1.0;
  CHECK_THROWS_AS(cfg.validate(), std::invalid_argument);
  cfg = SolverConfig{};
  cfg.newton_max_iter = 0;
  CHECK_THROWS_AS(cfg.validate(), std::invalid_argument);
}
