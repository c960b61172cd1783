#include "dpcm/stepper.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "dpcm/experiments.hpp"
#include "dpcm/poisson.hpp"

namespace dpcm {

void SolverConfig::validate() const {
  if (!(dt > 0.0)) throw std::invalid_argument("dt must be positive");
  if (!(newton_tol > 0.0)) {
    throw std::invalid_argument("newton_tol must be positive");
  }
  if (newton_max_iter < 1) {
    throw std::invalid_argument("newton_max_iter must be at least 1");
  }
  if (!(steady_tol > 0.0)) {
    throw std::invalid_argument("steady_tol must be positive");
  }
  if (trunc_M && !(*trunc_M > 0.0)) {
    throw std::invalid_argument("truncation level M must be positive");
  }
  if (reg_mu && !(*reg_mu > 0.0)) {
    throw std::invalid_argument("regularization mu must be positive");
  }
}

void NewtonSystem::resize(int n_cells) {
  residual.assign(3 * n_cells, 0.0);
  diag.assign(n_cells, {});
  lower.assign(n_cells, {});
  upper.assign(n_cells, {});
}

namespace {

double apply_trunc(double v, const std::optional<double>& M) {
  return M ? truncate(v, *M) : v;
}

double trunc_indicator(double v, const std::optional<double>& M) {
  return (M && std::abs(v) > *M) ? 0.0 : 1.0;
}

struct BlockTridiag {
  // In-place block LU solve, overwrites the system.
  static bool solve(std::vector<std::array<double, 9>>& lower,
                    std::vector<std::array<double, 9>>& diag,
                    std::vector<std::array<double, 9>>& upper,
                    std::vector<double>& rhs) {
    const int n = static_cast<int>(diag.size());
    for (int k = 0; k < n; ++k) {
      if (k > 0) {
        // diag[k] -= lower[k] * inv(diag[k-1]) * upper[k-1]; fold into rhs too
        std::array<double, 9> m{};  // lower[k] * inv(diag[k-1])
        std::array<double, 9> inv{};
        if (!invert3(diag[k - 1], inv)) return false;
        matmul(lower[k], inv, m);
        std::array<double, 9> mu{};
        matmul(m, upper[k - 1], mu);
        for (int i = 0; i < 9; ++i) diag[k][i] -= mu[i];
        double* rk = &rhs[3 * k];
        const double* rkm = &rhs[3 * (k - 1)];
        for (int i = 0; i < 3; ++i) {
          for (int j = 0; j < 3; ++j) rk[i] -= m[3 * i + j] * rkm[j];
        }
      }
    }
    // back substitution
    std::array<double, 9> inv{};
    if (!invert3(diag[n - 1], inv)) return false;
    matvec_into(inv, &rhs[3 * (n - 1)]);
    for (int k = n - 2; k >= 0; --k) {
      double* rk = &rhs[3 * k];
      const double* rkp = &rhs[3 * (k + 1)];
      for (int i = 0; i < 3; ++i) {
        for (int j = 0; j < 3; ++j) rk[i] -= upper[k][3 * i + j] * rkp[j];
      }
      if (!invert3(diag[k], inv)) return false;
      matvec_into(inv, rk);
    }
    return true;
  }

  static void matmul(const std::array<double, 9>& a,
                     const std::array<double, 9>& b, std::array<double, 9>& c) {
    for (int i = 0; i < 3; ++i) {
      for (int j = 0; j < 3; ++j) {
        double s = 0.0;
        for (int l = 0; l < 3; ++l) s += a[3 * i + l] * b[3 * l + j];
        c[3 * i + j] = s;
      }
    }
  }

  static void matvec_into(const std::array<double, 9>& a, double* v) {
    double r[3];
    for (int i = 0; i < 3; ++i) {
      r[i] = a[3 * i] * v[0] + a[3 * i + 1] * v[1] + a[3 * i + 2] * v[2];
    }
    v[0] = r[0];
    v[1] = r[1];
    v[2] = r[2];
  }

  static bool invert3(const std::array<double, 9>& a,
                      std::array<double, 9>& inv) {
    const double a00 = a[0], a01 = a[1], a02 = a[2];
    const double a10 = a[3], a11 = a[4], a12 = a[5];
    const double a20 = a[6], a21 = a[7], a22 = a[8];
    const double c00 = a11 * a22 - a12 * a21;
    const double c01 = a12 * a20 - a10 * a22;
    const double c02 = a10 * a21 - a11 * a20;
    const double det = a00 * c00 + a01 * c01 + a02 * c02;
    if (det == 0.0 || !std::isfinite(det)) return false;
    const double id = 1.0 / det;
    inv[0] = c00 * id;
    inv[1] = (a02 * a21 - a01 * a22) * id;
    inv[2] = (a01 * a12 - a02 * a11) * id;
    inv[3] = c01 * id;
    inv[4] = (a00 * a22 - a02 * a20) * id;
    inv[5] = (a02 * a10 - a00 * a12) * id;
    inv[6] = c02 * id;
    inv[7] = (a01 * a20 - a00 * a21) * id;
    inv[8] = (a00 * a11 - a01 * a10) * id;
    return true;
  }
};

double max_norm(const std::vector<double>& v) {
  double m = 0.0;
  for (double x : v) m = std::max(m, std::abs(x));
  return m;
}

}  // namespace

State state_from_potentials(const std::vector<double>& x, double time,
                            const ModelSpec& spec, const Mesh& mesh,
                            std::optional<double> trunc_M) {
  const int n = mesh.n_cells;
  State s;
  s.time = time;
  s.v0.resize(n);
  s.v1.resize(n);
  s.v2.resize(n);
  s.u1.resize(n);
  s.u2.resize(n);
  s.u0.resize(n);
  s.xi1.resize(n);
  s.xi2.resize(n);
  for (int k = 0; k < n; ++k) {
    s.v0[k] = x[3 * k];
    s.v1[k] = x[3 * k + 1];
    s.v2[k] = x[3 * k + 2];
    s.u1[k] = spec.ubar1 * statistics_e(1, apply_trunc(s.v1[k], trunc_M));
    s.u2[k] = spec.ubar2 * statistics_e(2, apply_trunc(s.v2[k], trunc_M));
    s.u0[k] = charge_density(s.u1[k], s.u2[k], spec);
    s.xi1[k] = s.v1[k] + spec.z1 * s.v0[k];
    s.xi2[k] = s.v2[k] + spec.z2 * s.v0[k];
  }
  s.v0_trace0 = robin_trace(s.v0[0], Boundary::solution, spec, mesh);
  s.v0_trace1 = robin_trace(s.v0[n - 1], Boundary::metal, spec, mesh);
  return s;
}

std::vector<double> potentials_from_state(const State& state) {
  const int n = static_cast<int>(state.v0.size());
  std::vector<double> x(3 * n);
  for (int k = 0; k < n; ++k) {
    x[3 * k] = state.v0[k];
    x[3 * k + 1] = state.v1[k];
    x[3 * k + 2] = state.v2[k];
  }
  return x;
}

void assemble_system(const std::vector<double>& x, const State& prev,
                     const ModelSpec& spec, const Mesh& mesh,
                     const SolverConfig& cfg, double dt, NewtonSystem& sys,
                     bool want_jacobian) {
  const int n = mesh.n_cells;
  const double h = mesh.h;
  const double le = spec.lambda2 / h;
  const double c = 2.0 * le;
  const auto& M = cfg.trunc_M;
  sys.resize(n);

  auto v0 = [&](int k) { return x[3 * k]; };
  auto vsp = [&](int i, int k) { return x[3 * k + i]; };  // i = 1, 2
  auto xi = [&](int i, int k) {
    return vsp(i, k) + spec.z(i) * v0(k);
  };

  // column offsets within a 3x3 block: 0 = v0, i = v_i
  auto add = [&](std::vector<std::array<double, 9>>& blocks, int k, int row,
                 int col, double val) { blocks[k][3 * row + col] += val; };

  // --- Poisson rows and implicit density time terms ---
  for (int k = 0; k < n; ++k) {
    double u[3] = {0.0, 0.0, 0.0};
    double dudv[3] = {0.0, 0.0, 0.0};
    for (int i : {1, 2}) {
      const double tv = apply_trunc(vsp(i, k), M);
      u[i] = spec.ubar(i) * statistics_e(i, tv);
      dudv[i] = spec.ubar(i) * statistics_e_deriv(i, tv) *
                trunc_indicator(vsp(i, k), M);
    }
    const double u0k = charge_density(u[1], u[2], spec);

    double pois = -h * u0k;
    if (k > 0) {
      pois += le * (v0(k) - v0(k - 1));
      if (want_jacobian) {
        add(sys.diag, k, 0, 0, le);
        add(sys.lower, k, 0, 0, -le);
      }
    }
    if (k < n - 1) {
      pois += le * (v0(k) - v0(k + 1));
      if (want_jacobian) {
        add(sys.diag, k, 0, 0, le);
        add(sys.upper, k, 0, 0, -le);
      }
    }
    if (k == 0) {
      const double b = spec.beta(Boundary::solution);
      pois += b * c / (b + c) * v0(0) - c * spec.f(Boundary::solution) / (b + c);
      if (want_jacobian) add(sys.diag, 0, 0, 0, b * c / (b + c));
    }
    if (k == n - 1) {
      const double b = spec.beta(Boundary::metal);
      pois += b * c / (b + c) * v0(n - 1) - c * spec.f(Boundary::metal) / (b + c);
      if (want_jacobian) add(sys.diag, n - 1, 0, 0, b * c / (b + c));
    }
    sys.residual[3 * k] = pois;
    if (want_jacobian) {
      add(sys.diag, k, 0, 1, -h * spec.z1 * dudv[1]);
      add(sys.diag, k, 0, 2, -h * spec.z2 * dudv[2]);
    }

    // species time terms
    for (int i : {1, 2}) {
      const double uprev = i == 1 ? prev.u1[k] : prev.u2[k];
      sys.residual[3 * k + i] += h * (u[i] - uprev) / dt;
      if (want_jacobian) add(sys.diag, k, i, i, h * dudv[i] / dt);
    }
  }

  // --- interior edge fluxes ---
  const State& mob_state = prev;  // chord state for conductances
  for (int i : {1, 2}) {
    const FluxScheme scheme = cfg.schemes.scheme(i);
    const int zi = spec.z(i);
    for (int k = 0; k + 1 < n; ++k) {
      double cond;
      if (!cfg.full_implicit) {
        cond = frozen_edge_conductance(i, scheme, mob_state, k, spec, M);
      } else {
        const double vK = apply_trunc(vsp(i, k), M);
        const double vL = apply_trunc(vsp(i, k + 1), M);
        const double dpot = zi * (v0(k) - v0(k + 1));
        cond = edge_conductance(i, scheme, vK, vL, xi(i, k), xi(i, k + 1),
                                dpot, spec);
      }
      const double flux = cond * (xi(i, k) - xi(i, k + 1)) / h;
      sys.residual[3 * k + i] += flux;
      sys.residual[3 * (k + 1) + i] -= flux;
      if (want_jacobian) {
        const double w = cond / h;
        // d flux / d (v_i, v0) at cells k and k+1
        add(sys.diag, k, i, i, w);
        add(sys.diag, k, i, 0, w * zi);
        add(sys.upper, k, i, i, -w);
        add(sys.upper, k, i, 0, -w * zi);
        add(sys.diag, k + 1, i, i, w);
        add(sys.diag, k + 1, i, 0, w * zi);
        add(sys.lower, k + 1, i, i, -w);
        add(sys.lower, k + 1, i, 0, -w * zi);
      }
    }
  }

  // --- boundary fluxes ---
  for (Boundary g : {Boundary::solution, Boundary::metal}) {
    const int k = g == Boundary::solution ? 0 : n - 1;
    const double b = spec.beta(g);
    const double dtr = c / (b + c);  // d trace / d v0_cell
    const double trace = (spec.f(g) + c * v0(k)) / (b + c);
    const double sign = g == Boundary::solution ? 1.0 : 1.0;
    // residual contribution: -J_{left face} = +B at gamma=0, +J_{right} = +B
    for (int i : {1, 2}) {
      if (i == 2 && g == Boundary::metal && spec.variant == Variant::legacy) {
        const double tv = apply_trunc(vsp(2, k), M);
        const double u2b = spec.ubar2 * statistics_e(2, tv);
        const double y = spec.z2 * (spec.V - trace);
        const double softplus =
            y > 30.0 ? y + std::log1p(std::exp(-y)) : std::log1p(std::exp(y));
        const double B = spec.kin.m2_met * u2b -
                         spec.kin.k2_met * spec.ubar2_met * softplus;
        sys.residual[3 * k + 2] += sign * B;
        if (want_jacobian) {
          const double sig = 1.0 / (1.0 + std::exp(-y));
          add(sys.diag, k, 2, 2,
              sign * spec.kin.m2_met * spec.ubar2 * statistics_e_deriv(2, tv) *
                  trunc_indicator(vsp(2, k), M));
          add(sys.diag, k, 2, 0,
              sign * spec.kin.k2_met * spec.ubar2_met * sig * spec.z2 * dtr);
        }
        continue;
      }
      const double vfreeze = cfg.full_implicit
                                 ? apply_trunc(vsp(i, k), M)
                                 : apply_trunc(
                                       i == 1 ? prev.v1[k] : prev.v2[k], M);
      const double r = kinetic_prefactor_r(i, g, vfreeze, spec);
      const double zi = spec.z(i);
      const double y = vsp(i, k) + zi * trace - spec.xi_ext(i, g);
      const double gval = cfg.reg_mu
                              ? kinetic_g_regularized(i, g, y, *cfg.reg_mu)
                              : kinetic_g(i, g, y);
      sys.residual[3 * k + i] += sign * r * gval;
      if (want_jacobian) {
        const double gd = cfg.reg_mu
                              ? kinetic_g_regularized_deriv(i, g, y, *cfg.reg_mu)
                              : kinetic_g_deriv(i, g, y);
        add(sys.diag, k, i, i, sign * r * gd);
        add(sys.diag, k, i, 0, sign * r * gd * zi * dtr);
      }
    }
  }
}

std::pair<State, StepReport> newton_solve(const State& prev,
                                          const ModelSpec& spec,
                                          const Mesh& mesh,
                                          const SolverConfig& cfg, double dt) {
  const int n = mesh.n_cells;
  std::vector<double> x = potentials_from_state(prev);
  NewtonSystem sys;
  StepReport rep;

  assemble_system(x, prev, spec, mesh, cfg, dt, sys, false);
  double norm = max_norm(sys.residual);
  if (!std::isfinite(norm)) {
    rep.error = "non-finite residual at step start";
    return {prev, rep};
  }

  for (int it = 0; it < cfg.newton_max_iter && norm > cfg.newton_tol; ++it) {
    assemble_system(x, prev, spec, mesh, cfg, dt, sys, true);
    std::vector<double> step = sys.residual;
    for (double& s : step) s = -s;
    if (!BlockTridiag::solve(sys.lower, sys.diag, sys.upper, step)) {
      rep.error = "singular Newton system";
      rep.newton_iters = it;
      rep.residual = norm;
      return {prev, rep};
    }
    double lambda = 1.0;
    std::vector<double> trial(3 * n);
    double trial_norm = norm;
    bool improved = false;
    for (int bt = 0; bt <= cfg.max_backtracks; ++bt) {
      for (int j = 0; j < 3 * n; ++j) trial[j] = x[j] + lambda * step[j];
      assemble_system(trial, prev, spec, mesh, cfg, dt, sys, false);
      trial_norm = max_norm(sys.residual);
      if (std::isfinite(trial_norm) &&
          trial_norm <= (1.0 - 1e-4 * lambda) * norm) {
        improved = true;
        break;
      }
      lambda *= 0.5;
      ++rep.damping_events;
    }
    if (!improved) {
      rep.error = "line search failed";
      rep.newton_iters = it + 1;
      rep.residual = norm;
      return {prev, rep};
    }
    x.swap(trial);
    norm = trial_norm;
    rep.newton_iters = it + 1;
  }

  rep.residual = norm;
  if (norm > cfg.newton_tol) {
    rep.error = "Newton iteration budget exceeded";
    return {prev, rep};
  }
  rep.accepted = true;
  State next = state_from_potentials(x, prev.time + dt, spec, mesh, cfg.trunc_M);
  return {next, rep};
}

State initial_state(const Field& u1_in, const Field& u2_in,
                    const ModelSpec& spec, const Mesh& mesh) {
  const int n = mesh.n_cells;
  if (static_cast<int>(u1_in.size()) != n ||
      static_cast<int>(u2_in.size()) != n) {
    throw std::invalid_argument("initial density length does not match mesh");
  }
  for (int k = 0; k < n; ++k) {
    if (!(u1_in[k] > 0.0 && u1_in[k] < spec.ubar1)) {
      throw std::invalid_argument(
          "inadmissible initial data: u1 must lie strictly in (0, ubar1); "
          "first offending cell " +
          std::to_string(k) + " with u1 = " + std::to_string(u1_in[k]));
    }
    if (!(u2_in[k] > 0.0)) {
      throw std::invalid_argument(
          "inadmissible initial data: u2 must be strictly positive; first "
          "offending cell " +
          std::to_string(k) + " with u2 = " + std::to_string(u2_in[k]));
    }
  }
  State s;
  s.time = 0.0;
  s.u1 = u1_in;
  s.u2 = u2_in;
  s.u0.resize(n);
  s.v1.resize(n);
  s.v2.resize(n);
  s.xi1.resize(n);
  s.xi2.resize(n);
  for (int k = 0; k < n; ++k) {
    s.v1[k] = statistics_e_inv(1, u1_in[k] / spec.ubar1);
    s.v2[k] = statistics_e_inv(2, u2_in[k] / spec.ubar2);
    s.u0[k] = charge_density(u1_in[k], u2_in[k], spec);
  }
  const PoissonSolution sol = solve_poisson(s.u0, spec, mesh);
  s.v0 = sol.v0;
  s.v0_trace0 = sol.trace0;
  s.v0_trace1 = sol.trace1;
  for (int k = 0; k < n; ++k) {
    s.xi1[k] = s.v1[k] + spec.z1 * s.v0[k];
    s.xi2[k] = s.v2[k] + spec.z2 * s.v0[k];
  }
  return s;
}

bool detect_steady(const State& prev, const State& next, const ModelSpec& spec,
                   const Mesh& mesh, const SolverConfig& cfg) {
  const double dt = next.time - prev.time;
  if (!(dt > 0.0)) return false;
  double rate = 0.0;
  for (std::size_t k = 0; k < next.u1.size(); ++k) {
    rate = std::max(rate, std::abs(next.u1[k] - prev.u1[k]));
    rate = std::max(rate, std::abs(next.u2[k] - prev.u2[k]));
  }
  if (rate / dt > cfg.steady_tol) return false;
  const auto cur = total_current(next, spec, mesh, cfg.schemes);
  return cur.second <= cfg.steady_tol;
}

namespace {

// discrete H1 norm of v0 per the boundary-weighted convention
double v0_h1_norm(const State& s, const Mesh& mesh) {
  double q = 0.0;
  for (std::size_t k = 0; k + 1 < s.v0.size(); ++k) {
    const double dv = s.v0[k + 1] - s.v0[k];
    q += dv * dv / mesh.h;
  }
  const double dl = s.v0[0] - s.v0_trace0;
  const double dr = s.v0_trace1 - s.v0.back();
  q += dl * dl / (0.5 * mesh.h) + dr * dr / (0.5 * mesh.h);
  return std::sqrt(0.5 * q + 0.5 * (s.v0_trace0 * s.v0_trace0 +
                                    s.v0_trace1 * s.v0_trace1));
}

}  // namespace

AdvanceResult advance(State state, const ModelSpec& spec, const Mesh& mesh,
                      const SolverConfig& cfg, double t_end,
                      EnergyLedger* ledger, bool stop_at_steady) {
  cfg.validate();
  AdvanceResult out;
  const double decay_slack = 10.0 * cfg.newton_tol;
  double psi_g0 = 0.0, psi_g1 = 0.0;
  double psi_prev_tot = 0.0;
  double c1_running = 0.0;

  {
    const double psi = helmholtz_energy(state, spec, mesh);
    psi_prev_tot = psi;
    if (ledger && ledger->size() == 0) {
      const double phi = landau_energy(state.v0, state.v0_trace0,
                                       state.v0_trace1, state.v1, state.v2,
                                       spec, mesh);
      ledger->append(state.time, phi, psi, 0.0, 0.0, 0.0, 0.0);
    }
  }

  double dt = cfg.dt;
  const double dt_min = cfg.dt / std::pow(2.0, cfg.max_dt_halvings);
  int streak = 0;

  while (state.time < t_end - 1e-12 * std::max(1.0, t_end)) {
    if (cfg.reg_mu && cfg.trunc_M) {
      c1_running = std::max(c1_running, v0_h1_norm(state, mesh));
      double bound = *cfg.trunc_M;
      for (int i : {1, 2}) {
        double xi_mag = std::max(std::abs(spec.xi_ext(i, Boundary::solution)),
                                 std::abs(spec.xi_ext(i, Boundary::metal)));
        bound = std::min(bound, *cfg.trunc_M -
                                    (std::abs(spec.z(i)) * c1_running + xi_mag));
      }
      if (*cfg.reg_mu > bound) {
        out.state = state;
        out.error = "regularization invariant violated: mu = " +
                    std::to_string(*cfg.reg_mu) +
                    " exceeds M - max_i(|z_i| C1 + |xi_i^G|) = " +
                    std::to_string(bound);
        return out;
      }
    }

    const double dt_step = std::min(dt, t_end - state.time);
    auto [next, rep] = newton_solve(state, spec, mesh, cfg, dt_step);
    if (!rep.accepted) {
      if (dt * 0.5 >= dt_min * (1.0 - 1e-12)) {
        dt *= 0.5;
        streak = 0;
        continue;
      }
      out.state = state;
      out.error = "step rejected at t = " + std::to_string(state.time) +
                  " with dt at the retry floor: " + rep.error;
      return out;
    }

    const double psi = helmholtz_energy(next, spec, mesh);
    const auto inc = boundary_energy_increment(state, next, dt_step, spec,
                                               cfg.reg_mu, cfg.trunc_M);
    psi_g0 += inc.first;
    psi_g1 += inc.second;
    const auto diss = dissipation_rates(state, next, dt_step, spec, mesh,
                                        cfg.schemes, cfg.reg_mu, cfg.trunc_M);
    const double psi_tot = psi + psi_g0 + psi_g1;
    if (spec.variant == Variant::vdpcm &&
        psi_tot > psi_prev_tot + decay_slack) {
      out.state = next;
      out.error = "free-energy decay violated at t = " +
                  std::to_string(next.time) + ": total energy rose by " +
                  std::to_string(psi_tot - psi_prev_tot);
      return out;
    }
    if (ledger) {
      const double phi = landau_energy(next.v0, next.v0_trace0, next.v0_trace1,
                                       next.v1, next.v2, spec, mesh);
      ledger->append(next.time, phi, psi, psi_g0, psi_g1, diss.first,
                     diss.second);
    }

    const bool steady = stop_at_steady &&
                        detect_steady(state, next, spec, mesh, cfg);
    state = std::move(next);
    psi_prev_tot = psi_tot;
    ++out.steps;
    if (++streak >= cfg.recovery_streak && dt < cfg.dt) {
      dt = std::min(2.0 * dt, cfg.dt);
      streak = 0;
    }
    if (steady) {
      out.reached_steady = true;
      out.t_steady = state.time;
      break;
    }
  }

  out.state = std::move(state);
  out.completed = true;
  return out;
}

}  // namespace dpcm
