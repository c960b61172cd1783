#include "dpcm/experiments.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <stdexcept>
#include <thread>

#include "dpcm/flux.hpp"

namespace dpcm {

std::pair<double, double> total_current(const State& state,
                                        const ModelSpec& spec, const Mesh& mesh,
                                        const SchemeConfig& schemes) {
  const int n = mesh.n_cells;
  std::vector<double> samples;
  samples.reserve(n + 1);

  // boundary face at x = 0: flux in +x direction is minus the outward flux
  double j0 = 0.0, j1 = 0.0;
  for (int i : {1, 2}) {
    j0 -= spec.z(i) * boundary_flux(i, Boundary::solution, state, spec);
    j1 += spec.z(i) * boundary_flux(i, Boundary::metal, state, spec);
  }
  samples.push_back(j0);
  for (int k = 0; k + 1 < n; ++k) {
    double j = 0.0;
    for (int i : {1, 2}) {
      const Field& xi = i == 1 ? state.xi1 : state.xi2;
      const double cond =
          frozen_edge_conductance(i, schemes.scheme(i), state, k, spec);
      j += spec.z(i) * cond * (xi[k] - xi[k + 1]) / mesh.h;
    }
    samples.push_back(j);
  }
  samples.push_back(j1);

  double mean = 0.0;
  for (double s : samples) mean += s;
  mean /= static_cast<double>(samples.size());
  double dev = 0.0;
  for (double s : samples) dev = std::max(dev, std::abs(s - mean));
  return {mean, dev};
}

SweepResult potential_sweep(const std::vector<double>& V_values,
                            const ModelSpec& spec_template, const Mesh& mesh,
                            const SolverConfig& cfg, const Field& u1_in,
                            const Field& u2_in, double t_max, int jobs) {
  for (double V : V_values) {
    if (!std::isfinite(V)) {
      throw std::invalid_argument("sweep potentials must be finite");
    }
  }
  SweepResult result;
  result.points.resize(V_values.size());

  auto run_point = [&](std::size_t p) {
    SweepPoint& pt = result.points[p];
    pt.V = V_values[p];
    try {
      const ModelSpec spec = spec_template.with_applied_potential(pt.V);
      State s0 = initial_state(u1_in, u2_in, spec, mesh);
      AdvanceResult res =
          advance(std::move(s0), spec, mesh, cfg, t_max, nullptr, true);
      pt.final_state = res.state;
      if (!res.completed) {
        pt.error = res.error;
        return;
      }
      const auto cur = total_current(res.state, spec, mesh, cfg.schemes);
      pt.current = cur.first;
      pt.t_steady = res.reached_steady ? res.t_steady : res.state.time;
      pt.converged = res.reached_steady || cur.second <= cfg.steady_tol;
    } catch (const std::exception& e) {
      pt.error = e.what();
    }
  };

  const int workers =
      std::max(1, std::min<int>(jobs, static_cast<int>(V_values.size())));
  if (workers == 1) {
    for (std::size_t p = 0; p < V_values.size(); ++p) run_point(p);
  } else {
    std::atomic<std::size_t> next{0};
    std::vector<std::thread> pool;
    pool.reserve(workers);
    for (int w = 0; w < workers; ++w) {
      pool.emplace_back([&] {
        for (std::size_t p = next.fetch_add(1); p < V_values.size();
             p = next.fetch_add(1)) {
          run_point(p);
        }
      });
    }
    for (auto& t : pool) t.join();
  }

  std::stable_sort(result.points.begin(), result.points.end(),
                   [](const SweepPoint& a, const SweepPoint& b) {
                     return a.V < b.V;
                   });
  return result;
}

namespace {

void profile_discrepancies(ComparisonSnapshot& snap, double h) {
  auto measure = [h](const Field& a, const Field& b, double& linf, double& l2) {
    linf = 0.0;
    l2 = 0.0;
    for (std::size_t k = 0; k < a.size(); ++k) {
      const double d = a[k] - b[k];
      linf = std::max(linf, std::abs(d));
      l2 += h * d * d;
    }
    l2 = std::sqrt(l2);
  };
  measure(snap.a.u1, snap.b.u1, snap.linf_u1, snap.l2_u1);
  measure(snap.a.u2, snap.b.u2, snap.linf_u2, snap.l2_u2);
  measure(snap.a.v0, snap.b.v0, snap.linf_v0, snap.l2_v0);
}

// Runs one variant, capturing the state at each requested time (advance is
// split into segments ending exactly at the snapshot times).
bool run_with_snapshots(const ModelSpec& spec, const Mesh& mesh,
                        const SolverConfig& cfg, const Field& u1_in,
                        const Field& u2_in, const std::vector<double>& times,
                        std::vector<State>& snapshots, std::string& error) {
  State s = initial_state(u1_in, u2_in, spec, mesh);
  for (double t : times) {
    if (t > s.time) {
      AdvanceResult res = advance(std::move(s), spec, mesh, cfg, t);
      if (!res.completed) {
        error = res.error;
        snapshots.push_back(res.state);
        return false;
      }
      s = std::move(res.state);
    }
    snapshots.push_back(s);
  }
  return true;
}

}  // namespace

ComparisonBundle compare_models(const ModelSpec& spec_a, const ModelSpec& spec_b,
                                const Mesh& mesh, const SolverConfig& cfg,
                                const Field& u1_in, const Field& u2_in,
                                const std::vector<double>& snapshot_times,
                                const std::vector<double>& V_values,
                                double sweep_t_max, int jobs) {
  std::vector<double> times = snapshot_times;
  std::sort(times.begin(), times.end());
  if (!times.empty() && times.front() < 0.0) {
    throw std::invalid_argument("snapshot times must be nonnegative");
  }

  ComparisonBundle bundle;
  std::vector<State> snaps_a, snaps_b;
  bundle.a_completed = run_with_snapshots(spec_a, mesh, cfg, u1_in, u2_in,
                                          times, snaps_a, bundle.error_a);
  bundle.b_completed = run_with_snapshots(spec_b, mesh, cfg, u1_in, u2_in,
                                          times, snaps_b, bundle.error_b);

  const std::size_t paired = std::min(snaps_a.size(), snaps_b.size());
  for (std::size_t j = 0; j < paired; ++j) {
    ComparisonSnapshot snap;
    snap.time = times[j];
    snap.a = snaps_a[j];
    snap.b = snaps_b[j];
    profile_discrepancies(snap, mesh.h);
    bundle.snapshots.push_back(std::move(snap));
  }

  if (!V_values.empty()) {
    bundle.iv_a = potential_sweep(V_values, spec_a, mesh, cfg, u1_in, u2_in,
                                  sweep_t_max, jobs);
    bundle.iv_b = potential_sweep(V_values, spec_b, mesh, cfg, u1_in, u2_in,
                                  sweep_t_max, jobs);
  }
  return bundle;
}

}  // namespace dpcm
