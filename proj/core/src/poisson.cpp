#include "dpcm/poisson.hpp"

#include <cmath>
#include <stdexcept>

namespace dpcm {

double robin_trace(double v0_adjacent, Boundary g, const ModelSpec& spec,
                   const Mesh& mesh) {
  const double c = 2.0 * spec.lambda2 / mesh.h;
  return (spec.f(g) + c * v0_adjacent) / (spec.beta(g) + c);
}

double robin_trace_deriv(Boundary g, const ModelSpec& spec, const Mesh& mesh) {
  const double c = 2.0 * spec.lambda2 / mesh.h;
  return c / (spec.beta(g) + c);
}

PoissonSolution solve_poisson(const Field& u0, const ModelSpec& spec,
                              const Mesh& mesh) {
  const int n = mesh.n_cells;
  if (static_cast<int>(u0.size()) != n) {
    throw std::invalid_argument("u0 length does not match mesh");
  }
  const double h = mesh.h;
  const double le = spec.lambda2 / h;  // interior edge transmissibility
  const double c = 2.0 * le;           // half-cell transmissibility

  std::vector<double> lower(n, 0.0), diag(n, 0.0), upper(n, 0.0), rhs(n, 0.0);
  for (int k = 0; k < n; ++k) {
    rhs[k] = h * u0[k];
    if (k > 0) {
      lower[k] = -le;
      diag[k] += le;
    }
    if (k < n - 1) {
      upper[k] = -le;
      diag[k] += le;
    }
  }
  // Robin closures: the eliminated trace contributes
  // beta c / (beta + c) on the diagonal and c f / (beta + c) to the rhs.
  {
    const double b0 = spec.beta(Boundary::solution);
    diag[0] += b0 * c / (b0 + c);
    rhs[0] += c * spec.f(Boundary::solution) / (b0 + c);
    const double b1 = spec.beta(Boundary::metal);
    diag[n - 1] += b1 * c / (b1 + c);
    rhs[n - 1] += c * spec.f(Boundary::metal) / (b1 + c);
  }

  // Thomas algorithm
  PoissonSolution sol;
  sol.v0.assign(n, 0.0);
  std::vector<double> cp(n, 0.0), dp(n, 0.0);
  double den = diag[0];
  if (den == 0.0) throw std::runtime_error("singular Poisson assembly");
  cp[0] = upper[0] / den;
  dp[0] = rhs[0] / den;
  for (int k = 1; k < n; ++k) {
    den = diag[k] - lower[k] * cp[k - 1];
    if (den == 0.0) throw std::runtime_error("singular Poisson assembly");
    cp[k] = upper[k] / den;
    dp[k] = (rhs[k] - lower[k] * dp[k - 1]) / den;
  }
  sol.v0[n - 1] = dp[n - 1];
  for (int k = n - 2; k >= 0; --k) sol.v0[k] = dp[k] - cp[k] * sol.v0[k + 1];

  sol.trace0 = robin_trace(sol.v0[0], Boundary::solution, spec, mesh);
  sol.trace1 = robin_trace(sol.v0[n - 1], Boundary::metal, spec, mesh);
  return sol;
}

}  // namespace dpcm
