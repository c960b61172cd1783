#ifndef DPCM_MESH_HPP
#define DPCM_MESH_HPP

#include <stdexcept>
#include <vector>

namespace dpcm {

/// Cell-centered field on a Mesh.
using Field = std::vector<double>;

/// Uniform finite-volume mesh of (0,1): n_cells cells of width h = 1/n_cells,
/// centers x_K = (K + 1/2) h, n_cells - 1 interior edges and the two boundary
/// points x = 0 and x = 1.
struct Mesh {
  int n_cells;
  double h;

  explicit Mesh(int n) : n_cells(n), h(1.0 / n) {
    if (n < 2) throw std::invalid_argument("mesh needs at least 2 cells");
  }

  double center(int k) const { return (k + 0.5) * h; }
  int n_interior_edges() const { return n_cells - 1; }
};

}  // namespace dpcm

#endif
