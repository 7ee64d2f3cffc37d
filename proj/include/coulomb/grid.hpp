#pragma once
#include <array>
#include <cstddef>
#include <memory>
#include <string>
#include <vector>

#include "coulomb/kernels.hpp"
#include "coulomb/vec.hpp"

namespace coulomb {

// Uniform cell-centered rectangular grid in d <= 3 dimensions.
struct Grid {
  int dim = 2;
  std::array<int, 3> n{1, 1, 1};
  std::array<double, 3> lo{0.0, 0.0, 0.0};
  double h = 1.0;

  static Grid box(int dim, double low, double high, double h);

  std::size_t cells() const {
    return static_cast<std::size_t>(n[0]) * (dim > 1 ? n[1] : 1) * (dim > 2 ? n[2] : 1);
  }
  std::size_t index(int i, int j = 0, int k = 0) const {
    return (static_cast<std::size_t>(k) * (dim > 1 ? n[1] : 1) + j) * n[0] + i;
  }
  Vec center(std::size_t idx) const {
    int i = static_cast<int>(idx % n[0]);
    idx /= n[0];
    int j = dim > 1 ? static_cast<int>(idx % n[1]) : 0;
    int k = dim > 2 ? static_cast<int>(idx / n[1]) : 0;
    return {lo[0] + (i + 0.5) * h, dim > 1 ? lo[1] + (j + 0.5) * h : 0.0,
            dim > 2 ? lo[2] + (k + 0.5) * h : 0.0};
  }
  double cell_volume() const {
    double v = h;
    for (int d = 1; d < dim; ++d) v *= h;
    return v;
  }
  bool same_shape(const Grid& o) const {
    return dim == o.dim && n == o.n && lo == o.lo && h == o.h;
  }
};

struct GridField {
  Grid grid;
  std::vector<double> v;

  GridField() = default;
  explicit GridField(const Grid& g, double fill = 0.0) : grid(g), v(g.cells(), fill) {}
  double& operator[](std::size_t i) { return v[i]; }
  double operator[](std::size_t i) const { return v[i]; }
};

// Discrete convolution with the Coulomb kernel stencil on a grid, via FFT
// (zero-padded to a circulant). The stencil uses the exact in-cell average
// on the diagonal and quadratured cell-pair averages on near offsets, which
// removes the dominant quadrature bias of the midpoint rule.
class Convolver {
 public:
  Convolver(const Grid& grid, const KernelSpec& spec);
  ~Convolver();
  Convolver(const Convolver&) = delete;
  Convolver& operator=(const Convolver&) = delete;

  // input: cell masses w_c; output: (sum_c' K(c - c') w_c') per cell
  std::vector<double> apply(const std::vector<double>& masses) const;

  double diagonal() const { return diag_; }

 private:
  struct Impl;
  std::unique_ptr<Impl> impl_;
  double diag_ = 0.0;
};

// In-cell kernel averages used by the stencil (exposed for tests):
// (1/h^{2d}) int_{C x C} g(x - y) dx dy for a cell of side h.
double cell_self_average(double h, const KernelSpec& spec);
// same for a pair of cells offset by (dx,dy,dz) in cell units
double cell_pair_average(double h, const std::array<int, 3>& offset, const KernelSpec& spec);

}  // namespace coulomb
