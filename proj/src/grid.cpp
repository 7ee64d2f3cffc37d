#include "coulomb/grid.hpp"

#include <fftw3.h>

#include <cmath>
#include <complex>
#include <cstring>

namespace coulomb {
namespace {

// unit-cell constants: (1/h^{2d}) integral of g over C x C equals
// -log h + A_d (log case) or A_3 / h (d = 3)
constexpr double kLogSelfUnit1d = 1.5;                     // int_{[0,1]^2} -log|x-y|
constexpr double kLogSelfUnit2d = 0.80508672195008715;     // unit square, -log
constexpr double kInvSelfUnit3d = 1.88231264438966;        // unit cube, 1/r

// 12-point Gauss-Legendre on [0,1]
const double kGlx[12] = {0.009219682876640378, 0.047941371814762571, 0.115048662902847656,
                         0.206341022856691276, 0.316084250500909903, 0.437383295744265542,
                         0.562616704255734458, 0.683915749499090097, 0.793658977143308724,
                         0.884951337097152344, 0.952058628185237429, 0.990780317123359622};
const double kGlw[12] = {0.023587668193255914, 0.053469662997659215, 0.080039164271673113,
                         0.101583713361532960, 0.116746268269177404, 0.124573522906701393,
                         0.124573522906701393, 0.116746268269177404, 0.101583713361532960,
                         0.080039164271673113, 0.053469662997659215, 0.023587668193255914};

// nodes and triangle-weighted weights for averaging over the difference of
// two cells: t in [-h, h] with density (1 - |t|/h)/h, split at the kink
void difference_nodes(double h, std::vector<double>& t, std::vector<double>& w) {
  t.clear();
  w.clear();
  for (int side = 0; side < 2; ++side) {
    for (int i = 0; i < 12; ++i) {
      double u = kGlx[i] * h;  // in [0, h]
      double tt = side == 0 ? -u : u;
      double ww = kGlw[i] * h * (1.0 - u / h) / h;  // integrates to 1/2 per side
      t.push_back(tt);
      w.push_back(ww);
    }
  }
}

}  // namespace

Grid Grid::box(int dim, double low, double high, double h) {
  Grid g;
  g.dim = dim;
  g.h = h;
  int cells = static_cast<int>(std::lround((high - low) / h));
  for (int d = 0; d < dim; ++d) {
    g.n[d] = cells;
    g.lo[d] = low;
  }
  return g;
}

double cell_self_average(double h, const KernelSpec& spec) {
  if (spec.log_kernel)
    return -std::log(h) + (spec.dim == 1 ? kLogSelfUnit1d : kLogSelfUnit2d);
  if (spec.dim == 3) return kInvSelfUnit3d / h;
  throw domain_error("cell_self_average: only d <= 3 grids are supported");
}

double cell_pair_average(double h, const std::array<int, 3>& offset, const KernelSpec& spec) {
  std::vector<double> t, w;
  difference_nodes(h, t, w);
  int d = spec.dim;
  double ox = offset[0] * h, oy = offset[1] * h, oz = offset[2] * h;
  double acc = 0.0;
  if (d == 1) {
    for (std::size_t a = 0; a < t.size(); ++a) acc += w[a] * kernel_value(std::fabs(ox + t[a]), spec);
  } else if (d == 2) {
    for (std::size_t a = 0; a < t.size(); ++a)
      for (std::size_t b = 0; b < t.size(); ++b) {
        double dx = ox + t[a], dy = oy + t[b];
        acc += w[a] * w[b] * kernel_value(std::sqrt(dx * dx + dy * dy), spec);
      }
  } else {
    for (std::size_t a = 0; a < t.size(); ++a)
      for (std::size_t b = 0; b < t.size(); ++b)
        for (std::size_t c = 0; c < t.size(); ++c) {
          double dx = ox + t[a], dy = oy + t[b], dz = oz + t[c];
          acc += w[a] * w[b] * w[c] * kernel_value(std::sqrt(dx * dx + dy * dy + dz * dz), spec);
        }
  }
  return acc;
}

struct Convolver::Impl {
  Grid grid;
  std::array<int, 3> N{1, 1, 1};  // padded dims
  std::size_t padded = 1;
  std::vector<std::complex<double>> khat;
  fftw_plan fwd = nullptr, inv = nullptr;
  fftw_complex* buf = nullptr;

  ~Impl() {
    if (fwd) fftw_destroy_plan(fwd);
    if (inv) fftw_destroy_plan(inv);
    if (buf) fftw_free(buf);
  }
};

Convolver::Convolver(const Grid& grid, const KernelSpec& spec) : impl_(new Impl) {
  Impl& im = *impl_;
  im.grid = grid;
  for (int d = 0; d < grid.dim; ++d) im.N[d] = 2 * grid.n[d];
  im.padded = static_cast<std::size_t>(im.N[0]) * im.N[1] * im.N[2];

  // near-field radius in cells: offsets closer than this get the
  // cell-pair-averaged kernel instead of the midpoint value
  int near = grid.dim == 3 ? 1 : 3;

  std::vector<std::complex<double>> stencil(im.padded, 0.0);
  auto wrap = [](int d, int N) { return d >= 0 ? d : d + N; };
  int nz = grid.dim > 2 ? grid.n[2] : 1;
  int ny = grid.dim > 1 ? grid.n[1] : 1;
  for (int dz = -(grid.dim > 2 ? nz - 1 : 0); dz <= (grid.dim > 2 ? nz - 1 : 0); ++dz)
    for (int dy = -(grid.dim > 1 ? ny - 1 : 0); dy <= (grid.dim > 1 ? ny - 1 : 0); ++dy)
      for (int dx = -(grid.n[0] - 1); dx <= grid.n[0] - 1; ++dx) {
        double val;
        int amax = std::max(std::abs(dx), std::max(std::abs(dy), std::abs(dz)));
        if (amax == 0)
          val = cell_self_average(grid.h, spec);
        else if (amax <= near)
          val = cell_pair_average(grid.h, {dx, dy, dz}, spec);
        else {
          double r = grid.h * std::sqrt(double(dx) * dx + double(dy) * dy + double(dz) * dz);
          val = kernel_value(r, spec);
        }
        std::size_t idx =
            (static_cast<std::size_t>(wrap(dz, im.N[2])) * im.N[1] + wrap(dy, im.N[1])) * im.N[0] +
            wrap(dx, im.N[0]);
        stencil[idx] = val;
      }
  diag_ = cell_self_average(grid.h, spec);

  im.buf = fftw_alloc_complex(im.padded);
  int rank = grid.dim;
  // fftw wants slowest-varying first
  int dims[3] = {im.N[2], im.N[1], im.N[0]};
  int* dp = dims + (3 - rank);
  im.fwd = fftw_plan_dft(rank, dp, im.buf, im.buf, FFTW_FORWARD, FFTW_ESTIMATE);
  im.inv = fftw_plan_dft(rank, dp, im.buf, im.buf, FFTW_BACKWARD, FFTW_ESTIMATE);

  std::memcpy(im.buf, stencil.data(), sizeof(fftw_complex) * im.padded);
  fftw_execute(im.fwd);
  im.khat.assign(reinterpret_cast<std::complex<double>*>(im.buf),
                 reinterpret_cast<std::complex<double>*>(im.buf) + im.padded);
}

Convolver::~Convolver() = default;

std::vector<double> Convolver::apply(const std::vector<double>& masses) const {
  const Impl& im = *impl_;
  const Grid& g = im.grid;
  std::memset(im.buf, 0, sizeof(fftw_complex) * im.padded);
  int ny = g.dim > 1 ? g.n[1] : 1, nz = g.dim > 2 ? g.n[2] : 1;
  for (int k = 0; k < nz; ++k)
    for (int j = 0; j < ny; ++j)
      for (int i = 0; i < g.n[0]; ++i) {
        std::size_t src = (static_cast<std::size_t>(k) * ny + j) * g.n[0] + i;
        std::size_t dst = (static_cast<std::size_t>(k) * im.N[1] + j) * im.N[0] + i;
        im.buf[dst][0] = masses[src];
      }
  fftw_execute(im.fwd);
  auto* c = reinterpret_cast<std::complex<double>*>(im.buf);
  double scale = 1.0 / static_cast<double>(im.padded);
  for (std::size_t i = 0; i < im.padded; ++i) c[i] *= im.khat[i] * scale;
  fftw_execute(im.inv);
  std::vector<double> out(g.cells());
  for (int k = 0; k < nz; ++k)
    for (int j = 0; j < ny; ++j)
      for (int i = 0; i < g.n[0]; ++i) {
        std::size_t dst = (static_cast<std::size_t>(k) * ny + j) * g.n[0] + i;
        std::size_t src = (static_cast<std::size_t>(k) * im.N[1] + j) * im.N[0] + i;
        out[dst] = im.buf[src][0];
      }
  return out;
}

}  // namespace coulomb
