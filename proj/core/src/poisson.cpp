#include "abl/poisson.hpp"

#include <fftw3.h>

#include <cmath>
#include <numbers>
#include <string>
#include <vector>

#include "abl/errors.hpp"

namespace abl {

void apply_laplacian(const Grid& g, const ScalarField& p, ScalarField& out) {
  if (!out.same_shape(p)) out = ScalarField(g, Staggering::Center);
  const double ix2 = 1.0 / (g.dx * g.dx), iy2 = 1.0 / (g.dy * g.dy), iz2 = 1.0 / (g.dz * g.dz);
  for (int k = 0; k < g.nz; ++k)
    for (int j = 0; j < g.ny; ++j)
      for (int i = 0; i < g.nx; ++i) {
        const double c = p(i, j, k);
        double lap = (p(g.wrap_x(i + 1), j, k) - 2.0 * c + p(g.wrap_x(i - 1), j, k)) * ix2 +
                     (p(i, g.wrap_y(j + 1), k) - 2.0 * c + p(i, g.wrap_y(j - 1), k)) * iy2;
        if (k + 1 < g.nz) lap += (p(i, j, k + 1) - c) * iz2;
        if (k > 0) lap -= (c - p(i, j, k - 1)) * iz2;
        out(i, j, k) = lap;
      }
}

ScalarField apply_laplacian(const Grid& grid, const ScalarField& p) {
  ScalarField out(grid, Staggering::Center);
  apply_laplacian(grid, p, out);
  return out;
}

struct PoissonSolver::Impl {
  Grid grid;
  int nxh = 0;
  std::size_t modes = 0;
  double* real = nullptr;
  fftw_complex* spec = nullptr;
  fftw_plan forward = nullptr;
  fftw_plan backward = nullptr;
  std::vector<double> kx2, ky2;
  // Thomas coefficients per (level, mode): c' and 1/denominator.
  std::vector<double> cprime, inv;

  explicit Impl(const Grid& g) : grid(g) {
    const int nx = g.nx, ny = g.ny, nz = g.nz;
    nxh = nx / 2 + 1;
    modes = static_cast<std::size_t>(ny) * nxh;
    real = fftw_alloc_real(static_cast<std::size_t>(nz) * ny * nx);
    spec = fftw_alloc_complex(static_cast<std::size_t>(nz) * modes);
    const int n[2] = {ny, nx};
    // FFTW_ESTIMATE keeps plan selection, and therefore rounding, reproducible.
    forward = fftw_plan_many_dft_r2c(2, n, nz, real, nullptr, 1, ny * nx, spec, nullptr, 1,
                                     static_cast<int>(modes), FFTW_ESTIMATE);
    backward = fftw_plan_many_dft_c2r(2, n, nz, spec, nullptr, 1, static_cast<int>(modes), real,
                                      nullptr, 1, ny * nx, FFTW_ESTIMATE);

    const double pi = std::numbers::pi;
    kx2.resize(nxh);
    for (int m = 0; m < nxh; ++m) {
      const double s = 2.0 * std::sin(pi * m / nx) / g.dx;
      kx2[m] = s * s;
    }
    ky2.resize(ny);
    for (int m = 0; m < ny; ++m) {
      const double s = 2.0 * std::sin(pi * m / ny) / g.dy;
      ky2[m] = s * s;
    }

    const double dz2 = g.dz * g.dz;
    cprime.assign(static_cast<std::size_t>(nz) * modes, 0.0);
    inv.assign(static_cast<std::size_t>(nz) * modes, 0.0);
    for (int jm = 0; jm < ny; ++jm)
      for (int im = 0; im < nxh; ++im) {
        const std::size_t mode = static_cast<std::size_t>(jm) * nxh + im;
        const double lam = (kx2[im] + ky2[jm]) * dz2;
        const bool singular = im == 0 && jm == 0;
        auto diag = [&](int k) {
          if (nz == 1) return -lam;
          const double ends = (k == 0 || k == nz - 1) ? 1.0 : 2.0;
          return -(ends + lam);
        };
        double cp_prev = 0.0;
        for (int k = 0; k < nz; ++k) {
          const std::size_t at = static_cast<std::size_t>(k) * modes + mode;
          if (singular && k == 0) {
            // Pin p_0 = 0 for the horizontally uniform mode; the dropped
            // equation is implied by compatibility.
            inv[at] = 1.0;
            cprime[at] = 0.0;
            cp_prev = 0.0;
            continue;
          }
          const double denom = diag(k) - (k > 0 ? cp_prev : 0.0);
          inv[at] = 1.0 / denom;
          cprime[at] = (k + 1 < nz) ? inv[at] : 0.0;
          cp_prev = cprime[at];
        }
      }
  }

  ~Impl() {
    if (forward) fftw_destroy_plan(forward);
    if (backward) fftw_destroy_plan(backward);
    fftw_free(real);
    fftw_free(spec);
  }
};

void remove_domain_mean(ScalarField& f) {
  double sum = 0.0;
  for (double x : f.values()) sum += x;
  const double mean = sum / static_cast<double>(f.size());
  for (double& x : f.values()) x -= mean;
}

PoissonSolver::PoissonSolver(const Grid& grid) : impl_(std::make_unique<Impl>(grid)) {}
PoissonSolver::~PoissonSolver() = default;
PoissonSolver::PoissonSolver(PoissonSolver&&) noexcept = default;
PoissonSolver& PoissonSolver::operator=(PoissonSolver&&) noexcept = default;

const Grid& PoissonSolver::grid() const { return impl_->grid; }
double PoissonSolver::kx2(int m) const { return impl_->kx2.at(m); }
double PoissonSolver::ky2(int m) const { return impl_->ky2.at(m); }

void PoissonSolver::solve(const ScalarField& rhs, ScalarField& p) {
  Impl& s = *impl_;
  const Grid& g = s.grid;
  const int nz = g.nz;
  const std::size_t modes = s.modes;
  const std::size_t total = g.cell_count();

  double sum = 0.0, l1 = 0.0;
  for (std::size_t n = 0; n < total; ++n) {
    sum += rhs.data()[n];
    l1 += std::abs(rhs.data()[n]);
  }
  if (std::abs(sum) > 1e-10 * l1)
    throw IncompatibleRhs("poisson: rhs integral " + std::to_string(sum) + " vs L1 norm " +
                          std::to_string(l1));

  std::copy(rhs.data(), rhs.data() + total, s.real);
  fftw_execute(s.forward);

  const double dz2 = g.dz * g.dz;
  auto* c = reinterpret_cast<std::complex<double>*>(s.spec);
  // Forward sweep, all modes of a level at once.
  for (int k = 0; k < nz; ++k) {
    std::complex<double>* row = c + static_cast<std::size_t>(k) * modes;
    const std::complex<double>* prev = row - modes;
    const double* inv = s.inv.data() + static_cast<std::size_t>(k) * modes;
    for (std::size_t m = 0; m < modes; ++m) {
      std::complex<double> d = row[m] * dz2;
      if (k > 0) d -= prev[m];
      row[m] = d * inv[m];
    }
    if (k == 0) row[0] = 0.0;  // pinned level of the uniform mode
  }
  for (int k = nz - 2; k >= 0; --k) {
    std::complex<double>* row = c + static_cast<std::size_t>(k) * modes;
    const std::complex<double>* next = row + modes;
    const double* cp = s.cprime.data() + static_cast<std::size_t>(k) * modes;
    for (std::size_t m = 0; m < modes; ++m) row[m] -= cp[m] * next[m];
  }
  // Zero domain mean.
  std::complex<double> mean = 0.0;
  for (int k = 0; k < nz; ++k) mean += c[static_cast<std::size_t>(k) * modes];
  mean /= static_cast<double>(nz);
  for (int k = 0; k < nz; ++k) c[static_cast<std::size_t>(k) * modes] -= mean;

  fftw_execute(s.backward);
  if (!p.same_shape(rhs)) p = ScalarField(g, Staggering::Center);
  const double norm = 1.0 / static_cast<double>(g.plane_size());
  for (std::size_t n = 0; n < total; ++n) p.data()[n] = s.real[n] * norm;
}

ScalarField PoissonSolver::solve(const ScalarField& rhs) {
  ScalarField p(impl_->grid, Staggering::Center);
  solve(rhs, p);
  return p;
}

}  // namespace abl
