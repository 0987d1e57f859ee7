#include "abl/operators.hpp"

#include <cassert>

namespace abl {
namespace {

// d/dz of a cell-level column sampled at index k of nz levels.
inline double ddz_levels(const double* col, std::size_t stride, int k, int nz, double dz) {
  if (nz == 1) return 0.0;
  if (nz == 2) return (col[stride] - col[0]) / dz;
  if (k == 0) return (-3.0 * col[0] + 4.0 * col[stride] - col[2 * stride]) / (2.0 * dz);
  if (k == nz - 1) {
    const double* c = col + k * stride;
    return (3.0 * c[0] - 4.0 * c[-static_cast<std::ptrdiff_t>(stride)] +
            c[-2 * static_cast<std::ptrdiff_t>(stride)]) /
           (2.0 * dz);
  }
  const double* c = col + k * stride;
  return (c[stride] - c[-static_cast<std::ptrdiff_t>(stride)]) / (2.0 * dz);
}

}  // namespace

void strain_rate(const Grid& g, VelocityRef vel, StrainTensorField& out) {
  if (!out.xx.same_shape(ScalarField(g, Staggering::Center))) out = StrainTensorField(g);
  const int nx = g.nx, ny = g.ny, nz = g.nz;
  const std::size_t plane = g.plane_size();
  const double* u = vel.u.data();
  const double* v = vel.v.data();
  const double* w = vel.w.data();
  const double idx = 1.0 / g.dx, idy = 1.0 / g.dy, idz = 1.0 / g.dz;

#pragma omp parallel for schedule(static)
  for (int k = 0; k < nz; ++k) {
    for (int j = 0; j < ny; ++j) {
      const int jp = j + 1 < ny ? j + 1 : 0;
      const int jm = j > 0 ? j - 1 : ny - 1;
      for (int i = 0; i < nx; ++i) {
        const int ip = i + 1 < nx ? i + 1 : 0;
        const int im = i > 0 ? i - 1 : nx - 1;
        auto c = [&](int ii, int jj, int kk) {
          return (static_cast<std::size_t>(kk) * ny + jj) * nx + ii;
        };
        const std::size_t n = c(i, j, k);

        out.xx.data()[n] = (u[c(ip, j, k)] - u[n]) * idx;
        out.yy.data()[n] = (v[c(i, jp, k)] - v[n]) * idy;
        out.zz.data()[n] = (w[n + plane] - w[n]) * idz;

        // du/dy averaged over the two x-faces of the cell; dv/dx over the two y-faces.
        const double dudy = 0.25 * idy *
                            (u[c(i, jp, k)] - u[c(i, jm, k)] + u[c(ip, jp, k)] - u[c(ip, jm, k)]);
        const double dvdx = 0.25 * idx *
                            (v[c(ip, j, k)] - v[c(im, j, k)] + v[c(ip, jp, k)] - v[c(im, jp, k)]);
        out.xy.data()[n] = 0.5 * (dudy + dvdx);

        const double dudz = 0.5 * (ddz_levels(u + c(i, j, 0), plane, k, nz, g.dz) +
                                   ddz_levels(u + c(ip, j, 0), plane, k, nz, g.dz));
        const double dvdz = 0.5 * (ddz_levels(v + c(i, j, 0), plane, k, nz, g.dz) +
                                   ddz_levels(v + c(i, jp, 0), plane, k, nz, g.dz));
        auto wc = [&](int ii, int jj) {
          const std::size_t m = c(ii, jj, k);
          return 0.5 * (w[m] + w[m + plane]);
        };
        const double dwdx = 0.5 * idx * (wc(ip, j) - wc(im, j));
        const double dwdy = 0.5 * idy * (wc(i, jp) - wc(i, jm));
        out.xz.data()[n] = 0.5 * (dudz + dwdx);
        out.yz.data()[n] = 0.5 * (dvdz + dwdy);
      }
    }
  }
}

StrainTensorField strain_rate(const Grid& grid, VelocityRef vel) {
  StrainTensorField out(grid);
  strain_rate(grid, vel, out);
  return out;
}

void divergence(const Grid& g, VelocityRef vel, ScalarField& out) {
  if (!out.same_shape(ScalarField(g, Staggering::Center))) out = ScalarField(g, Staggering::Center);
  const int nx = g.nx, ny = g.ny, nz = g.nz;
  const std::size_t plane = g.plane_size();
  const double idx = 1.0 / g.dx, idy = 1.0 / g.dy, idz = 1.0 / g.dz;
  const double* u = vel.u.data();
  const double* v = vel.v.data();
  const double* w = vel.w.data();
  double* d = out.data();

#pragma omp parallel for schedule(static)
  for (int k = 0; k < nz; ++k) {
    for (int j = 0; j < ny; ++j) {
      const int jp = j + 1 < ny ? j + 1 : 0;
      for (int i = 0; i < nx; ++i) {
        const int ip = i + 1 < nx ? i + 1 : 0;
        const std::size_t n = (static_cast<std::size_t>(k) * ny + j) * nx + i;
        const std::size_t row = (static_cast<std::size_t>(k) * ny + j) * nx;
        const std::size_t rowp = (static_cast<std::size_t>(k) * ny + jp) * nx;
        d[n] = (u[row + ip] - u[n]) * idx + (v[rowp + i] - v[n]) * idy + (w[n + plane] - w[n]) * idz;
      }
    }
  }
}

ScalarField divergence(const Grid& grid, VelocityRef vel) {
  ScalarField out(grid, Staggering::Center);
  divergence(grid, vel, out);
  return out;
}

GradientField gradient(const Grid& g, const ScalarField& phi) {
  GradientField out{ScalarField(g, Staggering::XFace), ScalarField(g, Staggering::YFace),
                    ScalarField(g, Staggering::ZFace)};
  for (int k = 0; k < g.nz; ++k)
    for (int j = 0; j < g.ny; ++j)
      for (int i = 0; i < g.nx; ++i) {
        out.x(i, j, k) = (phi(i, j, k) - phi(g.wrap_x(i - 1), j, k)) / g.dx;
        out.y(i, j, k) = (phi(i, j, k) - phi(i, g.wrap_y(j - 1), k)) / g.dy;
        if (k > 0) out.z(i, j, k) = (phi(i, j, k) - phi(i, j, k - 1)) / g.dz;
      }
  return out;
}

void subtract_gradient(const Grid& g, const ScalarField& phi, ScalarField& u, ScalarField& v,
                       ScalarField& w) {
  const int nx = g.nx, ny = g.ny, nz = g.nz;
  const std::size_t plane = g.plane_size();
  const double idx = 1.0 / g.dx, idy = 1.0 / g.dy, idz = 1.0 / g.dz;
  const double* p = phi.data();

#pragma omp parallel for schedule(static)
  for (int k = 0; k < nz; ++k) {
    for (int j = 0; j < ny; ++j) {
      const int jm = j > 0 ? j - 1 : ny - 1;
      const std::size_t row = (static_cast<std::size_t>(k) * ny + j) * nx;
      const std::size_t rowm = (static_cast<std::size_t>(k) * ny + jm) * nx;
      for (int i = 0; i < nx; ++i) {
        const int im = i > 0 ? i - 1 : nx - 1;
        const std::size_t n = row + i;
        u.data()[n] -= (p[n] - p[row + im]) * idx;
        v.data()[n] -= (p[n] - p[rowm + i]) * idy;
        if (k > 0) w.data()[n] -= (p[n] - p[n - plane]) * idz;
      }
    }
  }
}

Profile vertical_derivative(const Profile& f, double dz) {
  const int n = static_cast<int>(f.size());
  Profile d(n, 0.0);
  for (int k = 0; k < n; ++k) d[k] = ddz_levels(f.data(), 1, k, n, dz);
  return d;
}

}  // namespace abl
