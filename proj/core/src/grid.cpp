#include "abl/grid.hpp"

#include <algorithm>
#include <cmath>

#include "abl/errors.hpp"

namespace abl {

Grid Grid::make(int nx, int ny, int nz, double lx, double ly, double lz, double z_bottom) {
  if (nx <= 0) throw ConfigError("grid.nx", "must be positive");
  if (ny <= 0) throw ConfigError("grid.ny", "must be positive");
  if (nz <= 0) throw ConfigError("grid.nz", "must be positive");
  if (!(lx > 0.0)) throw ConfigError("grid.lx", "must be positive");
  if (!(ly > 0.0)) throw ConfigError("grid.ly", "must be positive");
  if (!(z_bottom >= 0.0)) throw ConfigError("wall.z1_plus", "bottom height must be non-negative");
  if (!(lz > z_bottom)) throw ConfigError("grid.lz", "must exceed the bottom face height");

  Grid g;
  g.nx = nx;
  g.ny = ny;
  g.nz = nz;
  g.lx = lx;
  g.ly = ly;
  g.lz = lz;
  g.z_bottom = z_bottom;
  g.dx = lx / nx;
  g.dy = ly / ny;
  g.dz = (lz - z_bottom) / nz;
  g.delta = std::cbrt(g.dx * g.dy * g.dz);
  return g;
}

Profile Grid::heights(Staggering s) const {
  Profile z(levels(s));
  for (int k = 0; k < static_cast<int>(z.size()); ++k)
    z[k] = s == Staggering::ZFace ? z_face(k) : z_center(k);
  return z;
}

ScalarField::ScalarField(const Grid& grid, Staggering staggering, double value)
    : nx_(grid.nx),
      ny_(grid.ny),
      levels_(grid.levels(staggering)),
      staggering_(staggering),
      data_(static_cast<std::size_t>(grid.nx) * grid.ny * grid.levels(staggering), value) {}

void ScalarField::fill(double value) { std::fill(data_.begin(), data_.end(), value); }

bool ScalarField::all_finite() const {
  return std::all_of(data_.begin(), data_.end(), [](double x) { return std::isfinite(x); });
}

StrainTensorField::StrainTensorField(const Grid& grid)
    : xx(grid, Staggering::Center),
      yy(grid, Staggering::Center),
      zz(grid, Staggering::Center),
      xy(grid, Staggering::Center),
      xz(grid, Staggering::Center),
      yz(grid, Staggering::Center) {}

void plane_average(const ScalarField& f, Profile& out) {
  out.assign(f.levels(), 0.0);
  const double inv = 1.0 / static_cast<double>(f.plane_size());
  for (int k = 0; k < f.levels(); ++k) {
    double sum = 0.0;
    for (double x : f.level(k)) sum += x;
    out[k] = sum * inv;
  }
}

Profile plane_average(const ScalarField& f) {
  Profile out;
  plane_average(f, out);
  return out;
}

}  // namespace abl
