#pragma once

#include <cstddef>
#include <span>
#include <vector>

namespace abl {

/// Location of a field's samples within a MAC cell.
///
/// Center: scalars (theta, e, p). XFace: u. YFace: v. ZFace: w, which has
/// nz + 1 levels including the bottom and top boundary faces.
enum class Staggering { Center, XFace, YFace, ZFace };

/// Per-level vertical profile (one value per cell level or face level).
using Profile = std::vector<double>;

/// Uniform structured grid, periodic in x and y, bounded in z.
///
/// The lowest face sits at `z_bottom` (the wall-model offset height), the top
/// face at `lz`. All reported heights are absolute.
struct Grid {
  int nx = 0;
  int ny = 0;
  int nz = 0;
  double lx = 0.0;
  double ly = 0.0;
  double lz = 0.0;
  double z_bottom = 0.0;
  double dx = 0.0;
  double dy = 0.0;
  double dz = 0.0;
  double delta = 0.0;  ///< SGS filter width, cube root of the cell volume.

  /// Throws ConfigError on non-positive counts, extents or spacings.
  static Grid make(int nx, int ny, int nz, double lx, double ly, double lz,
                   double z_bottom = 0.0);

  std::size_t plane_size() const { return static_cast<std::size_t>(nx) * ny; }
  std::size_t cell_count() const { return plane_size() * nz; }
  int levels(Staggering s) const { return s == Staggering::ZFace ? nz + 1 : nz; }

  double x_face(int i) const { return i * dx; }
  double x_center(int i) const { return (i + 0.5) * dx; }
  double y_face(int j) const { return j * dy; }
  double y_center(int j) const { return (j + 0.5) * dy; }
  double z_face(int k) const { return z_bottom + k * dz; }
  double z_center(int k) const { return z_bottom + (k + 0.5) * dz; }

  /// Heights of the sample levels of a field with staggering `s`.
  Profile heights(Staggering s) const;

  int wrap_x(int i) const { return (i % nx + nx) % nx; }
  int wrap_y(int j) const { return (j % ny + ny) % ny; }

  bool operator==(const Grid&) const = default;
};

/// Dense 3-D field stored level-major (k, then j, then i fastest).
class ScalarField {
 public:
  ScalarField() = default;
  ScalarField(const Grid& grid, Staggering staggering, double value = 0.0);

  Staggering staggering() const { return staggering_; }
  int nx() const { return nx_; }
  int ny() const { return ny_; }
  int levels() const { return levels_; }
  std::size_t plane_size() const { return static_cast<std::size_t>(nx_) * ny_; }
  std::size_t size() const { return data_.size(); }

  std::size_t index(int i, int j, int k) const {
    return (static_cast<std::size_t>(k) * ny_ + j) * nx_ + i;
  }
  double& operator()(int i, int j, int k) { return data_[index(i, j, k)]; }
  double operator()(int i, int j, int k) const { return data_[index(i, j, k)]; }

  std::span<double> level(int k) { return {data_.data() + k * plane_size(), plane_size()}; }
  std::span<const double> level(int k) const {
    return {data_.data() + k * plane_size(), plane_size()};
  }

  double* data() { return data_.data(); }
  const double* data() const { return data_.data(); }
  std::vector<double>& values() { return data_; }
  const std::vector<double>& values() const { return data_; }

  void fill(double value);
  bool all_finite() const;
  bool same_shape(const ScalarField& other) const {
    return nx_ == other.nx_ && ny_ == other.ny_ && levels_ == other.levels_;
  }

  bool operator==(const ScalarField&) const = default;

 private:
  int nx_ = 0;
  int ny_ = 0;
  int levels_ = 0;
  Staggering staggering_ = Staggering::Center;
  std::vector<double> data_;
};

/// Resolved strain-rate tensor at cell centers (six independent components).
struct StrainTensorField {
  ScalarField xx, yy, zz, xy, xz, yz;

  StrainTensorField() = default;
  explicit StrainTensorField(const Grid& grid);

  /// S_ij S_ij at flat index n.
  double contraction(std::size_t n) const {
    const double a = xx.data()[n], b = yy.data()[n], c = zz.data()[n];
    const double d = xy.data()[n], e = xz.data()[n], f = yz.data()[n];
    return a * a + b * b + c * c + 2.0 * (d * d + e * e + f * f);
  }
};

/// Arithmetic mean over each horizontal plane.
Profile plane_average(const ScalarField& f);
void plane_average(const ScalarField& f, Profile& out);

}  // namespace abl
