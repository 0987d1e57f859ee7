#pragma once

#include "abl/grid.hpp"

namespace abl {

/// Velocity components on the MAC grid: u on x-faces, v on y-faces, w on z-faces.
struct VelocityRef {
  const ScalarField& u;
  const ScalarField& v;
  const ScalarField& w;
};

/// Strain rate S_ij = (du_i/dx_j + du_j/dx_i)/2 interpolated to cell centers.
///
/// Diagonal components use the compact face differences, so the trace equals
/// the discrete divergence. Vertical derivatives of u and v are central in the
/// interior and one-sided second order in the bottom and top cells.
StrainTensorField strain_rate(const Grid& grid, VelocityRef vel);
void strain_rate(const Grid& grid, VelocityRef vel, StrainTensorField& out);

/// Discrete staggered divergence at cell centers.
ScalarField divergence(const Grid& grid, VelocityRef vel);
void divergence(const Grid& grid, VelocityRef vel, ScalarField& out);

/// Staggered gradient of a cell-centered scalar. The z component vanishes on
/// the bottom and top faces (impenetrable boundaries).
struct GradientField {
  ScalarField x, y, z;
};
GradientField gradient(const Grid& grid, const ScalarField& phi);

/// u -= grad(phi) in place, with the same stencil as `gradient`.
void subtract_gradient(const Grid& grid, const ScalarField& phi, ScalarField& u, ScalarField& v,
                       ScalarField& w);

/// d(profile)/dz at cell levels: central inside, one-sided second order at the ends.
Profile vertical_derivative(const Profile& f, double dz);

}  // namespace abl
