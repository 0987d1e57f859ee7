#pragma once

#include <complex>
#include <memory>

#include "abl/grid.hpp"

namespace abl {

/// Discrete Laplacian div(grad p) on cell centers with homogeneous Neumann
/// conditions at the bottom and top; identical to the operator inverted by
/// PoissonSolver.
void apply_laplacian(const Grid& grid, const ScalarField& p, ScalarField& out);
ScalarField apply_laplacian(const Grid& grid, const ScalarField& p);

/// Subtracts the domain mean. Divergence fields of velocities with
/// impenetrable lids integrate to zero analytically; this removes the
/// round-off left by the telescoping sum before a solve.
void remove_domain_mean(ScalarField& f);

/// Direct pressure solver: 2-D real FFT in the periodic directions, one
/// tridiagonal (Thomas) solve in z per horizontal wavenumber.
///
/// Uses modified wavenumbers 4 sin^2(pi m / n) / h^2, so the solve inverts the
/// staggered divergence-of-gradient exactly. The result has zero domain mean.
class PoissonSolver {
 public:
  explicit PoissonSolver(const Grid& grid);
  ~PoissonSolver();
  PoissonSolver(PoissonSolver&&) noexcept;
  PoissonSolver& operator=(PoissonSolver&&) noexcept;
  PoissonSolver(const PoissonSolver&) = delete;
  PoissonSolver& operator=(const PoissonSolver&) = delete;

  /// Throws IncompatibleRhs when the domain integral of `rhs` is not zero
  /// relative to its L1 norm (tolerance 1e-10).
  void solve(const ScalarField& rhs, ScalarField& p);
  ScalarField solve(const ScalarField& rhs);

  const Grid& grid() const;
  /// Modified wavenumber squared for x index m (0 <= m <= nx/2) and y index.
  double kx2(int m) const;
  double ky2(int m) const;

 private:
  struct Impl;
  std::unique_ptr<Impl> impl_;
};

}  // namespace abl
