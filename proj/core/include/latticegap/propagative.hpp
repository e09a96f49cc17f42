#pragma once

#include <cstddef>
#include <string>
#include <vector>

#include "latticegap/interval_set.hpp"
#include "latticegap/lattice_model.hpp"

namespace latticegap {

struct ProjectionOptions {
  std::size_t grid = 64;     ///< initial samples per k axis (>= 64)
  double tol = 1e-8;         ///< accepted change of every edge between two grids
  int max_refinements = 5;   ///< grid doublings before NonConvergence
};

/// Sorted frequencies sqrt(lambda) of the pencil (-L(k), M); one per node.
/// Slightly negative eigenvalues (rounding) are clipped to 0; anything below -1e-9
/// throws SpecError (the cell is not a stable mass-spring network).
std::vector<double> propagative_branches(const LatticeSpec& spec, Wavevector k);

/// Same, reusing a k2-slice assembled once for fixed k1.
std::vector<double> propagative_branches(const BlochSliceK2& slice, const Eigen::VectorXd& mass,
                                         double k2);

/// I_p(k1): per branch the min/max over k2, merged. Grid samples are polished
/// with a bracketed Brent minimisation and the grid is doubled until no edge
/// moves by more than `tol`.
IntervalSet propagative_projection_k1(const LatticeSpec& spec, double k1,
                                      const ProjectionOptions& options = {});

/// I_p over the whole Brillouin zone.
IntervalSet propagative_projection_full(const LatticeSpec& spec,
                                        const ProjectionOptions& options = {});

/// Sampled Floquet branches on a uniform grid.
struct DispersionTable {
  std::size_t grid1 = 0;
  std::size_t grid2 = 0;
  std::string spec_hash;
  std::vector<Wavevector> axis;               ///< grid points, k1-major
  std::vector<std::vector<double>> branches;  ///< sorted omegas per grid point
};

/// Grid k_j = -pi + 2 pi j / (grid - 1), j = 0..grid-1 on each axis (both
/// zone edges included).
DispersionTable dispersion_table(const LatticeSpec& spec, std::size_t grid1, std::size_t grid2);

// Homogeneous square lattice (one node per cell) in closed form.
double uniform_omega_p(Wavevector k, double mass = 1.0);
IntervalSet uniform_projection_k1(double k1);

}  // namespace latticegap
