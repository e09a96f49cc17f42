#pragma once

#include <cstddef>
#include <string>
#include <vector>

#include <Eigen/Sparse>

#include "latticegap/lattice_model.hpp"
#include "latticegap/localized.hpp"

namespace latticegap {

/// A width x height block of nodes cut out of the perturbed lattice with a
/// clamped (zero displacement) frame. Cell (0, 0), which carries the point
/// defect, sits in the middle; the strip is the cell row r2 = 0.
struct FiniteLattice {
  int width = 0;
  int height = 0;
  int origin_x = 0;  ///< column of node (0, 0) of cell (0, 0)
  int origin_y = 0;
  Eigen::VectorXd mass;
  Eigen::SparseMatrix<double> stiffness;  ///< graph Laplacian plus wall springs

  int index(int x, int y) const { return y * width + x; }
  int size() const { return width * height; }
};

FiniteLattice build_finite_lattice(const LatticeSpec& spec, int width, int height);

struct OracleOptions {
  int width = 61;
  int height = 61;
  double pr_threshold = 0.05;
  double boundary_tol = 1e-6;
  double eig_tol = 1e-13;  ///< relative bisection width on omega^2
  unsigned seed = 12345;   ///< start vectors of the inverse iteration
};

struct OracleMode {
  double omega = 0.0;
  std::size_t gap = 0;
  double participation_ratio = 0.0;  ///< 1 / (N sum u^4) for sum u^2 = 1
  double boundary_ratio = 0.0;       ///< max |u| on the frame / max |u|
  bool candidate = false;            ///< participation_ratio < pr_threshold
  Eigen::VectorXd vector;            ///< displacement, max |u| = 1, positive at the max
};

struct OracleReport {
  int width = 0;
  int height = 0;
  std::vector<OracleMode> in_gaps;  ///< every finite eigenfrequency inside a gap
  std::vector<std::string> warnings;

  std::vector<OracleMode> candidates() const;
};

/// Eigenfrequencies of the finite generalized problem K u = omega^2 M u that
/// fall in the gaps of the infinite lattice, counted by Sylvester inertia of
/// K - sigma M and isolated by bisection.
OracleReport finite_oracle(const LatticeSpec& spec, const GapStructure& gaps,
                           const OracleOptions& options = {});
OracleReport finite_oracle(const LatticeSpec& spec, const OracleOptions& options = {});

/// Number of eigenvalues of K u = lambda M u below sigma.
int eigenvalues_below(const FiniteLattice& lattice, double sigma);

}  // namespace latticegap
