#pragma once

#include "latticegap/lattice_model.hpp"
#include "latticegap/mode_result.hpp"

namespace latticegap {

struct ReconstructionOptions {
  int window1 = 21;                ///< cells along e1 (odd)
  int window2 = 21;                ///< cells along e2 (odd)
  std::size_t grid = 256;          ///< initial k samples per axis
  std::size_t max_grid = 4096;
  double shape_tol = 1e-6;         ///< max change of the unit-peak shape between grids
  double null_tol = 1e-6;          ///< relative singular value accepted as zero
  double tol = 1e-10;              ///< resolvent quadrature tolerance
};

/// Real-space guided mode at (k1, omega_g): the null vector of L_g gives
/// <u>_2, u(k2) = -omega^2 L_p^-1 M1 <u>_2 is synthesized over k2, and the
/// field along e1 is u(r1 + 1) = e^{-i k1} u(r1). decay_rate_y is fitted
/// per cell away from the strip; decay_rate_x is 0.
ModeResult reconstruct_guided_mode(const LatticeSpec& spec, double k1, double omega_g,
                                   const ReconstructionOptions& options = {});

/// Real-space localized mode at a root of D_loc, synthesized on a uniform
/// k grid (doubled until the shape settles). Throws DomainError when omega
/// is not a simple root (smallest singular value not small, or more than
/// one small).
ModeResult reconstruct_localized_mode(const LatticeSpec& spec, double omega_loc,
                                      const ReconstructionOptions& options = {});

/// Exponential fit log a(d) = c - rate d for d = 1..count of cell maxima
/// a(d) > 1e-10 max a; returns {rate, r2}.
std::pair<double, double> fit_decay(const std::vector<double>& amplitudes);

}  // namespace latticegap
