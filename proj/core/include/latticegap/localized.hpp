#pragma once

#include <cstddef>
#include <optional>
#include <string>
#include <vector>

#include "latticegap/guided.hpp"
#include "latticegap/interval_set.hpp"
#include "latticegap/lattice_model.hpp"
#include "latticegap/mode_result.hpp"

namespace latticegap {

/// Frequency axis split into I_p, I_g and the gaps left over in [0, omega_max].
struct GapStructure {
  IntervalSet i_p;
  IntervalSet i_g;
  IntervalSet gaps;
  double omega_max = 0.0;
  bool tail = false;  ///< the last gap is the unbounded one, cut at omega_max
};

struct LocalizedOptions {
  double tol = 1e-10;            ///< kernel tolerance; k1 gets tol/sqrt(10), k2 tol/10
  double guard = 1e-9;
  double edge_margin = 1e-8;     ///< distance from gap edges where the root scan starts
  std::size_t scan_points = 64;  ///< multi-node cells only; one-node cells are monotone
  std::size_t max_scan_points = 1024;
  double root_tol = 1e-10;
  double realness_gate = 1e-6;
  double asymptotic_tol = 1e-6;  ///< tail scan stops once |D_loc - D_loc(inf)| is below this
  double min_gap_width = 1e-8;   ///< narrower gaps count as closed
  GuidedOptions guided{};
};

struct LocalizedKernel {
  double omega = 0.0;
  Eigen::MatrixXcd matrix;   ///< <L_g^-1 <L_p^-1>_2>_1
  double outer_error = 0.0;
  double inner_error = 0.0;  ///< worst k2 quadrature change
  std::size_t points = 0;    ///< k1 samples
};

/// Throws SpectrumViolation unless omega lies in one of gaps.gaps by more
/// than the guard.
LocalizedKernel localized_kernel(const LatticeSpec& spec, double omega, const GapStructure& gaps,
                                 double tol = 1e-10);
LocalizedKernel localized_kernel_unchecked(const LatticeSpec& spec, double omega,
                                           double tol = 1e-10);

struct DLoc {
  cplx value;
  double realness = 0.0;
};

/// det(I + omega^2 kernel M2); exactly 1 without a point defect.
DLoc d_loc(const LatticeSpec& spec, double omega, const GapStructure& gaps, double tol = 1e-10);
DLoc d_loc_unchecked(const LatticeSpec& spec, double omega, double tol = 1e-10);

/// Limit of D_loc as omega -> infinity: prod_n (1 + M2_n / (M_n + M1_n)).
double d_loc_at_infinity(const LatticeSpec& spec);

/// D1(omega) for the homogeneous lattice (M = 1) with strip increment m1, by
/// periodic trapezoid quadrature over k1. Requires omega outside I_p u I_g.
double d1(double omega, double m1, double tol = 1e-11);

/// D1 at the top of the propagative band, from the finite integral over
/// [0, pi] with the kink at pi removed. +inf for m1 = 0; DomainError when
/// 2 sqrt 2 lies inside I_g (m1 in [-1/sqrt 2, 0)).
double d1_at_band_top(double m1, double tol = 1e-12);

/// omega_max <= 0 picks frequency_bound(spec, true, true).
GapStructure gap_structure(const LatticeSpec& spec, double omega_max = 0.0,
                           const LocalizedOptions& options = {});

/// Closed-form gap structure of the homogeneous example.
GapStructure uniform_gap_structure(double m1, double omega_max);

struct LocalizedModes {
  GapStructure gaps;
  std::vector<ModeResult> modes;
  std::vector<double> rejected;   ///< sign changes failing the realness gate
  std::vector<double> tail_scan;  ///< upper end used for the tail gap (empty without one)
  /// Slivers next to gap edges left unscanned because the nested quadrature
  /// could not reach the tolerance there (it degrades next to I_g edges).
  std::vector<Interval> unresolved;
};

LocalizedModes localized_modes(const LatticeSpec& spec, const LocalizedOptions& options = {});

/// Same search on a precomputed gap structure.
LocalizedModes localized_modes(const LatticeSpec& spec, const GapStructure& gaps,
                               const LocalizedOptions& options = {});

enum class ExistenceCase {
  kTwoGaps,               ///< -1 < m1 < -1/sqrt 2
  kOneGapAboveGuided,     ///< -1/sqrt 2 <= m1 <= 0
  kOneGapAbovePropagative ///< m1 > 0
};

std::string to_string(ExistenceCase c);

struct GapVerdict {
  std::string name;  ///< "G1", "G2" or "G"
  Interval gap;      ///< hi = +inf for the unbounded gap
  int modes = 0;     ///< 0 or 1
};

struct ExistenceReport {
  ExistenceCase case_id = ExistenceCase::kOneGapAbovePropagative;
  std::vector<GapVerdict> gaps;
  std::optional<double> threshold;       ///< -1 / D1(2 sqrt 2) where it enters
  std::optional<double> d1_band_top;

  int total_modes() const;
};

/// Decision table for the homogeneous lattice with a strip (1 + m1) and a
/// point inclusion (1 + m1 + m2); no root search involved.
ExistenceReport classify_existence(double m1, double m2);

/// Largest point mass Mbar = 1 + m1 + m2 for which a localized mode exists,
/// as a function of the strip mass m_tilde = 1 + m1. Equals
/// m_tilde - 1 / D1(2 sqrt 2) outside m1 in [-1/sqrt 2, 0] and m_tilde inside.
double region_boundary(double m_tilde);

}  // namespace latticegap
