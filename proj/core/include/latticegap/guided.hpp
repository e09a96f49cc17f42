#pragma once

#include <cstddef>
#include <optional>
#include <vector>

#include "latticegap/interval_set.hpp"
#include "latticegap/lattice_model.hpp"
#include "latticegap/propagative.hpp"
#include "latticegap/quadrature.hpp"

namespace latticegap {

/// Mean over k2 of the inverse of L_p(omega, k1, k2) = L(k) + omega^2 M.
struct AveragedResolvent {
  double omega = 0.0;
  double k1 = 0.0;
  Eigen::MatrixXcd matrix;
  double quad_error = 0.0;
  std::size_t points = 0;
  bool converged = true;  ///< false only when the options allowed stopping at the cap
};

struct GuidedOptions {
  double tol = 1e-10;               ///< resolvent quadrature tolerance
  double guard = 1e-9;              ///< exclusion margin around I_p(k1)
  std::size_t scan_points = 128;    ///< initial sign-scan grid per search interval
  std::size_t max_scan_points = 4096;
  double root_tol = 1e-10;          ///< bracket width at which bisection stops
  double realness_gate = 1e-6;      ///< max |Im det| / (1 + |Re det|) of an accepted root
  ProjectionOptions projection{};

  // guided_projection only
  std::size_t sweep_grid = 32;      ///< initial number of k1 samples
  double edge_tol = 1e-8;
  int max_refinements = 4;
};

/// Checks omega against I_p(k1) (guard 1e-9) first; throws SpectrumViolation
/// inside the band.
AveragedResolvent averaged_resolvent_k2(const LatticeSpec& spec, double omega, double k1,
                                        double tol = 1e-10);

/// No band check. Only for callers that already know omega lies in a gap of
/// I_p(k1); inside the band the trapezoid sums do not mean anything.
AveragedResolvent averaged_resolvent_k2_unchecked(const LatticeSpec& spec, double omega,
                                                  double k1, const QuadratureOptions& options);

struct GuidedDet {
  cplx value;
  double realness = 0.0;  ///< |Im| / (1 + |Re|)
  bool converged = true;
};

/// det(I + omega^2 <L_p^-1>_2 M1).
GuidedDet guided_det(const LatticeSpec& spec, double omega, double k1, double tol = 1e-10);
GuidedDet guided_det_unchecked(const LatticeSpec& spec, double omega, double k1,
                               const QuadratureOptions& options);

struct GuidedRoot {
  double omega = 0.0;
  double realness = 0.0;
  std::size_t component = 0;  ///< index into GuidedSpectrum::search
};

struct GuidedSpectrum {
  double k1 = 0.0;
  IntervalSet band;    ///< I_p(k1)
  IntervalSet search;  ///< guarded search intervals actually scanned
  std::vector<GuidedRoot> roots;
  std::vector<double> rejected;        ///< sign changes failing the realness gate
  std::vector<Interval> unresolved;    ///< stretches where the quadrature gave up
};

/// Roots of Re det L_g in each interval of `search`. Endpoints closer than
/// the guard to I_p(k1) are pulled back; an interval reaching into the band
/// throws SpectrumViolation.
GuidedSpectrum guided_spectrum(const LatticeSpec& spec, double k1, const IntervalSet& search,
                               const GuidedOptions& options = {});

/// Search over the complement of I_p(k1) in [0, frequency_bound].
GuidedSpectrum guided_spectrum(const LatticeSpec& spec, double k1,
                               const GuidedOptions& options = {});

/// I_g: the range of every guided branch over k1 in [-pi, pi].
IntervalSet guided_projection(const LatticeSpec& spec, const GuidedOptions& options = {});

// Homogeneous lattice, M = 1, with a strip row of mass 1 + m1.

/// <L_p^-1>_2 in closed form; SpectrumViolation when omega is inside I_p(k1).
double uniform_resolvent_closed_form(double omega, double k1);

/// omega_g(k1). For m1 > 0 the root is evaluated as (b^2 - 4) / (b + S),
/// which equals the usual quotient but stays finite at m1 = 1.
double guided_closed_form(double m1, double k1);

/// Closed-form I_g; empty for m1 = 0.
IntervalSet uniform_guided_projection(double m1);

}  // namespace latticegap
