#pragma once

#include <cmath>
#include <cstddef>
#include <functional>
#include <string>
#include <vector>

#include "latticegap/errors.hpp"
#include "latticegap/lattice_model.hpp"
#include "latticegap/parallel.hpp"

namespace latticegap {

struct QuadratureOptions {
  double tol = 1e-10;           ///< stop when successive estimates differ by < tol * max(1, |I|)
  std::size_t min_points = 16;  ///< first grid
  std::size_t max_points = std::size_t{1} << 20;
  bool parallel = false;        ///< evaluate the new samples of a level concurrently
  bool throw_on_cap = true;     ///< false: return the estimate at the cap, converged = false
};

template <class V>
struct QuadratureResult {
  V value{};
  double error = 0.0;           ///< |T_2n - T_n| at the accepted level
  std::size_t points = 0;
  std::vector<double> changes;  ///< |T_2n - T_n| for every doubling performed
  bool converged = true;
};

/// Mean value (1/2pi) * integral over [-pi, pi] of a smooth 2pi-periodic
/// function by the uniform trapezoid rule, doubling the grid (and reusing all
/// previous samples) until two successive estimates agree. Off the spectrum
/// the integrands here are analytic, so the rule converges geometrically.
template <class V, class F, class Norm>
QuadratureResult<V> periodic_mean(F&& f, Norm&& norm, const QuadratureOptions& opt) {
  QuadratureResult<V> out;
  std::size_t n = std::max<std::size_t>(opt.min_points, 2);

  auto sample_level = [&](std::size_t count, double start, double step) {
    std::vector<V> vals(count);
    auto body = [&](std::size_t j) { vals[j] = f(start + step * static_cast<double>(j)); };
    if (opt.parallel) {
      parallel_for(count, body);
    } else {
      for (std::size_t j = 0; j < count; ++j) body(j);
    }
    V sum = vals[0];
    for (std::size_t j = 1; j < count; ++j) sum += vals[j];
    return sum;
  };

  V sum = sample_level(n, -kPi, 2.0 * kPi / static_cast<double>(n));
  V estimate = sum / static_cast<double>(n);
  while (true) {
    if (2 * n > opt.max_points) {
      if (!opt.throw_on_cap) {
        out.converged = false;
        break;
      }
      throw NonConvergence("periodic trapezoid exceeded " + std::to_string(opt.max_points) +
                               " points",
                           out.changes.empty() ? HUGE_VAL : out.changes.back());
    }
    const double step = 2.0 * kPi / static_cast<double>(n);
    sum += sample_level(n, -kPi + 0.5 * step, step);
    n *= 2;
    V next = sum / static_cast<double>(n);
    const double change = norm(V(next - estimate));
    out.changes.push_back(change);
    estimate = next;
    if (!std::isfinite(change)) {
      throw NonConvergence("periodic trapezoid produced a non-finite estimate", change);
    }
    if (change <= opt.tol * std::max(1.0, norm(estimate))) break;
  }
  out.value = estimate;
  out.error = out.changes.empty() ? HUGE_VAL : out.changes.back();
  out.points = n;
  return out;
}

struct RombergResult {
  double value = 0.0;
  double error = 0.0;
  std::size_t evaluations = 0;
};

/// Composite midpoint sums on [a, b] with Richardson extrapolation in h^2.
/// Stops on a relative change below `tol`, or an absolute change below `abs_floor`. The midpoint rule never samples the endpoints, so integrands that are
/// smooth on the open interval with finite one-sided limits are admissible.
RombergResult romberg_midpoint(const std::function<double(double)>& f, double a, double b,
                               double tol, int max_levels = 22, double abs_floor = 0.0);

/// romberg_midpoint over a geometric subdivision of [a, b] refined towards the
/// flagged ends, for integrands with a near-singularity next to an endpoint.
RombergResult graded_integral(const std::function<double(double)>& f, double a, double b,
                              double tol, bool grade_left, bool grade_right);

}  // namespace latticegap
