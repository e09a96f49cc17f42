#include "latticegap/propagative.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include <boost/math/tools/minima.hpp>

#include "latticegap/errors.hpp"
#include "latticegap/parallel.hpp"

namespace latticegap {

namespace {

constexpr double kFail = 1e-9;
constexpr int kBrentBits = std::numeric_limits<double>::digits / 2;

double checked_sqrt(double lambda) {
  if (lambda < -kFail) {
    throw SpecError("negative eigenvalue " + std::to_string(lambda) +
                    " of the stiffness pencil; the cell is not a graph Laplacian");
  }
  return lambda <= 0.0 ? 0.0 : std::sqrt(lambda);
}

std::vector<double> branches_of(const Eigen::MatrixXcd& l_hat, const Eigen::VectorXd& mass) {
  const auto n = l_hat.rows();
  if (n == 1) return {checked_sqrt(-l_hat(0, 0).real() / mass(0))};
  const Eigen::VectorXd inv_sqrt = mass.cwiseSqrt().cwiseInverse();
  Eigen::MatrixXcd a = -(inv_sqrt.asDiagonal() * l_hat * inv_sqrt.asDiagonal());
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> solver(a, Eigen::EigenvaluesOnly);
  std::vector<double> out(static_cast<std::size_t>(n));
  for (Eigen::Index i = 0; i < n; ++i) out[i] = checked_sqrt(solver.eigenvalues()(i));
  return out;
}

Eigen::VectorXd mass_vector(const LatticeSpec& spec) {
  return Eigen::Map<const Eigen::VectorXd>(spec.masses.data(), spec.size());
}

std::vector<double> grid_points(std::size_t g) {
  std::vector<double> k(g);
  for (std::size_t i = 0; i < g; ++i) k[i] = -kPi + 2.0 * kPi * static_cast<double>(i) / g;
  return k;
}

// Per-branch [min, max] of a periodic sampled family, each extreme polished by
// Brent minimisation on the two grid cells around the best sample.
template <class AllBranches, class OneBranch>
std::vector<Interval> polished_envelope(std::size_t g, int nb, AllBranches&& all,
                                        OneBranch&& one) {
  const auto k = grid_points(g);
  const double h = 2.0 * kPi / g;
  std::vector<std::vector<double>> vals(g);
  for (std::size_t i = 0; i < g; ++i) vals[i] = all(k[i]);

  std::vector<Interval> env(static_cast<std::size_t>(nb));
  for (int j = 0; j < nb; ++j) {
    std::size_t imin = 0, imax = 0;
    for (std::size_t i = 1; i < g; ++i) {
      if (vals[i][j] < vals[imin][j]) imin = i;
      if (vals[i][j] > vals[imax][j]) imax = i;
    }
    auto f = [&](double x) { return one(wrap_angle(x), j); };
    auto lo = boost::math::tools::brent_find_minima(f, k[imin] - h, k[imin] + h, kBrentBits);
    auto hi = boost::math::tools::brent_find_minima([&](double x) { return -f(x); },
                                                    k[imax] - h, k[imax] + h, kBrentBits);
    env[j] = {std::min(vals[imin][j], lo.second), std::max(vals[imax][j], -hi.second)};
  }
  return env;
}

double max_edge_change(const std::vector<Interval>& a, const std::vector<Interval>& b) {
  double change = 0.0;
  for (std::size_t j = 0; j < a.size(); ++j) {
    change = std::max({change, std::abs(a[j].lo - b[j].lo), std::abs(a[j].hi - b[j].hi)});
  }
  return change;
}

template <class Level>
IntervalSet refine_until_stable(const ProjectionOptions& options, Level&& level) {
  if (options.grid < 64) throw DomainError("projection grid must have at least 64 points");
  std::size_t g = options.grid;
  auto env = level(g);
  double change = std::numeric_limits<double>::infinity();
  for (int r = 0; r < options.max_refinements; ++r) {
    g *= 2;
    auto next = level(g);
    change = max_edge_change(env, next);
    env = std::move(next);
    if (change < options.tol) return IntervalSet(env, options.tol);
  }
  throw NonConvergence("band-edge projection did not stabilise", change);
}

}  // namespace

std::vector<double> propagative_branches(const LatticeSpec& spec, Wavevector k) {
  const auto ops = assemble_bloch(spec, k);
  return branches_of(ops.l_hat, ops.m_hat);
}

std::vector<double> propagative_branches(const BlochSliceK2& slice, const Eigen::VectorXd& mass,
                                         double k2) {
  return branches_of(slice.at(k2), mass);
}

IntervalSet propagative_projection_k1(const LatticeSpec& spec, double k1,
                                      const ProjectionOptions& options) {
  if (std::abs(k1) > kPi) throw DomainError("k1 outside [-pi, pi]");
  const auto slice = slice_k2(spec, k1);
  const auto mass = mass_vector(spec);
  const int nb = spec.size();
  auto all = [&](double k2) { return propagative_branches(slice, mass, k2); };
  auto one = [&](double k2, int j) { return propagative_branches(slice, mass, k2)[j]; };
  return refine_until_stable(options, [&](std::size_t g) {
    return polished_envelope(g, nb, all, one);
  });
}

IntervalSet propagative_projection_full(const LatticeSpec& spec,
                                        const ProjectionOptions& options) {
  const auto mass = mass_vector(spec);
  const int nb = spec.size();

  auto level = [&](std::size_t g) {
    // Envelope over k2 at fixed k1, all branches at once.
    auto inner_all = [&](double k1) {
      const auto slice = slice_k2(spec, k1);
      auto all = [&](double k2) { return propagative_branches(slice, mass, k2); };
      auto one = [&](double k2, int j) { return propagative_branches(slice, mass, k2)[j]; };
      return polished_envelope(g, nb, all, one);
    };

    const auto k1s = grid_points(g);
    const double h = 2.0 * kPi / g;
    std::vector<std::vector<Interval>> inner(g);
    parallel_for(g, [&](std::size_t i) { inner[i] = inner_all(k1s[i]); });

    std::vector<Interval> env(static_cast<std::size_t>(nb));
    for (int j = 0; j < nb; ++j) {
      std::size_t imin = 0, imax = 0;
      for (std::size_t i = 1; i < g; ++i) {
        if (inner[i][j].lo < inner[imin][j].lo) imin = i;
        if (inner[i][j].hi > inner[imax][j].hi) imax = i;
      }
      auto lo = boost::math::tools::brent_find_minima(
          [&](double k1) { return inner_all(wrap_angle(k1))[j].lo; }, k1s[imin] - h,
          k1s[imin] + h, kBrentBits);
      auto hi = boost::math::tools::brent_find_minima(
          [&](double k1) { return -inner_all(wrap_angle(k1))[j].hi; }, k1s[imax] - h,
          k1s[imax] + h, kBrentBits);
      env[j] = {std::min(inner[imin][j].lo, lo.second), std::max(inner[imax][j].hi, -hi.second)};
    }
    return env;
  };
  return refine_until_stable(options, level);
}

DispersionTable dispersion_table(const LatticeSpec& spec, std::size_t grid1, std::size_t grid2) {
  if (grid1 < 2 || grid2 < 2) throw DomainError("dispersion grid needs at least 2 points per axis");
  DispersionTable table;
  table.grid1 = grid1;
  table.grid2 = grid2;
  table.spec_hash = spec.hash();
  const auto mass = mass_vector(spec);
  table.axis.resize(grid1 * grid2);
  table.branches.resize(grid1 * grid2);
  parallel_for(grid1, [&](std::size_t i) {
    const double k1 = -kPi + 2.0 * kPi * static_cast<double>(i) / (grid1 - 1);
    const auto slice = slice_k2(spec, k1);
    for (std::size_t j = 0; j < grid2; ++j) {
      const double k2 = -kPi + 2.0 * kPi * static_cast<double>(j) / (grid2 - 1);
      table.axis[i * grid2 + j] = {k1, k2};
      table.branches[i * grid2 + j] = propagative_branches(slice, mass, k2);
    }
  });
  return table;
}

double uniform_omega_p(Wavevector k, double mass) {
  return std::sqrt(std::max(0.0, (4.0 - 2.0 * std::cos(k.k1) - 2.0 * std::cos(k.k2)) / mass));
}

IntervalSet uniform_projection_k1(double k1) {
  const double c = std::cos(k1);
  return IntervalSet::single(std::sqrt(std::max(0.0, 2.0 - 2.0 * c)), std::sqrt(6.0 - 2.0 * c));
}

}  // namespace latticegap
