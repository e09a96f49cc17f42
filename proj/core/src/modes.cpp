#include "latticegap/modes.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include <Eigen/SVD>

#include "latticegap/errors.hpp"
#include "latticegap/guided.hpp"
#include "latticegap/localized.hpp"
#include "latticegap/parallel.hpp"

namespace latticegap {

namespace {

Eigen::VectorXcd null_vector(const Eigen::MatrixXcd& a, double tol, const std::string& what) {
  Eigen::JacobiSVD<Eigen::MatrixXcd> svd(a, Eigen::ComputeFullV);
  const auto& s = svd.singularValues();
  const auto n = s.size();
  const double scale = std::max(1.0, s(0));
  if (s(n - 1) > tol * scale) {
    throw DomainError(what + " is not a root: smallest singular value " +
                      std::to_string(s(n - 1)));
  }
  if (n >= 2 && s(n - 2) <= tol * scale) {
    throw DomainError(what + " is a degenerate root: null space is not one-dimensional");
  }
  return svd.matrixV().col(n - 1);
}

Eigen::VectorXd vec(const std::vector<double>& v) {
  return Eigen::Map<const Eigen::VectorXd>(v.data(), static_cast<Eigen::Index>(v.size()));
}

void check_window(const ReconstructionOptions& opt) {
  if (opt.window1 < 1 || opt.window2 < 1 || opt.window1 % 2 == 0 || opt.window2 % 2 == 0) {
    throw DomainError("reconstruction window must be odd and positive in both directions");
  }
  if (opt.grid < 16) throw DomainError("synthesis grid must have at least 16 points");
}

// Scale to unit peak with a real positive value at the peak.
void normalize(Eigen::MatrixXcd& shape) {
  Eigen::Index r = 0, c = 0;
  shape.cwiseAbs().maxCoeff(&r, &c);
  const cplx peak = shape(r, c);
  if (std::abs(peak) > 0.0) shape /= peak;
}

double participation(const Eigen::MatrixXcd& shape) {
  const double s2 = shape.cwiseAbs2().sum();
  const double s4 = shape.cwiseAbs2().cwiseAbs2().sum();
  return s2 * s2 / (static_cast<double>(shape.size()) * s4);
}

// Max |u| over the nodes of cell (c1, c2), offsets relative to the window origin.
double cell_max(const Eigen::MatrixXcd& shape, const LatticeSpec& spec, int origin_x,
                int origin_y, int c1, int c2) {
  double best = 0.0;
  for (int i1 = 0; i1 < spec.n1; ++i1) {
    for (int i2 = 0; i2 < spec.n2; ++i2) {
      best = std::max(best, std::abs(shape(origin_x + c1 * spec.n1 + i1,
                                           origin_y + c2 * spec.n2 + i2)));
    }
  }
  return best;
}

template <class Synth>
std::size_t synthesize_until_stable(const ReconstructionOptions& opt, Synth&& synth,
                                    Eigen::MatrixXcd& shape) {
  std::size_t g = opt.grid;
  shape = synth(g);
  normalize(shape);
  double change = std::numeric_limits<double>::infinity();
  while (2 * g <= opt.max_grid) {
    g *= 2;
    Eigen::MatrixXcd next = synth(g);
    normalize(next);
    change = (next - shape).cwiseAbs().maxCoeff();
    shape = std::move(next);
    if (change < opt.shape_tol) return g;
  }
  throw NonConvergence("mode synthesis did not settle", change);
}

}  // namespace

std::pair<double, double> fit_decay(const std::vector<double>& amplitudes) {
  std::vector<double> xs, ys;
  // points this far below the peak carry mostly synthesis round-off
  double peak = 0.0;
  for (double a : amplitudes) peak = std::max(peak, a);
  for (std::size_t d = 0; d < amplitudes.size(); ++d) {
    if (amplitudes[d] > 1e-10 * peak) {
      xs.push_back(static_cast<double>(d + 1));
      ys.push_back(std::log(amplitudes[d]));
    }
  }
  const double nan = std::numeric_limits<double>::quiet_NaN();
  if (xs.size() < 2) return {nan, nan};
  const auto n = static_cast<double>(xs.size());
  double mx = 0.0, my = 0.0;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    mx += xs[i];
    my += ys[i];
  }
  mx /= n;
  my /= n;
  double sxx = 0.0, sxy = 0.0, syy = 0.0;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    sxx += (xs[i] - mx) * (xs[i] - mx);
    sxy += (xs[i] - mx) * (ys[i] - my);
    syy += (ys[i] - my) * (ys[i] - my);
  }
  const double slope = sxy / sxx;
  const double r2 = syy > 0.0 ? sxy * sxy / (sxx * syy) : 1.0;
  return {-slope, r2};
}

ModeResult reconstruct_guided_mode(const LatticeSpec& spec, double k1, double omega_g,
                                   const ReconstructionOptions& opt) {
  check_window(opt);
  const int n = spec.size();
  const double w2 = omega_g * omega_g;
  const auto r = averaged_resolvent_k2(spec, omega_g, k1, opt.tol);
  const Eigen::VectorXd m1 = vec(spec.strip_perturbation);
  Eigen::MatrixXcd lg = Eigen::MatrixXcd::Identity(n, n);
  lg += w2 * r.matrix * m1.asDiagonal();
  const Eigen::VectorXcd avg = null_vector(lg, opt.null_tol, "omega_g");
  const Eigen::VectorXcd rhs = -w2 * (m1.cast<cplx>().asDiagonal() * avg);

  const auto slice = slice_k2(spec, k1);
  Eigen::MatrixXcd a = slice.base;
  for (int i = 0; i < n; ++i) a(i, i) += w2 * spec.masses[i];

  const int h1 = (opt.window1 - 1) / 2, h2 = (opt.window2 - 1) / 2;
  ModeResult out;
  out.omega = omega_g;
  out.origin_x = h1 * spec.n1;
  out.origin_y = h2 * spec.n2;

  auto synth = [&](std::size_t g) {
    // profile(r2, node) = (1/g) sum_k2 u(k2) e^{-i r2 k2}
    Eigen::MatrixXcd profile = Eigen::MatrixXcd::Zero(opt.window2, n);
    for (std::size_t j = 0; j < g; ++j) {
      const double k2 = -kPi + 2.0 * kPi * static_cast<double>(j) / g;
      const cplx e = std::polar(1.0, -k2);
      const Eigen::MatrixXcd lp = a + slice.forward * e + slice.forward.adjoint() * std::conj(e);
      const Eigen::VectorXcd u = lp.partialPivLu().solve(rhs);
      for (int r2 = -h2; r2 <= h2; ++r2) {
        profile.row(r2 + h2) += std::polar(1.0 / g, -r2 * k2) * u.transpose();
      }
    }
    Eigen::MatrixXcd shape(opt.window1 * spec.n1, opt.window2 * spec.n2);
    for (int r1 = -h1; r1 <= h1; ++r1) {
      const cplx phase = std::polar(1.0, -k1 * r1);
      for (int r2 = -h2; r2 <= h2; ++r2) {
        for (int node = 0; node < n; ++node) {
          shape((r1 + h1) * spec.n1 + node / spec.n2, (r2 + h2) * spec.n2 + node % spec.n2) =
              phase * profile(r2 + h2, node);
        }
      }
    }
    return shape;
  };
  out.synthesis_points = synthesize_until_stable(opt, synth, out.shape);

  std::vector<double> amp;
  for (int d = 1; d <= h2; ++d) amp.push_back(cell_max(out.shape, spec, out.origin_x, out.origin_y, 0, d));
  std::tie(out.decay_rate_y, out.fit_r2_y) = fit_decay(amp);
  out.decay_rate_x = 0.0;
  out.fit_r2_x = 1.0;
  out.decay_rate = out.decay_rate_y;
  out.fit_r2 = out.fit_r2_y;
  out.participation_ratio = participation(out.shape);
  return out;
}

ModeResult reconstruct_localized_mode(const LatticeSpec& spec, double omega_loc,
                                      const ReconstructionOptions& opt) {
  check_window(opt);
  const int n = spec.size();
  const double w2 = omega_loc * omega_loc;
  const Eigen::VectorXd m1 = vec(spec.strip_perturbation);
  const Eigen::VectorXd m2 = vec(spec.point_perturbation);
  const auto kernel = localized_kernel_unchecked(spec, omega_loc, opt.tol);
  Eigen::MatrixXcd d = Eigen::MatrixXcd::Identity(n, n);
  d += w2 * kernel.matrix * m2.asDiagonal();
  const Eigen::VectorXcd avg = null_vector(d, opt.null_tol, "omega_loc");
  const Eigen::VectorXcd f = -w2 * (m2.cast<cplx>().asDiagonal() * avg);

  QuadratureOptions inner;
  inner.tol = opt.tol;
  const int h1 = (opt.window1 - 1) / 2, h2 = (opt.window2 - 1) / 2;
  ModeResult out;
  out.omega = omega_loc;
  out.origin_x = h1 * spec.n1;
  out.origin_y = h2 * spec.n2;

  auto synth = [&](std::size_t g) {
    // per k1: v(r2, node) = (1/g) sum_k2 u(k) e^{-i r2 k2}
    std::vector<Eigen::MatrixXcd> partial(g);
    parallel_for(g, [&](std::size_t j) {
      const double k1 = -kPi + 2.0 * kPi * static_cast<double>(j) / g;
      const auto r = averaged_resolvent_k2_unchecked(spec, omega_loc, k1, inner);
      Eigen::MatrixXcd lg = Eigen::MatrixXcd::Identity(n, n);
      lg += w2 * r.matrix * m1.asDiagonal();
      const Eigen::VectorXcd g1 =
          f - w2 * (m1.cast<cplx>().asDiagonal() * lg.partialPivLu().solve(r.matrix * f));
      const auto slice = slice_k2(spec, k1);
      Eigen::MatrixXcd a = slice.base;
      for (int i = 0; i < n; ++i) a(i, i) += w2 * spec.masses[i];
      Eigen::MatrixXcd v = Eigen::MatrixXcd::Zero(opt.window2, n);
      for (std::size_t l = 0; l < g; ++l) {
        const double k2 = -kPi + 2.0 * kPi * static_cast<double>(l) / g;
        const cplx e = std::polar(1.0, -k2);
        Eigen::VectorXcd u;
        if (n == 1) {
          u = g1 / (a(0, 0) + 2.0 * (slice.forward(0, 0) * e).real());
        } else {
          const Eigen::MatrixXcd lp =
              a + slice.forward * e + slice.forward.adjoint() * std::conj(e);
          u = lp.partialPivLu().solve(g1);
        }
        for (int r2 = -h2; r2 <= h2; ++r2) {
          v.row(r2 + h2) += std::polar(1.0 / g, -r2 * k2) * u.transpose();
        }
      }
      partial[j] = std::move(v);
    });
    Eigen::MatrixXcd shape = Eigen::MatrixXcd::Zero(opt.window1 * spec.n1, opt.window2 * spec.n2);
    for (std::size_t j = 0; j < g; ++j) {
      const double k1 = -kPi + 2.0 * kPi * static_cast<double>(j) / g;
      for (int r1 = -h1; r1 <= h1; ++r1) {
        const cplx phase = std::polar(1.0 / g, -k1 * r1);
        for (int r2 = -h2; r2 <= h2; ++r2) {
          for (int node = 0; node < n; ++node) {
            shape((r1 + h1) * spec.n1 + node / spec.n2, (r2 + h2) * spec.n2 + node % spec.n2) +=
                phase * partial[j](r2 + h2, node);
          }
        }
      }
    }
    return shape;
  };
  out.synthesis_points = synthesize_until_stable(opt, synth, out.shape);

  std::vector<double> ax, ay;
  for (int dd = 1; dd <= h1; ++dd) ax.push_back(cell_max(out.shape, spec, out.origin_x, out.origin_y, dd, 0));
  for (int dd = 1; dd <= h2; ++dd) ay.push_back(cell_max(out.shape, spec, out.origin_x, out.origin_y, 0, dd));
  std::tie(out.decay_rate_x, out.fit_r2_x) = fit_decay(ax);
  std::tie(out.decay_rate_y, out.fit_r2_y) = fit_decay(ay);
  // along a heavy strip the axis profile bends from the bulk rate to the
  // slower guided one; the shell envelope follows the slowest direction
  std::vector<double> shell;
  for (int dd = 1; dd <= std::min(h1, h2); ++dd) {
    double best = 0.0;
    for (int c = -dd; c <= dd; ++c) {
      for (const auto& [c1, c2] : {std::pair{c, -dd}, std::pair{c, dd}, std::pair{-dd, c},
                                   std::pair{dd, c}}) {
        best = std::max(best, cell_max(out.shape, spec, out.origin_x, out.origin_y, c1, c2));
      }
    }
    shell.push_back(best);
  }
  std::tie(out.decay_rate, out.fit_r2) = fit_decay(shell);
  out.participation_ratio = participation(out.shape);
  return out;
}

}  // namespace latticegap
