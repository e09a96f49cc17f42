#include "latticegap/localized.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <mutex>
#include <optional>

#include <boost/math/tools/roots.hpp>

#include "latticegap/errors.hpp"
#include "latticegap/propagative.hpp"
#include "latticegap/quadrature.hpp"

namespace latticegap {

namespace {

const double kSqrt8 = std::sqrt(8.0);
const double kInvSqrt2 = std::sqrt(0.5);

void check_omega(double omega) {
  if (!std::isfinite(omega) || omega < 0.0) throw DomainError("omega must be finite and >= 0");
}

bool all_zero(const std::vector<double>& v) {
  return std::all_of(v.begin(), v.end(), [](double x) { return x == 0.0; });
}

void check_in_gap(const GapStructure& gs, double omega, double guard) {
  for (std::size_t i = 0; i < gs.gaps.size(); ++i) {
    const auto& g = gs.gaps[i];
    const bool open_top = gs.tail && i + 1 == gs.gaps.size();
    if (omega > g.lo + guard && (open_top || omega < g.hi - guard)) return;
  }
  throw SpectrumViolation("omega is not inside a gap of I_p u I_g", omega);
}

// sqrt((cos k + 2)^2 - 1) written without the kink at k = pi, valid on [0, pi]
double edge_root(double k) {
  return std::sqrt(2.0) * std::cos(0.5 * k) * std::sqrt(std::cos(k) + 3.0);
}

}  // namespace

LocalizedKernel localized_kernel_unchecked(const LatticeSpec& spec, double omega, double tol) {
  check_omega(omega);
  QuadratureOptions outer;
  outer.tol = tol / std::sqrt(10.0);
  outer.parallel = true;
  QuadratureOptions inner;
  inner.tol = tol / 10.0;

  std::mutex mu;
  double inner_error = 0.0;
  auto note = [&](double e) {
    std::lock_guard lock(mu);
    inner_error = std::max(inner_error, e);
  };

  const int n = spec.size();
  const double w2 = omega * omega;
  LocalizedKernel out;
  out.omega = omega;
  if (n == 1) {
    const double m1 = spec.strip_perturbation[0];
    auto f = [&](double k1) {
      const auto r = averaged_resolvent_k2_unchecked(spec, omega, k1, inner);
      note(r.quad_error);
      const double g = r.matrix(0, 0).real();
      return g / (1.0 + w2 * m1 * g);
    };
    const auto q = periodic_mean<double>(f, [](double v) { return std::abs(v); }, outer);
    out.matrix = Eigen::MatrixXcd::Constant(1, 1, q.value);
    out.outer_error = q.error;
    out.points = q.points;
  } else {
    const Eigen::VectorXd m1 = Eigen::Map<const Eigen::VectorXd>(spec.strip_perturbation.data(), n);
    auto f = [&](double k1) -> Eigen::MatrixXcd {
      const auto r = averaged_resolvent_k2_unchecked(spec, omega, k1, inner);
      note(r.quad_error);
      Eigen::MatrixXcd lg = Eigen::MatrixXcd::Identity(n, n);
      lg += w2 * r.matrix * m1.asDiagonal();
      return lg.partialPivLu().solve(r.matrix);
    };
    auto norm = [](const Eigen::MatrixXcd& m) { return m.cwiseAbs().maxCoeff(); };
    auto q = periodic_mean<Eigen::MatrixXcd>(f, norm, outer);
    out.matrix = std::move(q.value);
    out.outer_error = q.error;
    out.points = q.points;
  }
  out.inner_error = inner_error;
  return out;
}

LocalizedKernel localized_kernel(const LatticeSpec& spec, double omega, const GapStructure& gaps,
                                 double tol) {
  check_omega(omega);
  check_in_gap(gaps, omega, 1e-9);
  return localized_kernel_unchecked(spec, omega, tol);
}

DLoc d_loc_unchecked(const LatticeSpec& spec, double omega, double tol) {
  check_omega(omega);
  if (all_zero(spec.point_perturbation)) return {cplx{1.0, 0.0}, 0.0};
  const auto kernel = localized_kernel_unchecked(spec, omega, tol);
  const int n = spec.size();
  const double w2 = omega * omega;
  cplx value;
  if (n == 1) {
    value = 1.0 + w2 * kernel.matrix(0, 0) * spec.point_perturbation[0];
  } else {
    const Eigen::VectorXd m2 = Eigen::Map<const Eigen::VectorXd>(spec.point_perturbation.data(), n);
    Eigen::MatrixXcd d = Eigen::MatrixXcd::Identity(n, n);
    d += w2 * kernel.matrix * m2.asDiagonal();
    value = d.partialPivLu().determinant();
  }
  return {value, std::abs(value.imag()) / (1.0 + std::abs(value.real()))};
}

DLoc d_loc(const LatticeSpec& spec, double omega, const GapStructure& gaps, double tol) {
  check_omega(omega);
  check_in_gap(gaps, omega, 1e-9);
  return d_loc_unchecked(spec, omega, tol);
}

double d_loc_at_infinity(const LatticeSpec& spec) {
  double value = 1.0;
  for (int i = 0; i < spec.size(); ++i) {
    value *= 1.0 + spec.point_perturbation[i] /
                       (spec.masses[i] + spec.strip_perturbation[i]);
  }
  return value;
}

double d1(double omega, double m1, double tol) {
  check_omega(omega);
  if (!(m1 > -1.0)) throw DomainError("strip mass 1 + m1 must be positive");
  const auto i_g = uniform_guided_projection(m1);
  if (omega <= kSqrt8 + 1e-9 || i_g.contains(omega, 1e-9)) {
    throw SpectrumViolation("omega is not inside a gap of I_p u I_g", omega);
  }
  const double w2 = omega * omega;
  auto f = [&](double k) {
    const double a = w2 - 4.0 + 2.0 * std::cos(k);
    return w2 / (w2 * m1 + std::sqrt((a - 2.0) * (a + 2.0)));
  };
  QuadratureOptions q;
  q.tol = tol;
  return periodic_mean<double>(f, [](double v) { return std::abs(v); }, q).value;
}

double d1_at_band_top(double m1, double tol) {
  if (!(m1 > -1.0)) throw DomainError("strip mass 1 + m1 must be positive");
  if (m1 == 0.0) return std::numeric_limits<double>::infinity();
  if (m1 >= -kInvSqrt2 && m1 < 0.0) {
    throw DomainError("2 sqrt 2 lies inside I_g for m1 in [-1/sqrt 2, 0)");
  }
  auto f = [m1](double k) { return 1.0 / (4.0 * m1 + edge_root(k)); };
  return 4.0 / kPi * graded_integral(f, 0.0, kPi, tol, true, true).value;
}

double region_boundary(double m_tilde) {
  if (!(m_tilde > 0.0) || !std::isfinite(m_tilde)) throw DomainError("m_tilde must be > 0");
  const double m1 = m_tilde - 1.0;
  if (m1 == 0.0) return 1.0;
  if (m1 >= -kInvSqrt2 && m1 < 0.0) return m_tilde;
  // m_tilde - 1/D1 = 1 - I1 / (4 I0) with I0 = int dk / (4 m1 + s) and
  // I1 = int s dk / (4 m1 + s); avoids subtracting two O(m1) numbers.
  constexpr double tol = 1e-12;
  auto f0 = [m1](double k) { return 1.0 / (4.0 * m1 + edge_root(k)); };
  auto f1 = [m1](double k) {
    const double s = edge_root(k);
    return s / (4.0 * m1 + s);
  };
  const double i0 = graded_integral(f0, 0.0, kPi, tol, true, true).value;
  const double i1 = graded_integral(f1, 0.0, kPi, tol, true, true).value;
  return 1.0 - i1 / (4.0 * i0);
}

GapStructure gap_structure(const LatticeSpec& spec, double omega_max,
                           const LocalizedOptions& options) {
  GapStructure gs;
  gs.i_p = propagative_projection_full(spec, options.guided.projection);
  if (spec.has_strip()) gs.i_g = guided_projection(spec, options.guided);
  const auto all = gs.i_p.unite(gs.i_g);
  const double top = all.upper();
  gs.omega_max =
      omega_max > 0.0 ? omega_max : std::max(frequency_bound(spec, true, true), 1.01 * top);
  gs.gaps = all.complement(0.0, gs.omega_max, options.min_gap_width);
  gs.tail = !gs.gaps.empty() && top < gs.omega_max && gs.gaps[gs.gaps.size() - 1].hi == gs.omega_max;
  return gs;
}

GapStructure uniform_gap_structure(double m1, double omega_max) {
  GapStructure gs;
  gs.i_p = IntervalSet::single(0.0, kSqrt8);
  gs.i_g = uniform_guided_projection(m1);
  const auto all = gs.i_p.unite(gs.i_g);
  gs.omega_max = omega_max;
  gs.gaps = all.complement(0.0, omega_max, 1e-12);
  gs.tail = !gs.gaps.empty() && all.upper() < omega_max;
  return gs;
}

namespace {

struct Scanner {
  const LatticeSpec& spec;
  const LocalizedOptions& opt;

  double f(double w) const { return d_loc_unchecked(spec, w, opt.tol).value.real(); }

  double bisect(double a, double b) const {
    auto done = [this](double lo, double hi) { return std::abs(hi - lo) <= opt.root_tol; };
    const auto r = boost::math::tools::bisect([this](double w) { return f(w); }, a, b, done);
    return 0.5 * (r.first + r.second);
  }
};

std::vector<double> grid(double lo, double hi, std::size_t n, bool logarithmic) {
  std::vector<double> x(n + 1);
  for (std::size_t i = 0; i <= n; ++i) {
    const double t = static_cast<double>(i) / n;
    x[i] = logarithmic ? lo * std::pow(hi / lo, t) : lo + (hi - lo) * t;
  }
  x.back() = hi;
  return x;
}

std::size_t count_changes(const std::vector<double>& f) {
  std::size_t c = 0;
  for (std::size_t i = 1; i < f.size(); ++i) c += (f[i - 1] < 0.0) != (f[i] < 0.0);
  return c;
}

}  // namespace

LocalizedModes localized_modes(const LatticeSpec& spec, const LocalizedOptions& options) {
  return localized_modes(spec, gap_structure(spec, 0.0, options), options);
}

LocalizedModes localized_modes(const LatticeSpec& spec, const GapStructure& gaps,
                               const LocalizedOptions& opt) {
  LocalizedModes out;
  out.gaps = gaps;
  if (all_zero(spec.point_perturbation)) return out;
  const Scanner scan{spec, opt};
  const bool monotone = spec.size() == 1;
  const double d_inf = d_loc_at_infinity(spec);

  // First offset from `edge` (growing by 10 from edge_margin) where the
  // kernel converges; slivers skipped on the way are reported.
  auto probe = [&](double edge, double dir, double limit) -> std::optional<std::pair<double, double>> {
    for (double m = opt.edge_margin; m <= limit; m *= 10.0) {
      const double x = edge + dir * m;
      try {
        const double v = scan.f(x);
        if (m > opt.edge_margin) out.unresolved.push_back({std::min(edge, x), std::max(edge, x)});
        return std::pair{x, v};
      } catch (const NonConvergence&) {
      }
    }
    return std::nullopt;
  };

  for (std::size_t j = 0; j < gaps.gaps.size(); ++j) {
    const auto& gap = gaps.gaps[j];
    const bool tail = gaps.tail && j + 1 == gaps.gaps.size();
    const double limit = 1e-2 * (tail ? std::max(gap.lo, 1.0) : gap.width());
    const auto p_lo = probe(gap.lo, 1.0, limit);
    if (!p_lo) {
      out.unresolved.push_back(gap);
      continue;
    }
    const double lo = p_lo->first;
    double hi = 0.0, f_hi = 0.0;
    if (tail) {
      // walk up until D_loc has settled at its limit
      hi = std::max(2.0 * lo, lo + 1.0);
      f_hi = scan.f(hi);
      for (int step = 0; std::abs(f_hi - d_inf) >= opt.asymptotic_tol; ++step) {
        if (step > 60) throw NonConvergence("tail of D_loc did not settle", std::abs(f_hi - d_inf));
        hi *= 2.0;
        f_hi = scan.f(hi);
      }
      out.tail_scan.push_back(hi);
    } else {
      const auto p_hi = probe(gap.hi, -1.0, limit);
      if (!p_hi) {
        out.unresolved.push_back({lo, gap.hi});
        continue;
      }
      hi = p_hi->first;
      f_hi = p_hi->second;
    }
    if (!(lo < hi)) continue;

    std::vector<double> x, f;
    if (monotone) {
      x = {lo, hi};
      f = {p_lo->second, f_hi};
    } else {
      std::size_t n = opt.scan_points;
      x = grid(lo, hi, n, tail);
      f.resize(x.size());
      for (std::size_t i = 1; i + 1 < x.size(); ++i) f[i] = scan.f(x[i]);
      f.front() = p_lo->second;
      f.back() = f_hi;
      std::size_t changes = count_changes(f);
      while (2 * n <= opt.max_scan_points) {
        n *= 2;
        auto xn = grid(lo, hi, n, tail);
        std::vector<double> fn(xn.size());
        for (std::size_t i = 0; i < xn.size(); ++i) fn[i] = i % 2 == 0 ? f[i / 2] : scan.f(xn[i]);
        x = std::move(xn);
        f = std::move(fn);
        const std::size_t refined = count_changes(f);
        if (refined == changes) break;
        changes = refined;
      }
    }
    for (std::size_t i = 1; i < x.size(); ++i) {
      if ((f[i - 1] < 0.0) == (f[i] < 0.0)) continue;
      const double root = scan.bisect(x[i - 1], x[i]);
      const auto d = d_loc_unchecked(spec, root, opt.tol);
      if (d.realness > opt.realness_gate) {
        out.rejected.push_back(root);
        continue;
      }
      ModeResult m;
      m.omega = root;
      m.gap = j;
      m.realness = d.realness;
      out.modes.push_back(std::move(m));
    }
  }
  return out;
}

std::string to_string(ExistenceCase c) {
  switch (c) {
    case ExistenceCase::kTwoGaps:
      return "two-gap";
    case ExistenceCase::kOneGapAboveGuided:
      return "one-gap-above-guided";
    case ExistenceCase::kOneGapAbovePropagative:
      return "one-gap-above-propagative";
  }
  return "unknown";
}

int ExistenceReport::total_modes() const {
  int total = 0;
  for (const auto& g : gaps) total += g.modes;
  return total;
}

ExistenceReport classify_existence(double m1, double m2) {
  if (!(1.0 + m1 > 0.0) || !(1.0 + m1 + m2 > 0.0)) {
    throw DomainError("need 1 + m1 > 0 and 1 + m1 + m2 > 0");
  }
  constexpr double inf = std::numeric_limits<double>::infinity();
  ExistenceReport r;
  const double q = std::sqrt(8.0 * m1 * m1 + 1.0);

  if (m1 > 0.0) {
    r.case_id = ExistenceCase::kOneGapAbovePropagative;
    const double d = d1_at_band_top(m1);
    r.d1_band_top = d;
    r.threshold = -1.0 / d;
    r.gaps.push_back({"G", {kSqrt8, inf}, m2 < *r.threshold ? 1 : 0});
    return r;
  }
  const double d = std::sqrt(1.0 - m1 * m1);
  const Interval g2{std::sqrt(6.0 + 2.0 * q) / d, inf};
  if (m1 >= -kInvSqrt2) {
    r.case_id = ExistenceCase::kOneGapAboveGuided;
    r.gaps.push_back({"G2", g2, m2 < 0.0 ? 1 : 0});
    return r;
  }
  r.case_id = ExistenceCase::kTwoGaps;
  const double d1_top = d1_at_band_top(m1);
  r.d1_band_top = d1_top;
  r.threshold = -1.0 / d1_top;
  const bool in_g1 = m2 > 0.0 && m2 < *r.threshold;
  r.gaps.push_back({"G1", {kSqrt8, 2.0 / d}, in_g1 ? 1 : 0});
  r.gaps.push_back({"G2", g2, m2 < 0.0 ? 1 : 0});
  return r;
}

}  // namespace latticegap
