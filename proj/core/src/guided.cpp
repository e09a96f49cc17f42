#include "latticegap/guided.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>

#include <boost/math/tools/minima.hpp>
#include <boost/math/tools/roots.hpp>

#include "latticegap/errors.hpp"
#include "latticegap/parallel.hpp"

namespace latticegap {

namespace {

constexpr int kBrentBits = std::numeric_limits<double>::digits / 2;

QuadratureOptions quad_options(double tol) {
  QuadratureOptions q;
  q.tol = tol;
  return q;
}

void check_omega(double omega) {
  if (!std::isfinite(omega) || omega < 0.0) throw DomainError("omega must be finite and >= 0");
}

void check_k1(double k1) {
  if (!std::isfinite(k1) || std::abs(k1) > kPi) throw DomainError("k1 outside [-pi, pi]");
}

bool all_zero(const std::vector<double>& v) {
  return std::all_of(v.begin(), v.end(), [](double x) { return x == 0.0; });
}

// Bisection on [a, b] reusing the bracket values, which may come from a
// sign-certified scan where the plain evaluation would not converge.
template <class F>
double bisect_root(F&& f, double a, double fa, double b, double fb, double tol) {
  auto g = [&](double x) { return x == a ? fa : x == b ? fb : f(x); };
  auto done = [tol](double lo, double hi) { return std::abs(hi - lo) <= tol; };
  const auto r = boost::math::tools::bisect(g, a, b, done);
  return 0.5 * (r.first + r.second);
}

double re_det(const LatticeSpec& spec, double omega, double k1, double tol) {
  return guided_det_unchecked(spec, omega, k1, quad_options(tol)).value.real();
}

// Pull the ends of [lo, hi] away from the band by `guard`.
std::optional<Interval> guarded(const IntervalSet& band, Interval iv, double guard) {
  for (const auto& b : band) {
    const double overlap = std::min(iv.hi, b.hi) - std::max(iv.lo, b.lo);
    if (overlap > 2.0 * guard) {
      throw SpectrumViolation("search interval overlaps I_p(k1)", std::max(iv.lo, b.lo));
    }
  }
  for (const auto& b : band) {
    if (b.contains(iv.lo, guard)) iv.lo = b.hi + guard;
    if (b.contains(iv.hi, guard)) iv.hi = b.lo - guard;
  }
  iv.lo = std::max(iv.lo, 0.0);
  if (!(iv.lo < iv.hi)) return std::nullopt;
  return iv;
}

struct Scan {
  std::vector<double> x;
  std::vector<double> f;  // NaN where the quadrature failed
};

// Re det for sign scans. Right next to the band the trapezoid may hit its
// cap; the capped estimate is still kept when it and the estimate on half the
// points agree in sign to within 10%, since only the sign is used. NaN otherwise.
double scan_det(const LatticeSpec& spec, double omega, double k1, double tol) {
  QuadratureOptions q = quad_options(tol);
  q.throw_on_cap = false;
  const auto a = guided_det_unchecked(spec, omega, k1, q);
  if (a.converged) return a.value.real();
  q.max_points /= 2;
  const auto b = guided_det_unchecked(spec, omega, k1, q);
  const double va = a.value.real(), vb = b.value.real();
  if ((va < 0.0) == (vb < 0.0) && std::abs(va - vb) < 0.1 * std::abs(va)) return va;
  return std::numeric_limits<double>::quiet_NaN();
}

void evaluate(const LatticeSpec& spec, double k1, double tol, const std::vector<double>& x,
              std::vector<double>& f) {
  f.assign(x.size(), 0.0);
  parallel_for(x.size(), [&](std::size_t i) { f[i] = scan_det(spec, x[i], k1, tol); });
}

std::size_t sign_changes(const Scan& s) {
  std::size_t count = 0;
  double prev = std::numeric_limits<double>::quiet_NaN();
  for (double v : s.f) {
    if (std::isnan(v)) continue;
    if (!std::isnan(prev) && ((prev < 0.0) != (v < 0.0))) ++count;
    prev = v;
  }
  return count;
}

Scan adaptive_scan(const LatticeSpec& spec, double k1, const Interval& iv,
                   const GuidedOptions& opt) {
  Scan s;
  std::size_t n = std::max<std::size_t>(opt.scan_points, 2);
  s.x.resize(n + 1);
  for (std::size_t i = 0; i <= n; ++i) s.x[i] = iv.lo + iv.width() * static_cast<double>(i) / n;
  evaluate(spec, k1, opt.tol, s.x, s.f);
  std::size_t count = sign_changes(s);
  while (2 * n <= opt.max_scan_points) {
    std::vector<double> mid(n), fmid;
    for (std::size_t i = 0; i < n; ++i) mid[i] = 0.5 * (s.x[i] + s.x[i + 1]);
    evaluate(spec, k1, opt.tol, mid, fmid);
    Scan next;
    next.x.reserve(2 * n + 1);
    next.f.reserve(2 * n + 1);
    for (std::size_t i = 0; i < n; ++i) {
      next.x.push_back(s.x[i]);
      next.f.push_back(s.f[i]);
      next.x.push_back(mid[i]);
      next.f.push_back(fmid[i]);
    }
    next.x.push_back(s.x[n]);
    next.f.push_back(s.f[n]);
    s = std::move(next);
    n *= 2;
    const std::size_t refined = sign_changes(s);
    if (refined == count) break;
    count = refined;
  }
  return s;
}

}  // namespace

AveragedResolvent averaged_resolvent_k2_unchecked(const LatticeSpec& spec, double omega,
                                                  double k1, const QuadratureOptions& options) {
  check_omega(omega);
  check_k1(k1);
  const auto slice = slice_k2(spec, k1);
  const int n = spec.size();
  Eigen::MatrixXcd a = slice.base;
  for (int i = 0; i < n; ++i) a(i, i) += omega * omega * spec.masses[i];

  AveragedResolvent out;
  out.omega = omega;
  out.k1 = k1;
  if (n == 1) {
    // L_p is real for a one-node cell: a + 2 Re(f e^{-i k2})
    const double a0 = a(0, 0).real();
    const cplx f = slice.forward(0, 0);
    auto g = [&](double k2) { return 1.0 / (a0 + 2.0 * (f * std::polar(1.0, -k2)).real()); };
    auto r = periodic_mean<double>(g, [](double v) { return std::abs(v); }, options);
    out.matrix = Eigen::MatrixXcd::Constant(1, 1, r.value);
    out.quad_error = r.error;
    out.points = r.points;
    out.converged = r.converged;
    return out;
  }
  auto g = [&](double k2) -> Eigen::MatrixXcd {
    const cplx e = std::polar(1.0, -k2);
    Eigen::MatrixXcd l = a + slice.forward * e + slice.forward.adjoint() * std::conj(e);
    return l.partialPivLu().inverse();
  };
  auto norm = [](const Eigen::MatrixXcd& m) { return m.cwiseAbs().maxCoeff(); };
  auto r = periodic_mean<Eigen::MatrixXcd>(g, norm, options);
  out.matrix = std::move(r.value);
  out.quad_error = r.error;
  out.points = r.points;
  out.converged = r.converged;
  return out;
}

AveragedResolvent averaged_resolvent_k2(const LatticeSpec& spec, double omega, double k1,
                                        double tol) {
  check_omega(omega);
  check_k1(k1);
  if (propagative_projection_k1(spec, k1).contains(omega, 1e-9)) {
    throw SpectrumViolation("omega lies in I_p(k1)", omega);
  }
  return averaged_resolvent_k2_unchecked(spec, omega, k1, quad_options(tol));
}

GuidedDet guided_det_unchecked(const LatticeSpec& spec, double omega, double k1,
                               const QuadratureOptions& options) {
  if (all_zero(spec.strip_perturbation)) return {cplx{1.0, 0.0}, 0.0};
  const auto r = averaged_resolvent_k2_unchecked(spec, omega, k1, options);
  const int n = spec.size();
  cplx value;
  if (n == 1) {
    value = 1.0 + omega * omega * r.matrix(0, 0) * spec.strip_perturbation[0];
  } else {
    const Eigen::VectorXd m1 = Eigen::Map<const Eigen::VectorXd>(spec.strip_perturbation.data(), n);
    Eigen::MatrixXcd lg = Eigen::MatrixXcd::Identity(n, n);
    lg += omega * omega * r.matrix * m1.asDiagonal();
    value = lg.partialPivLu().determinant();
  }
  return {value, std::abs(value.imag()) / (1.0 + std::abs(value.real())), r.converged};
}

GuidedDet guided_det(const LatticeSpec& spec, double omega, double k1, double tol) {
  check_omega(omega);
  check_k1(k1);
  if (all_zero(spec.strip_perturbation)) return {cplx{1.0, 0.0}, 0.0};
  if (propagative_projection_k1(spec, k1).contains(omega, 1e-9)) {
    throw SpectrumViolation("omega lies in I_p(k1)", omega);
  }
  return guided_det_unchecked(spec, omega, k1, quad_options(tol));
}

GuidedSpectrum guided_spectrum(const LatticeSpec& spec, double k1, const IntervalSet& search,
                               const GuidedOptions& opt) {
  check_k1(k1);
  GuidedSpectrum out;
  out.k1 = k1;
  out.band = propagative_projection_k1(spec, k1, opt.projection);
  std::vector<Interval> scan;
  for (const auto& iv : search) {
    if (auto g = guarded(out.band, iv, opt.guard)) scan.push_back(*g);
  }
  out.search = IntervalSet(scan);
  if (all_zero(spec.strip_perturbation)) return out;

  for (std::size_t c = 0; c < out.search.size(); ++c) {
    const auto s = adaptive_scan(spec, k1, out.search[c], opt);
    std::size_t prev = s.f.size();
    for (std::size_t i = 0; i < s.f.size(); ++i) {
      if (std::isnan(s.f[i])) {
        const double lo = prev < s.f.size() ? s.x[prev] : out.search[c].lo;
        const double hi = i + 1 < s.x.size() ? s.x[i + 1] : out.search[c].hi;
        out.unresolved.push_back({lo, hi});
        continue;
      }
      if (prev < s.f.size() && ((s.f[prev] < 0.0) != (s.f[i] < 0.0))) {
        try {
          const double root = bisect_root(
              [&](double w) { return re_det(spec, w, k1, opt.tol); }, s.x[prev], s.f[prev],
              s.x[i], s.f[i], opt.root_tol);
          const auto det = guided_det_unchecked(spec, root, k1, quad_options(opt.tol));
          if (det.realness <= opt.realness_gate) {
            out.roots.push_back({root, det.realness, c});
          } else {
            out.rejected.push_back(root);
          }
        } catch (const NonConvergence&) {
          out.unresolved.push_back({s.x[prev], s.x[i]});
        }
      }
      prev = i;
    }
  }
  return out;
}

GuidedSpectrum guided_spectrum(const LatticeSpec& spec, double k1, const GuidedOptions& opt) {
  check_k1(k1);
  const auto band = propagative_projection_k1(spec, k1, opt.projection);
  const double top = frequency_bound(spec, true, false);
  return guided_spectrum(spec, k1, band.complement(0.0, top), opt);
}

namespace {

// Number of band components lying below `gap`; the label under which a gap
// is followed across k1 (the Gershgorin slice above the top band comes and goes).
std::size_t bands_below(const IntervalSet& band, const Interval& gap) {
  return static_cast<std::size_t>(std::count_if(
      band.begin(), band.end(), [&](const Interval& b) { return b.hi <= gap.lo; }));
}

// A guided branch is followed across k1 by its gap label and its rank inside
// that gap (counted from the top).
struct BranchKey {
  std::size_t gap = 0;
  std::size_t rank = 0;
  auto operator<=>(const BranchKey&) const = default;
};

class BranchTracker {
 public:
  BranchTracker(const LatticeSpec& spec, const GuidedOptions& opt)
      : spec_(spec), opt_(opt), top_(frequency_bound(spec, true, false)) {}

  struct Gap {
    Interval raw;
    Interval scan;
  };

  std::optional<Gap> gap_at(double k1, std::size_t label) const {
    const double k = wrap_angle(k1);
    const auto band = propagative_projection_k1(spec_, k, opt_.projection);
    for (const auto& raw : band.complement(0.0, top_)) {
      const auto scan = guarded(band, raw, opt_.guard);
      if (scan && bands_below(band, *scan) == label) return Gap{raw, *scan};
    }
    return std::nullopt;
  }

  // Root of the branch nearest to `guess`, searched by an expanding bracket.
  std::optional<double> root_near(double k1, std::size_t label, double guess) const {
    const auto gap = gap_at(k1, label);
    if (!gap) return std::nullopt;
    const double k = wrap_angle(k1);
    const Interval s = gap->scan;
    auto f = [&](double w) { return re_det(spec_, w, k, opt_.tol); };
    auto sign_f = [&](double w) {
      const double v = scan_det(spec_, w, k, opt_.tol);
      if (std::isnan(v)) throw NonConvergence("sign of det L_g not resolved", w);
      return v;
    };
    const double x0 = std::clamp(guess, s.lo, s.hi);
    const double f0 = sign_f(x0);
    double step = 1e-4 * std::max(s.width(), 1e-12);
    while (true) {
      const double a = std::max(s.lo, x0 - step);
      const double b = std::min(s.hi, x0 + step);
      if (a < x0) {
        const double fa = sign_f(a);
        if ((fa < 0.0) != (f0 < 0.0)) return bisect_root(f, a, fa, x0, f0, opt_.root_tol);
      }
      if (b > x0) {
        const double fb = sign_f(b);
        if ((fb < 0.0) != (f0 < 0.0)) return bisect_root(f, x0, f0, b, fb, opt_.root_tol);
      }
      if (a <= s.lo && b >= s.hi) return std::nullopt;
      step *= 4.0;
    }
  }

  // Value at which a branch ends between k_in (branch present, value v_in)
  // and k_out (branch absent): either its gap closes or it merges into an
  // edge of the gap.
  double termination(double k_in, double k_out, std::size_t label, double v_in) const {
    constexpr int kSteps = 60;
    if (!gap_at(k_out, label)) {
      double in = k_in, out = k_out;
      for (int i = 0; i < kSteps; ++i) {
        const double mid = 0.5 * (in + out);
        (gap_at(mid, label) ? in : out) = mid;
      }
      const auto gap = gap_at(in, label);
      if (!gap) return v_in;
      // the bottom gap [0, a) can only close at 0; its upper edge carries
      // the sqrt(eps) error of sqrt(lambda) there
      return gap->raw.lo == 0.0 ? 0.0 : 0.5 * (gap->raw.lo + gap->raw.hi);
    }
    double in = k_in, out = k_out, value = v_in;
    for (int i = 0; i < kSteps; ++i) {
      const double mid = 0.5 * (in + out);
      std::optional<double> r;
      try {
        r = root_near(mid, label, value);
      } catch (const NonConvergence&) {
        // only happens within a few guards of the band: the branch has merged
      }
      if (r) {
        in = mid;
        value = *r;
      } else {
        out = mid;
      }
    }
    return value;
  }

  // Polished minimum (sign = +1) or maximum (sign = -1) of a branch around k.
  double polish(double k, double h, std::size_t label, double guess, double sign) const {
    auto f = [&](double x) {
      try {
        const auto r = root_near(x, label, guess);
        return r ? sign * *r : 1e10;
      } catch (const NonConvergence&) {
        return 1e10;
      }
    };
    const auto best = boost::math::tools::brent_find_minima(f, k - h, k + h, kBrentBits);
    return sign * best.second;
  }

 private:
  const LatticeSpec& spec_;
  const GuidedOptions& opt_;
  double top_;
};

std::vector<Interval> projection_level(const LatticeSpec& spec, const GuidedOptions& opt,
                                       std::size_t g) {
  std::vector<double> ks(g);
  for (std::size_t i = 0; i < g; ++i) ks[i] = -kPi + 2.0 * kPi * static_cast<double>(i) / g;
  const double h = 2.0 * kPi / g;

  std::vector<GuidedSpectrum> samples(g);
  parallel_for(g, [&](std::size_t i) { samples[i] = guided_spectrum(spec, ks[i], opt); });

  std::map<BranchKey, std::vector<std::optional<double>>> branches;
  for (std::size_t i = 0; i < g; ++i) {
    const auto& s = samples[i];
    std::vector<std::size_t> per_gap(s.search.size(), 0);
    for (const auto& r : s.roots) ++per_gap[r.component];
    std::vector<std::size_t> seen(s.search.size(), 0);
    for (const auto& r : s.roots) {  // ascending within each gap
      const BranchKey key{bands_below(s.band, s.search[r.component]),
                          per_gap[r.component] - 1 - seen[r.component]++};
      auto& values = branches[key];
      values.resize(g);
      values[i] = r.omega;
    }
  }

  BranchTracker tracker(spec, opt);
  std::vector<Interval> ranges;
  for (const auto& [key, values] : branches) {
    const bool full = std::all_of(values.begin(), values.end(),
                                  [](const auto& v) { return v.has_value(); });
    // collect cyclic runs of consecutive samples carrying the branch
    std::vector<std::vector<std::size_t>> runs;
    if (full) {
      runs.emplace_back();
      for (std::size_t i = 0; i < g; ++i) runs.back().push_back(i);
    } else {
      for (std::size_t i = 0; i < g; ++i) {
        if (!values[i] || values[(i + g - 1) % g]) continue;
        runs.emplace_back();
        for (std::size_t j = i; values[j]; j = (j + 1) % g) runs.back().push_back(j);
      }
    }
    for (const auto& run : runs) {
      const std::size_t len = run.size();
      // unwrapped k along the run
      auto k_of = [&](std::size_t pos) { return ks[run[0]] + h * static_cast<double>(pos); };
      std::size_t pmin = 0, pmax = 0;
      for (std::size_t p = 1; p < len; ++p) {
        if (*values[run[p]] < *values[run[pmin]]) pmin = p;
        if (*values[run[p]] > *values[run[pmax]]) pmax = p;
      }
      double lo = *values[run[pmin]], hi = *values[run[pmax]];
      auto interior = [&](std::size_t p) { return full || (p > 0 && p + 1 < len); };
      if (interior(pmin)) {
        lo = std::min(lo, tracker.polish(k_of(pmin), h, key.gap, *values[run[pmin]], 1.0));
      }
      if (interior(pmax)) {
        hi = std::max(hi, tracker.polish(k_of(pmax), h, key.gap, *values[run[pmax]], -1.0));
      }
      if (!full) {
        const double first = tracker.termination(k_of(0), k_of(0) - h, key.gap, *values[run[0]]);
        const double last = tracker.termination(k_of(len - 1), k_of(len - 1) + h, key.gap,
                                                *values[run[len - 1]]);
        lo = std::min({lo, first, last});
        hi = std::max({hi, first, last});
      }
      ranges.push_back({lo, hi});
    }
  }
  return ranges;
}

}  // namespace

IntervalSet guided_projection(const LatticeSpec& spec, const GuidedOptions& opt) {
  if (all_zero(spec.strip_perturbation)) return {};
  std::size_t g = std::max<std::size_t>(opt.sweep_grid, 8);
  g += g % 2;  // keep k1 = 0 on the grid
  IntervalSet current(projection_level(spec, opt, g), opt.edge_tol);
  double change = std::numeric_limits<double>::infinity();
  for (int r = 0; r < opt.max_refinements; ++r) {
    g *= 2;
    IntervalSet next(projection_level(spec, opt, g), opt.edge_tol);
    if (next.size() == current.size()) {
      change = 0.0;
      for (std::size_t i = 0; i < next.size(); ++i) {
        change = std::max({change, std::abs(next[i].lo - current[i].lo),
                           std::abs(next[i].hi - current[i].hi)});
      }
      if (change < opt.edge_tol) return next;
    }
    current = std::move(next);
  }
  throw NonConvergence("guided projection did not stabilise", change);
}

double uniform_resolvent_closed_form(double omega, double k1) {
  const double c = std::cos(k1);
  const double w2 = omega * omega;
  const double a = w2 - 4.0 + 2.0 * c;
  const double root = std::sqrt((a - 2.0) * (a + 2.0));
  if (w2 < 2.0 - 2.0 * c) return -1.0 / root;
  if (w2 > 6.0 - 2.0 * c) return 1.0 / root;
  throw SpectrumViolation("omega lies in I_p(k1)", omega);
}

double guided_closed_form(double m1, double k1) {
  if (!(m1 > -1.0)) throw DomainError("strip mass 1 + m1 must be positive");
  const double c = std::cos(k1);
  if (m1 == 0.0) return std::sqrt(2.0 - 2.0 * c);
  const double b = 4.0 - 2.0 * c;
  const double s = std::sqrt(m1 * m1 * b * b + 4.0 - 4.0 * m1 * m1);
  const double w2 = m1 < 0.0 ? (b + s) / (1.0 - m1 * m1) : (b - 2.0) * (b + 2.0) / (b + s);
  return std::sqrt(w2);
}

IntervalSet uniform_guided_projection(double m1) {
  if (!(m1 > -1.0)) throw DomainError("strip mass 1 + m1 must be positive");
  if (m1 == 0.0) return {};
  const double q = std::sqrt(8.0 * m1 * m1 + 1.0);
  if (m1 < 0.0) {
    const double d = std::sqrt(1.0 - m1 * m1);
    return IntervalSet::single(2.0 / d, std::sqrt(6.0 + 2.0 * q) / d);
  }
  return IntervalSet::single(0.0, std::sqrt(32.0 / (6.0 + 2.0 * q)));
}

}  // namespace latticegap
