#include "latticegap/finite_oracle.hpp"

#include <algorithm>
#include <cmath>
#include <random>

#include <Eigen/SparseCholesky>

#include "latticegap/errors.hpp"

namespace latticegap {

namespace {

int floor_div(int a, int b) {
  int q = a / b;
  if (a % b != 0 && ((a < 0) != (b < 0))) --q;
  return q;
}

using Solver = Eigen::SimplicialLDLT<Eigen::SparseMatrix<double>, Eigen::Lower,
                                     Eigen::AMDOrdering<int>>;

// Factorizations of K - sigma M sharing one symbolic analysis.
class ShiftedSystem {
 public:
  explicit ShiftedSystem(const FiniteLattice& lattice) : lattice_(lattice), a_(lattice.stiffness) {
    solver_.analyzePattern(a_);
  }

  bool factorize(double sigma) {
    a_ = lattice_.stiffness;
    for (int i = 0; i < lattice_.size(); ++i) a_.coeffRef(i, i) -= sigma * lattice_.mass(i);
    solver_.factorize(a_);
    return solver_.info() == Eigen::Success;
  }

  int below(double sigma) {
    // an exact hit on an eigenvalue leaves a zero pivot; nudge the shift
    double s = sigma;
    for (int attempt = 0; !factorize(s); ++attempt) {
      if (attempt > 8) throw NonConvergence("LDLT of the shifted stiffness failed", s);
      s += 1e-13 * std::max(1.0, std::abs(sigma)) * (attempt + 1);
    }
    return static_cast<int>((solver_.vectorD().array() < 0.0).count());
  }

  Eigen::VectorXd solve(const Eigen::VectorXd& rhs) const { return solver_.solve(rhs); }

 private:
  const FiniteLattice& lattice_;
  Eigen::SparseMatrix<double> a_;
  Solver solver_;
};

struct Bracket {
  double lo;
  double hi;
};

void isolate(ShiftedSystem& sys, double a, int ca, double b, int cb, double tol,
             std::vector<Bracket>& out) {
  if (cb <= ca) return;
  if (b - a <= tol * std::max(1.0, b)) {
    for (int i = ca; i < cb; ++i) out.push_back({a, b});
    return;
  }
  const double m = 0.5 * (a + b);
  const int cm = sys.below(m);
  isolate(sys, a, ca, m, cm, tol, out);
  isolate(sys, m, cm, b, cb, tol, out);
}

}  // namespace

FiniteLattice build_finite_lattice(const LatticeSpec& spec, int width, int height) {
  spec.validate();
  if (width < 1 || height < 1) throw DomainError("finite lattice needs positive dimensions");
  FiniteLattice lat;
  lat.width = width;
  lat.height = height;
  lat.origin_x = width / 2 - (width / 2) % spec.n1;
  lat.origin_y = height / 2 - (height / 2) % spec.n2;

  struct Site {
    int r1, r2, node;
  };
  auto site = [&](int x, int y) {
    const int dx = x - lat.origin_x, dy = y - lat.origin_y;
    const int r1 = floor_div(dx, spec.n1), r2 = floor_div(dy, spec.n2);
    return Site{r1, r2, spec.node(dx - r1 * spec.n1, dy - r2 * spec.n2)};
  };
  auto coords = [&](int r1, int r2, int node) {
    return std::pair{lat.origin_x + r1 * spec.n1 + node / spec.n2,
                     lat.origin_y + r2 * spec.n2 + node % spec.n2};
  };
  auto inside = [&](std::pair<int, int> p) {
    return p.first >= 0 && p.first < width && p.second >= 0 && p.second < height;
  };

  const int n = width * height;
  lat.mass.resize(n);
  std::vector<Eigen::Triplet<double>> t;
  t.reserve(static_cast<std::size_t>(n) * 5);
  for (int y = 0; y < height; ++y) {
    for (int x = 0; x < width; ++x) {
      const auto s = site(x, y);
      const int u = lat.index(x, y);
      double m = spec.masses[s.node];
      if (s.r2 == 0) m += spec.strip_perturbation[s.node];
      if (s.r1 == 0 && s.r2 == 0) m += spec.point_perturbation[s.node];
      lat.mass(u) = m;
      for (const auto& l : spec.links) {
        if (l.from == s.node) {
          const auto p = coords(s.r1 + l.offset1, s.r2 + l.offset2, l.to);
          if (inside(p)) {
            const int v = lat.index(p.first, p.second);
            t.emplace_back(u, u, 1.0);
            t.emplace_back(v, v, 1.0);
            t.emplace_back(u, v, -1.0);
            t.emplace_back(v, u, -1.0);
          } else {
            t.emplace_back(u, u, 1.0);  // spring to the clamped frame
          }
        }
        if (l.to == s.node) {
          const auto p = coords(s.r1 - l.offset1, s.r2 - l.offset2, l.from);
          if (!inside(p)) t.emplace_back(u, u, 1.0);
        }
      }
    }
  }
  lat.stiffness.resize(n, n);
  lat.stiffness.setFromTriplets(t.begin(), t.end());
  lat.stiffness.makeCompressed();
  return lat;
}

int eigenvalues_below(const FiniteLattice& lattice, double sigma) {
  ShiftedSystem sys(lattice);
  return sys.below(sigma);
}

std::vector<OracleMode> OracleReport::candidates() const {
  std::vector<OracleMode> out;
  std::copy_if(in_gaps.begin(), in_gaps.end(), std::back_inserter(out),
               [](const OracleMode& m) { return m.candidate; });
  return out;
}

OracleReport finite_oracle(const LatticeSpec& spec, const OracleOptions& options) {
  return finite_oracle(spec, gap_structure(spec), options);
}

OracleReport finite_oracle(const LatticeSpec& spec, const GapStructure& gaps,
                           const OracleOptions& opt) {
  if (opt.width < 41 || opt.height < 41) {
    throw DomainError("finite oracle needs at least 41 x 41 nodes");
  }
  const auto lat = build_finite_lattice(spec, opt.width, opt.height);
  ShiftedSystem sys(lat);
  OracleReport report;
  report.width = lat.width;
  report.height = lat.height;

  std::mt19937 rng(opt.seed);
  std::uniform_real_distribution<double> unit(-1.0, 1.0);
  const int n = lat.size();

  for (std::size_t j = 0; j < gaps.gaps.size(); ++j) {
    const double a = gaps.gaps[j].lo * gaps.gaps[j].lo;
    const double b = gaps.gaps[j].hi * gaps.gaps[j].hi;
    std::vector<Bracket> found;
    isolate(sys, a, sys.below(a), b, sys.below(b), opt.eig_tol, found);

    std::vector<Eigen::VectorXd> cluster;  // M-orthogonal vectors sharing a bracket
    for (std::size_t e = 0; e < found.size(); ++e) {
      if (e == 0 || found[e].lo != found[e - 1].lo) cluster.clear();
      const double sigma = 0.5 * (found[e].lo + found[e].hi);
      if (!sys.factorize(sigma)) sys.below(sigma);
      Eigen::VectorXd x(n);
      for (int i = 0; i < n; ++i) x(i) = 1.0 + 0.1 * unit(rng);
      for (int it = 0; it < 6; ++it) {
        for (const auto& c : cluster) x -= c.dot(lat.mass.cwiseProduct(x)) * c;
        x = sys.solve(lat.mass.cwiseProduct(x));
        x /= std::sqrt(x.dot(lat.mass.cwiseProduct(x)));
      }
      cluster.push_back(x);

      OracleMode mode;
      const double rq = x.dot(lat.stiffness * x) / x.dot(lat.mass.cwiseProduct(x));
      mode.omega = std::sqrt(rq >= found[e].lo && rq <= found[e].hi ? rq : sigma);
      mode.gap = j;
      const double s2 = x.squaredNorm();
      mode.participation_ratio = s2 * s2 / (n * x.array().pow(4).sum());
      Eigen::Index imax = 0;
      const double peak = x.cwiseAbs().maxCoeff(&imax);
      double frame = 0.0;
      for (int xx = 0; xx < lat.width; ++xx) {
        frame = std::max({frame, std::abs(x(lat.index(xx, 0))),
                          std::abs(x(lat.index(xx, lat.height - 1)))});
      }
      for (int yy = 0; yy < lat.height; ++yy) {
        frame = std::max({frame, std::abs(x(lat.index(0, yy))),
                          std::abs(x(lat.index(lat.width - 1, yy)))});
      }
      mode.boundary_ratio = frame / peak;
      mode.candidate = mode.participation_ratio < opt.pr_threshold;
      mode.vector = x / (x(imax) < 0.0 ? -peak : peak);
      if (mode.candidate && mode.boundary_ratio > opt.boundary_tol) {
        report.warnings.push_back("mode at omega " + std::to_string(mode.omega) +
                                  " reaches the clamped frame (ratio " +
                                  std::to_string(mode.boundary_ratio) +
                                  "); enlarge the lattice");
      }
      report.in_gaps.push_back(std::move(mode));
    }
  }
  return report;
}

}  // namespace latticegap
