#include "latticegap/lattice_model.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <set>
#include <sstream>
#include <tuple>

#include "latticegap/errors.hpp"

namespace latticegap {

std::vector<int> LatticeSpec::degrees() const {
  std::vector<int> deg(static_cast<std::size_t>(std::max(size(), 0)), 0);
  for (const auto& l : links) {
    if (l.from < 0 || l.from >= size() || l.to < 0 || l.to >= size()) continue;
    ++deg[l.from];
    ++deg[l.to];
  }
  return deg;
}

void LatticeSpec::validate() const {
  if (n1 < 1 || n2 < 1) throw SpecError("cell periods n1, n2 must be positive");
  const auto n = static_cast<std::size_t>(size());
  if (masses.size() != n) throw SpecError("masses must have n1*n2 entries");
  if (strip_perturbation.size() != n)
    throw SpecError("strip_perturbation must have n1*n2 entries");
  if (point_perturbation.size() != n)
    throw SpecError("point_perturbation must have n1*n2 entries");

  for (std::size_t i = 0; i < n; ++i) {
    const double m = masses[i];
    const double s = strip_perturbation[i];
    const double p = point_perturbation[i];
    if (!std::isfinite(m) || !std::isfinite(s) || !std::isfinite(p))
      throw SpecError("mass entries must be finite (node " + std::to_string(i) + ")");
    if (m <= 0.0)
      throw SpecError("background mass must be positive (node " + std::to_string(i) + ")");
    if (m + s <= 0.0)
      throw SpecError("strip mass M + M1 must be positive (node " + std::to_string(i) + ")");
    if (m + s + p <= 0.0)
      throw SpecError("defect mass M + M1 + M2 must be positive (node " +
                      std::to_string(i) + ")");
  }

  if (links.empty()) throw SpecError("adjacency is empty");
  std::set<std::tuple<int, int, int, int>> seen;
  for (const auto& l : links) {
    if (l.from < 0 || l.from >= size() || l.to < 0 || l.to >= size())
      throw SpecError("link references a node outside the cell");
    if (std::abs(l.offset1) > 1 || std::abs(l.offset2) > 1)
      throw SpecError("link offsets must be -1, 0 or +1 cell");
    if (l.from == l.to && l.offset1 == 0 && l.offset2 == 0)
      throw SpecError("self-link on node " + std::to_string(l.from));
    const auto fwd = std::make_tuple(l.from, l.to, l.offset1, l.offset2);
    const auto rev = std::make_tuple(l.to, l.from, -l.offset1, -l.offset2);
    if (seen.count(fwd) || seen.count(rev))
      throw SpecError("duplicate link " + std::to_string(l.from) + "-" + std::to_string(l.to));
    seen.insert(fwd);
  }
  const auto deg = degrees();
  for (std::size_t i = 0; i < n; ++i) {
    if (deg[i] == 0) throw SpecError("node " + std::to_string(i) + " has no links");
    // the operator is L0 - 4I; more than four springs makes it indefinite
    if (deg[i] > 4)
      throw SpecError("node " + std::to_string(i) + " has " + std::to_string(deg[i]) +
                      " links; at most 4 are supported");
  }
}

std::string LatticeSpec::canonical() const {
  std::ostringstream os;
  char buf[64];
  auto put = [&](double x) {
    std::snprintf(buf, sizeof buf, "%.17g", x);
    os << buf << ' ';
  };
  os << "cell " << n1 << ' ' << n2 << "\nmasses ";
  for (double m : masses) put(m);
  os << "\nstrip ";
  for (double m : strip_perturbation) put(m);
  os << "\npoint ";
  for (double m : point_perturbation) put(m);
  os << "\nlinks";
  for (const auto& l : links)
    os << ' ' << l.from << ':' << l.to << ':' << l.offset1 << ':' << l.offset2;
  os << '\n';
  return os.str();
}

std::string LatticeSpec::hash() const {
  std::uint64_t h = 1469598103934665603ULL;
  for (unsigned char c : canonical()) {
    h ^= c;
    h *= 1099511628211ULL;
  }
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

bool LatticeSpec::has_strip() const {
  return std::any_of(strip_perturbation.begin(), strip_perturbation.end(),
                     [](double v) { return v != 0.0; });
}

bool LatticeSpec::has_point_defect() const {
  return std::any_of(point_perturbation.begin(), point_perturbation.end(),
                     [](double v) { return v != 0.0; });
}

std::vector<Link> square_links(int n1, int n2) {
  std::vector<Link> links;
  links.reserve(static_cast<std::size_t>(2 * n1 * n2));
  for (int i1 = 0; i1 < n1; ++i1) {
    for (int i2 = 0; i2 < n2; ++i2) {
      const int here = i1 * n2 + i2;
      const int right = ((i1 + 1) % n1) * n2 + i2;
      const int up = i1 * n2 + (i2 + 1) % n2;
      links.push_back({here, right, i1 + 1 == n1 ? 1 : 0, 0});
      links.push_back({here, up, 0, i2 + 1 == n2 ? 1 : 0});
    }
  }
  return links;
}

LatticeSpec uniform_square(int n1, int n2, double mass, double strip, double point) {
  if (n1 < 1 || n2 < 1) throw SpecError("cell periods n1, n2 must be positive");
  LatticeSpec spec;
  spec.n1 = n1;
  spec.n2 = n2;
  const auto n = static_cast<std::size_t>(n1 * n2);
  spec.masses.assign(n, mass);
  spec.strip_perturbation.assign(n, 0.0);
  spec.point_perturbation.assign(n, 0.0);
  for (int i1 = 0; i1 < n1; ++i1) spec.strip_perturbation[spec.node(i1, 0)] = strip;
  spec.point_perturbation[0] = point;
  spec.links = square_links(n1, n2);
  return spec;
}

bool in_brillouin_zone(Wavevector k) {
  return std::abs(k.k1) <= kPi && std::abs(k.k2) <= kPi;
}

double wrap_angle(double k) {
  if (k >= -kPi && k <= kPi) return k;
  return std::remainder(k, 2.0 * kPi);
}

namespace {

cplx phase(int o1, int o2, double k1, double k2) {
  const double theta = -(o1 * k1 + o2 * k2);
  return {std::cos(theta), std::sin(theta)};
}

}  // namespace

BlochOperators assemble_bloch(const LatticeSpec& spec, Wavevector k) {
  if (!in_brillouin_zone(k))
    throw DomainError("wavevector outside the Brillouin zone [-pi, pi]^2");
  const int n = spec.size();
  BlochOperators ops;
  ops.k = k;
  ops.l_hat = -4.0 * Eigen::MatrixXcd::Identity(n, n);
  for (const auto& l : spec.links) {
    const cplx p = phase(l.offset1, l.offset2, k.k1, k.k2);
    ops.l_hat(l.from, l.to) += p;
    ops.l_hat(l.to, l.from) += std::conj(p);
  }
  ops.m_hat = Eigen::Map<const Eigen::VectorXd>(spec.masses.data(), n);
  ops.m1_hat = Eigen::Map<const Eigen::VectorXd>(spec.strip_perturbation.data(), n);
  ops.m2_hat = Eigen::Map<const Eigen::VectorXd>(spec.point_perturbation.data(), n);
  return ops;
}

double hermitian_check(const BlochOperators& ops) {
  return (ops.l_hat - ops.l_hat.adjoint()).cwiseAbs().maxCoeff();
}

Eigen::MatrixXcd BlochSliceK2::at(double k2) const {
  const cplx e{std::cos(k2), -std::sin(k2)};
  return base + forward * e + forward.adjoint() * std::conj(e);
}

BlochSliceK2 slice_k2(const LatticeSpec& spec, double k1) {
  const int n = spec.size();
  BlochSliceK2 s;
  s.k1 = k1;
  s.base = -4.0 * Eigen::MatrixXcd::Identity(n, n);
  s.forward = Eigen::MatrixXcd::Zero(n, n);
  for (const auto& l : spec.links) {
    const cplx p = phase(l.offset1, 0, k1, 0.0);
    if (l.offset2 == 0) {
      s.base(l.from, l.to) += p;
      s.base(l.to, l.from) += std::conj(p);
    } else if (l.offset2 == 1) {
      s.forward(l.from, l.to) += p;
    } else {
      // reversed link (to -> from) has offset2 = +1 and phase conj(p)
      s.forward(l.to, l.from) += std::conj(p);
    }
  }
  return s;
}

double frequency_bound(const LatticeSpec& spec, bool with_strip, bool with_point) {
  const auto deg = spec.degrees();
  const int max_deg = deg.empty() ? 0 : *std::max_element(deg.begin(), deg.end());
  double min_mass = std::numeric_limits<double>::infinity();
  for (int i = 0; i < spec.size(); ++i) {
    const double m = spec.masses[i];
    const double strip = m + spec.strip_perturbation[i];
    min_mass = std::min(min_mass, m);
    if (with_strip) min_mass = std::min(min_mass, strip);
    // the point defect sits inside the strip row
    if (with_point) min_mass = std::min(min_mass, strip + spec.point_perturbation[i]);
  }
  return std::sqrt((4.0 + max_deg) / min_mass);
}

}  // namespace latticegap
