#pragma once

#include <complex>
#include <cstdint>
#include <string>
#include <vector>

#include <Eigen/Dense>

namespace latticegap {

using cplx = std::complex<double>;

inline constexpr double kPi = 3.14159265358979323846;

/// Floquet wavevector (k1, k2) in the Brillouin zone [-pi, pi]^2.
struct Wavevector {
  double k1 = 0.0;
  double k2 = 0.0;
  Wavevector operator-() const { return {-k1, -k2}; }
};

/// Undirected spring between node `from` in cell r and node `to` in cell
/// r + (offset1, offset2). Stored once; the reverse direction is implied.
struct Link {
  int from = 0;
  int to = 0;
  int offset1 = 0;
  int offset2 = 0;
  friend bool operator==(const Link&, const Link&) = default;
};

/// Unit cell of a periodic mass-spring lattice together with its line-defect
/// (strip) and point-defect mass increments.
///
/// Nodes are indexed row-major over (i1, i2) in [0, n1) x [0, n2):
/// index = i1 * n2 + i2. The strip occupies the cell row r2 = 0 and repeats
/// along e1 only; the point perturbation acts on the single cell r = (0, 0).
struct LatticeSpec {
  int n1 = 1;
  int n2 = 1;
  std::vector<double> masses;              ///< background masses, size n1*n2
  std::vector<double> strip_perturbation;  ///< line-defect increments
  std::vector<double> point_perturbation;  ///< point-defect increments
  std::vector<Link> links;

  int size() const { return n1 * n2; }
  int node(int i1, int i2) const { return i1 * n2 + i2; }

  /// Node degrees counting both endpoints of every link.
  std::vector<int> degrees() const;

  /// Throws SpecError naming the first violated invariant.
  void validate() const;

  /// Canonical text form; stable across runs and platforms.
  std::string canonical() const;

  /// 64-bit FNV-1a of canonical(), as 16 hex digits.
  std::string hash() const;

  bool has_strip() const;
  bool has_point_defect() const;
};

/// Square-lattice links for an n1 x n2 cell: every node is joined to its
/// right and upper neighbour, wrapping into the next cell at the boundary.
std::vector<Link> square_links(int n1, int n2);

/// The homogeneous square lattice with uniform mass, a strip increment on the
/// cell row i2 = 0 and a point increment on node (0, 0).
LatticeSpec uniform_square(int n1, int n2, double mass = 1.0, double strip = 0.0,
                           double point = 0.0);

/// Cell-sized matrices of the Bloch-reduced problem at one wavevector.
struct BlochOperators {
  Wavevector k;
  Eigen::MatrixXcd l_hat;   ///< L0(k) - 4 I
  Eigen::VectorXd m_hat;    ///< diagonal of M
  Eigen::VectorXd m1_hat;   ///< diagonal of M1 (strip)
  Eigen::VectorXd m2_hat;   ///< diagonal of M2 (point defect)
};

bool in_brillouin_zone(Wavevector k);

/// Wraps an angle into [-pi, pi].
double wrap_angle(double k);

/// Throws DomainError if k lies outside [-pi, pi]^2.
BlochOperators assemble_bloch(const LatticeSpec& spec, Wavevector k);

/// max |L - L^H| over all entries.
double hermitian_check(const BlochOperators& ops);

/// Decomposition L(k1, k2) = base + forward e^{-i k2} + forward^H e^{i k2}
/// at fixed k1; used to sweep k2 without re-assembling.
struct BlochSliceK2 {
  double k1 = 0.0;
  Eigen::MatrixXcd base;
  Eigen::MatrixXcd forward;

  Eigen::MatrixXcd at(double k2) const;
};

BlochSliceK2 slice_k2(const LatticeSpec& spec, double k1);

/// Upper bound on every eigenfrequency of the lattice (Gershgorin bound on
/// the stiffness divided by the smallest mass present).
double frequency_bound(const LatticeSpec& spec, bool with_strip, bool with_point);

}  // namespace latticegap
