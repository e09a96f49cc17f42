#include <gtest/gtest.h>

#include <cmath>

#include <Eigen/Eigenvalues>

#include "latticegap/errors.hpp"
#include "latticegap/finite_oracle.hpp"
#include "latticegap/guided.hpp"
#include "latticegap/localized.hpp"
#include "latticegap/modes.hpp"

using namespace latticegap;

TEST(FiniteLattice, ClampedStiffness) {
  const auto s = uniform_square(1, 1, 1.0, 2.0, -0.5);
  const auto f = build_finite_lattice(s, 7, 5);
  ASSERT_EQ(f.size(), 35);
  EXPECT_EQ(f.origin_x, 3);
  EXPECT_EQ(f.origin_y, 2);
  const Eigen::MatrixXd k = f.stiffness;
  EXPECT_LT((k - k.transpose()).cwiseAbs().maxCoeff(), 1e-15);
  // every node keeps 4 springs: interior ones to neighbours, edge ones partly to the wall
  for (int i = 0; i < f.size(); ++i) EXPECT_DOUBLE_EQ(k(i, i), 4.0);
  EXPECT_DOUBLE_EQ(f.mass(f.index(3, 2)), 2.5);  // 1 + 2 - 0.5
  EXPECT_DOUBLE_EQ(f.mass(f.index(0, 2)), 3.0);  // strip row
  EXPECT_DOUBLE_EQ(f.mass(f.index(3, 0)), 1.0);
  EXPECT_THROW(build_finite_lattice(s, 0, 5), DomainError);
}

TEST(FiniteLattice, InertiaCountMatchesDenseSolve) {
  const auto s = uniform_square(1, 1, 1.0, -0.6, 0.4);
  const auto f = build_finite_lattice(s, 9, 8);
  const Eigen::MatrixXd k = f.stiffness;
  const Eigen::MatrixXd m = f.mass.asDiagonal();
  Eigen::GeneralizedSelfAdjointEigenSolver<Eigen::MatrixXd> es(k, m);
  const auto& ev = es.eigenvalues();
  for (double sigma : {0.3, 2.0, 5.5, 9.0, 30.0}) {
    const int dense = static_cast<int>((ev.array() < sigma).count());
    EXPECT_EQ(eigenvalues_below(f, sigma), dense) << sigma;
  }
}

TEST(FiniteOracle, NeedsALargeEnoughLattice) {
  const auto s = uniform_square(1, 1, 1.0, 2.0, -2.6);
  OracleOptions o;
  o.width = 21;
  EXPECT_THROW(finite_oracle(s, uniform_gap_structure(2.0, 10.0), o), DomainError);
}

TEST(FiniteOracle, FindsTheHeavyStripMode) {
  const auto s = uniform_square(1, 1, 1.0, 2.0, -2.6);
  const auto gs = uniform_gap_structure(2.0, frequency_bound(s, true, true));
  OracleOptions o;
  o.width = o.height = 41;
  const auto rep = finite_oracle(s, gs, o);
  const auto c = rep.candidates();
  ASSERT_EQ(c.size(), 1u);
  EXPECT_NEAR(c[0].omega, 3.3109621113, 1e-6);
  EXPECT_LT(c[0].boundary_ratio, 1e-10);
  // same run, same seed: identical vector
  const auto again = finite_oracle(s, gs, o);
  EXPECT_EQ(again.candidates()[0].vector, c[0].vector);
}

namespace {

// Guided mode of the uniform strip from a finite column: nodes n2 = -100..100
// at fixed k1, clamped ends, strip mass at n2 = 0.
std::pair<double, Eigen::VectorXd> column_mode(double m1, double k1) {
  const int n = 201;
  Eigen::MatrixXd k = Eigen::MatrixXd::Zero(n, n);
  Eigen::VectorXd m = Eigen::VectorXd::Ones(n);
  for (int i = 0; i < n; ++i) {
    k(i, i) = 4 - 2 * std::cos(k1);
    if (i > 0) k(i, i - 1) = k(i - 1, i) = -1;
  }
  m(100) += m1;
  Eigen::GeneralizedSelfAdjointEigenSolver<Eigen::MatrixXd> es(k, Eigen::MatrixXd(m.asDiagonal()));
  // a heavy strip pulls the lowest level below the band
  return {std::sqrt(es.eigenvalues()(0)), es.eigenvectors().col(0)};
}

}  // namespace

TEST(GuidedMode, MatchesFiniteColumn) {
  const double m1 = 2.0, k1 = kPi;
  const double w = guided_closed_form(m1, k1);
  const auto [wc, vc] = column_mode(m1, k1);
  EXPECT_NEAR(w, wc, 1e-10);

  ReconstructionOptions ro;
  ro.window1 = 3;
  ro.window2 = 21;
  const auto mode = reconstruct_guided_mode(uniform_square(1, 1, 1.0, m1), k1, w, ro);
  // profile across the strip
  Eigen::VectorXcd a(21);
  Eigen::VectorXd b(21);
  for (int d = -10; d <= 10; ++d) {
    a(d + 10) = mode.shape(mode.origin_x, mode.origin_y + d);
    b(d + 10) = vc(100 + d);
  }
  const double cosine = std::abs(a.dot(b.cast<cplx>())) / (a.norm() * b.norm());
  EXPECT_GT(cosine, 0.999999);
  for (int d = 1; d <= 10; ++d) {
    EXPECT_NEAR(std::abs(a(10 + d)), std::abs(a(10 - d)), 1e-9);  // symmetric about the strip
    EXPECT_LT(std::abs(a(10 + d)), std::abs(a(10 + d - 1)));       // decaying
  }
}

TEST(GuidedMode, DecayRateFromTheRecurrence) {
  // away from the strip u(n2 + 1) + u(n2 - 1) = (4 - 2cos k1 - w^2) u(n2)
  for (auto [m1, k1] : {std::pair{2.0, 2.0}, {0.5, kPi}, {-0.9, 1.0}}) {
    const double w = guided_closed_form(m1, k1);
    const double b = 4 - 2 * std::cos(k1) - w * w;
    const double rate = std::acosh(std::abs(b) / 2);
    const auto mode = reconstruct_guided_mode(uniform_square(1, 1, 1.0, m1), k1, w);
    EXPECT_NEAR(mode.decay_rate_y, rate, 1e-6) << m1 << " " << k1;
    EXPECT_GT(mode.fit_r2, 0.99);
  }
}

TEST(GuidedMode, FloquetFactorAlongTheStrip) {
  const double m1 = -0.5, k1 = 0.8;
  const auto mode = reconstruct_guided_mode(uniform_square(1, 1, 1.0, m1), k1,
                                            guided_closed_form(m1, k1));
  const cplx f = std::polar(1.0, -k1);
  double worst = 0;
  for (int x = 0; x + 1 < mode.shape.rows(); ++x) {
    for (int y = 0; y < mode.shape.cols(); ++y) {
      const cplx u0 = mode.shape(x, y), u1 = mode.shape(x + 1, y);
      worst = std::max(worst, std::abs(u1 - f * u0) / mode.shape.cwiseAbs().maxCoeff());
    }
  }
  EXPECT_LT(worst, 1e-8);
}

TEST(GuidedMode, WeakStripDelocalizes) {
  const double k1 = 2.0;
  double prev = HUGE_VAL;
  for (double m1 : {1.0, 0.3, 0.1}) {
    const double w = guided_closed_form(m1, k1);
    const double rate = std::acosh((4 - 2 * std::cos(k1) - w * w) / 2);
    EXPECT_LT(rate, prev);
    prev = rate;
  }
  EXPECT_LT(prev, 0.2);
}

TEST(LocalizedMode, RejectsNonRoots) {
  const auto s = uniform_square(1, 1, 1.0, 2.0, 0.0);
  EXPECT_THROW(reconstruct_localized_mode(s, 4.0), DomainError);
  const auto t = uniform_square(1, 1, 1.0, 2.0, -2.6);
  EXPECT_THROW(reconstruct_localized_mode(t, 4.0), DomainError);
  ReconstructionOptions even;
  even.window1 = 20;
  EXPECT_THROW(reconstruct_localized_mode(t, 3.3109621113, even), DomainError);
}

TEST(LocalizedMode, ShapeIsCentredAndSymmetric) {
  const auto s = uniform_square(1, 1, 1.0, -0.9, 0.1);
  const auto gs = uniform_gap_structure(-0.9, frequency_bound(s, true, true));
  const auto lm = localized_modes(s, gs);
  ASSERT_EQ(lm.modes.size(), 1u);
  ReconstructionOptions ro;
  ro.window1 = ro.window2 = 11;
  const auto m = reconstruct_localized_mode(s, lm.modes[0].omega, ro);
  Eigen::Index ix = 0, iy = 0;
  m.shape.cwiseAbs().maxCoeff(&ix, &iy);
  EXPECT_EQ(ix, m.origin_x);
  EXPECT_EQ(iy, m.origin_y);
  const double peak = std::abs(m.shape(ix, iy));
  for (int dx = -5; dx <= 5; ++dx) {
    for (int dy = -5; dy <= 5; ++dy) {
      const cplx a = m.shape(m.origin_x + dx, m.origin_y + dy);
      const cplx b = m.shape(m.origin_x - dx, m.origin_y - dy);
      EXPECT_LT(std::abs(a - std::conj(b)) / peak, 1e-8);
    }
  }
  EXPECT_GT(m.decay_rate_x, 0.0);
  EXPECT_GT(m.decay_rate_y, 0.0);
  EXPECT_GE(m.fit_r2, 0.99);
}

TEST(FitDecay, ExactExponential) {
  std::vector<double> a;
  for (int d = 1; d <= 8; ++d) a.push_back(3.0 * std::exp(-0.7 * d));
  const auto [rate, r2] = fit_decay(a);
  EXPECT_NEAR(rate, 0.7, 1e-12);
  EXPECT_NEAR(r2, 1.0, 1e-12);
}
