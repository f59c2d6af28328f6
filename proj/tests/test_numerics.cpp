#include <cmath>
#include <random>

#include <Eigen/Eigenvalues>
#include <gtest/gtest.h>

#include "sosdec/errors.hpp"
#include "sosdec/measures.hpp"
#include "sosdec/numerics.hpp"
#include "support.hpp"

using namespace sosdec;

TEST(SymEig, Examples) {
  Mat d = Eigen::Vector3d(3.0, 1.0, 0.0).asDiagonal();
  auto e = sym_eig(d);
  EXPECT_NEAR(e.values[0], 3.0, 1e-15);
  EXPECT_NEAR(e.values[1], 1.0, 1e-15);
  EXPECT_NEAR(e.values[2], 0.0, 1e-15);
  EXPECT_NEAR(std::abs(e.vectors(0, 0)), 1.0, 1e-15);

  auto id = sym_eig(Mat::Identity(4, 4));
  for (int i = 0; i < 4; ++i) EXPECT_NEAR(id.values[i], 1.0, 1e-15);

  std::mt19937_64 rng(1);
  const Vec a = testsupport::unit(5, rng);
  auto r1 = sym_eig(a * a.transpose());
  EXPECT_NEAR(r1.values[0], 1.0, 1e-12);
  const Vec v = r1.vectors.col(0);
  // M v = <a, v> a for a rank-one M.
  EXPECT_NEAR(std::abs(a.dot(v)), 1.0, 1e-12);
  EXPECT_LT((a * a.transpose() * v - a.dot(v) * a).norm(), 1e-12);
}

TEST(SymEig, RejectsAsymmetric) {
  Mat m = Mat::Identity(3, 3);
  m(0, 1) = 1e-6;
  EXPECT_ANY_THROW(sym_eig(m));
}

TEST(SymEig, AgreesWithReferenceSolver) {
  std::mt19937_64 rng(2);
  for (int t = 0; t < 50; ++t) {
    const int n = 1 + t % 12;
    Mat m = testsupport::random_symmetric(n, rng);
    auto e = sym_eig(m);
    Eigen::SelfAdjointEigenSolver<Mat> ref(m);
    Vec want = ref.eigenvalues();
    std::sort(want.data(), want.data() + n, [](double x, double y) { return std::abs(x) > std::abs(y); });
    const double scale = m.norm();
    for (int i = 0; i < n; ++i) {
      EXPECT_NEAR(e.values[i], want[i], 1e-10 * (1.0 + scale));
      if (i > 0) EXPECT_GE(std::abs(e.values[i - 1]), std::abs(e.values[i]) - 1e-12);
      EXPECT_LE((m * e.vectors.col(i) - e.values[i] * e.vectors.col(i)).norm(), 1e-9 * scale);
    }
    EXPECT_LE((e.vectors.transpose() * e.vectors - Mat::Identity(n, n)).cwiseAbs().maxCoeff(), 1e-9);
    Mat rec = e.vectors * e.values.asDiagonal() * e.vectors.transpose();
    EXPECT_LE((rec - m).norm(), 1e-8 * (1.0 + scale));
  }
}

TEST(GappedBound, Examples) {
  std::mt19937_64 rng(3);
  const Vec a = 1.7 * testsupport::unit(4, rng);
  auto g1 = gapped_top_eigvec_bound(a * a.transpose(), a, 1.0);
  EXPECT_TRUE(g1.hypothesis);
  EXPECT_TRUE(g1.conclusion);
  EXPECT_NEAR(g1.overlap, 1.0, 1e-12);

  const Vec e1 = Vec::Unit(2, 0), e2 = Vec::Unit(2, 1);
  auto g2 = gapped_top_eigvec_bound(e1 * e1.transpose() + 0.1 * e2 * e2.transpose(), e1, 0.8);
  // spec(M - aa^T) = 0.1 <= 1 - 0.8; the top eigenvector is e1 exactly.
  EXPECT_TRUE(g2.hypothesis);
  EXPECT_TRUE(g2.conclusion);
  EXPECT_NEAR(g2.overlap, 1.0, 1e-12);

  auto g3 = gapped_top_eigvec_bound(Mat::Identity(3, 3), Vec::Unit(3, 0), 0.9);
  EXPECT_FALSE(g3.hypothesis);
}

TEST(GappedBound, ConclusionHoldsWheneverHypothesisDoes) {
  std::mt19937_64 rng(4);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  int hyp = 0;
  for (int t = 0; t < 300; ++t) {
    const int n = 2 + t % 5;
    const Vec a = (0.5 + u(rng)) * testsupport::unit(n, rng);
    // PSD perturbation; the moment matrices the bound is applied to are PSD.
    const Mat b = testsupport::random_symmetric(n, rng);
    const Mat m = a * a.transpose() + 0.3 * u(rng) * b * b.transpose() / n;
    const double gamma = u(rng);
    auto g = gapped_top_eigvec_bound(m, a, gamma);

    Eigen::SelfAdjointEigenSolver<Mat> full(m), rest(m - a * a.transpose());
    const double norm_m = full.eigenvalues().cwiseAbs().maxCoeff();
    // spec(M - aa^T) is read as the largest eigenvalue; the remainder may be indefinite.
    const double top_rest = rest.eigenvalues().maxCoeff();
    const double slack = norm_m - gamma * a.squaredNorm() - top_rest;
    if (std::abs(slack) > 1e-9) EXPECT_EQ(g.hypothesis, slack > 0) << t;
    if (g.hypothesis) {
      ++hyp;
      EXPECT_TRUE(g.conclusion);
      EXPECT_GE(g.overlap, gamma - 1e-12);
    }
  }
  EXPECT_GT(hyp, 20);
}

TEST(LeastSquares, Examples) {
  MultiPoly t = 2.0 * pow_linear_form(Vec::Unit(2, 0), 4).poly() + 3.0 * pow_linear_form(Vec::Unit(2, 1), 4).poly();
  auto r = least_squares_weights(HomPoly(t, 4), {Vec::Unit(2, 0), Vec::Unit(2, 1)});
  EXPECT_NEAR(r.weights[0], 2.0, 1e-12);
  EXPECT_NEAR(r.weights[1], 3.0, 1e-12);
  EXPECT_FALSE(r.rank_deficient);

  auto dup = least_squares_weights(pow_linear_form(Vec::Unit(2, 0), 4), {Vec::Unit(2, 0), Vec::Unit(2, 0)});
  EXPECT_NEAR(dup.weights[0], 0.5, 1e-9);
  EXPECT_NEAR(dup.weights[1], 0.5, 1e-9);
  EXPECT_TRUE(dup.rank_deficient);
  EXPECT_FALSE(dup.warnings.empty());

  auto neg = least_squares_weights(HomPoly(-1.0 * pow_linear_form(Vec::Unit(2, 0), 4).poly(), 4), {Vec::Unit(2, 0)});
  EXPECT_NEAR(neg.weights[0], -1.0, 1e-12);
  EXPECT_TRUE(neg.has_negative);
}

TEST(LeastSquares, RecoversExactWeights) {
  std::mt19937_64 rng(5);
  for (int t = 0; t < 20; ++t) {
    auto mu = testsupport::separated_measure(4, 3, 0.9, 0.5, 3.0, rng);
    auto r = least_squares_weights(moment_tensor(mu, 6), mu.nodes);
    auto rs = least_squares_weights(moment_sequence(mu, 6), mu.nodes);
    for (int i = 0; i < 3; ++i) {
      EXPECT_NEAR(r.weights[i], mu.weights[static_cast<std::size_t>(i)], 1e-8);
      EXPECT_NEAR(rs.weights[i], mu.weights[static_cast<std::size_t>(i)], 1e-8);
    }
  }
}

TEST(LeastSquares, GramIdentityForPowers) {
  std::mt19937_64 rng(6);
  for (int t = 0; t < 100; ++t) {
    const int n = 2 + t % 4, d = 1 + t % 7;
    const Vec a = testsupport::gaussian(n, rng), b = testsupport::gaussian(n, rng);
    const double want = std::pow(a.dot(b), d);
    EXPECT_NEAR(reznick_product(pow_linear_form(a, d), pow_linear_form(b, d)), want, 1e-10 * (1.0 + std::abs(want)));
    const Vec u = a.normalized(), v = b.normalized();
    const double dist = frobenius_norm(pow_linear_form(u, d).poly() - pow_linear_form(v, d).poly());
    EXPECT_NEAR(dist * dist, 2.0 - 2.0 * std::pow(u.dot(v), d), 1e-10);
  }
}

TEST(QuadraticForm, MatrixOfScaledCoefficients) {
  std::mt19937_64 rng(7);
  const Vec a = testsupport::gaussian(3, rng);
  Mat q = quadratic_form_matrix(pow_linear_form(a, 2));
  EXPECT_LT((q - a * a.transpose()).norm(), 1e-13);
  const Vec x = testsupport::gaussian(3, rng);
  auto p = testsupport::random_poly(3, 2, 2, rng);
  EXPECT_NEAR(x.dot(quadratic_form_matrix(p) * x), poly_eval(p, x), 1e-12);
}

TEST(SpectralNorm, MatchesLargestAbsoluteEigenvalue) {
  std::mt19937_64 rng(8);
  for (int t = 0; t < 20; ++t) {
    Mat m = testsupport::random_symmetric(1 + t % 7, rng);
    EXPECT_NEAR(spectral_norm_sym(m), Eigen::SelfAdjointEigenSolver<Mat>(m).eigenvalues().cwiseAbs().maxCoeff(), 1e-12);
  }
}
