#include <algorithm>
#include <cmath>
#include <cstdio>
#include <numbers>
#include <random>

#include <Eigen/QR>
#include <gtest/gtest.h>

#include "sosdec/chebyshev.hpp"
#include "sosdec/decompose.hpp"
#include "sosdec/errors.hpp"
#include "sosdec/measures.hpp"
#include "decompose_support.hpp"
#include "support.hpp"

using namespace sosdec;
using namespace testsupport;


TEST(Jennrich, Examples) {
  auto comps = jennrich(tensor_of({e(2, 0), e(2, 1)}, 3));
  EXPECT_LT(hausdorff_distance(comps, {e(2, 0), e(2, 1)}, false), 1e-10);

  const auto t = tensor_of({e(2, 0), 2.0 * e(2, 1)}, 3);
  comps = jennrich(t);
  EXPECT_LT(hausdorff_distance(comps, {e(2, 0), 2.0 * e(2, 1)}, false), 1e-8);
  EXPECT_LE(backward_error(t, comps), 1e-8);

  EXPECT_TRUE(jennrich(HomPoly(3, 3)).empty());
  EXPECT_THROW(jennrich(HomPoly(3, 4)), DomainError);
}

TEST(Jennrich, RecoversScaledOrthogonalComponents) {
  std::mt19937_64 rng(31);
  std::uniform_real_distribution<double> scale(0.5, 2.0);
  for (int t = 0; t < 40; ++t) {
    const int n = 2 + t % 5;
    const int m = 1 + static_cast<int>(rng() % static_cast<unsigned>(n));
    Eigen::HouseholderQR<Mat> qr(Mat::NullaryExpr(n, n, [&] { return testsupport::gaussian(1, rng)[0]; }));
    const Mat q = qr.householderQ();
    std::vector<Vec> truth;
    for (int i = 0; i < m; ++i) truth.push_back(scale(rng) * (rng() % 2 ? 1.0 : -1.0) * Vec(q.col(i)));
    const auto t3 = tensor_of(truth, 3);
    const auto comps = jennrich(t3, t + 1);
    ASSERT_EQ(comps.size(), truth.size()) << t;
    EXPECT_LE(hausdorff_distance(comps, truth, false), 1e-8) << t;
    EXPECT_LE(backward_error(t3, comps), 1e-7 * std::max(1.0, frobenius_norm(t3))) << t;
  }
}

TEST(Jennrich, RejectsNonOrthogonalComponents) {
  const Vec a = e(2, 0), b = (Vec(2) << 1.0, 1.0).finished().normalized();
  EXPECT_THROW(jennrich(tensor_of({a, b}, 3)), AlgorithmError);
}

TEST(VStep, TwoNodeExactRound) {
  const auto ms = moment_sequence(measure({e(2, 0), e(2, 1)}, {1.0, 1.0}), 4);
  const Vec v = (Vec(2) << 0.8, 0.6).finished();
  const auto st = v_step(ms, pow_linear_form(v, 1).poly(), {}, exact_options(1), false);
  EXPECT_LT((st.c - e(2, 0)).norm(), 1e-5);
  EXPECT_NEAR(st.rho, 1.0, 1e-5);
  EXPECT_NEAR(st.objective, 0.8, 1e-6);
}

TEST(VStep, SingleNodeIgnoresDiscriminator) {
  std::mt19937_64 rng(32);
  for (int t = 0; t < 8; ++t) {
    const int n = 2 + t % 2;
    const Vec a = (0.7 + 0.1 * t) * testsupport::unit(n, rng);
    const auto ms = moment_sequence(measure({a}, {1.5}), 4);
    const auto f = testsupport::random_poly(n, 1, 2, rng);
    const auto st = v_step(ms, f, {}, exact_options(1), false);
    EXPECT_LT((st.c - a).norm(), 1e-5) << t;
  }
}

TEST(VStep, ObjectiveBoundedByBestNodeValue) {
  std::mt19937_64 rng(33);
  for (int t = 0; t < 10; ++t) {
    const auto mu = random_instance(3, 2 + t % 2, 0.5, rng);
    const auto ms = moment_sequence(mu, 2 * mu.m());
    const auto f = testsupport::random_poly(3, 1, 2, rng);
    const auto st = v_step(ms, f, {}, exact_options(1), false);
    double best = -std::numeric_limits<double>::infinity();
    for (const auto& a : mu.nodes) best = std::max(best, poly_eval(f, a));
    EXPECT_LE(st.objective, best + 1e-6) << t;
  }
}

TEST(VStep, ExactModeSignMatchesComponent) {
  std::mt19937_64 rng(34);
  for (int t = 0; t < 10; ++t) {
    const auto mu = random_instance(3, 2, 0.5, rng);
    const auto ms = moment_sequence(mu, 4);
    const Vec v = random_unit_vector(3, rng);
    const auto st = v_step(ms, pow_linear_form(v, 1).poly(), {}, exact_options(1), false);
    const int j = mu.nodes[0].dot(v) > mu.nodes[1].dot(v) ? 0 : 1;
    EXPECT_GT(st.c.dot(mu.nodes[j]), 0.0) << t;
    EXPECT_LT((st.c - mu.nodes[j]).norm(), 1e-4) << t;
  }
}

// One round in the approximate regime (d < 2m): concentration, correlation, length and sign.
TEST(VStep, ApproximateRegimeGuarantees) {
  int checked_sign = 0;
  for (int seed = 0; seed < 5; ++seed) {
    std::mt19937_64 rng(500 + seed);
    std::uniform_real_distribution<double> w(0.5, 2.0);
    PointMeasure mu;
    for (int i = 0; i < 6; ++i) {
      mu.nodes.push_back(random_unit_vector(4, rng));
      mu.weights.push_back(w(rng));
    }
    const auto ms = moment_sequence(mu, 10);
    const Vec v = random_unit_vector(4, rng);
    const MultiPoly f = pow_linear_form(v, 2).poly();
    const auto st = v_step(ms, f, {}, exact_options(1), false);
    const auto g = guarantee_for(mu, f, 8);

    double off = 0.0, total = 0.0;
    for (int i = 0; i < mu.m(); ++i) {
      const double wa = mu.weights[i] * poly_eval(st.w_star, mu.nodes[i]);
      total += wa;
      if (i != g.j) off += wa;
    }
    EXPECT_NEAR(total, 1.0, 1e-6) << seed;
    EXPECT_LE(off, g.concentration + 1e-6) << seed;

    const Vec& aj = mu.nodes[g.j];
    const double cbar = 2.0 * g.concentration * g.rho_spec / aj.squaredNorm();
    const double corr = std::pow(st.u.dot(aj) / aj.norm(), 2);
    EXPECT_GE(corr, 1.0 - cbar - 1e-9) << seed;
    EXPECT_LE(std::abs(st.c.squaredNorm() - aj.squaredNorm()), g.concentration * g.rho_spec + 1e-9) << seed;
    if (cbar < 1.0) {
      EXPECT_GT(st.c.dot(aj), 0.0) << seed;
      ++checked_sign;
    }
  }
  // Informational: how many instances fell in the sign-guarantee regime.
  RecordProperty("sign_checked", checked_sign);
}

TEST(VDecomposeMoments, TwoOrthonormalNodes) {
  const auto mu = measure({e(2, 0), e(2, 1)}, {1.0, 1.0});
  const auto r = v_decompose_moments(moment_sequence(mu, 4), exact_options(3));
  ASSERT_EQ(r.components.size(), 2u);
  EXPECT_LE(hausdorff_distance(r.components, mu.nodes, false), 1e-4);
  EXPECT_TRUE(r.stopped_by_infeasibility);
  EXPECT_NE(r.rounds[0].v, r.rounds[1].v);
}

TEST(VDecomposeMoments, SingleNodeAnyDegree) {
  const Vec a = (Vec(3) << 0.3, -0.9, 0.4).finished();
  for (int d = 2; d <= 6; d += 2) {
    const auto r = v_decompose_moments(moment_sequence(measure({a}, {0.7}), d), exact_options(4));
    ASSERT_EQ(r.components.size(), 1u) << d;
    EXPECT_LT((r.components[0] - a).norm(), 1e-5) << d;
    EXPECT_NEAR(r.weights[0], 0.7, 1e-5) << d;
  }
}

TEST(VDecomposeMoments, RecoversWeights) {
  const auto mu = measure({e(2, 0), e(2, 1)}, {2.0, 3.0});
  const auto r = v_decompose_moments(moment_sequence(mu, 4), exact_options(5));
  ASSERT_EQ(r.components.size(), 2u);
  EXPECT_LE(weight_error(mu, r), 1e-3);
}

TEST(VDecomposeMoments, ExactForTwoNodesAtDegreeFour) {
  std::mt19937_64 rng(35);
  for (int seed = 0; seed < 20; ++seed) {
    const int n = 2 + seed % 2;
    const auto mu = random_instance(n, 2, 0.5, rng);
    const auto r = v_decompose_moments(moment_sequence(mu, 4), exact_options(seed + 1));
    ASSERT_EQ(r.components.size(), 2u) << seed;
    EXPECT_LE(hausdorff_distance(r.components, mu.nodes, false), 1e-3) << seed;
    EXPECT_LE(weight_error(mu, r), 1e-2) << seed;
  }
}

TEST(VDecomposeMoments, NodeOrderDoesNotMatter) {
  std::mt19937_64 rng(36);
  for (int t = 0; t < 4; ++t) {
    auto mu = random_instance(3, 3, 0.5, rng);
    const auto r1 = v_decompose_moments(moment_sequence(mu, 6), exact_options(7));
    std::reverse(mu.nodes.begin(), mu.nodes.end());
    std::reverse(mu.weights.begin(), mu.weights.end());
    const auto r2 = v_decompose_moments(moment_sequence(mu, 6), exact_options(7));
    ASSERT_EQ(r1.components.size(), r2.components.size()) << t;
    EXPECT_LE(hausdorff_distance(r1.components, r2.components, false), 1e-6) << t;
  }
}

TEST(VDecomposeMoments, OddDegreeRejected) {
  EXPECT_THROW(v_decompose_moments(moment_sequence(measure({e(2, 0)}, {1.0}), 3), {}), DomainError);
}

TEST(VDecomposeTensor, TwoCoordinateFourthPowers) {
  const auto t = tensor_of({e(3, 0), e(3, 1)}, 4);
  const auto r = v_decompose_tensor(t, exact_options(8));
  ASSERT_EQ(r.components.size(), 2u);
  EXPECT_LE(hausdorff_distance(r.components, {e(3, 0), e(3, 1)}, true), 1e-3);
  EXPECT_LE(backward_error(t, r.components), 1e-3);
}

TEST(VDecomposeTensor, RankOne) {
  const Vec a = (Vec(3) << 1.2, -0.4, 0.5).finished();
  const auto r = v_decompose_tensor(tensor_of({a}, 4), exact_options(9));
  ASSERT_EQ(r.components.size(), 1u);
  EXPECT_LE(hausdorff_distance(r.components, {a}, true), 1e-4);
  EXPECT_THROW(v_decompose_tensor(tensor_of({a}, 3), {}), DomainError);
}

TEST(SampleDiscriminator, Examples) {
  const Vec a = e(3, 0);
  auto s = sample_discriminator(pow_linear_form(Vec::Ones(3), 4).poly(), 0.0, std::uint64_t{1}, 10);
  EXPECT_EQ(s.attempts, 1);
  EXPECT_NEAR(s.v.norm(), 1.0, 1e-14);

  for (int d : {2, 4, 6}) {
    s = sample_discriminator(pow_linear_form(a, d).poly(), 0.9, std::uint64_t{2}, 1'000'000);
    EXPECT_GE(std::abs(s.v[0]), std::pow(0.9, 1.0 / d) - 1e-15) << d;
  }
  EXPECT_THROW(sample_discriminator(pow_linear_form(a, 4).poly(), 1.5, std::uint64_t{3}, 100), AlgorithmError);
}

// Frequency of <a,v>^2 >= 1 - gamma for uniform v on the sphere. The cap law is
// (2/pi) arccos(sqrt(1-gamma)) on the circle and 1 - sqrt(1-gamma) on the 2-sphere.
TEST(SampleDiscriminator, CapProbability) {
  const double gamma = 0.2;
  const double cut = std::sqrt(1.0 - gamma);
  for (int n : {2, 3}) {
    std::mt19937_64 rng(40 + n);
    const Vec a = random_unit_vector(n, rng);
    const MultiPoly s = pow_linear_form(a, 2).poly();
    long hits = 0, draws = 0;
    while (draws < 100'000) {
      draws += sample_discriminator(s, 1.0 - gamma, rng, 10'000'000).attempts;
      ++hits;
    }
    const double freq = static_cast<double>(hits) / static_cast<double>(draws);
    const double law = n == 2 ? 2.0 / std::numbers::pi * std::acos(cut) : 1.0 - cut;
    EXPECT_NEAR(freq, law, 0.01) << "n=" << n;
  }
}

TEST(UsefulConstraints, HoldForLargeDegree) {
  int smallest = -1;
  for (int d = 6; d <= 102; d += 4) {
    const auto r = check_useful_constraints(d, 1, 1.0, 1.0, 1.0);
    EXPECT_TRUE(std::isfinite(r.r) && std::isfinite(r.B) && std::isfinite(r.eps_tilde) && std::isfinite(r.w_max));
    EXPECT_GT(r.eps_tilde, 0.0);
    if (r.all() && smallest < 0) smallest = d;
    if (smallest > 0) EXPECT_TRUE(r.all()) << "not upward closed at d=" << d;
  }
  ASSERT_GT(smallest, 0);
  RecordProperty("smallest_d", smallest);
  const auto r = check_useful_constraints(smallest, 1, 1.0, 1.0, 1.0);
  EXPECT_NEAR(r.r, 0.999, 1e-15);
  EXPECT_NEAR(r.rho, 0.5, 1e-15);
  EXPECT_NEAR(r.w_max, 1.0 / r.B, 1e-15);
  EXPECT_NEAR(r.eps_tilde, 16.0 / r.B, 1e-12);
}

TEST(UsefulConstraints, FirstConstraintNeedsSeparation) {
  // r <= 0.999, so 2(1 - r) >= 2/1000 and (I) needs 0.25 rho_min >= 2/1000.
  for (double rho_min : {0.001, 0.005, 0.0079})
    for (int d = 6; d <= 4002; d += 4) ASSERT_FALSE(check_useful_constraints(d, 1, rho_min, 1.0, 1.0).c1) << rho_min;
  EXPECT_TRUE(check_useful_constraints(4002, 1, 0.0081, 1.0, 1.0).c1);
  EXPECT_THROW(check_useful_constraints(8, 1, 0.5, 1.0, 1.0), DomainError);
  EXPECT_THROW(check_useful_constraints(10, 1, 0.0, 1.0, 1.0), DomainError);
  EXPECT_THROW(check_useful_constraints(10, 1, 0.5, 2.0, 1.0), DomainError);
}

TEST(UsefulConstraints, MinimalDegreeGrowsLogarithmically) {
  // Each tenfold drop of lambda_min / T0 should cost a bounded, eventually constant number of degrees.
  std::vector<int> minimal;
  for (int k = 0; k <= 9; ++k) {
    const double ratio = std::pow(10.0, -k);
    int found = -1;
    for (int d = 6; d <= 4002 && found < 0; d += 4)
      if (check_useful_constraints(d, 1, 1.0, ratio, 1.0).all()) found = d;
    ASSERT_GT(found, 0) << ratio;
    minimal.push_back(found);
    std::printf("lambda_min/T0 = 1e-%d: minimal d = %d\n", k, found);
  }
  std::vector<int> steps;
  for (std::size_t k = 1; k < minimal.size(); ++k) steps.push_back(minimal[k] - minimal[k - 1]);
  for (int s : steps) EXPECT_GT(s, 0);
  for (std::size_t k = 4; k < steps.size(); ++k) EXPECT_LE(std::abs(steps[k] - steps[3]), 4) << "decade " << k;
  EXPECT_LE(*std::max_element(steps.begin(), steps.end()), 40);
}

TEST(VDecomposeSphere, OrthonormalUnitWeights) {
  const auto mu = measure({e(3, 0), e(3, 1), e(3, 2)}, {1.0, 1.0, 1.0});
  const auto r = v_decompose_sphere(moment_sequence(mu, 6), 1.0, 0.5, exact_options(10));
  const auto uc = check_useful_constraints(6, 3, 0.5, 1.0, 3.0);
  ASSERT_FALSE(r.components.empty());
  for (const auto& c : r.components) EXPECT_NEAR(c.norm(), 1.0, 1e-9);
  for (const auto& a : mu.nodes) {
    double best = std::numeric_limits<double>::infinity();
    for (const auto& c : r.components) best = std::min(best, 1.0 - std::pow(a.dot(c), 2));
    EXPECT_LE(best, uc.eps_tilde);
  }
  // The first round has no previous constraints and recovers a node exactly.
  double first = std::numeric_limits<double>::infinity();
  for (const auto& a : mu.nodes) first = std::min(first, 1.0 - std::pow(a.dot(r.components[0]), 2));
  EXPECT_LE(first, 1e-8);
}

TEST(VDecomposeSphere, SingleNodeStopsAfterOneRound) {
  const Vec a = (Vec(3) << 0.6, 0.0, 0.8).finished();
  const auto mu = measure({a}, {1.0});
  const auto ms = moment_sequence(mu, 10);
  const auto r = v_decompose_sphere(ms, 1.0, 0.5, exact_options(11));
  ASSERT_EQ(r.components.size(), 1u);
  EXPECT_LE(hausdorff_distance(r.components, {a}, true), 1e-4);
  // A second round is infeasible: W(a) = 1 is forced but the recovery ball caps W at w_max < 1.
  const auto uc = check_useful_constraints(10, 1, 0.5, 1.0, 1.0);
  ASSERT_LT(uc.w_max, 1.0);
  ExtraConstraints extra;
  extra.distinct.push_back({r.components[0], 2.0 - 2.0 * std::sqrt(1.0 - std::min(uc.eps_tilde, 1.0)), uc.w_max});
  const Vec v = (Vec(3) << 0.0, 0.6, 0.8).finished();
  const auto prog = build_round_program(ms, pow_linear_form(v, 2).poly(), extra, exact_options(11));
  EXPECT_FALSE(check_feasible(compile(prog)).feasible);
}

TEST(VDecomposeSphere, ResidualMatchesGramIdentity) {
  std::mt19937_64 rng(37);
  const auto mu = testsupport::separated_measure(3, 3, 0.3, 1.0, 1.0, rng);
  const int d = 10;
  const auto r = v_decompose_sphere(moment_sequence(mu, d), 1.0, 0.5, exact_options(12));
  ASSERT_FALSE(r.components.empty());
  for (const auto& u : r.components) {
    std::size_t j = 0;
    for (std::size_t i = 1; i < mu.nodes.size(); ++i)
      if (std::abs(mu.nodes[i].dot(u)) > std::abs(mu.nodes[j].dot(u))) j = i;
    const auto diff = pow_linear_form(mu.nodes[j], d).poly() - pow_linear_form(u, d).poly();
    EXPECT_NEAR(frobenius_norm(diff), std::sqrt(std::max(0.0, 2.0 - 2.0 * std::pow(mu.nodes[j].dot(u), d))), 1e-8);
  }
}

TEST(VDecomposeSphere, RoundDiagnosticsCarryBothThresholds) {
  const auto mu = measure({e(3, 0), e(3, 1)}, {1.0, 1.0});
  const auto r = v_decompose_sphere(moment_sequence(mu, 6), 1.0, 0.5, exact_options(13));
  ASSERT_FALSE(r.rounds.empty());
  const auto uc = check_useful_constraints(6, 2, 0.5, 1.0, 2.0);
  EXPECT_NEAR(r.rounds[0].threshold_box, uc.r, 1e-15);
  EXPECT_NEAR(r.rounds[0].threshold_text, uc.r, 1e-15);
  for (std::size_t k = 1; k < r.rounds.size(); ++k) EXPECT_LE(r.rounds[k].threshold_box, r.rounds[k - 1].threshold_box);
  EXPECT_EQ(r.rounds[0].discriminator, "random_v_squared");
}

TEST(SosTriangle, InequalityAndCertificate) {
  std::mt19937_64 rng(38);
  for (int t = 0; t < 1000; ++t) {
    const Vec x = testsupport::gaussian(3, rng), y = testsupport::gaussian(3, rng), z = testsupport::gaussian(3, rng);
    EXPECT_GE(2.0 * ((x - z).squaredNorm() + (z - y).squaredNorm()) - (x - y).squaredNorm(), -1e-12);
  }
  // Variables (x, y, z) in R^2 each; |u - w|^2 expanded coordinatewise.
  const int n = 2, N = 3 * n;
  auto dist_sq = [&](int u, int w) {
    MultiPoly p(N, 2);
    for (int k = 0; k < n; ++k) p += pow_linear_form(Vec(Vec::Unit(N, u * n + k) - Vec::Unit(N, w * n + k)), 2).poly();
    return p;
  };
  const MultiPoly p = 2.0 * (dist_sq(0, 2) + dist_sq(2, 1)) - dist_sq(0, 1);
  const auto feas = check_feasible(compile(sos_membership_program(p)));
  ASSERT_TRUE(feas.feasible);
  const auto back = gram_to_poly(feas.x.at(0), GramBasis(N, 1));
  EXPECT_LT(frobenius_norm(back - p), 1e-6 * frobenius_norm(p));
}

TEST(DecompositionResult, JsonHasRounds) {
  const auto r = v_decompose_moments(moment_sequence(measure({e(2, 0), e(2, 1)}, {1.0, 1.0}), 4), exact_options(14));
  const auto j = to_json(r);
  ASSERT_TRUE(j.contains("rounds"));
  EXPECT_EQ(j["rounds"].size(), r.rounds.size());
}
