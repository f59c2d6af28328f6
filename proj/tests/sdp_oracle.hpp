#pragma once

#include <random>
#include <vector>

#include <Eigen/Cholesky>
#include <Eigen/Eigenvalues>

#include "sosdec/sdp.hpp"
#include "support.hpp"

namespace testsupport {

using namespace sosdec;

inline std::vector<SymEntry> upper_of(const Mat& a) {
  std::vector<SymEntry> out;
  for (int j = 0; j < a.cols(); ++j)
    for (int i = 0; i <= j; ++i)
      if (a(i, j) != 0.0) out.push_back({i, j, a(i, j)});
  return out;
}

inline double min_eig(const Mat& x) { return Eigen::SelfAdjointEigenSolver<Mat>(x, Eigen::EigenvaluesOnly).eigenvalues().minCoeff(); }

struct DenseSdp {
  Mat c;
  std::vector<Mat> a;
  Vec b;
};

// Strictly feasible on both sides: b = A(X0) with X0 > 0, and C = sum y_i A_i - S with S > 0.
inline DenseSdp random_dense(int n, int m, std::mt19937_64& rng) {
  DenseSdp p;
  const Mat r = testsupport::random_symmetric(n, rng);
  const Mat x0 = r * r.transpose() / n + 0.5 * Mat::Identity(n, n);
  const Mat q = testsupport::random_symmetric(n, rng);
  p.c = -(q * q.transpose() / n + 0.2 * Mat::Identity(n, n));
  p.b.resize(m);
  const Vec y = testsupport::gaussian(m, rng);
  for (int i = 0; i < m; ++i) {
    p.a.push_back(testsupport::random_symmetric(n, rng));
    p.b[i] = (p.a.back().array() * x0.array()).sum();
    p.c += y[i] * p.a.back();
  }
  return p;
}

inline SdpProblem to_problem(const DenseSdp& d) {
  SdpProblem p;
  p.add_block(static_cast<int>(d.c.rows()));
  p.objective[0] = d.c;
  for (std::size_t i = 0; i < d.a.size(); ++i) {
    SdpRow row;
    row.blocks.push_back({0, upper_of(d.a[i])});
    row.rhs = d.b[static_cast<Eigen::Index>(i)];
    p.rows.push_back(row);
  }
  return p;
}

// Independent oracle: ADMM splitting between the affine set and the PSD cone.
inline double admm_optimum(const DenseSdp& d) {
  const int n = static_cast<int>(d.c.rows());
  const int m = static_cast<int>(d.a.size());
  Mat g(m, m);
  for (int i = 0; i < m; ++i)
    for (int j = 0; j < m; ++j) g(i, j) = (d.a[i].array() * d.a[j].array()).sum();
  Eigen::LDLT<Mat> gl(g);
  auto affine = [&](const Mat& x) {
    Vec r(m);
    for (int i = 0; i < m; ++i) r[i] = (d.a[i].array() * x.array()).sum() - d.b[i];
    const Vec mu = gl.solve(r);
    Mat out = x;
    for (int i = 0; i < m; ++i) out -= mu[i] * d.a[i];
    return out;
  };
  const double rho = 1.0;
  Mat y = Mat::Identity(n, n), u = Mat::Zero(n, n), x = y;
  for (int it = 0; it < 40000; ++it) {
    x = affine(y - u + d.c / rho);
    Eigen::SelfAdjointEigenSolver<Mat> es(x + u);
    y = es.eigenvectors() * es.eigenvalues().cwiseMax(0.0).asDiagonal() * es.eigenvectors().transpose();
    u += x - y;
    if ((x - y).norm() < 1e-11 && it > 1000) break;
  }
  return (d.c.array() * y.array()).sum();
}

}  // namespace testsupport
