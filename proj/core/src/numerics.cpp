#include "sosdec/numerics.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

namespace sosdec {

MomentSequence::MomentSequence(int n_, int d_)
    : n(n_), d(d_), present(static_cast<std::size_t>(d_ + 1), false) {
  for (int k = 0; k <= d_; ++k) tensors.emplace_back(n_, k);
}

void MomentSequence::set(int k, HomPoly t) {
  if (k < 0 || k > d) throw DomainError("moment degree out of range");
  if (t.degree() != k || t.n() != n) throw DimensionError("moment tensor has wrong shape");
  tensors[static_cast<std::size_t>(k)] = std::move(t);
  present[static_cast<std::size_t>(k)] = true;
}

MultiPoly MomentSequence::sum(int lo, int hi) const {
  MultiPoly s(n, std::max(hi, 0));
  for (int k = std::max(lo, 0); k <= std::min(hi, d); ++k)
    if (has(k)) s += at(k).poly();
  return s;
}

double MomentSequence::total_mass() const {
  return has(0) ? at(0).poly().coeff(MultiIndex(n)) : 0.0;
}

EigenDecomposition sym_eig(const Mat& m, double sym_tol) {
  const Eigen::Index n = m.rows();
  if (m.cols() != n) throw DimensionError("sym_eig needs a square matrix");
  const double scale = std::max(1.0, m.cwiseAbs().maxCoeff());
  if ((m - m.transpose()).cwiseAbs().maxCoeff() > sym_tol * scale)
    throw DomainError("sym_eig input is not symmetric");

  Mat a = 0.5 * (m + m.transpose());
  Mat v = Mat::Identity(n, n);
  for (int sweep = 0; sweep < 100; ++sweep) {
    double off = 0.0;
    for (Eigen::Index p = 0; p < n; ++p)
      for (Eigen::Index q = p + 1; q < n; ++q) off += a(p, q) * a(p, q);
    if (off <= 1e-300 || std::sqrt(off) <= 1e-17 * a.norm()) break;
    for (Eigen::Index p = 0; p < n; ++p) {
      for (Eigen::Index q = p + 1; q < n; ++q) {
        const double apq = a(p, q);
        if (apq == 0.0) continue;
        const double theta = (a(q, q) - a(p, p)) / (2.0 * apq);
        const double t = (theta >= 0 ? 1.0 : -1.0) / (std::abs(theta) + std::sqrt(theta * theta + 1.0));
        const double c = 1.0 / std::sqrt(t * t + 1.0);
        const double s = t * c;
        for (Eigen::Index k = 0; k < n; ++k) {
          const double akp = a(k, p), akq = a(k, q);
          a(k, p) = c * akp - s * akq;
          a(k, q) = s * akp + c * akq;
        }
        for (Eigen::Index k = 0; k < n; ++k) {
          const double apk = a(p, k), aqk = a(q, k);
          a(p, k) = c * apk - s * aqk;
          a(q, k) = s * apk + c * aqk;
        }
        a(p, q) = a(q, p) = 0.0;
        for (Eigen::Index k = 0; k < n; ++k) {
          const double vkp = v(k, p), vkq = v(k, q);
          v(k, p) = c * vkp - s * vkq;
          v(k, q) = s * vkp + c * vkq;
        }
      }
    }
  }

  std::vector<Eigen::Index> order(static_cast<std::size_t>(n));
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(),
                   [&](Eigen::Index i, Eigen::Index j) { return std::abs(a(i, i)) > std::abs(a(j, j)); });
  EigenDecomposition out{Vec(n), Mat(n, n)};
  for (Eigen::Index i = 0; i < n; ++i) {
    out.values[i] = a(order[static_cast<std::size_t>(i)], order[static_cast<std::size_t>(i)]);
    out.vectors.col(i) = v.col(order[static_cast<std::size_t>(i)]).normalized();
  }
  return out;
}

double spectral_norm_sym(const Mat& m) {
  if (m.size() == 0) return 0.0;
  return std::abs(sym_eig(m).values[0]);
}

GappedCheck gapped_top_eigvec_bound(const Mat& m, const Vec& a, double gamma) {
  const double a2 = a.squaredNorm();
  if (a2 == 0.0) throw DomainError("gapped check needs a nonzero vector");
  GappedCheck out;
  const auto eig = sym_eig(m);
  const double norm_m = std::abs(eig.values[0]);
  // spec(.) here is the largest eigenvalue, not the norm.
  const auto rest = sym_eig(m - a * a.transpose());
  const double top_rest = rest.values.maxCoeff();
  out.hypothesis = top_rest <= norm_m - gamma * a2 + 1e-12 * (1.0 + norm_m);
  const Vec u = eig.vectors.col(0);
  out.overlap = std::pow(u.dot(a) / std::sqrt(a2), 2);
  out.conclusion = out.overlap >= gamma - 1e-9;
  return out;
}

Mat quadratic_form_matrix(const MultiPoly& q) {
  const int n = q.n();
  Mat m = Mat::Zero(n, n);
  for (const auto& [alpha, c] : q.terms()) {
    if (alpha.degree() != 2) continue;
    std::vector<int> idx;
    for (int i = 0; i < n; ++i)
      for (int r = 0; r < alpha[i]; ++r) idx.push_back(i);
    m(idx[0], idx[1]) = c;
    m(idx[1], idx[0]) = c;
  }
  return m;
}

namespace {

LeastSquaresResult solve_normal(const Mat& g, const Vec& rhs) {
  if (g.rows() == 0) throw DomainError("least squares needs at least one component");
  LeastSquaresResult out;
  const double scale = std::max(1.0, g.diagonal().cwiseAbs().maxCoeff());
  Eigen::LDLT<Mat> ldlt(g);
  const double dmin = ldlt.vectorD().cwiseAbs().minCoeff();
  if (ldlt.info() != Eigen::Success || dmin <= 1e-10 * scale) {
    out.rank_deficient = true;
    out.warnings.push_back("rank-deficient Gram matrix in weight refit; returning minimum-norm solution");
    // A small ridge picks out the minimum-norm solution when rhs lies in the range.
    Mat reg = g + 1e-12 * scale * Mat::Identity(g.rows(), g.cols());
    out.weights = reg.llt().solve(rhs);
  } else {
    out.weights = ldlt.solve(rhs);
  }
  out.has_negative = (out.weights.array() < 0).any();
  if (out.has_negative) out.warnings.push_back("refit produced negative weights");
  return out;
}

}  // namespace

LeastSquaresResult least_squares_weights(const HomPoly& t, const std::vector<Vec>& comps) {
  const auto k = static_cast<Eigen::Index>(comps.size());
  Mat g(k, k);
  Vec rhs(k);
  for (Eigen::Index i = 0; i < k; ++i) {
    rhs[i] = poly_eval(t, comps[static_cast<std::size_t>(i)]);
    for (Eigen::Index j = 0; j < k; ++j)
      g(i, j) = std::pow(comps[static_cast<std::size_t>(i)].dot(comps[static_cast<std::size_t>(j)]), t.degree());
  }
  return solve_normal(g, rhs);
}

LeastSquaresResult least_squares_weights(const MomentSequence& ms, const std::vector<Vec>& comps) {
  const auto k = static_cast<Eigen::Index>(comps.size());
  Mat g = Mat::Zero(k, k);
  Vec rhs = Vec::Zero(k);
  for (int deg = 0; deg <= ms.d; ++deg) {
    if (!ms.has(deg)) continue;
    for (Eigen::Index i = 0; i < k; ++i) {
      rhs[i] += poly_eval(ms.at(deg), comps[static_cast<std::size_t>(i)]);
      for (Eigen::Index j = 0; j < k; ++j)
        g(i, j) += std::pow(comps[static_cast<std::size_t>(i)].dot(comps[static_cast<std::size_t>(j)]), deg);
    }
  }
  return solve_normal(g, rhs);
}

}  // namespace sosdec
