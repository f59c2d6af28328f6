#include "sosdec/chebyshev.hpp"

#include <cmath>

namespace sosdec {

double UniPoly::operator()(double x) const {
  double s = 0.0;
  for (auto it = c.rbegin(); it != c.rend(); ++it) s = s * x + *it;
  return s;
}

Interval::Interval(double a_, double b_) : a(a_), b(b_) {
  if (!(a < b)) throw DomainError("interval needs a < b");
}

double cheb_eval(int d, double x) {
  if (d < 0) throw DomainError("negative Chebyshev degree");
  if (d == 0) return 1.0;
  double prev = 1.0, cur = x;
  for (int k = 1; k < d; ++k) {
    const double next = 2.0 * x * cur - prev;
    prev = cur;
    cur = next;
  }
  return cur;
}

UniPoly cheb_interval(const Interval& iv, int d) {
  if (d < 0) throw DomainError("negative Chebyshev degree");
  const double s = 2.0 / (iv.b - iv.a);
  const double t = -(iv.b + iv.a) / (iv.b - iv.a);
  // psi(x) = s x + t; T_{k+1} = 2 psi T_k - T_{k-1} on coefficient vectors.
  std::vector<double> prev{1.0}, cur{t, s};
  if (d == 0) return {prev};
  for (int k = 1; k < d; ++k) {
    std::vector<double> next(cur.size() + 1, 0.0);
    for (std::size_t i = 0; i < cur.size(); ++i) {
      next[i] += 2.0 * t * cur[i];
      next[i + 1] += 2.0 * s * cur[i];
    }
    for (std::size_t i = 0; i < prev.size(); ++i) next[i] -= prev[i];
    prev = std::move(cur);
    cur = std::move(next);
  }
  return {cur};
}

double cheb_exterior_value(double kappa, int d) {
  if (!(kappa > 1.0)) throw DomainError("exterior closed form needs kappa > 1");
  const double r = std::sqrt(kappa * kappa - 1.0);
  return 0.5 * std::pow(kappa + r, d) + 0.5 * std::pow(kappa - r, d);
}

MultiPoly testimony_poly(const Vec& center, const Interval& iv, int d) {
  if (d % 4 != 2) throw DomainError("testimony degree must be 2 mod 4");
  const int n = static_cast<int>(center.size());
  const UniPoly p = cheb_interval(iv, (d - 2) / 2);
  const MultiPoly q = shifted_norm_sq(center);
  MultiPoly acc = MultiPoly::constant(n, p.c.back());
  for (int i = p.degree() - 1; i >= 0; --i)
    acc = poly_mul(acc, q) + MultiPoly::constant(n, p.c[static_cast<std::size_t>(i)]);
  acc += MultiPoly::constant(n, 1.0);
  acc.set_max_degree(d - 2);
  return acc;
}

double best_ratio(const Interval& iv, int d) {
  if (d % 4 != 2) throw DomainError("best ratio needs d = 2 mod 4");
  if (iv.contains(0.0)) throw DomainError("interval contains 0; testimony cannot separate");
  return (cheb_interval(iv, (d - 2) / 2)(0.0) + 1.0) / 2.0;
}

MultiPoly interpolation_testimony(int j, const PointMeasure& mu) {
  const int n = mu.n();
  const auto& aj = mu.nodes[static_cast<std::size_t>(j)];
  MultiPoly acc = MultiPoly::constant(n, 1.0 / mu.weights[static_cast<std::size_t>(j)]);
  for (int i = 0; i < mu.m(); ++i) {
    if (i == j) continue;
    const auto& ai = mu.nodes[static_cast<std::size_t>(i)];
    const double dist = (ai - aj).squaredNorm();
    if (dist == 0.0) throw DomainError("coincident nodes in interpolation testimony");
    acc = poly_mul(acc, shifted_norm_sq(ai) * (1.0 / dist));
  }
  return acc;
}

Interval testimony_interval(double kappa_min, double kappa_max, double delta, bool tight) {
  if (tight) {
    if (kappa_max - kappa_min < 1e-12) return Interval(kappa_min - delta, kappa_max + delta);
    return Interval(kappa_min, kappa_max);
  }
  return Interval(0.5 * kappa_min - delta, 2.0 * kappa_max + delta);
}

}  // namespace sosdec
