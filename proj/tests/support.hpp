#pragma once

#include <random>

#include "sosdec/moments.hpp"
#include "sosdec/poly.hpp"

namespace testsupport {

using sosdec::Mat;
using sosdec::MultiPoly;
using sosdec::Vec;

inline Vec gaussian(int n, std::mt19937_64& rng) {
  std::normal_distribution<double> g;
  Vec v(n);
  for (int i = 0; i < n; ++i) v[i] = g(rng);
  return v;
}

inline Vec unit(int n, std::mt19937_64& rng) { return gaussian(n, rng).normalized(); }

// Random polynomial with every monomial of degree lo..hi present.
inline MultiPoly random_poly(int n, int lo, int hi, std::mt19937_64& rng) {
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  MultiPoly p(n, hi);
  for (int k = lo; k <= hi; ++k)
    for (const auto& a : sosdec::monomials_of_degree(n, k)) p.set(a, u(rng));
  return p;
}

inline Mat random_symmetric(int n, std::mt19937_64& rng) {
  Mat a(n, n);
  std::normal_distribution<double> g;
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) a(i, j) = g(rng);
  return 0.5 * (a + a.transpose());
}

// Unit nodes with pairwise |<a_i,a_j>| <= max_cos, weights uniform in [wlo, whi].
inline sosdec::PointMeasure separated_measure(int n, int m, double max_cos, double wlo, double whi, std::mt19937_64& rng) {
  std::uniform_real_distribution<double> w(wlo, whi);
  sosdec::PointMeasure mu;
  while (mu.m() < m) {
    Vec c = unit(n, rng);
    bool ok = true;
    for (const auto& a : mu.nodes) ok = ok && std::abs(a.dot(c)) <= max_cos;
    if (ok) {
      mu.nodes.push_back(c);
      mu.weights.push_back(w(rng));
    }
  }
  return mu;
}

}  // namespace testsupport
