#pragma once

#include <vector>

#include "sosdec/moments.hpp"
#include "sosdec/poly.hpp"

namespace sosdec {

struct UniPoly {
  std::vector<double> c;  // c[i] multiplies x^i

  int degree() const { return static_cast<int>(c.size()) - 1; }
  double operator()(double x) const;
};

struct Interval {
  double a = -1.0;
  double b = 1.0;

  Interval() = default;
  Interval(double a_, double b_);
  bool contains(double x) const { return a <= x && x <= b; }
};

double cheb_eval(int d, double x);
UniPoly cheb_interval(const Interval& iv, int d);
double cheb_exterior_value(double kappa, int d);

// T_{I,(d-2)/2}(|X - center|^2) + 1, degree d-2.
MultiPoly testimony_poly(const Vec& center, const Interval& iv, int d);
double best_ratio(const Interval& iv, int d);
MultiPoly interpolation_testimony(int j, const PointMeasure& mu);

// [kmin/2 - delta, 2 kmax + delta], or [kmin, kmax] when tight (widened by delta if degenerate).
Interval testimony_interval(double kappa_min, double kappa_max, double delta, bool tight = false);

}  // namespace sosdec
