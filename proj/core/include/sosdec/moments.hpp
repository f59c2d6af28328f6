#pragma once

#include <string>
#include <vector>

#include "sosdec/poly.hpp"

namespace sosdec {

struct PointMeasure {
  std::vector<Vec> nodes;
  std::vector<double> weights;

  int n() const { return nodes.empty() ? 0 : static_cast<int>(nodes.front().size()); }
  int m() const { return static_cast<int>(nodes.size()); }
  double total_weight() const;
  double min_weight() const;
  // Throws InputError on nonpositive weights, ragged or coincident nodes.
  void validate() const;
  // Nonfatal findings: a node that is a nonnegative multiple of another.
  std::vector<std::string> warnings() const;
};

// Moment tensors T_0..T_d. Degrees without data (odd degrees of norm-scaled fake
// moments) are absent and act as zero in every pairing.
struct MomentSequence {
  int n = 0;
  int d = 0;
  std::vector<HomPoly> tensors;  // size d+1
  std::vector<bool> present;     // size d+1

  MomentSequence() = default;
  MomentSequence(int n_, int d_);

  bool has(int k) const { return k >= 0 && k <= d && present[static_cast<std::size_t>(k)]; }
  const HomPoly& at(int k) const { return tensors[static_cast<std::size_t>(k)]; }
  void set(int k, HomPoly t);
  // Sum_{k=lo}^{hi} T_k over present degrees, with max_degree hi.
  MultiPoly sum(int lo, int hi) const;
  double total_mass() const;
};

}  // namespace sosdec
