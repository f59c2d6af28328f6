#pragma once

#include <string>
#include <vector>

#include "sosdec/moments.hpp"
#include "sosdec/poly.hpp"

namespace sosdec {

struct EigenDecomposition {
  Vec values;    // descending |mu|
  Mat vectors;   // column i pairs with values[i]
};

EigenDecomposition sym_eig(const Mat& m, double sym_tol = 1e-10);

struct GappedCheck {
  bool hypothesis = false;
  bool conclusion = false;
  double overlap = 0.0;  // <u, a/|a|>^2 for the computed top eigenvector
};

GappedCheck gapped_top_eigvec_bound(const Mat& m, const Vec& a, double gamma);

struct LeastSquaresResult {
  Vec weights;
  bool rank_deficient = false;
  bool has_negative = false;
  std::vector<std::string> warnings;
};

LeastSquaresResult least_squares_weights(const HomPoly& t, const std::vector<Vec>& comps);
// Fits all present degrees of the sequence simultaneously.
LeastSquaresResult least_squares_weights(const MomentSequence& ms, const std::vector<Vec>& comps);

// Symmetric matrix of a quadratic form: entries are the scaled coefficients.
Mat quadratic_form_matrix(const MultiPoly& q);

double spectral_norm_sym(const Mat& m);

}  // namespace sosdec
