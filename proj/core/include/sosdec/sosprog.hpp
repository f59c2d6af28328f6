#pragma once

#include <limits>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "sosdec/moments.hpp"
#include "sosdec/poly.hpp"
#include "sosdec/sdp.hpp"

namespace sosdec {

class GramBasis {
 public:
  GramBasis() = default;
  GramBasis(int n, int half_degree);

  int n() const { return n_; }
  int half_degree() const { return half_degree_; }
  int size() const { return static_cast<int>(monomials_.size()); }
  const MultiIndex& operator[](int i) const { return monomials_[static_cast<std::size_t>(i)]; }
  int index_of(const MultiIndex& m) const;  // -1 if absent
  // Index pairs (a <= b) with monomial a + monomial b equal to gamma.
  const std::vector<std::pair<int, int>>& pairs_for(const MultiIndex& gamma) const;
  const std::map<MultiIndex, std::vector<std::pair<int, int>>, GradedLex>& products() const { return products_; }

 private:
  int n_ = 0;
  int half_degree_ = 0;
  std::vector<MultiIndex> monomials_;
  std::map<MultiIndex, int, GradedLex> index_;
  std::map<MultiIndex, std::vector<std::pair<int, int>>, GradedLex> products_;
};

struct SosVariable {
  std::string name;
  int degree = 0;
  GramBasis basis;
  // Points where the variable must vanish. For an SOS polynomial W(c) = 0 forces
  // G m(c) = 0, so these are compiled by restricting G to the complement of the m(c).
  std::vector<Vec> vanishing;

  // Orthonormal columns spanning the allowed Gram range (identity when unrestricted).
  Mat face() const;
};

// Linear functional var -> reznick_product(var, pairing).
struct PairingTerm {
  int var = 0;
  MultiPoly pairing;
};

struct LinearConstraint {
  enum class Kind { equal, at_most };
  std::vector<PairingTerm> terms;
  double rhs = 0.0;
  Kind kind = Kind::equal;
};

// sum_t multiplier_t * var_t + constant == 0, coefficientwise.
struct IdentityTerm {
  int var = 0;
  MultiPoly multiplier;
};

struct IdentityConstraint {
  std::vector<IdentityTerm> terms;
  MultiPoly constant;
};

class SosProgram {
 public:
  int add_variable(const std::string& name, int degree, int n);
  int find(const std::string& name) const;  // -1 if absent
  void add_objective(int var, MultiPoly pairing);
  void add_equality(std::vector<PairingTerm> terms, double rhs);
  void add_at_most(std::vector<PairingTerm> terms, double rhs);
  void add_identity(IdentityConstraint c);
  void add_vanishing(int var, const Vec& c);

  const std::vector<SosVariable>& variables() const { return vars_; }
  const std::vector<PairingTerm>& objective() const { return objective_; }
  const std::vector<LinearConstraint>& linear() const { return linear_; }
  const std::vector<IdentityConstraint>& identities() const { return identities_; }

  std::optional<double> cap;  // value of the complexity cap, when one was added
  // Subtracts trace(G) of every Gram block from the objective. Membership problems
  // often have no interior; the penalty keeps the solver off the flat optimal face.
  double gram_trace_penalty = 0.0;

 private:
  void check_pairing(const PairingTerm& t) const;

  std::vector<SosVariable> vars_;
  std::vector<PairingTerm> objective_;
  std::vector<LinearConstraint> linear_;
  std::vector<IdentityConstraint> identities_;
};

MultiPoly gram_to_poly(const Mat& g, const GramBasis& basis);

SdpProblem compile(const SosProgram& prog);
// Same program with vanishing points ignored (full Gram blocks); used for audits.
SdpProblem compile_unreduced(const SosProgram& prog);

struct SosSolution {
  SdpSolution sdp;
  std::map<std::string, MultiPoly> polys;
};

// Throws AlgorithmError unless the solver reports optimal and every Gram block is PSD within tolerance.
std::map<std::string, MultiPoly> extract_solution(const SdpSolution& sol, const SosProgram& prog,
                                                  double psd_tol = 1e-7);
SosSolution solve_program(const SosProgram& prog, const ToleranceConfig& tol = {});

// maximize <W f, sum_k T_k> s.t. <W, sum_{k <= w_degree} T_k> = 1, W(c) = 0 for each vanishing point.
SosProgram build_v_program(const MomentSequence& ms, const MultiPoly& f, int w_degree,
                           const std::vector<Vec>& vanishing = {});
void add_point_vanishing(SosProgram& prog, const Vec& c);
// w_max - W - g (delta - |X - c|^2) is SOS, with g SOS of degree deg W - 2.
void add_distinct_recovery_constraint(SosProgram& prog, const Vec& c, double delta, double w_max);

double ball_moment(const MultiIndex& alpha, int n);
// E_U[W] <= (c_max + 1) / lambda_min over the uniform unit-ball measure.
void add_complexity_cap(SosProgram& prog, double lambda_min, double c_max);

// Feasibility program "W SOS with W == p".
SosProgram sos_membership_program(const MultiPoly& p);

}  // namespace sosdec
