#pragma once

#include <cstdint>
#include <map>
#include <vector>

#include <Eigen/Dense>
#include <json.hpp>

#include "sosdec/errors.hpp"

namespace sosdec {

using Vec = Eigen::VectorXd;
using Mat = Eigen::MatrixXd;

class MultiIndex {
 public:
  MultiIndex() = default;
  explicit MultiIndex(int n) : e_(static_cast<std::size_t>(n), 0) {}
  MultiIndex(std::initializer_list<int> e);
  explicit MultiIndex(std::vector<int> e);

  static MultiIndex unit(int n, int i, int power = 1);

  int size() const { return static_cast<int>(e_.size()); }
  int degree() const { return degree_; }
  int operator[](int i) const { return e_[static_cast<std::size_t>(i)]; }
  const std::vector<int>& exponents() const { return e_; }

  MultiIndex operator+(const MultiIndex& o) const;
  // Componentwise difference; caller must check divides() first.
  MultiIndex operator-(const MultiIndex& o) const;
  bool divides(const MultiIndex& o) const;

  bool operator==(const MultiIndex& o) const { return e_ == o.e_; }
  bool operator!=(const MultiIndex& o) const { return e_ != o.e_; }

 private:
  std::vector<int> e_;
  int degree_ = 0;
};

// Degree first, then X1 > X2 > ... lexicographically (X1^2 before X1X2 before X2^2).
struct GradedLex {
  bool operator()(const MultiIndex& a, const MultiIndex& b) const;
};

std::uint64_t multinomial_coeff(const MultiIndex& alpha);
double binom_d(const MultiIndex& alpha);

// All exponent vectors in n variables of total degree exactly k, graded-lex order.
std::vector<MultiIndex> monomials_of_degree(int n, int k);
// All exponent vectors of degree <= k, graded-lex order.
std::vector<MultiIndex> monomials_up_to(int n, int k);

class MultiPoly {
 public:
  using TermMap = std::map<MultiIndex, double, GradedLex>;
  static constexpr double kPruneTol = 1e-14;

  MultiPoly() = default;
  MultiPoly(int n, int max_degree) : n_(n), max_degree_(max_degree) {}

  static MultiPoly constant(int n, double c);
  static MultiPoly variable(int n, int i);

  int n() const { return n_; }
  int max_degree() const { return max_degree_; }
  // Largest degree actually present; -1 for the zero polynomial.
  int degree() const;
  const TermMap& terms() const { return terms_; }
  bool is_zero() const { return terms_.empty(); }
  std::size_t size() const { return terms_.size(); }

  double coeff(const MultiIndex& alpha) const;
  double raw_coeff(const MultiIndex& alpha) const { return coeff(alpha) * binom_d(alpha); }
  void set(const MultiIndex& alpha, double c);
  void add(const MultiIndex& alpha, double c);
  void set_max_degree(int d);
  MultiPoly with_max_degree(int d) const;

  MultiPoly& operator+=(const MultiPoly& o);
  MultiPoly& operator-=(const MultiPoly& o);
  MultiPoly& operator*=(double s);

  bool operator==(const MultiPoly& o) const { return n_ == o.n_ && terms_ == o.terms_; }

 private:
  void check_index(const MultiIndex& alpha) const;
  void prune();

  int n_ = 0;
  int max_degree_ = 0;
  TermMap terms_;
};

MultiPoly operator+(MultiPoly a, const MultiPoly& b);
MultiPoly operator-(MultiPoly a, const MultiPoly& b);
MultiPoly operator*(MultiPoly a, double s);
MultiPoly operator*(double s, MultiPoly a);

class HomPoly {
 public:
  HomPoly() = default;
  HomPoly(int n, int k) : p_(n, k), k_(k) {}
  // Throws DomainError if some term of p has degree != k.
  HomPoly(MultiPoly p, int k);

  int n() const { return p_.n(); }
  int degree() const { return k_; }
  const MultiPoly& poly() const { return p_; }
  operator const MultiPoly&() const { return p_; }

  bool operator==(const HomPoly& o) const { return k_ == o.k_ && p_ == o.p_; }

 private:
  MultiPoly p_;
  int k_ = 0;
};

HomPoly pow_linear_form(const Vec& a, int k);
double poly_eval(const MultiPoly& p, const Vec& x);
double reznick_product(const MultiPoly& p, const MultiPoly& q);
HomPoly homogeneous_part(const MultiPoly& p, int k);
MultiPoly poly_mul(const MultiPoly& p, const MultiPoly& q);
// <Q (x) id, P> with Q treated as degree <= Q.max_degree(); result has degree d - Q.max_degree().
HomPoly contract(const MultiPoly& q, const MultiPoly& p, int d);
double frobenius_norm(const MultiPoly& p);

// |X - c|^2
MultiPoly shifted_norm_sq(const Vec& c);
// Sum_{k=0}^{d} <a,X>^k; pairing with it evaluates a polynomial of degree <= d at a.
MultiPoly evaluation_functional(const Vec& a, int d);

nlohmann::json to_json(const MultiPoly& p);
MultiPoly poly_from_json(const nlohmann::json& j);

}  // namespace sosdec
