#include "sosdec/poly.hpp"

#include <algorithm>
#include <cmath>
#include <functional>

namespace sosdec {

namespace {

constexpr int kMaxMultinomialDegree = 40;

std::uint64_t binom_u64(int n, int k) {
  k = std::min(k, n - k);
  std::uint64_t r = 1;
  for (int i = 1; i <= k; ++i) {
    // r * (n-k+i) / i stays integral at every step.
    std::uint64_t num = 0;
    if (__builtin_mul_overflow(r, static_cast<std::uint64_t>(n - k + i), &num))
      throw DegreeLimitError("binomial coefficient overflow");
    r = num / static_cast<std::uint64_t>(i);
  }
  return r;
}

}  // namespace

MultiIndex::MultiIndex(std::initializer_list<int> e) : MultiIndex(std::vector<int>(e)) {}

MultiIndex::MultiIndex(std::vector<int> e) : e_(std::move(e)) {
  for (int v : e_) {
    if (v < 0) throw DomainError("negative exponent in multi-index");
    degree_ += v;
  }
}

MultiIndex MultiIndex::unit(int n, int i, int power) {
  std::vector<int> e(static_cast<std::size_t>(n), 0);
  e[static_cast<std::size_t>(i)] = power;
  return MultiIndex(std::move(e));
}

MultiIndex MultiIndex::operator+(const MultiIndex& o) const {
  if (o.size() != size()) throw DimensionError("multi-index size mismatch");
  MultiIndex r = *this;
  for (std::size_t i = 0; i < e_.size(); ++i) r.e_[i] += o.e_[i];
  r.degree_ += o.degree_;
  return r;
}

MultiIndex MultiIndex::operator-(const MultiIndex& o) const {
  MultiIndex r = *this;
  for (std::size_t i = 0; i < e_.size(); ++i) r.e_[i] -= o.e_[i];
  r.degree_ -= o.degree_;
  return r;
}

bool MultiIndex::divides(const MultiIndex& o) const {
  if (o.size() != size()) return false;
  for (std::size_t i = 0; i < e_.size(); ++i)
    if (e_[i] > o.e_[i]) return false;
  return true;
}

bool GradedLex::operator()(const MultiIndex& a, const MultiIndex& b) const {
  if (a.degree() != b.degree()) return a.degree() < b.degree();
  return a.exponents() > b.exponents();
}

std::uint64_t multinomial_coeff(const MultiIndex& alpha) {
  if (alpha.degree() > kMaxMultinomialDegree)
    throw DegreeLimitError("multinomial coefficient requested above degree 40");
  std::uint64_t r = 1;
  int partial = 0;
  for (int i = 0; i < alpha.size(); ++i) {
    partial += alpha[i];
    std::uint64_t b = binom_u64(partial, alpha[i]);
    if (__builtin_mul_overflow(r, b, &r))
      throw DegreeLimitError("multinomial coefficient overflow");
  }
  return r;
}

double binom_d(const MultiIndex& alpha) { return static_cast<double>(multinomial_coeff(alpha)); }

std::vector<MultiIndex> monomials_of_degree(int n, int k) {
  std::vector<MultiIndex> out;
  std::vector<int> e(static_cast<std::size_t>(n), 0);
  // Recursive fill, X1 exponent descending, which is exactly graded-lex within a degree.
  std::function<void(int, int)> rec = [&](int i, int left) {
    if (i == n - 1) {
      e[static_cast<std::size_t>(i)] = left;
      out.emplace_back(e);
      return;
    }
    for (int v = left; v >= 0; --v) {
      e[static_cast<std::size_t>(i)] = v;
      rec(i + 1, left - v);
    }
  };
  if (n == 0) {
    if (k == 0) out.emplace_back(std::vector<int>{});
    return out;
  }
  rec(0, k);
  return out;
}

std::vector<MultiIndex> monomials_up_to(int n, int k) {
  std::vector<MultiIndex> out;
  for (int j = 0; j <= k; ++j) {
    auto part = monomials_of_degree(n, j);
    out.insert(out.end(), part.begin(), part.end());
  }
  return out;
}

MultiPoly MultiPoly::constant(int n, double c) {
  MultiPoly p(n, 0);
  p.set(MultiIndex(n), c);
  return p;
}

MultiPoly MultiPoly::variable(int n, int i) {
  MultiPoly p(n, 1);
  p.set(MultiIndex::unit(n, i), 1.0);
  return p;
}

int MultiPoly::degree() const {
  if (terms_.empty()) return -1;
  return terms_.rbegin()->first.degree();
}

void MultiPoly::check_index(const MultiIndex& alpha) const {
  if (alpha.size() != n_) throw DimensionError("multi-index dimension does not match polynomial");
}

double MultiPoly::coeff(const MultiIndex& alpha) const {
  auto it = terms_.find(alpha);
  return it == terms_.end() ? 0.0 : it->second;
}

void MultiPoly::set(const MultiIndex& alpha, double c) {
  check_index(alpha);
  if (std::abs(c) < kPruneTol) {
    terms_.erase(alpha);
    return;
  }
  if (alpha.degree() > max_degree_) max_degree_ = alpha.degree();
  terms_[alpha] = c;
}

void MultiPoly::add(const MultiIndex& alpha, double c) {
  check_index(alpha);
  auto it = terms_.find(alpha);
  if (it == terms_.end()) {
    set(alpha, c);
    return;
  }
  it->second += c;
  if (std::abs(it->second) < kPruneTol) terms_.erase(it);
}

void MultiPoly::set_max_degree(int d) {
  if (degree() > d) throw DomainError("max_degree below a stored term degree");
  max_degree_ = d;
}

MultiPoly MultiPoly::with_max_degree(int d) const {
  MultiPoly r = *this;
  r.set_max_degree(d);
  return r;
}

void MultiPoly::prune() {
  std::erase_if(terms_, [](const auto& kv) { return std::abs(kv.second) < kPruneTol; });
}

MultiPoly& MultiPoly::operator+=(const MultiPoly& o) {
  if (o.n_ != n_) throw DimensionError("polynomial dimension mismatch");
  max_degree_ = std::max(max_degree_, o.max_degree_);
  for (const auto& [a, c] : o.terms_) terms_[a] += c;
  prune();
  return *this;
}

MultiPoly& MultiPoly::operator-=(const MultiPoly& o) {
  if (o.n_ != n_) throw DimensionError("polynomial dimension mismatch");
  max_degree_ = std::max(max_degree_, o.max_degree_);
  for (const auto& [a, c] : o.terms_) terms_[a] -= c;
  prune();
  return *this;
}

MultiPoly& MultiPoly::operator*=(double s) {
  for (auto& kv : terms_) kv.second *= s;
  prune();
  return *this;
}

MultiPoly operator+(MultiPoly a, const MultiPoly& b) { return a += b; }
MultiPoly operator-(MultiPoly a, const MultiPoly& b) { return a -= b; }
MultiPoly operator*(MultiPoly a, double s) { return a *= s; }
MultiPoly operator*(double s, MultiPoly a) { return a *= s; }

HomPoly::HomPoly(MultiPoly p, int k) : p_(std::move(p)), k_(k) {
  for (const auto& kv : p_.terms())
    if (kv.first.degree() != k) throw DomainError("term degree differs from homogeneous degree");
  p_.set_max_degree(k);
}

HomPoly pow_linear_form(const Vec& a, int k) {
  if (k < 0) throw DomainError("negative power");
  const int n = static_cast<int>(a.size());
  MultiPoly p(n, k);
  for (const auto& alpha : monomials_of_degree(n, k)) {
    double c = 1.0;
    for (int i = 0; i < n; ++i) c *= std::pow(a[i], alpha[i]);
    p.set(alpha, c);
  }
  return HomPoly(std::move(p), k);
}

double poly_eval(const MultiPoly& p, const Vec& x) {
  if (x.size() != p.n()) throw DimensionError("evaluation point dimension mismatch");
  double s = 0.0;
  for (const auto& [alpha, c] : p.terms()) {
    double m = binom_d(alpha) * c;
    for (int i = 0; i < p.n(); ++i)
      if (alpha[i] != 0) m *= std::pow(x[i], alpha[i]);
    s += m;
  }
  return s;
}

double reznick_product(const MultiPoly& p, const MultiPoly& q) {
  if (p.n() != q.n()) throw DimensionError("Reznick product dimension mismatch");
  const MultiPoly& small = p.size() <= q.size() ? p : q;
  const MultiPoly& large = p.size() <= q.size() ? q : p;
  double s = 0.0;
  for (const auto& [alpha, c] : small.terms()) {
    double other = large.coeff(alpha);
    if (other != 0.0) s += binom_d(alpha) * c * other;
  }
  return s;
}

HomPoly homogeneous_part(const MultiPoly& p, int k) {
  MultiPoly out(p.n(), k);
  for (const auto& [alpha, c] : p.terms())
    if (alpha.degree() == k) out.set(alpha, c);
  return HomPoly(std::move(out), k);
}

MultiPoly poly_mul(const MultiPoly& p, const MultiPoly& q) {
  if (p.n() != q.n()) throw DimensionError("product dimension mismatch");
  MultiPoly::TermMap raw;
  for (const auto& [a, ca] : p.terms()) {
    double ra = binom_d(a) * ca;
    for (const auto& [b, cb] : q.terms()) raw[a + b] += ra * binom_d(b) * cb;
  }
  MultiPoly out(p.n(), p.max_degree() + q.max_degree());
  for (const auto& [g, r] : raw) out.set(g, r / binom_d(g));
  return out;
}

HomPoly contract(const MultiPoly& q, const MultiPoly& p, int d) {
  if (p.n() != q.n()) throw DimensionError("contraction dimension mismatch");
  const int k = q.max_degree();
  if (k > d) throw DomainError("contraction degree bound exceeds d");
  const int out_deg = d - k;
  MultiPoly::TermMap acc;
  for (const auto& [g, pg] : p.terms()) {
    for (const auto& [a, qa] : q.terms()) {
      if (g.degree() - a.degree() != out_deg || !a.divides(g)) continue;
      acc[g - a] += binom_d(a) * qa * pg;
    }
  }
  MultiPoly out(p.n(), out_deg);
  for (const auto& [b, c] : acc) out.set(b, c);
  return HomPoly(std::move(out), out_deg);
}

double frobenius_norm(const MultiPoly& p) { return std::sqrt(reznick_product(p, p)); }

MultiPoly shifted_norm_sq(const Vec& c) {
  const int n = static_cast<int>(c.size());
  MultiPoly p(n, 2);
  p.set(MultiIndex(n), c.squaredNorm());
  for (int i = 0; i < n; ++i) {
    p.set(MultiIndex::unit(n, i), -2.0 * c[i]);
    p.set(MultiIndex::unit(n, i, 2), 1.0);
  }
  return p;
}

MultiPoly evaluation_functional(const Vec& a, int d) {
  MultiPoly p(static_cast<int>(a.size()), d);
  for (int k = 0; k <= d; ++k) p += pow_linear_form(a, k).poly();
  return p;
}

nlohmann::json to_json(const MultiPoly& p) {
  nlohmann::json terms = nlohmann::json::array();
  for (const auto& [a, c] : p.terms()) terms.push_back({{"alpha", a.exponents()}, {"coeff", c}});
  return {{"n", p.n()}, {"degree", p.max_degree()}, {"terms", terms}};
}

MultiPoly poly_from_json(const nlohmann::json& j) {
  try {
    MultiPoly p(j.at("n").get<int>(), j.at("degree").get<int>());
    for (const auto& t : j.at("terms"))
      p.add(MultiIndex(t.at("alpha").get<std::vector<int>>()), t.at("coeff").get<double>());
    return p;
  } catch (const nlohmann::json::exception& e) {
    throw InputError(std::string("malformed polynomial JSON: ") + e.what());
  }
}

}  // namespace sosdec
