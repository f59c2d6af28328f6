#include "sosdec/sosprog.hpp"

#include <cmath>
#include <numbers>
#include <set>

namespace sosdec {

GramBasis::GramBasis(int n, int half_degree) : n_(n), half_degree_(half_degree) {
  if (half_degree < 0) throw DomainError("negative half degree");
  monomials_ = monomials_up_to(n, half_degree);
  for (int i = 0; i < size(); ++i) index_[monomials_[static_cast<std::size_t>(i)]] = i;
  for (int a = 0; a < size(); ++a)
    for (int b = a; b < size(); ++b)
      products_[monomials_[static_cast<std::size_t>(a)] + monomials_[static_cast<std::size_t>(b)]].emplace_back(a, b);
}

int GramBasis::index_of(const MultiIndex& m) const {
  auto it = index_.find(m);
  return it == index_.end() ? -1 : it->second;
}

const std::vector<std::pair<int, int>>& GramBasis::pairs_for(const MultiIndex& gamma) const {
  static const std::vector<std::pair<int, int>> kEmpty;
  auto it = products_.find(gamma);
  return it == products_.end() ? kEmpty : it->second;
}

Mat SosVariable::face() const {
  const int s = basis.size();
  if (vanishing.empty()) return Mat::Identity(s, s);
  Mat mv(s, static_cast<Eigen::Index>(vanishing.size()));
  for (std::size_t k = 0; k < vanishing.size(); ++k)
    for (int a = 0; a < s; ++a) {
      double v = 1.0;
      for (int i = 0; i < basis.n(); ++i) v *= std::pow(vanishing[k][i], basis[a][i]);
      mv(a, static_cast<Eigen::Index>(k)) = v;
    }
  Eigen::JacobiSVD<Mat> svd(mv, Eigen::ComputeFullU);
  const auto& sv = svd.singularValues();
  Eigen::Index rank = 0;
  for (Eigen::Index i = 0; i < sv.size(); ++i)
    if (sv[i] > 1e-12 * sv[0]) ++rank;
  return svd.matrixU().rightCols(s - rank);
}

int SosProgram::add_variable(const std::string& name, int degree, int n) {
  if (degree < 0 || degree % 2 != 0) throw DomainError("SOS variable degree must be even and nonnegative");
  if (find(name) >= 0) throw DomainError("duplicate SOS variable name " + name);
  vars_.push_back({name, degree, GramBasis(n, degree / 2), {}});
  return static_cast<int>(vars_.size()) - 1;
}

int SosProgram::find(const std::string& name) const {
  for (std::size_t i = 0; i < vars_.size(); ++i)
    if (vars_[i].name == name) return static_cast<int>(i);
  return -1;
}

void SosProgram::check_pairing(const PairingTerm& t) const {
  if (t.var < 0 || t.var >= static_cast<int>(vars_.size())) throw DomainError("pairing references a missing variable");
  if (t.pairing.n() != vars_[static_cast<std::size_t>(t.var)].basis.n()) throw DimensionError("pairing dimension mismatch");
}

void SosProgram::add_objective(int var, MultiPoly pairing) {
  PairingTerm t{var, std::move(pairing)};
  check_pairing(t);
  objective_.push_back(std::move(t));
}

void SosProgram::add_equality(std::vector<PairingTerm> terms, double rhs) {
  for (const auto& t : terms) check_pairing(t);
  linear_.push_back({std::move(terms), rhs, LinearConstraint::Kind::equal});
}

void SosProgram::add_at_most(std::vector<PairingTerm> terms, double rhs) {
  for (const auto& t : terms) check_pairing(t);
  linear_.push_back({std::move(terms), rhs, LinearConstraint::Kind::at_most});
}

void SosProgram::add_vanishing(int var, const Vec& c) {
  if (var < 0 || var >= static_cast<int>(vars_.size())) throw DomainError("vanishing point for a missing variable");
  if (c.size() != vars_[static_cast<std::size_t>(var)].basis.n()) throw DimensionError("vanishing point dimension mismatch");
  vars_[static_cast<std::size_t>(var)].vanishing.push_back(c);
}

void SosProgram::add_identity(IdentityConstraint c) {
  for (const auto& t : c.terms)
    if (t.var < 0 || t.var >= static_cast<int>(vars_.size())) throw DomainError("identity references a missing variable");
  identities_.push_back(std::move(c));
}

MultiPoly gram_to_poly(const Mat& g, const GramBasis& basis) {
  if (g.rows() != basis.size() || g.cols() != basis.size()) throw DimensionError("Gram matrix size does not match basis");
  MultiPoly p(basis.n(), 2 * basis.half_degree());
  for (const auto& [gamma, pairs] : basis.products()) {
    double raw = 0.0;
    for (const auto& [a, b] : pairs) raw += a == b ? g(a, b) : g(a, b) + g(b, a);
    p.set(gamma, raw / binom_d(gamma));
  }
  return p;
}

namespace {

std::vector<SymEntry> pairing_entries(const GramBasis& basis, const MultiPoly& pairing) {
  std::vector<SymEntry> out;
  for (const auto& [gamma, pairs] : basis.products()) {
    const double v = pairing.coeff(gamma);
    if (v == 0.0) continue;
    for (const auto& [a, b] : pairs) out.push_back({a, b, v});
  }
  return out;
}

}  // namespace

namespace {

std::vector<SymEntry> upper_entries(const Mat& a) {
  std::vector<SymEntry> out;
  if (a.size() == 0) return out;
  const double tiny = 1e-15 * std::max(1.0, a.cwiseAbs().maxCoeff());
  for (int i = 0; i < a.rows(); ++i)
    for (int j = i; j < a.cols(); ++j)
      if (std::abs(a(i, j)) > tiny) out.push_back({i, j, a(i, j)});
  return out;
}

Mat dense_of(const std::vector<SymEntry>& es, int s) {
  Mat a = Mat::Zero(s, s);
  for (const auto& e : es) {
    a(e.i, e.j) += e.v;
    if (e.i != e.j) a(e.j, e.i) += e.v;
  }
  return a;
}

}  // namespace

SdpProblem compile(const SosProgram& prog) {
  SdpProblem sdp = compile_unreduced(prog);
  const auto& vars = prog.variables();
  for (std::size_t k = 0; k < vars.size(); ++k) {
    if (vars[k].vanishing.empty()) continue;
    const Mat n = vars[k].face();
    const int s = vars[k].basis.size();
    const int r = static_cast<int>(n.cols());
    sdp.block_sizes[k] = r;
    sdp.objective[k] = n.transpose() * sdp.objective[k] * n;
    for (auto& row : sdp.rows)
      for (auto& part : row.blocks)
        if (part.block == static_cast<int>(k)) part.entries = upper_entries(n.transpose() * dense_of(part.entries, s) * n);
  }
  return sdp;
}

SdpProblem compile_unreduced(const SosProgram& prog) {
  SdpProblem sdp;
  const auto& vars = prog.variables();
  for (const auto& v : vars) sdp.add_block(v.basis.size());
  if (prog.gram_trace_penalty != 0.0)
    for (auto& c : sdp.objective) c.diagonal().array() -= prog.gram_trace_penalty;

  for (const auto& t : prog.objective()) {
    for (const auto& e : pairing_entries(vars[static_cast<std::size_t>(t.var)].basis, t.pairing)) {
      sdp.objective[static_cast<std::size_t>(t.var)](e.i, e.j) += e.v;
      if (e.i != e.j) sdp.objective[static_cast<std::size_t>(t.var)](e.j, e.i) += e.v;
    }
  }

  for (const auto& c : prog.linear()) {
    SdpRow row;
    row.rhs = c.rhs;
    for (const auto& t : c.terms)
      row.blocks.push_back({t.var, pairing_entries(vars[static_cast<std::size_t>(t.var)].basis, t.pairing)});
    if (c.kind == LinearConstraint::Kind::at_most) row.scalars.push_back({sdp.add_scalar(0.0), 1.0});
    sdp.rows.push_back(std::move(row));
  }

  for (const auto& id : prog.identities()) {
    // Scaled coefficient of (mult * var) at eta: sum over delta of raw(mult)_delta * raw(var)_{eta-delta} / binom(eta).
    std::set<MultiIndex, GradedLex> support;
    for (const auto& [eta, c] : id.constant.terms()) support.insert(eta);
    for (const auto& t : id.terms)
      for (const auto& [gamma, pairs] : vars[static_cast<std::size_t>(t.var)].basis.products())
        for (const auto& [delta, c] : t.multiplier.terms()) support.insert(gamma + delta);
    for (const auto& eta : support) {
      SdpRow row;
      const double beta = binom_d(eta);
      row.rhs = -id.constant.coeff(eta);
      for (const auto& t : id.terms) {
        const auto& basis = vars[static_cast<std::size_t>(t.var)].basis;
        BlockPart part{t.var, {}};
        for (const auto& [delta, c] : t.multiplier.terms()) {
          if (!delta.divides(eta)) continue;
          const auto& pairs = basis.pairs_for(eta - delta);
          const double v = binom_d(delta) * c / beta;
          for (const auto& [a, b] : pairs) part.entries.push_back({a, b, v});
        }
        if (!part.entries.empty()) row.blocks.push_back(std::move(part));
      }
      sdp.rows.push_back(std::move(row));
    }
  }
  return sdp;
}

std::map<std::string, MultiPoly> extract_solution(const SdpSolution& sol, const SosProgram& prog, double psd_tol) {
  if (sol.status != SdpStatus::optimal)
    throw AlgorithmError("SDP solver did not reach optimality: " + to_string(sol.status) +
                         (sol.message.empty() ? "" : " (" + sol.message + ")"));
  std::map<std::string, MultiPoly> out;
  const auto& vars = prog.variables();
  for (std::size_t i = 0; i < vars.size(); ++i) {
    const Mat& g = sol.x[i];
    if (g.rows() > 0) {
      const double lmin = Eigen::SelfAdjointEigenSolver<Mat>(g, Eigen::EigenvaluesOnly).eigenvalues().minCoeff();
      if (lmin < -psd_tol * (1.0 + std::abs(g.trace())))
        throw AlgorithmError("Gram matrix of " + vars[i].name + " is not PSD within tolerance");
    }
    if (vars[i].vanishing.empty()) {
      out.emplace(vars[i].name, gram_to_poly(g, vars[i].basis));
    } else {
      const Mat n = vars[i].face();
      out.emplace(vars[i].name, gram_to_poly(n * g * n.transpose(), vars[i].basis));
    }
  }
  return out;
}

SosSolution solve_program(const SosProgram& prog, const ToleranceConfig& tol) {
  SosSolution out;
  out.sdp = solve(compile(prog), tol);
  out.polys = extract_solution(out.sdp, prog, tol.tol_psd);
  return out;
}

SosProgram build_v_program(const MomentSequence& ms, const MultiPoly& f, int w_degree, const std::vector<Vec>& vanishing) {
  if (w_degree < 0 || w_degree % 2 != 0) throw DomainError("weight polynomial degree must be even");
  if (w_degree > ms.d - 2) throw DomainError("weight polynomial degree exceeds d - 2");
  if (f.degree() > 2) throw DomainError("discriminator degree exceeds 2");
  if (w_degree + std::max(f.degree(), 0) > ms.d) throw DomainError("W f exceeds the available moment degree");
  SosProgram prog;
  const int w = prog.add_variable("W", w_degree, ms.n);

  const MultiPoly s = ms.sum(0, ms.d);
  MultiPoly obj(ms.n, w_degree);
  for (const auto& [eta, sv] : s.terms())
    for (const auto& [delta, fv] : f.terms()) {
      if (!delta.divides(eta)) continue;
      const MultiIndex gamma = eta - delta;
      if (gamma.degree() <= w_degree) obj.add(gamma, binom_d(delta) * fv * sv);
    }
  prog.add_objective(w, obj);
  prog.add_equality({{w, ms.sum(0, w_degree)}}, 1.0);
  for (const auto& c : vanishing) add_point_vanishing(prog, c);
  return prog;
}

void add_point_vanishing(SosProgram& prog, const Vec& c) {
  const int w = prog.find("W");
  if (w < 0) throw DomainError("program has no W variable");
  prog.add_vanishing(w, c);
}

void add_distinct_recovery_constraint(SosProgram& prog, const Vec& c, double delta, double w_max) {
  const int w = prog.find("W");
  if (w < 0) throw DomainError("program has no W variable");
  const int wdeg = prog.variables()[static_cast<std::size_t>(w)].degree;
  if (wdeg < 2) throw DomainError("distinct-recovery constraint needs deg W >= 2");
  const int n = static_cast<int>(c.size());
  const int idx = static_cast<int>(prog.identities().size());
  const int g = prog.add_variable("g" + std::to_string(idx), wdeg - 2, n);
  const int sigma = prog.add_variable("sigma" + std::to_string(idx), wdeg, n);
  // -(delta - |X-c|^2) = |X-c|^2 - delta
  MultiPoly gmult = shifted_norm_sq(c) - MultiPoly::constant(n, delta);
  IdentityConstraint id;
  id.terms.push_back({w, MultiPoly::constant(n, -1.0)});
  id.terms.push_back({g, gmult});
  id.terms.push_back({sigma, MultiPoly::constant(n, -1.0)});
  id.constant = MultiPoly::constant(n, w_max);
  prog.add_identity(std::move(id));
}

double ball_moment(const MultiIndex& alpha, int n) {
  for (int i = 0; i < alpha.size(); ++i)
    if (alpha[i] % 2 != 0) return 0.0;
  // Sphere moment times E[r^|alpha|] = n / (n + |alpha|).
  double lg = std::lgamma(0.5 * n + 1.0) - std::lgamma(0.5 * (n + alpha.degree()) + 1.0) - 0.5 * n * std::log(std::numbers::pi);
  for (int i = 0; i < alpha.size(); ++i) lg += std::lgamma(0.5 * (alpha[i] + 1));
  for (int i = alpha.size(); i < n; ++i) lg += std::lgamma(0.5);
  return std::exp(lg);
}

void add_complexity_cap(SosProgram& prog, double lambda_min, double c_max) {
  if (!(lambda_min > 0.0)) throw DomainError("complexity cap needs lambda_min > 0");
  const double bound = (c_max + 1.0) / lambda_min;
  if (!std::isfinite(bound)) return;
  const int w = prog.find("W");
  if (w < 0) throw DomainError("program has no W variable");
  const auto& var = prog.variables()[static_cast<std::size_t>(w)];
  MultiPoly pairing(var.basis.n(), var.degree);
  for (const auto& alpha : monomials_up_to(var.basis.n(), var.degree)) pairing.set(alpha, ball_moment(alpha, var.basis.n()));
  prog.add_at_most({{w, pairing}}, bound);
  prog.cap = bound;
}

SosProgram sos_membership_program(const MultiPoly& p) {
  SosProgram prog;
  prog.gram_trace_penalty = 1.0;
  const int deg = std::max(p.degree(), 0);
  const int w = prog.add_variable("W", deg + deg % 2, p.n());
  IdentityConstraint id;
  id.terms.push_back({w, MultiPoly::constant(p.n(), 1.0)});
  id.constant = p * -1.0;
  prog.add_identity(std::move(id));
  return prog;
}

}  // namespace sosdec
