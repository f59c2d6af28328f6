#include "sosdec/decompose.hpp"

#include <algorithm>
#include <cmath>

#include "sosdec/chebyshev.hpp"
#include "sosdec/measures.hpp"
#include "sosdec/numerics.hpp"

namespace sosdec {

std::string to_string(Discriminator d) {
  switch (d) {
    case Discriminator::random_v_linear: return "random_v_linear";
    case Discriminator::random_v_squared: return "random_v_squared";
    case Discriminator::norm_squared: return "norm_squared";
    case Discriminator::custom: return "custom";
  }
  return "unknown";
}

Discriminator discriminator_from_string(const std::string& s) {
  if (s == "random_v_linear") return Discriminator::random_v_linear;
  if (s == "random_v_squared") return Discriminator::random_v_squared;
  if (s == "norm_squared") return Discriminator::norm_squared;
  if (s == "custom") return Discriminator::custom;
  throw InputError("unknown discriminator " + s);
}

namespace {

std::vector<double> to_std(const Vec& v) { return {v.data(), v.data() + v.size()}; }

MultiPoly make_discriminator(Discriminator kind, const Vec& v, const DecompOptions& opts) {
  const int n = static_cast<int>(v.size());
  switch (kind) {
    case Discriminator::random_v_linear: return pow_linear_form(v, 1).poly();
    case Discriminator::random_v_squared: return pow_linear_form(v, 2).poly();
    case Discriminator::norm_squared: {
      MultiPoly p(n, 2);
      for (int i = 0; i < n; ++i) p.set(MultiIndex::unit(n, i, 2), 1.0);
      return p;
    }
    case Discriminator::custom:
      if (!opts.custom_f) throw InputError("custom discriminator selected without a polynomial");
      return *opts.custom_f;
  }
  throw InputError("unknown discriminator");
}

Vec linear_coefficients(const MultiPoly& p) {
  Vec out = Vec::Zero(p.n());
  for (int i = 0; i < p.n(); ++i) out[i] = p.coeff(MultiIndex::unit(p.n(), i));
  return out;
}

}  // namespace

nlohmann::json to_json(const DecompositionResult& r) {
  nlohmann::json j;
  nlohmann::json comps = nlohmann::json::array();
  for (const auto& c : r.components) comps.push_back(to_std(c));
  j["components"] = comps;
  j["weights"] = r.weights;
  j["warnings"] = r.warnings;
  j["stopped_by_infeasibility"] = r.stopped_by_infeasibility;
  j["solver_iterations_total"] = r.solver_iterations_total;
  nlohmann::json rounds = nlohmann::json::array();
  for (const auto& d : r.rounds) {
    nlohmann::json jr{{"round", d.round},
                      {"objective", d.objective},
                      {"eig1", d.eig1},
                      {"eig2", d.eig2},
                      {"rho_untrusted", d.rho_untrusted},
                      {"discriminator", d.discriminator},
                      {"solver_status", d.solver_status},
                      {"solver_iterations", d.solver_iterations},
                      {"v", to_std(d.v)},
                      {"threshold_box", d.threshold_box},
                      {"threshold_text", d.threshold_text},
                      {"sample_attempts", d.sample_attempts}};
    if (d.off_component_mass) jr["off_component_mass"] = *d.off_component_mass;
    rounds.push_back(jr);
  }
  j["rounds"] = rounds;
  return j;
}

Vec random_unit_vector(int n, std::mt19937_64& rng) {
  std::normal_distribution<double> g(0.0, 1.0);
  Vec v(n);
  do {
    for (int i = 0; i < n; ++i) v[i] = g(rng);
  } while (v.norm() < 1e-12);
  return v.normalized();
}

std::vector<Vec> jennrich(const HomPoly& t3, std::uint64_t seed) {
  if (t3.degree() != 3) throw DomainError("Jennrich needs a degree-3 tensor");
  const int n = t3.n();
  if (t3.poly().is_zero()) return {};
  std::mt19937_64 rng(seed);
  const double tnorm = frobenius_norm(t3);
  std::string last_problem;
  for (int attempt = 0; attempt < 6; ++attempt) {
    const Vec v = random_unit_vector(n, rng);
    const Mat m = quadratic_form_matrix(contract(pow_linear_form(v, 1), t3, 3));
    const auto eig = sym_eig(m);
    const double top = std::abs(eig.values[0]);
    std::vector<int> keep;
    for (int i = 0; i < n; ++i)
      if (std::abs(eig.values[i]) > 1e-9 * top) keep.push_back(i);
    bool collision = false;
    for (std::size_t a = 0; a < keep.size() && !collision; ++a)
      for (std::size_t b = a + 1; b < keep.size(); ++b)
        if (std::abs(eig.values[keep[a]] - eig.values[keep[b]]) < 1e-8 * top) collision = true;
    if (collision) {
      last_problem = "eigenvalue collision";
      continue;
    }
    std::vector<Vec> comps;
    bool degenerate = false;
    for (int i : keep) {
      const Vec u = eig.vectors.col(i);
      const double uv = u.dot(v);
      if (std::abs(uv) < 1e-8) {
        degenerate = true;
        break;
      }
      comps.push_back(std::cbrt(eig.values[i] / uv) * u);
    }
    if (degenerate) {
      last_problem = "direction nearly orthogonal to a component";
      continue;
    }
    if (backward_error(t3, comps) <= 1e-7 * std::max(1.0, tnorm)) return comps;
    last_problem = "reconstruction does not match the tensor; components may not be orthogonal";
  }
  throw AlgorithmError("Jennrich failed after retries: " + last_problem);
}

SosProgram build_round_program(const MomentSequence& ms, const MultiPoly& f, const ExtraConstraints& extra,
                               const DecompOptions& opts) {
  const int wdeg = opts.w_degree < 0 ? ms.d - 2 : opts.w_degree;
  SosProgram prog = build_v_program(ms, f, wdeg, extra.vanishing);
  for (const auto& dc : extra.distinct) add_distinct_recovery_constraint(prog, dc.center, dc.delta, dc.w_max);
  if (opts.complexity_cap) add_complexity_cap(prog, opts.cap_lambda_min, opts.cap_c_max);
  return prog;
}

VStepResult v_step(const MomentSequence& ms, const MultiPoly& f, const ExtraConstraints& extra,
                   const DecompOptions& opts, bool sphere_mode) {
  const SosProgram prog = build_round_program(ms, f, extra, opts);
  VStepResult out;
  out.sdp = solve(compile(prog), opts.tol);
  out.w_star = extract_solution(out.sdp, prog, opts.tol.tol_psd).at("W");
  out.objective = out.sdp.objective;
  const int d = ms.d;
  const MultiPoly s = ms.sum(0, d);
  out.m = quadratic_form_matrix(contract(out.w_star.with_max_degree(d - 2), s, d));
  const auto eig = sym_eig(out.m);
  // Top eigenvalue in the algebraic sense; M is PSD up to solver noise.
  Eigen::Index top = 0;
  for (Eigen::Index i = 1; i < eig.values.size(); ++i)
    if (eig.values[i] > eig.values[top]) top = i;
  out.mu = eig.values[top];
  out.mu2 = -std::numeric_limits<double>::infinity();
  for (Eigen::Index i = 0; i < eig.values.size(); ++i)
    if (i != top) out.mu2 = std::max(out.mu2, eig.values[i]);
  if (eig.values.size() == 1) out.mu2 = 0.0;
  if (!(out.mu > 0.0)) throw AlgorithmError("degenerate matrix: no positive eigenvalue");
  out.u = eig.vectors.col(top);
  const Vec l = linear_coefficients(contract(out.w_star.with_max_degree(d - 1), s, d));
  if (out.u.dot(l) < 0.0) out.u = -out.u;
  out.c = sphere_mode ? out.u : Vec(std::sqrt(out.mu) * out.u);
  out.rho = 1.0 / poly_eval(out.w_star, out.c);
  return out;
}

namespace {

void record_round(DecompositionResult& res, const VStepResult& st, int round, Discriminator kind, const Vec& v) {
  RoundDiagnostics d;
  d.round = round;
  d.objective = st.objective;
  d.eig1 = st.mu;
  d.eig2 = st.mu2;
  d.rho_untrusted = st.rho;
  d.discriminator = to_string(kind);
  d.solver_status = to_string(st.sdp.status);
  d.solver_iterations = st.sdp.iterations;
  d.v = v;
  d.w_star = st.w_star;
  res.rounds.push_back(std::move(d));
  res.solver_iterations_total += st.sdp.iterations;
}

bool round_feasible(const MomentSequence& ms, const MultiPoly& f, const ExtraConstraints& extra, const DecompOptions& opts) {
  return check_feasible(compile(build_round_program(ms, f, extra, opts)), opts.tol).feasible;
}

}  // namespace

DecompositionResult v_decompose_moments(const MomentSequence& ms, const DecompOptions& opts) {
  if (ms.d % 2 != 0) throw DomainError("moment decomposition needs even d");
  const Discriminator kind = opts.discriminator.value_or(Discriminator::random_v_linear);
  std::mt19937_64 rng(opts.seed);
  DecompositionResult res;
  ExtraConstraints extra;
  for (int round = 1;; ++round) {
    if (round > opts.max_rounds) {
      res.warnings.push_back("max_rounds reached before the program became infeasible");
      break;
    }
    const Vec v = random_unit_vector(ms.n, rng);
    const MultiPoly f = make_discriminator(kind, v, opts);
    if (!round_feasible(ms, f, extra, opts)) {
      res.stopped_by_infeasibility = true;
      break;
    }
    VStepResult st;
    try {
      st = v_step(ms, f, extra, opts, false);
    } catch (const AlgorithmError& e) {
      res.warnings.push_back(std::string("round ") + std::to_string(round) + ": " + e.what());
      break;
    }
    record_round(res, st, round, kind, v);
    res.components.push_back(st.c);
    extra.vanishing.push_back(st.c);
  }
  if (!res.components.empty()) {
    auto ls = least_squares_weights(ms, res.components);
    res.weights.assign(ls.weights.data(), ls.weights.data() + ls.weights.size());
    res.warnings.insert(res.warnings.end(), ls.warnings.begin(), ls.warnings.end());
  }
  return res;
}

DecompositionResult v_decompose_tensor(const HomPoly& t, const DecompOptions& opts) {
  const int d = t.degree();
  if (d % 2 != 0) throw DomainError("tensor variant needs even d");
  const int n = t.n();
  const Discriminator kind = opts.discriminator.value_or(Discriminator::random_v_linear);
  std::mt19937_64 rng(opts.seed);
  DecompositionResult res;
  std::vector<Vec> raw;
  for (int round = 1;; ++round) {
    if (round > opts.max_rounds) {
      res.warnings.push_back("max_rounds reached before the program became infeasible");
      break;
    }
    // Fresh w per round; reject directions nearly orthogonal to a recovered component.
    Vec w;
    bool ok = false;
    for (int tries = 0; tries < 20 && !ok; ++tries) {
      w = random_unit_vector(n, rng);
      ok = true;
      for (const auto& c : raw)
        if (std::abs(c.dot(w)) < 1e-3 * c.norm()) ok = false;
    }
    if (!ok) throw AlgorithmError("could not find a direction w with nonvanishing <c_i, w>");
    Vec v = random_unit_vector(n, rng);
    v -= v.dot(w) * w;
    v.normalize();
    const MomentSequence ms = fake_moments_directional(t, w);
    ExtraConstraints extra;
    for (const auto& c : raw) extra.vanishing.push_back(c / c.dot(w));
    const MultiPoly f = make_discriminator(kind, v, opts);
    if (!round_feasible(ms, f, extra, opts)) {
      res.stopped_by_infeasibility = true;
      break;
    }
    VStepResult st;
    try {
      st = v_step(ms, f, extra, opts, false);
    } catch (const AlgorithmError& e) {
      res.warnings.push_back(std::string("round ") + std::to_string(round) + ": " + e.what());
      break;
    }
    record_round(res, st, round, kind, v);
    const double lambda = st.rho;
    if (!(lambda > 0.0)) {
      res.warnings.push_back("nonpositive recovered fake weight in round " + std::to_string(round));
      break;
    }
    raw.push_back(std::pow(lambda, 1.0 / d) * st.c);
  }
  if (raw.empty()) return res;
  // Refit lengths on the normalized directions; per-round 1/W*(b) is only a first guess.
  std::vector<Vec> dirs;
  for (const auto& c : raw) dirs.push_back(c.normalized());
  auto ls = least_squares_weights(t, dirs);
  res.warnings.insert(res.warnings.end(), ls.warnings.begin(), ls.warnings.end());
  for (std::size_t i = 0; i < dirs.size(); ++i) {
    const double rho = ls.weights[static_cast<Eigen::Index>(i)];
    res.components.push_back(rho > 0.0 ? Vec(std::pow(rho, 1.0 / d) * dirs[i]) : raw[i]);
    res.weights.push_back(1.0);
  }
  return res;
}

SampleResult sample_discriminator(const MultiPoly& s, double threshold, std::mt19937_64& rng, long max_attempts) {
  // Flattened raw coefficients plus a power table: this loop can run millions of times.
  const int n = s.n();
  const int deg = s.max_degree();
  std::vector<double> coef;
  std::vector<int> expo;
  for (const auto& [alpha, c] : s.terms()) {
    coef.push_back(binom_d(alpha) * c);
    for (int i = 0; i < n; ++i) expo.push_back(alpha[i]);
  }
  Mat pw(n, deg + 1);
  SampleResult out;
  double best = -std::numeric_limits<double>::infinity();
  for (long k = 1; k <= max_attempts; ++k) {
    const Vec v = random_unit_vector(n, rng);
    for (int i = 0; i < n; ++i) {
      pw(i, 0) = 1.0;
      for (int e = 1; e <= deg; ++e) pw(i, e) = pw(i, e - 1) * v[i];
    }
    double val = 0.0;
    for (std::size_t t = 0; t < coef.size(); ++t) {
      double term = coef[t];
      const int* a = &expo[t * static_cast<std::size_t>(n)];
      for (int i = 0; i < n; ++i) term *= pw(i, a[i]);
      val += term;
    }
    if (val >= threshold) {
      out.v = v;
      out.attempts = k;
      return out;
    }
    best = std::max(best, val);
  }
  throw AlgorithmError("discriminator sampling exhausted " + std::to_string(max_attempts) +
                       " attempts; best value " + std::to_string(best) + " below threshold " + std::to_string(threshold));
}

SampleResult sample_discriminator(const MultiPoly& s, double threshold, std::uint64_t seed, long max_attempts) {
  std::mt19937_64 rng(seed);
  return sample_discriminator(s, threshold, rng, max_attempts);
}

UsefulConstraintsReport check_useful_constraints(int d, int m, double rho_min, double lambda_min, double t0) {
  if (d % 4 != 2) throw DomainError("useful constraints need d = 2 mod 4");
  if (!(rho_min > 0.0 && rho_min <= 1.0)) throw DomainError("rho_min must lie in (0, 1]");
  if (!(lambda_min > 0.0 && lambda_min <= t0)) throw DomainError("need 0 < lambda_min <= T0");
  UsefulConstraintsReport r;
  const auto F = [](double x) { return 1.0 - std::sqrt(std::max(0.0, 1.0 - x)); };
  r.r = 0.999 * std::pow(lambda_min / t0, 2.0 / d);
  r.rho = 0.5 * (1.0 - std::sqrt(1.0 - rho_min));
  r.B = 0.5 * (cheb_eval((d - 2) / 2, (8.0 + 2.0 * r.rho) / (8.0 - r.rho)) + 1.0);
  r.eps_tilde = 16.0 * t0 / (rho_min * r.B * lambda_min);
  r.w_max = 1.0 / (r.B * lambda_min);
  r.c1_lhs = 0.25 * rho_min;
  r.c1_rhs = 2.0 * (1.0 - r.r);
  r.c1 = r.c1_lhs >= r.c1_rhs;
  r.c2_lhs = r.rho;
  r.c2_rhs = r.eps_tilde <= 1.0 ? 4.0 * F(r.eps_tilde) : std::numeric_limits<double>::infinity();
  r.c2 = r.c2_lhs >= r.c2_rhs;
  r.c3_lhs = 0.25 * rho_min;
  r.c3_rhs = r.eps_tilde <= 1.0 ? 4.0 * m * std::sqrt(2.0 - 2.0 * std::pow(1.0 - r.eps_tilde, d / 2.0))
                                : std::numeric_limits<double>::infinity();
  r.c3 = r.c3_lhs >= r.c3_rhs;
  return r;
}

DecompositionResult v_decompose_sphere(const MomentSequence& ms, double lambda_min, double rho_min,
                                       const DecompOptions& opts) {
  const int d = ms.d;
  const double t0 = ms.total_mass();
  const Discriminator kind = opts.discriminator.value_or(Discriminator::random_v_squared);
  DecompositionResult res;
  const int m_bound = std::max(1, static_cast<int>(std::floor(t0 / lambda_min + 1e-9)));
  const auto uc = check_useful_constraints(d, m_bound, rho_min, lambda_min, t0);
  if (!uc.all()) res.warnings.push_back("useful constraints not satisfied; recovery guarantees do not apply");
  // eps_tilde above 1 makes the ball radius and threshold formulas leave their domain.
  const double eps = std::min(uc.eps_tilde, 1.0);
  const double half_d = d / 2.0;
  const double delta = 2.0 - 2.0 * std::sqrt(1.0 - eps);
  const double step_box = 4.0 * std::sqrt(std::max(0.0, 1.0 - std::pow(1.0 - eps, half_d)));
  const double step_text = 2.0 * std::sqrt(std::max(0.0, 2.0 - 2.0 * std::pow(1.0 - eps, half_d)));

  std::mt19937_64 rng(opts.seed);
  MultiPoly s = ms.at(d).poly();
  ExtraConstraints extra;
  for (int round = 1;; ++round) {
    if (round > opts.max_rounds) {
      res.warnings.push_back("max_rounds reached before the program became infeasible");
      break;
    }
    // A measure with smallest weight lambda_min has at most T0 / lambda_min atoms.
    if (round > m_bound) {
      res.warnings.push_back("stopped after floor(T0 / lambda_min) = " + std::to_string(m_bound) + " rounds");
      break;
    }
    const double thr_box = uc.r - (round - 1) * step_box;
    const double thr_text = uc.r - (round - 1) * step_text;
    SampleResult sample;
    try {
      sample = sample_discriminator(s, thr_box, rng, opts.max_sample_attempts);
    } catch (const AlgorithmError& e) {
      res.warnings.push_back(e.what());
      break;
    }
    const MultiPoly f = make_discriminator(kind, sample.v, opts);
    if (!round_feasible(ms, f, extra, opts)) {
      res.stopped_by_infeasibility = true;
      break;
    }
    VStepResult st;
    try {
      st = v_step(ms, f, extra, opts, true);
    } catch (const AlgorithmError& e) {
      res.warnings.push_back(std::string("round ") + std::to_string(round) + ": " + e.what());
      break;
    }
    record_round(res, st, round, kind, sample.v);
    res.rounds.back().threshold_box = thr_box;
    res.rounds.back().threshold_text = thr_text;
    res.rounds.back().sample_attempts = sample.attempts;
    res.components.push_back(st.u);
    extra.distinct.push_back({st.u, delta, uc.w_max});
    s -= pow_linear_form(st.u, d).poly();
  }
  if (!res.components.empty()) {
    auto ls = least_squares_weights(ms.at(d), res.components);
    res.weights.assign(ls.weights.data(), ls.weights.data() + ls.weights.size());
    res.warnings.insert(res.warnings.end(), ls.warnings.begin(), ls.warnings.end());
  }
  return res;
}

}  // namespace sosdec
