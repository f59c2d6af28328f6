#include "sosdec/measures.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <numeric>
#include <set>

namespace sosdec {

double PointMeasure::total_weight() const { return std::accumulate(weights.begin(), weights.end(), 0.0); }

double PointMeasure::min_weight() const {
  return weights.empty() ? 0.0 : *std::min_element(weights.begin(), weights.end());
}

void PointMeasure::validate() const {
  if (nodes.empty()) throw InputError("measure has no nodes");
  if (nodes.size() != weights.size()) throw InputError("weights and nodes differ in length");
  const auto dim = nodes.front().size();
  for (std::size_t i = 0; i < nodes.size(); ++i) {
    if (nodes[i].size() != dim) throw InputError("nodes have inconsistent dimension");
    if (!(weights[i] > 0.0)) throw InputError("weights must be positive");
    for (std::size_t j = 0; j < i; ++j)
      if ((nodes[i] - nodes[j]).norm() == 0.0) throw InputError("coincident nodes");
  }
}

std::vector<std::string> PointMeasure::warnings() const {
  std::vector<std::string> out;
  for (std::size_t i = 0; i < nodes.size(); ++i)
    for (std::size_t j = i + 1; j < nodes.size(); ++j) {
      const double ni = nodes[i].norm(), nj = nodes[j].norm();
      if (ni == 0.0 || nj == 0.0) continue;
      if (nodes[i].dot(nodes[j]) >= ni * nj * (1.0 - 1e-12))
        out.push_back("nodes " + std::to_string(i) + " and " + std::to_string(j) +
                      " are nonnegative multiples of each other");
    }
  return out;
}

HomPoly moment_tensor(const PointMeasure& mu, int k) {
  MultiPoly t(mu.n(), k);
  for (std::size_t i = 0; i < mu.nodes.size(); ++i)
    t += mu.weights[i] * pow_linear_form(mu.nodes[i], k).poly();
  return HomPoly(std::move(t), k);
}

MomentSequence moment_sequence(const PointMeasure& mu, int d) {
  MomentSequence ms(mu.n(), d);
  for (int k = 0; k <= d; ++k) ms.set(k, moment_tensor(mu, k));
  return ms;
}

MomentSequence fake_moments_directional(const HomPoly& t, const Vec& w) {
  if (std::abs(w.norm() - 1.0) > 1e-12) throw DomainError("direction must be a unit vector");
  const int d = t.degree();
  MomentSequence ms(t.n(), d);
  for (int k = 0; k <= d; ++k) ms.set(k, contract(pow_linear_form(w, d - k), t, d));
  return ms;
}

MomentSequence fake_moments_norm_scaled(const HomPoly& t) {
  const int d = t.degree();
  if (d % 2 != 0) throw DomainError("norm-scaled fake moments need even degree");
  const int n = t.n();
  MultiPoly sq(n, 2);
  for (int i = 0; i < n; ++i) sq.set(MultiIndex::unit(n, i, 2), 1.0);
  MomentSequence ms(n, d);
  MultiPoly q = MultiPoly::constant(n, 1.0);
  for (int k = d; k >= 0; k -= 2) {
    ms.set(k, contract(q, t, d));
    q = poly_mul(q, sq);
  }
  return ms;
}

double spec_rank2_difference(const Vec& a, const Vec& b) {
  const double na = a.squaredNorm(), nb = b.squaredNorm(), ab = a.dot(b);
  const double t = na - nb;
  const double p = -(na * nb - ab * ab);
  const double disc = std::sqrt(std::max(0.0, t * t - 4.0 * p));
  return std::max(std::abs((t + disc) / 2.0), std::abs((t - disc) / 2.0));
}

double sq_correlation_distance(const Vec& a, const Vec& b) {
  const double na = a.squaredNorm(), nb = b.squaredNorm();
  if (na == 0.0 || nb == 0.0) throw DomainError("correlation undefined for a zero vector");
  const double c = a.dot(b);
  return std::max(0.0, 1.0 - c * c / (na * nb));
}

ConditionReport condition_report(const std::vector<Vec>& nodes) {
  if (nodes.size() < 2) throw DomainError("condition report needs at least two nodes");
  for (const auto& v : nodes)
    if (v.norm() == 0.0) throw DomainError("zero node makes correlation metrics undefined");
  ConditionReport r;
  r.kappa_min = std::numeric_limits<double>::infinity();
  r.rho_min_sq_corr = std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < nodes.size(); ++i)
    for (std::size_t j = i + 1; j < nodes.size(); ++j) {
      const double k = (nodes[i] - nodes[j]).squaredNorm();
      r.kappa_min = std::min(r.kappa_min, k);
      r.kappa_max = std::max(r.kappa_max, k);
      r.rho_spec = std::max(r.rho_spec, spec_rank2_difference(nodes[i], nodes[j]));
      const double cosv = nodes[i].dot(nodes[j]) / (nodes[i].norm() * nodes[j].norm());
      r.rho_lin = std::max(r.rho_lin, 1.0 - cosv);
      r.rho_min_sq_corr = std::min(r.rho_min_sq_corr, sq_correlation_distance(nodes[i], nodes[j]));
    }
  return r;
}

namespace {

// Kuhn's augmenting-path matching restricted to edges with cost <= eps;
// true when every column (element of the smaller set) is matched.
bool saturates_small_side(const Mat& cost, double eps) {
  const auto rows = cost.rows(), cols = cost.cols();
  std::vector<Eigen::Index> match_row(static_cast<std::size_t>(rows), -1);
  std::function<bool(Eigen::Index, std::vector<bool>&)> augment = [&](Eigen::Index c, std::vector<bool>& seen) {
    for (Eigen::Index r = 0; r < rows; ++r) {
      if (cost(r, c) > eps || seen[static_cast<std::size_t>(r)]) continue;
      seen[static_cast<std::size_t>(r)] = true;
      if (match_row[static_cast<std::size_t>(r)] < 0 || augment(match_row[static_cast<std::size_t>(r)], seen)) {
        match_row[static_cast<std::size_t>(r)] = c;
        return true;
      }
    }
    return false;
  };
  for (Eigen::Index c = 0; c < cols; ++c) {
    std::vector<bool> seen(static_cast<std::size_t>(rows), false);
    if (!augment(c, seen)) return false;
  }
  return true;
}

double bottleneck_by_permutation(const Mat& cost) {
  std::vector<int> perm(static_cast<std::size_t>(cost.rows()));
  std::iota(perm.begin(), perm.end(), 0);
  double best = std::numeric_limits<double>::infinity();
  do {
    double worst = 0.0;
    for (std::size_t i = 0; i < perm.size(); ++i) worst = std::max(worst, cost(static_cast<Eigen::Index>(i), perm[i]));
    best = std::min(best, worst);
  } while (std::next_permutation(perm.begin(), perm.end()));
  return best;
}

}  // namespace

double hausdorff_distance(const std::vector<Vec>& a, const std::vector<Vec>& b, bool mod_sign) {
  if (a.empty() || b.empty()) throw DomainError("Hausdorff distance needs nonempty sets");
  const auto& big = a.size() >= b.size() ? a : b;
  const auto& small = a.size() >= b.size() ? b : a;
  Mat cost(static_cast<Eigen::Index>(big.size()), static_cast<Eigen::Index>(small.size()));
  for (std::size_t i = 0; i < big.size(); ++i)
    for (std::size_t j = 0; j < small.size(); ++j) {
      if (big[i].size() != small[j].size()) throw DimensionError("Hausdorff sets differ in dimension");
      double c = (big[i] - small[j]).norm();
      if (mod_sign) c = std::min(c, (big[i] + small[j]).norm());
      cost(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = c;
    }
  if (big.size() == small.size() && big.size() <= 8) return bottleneck_by_permutation(cost);

  // Surjection: every row needs some column and the columns must be covered by a matching.
  double lower = 0.0;
  for (Eigen::Index r = 0; r < cost.rows(); ++r) lower = std::max(lower, cost.row(r).minCoeff());
  std::vector<double> cand(cost.data(), cost.data() + cost.size());
  std::sort(cand.begin(), cand.end());
  cand.erase(std::unique(cand.begin(), cand.end()), cand.end());
  auto first = std::lower_bound(cand.begin(), cand.end(), lower);
  std::size_t lo = static_cast<std::size_t>(first - cand.begin()), hi = cand.size() - 1;
  while (lo < hi) {
    const std::size_t mid = (lo + hi) / 2;
    if (saturates_small_side(cost, cand[mid])) hi = mid;
    else lo = mid + 1;
  }
  return cand[lo];
}

double backward_error(const HomPoly& t, const std::vector<Vec>& comps,
                      const std::optional<std::vector<double>>& weights) {
  if (weights && weights->size() != comps.size()) throw DimensionError("weights and components differ in length");
  MultiPoly r = t.poly();
  for (std::size_t i = 0; i < comps.size(); ++i) {
    const double w = weights ? (*weights)[i] : 1.0;
    r -= w * pow_linear_form(comps[i], t.degree()).poly();
  }
  return frobenius_norm(r);
}

nlohmann::json to_json(const PointMeasure& mu) {
  nlohmann::json nodes = nlohmann::json::array();
  for (const auto& v : mu.nodes) nodes.push_back(std::vector<double>(v.data(), v.data() + v.size()));
  return {{"n", mu.n()}, {"m", mu.m()}, {"weights", mu.weights}, {"nodes", nodes}};
}

PointMeasure measure_from_json(const nlohmann::json& j) {
  PointMeasure mu;
  try {
    const int n = j.at("n").get<int>();
    const int m = j.at("m").get<int>();
    mu.weights = j.at("weights").get<std::vector<double>>();
    for (const auto& node : j.at("nodes")) {
      auto v = node.get<std::vector<double>>();
      if (static_cast<int>(v.size()) != n) throw InputError("node dimension differs from n");
      mu.nodes.push_back(Eigen::Map<Vec>(v.data(), static_cast<Eigen::Index>(v.size())));
    }
    if (static_cast<int>(mu.nodes.size()) != m) throw InputError("node count differs from m");
  } catch (const nlohmann::json::exception& e) {
    throw InputError(std::string("malformed instance JSON: ") + e.what());
  }
  mu.validate();
  return mu;
}

nlohmann::json to_json(const MomentSequence& ms) {
  nlohmann::json out = nlohmann::json::object();
  for (int k = 0; k <= ms.d; ++k)
    if (ms.has(k)) out[std::to_string(k)] = to_json(ms.at(k).poly());
  return out;
}

MomentSequence moments_from_json(const nlohmann::json& j) {
  int d = -1, n = 0;
  for (const auto& [key, val] : j.items()) {
    d = std::max(d, std::stoi(key));
    n = val.at("n").get<int>();
  }
  if (d < 0) throw InputError("empty moment sequence");
  MomentSequence ms(n, d);
  for (const auto& [key, val] : j.items()) {
    const int k = std::stoi(key);
    ms.set(k, HomPoly(poly_from_json(val), k));
  }
  return ms;
}

}  // namespace sosdec
