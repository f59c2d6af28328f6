#pragma once

#include <optional>
#include <vector>

#include <json.hpp>

#include "sosdec/moments.hpp"
#include "sosdec/poly.hpp"

namespace sosdec {

struct ConditionReport {
  double kappa_min = 0.0;
  double kappa_max = 0.0;
  double rho_spec = 0.0;
  double rho_lin = 0.0;
  double rho_min_sq_corr = 0.0;
};

HomPoly moment_tensor(const PointMeasure& mu, int k);
MomentSequence moment_sequence(const PointMeasure& mu, int d);

MomentSequence fake_moments_directional(const HomPoly& t, const Vec& w);
MomentSequence fake_moments_norm_scaled(const HomPoly& t);

// Largest |eigenvalue| of aa^T - bb^T from its rank-2 characteristic polynomial.
double spec_rank2_difference(const Vec& a, const Vec& b);
// 1 - <a,b>^2 / (|a|^2 |b|^2)
double sq_correlation_distance(const Vec& a, const Vec& b);

ConditionReport condition_report(const std::vector<Vec>& nodes);

double hausdorff_distance(const std::vector<Vec>& a, const std::vector<Vec>& b, bool mod_sign);

double backward_error(const HomPoly& t, const std::vector<Vec>& comps,
                      const std::optional<std::vector<double>>& weights = std::nullopt);

nlohmann::json to_json(const PointMeasure& mu);
PointMeasure measure_from_json(const nlohmann::json& j);
nlohmann::json to_json(const MomentSequence& ms);
MomentSequence moments_from_json(const nlohmann::json& j);

}  // namespace sosdec
