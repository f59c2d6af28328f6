#pragma once

#include <cstdint>
#include <optional>
#include <random>
#include <string>
#include <vector>

#include <json.hpp>

#include "sosdec/moments.hpp"
#include "sosdec/poly.hpp"
#include "sosdec/sdp.hpp"
#include "sosdec/sosprog.hpp"

namespace sosdec {

enum class Discriminator { random_v_linear, random_v_squared, norm_squared, custom };
std::string to_string(Discriminator d);
Discriminator discriminator_from_string(const std::string& s);

struct DecompOptions {
  int w_degree = -1;  // -1 means d - 2
  std::optional<Discriminator> discriminator;  // default depends on the algorithm
  std::optional<MultiPoly> custom_f;
  int max_rounds = 64;
  std::uint64_t seed = 1;
  ToleranceConfig tol;
  bool complexity_cap = false;
  double cap_lambda_min = 0.0;
  double cap_c_max = 0.0;
  double interval_delta = 0.1;
  bool tight_interval = false;
  long max_sample_attempts = 2'000'000;
};

struct RoundDiagnostics {
  int round = 0;
  double objective = 0.0;
  double eig1 = 0.0;
  double eig2 = 0.0;
  double rho_untrusted = 0.0;  // 1 / W*(c)
  std::string discriminator;
  std::string solver_status;
  int solver_iterations = 0;
  Vec v;
  double threshold_box = 0.0;
  double threshold_text = 0.0;
  long sample_attempts = 0;
  std::optional<double> off_component_mass;
  MultiPoly w_star;
};

struct DecompositionResult {
  std::vector<Vec> components;
  std::vector<double> weights;
  std::vector<RoundDiagnostics> rounds;
  std::vector<std::string> warnings;
  bool stopped_by_infeasibility = false;
  int solver_iterations_total = 0;
};

nlohmann::json to_json(const DecompositionResult& r);

Vec random_unit_vector(int n, std::mt19937_64& rng);

std::vector<Vec> jennrich(const HomPoly& t3, std::uint64_t seed = 1);

struct VStepResult {
  MultiPoly w_star;
  Mat m;
  double mu = 0.0;
  double mu2 = 0.0;
  Vec u;
  Vec c;
  double rho = 0.0;
  double objective = 0.0;
  SdpSolution sdp;
};

struct ExtraConstraints {
  std::vector<Vec> vanishing;
  struct Distinct {
    Vec center;
    double delta = 0.0;
    double w_max = 0.0;
  };
  std::vector<Distinct> distinct;
};

SosProgram build_round_program(const MomentSequence& ms, const MultiPoly& f, const ExtraConstraints& extra,
                               const DecompOptions& opts);
// Throws AlgorithmError when the solver fails or M has no positive eigenvalue.
VStepResult v_step(const MomentSequence& ms, const MultiPoly& f, const ExtraConstraints& extra,
                   const DecompOptions& opts, bool sphere_mode);

DecompositionResult v_decompose_moments(const MomentSequence& ms, const DecompOptions& opts);
DecompositionResult v_decompose_tensor(const HomPoly& t, const DecompOptions& opts);

struct SampleResult {
  Vec v;
  long attempts = 0;
};
SampleResult sample_discriminator(const MultiPoly& s, double threshold, std::mt19937_64& rng, long max_attempts);
SampleResult sample_discriminator(const MultiPoly& s, double threshold, std::uint64_t seed, long max_attempts);

struct UsefulConstraintsReport {
  double r = 0.0;
  double rho = 0.0;
  double B = 0.0;
  double eps_tilde = 0.0;
  double w_max = 0.0;
  bool c1 = false, c2 = false, c3 = false;
  double c1_lhs = 0.0, c1_rhs = 0.0;
  double c2_lhs = 0.0, c2_rhs = 0.0;
  double c3_lhs = 0.0, c3_rhs = 0.0;
  bool all() const { return c1 && c2 && c3; }
};

UsefulConstraintsReport check_useful_constraints(int d, int m, double rho_min, double lambda_min, double t0);

DecompositionResult v_decompose_sphere(const MomentSequence& ms, double lambda_min, double rho_min,
                                       const DecompOptions& opts);

}  // namespace sosdec
