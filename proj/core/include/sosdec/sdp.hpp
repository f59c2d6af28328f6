#pragma once

#include <string>
#include <vector>

#include <json.hpp>

#include "sosdec/poly.hpp"

namespace sosdec {

// Entry (i, j, v) with i <= j stands for A_ij = A_ji = v.
struct SymEntry {
  int i = 0;
  int j = 0;
  double v = 0.0;
};

struct BlockPart {
  int block = 0;
  std::vector<SymEntry> entries;
};

struct ScalarPart {
  int index = 0;
  double v = 0.0;
};

// sum_b <A_rb, X_b> + sum_s a_rs x_s = rhs
struct SdpRow {
  std::vector<BlockPart> blocks;
  std::vector<ScalarPart> scalars;
  double rhs = 0.0;
};

// maximize sum_b <C_b, X_b> + c_s . x_s  s.t. rows, X_b PSD, x_s >= 0.
struct SdpProblem {
  std::vector<int> block_sizes;
  std::vector<Mat> objective;  // one dense symmetric C_b per block
  int num_scalars = 0;
  Vec scalar_objective;
  std::vector<SdpRow> rows;

  int add_block(int size);
  int add_scalar(double objective_coeff = 0.0);
  void validate() const;
  nlohmann::json debug_dump() const;
};

struct ToleranceConfig {
  double tol_feas = 1e-8;
  double tol_gap = 1e-8;
  double tol_psd = 1e-7;
  int max_iter = 200;
  double phase1_tol = 1e-6;
  double phase1_trace_bound = 1e6;
  bool verbose = false;
};

ToleranceConfig tolerance_from_json(const nlohmann::json& j);

enum class SdpStatus { optimal, infeasible, unbounded, max_iter };
std::string to_string(SdpStatus s);

struct SdpSolution {
  SdpStatus status = SdpStatus::max_iter;
  std::vector<Mat> x;
  Vec scalars;
  Vec y;
  double objective = 0.0;       // primal, maximization sense
  double dual_objective = 0.0;  // upper bound on the maximum
  double primal_residual = 0.0;
  double dual_residual = 0.0;
  double gap = 0.0;
  int iterations = 0;
  std::string message;
};

SdpSolution solve(const SdpProblem& sdp, const ToleranceConfig& tol = {});

struct FeasibilityResult {
  bool feasible = false;
  double margin = 0.0;  // optimal phase-I residual sum
  std::vector<Mat> x;
  Vec scalars;
};

FeasibilityResult check_feasible(const SdpProblem& sdp, const ToleranceConfig& tol = {});

}  // namespace sosdec
