#pragma once

#include <cstdint>
#include <optional>
#include <random>
#include <string>
#include <vector>

#include <json.hpp>

#include "sosdec/decompose.hpp"
#include "sosdec/moments.hpp"

namespace sosdec::cli {

enum class Algo { jennrich, v_exact, v_tensor, v_sphere };
enum class MomentsMode { truth, directional, norm_scaled };

std::string to_string(Algo a);
std::string to_string(MomentsMode m);
Algo algo_from_string(const std::string& s);
MomentsMode moments_mode_from_string(const std::string& s);

struct GeneratorSpec {
  std::string kind = "random_sphere";  // random_sphere, orthonormal, simplex, hypercube, custom
  int n = 3;
  int m = 2;
  double weight_min = 1.0;
  double weight_max = 1.0;
  std::optional<PointMeasure> custom;
};

struct RunConfig {
  std::string command;
  std::optional<std::string> instance_path;
  GeneratorSpec generator;
  int d = 4;
  Algo algo = Algo::v_exact;
  std::optional<MomentsMode> moments_mode;  // default: norm_scaled for v_sphere, truth otherwise
  std::uint64_t seed = 1;
  DecompOptions options;
  std::optional<double> lambda_min;  // sphere mode; defaults to the instance's smallest weight
  double rho_min = 0.5;
  std::string out;
  bool write_moments = false;
  std::vector<int> sweep_d;
  std::vector<int> sweep_m;
};

// Throws InputError on unknown keys' values or inconsistent generator parameters.
RunConfig config_from_json(const nlohmann::json& j);
void validate_generator(const GeneratorSpec& g);

PointMeasure generate_instance(const GeneratorSpec& g, std::mt19937_64& rng);
PointMeasure read_instance(const std::string& path);

struct CsvRow {
  std::uint64_t seed = 0;
  int n = 0, m = 0, d = 0;
  std::string algo;
  double forward_err = 0.0;
  double backward_err = 0.0;
  int rounds = 0;
  double wall_ms = 0.0;
  int solver_iters_total = 0;
};

std::string csv_header();
std::string to_csv(const CsvRow& r);

struct RunOutcome {
  CsvRow row;
  nlohmann::json result;
};

// Runs the configured algorithm on mu, drawing any randomness from rng. Ground truth
// comes from mu, transformed to match what the chosen moments actually encode.
RunOutcome run_instance(const PointMeasure& mu, const RunConfig& cfg, std::mt19937_64& rng);

// generate + run from a single generator seeded with cfg.seed (or the instance file).
RunOutcome run_config(const RunConfig& cfg);

struct SweepRow {
  CsvRow row;
  double B = 0.0;
  double eps_tilde = 0.0;
  std::string status;  // "ok" or the failure message
};

std::string sweep_header();
std::string to_csv(const SweepRow& r);

// Sweeps d (fixed instance) or m (one instance per m). Failures stay in their row.
std::vector<SweepRow> sweep(const RunConfig& cfg);

// Whole command-line program; returns the process exit code.
int run_main(int argc, char** argv);

}  // namespace sosdec::cli
