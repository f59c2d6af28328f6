#include "sosdec_cli/app.hpp"

#include <chrono>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <limits>
#include <sstream>

#include <CLI11.hpp>

#include "sosdec/errors.hpp"
#include "sosdec/measures.hpp"

namespace sosdec::cli {

using nlohmann::json;

std::string to_string(Algo a) {
  switch (a) {
    case Algo::jennrich: return "jennrich";
    case Algo::v_exact: return "v_exact";
    case Algo::v_tensor: return "v_tensor";
    case Algo::v_sphere: return "v_sphere";
  }
  return "?";
}

std::string to_string(MomentsMode m) {
  switch (m) {
    case MomentsMode::truth: return "true";
    case MomentsMode::directional: return "directional";
    case MomentsMode::norm_scaled: return "norm_scaled";
  }
  return "?";
}

Algo algo_from_string(const std::string& s) {
  if (s == "jennrich") return Algo::jennrich;
  if (s == "v_exact") return Algo::v_exact;
  if (s == "v_tensor") return Algo::v_tensor;
  if (s == "v_sphere") return Algo::v_sphere;
  throw InputError("unknown algorithm '" + s + "'");
}

MomentsMode moments_mode_from_string(const std::string& s) {
  if (s == "true") return MomentsMode::truth;
  if (s == "directional") return MomentsMode::directional;
  if (s == "norm_scaled") return MomentsMode::norm_scaled;
  throw InputError("unknown moments mode '" + s + "'");
}

void validate_generator(const GeneratorSpec& g) {
  if (g.kind == "custom") {
    if (!g.custom) throw InputError("custom generator needs nodes and weights");
    g.custom->validate();
    return;
  }
  if (g.n < 1 || g.m < 1) throw InputError("generator needs n >= 1 and m >= 1");
  if (!(g.weight_min > 0.0) || g.weight_max < g.weight_min) throw InputError("weight range must satisfy 0 < min <= max");
  if (g.kind == "random_sphere") return;
  if (g.kind == "orthonormal") {
    if (g.m > g.n) throw InputError("orthonormal generator needs m <= n");
  } else if (g.kind == "simplex") {
    if (g.m > g.n + 1) throw InputError("simplex generator needs m <= n + 1");
    if (g.m < 2) throw InputError("simplex generator needs m >= 2");
  } else if (g.kind == "hypercube") {
    if (g.n >= 63 || g.m > (1LL << g.n)) throw InputError("hypercube generator needs m <= 2^n");
  } else {
    throw InputError("unknown generator '" + g.kind + "'");
  }
}

namespace {

template <class T>
void read_opt(const json& j, const char* key, T& dst) {
  if (j.contains(key)) dst = j.at(key).get<T>();
}

DecompOptions options_from_json(const json& j, DecompOptions o) {
  read_opt(j, "w_degree", o.w_degree);
  read_opt(j, "max_rounds", o.max_rounds);
  read_opt(j, "complexity_cap", o.complexity_cap);
  read_opt(j, "cap_lambda_min", o.cap_lambda_min);
  read_opt(j, "cap_c_max", o.cap_c_max);
  read_opt(j, "interval_delta", o.interval_delta);
  read_opt(j, "tight_interval", o.tight_interval);
  read_opt(j, "max_sample_attempts", o.max_sample_attempts);
  if (j.contains("discriminator")) {
    try {
      o.discriminator = discriminator_from_string(j.at("discriminator").get<std::string>());
    } catch (const std::invalid_argument& e) {
      throw InputError(e.what());
    }
  }
  if (j.contains("custom_f")) o.custom_f = poly_from_json(j.at("custom_f"));
  if (j.contains("solver")) o.tol = tolerance_from_json(j.at("solver"));
  return o;
}

std::vector<int> int_list(const json& j) {
  if (j.is_number_integer()) return {j.get<int>()};
  return j.get<std::vector<int>>();
}

double now_ms() {
  return std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now().time_since_epoch()).count();
}

std::string fmt(double v) {
  if (std::isnan(v)) return "nan";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  std::ostringstream os;
  os << std::setprecision(6) << v;
  return os.str();
}

void write_file(const std::string& path, const std::string& text) {
  std::ofstream f(path);
  if (!f) throw InputError("cannot write " + path);
  f << text;
  if (!f) throw InputError("write failed for " + path);
}

}  // namespace

RunConfig config_from_json(const json& j) {
  RunConfig c;
  try {
    read_opt(j, "command", c.command);
    if (j.contains("instance")) c.instance_path = j.at("instance").get<std::string>();
    if (j.contains("generator")) {
      const json& g = j.at("generator");
      read_opt(g, "kind", c.generator.kind);
      read_opt(g, "n", c.generator.n);
      read_opt(g, "m", c.generator.m);
      if (g.contains("weights")) {
        auto w = g.at("weights").get<std::vector<double>>();
        if (w.size() != 2) throw InputError("generator weights must be [min, max]");
        c.generator.weight_min = w[0];
        c.generator.weight_max = w[1];
      }
      if (c.generator.kind == "custom") c.generator.custom = measure_from_json(g);
    }
    read_opt(j, "d", c.d);
    if (j.contains("algo")) c.algo = algo_from_string(j.at("algo").get<std::string>());
    if (j.contains("moments_mode")) c.moments_mode = moments_mode_from_string(j.at("moments_mode").get<std::string>());
    read_opt(j, "seed", c.seed);
    if (j.contains("options")) c.options = options_from_json(j.at("options"), c.options);
    if (j.contains("lambda_min")) c.lambda_min = j.at("lambda_min").get<double>();
    read_opt(j, "rho_min", c.rho_min);
    read_opt(j, "out", c.out);
    read_opt(j, "write_moments", c.write_moments);
    if (j.contains("sweep")) {
      const json& s = j.at("sweep");
      if (s.contains("d")) c.sweep_d = int_list(s.at("d"));
      if (s.contains("m")) c.sweep_m = int_list(s.at("m"));
    }
  } catch (const json::exception& e) {
    throw InputError(std::string("malformed config: ") + e.what());
  }
  return c;
}

PointMeasure generate_instance(const GeneratorSpec& g, std::mt19937_64& rng) {
  validate_generator(g);
  if (g.kind == "custom") return *g.custom;
  PointMeasure mu;
  const int n = g.n, m = g.m;
  if (g.kind == "random_sphere") {
    for (int i = 0; i < m; ++i) mu.nodes.push_back(random_unit_vector(n, rng));
  } else if (g.kind == "orthonormal") {
    for (int i = 0; i < m; ++i) mu.nodes.push_back(Vec::Unit(n, i));
  } else if (g.kind == "simplex") {
    // e_i minus the centroid lives in an (m-1)-dimensional hyperplane of R^m.
    const Vec centre = Vec::Constant(m, 1.0 / m);
    const Mat shifted = Mat::Identity(m, m) - centre * Vec::Ones(m).transpose();
    const Mat q = Eigen::HouseholderQR<Mat>(shifted).householderQ();
    for (int i = 0; i < m; ++i) {
      Vec x = Vec::Zero(n);
      for (int k = 0; k < m - 1; ++k) x[k] = q.col(k).dot(shifted.col(i));
      mu.nodes.push_back(x.normalized());
    }
  } else {
    // Bit patterns in counting order: no antipodal pair until m exceeds 2^(n-1).
    const double s = 1.0 / std::sqrt(static_cast<double>(n));
    for (int i = 0; i < m; ++i) {
      Vec x(n);
      for (int k = 0; k < n; ++k) x[k] = ((i >> k) & 1) ? -s : s;
      mu.nodes.push_back(x);
    }
  }
  std::uniform_real_distribution<double> wdist(g.weight_min, g.weight_max);
  for (int i = 0; i < m; ++i) mu.weights.push_back(g.weight_min == g.weight_max ? g.weight_min : wdist(rng));
  return mu;
}

PointMeasure read_instance(const std::string& path) {
  std::ifstream f(path);
  if (!f) throw InputError("cannot read instance file " + path);
  json j;
  try {
    f >> j;
  } catch (const json::exception& e) {
    throw InputError("instance file " + path + " is not valid JSON: " + e.what());
  }
  return measure_from_json(j);
}

std::string csv_header() { return "seed,n,m,d,algo,forward_err,backward_err,rounds,wall_ms,solver_iters_total"; }

std::string to_csv(const CsvRow& r) {
  std::ostringstream os;
  os << r.seed << ',' << r.n << ',' << r.m << ',' << r.d << ',' << r.algo << ',' << fmt(r.forward_err) << ','
     << fmt(r.backward_err) << ',' << r.rounds << ',' << fmt(r.wall_ms) << ',' << r.solver_iters_total;
  return os.str();
}

std::string sweep_header() { return csv_header() + ",B,eps_tilde,status"; }

std::string to_csv(const SweepRow& r) {
  std::string status = r.status;
  for (char& ch : status)
    if (ch == ',' || ch == '\n') ch = ';';
  return to_csv(r.row) + ',' + fmt(r.B) + ',' + fmt(r.eps_tilde) + ',' + status;
}

RunOutcome run_instance(const PointMeasure& mu, const RunConfig& cfg, std::mt19937_64& rng) {
  mu.validate();
  const int n = mu.n();
  const int d = cfg.algo == Algo::jennrich ? 3 : cfg.d;
  if (d < 1) throw InputError("degree must be positive");
  const MomentsMode mode = cfg.moments_mode.value_or(cfg.algo == Algo::v_sphere ? MomentsMode::norm_scaled : MomentsMode::truth);
  DecompOptions opts = cfg.options;
  opts.seed = rng();

  const double t_start = now_ms();
  const HomPoly td = moment_tensor(mu, d);
  // What the decomposition should return, in the scaling the algorithm sees.
  std::vector<Vec> truth;
  std::vector<Vec> comps;
  std::optional<std::vector<double>> weights;
  DecompositionResult res;

  auto prepare = [&](MomentsMode md) {
    if (md == MomentsMode::truth) {
      truth = mu.nodes;
      return moment_sequence(mu, d);
    }
    if (md == MomentsMode::directional) {
      Vec w = random_unit_vector(n, rng);
      for (const auto& a : mu.nodes) truth.push_back(a / a.dot(w));
      return fake_moments_directional(td, w);
    }
    for (const auto& a : mu.nodes) truth.push_back(a.normalized());
    return fake_moments_norm_scaled(td);
  };

  switch (cfg.algo) {
    case Algo::jennrich:
      for (int i = 0; i < mu.m(); ++i) truth.push_back(std::cbrt(mu.weights[static_cast<std::size_t>(i)]) * mu.nodes[static_cast<std::size_t>(i)]);
      comps = jennrich(td, opts.seed);
      res.components = comps;
      break;
    case Algo::v_tensor:
      for (int i = 0; i < mu.m(); ++i)
        truth.push_back(std::pow(mu.weights[static_cast<std::size_t>(i)], 1.0 / d) * mu.nodes[static_cast<std::size_t>(i)]);
      res = v_decompose_tensor(td, opts);
      comps = res.components;
      break;
    case Algo::v_exact: {
      const MomentSequence ms = prepare(mode);
      res = v_decompose_moments(ms, opts);
      comps = res.components;
      weights = res.weights;
      break;
    }
    case Algo::v_sphere: {
      const MomentSequence ms = prepare(mode);
      res = v_decompose_sphere(ms, cfg.lambda_min.value_or(mu.min_weight()), cfg.rho_min, opts);
      comps = res.components;
      weights = res.weights;
      break;
    }
  }
  const double wall = now_ms() - t_start;

  const bool mod_sign = d % 2 == 0;
  const double inf = std::numeric_limits<double>::infinity();
  RunOutcome out;
  CsvRow& row = out.row;
  row.seed = cfg.seed;
  row.n = n;
  row.m = mu.m();
  row.d = d;
  row.algo = to_string(cfg.algo);
  row.forward_err = comps.empty() ? inf : hausdorff_distance(truth, comps, mod_sign);
  row.backward_err = backward_error(td, comps, weights && weights->size() == comps.size() ? weights : std::nullopt);
  row.rounds = cfg.algo == Algo::jennrich ? 1 : static_cast<int>(res.rounds.size());
  row.wall_ms = wall;
  row.solver_iters_total = res.solver_iterations_total;

  json truth_j = json::array();
  for (const auto& t : truth) truth_j.push_back(std::vector<double>(t.data(), t.data() + t.size()));
  out.result = {{"seed", cfg.seed},
                {"algo", row.algo},
                {"moments_mode", to_string(mode)},
                {"d", d},
                {"instance", to_json(mu)},
                {"truth_components", truth_j},
                {"decomposition", to_json(res)},
                {"forward_error", row.forward_err},
                {"backward_error", row.backward_err},
                {"wall_ms", wall}};
  return out;
}

RunOutcome run_config(const RunConfig& cfg) {
  std::mt19937_64 rng(cfg.seed);
  const PointMeasure mu = cfg.instance_path ? read_instance(*cfg.instance_path) : generate_instance(cfg.generator, rng);
  return run_instance(mu, cfg, rng);
}

std::vector<SweepRow> sweep(const RunConfig& cfg) {
  if (cfg.sweep_d.empty() == cfg.sweep_m.empty()) throw InputError("sweep needs exactly one nonempty range, over d or over m");
  if (!cfg.sweep_m.empty() && cfg.instance_path) throw InputError("an m sweep needs a generator, not an instance file");
  // Read the instance up front so an unreadable file fails the whole sweep.
  std::optional<PointMeasure> fixed;
  if (cfg.instance_path) fixed = read_instance(*cfg.instance_path);

  const bool over_d = !cfg.sweep_d.empty();
  const auto& values = over_d ? cfg.sweep_d : cfg.sweep_m;
  std::vector<SweepRow> rows;
  for (int v : values) {
    RunConfig point = cfg;
    if (over_d) {
      point.d = v;
    } else {
      point.generator.m = v;
    }
    SweepRow sr;
    sr.row.seed = cfg.seed;
    sr.row.d = point.algo == Algo::jennrich ? 3 : point.d;
    sr.row.algo = to_string(point.algo);
    sr.row.forward_err = sr.row.backward_err = sr.row.wall_ms = std::numeric_limits<double>::quiet_NaN();
    sr.B = sr.eps_tilde = std::numeric_limits<double>::quiet_NaN();
    try {
      std::mt19937_64 rng(point.seed);
      const PointMeasure mu = fixed ? *fixed : generate_instance(point.generator, rng);
      sr.row.n = mu.n();
      sr.row.m = mu.m();
      try {
        const auto uc = check_useful_constraints(sr.row.d, mu.m(), point.rho_min, point.lambda_min.value_or(mu.min_weight()),
                                                 mu.total_weight());
        sr.B = uc.B;
        sr.eps_tilde = uc.eps_tilde;
      } catch (const std::exception&) {
        // B is only defined for d = 2 mod 4; leave the columns as nan.
      }
      sr.row = run_instance(mu, point, rng).row;
      sr.status = "ok";
    } catch (const std::exception& e) {
      sr.status = e.what();
    }
    rows.push_back(sr);
  }
  return rows;
}

namespace {

std::vector<int> parse_int_list(const std::string& s) {
  std::vector<int> out;
  std::stringstream ss(s);
  std::string tok;
  while (std::getline(ss, tok, ',')) {
    try {
      out.push_back(std::stoi(tok));
    } catch (const std::exception&) {
      throw InputError("bad integer list '" + s + "'");
    }
  }
  return out;
}

struct Flags {
  std::string config, instance, algo, moments_mode, out, generator, weights, sweep_d, sweep_m;
  int degree = 0, n = 0, m = 0, max_rounds = 0;
  std::uint64_t seed = 0;
  bool with_moments = false;
};

void add_common(CLI::App* app, Flags& f) {
  app->add_option("--config", f.config, "JSON config file; flags override its values");
  app->add_option("--instance", f.instance, "instance JSON file");
  app->add_option("--algo", f.algo, "jennrich | v_exact | v_tensor | v_sphere");
  app->add_option("--degree,-d", f.degree, "moment / tensor degree d");
  app->add_option("--seed", f.seed, "seed of the single random generator");
  app->add_option("--out,-o", f.out, "output path (prefix for run and sweep)");
  app->add_option("--moments-mode", f.moments_mode, "true | directional | norm_scaled");
  app->add_option("--generator", f.generator, "random_sphere | orthonormal | simplex | hypercube | custom");
  app->add_option("--n", f.n, "ambient dimension for the generator");
  app->add_option("--m", f.m, "number of components for the generator");
  app->add_option("--weights", f.weights, "weight range 'min,max' for the generator");
  app->add_option("--max-rounds", f.max_rounds, "round limit for the v-algorithms");
}

bool given(const CLI::App* app, const std::string& name) {
  const CLI::Option* o = app->get_option_no_throw(name);
  return o != nullptr && o->count() > 0;
}

RunConfig resolve(const CLI::App* app, const Flags& f, const std::string& command) {
  RunConfig c;
  if (!f.config.empty()) {
    std::ifstream in(f.config);
    if (!in) throw InputError("cannot read config file " + f.config);
    json j;
    try {
      in >> j;
    } catch (const json::exception& e) {
      throw InputError("config file " + f.config + " is not valid JSON: " + e.what());
    }
    c = config_from_json(j);
  }
  c.command = command;
  if (given(app, "--instance")) c.instance_path = f.instance;
  if (given(app, "--algo")) c.algo = algo_from_string(f.algo);
  if (given(app, "--degree")) c.d = f.degree;
  if (given(app, "--seed")) c.seed = f.seed;
  if (given(app, "--out")) c.out = f.out;
  if (given(app, "--moments-mode")) c.moments_mode = moments_mode_from_string(f.moments_mode);
  if (given(app, "--generator")) c.generator.kind = f.generator;
  if (given(app, "--n")) c.generator.n = f.n;
  if (given(app, "--m")) c.generator.m = f.m;
  if (given(app, "--max-rounds")) c.options.max_rounds = f.max_rounds;
  if (given(app, "--weights")) {
    std::stringstream ss(f.weights);
    char comma = 0;
    if (!(ss >> c.generator.weight_min >> comma >> c.generator.weight_max) || comma != ',')
      throw InputError("--weights expects 'min,max'");
  }
  if (given(app, "--sweep-d")) c.sweep_d = parse_int_list(f.sweep_d);
  if (given(app, "--sweep-m")) c.sweep_m = parse_int_list(f.sweep_m);
  if (given(app, "--with-moments")) c.write_moments = f.with_moments;
  return c;
}

std::string with_suffix(const std::string& prefix, const std::string& def, const std::string& suffix) {
  return (prefix.empty() ? def : prefix) + suffix;
}

int dispatch(const std::string& command, const RunConfig& cfg) {
  if (command == "generate") {
    std::mt19937_64 rng(cfg.seed);
    const PointMeasure mu = generate_instance(cfg.generator, rng);
    json inst = to_json(mu);
    inst["seed"] = cfg.seed;
    inst["generator"] = cfg.generator.kind;
    std::string moments;
    if (cfg.write_moments) moments = to_json(moment_sequence(mu, cfg.d)).dump(1) + "\n";
    const std::string path = cfg.out.empty() ? "instance.json" : cfg.out;
    write_file(path, inst.dump(1) + "\n");
    if (cfg.write_moments) {
      std::filesystem::path p(path);
      write_file((p.parent_path() / (p.stem().string() + ".moments.json")).string(), moments);
    }
    return 0;
  }
  if (command == "run") {
    const RunOutcome r = run_config(cfg);
    write_file(with_suffix(cfg.out, "sosdec_run", ".json"), r.result.dump(1) + "\n");
    write_file(with_suffix(cfg.out, "sosdec_run", ".csv"), csv_header() + "\n" + to_csv(r.row) + "\n");
    return 0;
  }
  const auto rows = sweep(cfg);
  std::string text = sweep_header() + "\n";
  for (const auto& r : rows) text += to_csv(r) + "\n";
  write_file(with_suffix(cfg.out, "sosdec_sweep", ".csv"), text);
  return 0;
}

}  // namespace

int run_main(int argc, char** argv) {
  CLI::App app{"Moment and symmetric tensor decomposition by SOS programs"};
  app.require_subcommand(1);
  Flags f;
  CLI::App* gen = app.add_subcommand("generate", "write a synthetic instance");
  CLI::App* run = app.add_subcommand("run", "decompose one instance");
  CLI::App* swp = app.add_subcommand("sweep", "run over a range of d or m");
  for (CLI::App* sub : {gen, run, swp}) add_common(sub, f);
  gen->add_flag("--with-moments", f.with_moments, "also write true moments up to --degree");
  swp->add_option("--sweep-d", f.sweep_d, "comma-separated degrees");
  swp->add_option("--sweep-m", f.sweep_m, "comma-separated component counts");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return 2;
  }

  CLI::App* chosen = app.get_subcommands().front();
  try {
    const RunConfig cfg = resolve(chosen, f, chosen->get_name());
    return dispatch(chosen->get_name(), cfg);
  } catch (const InputError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const json::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "algorithm failure: " << e.what() << "\n";
    return 1;
  }
}

}  // namespace sosdec::cli
