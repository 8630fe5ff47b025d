// batch front door: simulate / fit / cv / assess / bench, driven by YAML configs
#include <omp.h>

#include <CLI11.hpp>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <optional>
#include <yaml-cpp/yaml.h>

#include <json.hpp>

#include "mlgcp/artifacts.hpp"
#include "mlgcp/first_order.hpp"
#include "mlgcp/model_selection.hpp"
#include "mlgcp/nonparametrics.hpp"
#include "mlgcp/optimizer.hpp"
#include "mlgcp/rng.hpp"

namespace fs = std::filesystem;
using namespace mlgcp;

namespace {

// exit-code contract: 0 success, 2 usage/config, 3 I/O, 4 numerical failure
struct ConfigError : std::runtime_error {
  using std::runtime_error::runtime_error;
};
struct IoError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

YAML::Node require(const YAML::Node& node, const std::string& key) {
  const YAML::Node child = node[key];
  if (!child)
    throw ConfigError("config: missing key '" + key + "' (line " +
                      std::to_string(node.Mark().line + 1) + ")");
  return child;
}

Window parse_window(const YAML::Node& root) {
  const YAML::Node w = require(root, "window");
  if (!w.IsSequence() || w.size() != 4)
    throw ConfigError("config: 'window' must be [x0, x1, y0, y1]");
  Window win{w[0].as<double>(), w[2].as<double>(), w[1].as<double>(), w[3].as<double>()};
  win.validate();
  return win;
}

std::pair<int, int> parse_grid(const YAML::Node& root) {
  const YAML::Node g = require(root, "grid");
  if (!g.IsSequence() || g.size() != 2) throw ConfigError("config: 'grid' must be [nx, ny]");
  return {g[0].as<int>(), g[1].as<int>()};
}

Eigen::MatrixXd parse_matrix(const YAML::Node& node, const std::string& what) {
  if (!node.IsSequence() || node.size() == 0 || !node[0].IsSequence())
    throw ConfigError("config: '" + what + "' must be a list of rows");
  const std::size_t nr = node.size(), nc = node[0].size();
  Eigen::MatrixXd m(nr, nc);
  for (std::size_t i = 0; i < nr; ++i) {
    if (node[i].size() != nc) throw ConfigError("config: ragged rows in '" + what + "'");
    for (std::size_t j = 0; j < nc; ++j) m(i, j) = node[i][j].as<double>();
  }
  return m;
}

Eigen::VectorXd parse_vector(const YAML::Node& node, const std::string& what) {
  if (!node.IsSequence()) throw ConfigError("config: '" + what + "' must be a list");
  Eigen::VectorXd v(node.size());
  for (std::size_t i = 0; i < node.size(); ++i) v(i) = node[i].as<double>();
  return v;
}

CorrFamily parse_family(const YAML::Node& node) {
  const std::string s = node ? node.as<std::string>() : "exponential";
  if (s == "exponential") return CorrFamily::Exponential;
  if (s == "gaussian") return CorrFamily::Gaussian;
  throw ConfigError("config: unknown correlation family '" + s + "'");
}

Theta parse_theta(const YAML::Node& node, int p) {
  Theta theta;
  const YAML::Node a = node["alpha"];
  theta.alpha = a && a.size() ? parse_matrix(a, "theta.alpha") : Eigen::MatrixXd::Zero(p, 0);
  const YAML::Node xi = node["xi"];
  theta.xi = xi ? parse_vector(xi, "theta.xi") : Eigen::VectorXd(0);
  theta.sigma2 = parse_vector(require(node, "sigma2"), "theta.sigma2");
  theta.phi = parse_vector(require(node, "phi"), "theta.phi");
  if (theta.alpha.rows() != p && theta.alpha.cols() > 0)
    throw ConfigError("config: theta.alpha row count does not match type count");
  if (theta.alpha.cols() != theta.xi.size())
    throw ConfigError("config: theta.alpha columns must match xi length");
  return theta;
}

ScalarField read_field_checked(const std::string& path) {
  if (!fs::exists(path)) throw IoError("raster not found: " + path);
  return read_field_csv(path);
}

// spatial inputs referenced by a simulate section: background intensity and
// covariate rasters (either generated Gaussian fields or rasters on disk)
ScalarField build_rho0(const YAML::Node& node, const Window& win, int nx, int ny,
                       std::uint64_t seed) {
  const std::string kind = require(node, "kind").as<std::string>();
  if (kind == "raster") return read_field_checked(require(node, "path").as<std::string>());
  if (kind == "constant") {
    ScalarField f;
    f.window = win;
    f.nx = nx;
    f.ny = ny;
    f.values.assign(static_cast<std::size_t>(nx) * ny, require(node, "base").as<double>());
    return f;
  }
  if (kind == "log-gaussian") {
    const double base = require(node, "base").as<double>();
    const double coef = require(node, "coef").as<double>();
    const double scale = require(node, "scale").as<double>();
    CorrelationModel corr{parse_family(node["family"]), scale};
    ScalarField f = simulate_grf(win, nx, ny, corr, seed);
    for (double& v : f.values) v = base * std::exp(coef * v - 0.5 * coef * coef);
    return f;
  }
  throw ConfigError("config: unknown rho0 kind '" + kind + "'");
}

std::vector<ScalarField> build_covariates(const YAML::Node& node, const Window& win,
                                          int nx, int ny, std::uint64_t seed) {
  std::vector<ScalarField> out;
  if (!node) return out;
  for (std::size_t c = 0; c < node.size(); ++c) {
    const std::string kind = require(node[c], "kind").as<std::string>();
    if (kind == "raster") {
      out.push_back(read_field_checked(require(node[c], "path").as<std::string>()));
    } else if (kind == "gaussian-field") {
      CorrelationModel corr{parse_family(node[c]["family"]),
                            require(node[c], "scale").as<double>()};
      out.push_back(simulate_grf(win, nx, ny, corr, derive_seed(seed, 0xc0 + c)));
    } else {
      throw ConfigError("config: unknown covariate kind '" + kind + "'");
    }
  }
  return out;
}

std::vector<double> parse_r_grid(const YAML::Node& node) {
  const double lo = require(node, "min").as<double>();
  const double hi = require(node, "max").as<double>();
  const int n = require(node, "count").as<int>();
  if (!(lo > 0.0) || !(hi > lo) || n < 2) throw ConfigError("config: bad r_grid");
  std::vector<double> r(n);
  for (int i = 0; i < n; ++i) r[i] = lo + (hi - lo) * i / (n - 1);
  return r;
}

OptimizerConfig parse_opt_config(const YAML::Node& node, const Window& win) {
  OptimizerConfig cfg;
  cfg.init_length_scale = win.shorter_side();
  if (node["epsilon"]) cfg.epsilon = node["epsilon"].as<double>();
  if (node["max_outer_iterations"])
    cfg.max_outer_iterations = node["max_outer_iterations"].as<int>();
  cfg.validate();
  return cfg;
}

std::uint64_t parse_seed(const YAML::Node& root, std::optional<std::uint64_t> cli_seed) {
  if (cli_seed) return *cli_seed;
  const YAML::Node s = root["seed"];
  if (!s) throw ConfigError("config: missing key 'seed' and no --seed given");
  return s.as<std::uint64_t>();
}

FirstOrder first_order_from_config(const YAML::Node& node, const PointPattern& pattern) {
  std::vector<ScalarField> covs;
  if (node["covariates"])
    for (const auto& c : node["covariates"])
      covs.push_back(read_field_checked(c.as<std::string>()));
  int baseline = node["baseline"] ? node["baseline"].as<int>() - 1 : pattern.n_types - 1;
  if (baseline < 0 || baseline >= pattern.n_types)
    throw ConfigError("config: baseline type out of range");
  FirstOrderFit fof = estimate_beta(pattern, covs, baseline);
  FirstOrder fo = fof.first_order;
  fo.covariates = covs;
  return fo;
}

void write_manifest(const fs::path& out_dir, const std::string& command,
                    const std::string& config_path, std::uint64_t seed,
                    const nlohmann::json& extra) {
  nlohmann::json j;
  j["command"] = command;
  j["config_hash"] = file_hash_hex(config_path);
  j["seed"] = seed;
  j["format_version"] = 1;
  j["parameters"] = extra;
  std::ofstream out(out_dir / "manifest.json");
  out << std::setprecision(17) << j.dump(2) << "\n";
}

PointPattern load_pattern(const std::string& path, const Window& win, int n_types) {
  if (!fs::exists(path)) throw IoError("pattern not found: " + path);
  return read_pattern_csv(path, win, n_types);
}

std::vector<double> default_r_grid() {
  std::vector<double> r(19);
  for (int i = 0; i < 19; ++i) r[i] = 0.01 + 0.005 * i;
  return r;
}

int cmd_simulate(const YAML::Node& root, const std::string& config_path,
                 const fs::path& out_dir, std::optional<std::uint64_t> cli_seed) {
  const YAML::Node sim = require(root, "simulate");
  const std::uint64_t seed = parse_seed(root, cli_seed);
  const Window win = parse_window(root);
  const auto [nx, ny] = parse_grid(root);
  const int p = require(root, "types").as<int>();

  SimulationSpec spec;
  spec.rho0 = build_rho0(require(sim, "rho0"), win, nx, ny, derive_seed(seed, 0xbb));
  spec.covariates = build_covariates(sim["covariates"], win, nx, ny, seed);
  spec.gamma = sim["gamma"] ? parse_matrix(sim["gamma"], "gamma")
                            : Eigen::MatrixXd::Zero(p, 1);
  if (spec.gamma.rows() != p || spec.gamma.cols() != 1 + static_cast<int>(spec.covariates.size()))
    throw ConfigError("config: gamma must be types x (1 + covariate count)");
  spec.theta = parse_theta(require(sim, "theta"), p);
  if (spec.theta.n_types() != p) throw ConfigError("config: theta dimensions mismatch");
  spec.field_family = parse_family(sim["field_family"]);
  spec.rng_seed = seed;

  const PointPattern pattern = simulate_mlgcp(spec);
  write_pattern_csv(pattern, (out_dir / "pattern.csv").string());
  write_field_csv(spec.rho0, (out_dir / "rho0.csv").string());
  for (std::size_t c = 0; c < spec.covariates.size(); ++c)
    write_field_csv(spec.covariates[c],
                    (out_dir / ("covariate_" + std::to_string(c + 1) + ".csv")).string());
  write_curves_csv((out_dir / "true_curves.csv").string(),
                   pcf_curves(spec.theta, default_r_grid()));
  write_manifest(out_dir, "simulate", config_path, seed,
                 {{"types", p}, {"nx", nx}, {"ny", ny}});
  std::cout << "simulated " << pattern.points.size() << " points over " << p
            << " types\n";
  return 0;
}

int cmd_fit(const YAML::Node& root, const std::string& config_path,
            const std::string& pattern_path, const fs::path& out_dir,
            std::optional<std::uint64_t> cli_seed) {
  const YAML::Node fc = require(root, "fit");
  const std::uint64_t seed = parse_seed(root, cli_seed);
  const Window win = parse_window(root);
  const int p = require(root, "types").as<int>();
  const PointPattern pattern = load_pattern(pattern_path, win, p);

  const double R = require(fc, "R").as<double>();
  const int q = require(fc, "q").as<int>();
  const double lambda = fc["lambda"] ? fc["lambda"].as<double>() : 0.0;
  const FirstOrder fo = first_order_from_config(fc, pattern);
  const LikelihoodContext ctx(pattern, fo, R);
  const OptimizerConfig cfg = parse_opt_config(fc, win);

  const FitResult fit_result = fit(ctx, q, cfg, lambda, seed);
  write_fit_json((out_dir / "fit.json").string(), fit_result, fo);
  const std::vector<double> r_grid =
      fc["r_grid"] ? parse_r_grid(fc["r_grid"]) : default_r_grid();
  write_curves_csv((out_dir / "curves.csv").string(),
                   pcf_curves(fit_result.theta_hat, r_grid));
  write_manifest(out_dir, "fit", config_path, seed,
                 {{"R", R}, {"q", q}, {"lambda", lambda}});
  std::cout << "fit " << (fit_result.converged ? "converged" : "did not converge")
            << ", objective " << fit_result.objective << "\n";
  return 0;
}

int cmd_cv(const YAML::Node& root, const std::string& config_path,
           const std::string& pattern_path, const fs::path& out_dir,
           std::optional<std::uint64_t> cli_seed) {
  const YAML::Node cc = require(root, "cv");
  const std::uint64_t seed = parse_seed(root, cli_seed);
  const Window win = parse_window(root);
  const int p = require(root, "types").as<int>();
  const PointPattern pattern = load_pattern(pattern_path, win, p);

  const double R = require(cc, "R").as<double>();
  std::vector<int> q_grid;
  for (const auto& n : require(cc, "q_grid")) q_grid.push_back(n.as<int>());
  std::vector<double> lambda_grid{0.0};
  if (cc["lambda_grid"]) {
    lambda_grid.clear();
    for (const auto& n : cc["lambda_grid"]) lambda_grid.push_back(n.as<double>());
  }
  const int K = require(cc, "K").as<int>();
  const int L = require(cc, "L").as<int>();
  const int fold_iters =
      cc["fold_max_iterations"] ? cc["fold_max_iterations"].as<int>() : 60;

  const FirstOrder fo = first_order_from_config(cc, pattern);
  const LikelihoodContext ctx(pattern, fo, R);
  const OptimizerConfig cfg = parse_opt_config(cc, win);

  const CVResult cv = select_q_lambda(ctx, q_grid, lambda_grid, K, L, cfg, seed, fold_iters);
  write_cv_json((out_dir / "cv.json").string(), cv);
  write_cv_csv((out_dir / "cv.csv").string(), cv);
  write_manifest(out_dir, "cv", config_path, seed, {{"R", R}, {"K", K}, {"L", L}});
  std::cout << "selected q_min=" << cv.q_min << " q_1se=" << cv.q_1se
            << " lambda=" << cv.lambda_star << "\n";
  return 0;
}

using RatioPairs = std::vector<std::pair<std::pair<int, int>, std::pair<int, int>>>;

RatioPairs parse_ratio_pairs(const YAML::Node& node, int p) {
  RatioPairs out;
  for (const auto& rp : node) {
    if (!rp.IsSequence() || rp.size() != 2 || rp[0].size() != 2 || rp[1].size() != 2)
      throw ConfigError("config: ratio pair must be [[i,j],[l,k]] (1-based)");
    auto idx = [&](const YAML::Node& n) {
      const int v = n.as<int>() - 1;
      if (v < 0 || v >= p) throw ConfigError("config: ratio pair type out of range");
      return v;
    };
    out.push_back({{idx(rp[0][0]), idx(rp[0][1])}, {idx(rp[1][0]), idx(rp[1][1])}});
  }
  if (out.empty()) throw ConfigError("config: ratio_pairs is empty");
  return out;
}

int cmd_assess(const YAML::Node& root, const std::string& config_path,
               const std::string& pattern_path, const std::string& fit_path,
               const fs::path& out_dir, std::optional<std::uint64_t> cli_seed) {
  const YAML::Node ac = require(root, "assess");
  const std::uint64_t seed = parse_seed(root, cli_seed);
  const Window win = parse_window(root);
  const int p = require(root, "types").as<int>();
  const PointPattern pattern = load_pattern(pattern_path, win, p);
  if (!fs::exists(fit_path)) throw IoError("fit artifact not found: " + fit_path);
  auto [fit_result, fo] = read_fit_json(fit_path);
  if (ac["covariates"])
    for (const auto& c : ac["covariates"])
      fo.covariates.push_back(read_field_checked(c.as<std::string>()));
  if (fo.beta.cols() != 1 + static_cast<int>(fo.covariates.size()))
    throw ConfigError("config: covariate rasters do not match fitted beta");

  const std::vector<double> r_grid =
      ac["r_grid"] ? parse_r_grid(ac["r_grid"]) : default_r_grid();
  const RatioPairs ratio_pairs = parse_ratio_pairs(require(ac, "ratio_pairs"), p);
  const int n_sim = require(ac, "n_sim").as<int>();
  const double level = ac["level"] ? ac["level"].as<double>() : 0.05;
  const double pcf_bw = ac["pcf_bandwidth"] ? ac["pcf_bandwidth"].as<double>() : -1.0;
  const auto [nx, ny] = parse_grid(root);

  std::vector<double> b_grid;
  if (ac["rho0_bandwidths"])
    for (const auto& n : ac["rho0_bandwidths"]) b_grid.push_back(n.as<double>());
  else
    b_grid = {0.05 * win.shorter_side(), 0.1 * win.shorter_side(),
              0.15 * win.shorter_side(), 0.2 * win.shorter_side()};
  const BandwidthSelection bw = select_bandwidth(pattern, fo, b_grid, nx, ny);
  const ScalarField rho0_hat = estimate_rho0(pattern, fo, bw.b_star, nx, ny);

  const EnvelopeResult env = envelope_test(pattern, fo, fit_result.theta_hat, rho0_hat,
                                           ratio_pairs, n_sim, r_grid, level,
                                           derive_seed(seed, 0xe0), pcf_bw);
  write_envelope_json((out_dir / "envelope.json").string(), env, ratio_pairs);
  for (std::size_t pi = 0; pi < ratio_pairs.size(); ++pi)
    write_curve_csv((out_dir / ("ratio_" + std::to_string(pi + 1) + ".csv")).string(),
                    r_grid, env.data_curve[pi], &env.lo[pi], &env.hi[pi]);

  nlohmann::json extra{{"b_star", bw.b_star}, {"p_value", env.p_value}};
  if (ac["truth"]) {
    // MISE of the fitted curves against a supplied ground-truth theta
    const Theta truth = parse_theta(require(ac["truth"], "theta"), p);
    PcfCurveSet set;
    set.r = r_grid;
    set.g.assign(p, std::vector<std::vector<double>>(p));
    for (int i = 0; i < p; ++i)
      for (int j = i; j < p; ++j) {
        set.g[i][j].resize(r_grid.size());
        for (std::size_t gi = 0; gi < r_grid.size(); ++gi)
          set.g[i][j][gi] = cross_pcf(fit_result.theta_hat, i, j, r_grid[gi]);
      }
    const std::vector<PcfCurveSet> reps{set};
    extra["mise"] = {{"within", mise(reps, truth, MiseScope::Within)},
                     {"between", mise(reps, truth, MiseScope::Between)},
                     {"total", mise(reps, truth, MiseScope::Total)}};
  }
  write_manifest(out_dir, "assess", config_path, seed, extra);
  std::cout << "envelope p-value " << env.p_value << " (bandwidth " << bw.b_star
            << ")\n";
  return 0;
}

int cmd_bench(const YAML::Node& root, const std::string& config_path,
              const fs::path& out_dir, std::optional<std::uint64_t> cli_seed) {
  const YAML::Node bc = require(root, "bench");
  const YAML::Node sim = require(root, "simulate");
  const std::uint64_t seed = parse_seed(root, cli_seed);
  const Window win = parse_window(root);
  const auto [nx, ny] = parse_grid(root);
  const int p = require(root, "types").as<int>();

  const int n_rep = require(bc, "n_replicates").as<int>();
  std::vector<std::string> methods;
  for (const auto& m : require(bc, "methods")) methods.push_back(m.as<std::string>());
  const double R = require(bc, "R").as<double>();
  const int q = require(bc, "q").as<int>();
  const std::vector<double> r_grid =
      bc["r_grid"] ? parse_r_grid(bc["r_grid"]) : default_r_grid();
  const double intensity_bw =
      bc["intensity_bandwidth"] ? bc["intensity_bandwidth"].as<double>() : 0.1;
  const double pcf_bw = bc["pcf_bandwidth"] ? bc["pcf_bandwidth"].as<double>() : 0.01;

  const Theta truth = parse_theta(require(sim, "theta"), p);
  OptimizerConfig cfg = parse_opt_config(bc, win);

  // per method, one PcfCurveSet per replicate
  std::map<std::string, std::vector<PcfCurveSet>> curve_sets;
  for (const std::string& m : methods) curve_sets[m].resize(n_rep);

  for (int rep = 0; rep < n_rep; ++rep) {
    const std::uint64_t rep_seed = derive_seed(seed, rep);
    SimulationSpec spec;
    spec.rho0 = build_rho0(require(sim, "rho0"), win, nx, ny, derive_seed(rep_seed, 0xbb));
    spec.covariates = build_covariates(sim["covariates"], win, nx, ny, rep_seed);
    spec.gamma = sim["gamma"] ? parse_matrix(sim["gamma"], "gamma")
                              : Eigen::MatrixXd::Zero(p, 1);
    spec.theta = truth;
    spec.field_family = parse_family(sim["field_family"]);
    spec.rng_seed = rep_seed;
    const PointPattern pattern = simulate_mlgcp(spec);

    const FirstOrderFit fof = estimate_beta(pattern, {}, p - 1);
    const FirstOrder& fo = fof.first_order;

    for (const std::string& method : methods) {
      PcfCurveSet& set = curve_sets[method][rep];
      set.r = r_grid;
      set.g.assign(p, std::vector<std::vector<double>>(p));

      if (method == "semiparametric") {
        const LikelihoodContext ctx(pattern, fo, R);
        const FitResult fr = fit(ctx, q, cfg, 0.0, derive_seed(rep_seed, 0xf1));
        for (int i = 0; i < p; ++i)
          for (int j = i; j < p; ++j) {
            set.g[i][j].resize(r_grid.size());
            for (std::size_t gi = 0; gi < r_grid.size(); ++gi)
              set.g[i][j][gi] = cross_pcf(fr.theta_hat, i, j, r_grid[gi]);
          }
      } else if (method == "simple" || method == "diggle") {
        std::vector<ScalarField> intensities(p);
        for (int i = 0; i < p; ++i) {
          if (method == "simple") {
            PointPattern one;
            one.window = win;
            one.n_types = 1;
            for (const Point& pt : pattern.points)
              if (pt.type == i) one.points.push_back({pt.x, pt.y, 0});
            intensities[i] = kernel_intensity(one, intensity_bw, nx, ny);
          } else {
            intensities[i] = diggle_rho0_minus_i(pattern, fo, intensity_bw, i, nx, ny);
            const double fi = std::exp(fo.beta(i, 0));
            for (double& v : intensities[i].values) v *= fi;
          }
        }
        for (int i = 0; i < p; ++i)
          for (int j = i; j < p; ++j)
            set.g[i][j] = nonparam_pcf(pattern, intensities, i, j, r_grid, pcf_bw);
      } else {
        throw ConfigError("config: unknown method '" + method + "'");
      }
    }
  }

  std::ofstream out(out_dir / "bench.csv");
  out << std::setprecision(17) << "method,mise_within,mise_between,mise_total\n";
  for (const std::string& method : methods)
    out << method << "," << mise(curve_sets[method], truth, MiseScope::Within) << ","
        << mise(curve_sets[method], truth, MiseScope::Between) << ","
        << mise(curve_sets[method], truth, MiseScope::Total) << "\n";
  write_manifest(out_dir, "bench", config_path, seed,
                 {{"n_replicates", n_rep}, {"R", R}, {"q", q}});
  std::cout << "bench finished: " << methods.size() << " methods, " << n_rep
            << " replicates\n";
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"multivariate log-Gaussian Cox process toolkit"};
  app.require_subcommand(1);
  app.fallthrough(true);

  std::string config_path, out_dir = ".", pattern_path, fit_path;
  std::optional<std::uint64_t> cli_seed;
  int threads = 0;

  app.add_option("--config", config_path, "YAML config file")->required();
  app.add_option("--out", out_dir, "output directory");
  app.add_option("--seed", cli_seed, "seed override");
  app.add_option("--threads", threads, "thread count (0 = default)");

  auto* sub_sim = app.add_subcommand("simulate", "simulate a pattern from a model config");
  auto* sub_fit = app.add_subcommand("fit", "fit second-order parameters to a pattern");
  sub_fit->add_option("--pattern", pattern_path, "pattern CSV")->required();
  auto* sub_cv = app.add_subcommand("cv", "cross-validated model selection");
  sub_cv->add_option("--pattern", pattern_path, "pattern CSV")->required();
  auto* sub_assess = app.add_subcommand("assess", "goodness-of-fit assessment");
  sub_assess->add_option("--pattern", pattern_path, "pattern CSV")->required();
  sub_assess->add_option("--fit", fit_path, "fit JSON artifact")->required();
  auto* sub_bench = app.add_subcommand("bench", "replicated method comparison");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    if (e.get_exit_code() == 0) return app.exit(e);  // --help
    app.exit(e);
    return 2;
  }

  if (threads > 0) omp_set_num_threads(threads);

  YAML::Node root;
  try {
    if (!fs::exists(config_path)) {
      std::cerr << "error: config not found: " << config_path << "\n";
      return 3;
    }
    root = YAML::LoadFile(config_path);
  } catch (const YAML::Exception& e) {
    std::cerr << "error: config parse failed at line " << e.mark.line + 1 << ": "
              << e.msg << "\n";
    return 2;
  }

  try {
    fs::create_directories(out_dir);
    if (sub_sim->parsed()) return cmd_simulate(root, config_path, out_dir, cli_seed);
    if (sub_fit->parsed())
      return cmd_fit(root, config_path, pattern_path, out_dir, cli_seed);
    if (sub_cv->parsed()) return cmd_cv(root, config_path, pattern_path, out_dir, cli_seed);
    if (sub_assess->parsed())
      return cmd_assess(root, config_path, pattern_path, fit_path, out_dir, cli_seed);
    if (sub_bench->parsed()) return cmd_bench(root, config_path, out_dir, cli_seed);
    return 2;
  } catch (const ConfigError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const YAML::Exception& e) {
    std::cerr << "error: config: " << e.what() << "\n";
    return 2;
  } catch (const IoError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 3;
  } catch (const FieldSimulationError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 4;
  } catch (const std::invalid_argument& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 4;
  }
}
