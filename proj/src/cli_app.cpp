#include "alspce/cli_app.hpp"

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <memory>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"

#include "alspce/active_loop.hpp"
#include "alspce/io.hpp"
#include "alspce/parallel.hpp"
#include "alspce/reliability.hpp"
#include "alspce/testbeds.hpp"

namespace alspce {
namespace {

namespace fs = std::filesystem;
using nlohmann::json;
using nlohmann::ordered_json;

json load_config_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open config: " + path);
  json j;
  in >> j;
  if (!j.is_object()) throw std::runtime_error("config must be a JSON object: " + path);
  return j;
}

void check_keys(const json& j, const std::vector<std::string>& allowed,
                const std::string& context) {
  for (auto it = j.begin(); it != j.end(); ++it) {
    if (std::find(allowed.begin(), allowed.end(), it.key()) == allowed.end())
      throw std::runtime_error("unknown config key '" + it.key() + "' in " + context);
  }
}

// Flags take precedence over config file entries.
template <typename T>
void cfg_get(const json& cfg, const std::string& key, const CLI::App* cmd,
             const std::string& flag, T& value) {
  if (!cfg.contains(key)) return;
  if (!flag.empty() && cmd->count(flag) > 0) return;
  value = cfg.at(key).get<T>();
}

TrainConfig train_from_json(const json& j) {
  check_keys(j,
             {"p_min", "p_max", "q_grid", "sigma_grid", "sigma_grid_size", "n_folds", "restarts",
              "n_quad", "latent_family"},
             "train");
  TrainConfig t;
  if (j.contains("p_min")) t.p_min = j.at("p_min").get<int>();
  if (j.contains("p_max")) t.p_max = j.at("p_max").get<int>();
  if (j.contains("q_grid")) t.q_grid = j.at("q_grid").get<std::vector<double>>();
  if (j.contains("sigma_grid")) t.sigma_grid = j.at("sigma_grid").get<std::vector<double>>();
  if (j.contains("sigma_grid_size")) t.sigma_grid_size = j.at("sigma_grid_size").get<int>();
  if (j.contains("n_folds")) t.n_folds = j.at("n_folds").get<int>();
  if (j.contains("restarts")) t.restarts = j.at("restarts").get<int>();
  if (j.contains("n_quad")) t.n_quad = j.at("n_quad").get<int>();
  if (j.contains("latent_family")) {
    const auto name = j.at("latent_family").get<std::string>();
    if (name == "gaussian")
      t.latent_family = PolyFamily::hermite;
    else if (name == "uniform")
      t.latent_family = PolyFamily::legendre;
    else
      throw std::runtime_error("train.latent_family must be gaussian or uniform");
  }
  return t;
}

struct Problem {
  std::unique_ptr<StochasticSimulator> simulator;
  InputModel input_model;
};

Problem make_problem(const std::string& testbed, const std::string& dataset_path,
                     const json& input_model_json, double i_lim, double delta) {
  if (!testbed.empty() && !dataset_path.empty())
    throw std::runtime_error("give either a testbed or a dataset, not both");
  if (testbed == "rs") return {std::make_unique<RsSimulator>(), rs::input_model()};
  if (testbed == "sir") return {std::make_unique<SirSimulator>(i_lim), sir::input_model()};
  if (testbed == "toy") return {std::make_unique<ToySimulator>(), toy::input_model()};
  if (!testbed.empty())
    throw std::runtime_error("unknown testbed '" + testbed + "' (rs, sir, toy)");
  if (dataset_path.empty()) throw std::runtime_error("a testbed or dataset is required");
  if (input_model_json.is_null())
    throw std::runtime_error("dataset runs need input_model in the config");
  Dataset ds = read_dataset_csv(dataset_path);
  return {std::make_unique<DatasetSimulator>(std::move(ds.X), std::move(ds.y), delta),
          InputModel::from_json(input_model_json)};
}

double median(std::vector<double> v) {
  if (v.empty()) throw std::invalid_argument("median of empty set");
  std::sort(v.begin(), v.end());
  const std::size_t n = v.size();
  return n % 2 ? v[n / 2] : 0.5 * (v[n / 2 - 1] + v[n / 2]);
}

double cov_across(const std::vector<double>& v) {
  const auto n = static_cast<double>(v.size());
  double mean = 0.0;
  for (double x : v) mean += x;
  mean /= n;
  if (v.size() < 2 || mean == 0.0) return 0.0;
  double ss = 0.0;
  for (double x : v) ss += (x - mean) * (x - mean);
  return std::sqrt(ss / (n - 1.0)) / mean;
}

ordered_json finite_or_null(double v) {
  if (std::isfinite(v)) return v;
  return nullptr;
}

void write_json_file(const std::string& path, const ordered_json& j) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot open for writing: " + path);
  out << j.dump(2) << "\n";
}

void ensure_dir(const std::string& dir) {
  if (!dir.empty()) fs::create_directories(dir);
}

void ensure_parent_dir(const std::string& file) {
  const fs::path p(file);
  if (p.has_parent_path()) fs::create_directories(p.parent_path());
}

// Points file: header x_1..x_M, optionally with a trailing y column that is
// ignored.
Eigen::MatrixXd read_points_csv(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open points file: " + path);
  std::string header;
  if (!std::getline(in, header)) throw std::runtime_error("empty points file: " + path);
  if (!header.empty() && header.back() == '\r') header.pop_back();
  if (header.size() >= 2 && header.substr(header.size() - 2) == ",y") {
    in.seekg(0);
    return read_dataset_csv(in, path).X;
  }
  // Append a dummy y column in memory so the strict dataset parser applies.
  std::ostringstream body;
  body << header << ",y\n";
  std::string line;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    body << line << ",0\n";
  }
  std::istringstream ss(body.str());
  return read_dataset_csv(ss, path).X;
}

struct AlRunOptions {
  std::string config_path;
  std::string testbed;
  std::string dataset;
  std::string out_dir = "alspce_out";
  double i_lim = sir::kDefaultILim;
  double delta = 0.0;
  AlConfig al;
  std::uint64_t seed = 0;
  int replications = 1;
  int jobs = 1;
  std::vector<long long> checkpoints;
};

void run_al_replication(const AlRunOptions& opt, const InputModel& input_model,
                        StochasticSimulator& simulator, int rep) {
  AlConfig cfg = opt.al;
  cfg.seed = opt.seed + static_cast<std::uint64_t>(rep);
  const std::string prefix = opt.out_dir + "/rep_" + std::to_string(rep);
  try {
    AlState state = run_active_loop(cfg, simulator, input_model);
    write_convergence_csv(prefix + "_convergence.csv", state.history);
    write_ed_csv(prefix + "_ed.csv", state);
    state.model->save(prefix + "_model.json");
  } catch (const AlError& e) {
    write_convergence_csv(prefix + "_convergence_partial.csv", e.partial().history);
    throw std::runtime_error("replication " + std::to_string(rep) + " aborted: " + e.what());
  }
}

int cmd_al_run(const AlRunOptions& options, const CLI::App* cmd) {
  AlRunOptions opt = options;
  json cfg = json::object();
  if (!opt.config_path.empty()) cfg = load_config_file(opt.config_path);
  check_keys(cfg,
             {"testbed", "dataset", "input_model", "i_lim", "delta", "n_initial", "batch_size",
              "budget", "n_candidates", "n_mc", "ensemble_size", "damped_grid_size", "train",
              "replications", "checkpoints", "out", "seed", "jobs"},
             "al-run config");
  cfg_get(cfg, "testbed", cmd, "--testbed", opt.testbed);
  cfg_get(cfg, "dataset", cmd, "--dataset", opt.dataset);
  cfg_get(cfg, "i_lim", cmd, "--i-lim", opt.i_lim);
  cfg_get(cfg, "delta", cmd, "--delta", opt.delta);
  cfg_get(cfg, "n_initial", cmd, "--n-initial", opt.al.n_initial);
  cfg_get(cfg, "batch_size", cmd, "--batch-size", opt.al.batch_size);
  cfg_get(cfg, "budget", cmd, "--budget", opt.al.budget);
  cfg_get(cfg, "n_candidates", cmd, "--n-candidates", opt.al.n_candidates);
  cfg_get(cfg, "n_mc", cmd, "--n-mc", opt.al.n_mc);
  cfg_get(cfg, "ensemble_size", cmd, "--ensemble-size", opt.al.ensemble_size);
  cfg_get(cfg, "damped_grid_size", cmd, "", opt.al.damped_grid_size);
  cfg_get(cfg, "replications", cmd, "--replications", opt.replications);
  cfg_get(cfg, "checkpoints", cmd, "--checkpoints", opt.checkpoints);
  cfg_get(cfg, "out", cmd, "--out", opt.out_dir);
  cfg_get(cfg, "seed", cmd, "--seed", opt.seed);
  cfg_get(cfg, "jobs", cmd, "--jobs", opt.jobs);
  if (cfg.contains("train")) opt.al.train = train_from_json(cfg.at("train"));

  if (opt.replications < 1) throw std::runtime_error("replications >= 1 required");
  if (opt.jobs < 1) throw std::runtime_error("jobs >= 1 required");
  opt.al.validate();
  if (opt.checkpoints.empty()) opt.checkpoints = {opt.al.budget};
  std::sort(opt.checkpoints.begin(), opt.checkpoints.end());
  opt.checkpoints.erase(std::unique(opt.checkpoints.begin(), opt.checkpoints.end()),
                        opt.checkpoints.end());
  if (opt.checkpoints.front() < opt.al.n_initial)
    throw std::runtime_error("checkpoints must be >= n_initial");

  ensure_dir(opt.out_dir);
  const json input_model_json = cfg.contains("input_model") ? cfg.at("input_model") : json();
  const bool dataset_mode = !opt.dataset.empty();

  if (dataset_mode) {
    // Dataset consumption is stateful, so replications share one adapter and
    // run in submission order.
    Problem prob =
        make_problem(opt.testbed, opt.dataset, input_model_json, opt.i_lim, opt.delta);
    for (int r = 0; r < opt.replications; ++r)
      run_al_replication(opt, prob.input_model, *prob.simulator, r);
  } else {
    run_tasks(static_cast<std::size_t>(opt.replications), opt.jobs, [&](std::size_t r) {
      Problem prob =
          make_problem(opt.testbed, opt.dataset, input_model_json, opt.i_lim, opt.delta);
      run_al_replication(opt, prob.input_model, *prob.simulator, static_cast<int>(r));
    });
  }

  // Summary: per checkpoint, the smoothed estimate each replication had
  // available at that budget (last record with n <= checkpoint).
  std::vector<std::vector<double>> pf_at(static_cast<std::size_t>(opt.replications));
  for (int r = 0; r < opt.replications; ++r) {
    const std::string conv = opt.out_dir + "/rep_" + std::to_string(r) + "_convergence.csv";
    std::ifstream in(conv);
    if (!in) throw std::runtime_error("missing convergence file: " + conv);
    std::string line;
    std::getline(in, line);
    std::vector<std::pair<long long, double>> rows;
    while (std::getline(in, line)) {
      if (line.empty()) continue;
      std::stringstream ss(line);
      std::string field;
      std::vector<std::string> fields;
      while (std::getline(ss, field, ',')) fields.push_back(field);
      rows.emplace_back(std::stoll(fields[0]), std::stod(fields[3]));
    }
    for (long long c : opt.checkpoints) {
      double value = rows.front().second;
      for (const auto& [n, pf] : rows)
        if (n <= c) value = pf;
      pf_at[static_cast<std::size_t>(r)].push_back(value);
    }
  }

  ordered_json summary;
  summary["checkpoints"] = opt.checkpoints;
  ordered_json medians = ordered_json::array();
  ordered_json covs = ordered_json::array();
  ordered_json betas = ordered_json::array();
  for (std::size_t c = 0; c < opt.checkpoints.size(); ++c) {
    std::vector<double> vals;
    for (const auto& rep : pf_at) vals.push_back(rep[c]);
    const double med = median(vals);
    medians.push_back(med);
    covs.push_back(opt.replications > 1 ? cov_across(vals) : 0.0);
    betas.push_back(finite_or_null(beta_from_pf(med)));
  }
  summary["median_pf"] = medians;
  summary["cov"] = covs;
  summary["estimator"] = "conditional";
  summary["median_beta"] = betas;
  summary["replications"] = opt.replications;
  summary["cov_defined"] = opt.replications > 1;
  summary["seed"] = opt.seed;
  ordered_json per_rep = ordered_json::array();
  for (const auto& rep : pf_at) per_rep.push_back(rep);
  summary["pf_per_replication"] = per_rep;
  write_json_file(opt.out_dir + "/summary.json", summary);
  return 0;
}

struct McsOptions {
  std::string config_path;
  std::string testbed;
  std::string out_dir = ".";
  double i_lim = sir::kDefaultILim;
  long long n = 0;
  std::uint64_t seed = 0;
};

int cmd_mcs(const McsOptions& options, const CLI::App* cmd) {
  McsOptions opt = options;
  json cfg = json::object();
  if (!opt.config_path.empty()) cfg = load_config_file(opt.config_path);
  check_keys(cfg, {"testbed", "i_lim", "n", "out", "seed"}, "mcs config");
  cfg_get(cfg, "testbed", cmd, "--testbed", opt.testbed);
  cfg_get(cfg, "i_lim", cmd, "--i-lim", opt.i_lim);
  cfg_get(cfg, "n", cmd, "--n", opt.n);
  cfg_get(cfg, "out", cmd, "--out", opt.out_dir);
  cfg_get(cfg, "seed", cmd, "--seed", opt.seed);
  if (opt.n < 1) throw std::runtime_error("mcs: n >= 1 required");

  Problem prob = make_problem(opt.testbed, "", json(), opt.i_lim, 0.0);
  StochasticSimulator& sim = *prob.simulator;
  Rng rng = make_rng(derive_seed(opt.seed, 0));
  PfEstimate est = mcs_indicator(
      [&sim](const Eigen::RowVectorXd& x, Rng& r) { return sim.evaluate(x, r).y; },
      prob.input_model, opt.n, rng);

  ensure_dir(opt.out_dir);
  ordered_json out;
  out["estimator"] = estimator_name(est.estimator);
  out["testbed"] = opt.testbed;
  if (opt.testbed == "sir") out["i_lim"] = opt.i_lim;
  out["n"] = est.n_samples;
  out["pf"] = est.pf;
  out["cov"] = est.cov_defined ? ordered_json(est.cov) : ordered_json(nullptr);
  out["cov_defined"] = est.cov_defined;
  out["zero_failures"] = est.pf == 0.0;
  out["beta"] = finite_or_null(beta_from_pf(est.pf));
  out["seed"] = opt.seed;
  write_json_file(opt.out_dir + "/mcs.json", out);
  return 0;
}

struct StaticFitOptions {
  std::string config_path;
  std::string testbed;
  std::string dataset;
  std::string out_dir = "alspce_out";
  double i_lim = sir::kDefaultILim;
  double delta = 0.0;
  int n_design = 0;
  long long n_mc = 100000;
  TrainConfig train;
  int replications = 1;
  int jobs = 1;
  std::uint64_t seed = 0;
};

int cmd_static_fit(const StaticFitOptions& options, const CLI::App* cmd) {
  StaticFitOptions opt = options;
  json cfg = json::object();
  if (!opt.config_path.empty()) cfg = load_config_file(opt.config_path);
  check_keys(cfg,
             {"testbed", "dataset", "input_model", "i_lim", "delta", "n", "n_mc", "train",
              "replications", "out", "seed", "jobs"},
             "static-fit config");
  cfg_get(cfg, "testbed", cmd, "--testbed", opt.testbed);
  cfg_get(cfg, "dataset", cmd, "--dataset", opt.dataset);
  cfg_get(cfg, "i_lim", cmd, "--i-lim", opt.i_lim);
  cfg_get(cfg, "delta", cmd, "--delta", opt.delta);
  cfg_get(cfg, "n", cmd, "--n", opt.n_design);
  cfg_get(cfg, "n_mc", cmd, "--n-mc", opt.n_mc);
  cfg_get(cfg, "replications", cmd, "--replications", opt.replications);
  cfg_get(cfg, "out", cmd, "--out", opt.out_dir);
  cfg_get(cfg, "seed", cmd, "--seed", opt.seed);
  cfg_get(cfg, "jobs", cmd, "--jobs", opt.jobs);
  if (cfg.contains("train")) opt.train = train_from_json(cfg.at("train"));
  if (opt.n_design < 2) throw std::runtime_error("static-fit: n >= 2 required");
  if (opt.n_mc < 1) throw std::runtime_error("static-fit: n_mc >= 1 required");
  if (opt.replications < 1) throw std::runtime_error("replications >= 1 required");
  opt.train.validate();

  ensure_dir(opt.out_dir);
  const json input_model_json = cfg.contains("input_model") ? cfg.at("input_model") : json();
  const bool dataset_mode = !opt.dataset.empty();
  std::vector<PfEstimate> estimates(static_cast<std::size_t>(opt.replications));

  auto run_one = [&](StochasticSimulator& sim, const InputModel& im, int rep) {
    const std::uint64_t rep_seed = opt.seed + static_cast<std::uint64_t>(rep);
    Rng lhs_rng = make_rng(derive_seed(rep_seed, 0));
    Eigen::MatrixXd X = im.lhs_sample(opt.n_design, lhs_rng);
    Eigen::VectorXd y(opt.n_design);
    const std::uint64_t sim_master = derive_seed(rep_seed, 1);
    for (int i = 0; i < opt.n_design; ++i) {
      Rng sim_rng = make_rng(derive_seed(sim_master, static_cast<std::uint64_t>(i)));
      SimEval ev = sim.evaluate(X.row(i), sim_rng);
      X.row(i) = ev.realized_x;
      y[i] = ev.y;
    }
    Rng mc_rng = make_rng(derive_seed(rep_seed, 2));
    Eigen::MatrixXd mc = im.sample(opt.n_mc, mc_rng);
    Rng fit_rng = make_rng(derive_seed(rep_seed, 3));
    FitResult fit = fit_mle(X, y, im, opt.train, fit_rng);
    fit.model.save(opt.out_dir + "/rep_" + std::to_string(rep) + "_model.json");
    estimates[static_cast<std::size_t>(rep)] = pf_from_s(fit.model, mc);
  };

  if (dataset_mode) {
    Problem prob = make_problem(opt.testbed, opt.dataset, input_model_json, opt.i_lim, opt.delta);
    for (int r = 0; r < opt.replications; ++r) run_one(*prob.simulator, prob.input_model, r);
  } else {
    run_tasks(static_cast<std::size_t>(opt.replications), opt.jobs, [&](std::size_t r) {
      Problem prob =
          make_problem(opt.testbed, opt.dataset, input_model_json, opt.i_lim, opt.delta);
      run_one(*prob.simulator, prob.input_model, static_cast<int>(r));
    });
  }

  std::vector<double> pfs;
  for (const auto& e : estimates) pfs.push_back(e.pf);
  const double med = median(pfs);
  ordered_json out;
  out["estimator"] = "conditional";
  out["n_design"] = opt.n_design;
  out["n_mc"] = opt.n_mc;
  out["replications"] = opt.replications;
  out["pf"] = pfs;
  ordered_json within = ordered_json::array();
  for (const auto& e : estimates)
    within.push_back(e.cov_defined ? ordered_json(e.cov) : ordered_json(nullptr));
  out["cov_within"] = within;
  out["median_pf"] = med;
  out["cov"] = opt.replications > 1 ? cov_across(pfs) : 0.0;
  out["cov_defined"] = opt.replications > 1;
  out["beta"] = finite_or_null(beta_from_pf(med));
  out["seed"] = opt.seed;
  write_json_file(opt.out_dir + "/static.json", out);
  return 0;
}

struct FitOptions {
  std::string config_path;
  std::string data_path;
  std::string out_dir = ".";
  std::uint64_t seed = 0;
};

int cmd_fit(const FitOptions& options, const CLI::App* cmd) {
  FitOptions opt = options;
  json cfg = json::object();
  if (!opt.config_path.empty()) cfg = load_config_file(opt.config_path);
  check_keys(cfg, {"data", "input_model", "train", "out", "seed"}, "fit config");
  cfg_get(cfg, "data", cmd, "--data", opt.data_path);
  cfg_get(cfg, "out", cmd, "--out", opt.out_dir);
  cfg_get(cfg, "seed", cmd, "--seed", opt.seed);
  TrainConfig train;
  if (cfg.contains("train")) train = train_from_json(cfg.at("train"));
  if (opt.data_path.empty()) throw std::runtime_error("fit: --data is required");
  if (!cfg.contains("input_model"))
    throw std::runtime_error("fit: config must define input_model");
  train.validate();

  Dataset ds = read_dataset_csv(opt.data_path);
  InputModel im = InputModel::from_json(cfg.at("input_model"));
  Rng rng = make_rng(derive_seed(opt.seed, 0));
  FitResult fit = fit_mle(ds.X, ds.y, im, train, rng);

  ensure_dir(opt.out_dir);
  fit.model.save(opt.out_dir + "/model.json");
  ordered_json diag;
  diag["n"] = ds.y.size();
  diag["dim"] = ds.X.cols();
  diag["selected_p"] = fit.diagnostics.selected_p;
  diag["selected_q"] = fit.diagnostics.selected_q;
  diag["selected_sigma"] = fit.diagnostics.selected_sigma;
  diag["n_basis"] = fit.model.index_set.size();
  diag["cv_loglik"] = fit.diagnostics.cv_loglik;
  diag["final_loglik"] = fit.diagnostics.final_loglik;
  diag["converged"] = fit.diagnostics.converged;
  diag["underdetermined"] = fit.diagnostics.underdetermined;
  diag["restarts_used"] = fit.diagnostics.restarts_used;
  diag["seed"] = opt.seed;
  ordered_json table = ordered_json::array();
  for (const auto& e : fit.diagnostics.cv_table) {
    ordered_json row;
    row["p"] = e.p;
    row["q"] = e.q;
    row["sigma"] = e.sigma;
    row["n_basis"] = e.n_basis;
    row["heldout_loglik"] = e.heldout_loglik;
    table.push_back(row);
  }
  diag["cv_table"] = table;
  write_json_file(opt.out_dir + "/fit.json", diag);
  return 0;
}

struct EvalSOptions {
  std::string config_path;
  std::string model_path;
  std::string points_path;
  std::string out_file = "s.csv";
};

int cmd_eval_s(const EvalSOptions& options, const CLI::App* cmd) {
  EvalSOptions opt = options;
  json cfg = json::object();
  if (!opt.config_path.empty()) cfg = load_config_file(opt.config_path);
  check_keys(cfg, {"model", "points", "out"}, "eval-s config");
  cfg_get(cfg, "model", cmd, "--model", opt.model_path);
  cfg_get(cfg, "points", cmd, "--points", opt.points_path);
  cfg_get(cfg, "out", cmd, "--out", opt.out_file);
  if (opt.model_path.empty() || opt.points_path.empty())
    throw std::runtime_error("eval-s: --model and --points are required");

  SpceModel model = SpceModel::load(opt.model_path);
  Eigen::MatrixXd X = read_points_csv(opt.points_path);
  if (X.cols() != model.input_model.dim())
    throw std::runtime_error("eval-s: points dimension does not match the model");
  Eigen::VectorXd s = model.s_hat_batch(X);

  ensure_parent_dir(opt.out_file);
  std::ofstream out(opt.out_file);
  if (!out) throw std::runtime_error("cannot open for writing: " + opt.out_file);
  for (Eigen::Index c = 1; c <= X.cols(); ++c) out << "x_" << c << ",";
  out << "s\n";
  for (Eigen::Index r = 0; r < X.rows(); ++r) {
    for (Eigen::Index c = 0; c < X.cols(); ++c) out << format_double(X(r, c)) << ",";
    out << format_double(s[r]) << "\n";
  }
  return 0;
}

struct DatasetStatsOptions {
  std::string config_path;
  std::string data_path;
  std::string out_file = "dataset_stats.csv";
  int column = 1;
  double delta = 0.1;
  std::vector<double> alphas = {0.05, 0.95};
  std::vector<double> queries;
  int grid = 25;
};

int cmd_dataset_stats(const DatasetStatsOptions& options, const CLI::App* cmd) {
  DatasetStatsOptions opt = options;
  json cfg = json::object();
  if (!opt.config_path.empty()) cfg = load_config_file(opt.config_path);
  check_keys(cfg, {"data", "out", "column", "delta", "alphas", "queries", "grid"},
             "dataset-stats config");
  cfg_get(cfg, "data", cmd, "--data", opt.data_path);
  cfg_get(cfg, "out", cmd, "--out", opt.out_file);
  cfg_get(cfg, "column", cmd, "--column", opt.column);
  cfg_get(cfg, "delta", cmd, "--delta", opt.delta);
  cfg_get(cfg, "alphas", cmd, "--alphas", opt.alphas);
  cfg_get(cfg, "queries", cmd, "--queries", opt.queries);
  cfg_get(cfg, "grid", cmd, "--grid", opt.grid);
  if (opt.data_path.empty()) throw std::runtime_error("dataset-stats: --data is required");
  if (opt.grid < 1) throw std::runtime_error("dataset-stats: grid >= 1 required");

  Dataset ds = read_dataset_csv(opt.data_path);
  if (opt.column < 1 || opt.column > ds.X.cols())
    throw std::runtime_error("dataset-stats: column out of range");
  Eigen::VectorXd u = ds.X.col(opt.column - 1);

  std::vector<double> queries = opt.queries;
  if (queries.empty()) {
    const double lo = u.minCoeff();
    const double hi = u.maxCoeff();
    if (opt.grid == 1) {
      queries.push_back(0.5 * (lo + hi));
    } else {
      for (int i = 0; i < opt.grid; ++i)
        queries.push_back(lo + (hi - lo) * static_cast<double>(i) /
                                   static_cast<double>(opt.grid - 1));
    }
  }

  ensure_parent_dir(opt.out_file);
  std::ofstream out(opt.out_file);
  if (!out) throw std::runtime_error("cannot open for writing: " + opt.out_file);
  out << "u,n_window,mean,variance";
  for (double a : opt.alphas) out << ",q_" << format_double(a);
  out << "\n";
  int skipped = 0;
  for (double q : queries) {
    try {
      WindowStats ws = moving_window_stats(u, ds.y, q, opt.delta, opt.alphas);
      out << format_double(q) << "," << ws.n_window << "," << format_double(ws.mean) << ","
          << format_double(ws.variance);
      for (double v : ws.quantiles) out << "," << format_double(v);
      out << "\n";
    } catch (const std::invalid_argument&) {
      ++skipped;
    }
  }
  if (skipped > 0)
    std::cerr << "dataset-stats: skipped " << skipped
              << " query point(s) with fewer than 2 observations in window\n";
  return 0;
}

}  // namespace

int run_cli(int argc, char** argv) {
  CLI::App app{"Stochastic emulator reliability toolkit"};
  app.require_subcommand(1);
  int exit_code = 0;

  AlRunOptions al_opt;
  auto* al = app.add_subcommand("al-run", "Active-learning failure probability estimation");
  al->add_option("--config", al_opt.config_path, "JSON config file");
  al->add_option("--testbed", al_opt.testbed, "Built-in simulator: rs, sir, toy");
  al->add_option("--dataset", al_opt.dataset, "Dataset CSV served through the adapter");
  al->add_option("--i-lim", al_opt.i_lim, "Failure threshold for the sir testbed");
  al->add_option("--delta", al_opt.delta, "Dataset adapter match radius (0 = default)");
  al->add_option("--n-initial", al_opt.al.n_initial, "Initial LHS design size");
  al->add_option("--batch-size", al_opt.al.batch_size, "Points added per iteration");
  al->add_option("--budget", al_opt.al.budget, "Total simulator call budget");
  al->add_option("--n-candidates", al_opt.al.n_candidates, "Candidate pool size");
  al->add_option("--n-mc", al_opt.al.n_mc, "Monte Carlo sample size");
  al->add_option("--ensemble-size", al_opt.al.ensemble_size, "Coefficient draws per iteration");
  al->add_option("--replications", al_opt.replications, "Independent repetitions");
  al->add_option("--checkpoints", al_opt.checkpoints, "Budgets reported in the summary")
      ->delimiter(',');
  al->add_option("--out", al_opt.out_dir, "Output directory");
  al->add_option("--seed", al_opt.seed, "Master seed")->required();
  al->add_option("--jobs", al_opt.jobs, "Parallel replications");
  al->callback([&]() { exit_code = cmd_al_run(al_opt, al); });

  McsOptions mcs_opt;
  auto* mcs = app.add_subcommand("mcs", "Indicator Monte Carlo reference estimate");
  mcs->add_option("--config", mcs_opt.config_path, "JSON config file");
  mcs->add_option("--testbed", mcs_opt.testbed, "Built-in simulator: rs, sir, toy");
  mcs->add_option("--i-lim", mcs_opt.i_lim, "Failure threshold for the sir testbed");
  mcs->add_option("--n", mcs_opt.n, "Sample size");
  mcs->add_option("--out", mcs_opt.out_dir, "Output directory");
  mcs->add_option("--seed", mcs_opt.seed, "Master seed")->required();
  mcs->callback([&]() { exit_code = cmd_mcs(mcs_opt, mcs); });

  StaticFitOptions st_opt;
  auto* st = app.add_subcommand("static-fit", "One-shot LHS design, fit, and estimate");
  st->add_option("--config", st_opt.config_path, "JSON config file");
  st->add_option("--testbed", st_opt.testbed, "Built-in simulator: rs, sir, toy");
  st->add_option("--dataset", st_opt.dataset, "Dataset CSV served through the adapter");
  st->add_option("--i-lim", st_opt.i_lim, "Failure threshold for the sir testbed");
  st->add_option("--delta", st_opt.delta, "Dataset adapter match radius (0 = default)");
  st->add_option("--n", st_opt.n_design, "Design size");
  st->add_option("--n-mc", st_opt.n_mc, "Monte Carlo sample size");
  st->add_option("--replications", st_opt.replications, "Independent repetitions");
  st->add_option("--out", st_opt.out_dir, "Output directory");
  st->add_option("--seed", st_opt.seed, "Master seed")->required();
  st->add_option("--jobs", st_opt.jobs, "Parallel replications");
  st->callback([&]() { exit_code = cmd_static_fit(st_opt, st); });

  FitOptions fit_opt;
  auto* fit = app.add_subcommand("fit", "Fit an emulator to a dataset CSV");
  fit->add_option("--config", fit_opt.config_path, "JSON config file");
  fit->add_option("--data", fit_opt.data_path, "Dataset CSV (x_1..x_M,y)");
  fit->add_option("--out", fit_opt.out_dir, "Output directory");
  fit->add_option("--seed", fit_opt.seed, "Master seed")->required();
  fit->callback([&]() { exit_code = cmd_fit(fit_opt, fit); });

  EvalSOptions ev_opt;
  auto* ev = app.add_subcommand("eval-s", "Evaluate a model's conditional failure probability");
  ev->add_option("--config", ev_opt.config_path, "JSON config file");
  ev->add_option("--model", ev_opt.model_path, "Model JSON from fit/al-run");
  ev->add_option("--points", ev_opt.points_path, "Points CSV (x_1..x_M, optional y)");
  ev->add_option("--out", ev_opt.out_file, "Output CSV path");
  ev->callback([&]() { exit_code = cmd_eval_s(ev_opt, ev); });

  DatasetStatsOptions dsp_opt;
  auto* dsp = app.add_subcommand("dataset-stats", "Moving-window statistics of a dataset");
  dsp->add_option("--config", dsp_opt.config_path, "JSON config file");
  dsp->add_option("--data", dsp_opt.data_path, "Dataset CSV (x_1..x_M,y)");
  dsp->add_option("--column", dsp_opt.column, "1-based input column used as the window axis");
  dsp->add_option("--delta", dsp_opt.delta, "Window half-width");
  dsp->add_option("--alphas", dsp_opt.alphas, "Quantile levels")->delimiter(',');
  dsp->add_option("--queries", dsp_opt.queries, "Explicit query points")->delimiter(',');
  dsp->add_option("--grid", dsp_opt.grid, "Evenly spaced query count when no queries given");
  dsp->add_option("--out", dsp_opt.out_file, "Output CSV path");
  dsp->callback([&]() { exit_code = cmd_dataset_stats(dsp_opt, dsp); });

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return exit_code;
}

}  // namespace alspce
