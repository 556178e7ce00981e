#include <pybind11/eigen.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <memory>
#include <stdexcept>

#include "alspce/active_loop.hpp"
#include "alspce/chaos_basis.hpp"
#include "alspce/distributions.hpp"
#include "alspce/io.hpp"
#include "alspce/kmedoids.hpp"
#include "alspce/mle_uncertainty.hpp"
#include "alspce/reliability.hpp"
#include "alspce/spce.hpp"
#include "alspce/testbeds.hpp"

namespace py = pybind11;
using namespace alspce;

namespace {

std::string latent_family_name(PolyFamily f) {
  return f == PolyFamily::hermite ? "gaussian" : "uniform";
}

PolyFamily latent_family_from(const std::string& name) {
  if (name == "gaussian") return PolyFamily::hermite;
  if (name == "uniform") return PolyFamily::legendre;
  throw std::invalid_argument("latent_family must be 'gaussian' or 'uniform'");
}

std::unique_ptr<StochasticSimulator> make_testbed(const std::string& name, double i_lim) {
  if (name == "rs") return std::make_unique<RsSimulator>();
  if (name == "sir") return std::make_unique<SirSimulator>(i_lim);
  if (name == "toy") return std::make_unique<ToySimulator>();
  throw std::invalid_argument("unknown testbed '" + name + "' (rs, sir, toy)");
}

py::dict diagnostics_dict(const FitDiagnostics& d) {
  py::dict out;
  out["selected_p"] = d.selected_p;
  out["selected_q"] = d.selected_q;
  out["selected_sigma"] = d.selected_sigma;
  out["cv_loglik"] = d.cv_loglik;
  out["final_loglik"] = d.final_loglik;
  out["underdetermined"] = d.underdetermined;
  out["converged"] = d.converged;
  out["restarts_used"] = d.restarts_used;
  py::list table;
  for (const auto& e : d.cv_table) {
    py::dict row;
    row["p"] = e.p;
    row["q"] = e.q;
    row["sigma"] = e.sigma;
    row["n_basis"] = static_cast<long long>(e.n_basis);
    row["heldout_loglik"] = e.heldout_loglik;
    table.append(row);
  }
  out["cv_table"] = table;
  return out;
}

}  // namespace

PYBIND11_MODULE(_core, m) {
  m.doc() = "Stochastic polynomial chaos emulators with active-learning reliability estimation";

  py::class_<Marginal>(m, "Marginal")
      .def_static("uniform", &Marginal::uniform, py::arg("a"), py::arg("b"))
      .def_static("gaussian", &Marginal::gaussian, py::arg("mu"), py::arg("sigma"))
      .def_static("lognormal", &Marginal::lognormal, py::arg("lambda_"), py::arg("zeta"))
      .def_static("lognormal_from_moments", &Marginal::lognormal_from_moments, py::arg("mean"),
                  py::arg("sd"))
      .def_static("exponential", &Marginal::exponential, py::arg("rate"))
      .def_property_readonly("family", [](const Marginal& mg) { return family_name(mg.family()); })
      .def_property_readonly("params", &Marginal::params)
      .def("pdf", &Marginal::pdf)
      .def("cdf", &Marginal::cdf)
      .def("icdf", &Marginal::icdf)
      .def("mean", &Marginal::mean)
      .def("stddev", &Marginal::stddev)
      .def("to_standard", &Marginal::to_standard)
      .def("from_standard", &Marginal::from_standard)
      .def("__repr__", [](const Marginal& mg) {
        std::string r = "Marginal(" + family_name(mg.family());
        for (double p : mg.params()) r += ", " + std::to_string(p);
        return r + ")";
      });

  py::class_<InputModel>(m, "InputModel")
      .def(py::init<std::vector<Marginal>>(), py::arg("marginals"))
      .def_property_readonly("dim", &InputModel::dim)
      .def("marginal", &InputModel::marginal, py::return_value_policy::reference_internal)
      .def("joint_pdf_batch", &InputModel::joint_pdf_batch, py::arg("X"))
      .def(
          "sample",
          [](const InputModel& im, Eigen::Index n, std::uint64_t seed) {
            Rng rng = make_rng(seed);
            return im.sample(n, rng);
          },
          py::arg("n"), py::arg("seed"))
      .def(
          "lhs_sample",
          [](const InputModel& im, Eigen::Index n, std::uint64_t seed) {
            Rng rng = make_rng(seed);
            return im.lhs_sample(n, rng);
          },
          py::arg("n"), py::arg("seed"))
      .def("to_standard", &InputModel::to_standard_batch, py::arg("X"))
      .def("from_standard", &InputModel::from_standard_batch, py::arg("Xi"))
      .def("to_json", [](const InputModel& im) { return im.to_json().dump(); })
      .def_static("from_json", [](const std::string& text) {
        return InputModel::from_json(nlohmann::json::parse(text));
      });

  m.def(
      "build_index_set",
      [](int dim, int p, double q) {
        MultiIndexSet s = build_index_set(dim, p, q);
        std::vector<std::vector<int>> out;
        for (const auto& mi : s.indices) out.push_back(mi);
        return out;
      },
      py::arg("dim"), py::arg("total_degree"), py::arg("q_norm") = 1.0,
      "Hyperbolic-truncation multi-index set in graded lexicographic order");

  py::class_<TrainConfig>(m, "TrainConfig")
      .def(py::init<>())
      .def_readwrite("p_min", &TrainConfig::p_min)
      .def_readwrite("p_max", &TrainConfig::p_max)
      .def_readwrite("q_grid", &TrainConfig::q_grid)
      .def_readwrite("sigma_grid", &TrainConfig::sigma_grid)
      .def_readwrite("sigma_grid_size", &TrainConfig::sigma_grid_size)
      .def_readwrite("n_folds", &TrainConfig::n_folds)
      .def_readwrite("restarts", &TrainConfig::restarts)
      .def_readwrite("n_quad", &TrainConfig::n_quad)
      .def_property(
          "latent_family",
          [](const TrainConfig& c) { return latent_family_name(c.latent_family); },
          [](TrainConfig& c, const std::string& name) { c.latent_family = latent_family_from(name); });

  py::class_<SpceModel>(m, "SpceModel")
      .def_property_readonly("coeffs", [](const SpceModel& mod) { return mod.coeffs; })
      .def_property_readonly("sigma_eps", [](const SpceModel& mod) { return mod.sigma_eps; })
      .def_property_readonly("n_quad", [](const SpceModel& mod) { return mod.n_quad; })
      .def_property_readonly("input_model", [](const SpceModel& mod) { return mod.input_model; })
      .def_property_readonly("latent_family",
                             [](const SpceModel& mod) { return latent_family_name(mod.latent_family); })
      .def_property_readonly("index_set",
                             [](const SpceModel& mod) {
                               std::vector<std::vector<int>> out;
                               for (const auto& mi : mod.index_set.indices) out.push_back(mi);
                               return out;
                             })
      .def("s_hat", &SpceModel::s_hat_batch, py::arg("X"),
           "Conditional failure probability at each input row")
      .def("conditional_mean",
           [](const SpceModel& mod, const Eigen::MatrixXd& X) {
             Eigen::VectorXd out(X.rows());
             for (Eigen::Index i = 0; i < X.rows(); ++i) out[i] = mod.conditional_mean(X.row(i));
             return out;
           })
      .def(
          "sample_response",
          [](const SpceModel& mod, const Eigen::RowVectorXd& x, Eigen::Index n,
             std::uint64_t seed) {
            Rng rng = make_rng(seed);
            return mod.sample_response(x, n, rng);
          },
          py::arg("x"), py::arg("n"), py::arg("seed"))
      .def("save", &SpceModel::save, py::arg("path"))
      .def_static("load", &SpceModel::load, py::arg("path"))
      .def("to_json", [](const SpceModel& mod) { return mod.to_json().dump(); });

  m.def(
      "fit",
      [](const Eigen::MatrixXd& X, const Eigen::VectorXd& y, const InputModel& im,
         const TrainConfig& cfg, std::uint64_t seed) {
        Rng rng = make_rng(seed);
        FitResult r = fit_mle(X, y, im, cfg, rng);
        return py::make_tuple(r.model, diagnostics_dict(r.diagnostics));
      },
      py::arg("X"), py::arg("y"), py::arg("input_model"),
      py::arg("config") = TrainConfig{}, py::arg("seed") = 0,
      "Maximum-likelihood training with CV model selection; returns (model, diagnostics)");

  m.def("log_likelihood", &log_likelihood, py::arg("model"), py::arg("X"), py::arg("y"));
  m.def("fisher_information", &fisher_information, py::arg("model"), py::arg("X"), py::arg("y"));

  py::class_<CoefficientEnsemble>(m, "CoefficientEnsemble")
      .def_property_readonly("draws", [](const CoefficientEnsemble& e) { return e.draws; })
      .def_property_readonly("covariance",
                             [](const CoefficientEnsemble& e) { return e.covariance; })
      .def("s_matrix", &ensemble_s_matrix, py::arg("X"),
           "s-hat per input row (rows) and coefficient draw (columns)")
      .def("variance_of_s", &variance_of_s, py::arg("X"));

  m.def(
      "sample_coefficients",
      [](const SpceModel& model, const Eigen::MatrixXd& info, int n_draws, std::uint64_t seed) {
        Rng rng = make_rng(seed);
        return sample_coefficients(model, info, n_draws, rng);
      },
      py::arg("model"), py::arg("info"), py::arg("n_draws"), py::arg("seed"));

  py::class_<PfEstimate>(m, "PfEstimate")
      .def_readonly("pf", &PfEstimate::pf)
      .def_readonly("cov", &PfEstimate::cov)
      .def_readonly("n_samples", &PfEstimate::n_samples)
      .def_readonly("cov_defined", &PfEstimate::cov_defined)
      .def_property_readonly("estimator",
                             [](const PfEstimate& e) { return estimator_name(e.estimator); })
      .def("beta", &PfEstimate::beta)
      .def("__repr__", [](const PfEstimate& e) {
        return "PfEstimate(pf=" + std::to_string(e.pf) + ", n=" + std::to_string(e.n_samples) +
               ", " + estimator_name(e.estimator) + ")";
      });

  m.def("beta_from_pf", &beta_from_pf, py::arg("pf"));
  m.def("pf_from_s", [](const Eigen::VectorXd& s) { return pf_from_s(s); }, py::arg("s_values"));
  m.def(
      "pf_from_model",
      [](const SpceModel& model, const Eigen::MatrixXd& mc) { return pf_from_s(model, mc); },
      py::arg("model"), py::arg("mc_sample"));

  py::class_<StochasticSimulator>(m, "StochasticSimulator")
      .def_property_readonly("input_dim", &StochasticSimulator::input_dim)
      .def(
          "evaluate",
          [](StochasticSimulator& sim, const Eigen::RowVectorXd& x, std::uint64_t seed) {
            Rng rng = make_rng(seed);
            SimEval ev = sim.evaluate(x, rng);
            return py::make_tuple(ev.realized_x, ev.y);
          },
          py::arg("x"), py::arg("seed"), "Returns (realized_x, y)");

  m.def("make_testbed", &make_testbed, py::arg("name"), py::arg("i_lim") = sir::kDefaultILim,
        "Built-in simulator by name: rs, sir, toy");
  m.def(
      "make_dataset_simulator",
      [](const Eigen::MatrixXd& X, const Eigen::VectorXd& y, double radius)
          -> std::unique_ptr<StochasticSimulator> {
        return std::make_unique<DatasetSimulator>(X, y, radius);
      },
      py::arg("X"), py::arg("y"), py::arg("radius") = 0.0);

  m.def("testbed_input_model", [](const std::string& name) {
    if (name == "rs") return rs::input_model();
    if (name == "sir") return sir::input_model();
    if (name == "toy") return toy::input_model();
    throw std::invalid_argument("unknown testbed '" + name + "' (rs, sir, toy)");
  });

  m.def(
      "mcs_indicator",
      [](StochasticSimulator& sim, const InputModel& im, long long n, std::uint64_t seed) {
        Rng rng = make_rng(seed);
        return mcs_indicator(
            [&sim](const Eigen::RowVectorXd& x, Rng& r) { return sim.evaluate(x, r).y; }, im, n,
            rng);
      },
      py::arg("simulator"), py::arg("input_model"), py::arg("n"), py::arg("seed"));

  m.def("rs_analytic_pf", &rs::analytic_pf);
  m.def("rs_analytic_beta", &rs::analytic_beta);
  m.def("rs_conditional_s", &rs::conditional_s, py::arg("r"), py::arg("s"));
  m.def("toy_conditional_s", &toy::conditional_s, py::arg("x"));
  m.def(
      "sir_simulate",
      [](long long s0, long long i0, double beta, double gamma, long long population,
         std::uint64_t seed) {
        Rng rng = make_rng(seed);
        return sir::simulate(s0, i0, beta, gamma, population, rng);
      },
      py::arg("s0"), py::arg("i0"), py::arg("beta"), py::arg("gamma"),
      py::arg("population") = sir::kPopulation, py::arg("seed") = 0);

  m.def(
      "moving_window_stats",
      [](const Eigen::VectorXd& u, const Eigen::VectorXd& y, double u_query, double delta,
         const std::vector<double>& alphas) {
        WindowStats ws = moving_window_stats(u, y, u_query, delta, alphas);
        py::dict out;
        out["mean"] = ws.mean;
        out["variance"] = ws.variance;
        out["quantiles"] = ws.quantiles;
        out["n_window"] = static_cast<long long>(ws.n_window);
        return out;
      },
      py::arg("u"), py::arg("y"), py::arg("u_query"), py::arg("delta"), py::arg("alphas"));

  py::class_<AlConfig>(m, "AlConfig")
      .def(py::init<>())
      .def_readwrite("n_initial", &AlConfig::n_initial)
      .def_readwrite("batch_size", &AlConfig::batch_size)
      .def_readwrite("budget", &AlConfig::budget)
      .def_readwrite("n_candidates", &AlConfig::n_candidates)
      .def_readwrite("n_mc", &AlConfig::n_mc)
      .def_readwrite("ensemble_size", &AlConfig::ensemble_size)
      .def_readwrite("damped_grid_size", &AlConfig::damped_grid_size)
      .def_readwrite("train", &AlConfig::train)
      .def_readwrite("seed", &AlConfig::seed);

  py::class_<AlIterationRecord>(m, "AlIterationRecord")
      .def_readonly("n_ed", &AlIterationRecord::n_ed)
      .def_readonly("sigma_eps", &AlIterationRecord::sigma_eps)
      .def_readonly("pf_raw", &AlIterationRecord::pf_raw)
      .def_readonly("pf_smoothed", &AlIterationRecord::pf_smoothed)
      .def_readonly("batch_inputs", &AlIterationRecord::batch_inputs);

  py::class_<AlState>(m, "AlState")
      .def_readonly("ed_inputs", &AlState::ed_inputs)
      .def_readonly("ed_responses", &AlState::ed_responses)
      .def_readonly("ed_iteration", &AlState::ed_iteration)
      .def_readonly("mc_sample", &AlState::mc_sample)
      .def_readonly("history", &AlState::history)
      .def_property_readonly("model", [](const AlState& s) -> py::object {
        if (!s.model) return py::none();
        return py::cast(*s.model);
      });

  m.def("run_active_loop", &run_active_loop, py::arg("config"), py::arg("simulator"),
        py::arg("input_model"),
        "Active-learning loop to the simulation budget; deterministic under config.seed");

  m.def("damped_sigma_grid", &damped_sigma_grid, py::arg("sigma_prev"), py::arg("n_grid") = 3);
  m.def("smooth_pf", &smooth_pf, py::arg("raw_history"));
  m.def("learning_scores", &learning_scores, py::arg("ensemble"), py::arg("input_model"),
        py::arg("candidates"));
  m.def(
      "select_batch",
      [](const Eigen::MatrixXd& points, const Eigen::VectorXd& scores, int k,
         std::uint64_t seed) {
        Rng rng = make_rng(seed);
        return select_batch(points, scores, k, rng);
      },
      py::arg("points"), py::arg("scores"), py::arg("k"), py::arg("seed"));

  m.def("read_dataset_csv", [](const std::string& path) {
    Dataset ds = read_dataset_csv(path);
    return py::make_tuple(ds.X, ds.y);
  });
  m.def("write_dataset_csv", &write_dataset_csv, py::arg("path"), py::arg("X"), py::arg("y"));
}
