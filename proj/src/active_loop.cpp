#include "alspce/active_loop.hpp"

#include <cmath>
#include <utility>

#include "alspce/kmedoids.hpp"
#include "alspce/special.hpp"

namespace alspce {

void AlConfig::validate() const {
  if (batch_size < 1) throw std::invalid_argument("AlConfig: batch_size >= 1 required");
  if (n_initial < batch_size)
    throw std::invalid_argument("AlConfig: n_initial >= batch_size required");
  if (budget < n_initial) throw std::invalid_argument("AlConfig: budget >= n_initial required");
  if (n_candidates < batch_size)
    throw std::invalid_argument("AlConfig: n_candidates >= batch_size required");
  if (n_mc < 1) throw std::invalid_argument("AlConfig: n_mc >= 1 required");
  if (ensemble_size < 2) throw std::invalid_argument("AlConfig: ensemble_size >= 2 required");
  if (damped_grid_size < 2)
    throw std::invalid_argument("AlConfig: damped_grid_size >= 2 required");
  train.validate();
}

Eigen::VectorXd learning_scores(const CoefficientEnsemble& ensemble,
                                const InputModel& input_model,
                                const Eigen::Ref<const Eigen::MatrixXd>& candidates) {
  Eigen::VectorXd density = input_model.joint_pdf_batch(candidates);
  Eigen::VectorXd var = variance_of_s(ensemble, candidates);
  return density.cwiseProduct(var);
}

std::vector<double> damped_sigma_grid(double sigma_prev, int n_grid) {
  if (!(sigma_prev > 0.0)) throw std::invalid_argument("damped_sigma_grid: sigma_prev > 0");
  if (n_grid < 2) throw std::invalid_argument("damped_sigma_grid: n_grid >= 2 required");
  std::vector<double> grid(static_cast<std::size_t>(n_grid));
  const double lo = 0.95 * sigma_prev;
  const double hi = 1.05 * sigma_prev;
  const double log_lo = std::log(lo);
  const double step = (std::log(hi) - log_lo) / static_cast<double>(n_grid - 1);
  // Endpoints are set directly so the damping ratio bound holds exactly.
  grid.front() = lo;
  grid.back() = hi;
  for (int i = 1; i + 1 < n_grid; ++i)
    grid[static_cast<std::size_t>(i)] = std::exp(log_lo + step * i);
  return grid;
}

double smooth_pf(const std::vector<double>& raw_history) {
  if (raw_history.empty()) throw std::invalid_argument("smooth_pf: empty history");
  const std::size_t w = std::min<std::size_t>(3, raw_history.size());
  double sum = 0.0;
  for (std::size_t i = raw_history.size() - w; i < raw_history.size(); ++i)
    sum += raw_history[i];
  return sum / static_cast<double>(w);
}

namespace {

// Stream indices under the run seed. Per-iteration streams are spaced so they
// can never collide with the fixed ones.
constexpr std::uint64_t kStreamLhs = 0;
constexpr std::uint64_t kStreamInitialSims = 1;
constexpr std::uint64_t kStreamMc = 2;
constexpr std::uint64_t iter_stream(int iteration, int role) {
  return 16 + 8 * static_cast<std::uint64_t>(iteration) + static_cast<std::uint64_t>(role);
}

SimEval evaluate_with_retry(StochasticSimulator& simulator,
                            const Eigen::Ref<const Eigen::RowVectorXd>& x,
                            std::uint64_t sim_master, std::uint64_t point_stream,
                            std::string* failure) {
  for (int attempt = 0; attempt < 2; ++attempt) {
    Rng rng = make_rng(derive_seed(sim_master, point_stream + 1000u * attempt));
    try {
      return simulator.evaluate(x, rng);
    } catch (const std::exception& e) {
      if (attempt == 1) *failure = e.what();
    }
  }
  return {};
}

}  // namespace

AlState run_active_loop(const AlConfig& config, StochasticSimulator& simulator,
                        const InputModel& input_model) {
  config.validate();
  if (simulator.input_dim() != input_model.dim())
    throw std::invalid_argument("run_active_loop: simulator/input dimension mismatch");
  const int dim = input_model.dim();
  const int k = config.batch_size;

  AlState state;
  state.ed_inputs.resize(config.budget, dim);
  state.ed_responses.resize(config.budget);
  state.ed_iteration.reserve(static_cast<std::size_t>(config.budget));

  {
    Rng lhs_rng = make_rng(derive_seed(config.seed, kStreamLhs));
    state.ed_inputs.topRows(config.n_initial) = input_model.lhs_sample(config.n_initial, lhs_rng);
  }
  const std::uint64_t init_sim_master = derive_seed(config.seed, kStreamInitialSims);
  for (int i = 0; i < config.n_initial; ++i) {
    std::string failure;
    SimEval ev = evaluate_with_retry(simulator, state.ed_inputs.row(i), init_sim_master,
                                     static_cast<std::uint64_t>(i), &failure);
    if (!failure.empty()) {
      state.ed_inputs.conservativeResize(i, dim);
      state.ed_responses.conservativeResize(i);
      throw AlError("initial design point " + std::to_string(i) + " failed twice: " + failure,
                    std::move(state));
    }
    state.ed_inputs.row(i) = ev.realized_x;
    state.ed_responses[i] = ev.y;
    state.ed_iteration.push_back(0);
  }

  {
    Rng mc_rng = make_rng(derive_seed(config.seed, kStreamMc));
    state.mc_sample = input_model.sample(config.n_mc, mc_rng);
  }

  int n_ed = config.n_initial;
  std::vector<double> raw_history;
  for (int iteration = 1;; ++iteration) {
    TrainConfig train = config.train;
    if (!raw_history.empty()) {
      // Damp the noise search around the previous estimate after the first fit.
      train.sigma_grid =
          damped_sigma_grid(state.model->sigma_eps, config.damped_grid_size);
    }
    Rng fit_rng = make_rng(derive_seed(config.seed, iter_stream(iteration, 0)));
    FitResult fit;
    try {
      fit = fit_mle(state.ed_inputs.topRows(n_ed), state.ed_responses.head(n_ed), input_model,
                    train, fit_rng);
    } catch (const FitNonConvergence& e) {
      state.ed_inputs.conservativeResize(n_ed, dim);
      state.ed_responses.conservativeResize(n_ed);
      state.model = e.best_result.model;
      throw AlError("fit did not converge at iteration " + std::to_string(iteration) + ": " +
                        e.what(),
                    std::move(state));
    }
    state.model = fit.model;

    AlIterationRecord rec;
    rec.n_ed = n_ed;
    rec.sigma_eps = fit.model.sigma_eps;
    rec.pf_raw = fit.model.s_hat_batch(state.mc_sample).mean();
    raw_history.push_back(rec.pf_raw);
    rec.pf_smoothed = smooth_pf(raw_history);
    state.history.push_back(rec);

    if (n_ed + k > config.budget) break;

    Eigen::MatrixXd info =
        fisher_information(fit.model, state.ed_inputs.topRows(n_ed), state.ed_responses.head(n_ed));
    Rng ens_rng = make_rng(derive_seed(config.seed, iter_stream(iteration, 1)));
    CoefficientEnsemble ensemble =
        sample_coefficients(fit.model, info, config.ensemble_size, ens_rng);

    Rng cand_rng = make_rng(derive_seed(config.seed, iter_stream(iteration, 2)));
    Eigen::MatrixXd candidates = input_model.sample(config.n_candidates, cand_rng);
    Eigen::VectorXd scores = learning_scores(ensemble, input_model, candidates);

    Rng med_rng = make_rng(derive_seed(config.seed, iter_stream(iteration, 3)));
    std::vector<int> batch =
        select_batch(input_model.to_standard_batch(candidates), scores, k, med_rng);

    state.history.back().batch_inputs.resize(k, dim);
    const std::uint64_t batch_sim_master = derive_seed(config.seed, iter_stream(iteration, 4));
    for (int b = 0; b < k; ++b) {
      const Eigen::RowVectorXd query = candidates.row(batch[static_cast<std::size_t>(b)]);
      state.history.back().batch_inputs.row(b) = query;
      std::string failure;
      SimEval ev = evaluate_with_retry(simulator, query, batch_sim_master,
                                       static_cast<std::uint64_t>(b), &failure);
      if (!failure.empty()) {
        state.ed_inputs.conservativeResize(n_ed, dim);
        state.ed_responses.conservativeResize(n_ed);
        throw AlError("batch point failed twice at iteration " + std::to_string(iteration) +
                          ": " + failure,
                      std::move(state));
      }
      state.ed_inputs.row(n_ed) = ev.realized_x;
      state.ed_responses[n_ed] = ev.y;
      state.ed_iteration.push_back(iteration);
      ++n_ed;
    }
  }

  state.ed_inputs.conservativeResize(n_ed, dim);
  state.ed_responses.conservativeResize(n_ed);
  return state;
}

}  // namespace alspce
