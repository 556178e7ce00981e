#pragma once

// Active-learning driver: alternates fitting the stochastic emulator on the
// current experimental design with batch enrichment at the candidates where
// input density times ensemble variance of the conditional failure
// probability is largest.

#include <Eigen/Dense>
#include <cstdint>
#include <optional>
#include <memory>
#include <stdexcept>
#include <string>
#include <vector>

#include "alspce/distributions.hpp"
#include "alspce/mle_uncertainty.hpp"
#include "alspce/rng.hpp"
#include "alspce/spce.hpp"
#include "alspce/testbeds.hpp"

namespace alspce {

struct AlConfig {
  int n_initial = 0;        // initial LHS design size
  int batch_size = 5;       // points added per iteration
  int budget = 0;           // total simulator calls allowed
  int n_candidates = 10000; // candidate pool resampled each iteration
  long long n_mc = 100000;  // fixed Monte Carlo sample for the pf estimate
  int ensemble_size = 100;  // coefficient draws per iteration
  int damped_grid_size = 3; // noise grid size from iteration 2 on
  TrainConfig train;
  std::uint64_t seed = 0;

  void validate() const;
};

struct AlIterationRecord {
  int n_ed = 0;  // design size the fit used
  double sigma_eps = 0.0;
  double pf_raw = 0.0;
  double pf_smoothed = 0.0;
  // Queried batch inputs (empty on the final, non-enriching record). The
  // design rows store the realized inputs, which can differ for the dataset
  // adapter.
  Eigen::MatrixXd batch_inputs;
};

struct AlState {
  Eigen::MatrixXd ed_inputs;
  Eigen::VectorXd ed_responses;
  std::vector<int> ed_iteration;  // per-row enrichment tag, 0 for the initial design
  Eigen::MatrixXd mc_sample;      // drawn once, reused every iteration
  std::vector<AlIterationRecord> history;
  std::optional<SpceModel> model;  // empty only if aborted before the first fit
};

// Aborted run carrying everything computed so far.
class AlError : public std::runtime_error {
 public:
  AlError(const std::string& msg, AlState partial)
      : std::runtime_error(msg), partial_(std::make_shared<AlState>(std::move(partial))) {}
  const AlState& partial() const { return *partial_; }

 private:
  std::shared_ptr<AlState> partial_;
};

// Learning function: joint input density times ensemble variance of s-hat.
Eigen::VectorXd learning_scores(const CoefficientEnsemble& ensemble,
                                const InputModel& input_model,
                                const Eigen::Ref<const Eigen::MatrixXd>& candidates);

// Log-spaced noise grid whose endpoints are exactly 0.95 and 1.05 times the
// previous estimate.
std::vector<double> damped_sigma_grid(double sigma_prev, int n_grid);

// Mean of the last (up to) three raw estimates.
double smooth_pf(const std::vector<double>& raw_history);

// Runs the loop to the simulation budget. Deterministic given config.seed;
// all randomness comes from streams derived from it. A simulator failure is
// retried once, then the run aborts with AlError holding the partial state.
AlState run_active_loop(const AlConfig& config, StochasticSimulator& simulator,
                        const InputModel& input_model);

}  // namespace alspce
