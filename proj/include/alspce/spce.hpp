#pragma once

#include <Eigen/Core>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "alspce/chaos_basis.hpp"
#include "alspce/distributions.hpp"
#include "alspce/lbfgs.hpp"

namespace alspce {

// Polynomial chaos surrogate in the augmented space (inputs, latent): the
// response at x is coeffs . basis(x, U) + eps with U from the latent family
// and eps ~ N(0, sigma_eps^2). The conditional law of the response given x is
// therefore a continuous Gaussian mixture; all evaluations below discretize
// the mixture with an n_quad-point Gauss rule in the latent variable.
struct SpceModel {
  InputModel input_model;
  MultiIndexSet index_set;  // dimension = input dim + 1, last slot = latent degree
  Eigen::VectorXd coeffs;
  double sigma_eps = 0.0;
  PolyFamily latent_family = PolyFamily::hermite;
  int n_quad = 100;

  int input_dim() const { return input_model.dim(); }
  void validate() const;
  std::vector<PolyFamily> augmented_families() const;
  const QuadratureRule& quadrature() const;

  double conditional_mean(const Eigen::Ref<const Eigen::RowVectorXd>& x) const;
  double conditional_pdf(const Eigen::Ref<const Eigen::RowVectorXd>& x, double y) const;
  double conditional_cdf(const Eigen::Ref<const Eigen::RowVectorXd>& x, double y) const;
  // Conditional failure probability: mixture CDF at zero.
  double s_hat(const Eigen::Ref<const Eigen::RowVectorXd>& x) const;
  Eigen::VectorXd s_hat_batch(const Eigen::Ref<const Eigen::MatrixXd>& X) const;
  Eigen::VectorXd sample_response(const Eigen::Ref<const Eigen::RowVectorXd>& x,
                                  Eigen::Index n, Rng& rng) const;

  nlohmann::ordered_json to_json() const;
  static SpceModel from_json(const nlohmann::json& j);
  void save(const std::string& path) const;
  static SpceModel load(const std::string& path);

 private:
  // Rebuilt when n_quad changes; not thread-safe against concurrent mutation
  // of the public fields (trained models are treated as immutable).
  mutable std::shared_ptr<const QuadratureRule> quad_cache_;
};

// Splits the augmented design into the input-only factor B (the product of
// the first M univariate polynomials per basis function) and the latent
// degree of each basis function. The mixture means factor as
// mu(i,j) = sum_d T(i,d) L(j,d) with T(:,d) = sum_{k: deg_k = d} c_k B(:,k),
// which turns likelihood sweeps into two small matrix products.
struct LatentSplitDesign {
  Eigen::MatrixXd B;              // n x |A|
  std::vector<int> latent_degree;  // per basis function
  int max_latent_degree = 0;
  std::vector<std::vector<Eigen::Index>> cols_by_degree;
};

LatentSplitDesign latent_split_design(const MultiIndexSet& A,
                                      const Eigen::Ref<const Eigen::MatrixXd>& Xi_std,
                                      const std::vector<PolyFamily>& families);

// Quadrature mixture log-likelihood and its derivatives for one dataset and
// one basis. Holds preallocated scratch; value/gradient calls are therefore
// not thread-safe — use one workspace per thread.
class SpceWorkspace {
 public:
  SpceWorkspace(const MultiIndexSet& A, const Eigen::Ref<const Eigen::MatrixXd>& Xi_std,
                const Eigen::Ref<const Eigen::VectorXd>& y,
                const std::vector<PolyFamily>& aug_families, const QuadratureRule& quad);

  Eigen::Index n_points() const { return y_.size(); }
  Eigen::Index n_basis() const { return design_.B.cols(); }
  const LatentSplitDesign& design() const { return design_; }
  const Eigen::VectorXd& responses() const { return y_; }

  double log_likelihood(const Eigen::VectorXd& c, double sigma) const;
  double value_and_grad(const Eigen::VectorXd& c, double sigma, Eigen::VectorXd& grad) const;
  // Observed information for the coefficients at (c, sigma): minus the
  // analytic Hessian of log_likelihood. Symmetric by construction.
  Eigen::MatrixXd fisher_information(const Eigen::VectorXd& c, double sigma) const;

  // Ordinary least-squares fit of the latent-degree-0 (conditional mean)
  // columns; returns coefficients scattered into a full-length vector and the
  // residual RMS. Used for optimizer initialization and the sigma grid.
  Eigen::VectorXd ols_mean_init(double* residual_rms = nullptr) const;

 private:
  void compute_mixture(const Eigen::VectorXd& c, double sigma) const;

  LatentSplitDesign design_;
  Eigen::MatrixXd L_;  // n_quad x (max latent degree + 1)
  Eigen::VectorXd y_, log_w_;
  // scratch for the n x n_quad sweeps
  mutable Eigen::MatrixXd T_, Mu_, P_, V_, W_;
  mutable Eigen::VectorXd row_ll_, row_max_, row_sum_;
};

struct TrainConfig {
  int p_min = 1;
  int p_max = 3;
  std::vector<double> q_grid = {0.7, 0.8, 0.9, 1.0};
  // Noise grid in physical response units; empty selects the automatic grid
  // (log-spaced between 0.05 x mean-fit residual RMS and 1.0 x std(y)).
  std::vector<double> sigma_grid;
  int sigma_grid_size = 10;
  int n_folds = 5;
  int restarts = 2;  // perturbed extra starts for the final fit
  int n_quad = 100;
  PolyFamily latent_family = PolyFamily::hermite;
  LbfgsOptions optimizer;

  void validate() const;
};

struct CvEntry {
  int p = 0;
  double q = 0.0;
  double sigma = 0.0;
  Eigen::Index n_basis = 0;
  double heldout_loglik = 0.0;
};

struct FitDiagnostics {
  int selected_p = 0;
  double selected_q = 0.0;
  double selected_sigma = 0.0;
  double cv_loglik = 0.0;
  double final_loglik = 0.0;
  bool underdetermined = false;  // n < |A| of the selected basis
  bool converged = false;
  int restarts_used = 0;
  std::vector<CvEntry> cv_table;
};

struct FitResult {
  SpceModel model;
  FitDiagnostics diagnostics;
};

// Thrown when no optimizer start converges; carries the best iterate found.
class FitNonConvergence : public std::runtime_error {
 public:
  FitNonConvergence(std::string msg, FitResult best)
      : std::runtime_error(std::move(msg)), best_result(std::move(best)) {}
  FitResult best_result;
};

// Maximum likelihood training with model selection: every (p, q) basis and
// every grid noise level is scored by k-fold held-out log-likelihood, the
// winner refit on all data with restarts. Deterministic given the rng state.
FitResult fit_mle(const Eigen::Ref<const Eigen::MatrixXd>& X,
                  const Eigen::Ref<const Eigen::VectorXd>& y, const InputModel& input_model,
                  const TrainConfig& config, Rng& rng);

// Held-out selection of the noise level alone on a fixed basis (p, q taken
// from the config's p_max and last q entry). Grid must be sorted ascending;
// ties resolve to the earlier grid index.
double select_sigma(const Eigen::Ref<const Eigen::MatrixXd>& X,
                    const Eigen::Ref<const Eigen::VectorXd>& y, const InputModel& input_model,
                    const TrainConfig& config, const std::vector<double>& grid, Rng& rng);

// Convenience wrappers evaluating an existing model's likelihood on data.
double log_likelihood(const SpceModel& model, const Eigen::Ref<const Eigen::MatrixXd>& X,
                      const Eigen::Ref<const Eigen::VectorXd>& y);
Eigen::VectorXd grad_log_likelihood(const SpceModel& model,
                                    const Eigen::Ref<const Eigen::MatrixXd>& X,
                                    const Eigen::Ref<const Eigen::VectorXd>& y);

}  // namespace alspce
