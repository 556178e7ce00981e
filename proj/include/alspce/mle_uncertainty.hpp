#pragma once

#include <Eigen/Core>

#include "alspce/spce.hpp"

namespace alspce {

// Gaussian approximation of the MLE coefficient distribution: draws from
// N(c_hat, I^-1) with I the (regularized) Fisher information. The noise level
// is not part of the ensemble; every draw keeps the fitted sigma_eps.
struct CoefficientEnsemble {
  SpceModel model;            // base model, coefficients at the MLE
  Eigen::MatrixXd draws;      // m x |A|
  Eigen::MatrixXd covariance; // regularized I^-1
};

// Observed information at the model's coefficients for the given data:
// minus the analytic Hessian of the quadrature log-likelihood.
Eigen::MatrixXd fisher_information(const SpceModel& model,
                                   const Eigen::Ref<const Eigen::MatrixXd>& X,
                                   const Eigen::Ref<const Eigen::VectorXd>& y);

// Draws m coefficient vectors. If the information matrix has an eigenvalue
// below 1e-8 * trace/|A|, diagonal jitter is added until the factorization
// succeeds (growing tenfold, a few attempts, then an error with condition
// diagnostics).
CoefficientEnsemble sample_coefficients(const SpceModel& model,
                                        const Eigen::Ref<const Eigen::MatrixXd>& info,
                                        int m, Rng& rng);

// Conditional failure probability of every ensemble member at every input
// row: entry (i,k) is s_hat of draw k at X.row(i).
Eigen::MatrixXd ensemble_s_matrix(const CoefficientEnsemble& ensemble,
                                  const Eigen::Ref<const Eigen::MatrixXd>& X);

// Unbiased sample variance over the ensemble of s_hat(x), per input row.
Eigen::VectorXd variance_of_s(const CoefficientEnsemble& ensemble,
                              const Eigen::Ref<const Eigen::MatrixXd>& X);

}  // namespace alspce
