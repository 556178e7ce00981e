#pragma once

// Failure-probability estimators: crude indicator Monte Carlo against the
// simulator, and the lower-variance conditional estimator that averages the
// conditional failure probability s(x) over an input sample.

#include <Eigen/Dense>
#include <functional>
#include <string>

#include "alspce/distributions.hpp"
#include "alspce/rng.hpp"
#include "alspce/spce.hpp"

namespace alspce {

enum class PfEstimator { indicator, conditional };

std::string estimator_name(PfEstimator e);

struct PfEstimate {
  double pf = 0.0;
  double cov = 0.0;
  long long n_samples = 0;
  PfEstimator estimator = PfEstimator::indicator;
  // False when the run cannot support a CoV (no failures observed, or a
  // single-sample conditional estimate).
  bool cov_defined = true;

  double beta() const;
};

// Generalized reliability index, -icdf(pf). Infinite at pf in {0, 1}.
double beta_from_pf(double pf);

using LimitState = std::function<double(const Eigen::RowVectorXd& x, Rng& rng)>;

// Crude MCS of P[g <= 0]: n fresh input draws, one latent realization each.
// CoV follows the binomial formula sqrt((1 - pf) / (pf n)); with zero observed
// failures pf is 0 and the CoV is flagged undefined.
PfEstimate mcs_indicator(const LimitState& simulator, const InputModel& input_model,
                         long long n, Rng& rng);

// Conditional estimator from precomputed s-values: pf is their mean, CoV is
// std(s) / (pf sqrt(n)).
PfEstimate pf_from_s(const Eigen::Ref<const Eigen::VectorXd>& s_values);

// Convenience overload evaluating a trained model over an input sample.
PfEstimate pf_from_s(const SpceModel& model, const Eigen::Ref<const Eigen::MatrixXd>& mc_sample);

}  // namespace alspce
