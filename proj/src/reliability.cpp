#include "alspce/reliability.hpp"

#include <cmath>
#include <limits>
#include <stdexcept>

#include "alspce/special.hpp"

namespace alspce {

std::string estimator_name(PfEstimator e) {
  return e == PfEstimator::indicator ? "indicator" : "conditional";
}

double beta_from_pf(double pf) {
  if (!(pf >= 0.0 && pf <= 1.0)) throw std::invalid_argument("beta_from_pf: pf outside [0,1]");
  if (pf == 0.0) return std::numeric_limits<double>::infinity();
  if (pf == 1.0) return -std::numeric_limits<double>::infinity();
  return -normal_icdf(pf);
}

double PfEstimate::beta() const { return beta_from_pf(pf); }

PfEstimate mcs_indicator(const LimitState& simulator, const InputModel& input_model,
                         long long n, Rng& rng) {
  if (n < 1) throw std::invalid_argument("mcs_indicator: n >= 1 required");
  const int dim = input_model.dim();
  Eigen::RowVectorXd x(dim);
  long long failures = 0;
  for (long long i = 0; i < n; ++i) {
    for (int d = 0; d < dim; ++d) x[d] = input_model.marginal(d).sample(rng);
    if (simulator(x, rng) <= 0.0) ++failures;
  }
  PfEstimate est;
  est.estimator = PfEstimator::indicator;
  est.n_samples = n;
  est.pf = static_cast<double>(failures) / static_cast<double>(n);
  if (failures == 0) {
    est.cov = std::numeric_limits<double>::quiet_NaN();
    est.cov_defined = false;
  } else {
    est.cov = std::sqrt((1.0 - est.pf) / (est.pf * static_cast<double>(n)));
  }
  return est;
}

PfEstimate pf_from_s(const Eigen::Ref<const Eigen::VectorXd>& s_values) {
  const Eigen::Index n = s_values.size();
  if (n < 1) throw std::invalid_argument("pf_from_s: empty sample");
  if ((s_values.array() < 0.0).any() || (s_values.array() > 1.0).any() || !s_values.allFinite())
    throw std::invalid_argument("pf_from_s: s values outside [0,1]");
  PfEstimate est;
  est.estimator = PfEstimator::conditional;
  est.n_samples = static_cast<long long>(n);
  est.pf = s_values.mean();
  if (n < 2 || est.pf == 0.0) {
    est.cov = std::numeric_limits<double>::quiet_NaN();
    est.cov_defined = false;
  } else {
    const double var =
        (s_values.array() - est.pf).square().sum() / static_cast<double>(n - 1);
    est.cov = std::sqrt(var / static_cast<double>(n)) / est.pf;
  }
  return est;
}

PfEstimate pf_from_s(const SpceModel& model, const Eigen::Ref<const Eigen::MatrixXd>& mc_sample) {
  return pf_from_s(model.s_hat_batch(mc_sample));
}

}  // namespace alspce
