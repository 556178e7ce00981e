#include <cmath>

#include "alspce/mle_uncertainty.hpp"
#include "doctest.h"
#include "test_util.hpp"

using namespace alspce;

namespace {

struct TrainedFixture {
  SpceModel model;
  Eigen::MatrixXd X;
  Eigen::VectorXd y;
};

// A small fitted model with a healthy information matrix.
TrainedFixture make_trained(int n = 300, std::uint64_t seed = 13) {
  TrainedFixture f;
  Rng rng = make_rng(seed);
  f.X.resize(n, 1);
  f.y.resize(n);
  const double sigma = 0.3;
  for (int i = 0; i < n; ++i) {
    f.X(i, 0) = uniform_ab(rng, 0.0, 1.0);
    f.y[i] = 1.0 + 2.0 * f.X(i, 0) + 0.5 * standard_normal(rng) + sigma * standard_normal(rng);
  }
  const InputModel im({Marginal::uniform(0.0, 1.0)});
  TrainConfig cfg;
  cfg.p_min = cfg.p_max = 1;
  cfg.q_grid = {1.0};
  cfg.sigma_grid = {sigma};
  cfg.n_folds = 3;
  cfg.restarts = 1;
  cfg.n_quad = 40;
  Rng fit_rng = make_rng(29);
  f.model = fit_mle(f.X, f.y, im, cfg, fit_rng).model;
  return f;
}

}  // namespace

TEST_CASE("model-level fisher information matches the workspace") {
  const TrainedFixture f = make_trained();
  const Eigen::MatrixXd info = fisher_information(f.model, f.X, f.y);
  REQUIRE(info.rows() == f.model.coeffs.size());
  CHECK((info - info.transpose()).lpNorm<Eigen::Infinity>() < 1e-10);

  // Independent route: rebuild the workspace by hand and compare.
  const Eigen::MatrixXd Xi = f.model.input_model.to_standard_batch(f.X);
  SpceWorkspace ws(f.model.index_set, Xi, f.y, f.model.augmented_families(),
                   f.model.quadrature());
  const Eigen::MatrixXd want = ws.fisher_information(f.model.coeffs, f.model.sigma_eps);
  CHECK((info - want).lpNorm<Eigen::Infinity>() < 1e-10);

  // And a finite-difference route on the model-level gradient.
  const Eigen::MatrixXd H = testutil::fd_hessian(
      [&](const Eigen::VectorXd& c) {
        SpceModel m2 = f.model;
        m2.coeffs = c;
        return grad_log_likelihood(m2, f.X, f.y);
      },
      f.model.coeffs);
  CHECK(((-H) - info).lpNorm<Eigen::Infinity>() < 1e-4 * H.lpNorm<Eigen::Infinity>());
}

TEST_CASE("sampled coefficients follow the asymptotic law") {
  const TrainedFixture f = make_trained();
  const Eigen::MatrixXd info = fisher_information(f.model, f.X, f.y);
  Rng rng = make_rng(77);
  const int m = 20000;
  const CoefficientEnsemble ens = sample_coefficients(f.model, info, m, rng);
  REQUIRE(ens.draws.rows() == m);
  REQUIRE(ens.draws.cols() == f.model.coeffs.size());
  CHECK(ens.model.coeffs == f.model.coeffs);

  // covariance is the inverse information (no jitter needed here).
  const Eigen::MatrixXd prod = ens.covariance * info;
  CHECK((prod - Eigen::MatrixXd::Identity(prod.rows(), prod.cols())).lpNorm<Eigen::Infinity>() <
        1e-6);

  // Empirical mean and covariance of the draws against the requested law.
  const Eigen::RowVectorXd mean = ens.draws.colwise().mean();
  const Eigen::MatrixXd centered = ens.draws.rowwise() - mean;
  const Eigen::MatrixXd cov_emp = centered.transpose() * centered / (m - 1);
  const double scale = ens.covariance.lpNorm<Eigen::Infinity>();
  CHECK((cov_emp - ens.covariance).lpNorm<Eigen::Infinity>() < 0.05 * scale);
  for (Eigen::Index k = 0; k < mean.size(); ++k) {
    const double se = std::sqrt(ens.covariance(k, k) / m);
    CHECK(std::abs(mean[k] - f.model.coeffs[k]) < 5.0 * se);
  }
}

TEST_CASE("sample_coefficients validates and regularizes") {
  const TrainedFixture f = make_trained(150, 31);
  const Eigen::MatrixXd info = fisher_information(f.model, f.X, f.y);
  Rng rng = make_rng(1);
  CHECK_THROWS(sample_coefficients(f.model, info, 0, rng));
  Eigen::MatrixXd wrong = info.topLeftCorner(2, 2);
  CHECK_THROWS(sample_coefficients(f.model, wrong, 10, rng));

  // A singular information matrix still yields usable draws via jitter.
  Eigen::MatrixXd singular = Eigen::MatrixXd::Zero(info.rows(), info.cols());
  singular(0, 0) = 1.0;
  const CoefficientEnsemble ens = sample_coefficients(f.model, singular, 50, rng);
  CHECK(ens.draws.allFinite());
  CHECK(ens.covariance.allFinite());
}

TEST_CASE("ensemble s matrix is s_hat of each draw") {
  const TrainedFixture f = make_trained(200, 41);
  const Eigen::MatrixXd info = fisher_information(f.model, f.X, f.y);
  Rng rng = make_rng(5);
  const CoefficientEnsemble ens = sample_coefficients(f.model, info, 7, rng);

  Eigen::MatrixXd Xq(4, 1);
  Xq << 0.1, 0.35, 0.6, 0.95;
  const Eigen::MatrixXd S = ensemble_s_matrix(ens, Xq);
  REQUIRE(S.rows() == 4);
  REQUIRE(S.cols() == 7);
  for (int k = 0; k < 7; ++k) {
    SpceModel mk = ens.model;
    mk.coeffs = ens.draws.row(k).transpose();
    for (int i = 0; i < 4; ++i)
      CHECK(S(i, k) == doctest::Approx(mk.s_hat(Xq.row(i))).epsilon(1e-12));
  }

  // variance_of_s is the rowwise unbiased variance of that matrix.
  const Eigen::VectorXd var = variance_of_s(ens, Xq);
  REQUIRE(var.size() == 4);
  for (int i = 0; i < 4; ++i) {
    const double mu = S.row(i).mean();
    const double want = (S.row(i).array() - mu).square().sum() / 6.0;
    CHECK(var[i] == doctest::Approx(want).epsilon(1e-12));
    CHECK(var[i] >= 0.0);
  }
}

TEST_CASE("ensemble sampling is deterministic per seed") {
  const TrainedFixture f = make_trained(150, 51);
  const Eigen::MatrixXd info = fisher_information(f.model, f.X, f.y);
  Rng r1 = make_rng(8), r2 = make_rng(8), r3 = make_rng(9);
  const CoefficientEnsemble a = sample_coefficients(f.model, info, 12, r1);
  const CoefficientEnsemble b = sample_coefficients(f.model, info, 12, r2);
  const CoefficientEnsemble c = sample_coefficients(f.model, info, 12, r3);
  CHECK(a.draws == b.draws);
  CHECK(a.draws != c.draws);
}
