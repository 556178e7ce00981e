#include "alspce/mle_uncertainty.hpp"

#include <Eigen/Cholesky>
#include <Eigen/Eigenvalues>
#include <cmath>
#include <stdexcept>

#include "alspce/special.hpp"

namespace alspce {

Eigen::MatrixXd fisher_information(const SpceModel& model,
                                   const Eigen::Ref<const Eigen::MatrixXd>& X,
                                   const Eigen::Ref<const Eigen::VectorXd>& y) {
  model.validate();
  Eigen::MatrixXd Xi = model.input_model.to_standard_batch(X);
  SpceWorkspace ws(model.index_set, Xi, y, model.augmented_families(), model.quadrature());
  return ws.fisher_information(model.coeffs, model.sigma_eps);
}

CoefficientEnsemble sample_coefficients(const SpceModel& model,
                                        const Eigen::Ref<const Eigen::MatrixXd>& info,
                                        int m, Rng& rng) {
  if (m < 2) throw std::invalid_argument("sample_coefficients: m >= 2 required");
  const Eigen::Index na = model.coeffs.size();
  if (info.rows() != na || info.cols() != na)
    throw std::invalid_argument("sample_coefficients: information matrix size mismatch");
  if (!info.allFinite())
    throw std::invalid_argument("sample_coefficients: non-finite information matrix");

  Eigen::MatrixXd I_sym = 0.5 * (info + info.transpose());
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(I_sym, Eigen::EigenvaluesOnly);
  const double min_eig = es.eigenvalues().minCoeff();
  const double floor_eig = 1e-8 * I_sym.trace() / static_cast<double>(na);
  double jitter = min_eig < floor_eig ? (floor_eig - min_eig) : 0.0;

  Eigen::LLT<Eigen::MatrixXd> llt;
  for (int attempt = 0; attempt < 8; ++attempt) {
    Eigen::MatrixXd I_reg = I_sym;
    I_reg.diagonal().array() += jitter;
    llt.compute(I_reg);
    if (llt.info() == Eigen::Success) {
      CoefficientEnsemble ens;
      ens.model = model;
      ens.covariance = llt.solve(Eigen::MatrixXd::Identity(na, na));
      ens.covariance = 0.5 * (ens.covariance + ens.covariance.transpose()).eval();
      ens.draws.resize(m, na);
      Eigen::VectorXd z(na);
      for (int k = 0; k < m; ++k) {
        for (Eigen::Index a = 0; a < na; ++a) z[a] = standard_normal(rng);
        // x = U^-1 z has covariance (U'U)^-1 = I_reg^-1.
        ens.draws.row(k) =
            (model.coeffs + llt.matrixU().solve(z)).transpose();
      }
      return ens;
    }
    jitter = jitter > 0.0 ? jitter * 10.0 : std::max(floor_eig, 1e-300);
  }
  throw std::runtime_error(
      "sample_coefficients: factorization failed (min eigenvalue " +
      std::to_string(min_eig) + ", trace " + std::to_string(I_sym.trace()) + ")");
}

Eigen::MatrixXd ensemble_s_matrix(const CoefficientEnsemble& ensemble,
                                  const Eigen::Ref<const Eigen::MatrixXd>& X) {
  const SpceModel& model = ensemble.model;
  const Eigen::Index n = X.rows();
  const Eigen::Index m = ensemble.draws.rows();
  const auto& quad = model.quadrature();
  const Eigen::Index nq = quad.nodes.size();

  Eigen::MatrixXd Xi = model.input_model.to_standard_batch(X);
  LatentSplitDesign split = latent_split_design(model.index_set, Xi,
                                                model.augmented_families());
  const int D = split.max_latent_degree;
  Eigen::MatrixXd L = eval_poly_table(model.latent_family, D, quad.nodes);

  // One GEMM per latent degree: T_d = B(:, A_d) * draws(:, A_d)', then per
  // input row a small n_quad x m product against the latent table. This keeps
  // the m * n_quad mixture means out of memory all at once.
  std::vector<Eigen::MatrixXd> T(static_cast<std::size_t>(D) + 1);
  for (int d = 0; d <= D; ++d) {
    const auto& cols = split.cols_by_degree[static_cast<std::size_t>(d)];
    if (cols.empty()) {
      T[static_cast<std::size_t>(d)] = Eigen::MatrixXd::Zero(n, m);
      continue;
    }
    Eigen::MatrixXd Bd(n, static_cast<Eigen::Index>(cols.size()));
    Eigen::MatrixXd Cd(m, static_cast<Eigen::Index>(cols.size()));
    for (std::size_t j = 0; j < cols.size(); ++j) {
      Bd.col(static_cast<Eigen::Index>(j)) = split.B.col(cols[j]);
      Cd.col(static_cast<Eigen::Index>(j)) = ensemble.draws.col(cols[j]);
    }
    T[static_cast<std::size_t>(d)].noalias() = Bd * Cd.transpose();
  }

  Eigen::MatrixXd S(n, m);
  Eigen::MatrixXd Ti(D + 1, m), MuNodes(nq, m), Phi(nq, m);
  const double inv_sig = 1.0 / model.sigma_eps;
  for (Eigen::Index i = 0; i < n; ++i) {
    for (int d = 0; d <= D; ++d) Ti.row(d) = T[static_cast<std::size_t>(d)].row(i);
    MuNodes.noalias() = L * Ti;
    MuNodes *= -inv_sig;
    for (Eigen::Index k = 0; k < m; ++k)
      normal_cdf_batch(MuNodes.col(k).data(), Phi.col(k).data(), nq);
    S.row(i) = quad.weights.transpose() * Phi;
  }
  return S;
}

Eigen::VectorXd variance_of_s(const CoefficientEnsemble& ensemble,
                              const Eigen::Ref<const Eigen::MatrixXd>& X) {
  const Eigen::Index m = ensemble.draws.rows();
  if (m < 2) throw std::invalid_argument("variance_of_s: need >= 2 draws");
  Eigen::MatrixXd S = ensemble_s_matrix(ensemble, X);
  Eigen::VectorXd mean = S.rowwise().mean();
  Eigen::VectorXd var =
      (S.colwise() - mean).array().square().rowwise().sum() / static_cast<double>(m - 1);
  return var;
}

}  // namespace alspce
