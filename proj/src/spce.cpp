#include "alspce/spce.hpp"

#include <Eigen/Cholesky>
#include <Eigen/QR>
#include <algorithm>
#include <cmath>
#include <fstream>
#include <numeric>

#include "alspce/special.hpp"

namespace alspce {

// ---------------------------------------------------------------------------
// model

void SpceModel::validate() const {
  if (!(sigma_eps > 0.0) || !std::isfinite(sigma_eps))
    throw std::invalid_argument("SpceModel: sigma_eps must be > 0");
  if (index_set.dim != input_model.dim() + 1)
    throw std::invalid_argument("SpceModel: index set dimension must be input dim + 1");
  if (coeffs.size() != static_cast<Eigen::Index>(index_set.size()))
    throw std::invalid_argument("SpceModel: coefficient count must match basis size");
  if (n_quad < 1) throw std::invalid_argument("SpceModel: n_quad >= 1 required");
  if (index_set.indices.empty() ||
      !std::all_of(index_set.indices.front().begin(), index_set.indices.front().end(),
                   [](int a) { return a == 0; }))
    throw std::invalid_argument("SpceModel: index set must lead with the zero index");
  auto sorted = index_set.indices;
  std::sort(sorted.begin(), sorted.end());
  if (std::adjacent_find(sorted.begin(), sorted.end()) != sorted.end())
    throw std::invalid_argument("SpceModel: duplicate multi-indices");
}

std::vector<PolyFamily> SpceModel::augmented_families() const {
  std::vector<PolyFamily> fams = input_model.poly_families();
  fams.push_back(latent_family);
  return fams;
}

const QuadratureRule& SpceModel::quadrature() const {
  if (!quad_cache_ || quad_cache_->nodes.size() != n_quad ||
      quad_cache_->family != latent_family)
    quad_cache_ = std::make_shared<const QuadratureRule>(gauss_rule(latent_family, n_quad));
  return *quad_cache_;
}

namespace {

// Input-only basis values for a single standardized point.
Eigen::VectorXd xpart_row(const MultiIndexSet& A, const Eigen::RowVectorXd& xi,
                          const std::vector<PolyFamily>& fams) {
  const int m = A.dim - 1;
  Eigen::VectorXd b = Eigen::VectorXd::Ones(static_cast<Eigen::Index>(A.size()));
  for (std::size_t k = 0; k < A.size(); ++k)
    for (int j = 0; j < m; ++j) {
      int d = A.indices[k][static_cast<std::size_t>(j)];
      if (d > 0) b[static_cast<Eigen::Index>(k)] *= univariate_poly(fams[static_cast<std::size_t>(j)], d, xi[j]);
    }
  return b;
}

// Mixture means over the quadrature nodes for one point.
Eigen::VectorXd node_means(const SpceModel& model, const Eigen::RowVectorXd& x) {
  Eigen::RowVectorXd xi = model.input_model.to_standard(x);
  Eigen::VectorXd b = xpart_row(model.index_set, xi, model.augmented_families());
  const auto& quad = model.quadrature();
  int dmax = 0;
  for (const auto& alpha : model.index_set.indices) dmax = std::max(dmax, alpha.back());
  Eigen::MatrixXd L = eval_poly_table(model.latent_family, dmax, quad.nodes);
  Eigen::VectorXd t = Eigen::VectorXd::Zero(dmax + 1);
  for (std::size_t k = 0; k < model.index_set.size(); ++k)
    t[model.index_set.indices[k].back()] +=
        model.coeffs[static_cast<Eigen::Index>(k)] * b[static_cast<Eigen::Index>(k)];
  return L * t;
}

}  // namespace

double SpceModel::conditional_mean(const Eigen::Ref<const Eigen::RowVectorXd>& x) const {
  Eigen::RowVectorXd xi = input_model.to_standard(x);
  Eigen::VectorXd b = xpart_row(index_set, xi, augmented_families());
  double mean = 0.0;
  // Latent polynomials of positive degree and the additive noise both have
  // zero mean, so only the latent-degree-0 block contributes.
  for (std::size_t k = 0; k < index_set.size(); ++k)
    if (index_set.indices[k].back() == 0)
      mean += coeffs[static_cast<Eigen::Index>(k)] * b[static_cast<Eigen::Index>(k)];
  return mean;
}

double SpceModel::conditional_pdf(const Eigen::Ref<const Eigen::RowVectorXd>& x,
                                  double y) const {
  Eigen::VectorXd mu = node_means(*this, x);
  const auto& w = quadrature().weights;
  double acc = 0.0;
  for (Eigen::Index j = 0; j < mu.size(); ++j)
    acc += w[j] * normal_pdf((y - mu[j]) / sigma_eps);
  return acc / sigma_eps;
}

double SpceModel::conditional_cdf(const Eigen::Ref<const Eigen::RowVectorXd>& x,
                                  double y) const {
  Eigen::VectorXd mu = node_means(*this, x);
  const auto& w = quadrature().weights;
  double acc = 0.0;
  for (Eigen::Index j = 0; j < mu.size(); ++j)
    acc += w[j] * normal_cdf((y - mu[j]) / sigma_eps);
  return acc;
}

double SpceModel::s_hat(const Eigen::Ref<const Eigen::RowVectorXd>& x) const {
  return conditional_cdf(x, 0.0);
}

Eigen::VectorXd SpceModel::s_hat_batch(const Eigen::Ref<const Eigen::MatrixXd>& X) const {
  const auto& quad = quadrature();
  const Eigen::Index n = X.rows();
  const Eigen::Index nq = quad.nodes.size();
  Eigen::VectorXd out(n);

  // Chunked so the n x n_quad mean table stays cache-resident even for
  // Monte-Carlo-sized batches.
  const Eigen::Index chunk = 4096;
  Eigen::MatrixXd Mu, T, phi;
  for (Eigen::Index start = 0; start < n; start += chunk) {
    const Eigen::Index len = std::min(chunk, n - start);
    Eigen::MatrixXd Xi = input_model.to_standard_batch(X.middleRows(start, len));
    LatentSplitDesign split = latent_split_design(index_set, Xi, augmented_families());
    Eigen::MatrixXd L = eval_poly_table(latent_family, split.max_latent_degree, quad.nodes);
    T.setZero(len, split.max_latent_degree + 1);
    for (Eigen::Index k = 0; k < split.B.cols(); ++k)
      T.col(split.latent_degree[static_cast<std::size_t>(k)]) += coeffs[k] * split.B.col(k);
    Mu.resize(len, nq);
    Mu.noalias() = T * L.transpose();
    Mu /= -sigma_eps;  // arguments of Phi(-mu/sigma)
    phi.resize(len, nq);
    for (Eigen::Index j = 0; j < nq; ++j)
      normal_cdf_batch(Mu.col(j).data(), phi.col(j).data(), len);
    out.segment(start, len).noalias() = phi * quad.weights;
  }
  return out;
}

Eigen::VectorXd SpceModel::sample_response(const Eigen::Ref<const Eigen::RowVectorXd>& x,
                                           Eigen::Index n, Rng& rng) const {
  Eigen::RowVectorXd xi = input_model.to_standard(x);
  Eigen::VectorXd b = xpart_row(index_set, xi, augmented_families());
  int dmax = 0;
  for (const auto& alpha : index_set.indices) dmax = std::max(dmax, alpha.back());
  Eigen::VectorXd t = Eigen::VectorXd::Zero(dmax + 1);
  for (std::size_t k = 0; k < index_set.size(); ++k)
    t[index_set.indices[k].back()] +=
        coeffs[static_cast<Eigen::Index>(k)] * b[static_cast<Eigen::Index>(k)];

  Eigen::VectorXd out(n);
  for (Eigen::Index i = 0; i < n; ++i) {
    double u = latent_family == PolyFamily::hermite ? standard_normal(rng)
                                                    : uniform_ab(rng, -1.0, 1.0);
    double mu = 0.0;
    for (int d = 0; d <= dmax; ++d) mu += t[d] * univariate_poly(latent_family, d, u);
    out[i] = mu + sigma_eps * standard_normal(rng);
  }
  return out;
}

nlohmann::ordered_json SpceModel::to_json() const {
  nlohmann::ordered_json j;
  j["input_model"] = input_model.to_json();
  j["index_set"] = index_set.to_json();
  j["coeffs"] = std::vector<double>(coeffs.data(), coeffs.data() + coeffs.size());
  j["sigma_eps"] = sigma_eps;
  j["latent_family"] = latent_family == PolyFamily::hermite ? "gaussian" : "uniform";
  j["n_quad"] = n_quad;
  return j;
}

SpceModel SpceModel::from_json(const nlohmann::json& j) {
  static const std::vector<std::string> keys = {"input_model", "index_set",     "coeffs",
                                                "sigma_eps",   "latent_family", "n_quad"};
  if (!j.is_object()) throw std::invalid_argument("model JSON must be an object");
  for (auto it = j.begin(); it != j.end(); ++it)
    if (std::find(keys.begin(), keys.end(), it.key()) == keys.end())
      throw std::invalid_argument("model JSON: unknown key '" + it.key() + "'");
  for (const auto& k : keys)
    if (!j.contains(k)) throw std::invalid_argument("model JSON: missing key '" + k + "'");

  SpceModel m;
  m.input_model = InputModel::from_json(j.at("input_model"));
  m.index_set = MultiIndexSet::from_json(j.at("index_set"));
  std::vector<double> c = j.at("coeffs").get<std::vector<double>>();
  m.coeffs = Eigen::Map<Eigen::VectorXd>(c.data(), static_cast<Eigen::Index>(c.size()));
  m.sigma_eps = j.at("sigma_eps").get<double>();
  std::string fam = j.at("latent_family").get<std::string>();
  if (fam == "gaussian")
    m.latent_family = PolyFamily::hermite;
  else if (fam == "uniform")
    m.latent_family = PolyFamily::legendre;
  else
    throw std::invalid_argument("model JSON: latent_family must be gaussian or uniform");
  m.n_quad = j.at("n_quad").get<int>();
  m.validate();
  return m;
}

void SpceModel::save(const std::string& path) const {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot open for writing: " + path);
  out << to_json().dump(2) << "\n";
}

SpceModel SpceModel::load(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open: " + path);
  nlohmann::json j = nlohmann::json::parse(in);
  return from_json(j);
}

// ---------------------------------------------------------------------------
// workspace

LatentSplitDesign latent_split_design(const MultiIndexSet& A,
                                      const Eigen::Ref<const Eigen::MatrixXd>& Xi_std,
                                      const std::vector<PolyFamily>& families) {
  const int m = A.dim - 1;
  if (Xi_std.cols() != m || static_cast<int>(families.size()) != A.dim)
    throw std::invalid_argument("latent_split_design: dimension mismatch");

  std::vector<int> max_deg(static_cast<std::size_t>(m), 0);
  for (const auto& alpha : A.indices)
    for (int j = 0; j < m; ++j)
      max_deg[static_cast<std::size_t>(j)] =
          std::max(max_deg[static_cast<std::size_t>(j)], alpha[static_cast<std::size_t>(j)]);

  std::vector<Eigen::MatrixXd> tables;
  tables.reserve(static_cast<std::size_t>(m));
  for (int j = 0; j < m; ++j)
    tables.push_back(eval_poly_table(families[static_cast<std::size_t>(j)],
                                     max_deg[static_cast<std::size_t>(j)], Xi_std.col(j)));

  LatentSplitDesign out;
  out.B.resize(Xi_std.rows(), static_cast<Eigen::Index>(A.size()));
  out.latent_degree.resize(A.size());
  for (std::size_t k = 0; k < A.size(); ++k) {
    Eigen::VectorXd col = Eigen::VectorXd::Ones(Xi_std.rows());
    for (int j = 0; j < m; ++j) {
      int d = A.indices[k][static_cast<std::size_t>(j)];
      if (d > 0) col.array() *= tables[static_cast<std::size_t>(j)].col(d).array();
    }
    out.B.col(static_cast<Eigen::Index>(k)) = col;
    int ld = A.indices[k].back();
    out.latent_degree[k] = ld;
    out.max_latent_degree = std::max(out.max_latent_degree, ld);
  }
  out.cols_by_degree.assign(static_cast<std::size_t>(out.max_latent_degree) + 1, {});
  for (std::size_t k = 0; k < A.size(); ++k)
    out.cols_by_degree[static_cast<std::size_t>(out.latent_degree[k])].push_back(
        static_cast<Eigen::Index>(k));
  return out;
}

SpceWorkspace::SpceWorkspace(const MultiIndexSet& A,
                             const Eigen::Ref<const Eigen::MatrixXd>& Xi_std,
                             const Eigen::Ref<const Eigen::VectorXd>& y,
                             const std::vector<PolyFamily>& aug_families,
                             const QuadratureRule& quad)
    : design_(latent_split_design(A, Xi_std, aug_families)), y_(y) {
  if (y_.size() != Xi_std.rows())
    throw std::invalid_argument("SpceWorkspace: row count mismatch between inputs and y");
  if (y_.size() == 0) throw std::invalid_argument("SpceWorkspace: empty dataset");
  if (!y_.allFinite()) throw std::invalid_argument("SpceWorkspace: non-finite responses");
  L_ = eval_poly_table(quad.family, design_.max_latent_degree, quad.nodes);
  log_w_ = quad.weights.array().log();
  const Eigen::Index n = y_.size();
  const Eigen::Index nq = quad.nodes.size();
  T_.resize(n, design_.max_latent_degree + 1);
  Mu_.resize(n, nq);
  P_.resize(n, nq);
  W_.resize(n, nq);
  V_.resize(n, design_.max_latent_degree + 1);
  row_ll_.resize(n);
  row_max_.resize(n);
  row_sum_.resize(n);
}

void SpceWorkspace::compute_mixture(const Eigen::VectorXd& c, double sigma) const {
  if (c.size() != n_basis()) throw std::invalid_argument("coefficient size mismatch");
  if (!(sigma > 0.0)) throw std::invalid_argument("sigma must be > 0");
  if (!c.allFinite()) throw std::invalid_argument("non-finite coefficients");

  T_.setZero();
  for (Eigen::Index k = 0; k < c.size(); ++k)
    T_.col(design_.latent_degree[static_cast<std::size_t>(k)]) += c[k] * design_.B.col(k);
  Mu_.noalias() = T_ * L_.transpose();

  // W_ caches the scaled residuals (y - mu)/sigma; P_ holds the log mixture
  // terms first, then the softmax weights in place.
  W_ = (-Mu_).colwise() + y_;
  W_ /= sigma;
  P_ = (-0.5 * W_.array().square()).matrix();
  P_.rowwise() += log_w_.transpose();
  row_max_ = P_.rowwise().maxCoeff();
  P_.colwise() -= row_max_;
  P_ = P_.array().exp().matrix();
  row_sum_ = P_.rowwise().sum();
  row_ll_ = row_max_.array() + row_sum_.array().log() - std::log(sigma) - 0.5 * kLog2Pi;
  P_.array().colwise() /= row_sum_.array();
}

double SpceWorkspace::log_likelihood(const Eigen::VectorXd& c, double sigma) const {
  compute_mixture(c, sigma);
  return row_ll_.sum();
}

double SpceWorkspace::value_and_grad(const Eigen::VectorXd& c, double sigma,
                                     Eigen::VectorXd& grad) const {
  compute_mixture(c, sigma);
  // d ll_i / d mu_ij = p_ij (y_i - mu_ij) / sigma^2 = p_ij r_ij / sigma
  V_.noalias() = (P_.cwiseProduct(W_) / sigma) * L_;
  grad.resize(n_basis());
  for (Eigen::Index k = 0; k < n_basis(); ++k)
    grad[k] = design_.B.col(k).dot(V_.col(design_.latent_degree[static_cast<std::size_t>(k)]));
  return row_ll_.sum();
}

Eigen::MatrixXd SpceWorkspace::fisher_information(const Eigen::VectorXd& c,
                                                  double sigma) const {
  compute_mixture(c, sigma);
  const Eigen::Index n = n_points();
  const Eigen::Index na = n_basis();
  const int D = design_.max_latent_degree;
  const double inv_s2 = 1.0 / (sigma * sigma);

  V_.noalias() = (P_.cwiseProduct(W_) / sigma) * L_;
  // Per-point score vectors: G(i,k) = B(i,k) V(i, deg_k).
  Eigen::MatrixXd G(n, na);
  for (Eigen::Index k = 0; k < na; ++k)
    G.col(k) =
        design_.B.col(k).cwiseProduct(V_.col(design_.latent_degree[static_cast<std::size_t>(k)]));

  // Curvature weights a_ij = p_ij (r_ij^2 - 1)/sigma^2, contracted against the
  // latent tables one degree pair at a time so the n x n_quad sweep stays a
  // sequence of GEMVs.
  Eigen::MatrixXd Amat = P_.cwiseProduct((W_.array().square() - 1.0).matrix()) * inv_s2;
  Eigen::MatrixXd info(na, na);
  info.setZero();
  for (int da = 0; da <= D; ++da) {
    for (int db = da; db <= D; ++db) {
      Eigen::VectorXd ldd = L_.col(da).cwiseProduct(L_.col(db));
      Eigen::VectorXd cv = Amat * ldd;  // length n
      for (Eigen::Index k : design_.cols_by_degree[static_cast<std::size_t>(da)]) {
        Eigen::VectorXd bk_cv = design_.B.col(k).cwiseProduct(cv);
        for (Eigen::Index l : design_.cols_by_degree[static_cast<std::size_t>(db)]) {
          double v = bk_cv.dot(design_.B.col(l));
          info(k, l) += v;
          if (da != db) info(l, k) += v;
        }
      }
    }
  }
  // info currently holds the curvature term of the Hessian; complete
  // -H = G'G - term1 and symmetrize away rounding.
  info = (G.transpose() * G - info).eval();
  info = 0.5 * (info + info.transpose()).eval();
  if (!info.allFinite()) throw std::runtime_error("fisher_information: non-finite entries");
  return info;
}

Eigen::VectorXd SpceWorkspace::ols_mean_init(double* residual_rms) const {
  const auto& mean_cols = design_.cols_by_degree[0];
  Eigen::MatrixXd B0(n_points(), static_cast<Eigen::Index>(mean_cols.size()));
  for (std::size_t i = 0; i < mean_cols.size(); ++i)
    B0.col(static_cast<Eigen::Index>(i)) = design_.B.col(mean_cols[i]);
  Eigen::VectorXd c0 = B0.colPivHouseholderQr().solve(y_);
  Eigen::VectorXd c = Eigen::VectorXd::Zero(n_basis());
  for (std::size_t i = 0; i < mean_cols.size(); ++i)
    c[mean_cols[i]] = c0[static_cast<Eigen::Index>(i)];
  if (residual_rms) {
    Eigen::VectorXd resid = y_ - B0 * c0;
    *residual_rms = std::sqrt(resid.squaredNorm() / static_cast<double>(n_points()));
  }
  return c;
}

// ---------------------------------------------------------------------------
// training

void TrainConfig::validate() const {
  if (p_min < 1) throw std::invalid_argument("TrainConfig: p_min >= 1 required");
  if (p_max < p_min) throw std::invalid_argument("TrainConfig: p_max >= p_min required");
  if (q_grid.empty()) throw std::invalid_argument("TrainConfig: q grid empty");
  for (double q : q_grid)
    if (!(q > 0.0 && q <= 1.0)) throw std::invalid_argument("TrainConfig: q in (0,1] required");
  if (sigma_grid.empty() && sigma_grid_size < 1)
    throw std::invalid_argument("TrainConfig: sigma grid size >= 1 required");
  for (double s : sigma_grid)
    if (!(s > 0.0)) throw std::invalid_argument("TrainConfig: sigma grid entries must be > 0");
  if (n_folds < 2) throw std::invalid_argument("TrainConfig: n_folds >= 2 required");
  if (restarts < 0) throw std::invalid_argument("TrainConfig: restarts >= 0 required");
  if (n_quad < 1) throw std::invalid_argument("TrainConfig: n_quad >= 1 required");
}

namespace {

struct Candidate {
  int p;
  double q;
  MultiIndexSet A;
};

std::vector<Candidate> build_candidates(const TrainConfig& cfg, int aug_dim) {
  std::vector<Candidate> out;
  for (int p = cfg.p_min; p <= cfg.p_max; ++p)
    for (double q : cfg.q_grid) {
      MultiIndexSet A = build_index_set(aug_dim, p, q);
      bool dup = false;
      for (const auto& c : out)
        if (c.A.indices == A.indices) {
          dup = true;
          break;
        }
      if (!dup) out.push_back({p, q, std::move(A)});
    }
  return out;
}

struct SingleFit {
  Eigen::VectorXd c;
  double loglik;
  bool converged;
};

SingleFit fit_at_sigma(const SpceWorkspace& ws, double sigma, const Eigen::VectorXd& c_init,
                       const LbfgsOptions& opt) {
  auto objective = [&](const Eigen::VectorXd& c, Eigen::VectorXd& grad) {
    double ll = ws.value_and_grad(c, sigma, grad);
    grad = -grad;
    return -ll;
  };
  LbfgsResult r = lbfgs_minimize(objective, c_init, opt);
  return {std::move(r.x), -r.f, r.converged};
}

// OLS initialization with the latent-linear coefficient seeded from the
// residual spread: starting all latent coefficients at zero is a stationary
// point of the likelihood (odd latent polynomials have zero mean), so the
// optimizer needs a push off that ridge.
Eigen::VectorXd initial_point(const SpceWorkspace& ws, double sigma) {
  double rms = 0.0;
  Eigen::VectorXd c = ws.ols_mean_init(&rms);
  double rv = rms * rms;
  double seed2 = std::max(rv - sigma * sigma, 0.01 * rv);
  Eigen::Index lat_lin = -1;
  if (ws.design().cols_by_degree.size() > 1 && !ws.design().cols_by_degree[1].empty())
    lat_lin = ws.design().cols_by_degree[1].front();
  if (lat_lin >= 0) c[lat_lin] = std::sqrt(std::max(seed2, 1e-12));
  return c;
}

std::vector<std::vector<Eigen::Index>> make_folds(Eigen::Index n, int k, Rng& rng) {
  std::vector<Eigen::Index> idx(static_cast<std::size_t>(n));
  std::iota(idx.begin(), idx.end(), Eigen::Index{0});
  shuffle_indices(idx, rng);
  std::vector<std::vector<Eigen::Index>> folds(static_cast<std::size_t>(k));
  for (Eigen::Index i = 0; i < n; ++i)
    folds[static_cast<std::size_t>(i % k)].push_back(idx[static_cast<std::size_t>(i)]);
  return folds;
}

Eigen::MatrixXd take_rows(const Eigen::MatrixXd& X, const std::vector<Eigen::Index>& rows) {
  Eigen::MatrixXd out(static_cast<Eigen::Index>(rows.size()), X.cols());
  for (std::size_t i = 0; i < rows.size(); ++i)
    out.row(static_cast<Eigen::Index>(i)) = X.row(rows[i]);
  return out;
}

Eigen::VectorXd take_elems(const Eigen::VectorXd& y, const std::vector<Eigen::Index>& rows) {
  Eigen::VectorXd out(static_cast<Eigen::Index>(rows.size()));
  for (std::size_t i = 0; i < rows.size(); ++i) out[static_cast<Eigen::Index>(i)] = y[rows[i]];
  return out;
}

}  // namespace

FitResult fit_mle(const Eigen::Ref<const Eigen::MatrixXd>& X,
                  const Eigen::Ref<const Eigen::VectorXd>& y, const InputModel& input_model,
                  const TrainConfig& config, Rng& rng) {
  config.validate();
  if (X.rows() != y.size()) throw std::invalid_argument("fit_mle: X/y row mismatch");
  if (X.cols() != input_model.dim()) throw std::invalid_argument("fit_mle: X dim mismatch");
  if (y.size() < 2) throw std::invalid_argument("fit_mle: need at least 2 points");
  if (!y.allFinite()) throw std::invalid_argument("fit_mle: non-finite responses");

  const Eigen::Index n = y.size();
  const int aug_dim = input_model.dim() + 1;
  Eigen::MatrixXd Xi = input_model.to_standard_batch(X);

  // Internal standardization of the response; undone on the way out.
  const double y_mean = y.mean();
  double y_sd = std::sqrt((y.array() - y_mean).square().sum() / static_cast<double>(n - 1));
  const bool degenerate = !(y_sd > 1e-300);
  const double y_scale = degenerate ? 1.0 : y_sd;
  Eigen::VectorXd yt = (y.array() - y_mean) / y_scale;

  std::vector<Candidate> candidates = build_candidates(config, aug_dim);
  QuadratureRule quad = gauss_rule(config.latent_family, config.n_quad);
  std::vector<PolyFamily> fams = input_model.poly_families();
  fams.push_back(config.latent_family);

  // Noise grid, internally in standardized units; reported in physical units.
  std::vector<double> sigma_orig, sigma_std;
  if (!config.sigma_grid.empty()) {
    sigma_orig = config.sigma_grid;
    for (double s : sigma_orig) sigma_std.push_back(s / y_scale);
  } else if (degenerate) {
    sigma_orig = {1e-8 * std::max(1.0, std::abs(y_mean))};
    sigma_std = sigma_orig;
  } else {
    // Residual spread of the mean-only fit on the richest candidate basis.
    const Candidate* big = &candidates.front();
    for (const auto& c : candidates)
      if (c.A.size() > big->A.size()) big = &c;
    SpceWorkspace ws_full(big->A, Xi, yt, fams, quad);
    double rms = 0.0;
    ws_full.ols_mean_init(&rms);
    double lo = std::max(0.05 * rms, 1e-6);
    double hi = 1.0;  // std(yt) by construction
    if (lo >= hi) lo = 0.5 * hi;
    int g = config.sigma_grid_size;
    for (int i = 0; i < g; ++i) {
      double f = g == 1 ? 0.5 : static_cast<double>(i) / static_cast<double>(g - 1);
      sigma_std.push_back(std::exp(std::log(lo) + f * (std::log(hi) - std::log(lo))));
      sigma_orig.push_back(sigma_std.back() * y_scale);
    }
  }

  // Shared folds across every (p, q, sigma) triple keep the comparison fair.
  const int k_folds = static_cast<int>(std::min<Eigen::Index>(config.n_folds, n));
  std::vector<std::vector<Eigen::Index>> folds = make_folds(n, k_folds, rng);

  struct Score {
    double heldout = 0.0;
  };
  std::vector<std::vector<Score>> scores(candidates.size(),
                                         std::vector<Score>(sigma_std.size()));

  for (std::size_t ci = 0; ci < candidates.size(); ++ci) {
    const auto& cand = candidates[ci];
    for (std::size_t f = 0; f < folds.size(); ++f) {
      std::vector<Eigen::Index> train_rows;
      for (std::size_t g = 0; g < folds.size(); ++g)
        if (g != f) train_rows.insert(train_rows.end(), folds[g].begin(), folds[g].end());
      if (train_rows.empty() || folds[f].empty()) continue;
      Eigen::MatrixXd Xi_tr = take_rows(Xi, train_rows);
      Eigen::VectorXd y_tr = take_elems(yt, train_rows);
      Eigen::MatrixXd Xi_te = take_rows(Xi, folds[f]);
      Eigen::VectorXd y_te = take_elems(yt, folds[f]);
      SpceWorkspace ws_tr(cand.A, Xi_tr, y_tr, fams, quad);
      SpceWorkspace ws_te(cand.A, Xi_te, y_te, fams, quad);
      Eigen::VectorXd warm;
      for (std::size_t si = 0; si < sigma_std.size(); ++si) {
        Eigen::VectorXd c0 = warm.size() > 0 ? warm : initial_point(ws_tr, sigma_std[si]);
        SingleFit fit = fit_at_sigma(ws_tr, sigma_std[si], c0, config.optimizer);
        warm = fit.c;
        scores[ci][si].heldout += ws_te.log_likelihood(fit.c, sigma_std[si]);
      }
    }
  }

  // Winner: max held-out log-likelihood; ties prefer the smaller basis, then
  // the earlier sigma grid index, then candidate order.
  std::size_t best_c = 0, best_s = 0;
  bool first = true;
  double best_ll = 0.0;
  for (std::size_t ci = 0; ci < candidates.size(); ++ci)
    for (std::size_t si = 0; si < sigma_std.size(); ++si) {
      double ll = scores[ci][si].heldout;
      bool better = first || ll > best_ll ||
                    (ll == best_ll && candidates[ci].A.size() < candidates[best_c].A.size());
      if (better) {
        best_ll = ll;
        best_c = ci;
        best_s = si;
        first = false;
      }
    }

  const Candidate& win = candidates[best_c];
  const double sig_std = sigma_std[best_s];
  SpceWorkspace ws(win.A, Xi, yt, fams, quad);

  double base_rms = 0.0;
  ws.ols_mean_init(&base_rms);  // only the residual scale is needed here
  SingleFit best_fit{Eigen::VectorXd(), -std::numeric_limits<double>::infinity(), false};
  bool any_converged = false;
  int starts = 1 + config.restarts;
  for (int s = 0; s < starts; ++s) {
    Eigen::VectorXd c0 = initial_point(ws, sig_std);
    if (s > 0) {
      double scale = 0.1 * std::max(base_rms, 0.05);
      for (Eigen::Index k = 0; k < c0.size(); ++k) c0[k] += scale * standard_normal(rng);
    }
    SingleFit fit = fit_at_sigma(ws, sig_std, c0, config.optimizer);
    any_converged = any_converged || fit.converged;
    if (fit.loglik > best_fit.loglik) best_fit = std::move(fit);
  }

  SpceModel model;
  model.input_model = input_model;
  model.index_set = win.A;
  model.coeffs = best_fit.c * y_scale;
  model.coeffs[0] += y_mean;  // graded-lex puts the zero index first
  model.sigma_eps = sigma_orig[best_s];
  model.latent_family = config.latent_family;
  model.n_quad = config.n_quad;
  model.validate();

  FitDiagnostics diag;
  diag.selected_p = win.p;
  diag.selected_q = win.q;
  diag.selected_sigma = sigma_orig[best_s];
  const double log_jacobian = static_cast<double>(n) * std::log(y_scale);
  diag.cv_loglik = best_ll - log_jacobian;
  diag.final_loglik = best_fit.loglik - log_jacobian;
  diag.underdetermined = n < static_cast<Eigen::Index>(win.A.size());
  diag.converged = any_converged;
  diag.restarts_used = starts - 1;
  for (std::size_t ci = 0; ci < candidates.size(); ++ci)
    for (std::size_t si = 0; si < sigma_std.size(); ++si)
      diag.cv_table.push_back({candidates[ci].p, candidates[ci].q, sigma_orig[si],
                               static_cast<Eigen::Index>(candidates[ci].A.size()),
                               scores[ci][si].heldout - log_jacobian});

  FitResult result{std::move(model), std::move(diag)};
  if (!any_converged)
    throw FitNonConvergence("fit_mle: optimizer failed to converge from every start",
                            std::move(result));
  return result;
}

double select_sigma(const Eigen::Ref<const Eigen::MatrixXd>& X,
                    const Eigen::Ref<const Eigen::VectorXd>& y, const InputModel& input_model,
                    const TrainConfig& config, const std::vector<double>& grid, Rng& rng) {
  if (grid.empty()) throw std::invalid_argument("select_sigma: empty grid");
  if (!std::is_sorted(grid.begin(), grid.end()))
    throw std::invalid_argument("select_sigma: grid must be sorted ascending");
  TrainConfig cfg = config;
  cfg.p_min = cfg.p_max;
  cfg.q_grid = {config.q_grid.back()};
  cfg.sigma_grid = grid;
  cfg.restarts = 0;
  FitResult r = fit_mle(X, y, input_model, cfg, rng);
  return r.diagnostics.selected_sigma;
}

double log_likelihood(const SpceModel& model, const Eigen::Ref<const Eigen::MatrixXd>& X,
                      const Eigen::Ref<const Eigen::VectorXd>& y) {
  model.validate();
  Eigen::MatrixXd Xi = model.input_model.to_standard_batch(X);
  SpceWorkspace ws(model.index_set, Xi, y, model.augmented_families(), model.quadrature());
  return ws.log_likelihood(model.coeffs, model.sigma_eps);
}

Eigen::VectorXd grad_log_likelihood(const SpceModel& model,
                                    const Eigen::Ref<const Eigen::MatrixXd>& X,
                                    const Eigen::Ref<const Eigen::VectorXd>& y) {
  model.validate();
  Eigen::MatrixXd Xi = model.input_model.to_standard_batch(X);
  SpceWorkspace ws(model.index_set, Xi, y, model.augmented_families(), model.quadrature());
  Eigen::VectorXd grad;
  ws.value_and_grad(model.coeffs, model.sigma_eps, grad);
  return grad;
}

}  // namespace alspce
