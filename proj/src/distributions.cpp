#include "alspce/distributions.hpp"

#include <cmath>
#include <numeric>
#include <stdexcept>

namespace alspce {

std::string family_name(Family f) {
  switch (f) {
    case Family::uniform: return "uniform";
    case Family::gaussian: return "gaussian";
    case Family::lognormal: return "lognormal";
    case Family::exponential: return "exponential";
  }
  throw std::logic_error("family_name: unhandled family");
}

Family family_from_name(const std::string& name) {
  if (name == "uniform") return Family::uniform;
  if (name == "gaussian") return Family::gaussian;
  if (name == "lognormal") return Family::lognormal;
  if (name == "exponential") return Family::exponential;
  throw std::invalid_argument("unknown marginal family: " + name);
}

Marginal::Marginal(Family f, std::vector<double> p) : family_(f), params_(std::move(p)) {
  validate();
}

void Marginal::validate() const {
  for (double v : params_)
    if (!std::isfinite(v)) throw std::invalid_argument("marginal parameter not finite");
  switch (family_) {
    case Family::uniform:
      if (params_.size() != 2 || !(params_[1] > params_[0]))
        throw std::invalid_argument("uniform requires b > a");
      break;
    case Family::gaussian:
      if (params_.size() != 2 || !(params_[1] > 0.0))
        throw std::invalid_argument("gaussian requires sigma > 0");
      break;
    case Family::lognormal:
      if (params_.size() != 2 || !(params_[1] > 0.0))
        throw std::invalid_argument("lognormal requires zeta > 0");
      break;
    case Family::exponential:
      if (params_.size() != 1 || !(params_[0] > 0.0))
        throw std::invalid_argument("exponential requires rate > 0");
      break;
  }
}

Marginal Marginal::uniform(double a, double b) { return Marginal(Family::uniform, {a, b}); }
Marginal Marginal::gaussian(double mu, double sigma) {
  return Marginal(Family::gaussian, {mu, sigma});
}
Marginal Marginal::lognormal(double lambda, double zeta) {
  return Marginal(Family::lognormal, {lambda, zeta});
}
Marginal Marginal::lognormal_from_moments(double mean, double sd) {
  if (!(mean > 0.0) || !(sd > 0.0))
    throw std::invalid_argument("lognormal moments require mean, sd > 0");
  double zeta2 = std::log1p((sd / mean) * (sd / mean));
  return lognormal(std::log(mean) - 0.5 * zeta2, std::sqrt(zeta2));
}
Marginal Marginal::exponential(double rate) { return Marginal(Family::exponential, {rate}); }

double Marginal::pdf(double x) const {
  switch (family_) {
    case Family::uniform:
      return (x >= params_[0] && x <= params_[1]) ? 1.0 / (params_[1] - params_[0]) : 0.0;
    case Family::gaussian:
      return normal_pdf((x - params_[0]) / params_[1]) / params_[1];
    case Family::lognormal:
      if (x <= 0.0) return 0.0;
      return normal_pdf((std::log(x) - params_[0]) / params_[1]) / (params_[1] * x);
    case Family::exponential:
      return x >= 0.0 ? params_[0] * std::exp(-params_[0] * x) : 0.0;
  }
  return 0.0;
}

double Marginal::log_pdf(double x) const {
  double p = pdf(x);
  if (p <= 0.0) return -std::numeric_limits<double>::infinity();
  switch (family_) {
    case Family::uniform:
      return -std::log(params_[1] - params_[0]);
    case Family::gaussian:
      return normal_logpdf((x - params_[0]) / params_[1]) - std::log(params_[1]);
    case Family::lognormal:
      return normal_logpdf((std::log(x) - params_[0]) / params_[1]) -
             std::log(params_[1]) - std::log(x);
    case Family::exponential:
      return std::log(params_[0]) - params_[0] * x;
  }
  return -std::numeric_limits<double>::infinity();
}

double Marginal::cdf(double x) const {
  switch (family_) {
    case Family::uniform: {
      if (x <= params_[0]) return 0.0;
      if (x >= params_[1]) return 1.0;
      return (x - params_[0]) / (params_[1] - params_[0]);
    }
    case Family::gaussian:
      return normal_cdf((x - params_[0]) / params_[1]);
    case Family::lognormal:
      if (x <= 0.0) return 0.0;
      return normal_cdf((std::log(x) - params_[0]) / params_[1]);
    case Family::exponential:
      return x <= 0.0 ? 0.0 : -std::expm1(-params_[0] * x);
  }
  return 0.0;
}

double Marginal::icdf(double p) const {
  if (!(p >= 0.0 && p <= 1.0)) throw std::domain_error("icdf: p outside [0,1]");
  switch (family_) {
    case Family::uniform:
      return params_[0] + (params_[1] - params_[0]) * p;
    case Family::gaussian:
      return params_[0] + params_[1] * normal_icdf(p);
    case Family::lognormal:
      return std::exp(params_[0] + params_[1] * normal_icdf(p));
    case Family::exponential:
      return -std::log1p(-p) / params_[0];
  }
  return 0.0;
}

double Marginal::sample(Rng& rng) const { return icdf(uniform01(rng)); }

double Marginal::mean() const {
  switch (family_) {
    case Family::uniform: return 0.5 * (params_[0] + params_[1]);
    case Family::gaussian: return params_[0];
    case Family::lognormal: return std::exp(params_[0] + 0.5 * params_[1] * params_[1]);
    case Family::exponential: return 1.0 / params_[0];
  }
  return 0.0;
}

double Marginal::stddev() const {
  switch (family_) {
    case Family::uniform: return (params_[1] - params_[0]) / std::sqrt(12.0);
    case Family::gaussian: return params_[1];
    case Family::lognormal: {
      double z2 = params_[1] * params_[1];
      return std::exp(params_[0] + 0.5 * z2) * std::sqrt(std::expm1(z2));
    }
    case Family::exponential: return 1.0 / params_[0];
  }
  return 0.0;
}

double Marginal::support_lower() const {
  switch (family_) {
    case Family::uniform: return params_[0];
    case Family::gaussian: return -std::numeric_limits<double>::infinity();
    case Family::lognormal: return 0.0;
    case Family::exponential: return 0.0;
  }
  return 0.0;
}

double Marginal::support_upper() const {
  switch (family_) {
    case Family::uniform: return params_[1];
    default: return std::numeric_limits<double>::infinity();
  }
}

bool Marginal::in_support(double x) const {
  switch (family_) {
    case Family::uniform: return x >= params_[0] && x <= params_[1];
    case Family::gaussian: return std::isfinite(x);
    case Family::lognormal: return x > 0.0;
    case Family::exponential: return x >= 0.0;
  }
  return false;
}

PolyFamily Marginal::poly_family() const {
  return family_ == Family::uniform ? PolyFamily::legendre : PolyFamily::hermite;
}

double Marginal::to_standard(double x) const {
  if (!in_support(x)) throw std::domain_error("to_standard: x outside support");
  switch (family_) {
    case Family::uniform:
      return 2.0 * (x - params_[0]) / (params_[1] - params_[0]) - 1.0;
    case Family::gaussian:
      return (x - params_[0]) / params_[1];
    case Family::lognormal:
      return (std::log(x) - params_[0]) / params_[1];
    case Family::exponential:
      // No native polynomial family; composed through the Gaussian CDF.
      return normal_icdf(cdf(x));
  }
  return 0.0;
}

double Marginal::from_standard(double xi) const {
  switch (family_) {
    case Family::uniform:
      return params_[0] + 0.5 * (xi + 1.0) * (params_[1] - params_[0]);
    case Family::gaussian:
      return params_[0] + params_[1] * xi;
    case Family::lognormal:
      return std::exp(params_[0] + params_[1] * xi);
    case Family::exponential:
      return icdf(normal_cdf(xi));
  }
  return 0.0;
}

nlohmann::ordered_json Marginal::to_json() const {
  nlohmann::ordered_json j;
  j["family"] = family_name(family_);
  j["params"] = params_;
  return j;
}

Marginal Marginal::from_json(const nlohmann::json& j) {
  if (!j.is_object() || !j.contains("family") || !j.contains("params"))
    throw std::invalid_argument("marginal JSON requires {family, params}");
  for (auto it = j.begin(); it != j.end(); ++it)
    if (it.key() != "family" && it.key() != "params")
      throw std::invalid_argument("marginal JSON: unknown key '" + it.key() + "'");
  Family f = family_from_name(j.at("family").get<std::string>());
  std::vector<double> p = j.at("params").get<std::vector<double>>();
  return Marginal(f, std::move(p));
}

InputModel::InputModel(std::vector<Marginal> marginals) : marginals_(std::move(marginals)) {
  if (marginals_.empty()) throw std::invalid_argument("InputModel requires >= 1 marginal");
}

double InputModel::joint_pdf(const Eigen::Ref<const Eigen::RowVectorXd>& x) const {
  if (x.size() != dim()) throw std::invalid_argument("joint_pdf: dimension mismatch");
  double p = 1.0;
  for (int i = 0; i < dim(); ++i) p *= marginals_[static_cast<std::size_t>(i)].pdf(x[i]);
  return p;
}

double InputModel::joint_log_pdf(const Eigen::Ref<const Eigen::RowVectorXd>& x) const {
  if (x.size() != dim()) throw std::invalid_argument("joint_log_pdf: dimension mismatch");
  double lp = 0.0;
  for (int i = 0; i < dim(); ++i) lp += marginals_[static_cast<std::size_t>(i)].log_pdf(x[i]);
  return lp;
}

Eigen::VectorXd InputModel::joint_pdf_batch(const Eigen::Ref<const Eigen::MatrixXd>& X) const {
  if (X.cols() != dim()) throw std::invalid_argument("joint_pdf_batch: dimension mismatch");
  Eigen::VectorXd out(X.rows());
  for (Eigen::Index r = 0; r < X.rows(); ++r) out[r] = joint_pdf(X.row(r));
  return out;
}

Eigen::MatrixXd InputModel::sample(Eigen::Index n, Rng& rng) const {
  if (n < 1) throw std::invalid_argument("sample: n >= 1 required");
  Eigen::MatrixXd X(n, dim());
  for (Eigen::Index r = 0; r < n; ++r)
    for (int c = 0; c < dim(); ++c)
      X(r, c) = marginals_[static_cast<std::size_t>(c)].sample(rng);
  return X;
}

Eigen::MatrixXd InputModel::lhs_sample(Eigen::Index n, Rng& rng) const {
  if (n < 1) throw std::invalid_argument("lhs_sample: n >= 1 required");
  Eigen::MatrixXd X(n, dim());
  std::vector<Eigen::Index> perm(static_cast<std::size_t>(n));
  for (int c = 0; c < dim(); ++c) {
    std::iota(perm.begin(), perm.end(), Eigen::Index{0});
    shuffle_indices(perm, rng);
    for (Eigen::Index r = 0; r < n; ++r) {
      double u = (static_cast<double>(perm[static_cast<std::size_t>(r)]) + uniform01(rng)) /
                 static_cast<double>(n);
      X(r, c) = marginals_[static_cast<std::size_t>(c)].icdf(u);
    }
  }
  return X;
}

Eigen::RowVectorXd InputModel::to_standard(
    const Eigen::Ref<const Eigen::RowVectorXd>& x) const {
  if (x.size() != dim()) throw std::invalid_argument("to_standard: dimension mismatch");
  Eigen::RowVectorXd xi(dim());
  for (int i = 0; i < dim(); ++i)
    xi[i] = marginals_[static_cast<std::size_t>(i)].to_standard(x[i]);
  return xi;
}

Eigen::RowVectorXd InputModel::from_standard(
    const Eigen::Ref<const Eigen::RowVectorXd>& xi) const {
  if (xi.size() != dim()) throw std::invalid_argument("from_standard: dimension mismatch");
  Eigen::RowVectorXd x(dim());
  for (int i = 0; i < dim(); ++i)
    x[i] = marginals_[static_cast<std::size_t>(i)].from_standard(xi[i]);
  return x;
}

Eigen::MatrixXd InputModel::to_standard_batch(
    const Eigen::Ref<const Eigen::MatrixXd>& X) const {
  Eigen::MatrixXd Xi(X.rows(), X.cols());
  for (Eigen::Index r = 0; r < X.rows(); ++r) Xi.row(r) = to_standard(X.row(r));
  return Xi;
}

Eigen::MatrixXd InputModel::from_standard_batch(
    const Eigen::Ref<const Eigen::MatrixXd>& Xi) const {
  Eigen::MatrixXd X(Xi.rows(), Xi.cols());
  for (Eigen::Index r = 0; r < Xi.rows(); ++r) X.row(r) = from_standard(Xi.row(r));
  return X;
}

std::vector<PolyFamily> InputModel::poly_families() const {
  std::vector<PolyFamily> fams;
  fams.reserve(marginals_.size());
  for (const auto& m : marginals_) fams.push_back(m.poly_family());
  return fams;
}

nlohmann::ordered_json InputModel::to_json() const {
  nlohmann::ordered_json arr = nlohmann::ordered_json::array();
  for (const auto& m : marginals_) arr.push_back(m.to_json());
  return arr;
}

InputModel InputModel::from_json(const nlohmann::json& j) {
  if (!j.is_array()) throw std::invalid_argument("input model JSON must be an array");
  std::vector<Marginal> ms;
  ms.reserve(j.size());
  for (const auto& mj : j) ms.push_back(Marginal::from_json(mj));
  return InputModel(std::move(ms));
}

}  // namespace alspce
