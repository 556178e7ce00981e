#pragma once

#include <Eigen/Core>
#include <string>
#include <vector>

#include "alspce/rng.hpp"

#include "json.hpp"

namespace alspce {

enum class Family { uniform, gaussian, lognormal, exponential };

std::string family_name(Family f);
Family family_from_name(const std::string& name);

// Polynomial family matching the standardized image of a marginal: uniform
// marginals map to (-1,1) (Legendre), everything else to standard normal
// (Hermite).
enum class PolyFamily { hermite, legendre };

class Marginal {
 public:
  static Marginal uniform(double a, double b);
  static Marginal gaussian(double mu, double sigma);
  static Marginal lognormal(double lambda, double zeta);
  // Lognormal whose *physical* mean and standard deviation are given; the
  // underlying Gaussian parameters are derived at full precision.
  static Marginal lognormal_from_moments(double mean, double sd);
  static Marginal exponential(double rate);

  Family family() const { return family_; }
  const std::vector<double>& params() const { return params_; }

  double pdf(double x) const;
  double log_pdf(double x) const;
  double cdf(double x) const;
  double icdf(double p) const;
  double sample(Rng& rng) const;

  double mean() const;
  double stddev() const;
  double support_lower() const;
  double support_upper() const;
  bool in_support(double x) const;

  // Isoprobabilistic map to the reference measure of the marginal's
  // polynomial family. Strictly increasing; throws outside the support.
  double to_standard(double x) const;
  double from_standard(double xi) const;
  PolyFamily poly_family() const;

  nlohmann::ordered_json to_json() const;
  static Marginal from_json(const nlohmann::json& j);

 private:
  Marginal(Family f, std::vector<double> p);
  void validate() const;

  Family family_;
  std::vector<double> params_;
};

class InputModel {
 public:
  InputModel() = default;
  explicit InputModel(std::vector<Marginal> marginals);

  int dim() const { return static_cast<int>(marginals_.size()); }
  const Marginal& marginal(int i) const { return marginals_.at(static_cast<std::size_t>(i)); }
  const std::vector<Marginal>& marginals() const { return marginals_; }

  double joint_pdf(const Eigen::Ref<const Eigen::RowVectorXd>& x) const;
  double joint_log_pdf(const Eigen::Ref<const Eigen::RowVectorXd>& x) const;
  Eigen::VectorXd joint_pdf_batch(const Eigen::Ref<const Eigen::MatrixXd>& X) const;

  Eigen::MatrixXd sample(Eigen::Index n, Rng& rng) const;
  // Latin hypercube design: stratified ranks with in-cell jitter, mapped
  // through the marginal quantile functions.
  Eigen::MatrixXd lhs_sample(Eigen::Index n, Rng& rng) const;

  Eigen::RowVectorXd to_standard(const Eigen::Ref<const Eigen::RowVectorXd>& x) const;
  Eigen::RowVectorXd from_standard(const Eigen::Ref<const Eigen::RowVectorXd>& xi) const;
  Eigen::MatrixXd to_standard_batch(const Eigen::Ref<const Eigen::MatrixXd>& X) const;
  Eigen::MatrixXd from_standard_batch(const Eigen::Ref<const Eigen::MatrixXd>& Xi) const;

  std::vector<PolyFamily> poly_families() const;

  nlohmann::ordered_json to_json() const;
  static InputModel from_json(const nlohmann::json& j);

 private:
  std::vector<Marginal> marginals_;
};

}  // namespace alspce
