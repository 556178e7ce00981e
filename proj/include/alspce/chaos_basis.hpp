#pragma once

#include <Eigen/Core>
#include <vector>

#include "alspce/distributions.hpp"

namespace alspce {

std::string poly_family_name(PolyFamily f);
PolyFamily poly_family_from_name(const std::string& name);

// Orthonormal univariate polynomial value: Hermite against the standard
// normal, Legendre against Uniform(-1,1). Three-term recurrence in the
// orthonormal normalization, stable well past degree 20.
double univariate_poly(PolyFamily family, int degree, double t);

// Column (i,d) = orthonormal polynomial of degree d at t[i], d = 0..max_degree.
Eigen::MatrixXd eval_poly_table(PolyFamily family, int max_degree,
                                const Eigen::Ref<const Eigen::VectorXd>& t);

struct QuadratureRule {
  PolyFamily family;
  Eigen::VectorXd nodes;
  Eigen::VectorXd weights;  // probabilists' normalization: sums to 1
};

// Golub-Welsch: nodes are eigenvalues of the Jacobi matrix of the recurrence,
// weights the squared first components of its eigenvectors.
QuadratureRule gauss_rule(PolyFamily family, int n);

struct MultiIndexSet {
  int dim = 0;
  int max_degree = 0;
  double q_norm = 1.0;
  // Graded lexicographic: ascending total degree, descending lex within a
  // degree, so (2,0) precedes (1,1) precedes (0,2). Fixes the coefficient
  // layout across serialization.
  std::vector<std::vector<int>> indices;

  std::size_t size() const { return indices.size(); }
  nlohmann::json to_json() const;
  static MultiIndexSet from_json(const nlohmann::json& j);
};

// All multi-indices with hyperbolic q-norm (sum alpha_j^q)^(1/q) <= p.
// q = 1 is handled in exact integer arithmetic (total degree <= p).
MultiIndexSet build_index_set(int dim, int p, double q);

// Entry (i,k) = product over dims of the univariate orthonormal polynomial
// at the standardized coordinates; the last column block of `points` is the
// latent coordinate when dim(A) = cols(points).
Eigen::MatrixXd eval_design_matrix(const MultiIndexSet& A,
                                   const Eigen::Ref<const Eigen::MatrixXd>& points,
                                   const std::vector<PolyFamily>& families);

}  // namespace alspce
