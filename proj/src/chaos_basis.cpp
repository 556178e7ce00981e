#include "alspce/chaos_basis.hpp"

#include <Eigen/Eigenvalues>
#include <cmath>
#include <stdexcept>

namespace alspce {

std::string poly_family_name(PolyFamily f) {
  return f == PolyFamily::hermite ? "hermite" : "legendre";
}

PolyFamily poly_family_from_name(const std::string& name) {
  if (name == "hermite") return PolyFamily::hermite;
  if (name == "legendre") return PolyFamily::legendre;
  throw std::invalid_argument("unknown polynomial family: " + name);
}

namespace {

// Recurrence p_{k+1} = (t - a_k) p_k / sqrt(b_{k+1}) - sqrt(b_k)/sqrt(b_{k+1}) p_{k-1}
// in monic-beta form; both families here have a_k = 0.
double recurrence_beta(PolyFamily family, int k) {
  if (family == PolyFamily::hermite) return static_cast<double>(k);
  double kk = static_cast<double>(k);
  return kk * kk / (4.0 * kk * kk - 1.0);
}

}  // namespace

double univariate_poly(PolyFamily family, int degree, double t) {
  if (degree < 0) throw std::invalid_argument("univariate_poly: degree >= 0 required");
  double pm1 = 0.0;
  double p = 1.0;
  for (int k = 0; k < degree; ++k) {
    double sb1 = std::sqrt(recurrence_beta(family, k + 1));
    double sb0 = k > 0 ? std::sqrt(recurrence_beta(family, k)) : 0.0;
    double pn = (t * p - sb0 * pm1) / sb1;
    pm1 = p;
    p = pn;
  }
  return p;
}

Eigen::MatrixXd eval_poly_table(PolyFamily family, int max_degree,
                                const Eigen::Ref<const Eigen::VectorXd>& t) {
  Eigen::MatrixXd P(t.size(), max_degree + 1);
  P.col(0).setOnes();
  if (max_degree == 0) return P;
  for (int k = 0; k < max_degree; ++k) {
    double sb1 = std::sqrt(recurrence_beta(family, k + 1));
    if (k == 0) {
      P.col(1) = t / sb1;
    } else {
      double sb0 = std::sqrt(recurrence_beta(family, k));
      P.col(k + 1) = (t.cwiseProduct(P.col(k)) - sb0 * P.col(k - 1)) / sb1;
    }
  }
  return P;
}

QuadratureRule gauss_rule(PolyFamily family, int n) {
  if (n < 1) throw std::invalid_argument("gauss_rule: n >= 1 required");
  QuadratureRule rule;
  rule.family = family;
  if (n == 1) {
    rule.nodes = Eigen::VectorXd::Zero(1);
    rule.weights = Eigen::VectorXd::Ones(1);
    return rule;
  }
  Eigen::VectorXd diag = Eigen::VectorXd::Zero(n);
  Eigen::VectorXd sub(n - 1);
  for (int k = 1; k < n; ++k) sub[k - 1] = std::sqrt(recurrence_beta(family, k));
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es;
  es.computeFromTridiagonal(diag, sub, Eigen::ComputeEigenvectors);
  if (es.info() != Eigen::Success)
    throw std::runtime_error("gauss_rule: tridiagonal eigen decomposition failed");
  rule.nodes = es.eigenvalues();
  rule.weights = es.eigenvectors().row(0).transpose().array().square();
  rule.weights /= rule.weights.sum();  // kills O(eps) rounding in the squares
  return rule;
}

MultiIndexSet build_index_set(int dim, int p, double q) {
  if (dim < 1) throw std::invalid_argument("build_index_set: dim >= 1 required");
  if (p < 0) throw std::invalid_argument("build_index_set: p >= 0 required");
  if (!(q > 0.0 && q <= 1.0)) throw std::invalid_argument("build_index_set: q in (0,1] required");

  MultiIndexSet A;
  A.dim = dim;
  A.max_degree = p;
  A.q_norm = q;

  // Boundary cases like alpha = (p,0,...,0) must survive the pow round trip,
  // hence the relative tolerance; q = 1 never consults it.
  auto admits = [&](const std::vector<int>& alpha) {
    if (q == 1.0) return true;  // generator already enforces total degree <= p
    double s = 0.0;
    for (int a : alpha)
      if (a > 0) s += std::pow(static_cast<double>(a), q);
    return std::pow(s, 1.0 / q) <= static_cast<double>(p) * (1.0 + 1e-12) + 1e-12;
  };

  std::vector<int> alpha(static_cast<std::size_t>(dim), 0);
  // Compositions of d into dim parts, first coordinate largest first: this
  // emits each degree block in descending lex order.
  auto emit = [&](auto&& self, int pos, int remaining) -> void {
    if (pos == dim - 1) {
      alpha[static_cast<std::size_t>(pos)] = remaining;
      if (admits(alpha)) A.indices.push_back(alpha);
      return;
    }
    for (int k = remaining; k >= 0; --k) {
      alpha[static_cast<std::size_t>(pos)] = k;
      self(self, pos + 1, remaining - k);
    }
  };
  for (int d = 0; d <= p; ++d) emit(emit, 0, d);
  return A;
}

nlohmann::json MultiIndexSet::to_json() const {
  nlohmann::json arr = nlohmann::json::array();
  for (const auto& alpha : indices) arr.push_back(alpha);
  return arr;
}

MultiIndexSet MultiIndexSet::from_json(const nlohmann::json& j) {
  if (!j.is_array() || j.empty())
    throw std::invalid_argument("index set JSON must be a nonempty array");
  MultiIndexSet A;
  A.dim = static_cast<int>(j.front().size());
  A.q_norm = 1.0;
  for (const auto& row : j) {
    std::vector<int> alpha = row.get<std::vector<int>>();
    if (static_cast<int>(alpha.size()) != A.dim)
      throw std::invalid_argument("index set JSON: ragged rows");
    int total = 0;
    for (int a : alpha) {
      if (a < 0) throw std::invalid_argument("index set JSON: negative degree");
      total += a;
    }
    A.max_degree = std::max(A.max_degree, total);
    A.indices.push_back(std::move(alpha));
  }
  return A;
}

Eigen::MatrixXd eval_design_matrix(const MultiIndexSet& A,
                                   const Eigen::Ref<const Eigen::MatrixXd>& points,
                                   const std::vector<PolyFamily>& families) {
  if (points.cols() != A.dim || static_cast<int>(families.size()) != A.dim)
    throw std::invalid_argument("eval_design_matrix: dimension mismatch");
  std::vector<int> max_deg(static_cast<std::size_t>(A.dim), 0);
  for (const auto& alpha : A.indices)
    for (int j = 0; j < A.dim; ++j)
      max_deg[static_cast<std::size_t>(j)] =
          std::max(max_deg[static_cast<std::size_t>(j)], alpha[static_cast<std::size_t>(j)]);

  std::vector<Eigen::MatrixXd> tables;
  tables.reserve(static_cast<std::size_t>(A.dim));
  for (int j = 0; j < A.dim; ++j)
    tables.push_back(eval_poly_table(families[static_cast<std::size_t>(j)],
                                     max_deg[static_cast<std::size_t>(j)], points.col(j)));

  Eigen::MatrixXd Psi(points.rows(), static_cast<Eigen::Index>(A.size()));
  for (std::size_t k = 0; k < A.size(); ++k) {
    Eigen::VectorXd col = Eigen::VectorXd::Ones(points.rows());
    for (int j = 0; j < A.dim; ++j) {
      int d = A.indices[k][static_cast<std::size_t>(j)];
      if (d > 0) col.array() *= tables[static_cast<std::size_t>(j)].col(d).array();
    }
    Psi.col(static_cast<Eigen::Index>(k)) = col;
  }
  return Psi;
}

}  // namespace alspce
