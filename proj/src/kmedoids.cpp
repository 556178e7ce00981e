#include "alspce/kmedoids.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <stdexcept>

namespace alspce {
namespace {

Eigen::MatrixXd pairwise_distances(const Eigen::Ref<const Eigen::MatrixXd>& points) {
  const Eigen::Index n = points.rows();
  Eigen::VectorXd sq = points.rowwise().squaredNorm();
  Eigen::MatrixXd d2 = -2.0 * (points * points.transpose());
  d2.colwise() += sq;
  d2.rowwise() += sq.transpose();
  return d2.cwiseMax(0.0).cwiseSqrt();
}

// Samples an index with probability proportional to mass (assumed >= 0).
// Falls back to a uniform pick over positive entries being absent.
int sample_proportional(const Eigen::VectorXd& mass, Rng& rng) {
  const double total = mass.sum();
  if (!(total > 0.0) || !std::isfinite(total)) {
    return static_cast<int>(uniform_index(rng, static_cast<std::uint64_t>(mass.size())));
  }
  double u = uniform01(rng) * total;
  for (Eigen::Index i = 0; i < mass.size(); ++i) {
    u -= mass[i];
    if (u <= 0.0) return static_cast<int>(i);
  }
  return static_cast<int>(mass.size() - 1);
}

}  // namespace

std::vector<int> weighted_kmedoids(const Eigen::Ref<const Eigen::MatrixXd>& points,
                                   const Eigen::Ref<const Eigen::VectorXd>& weights,
                                   int k, Rng& rng, int max_sweeps) {
  const int n = static_cast<int>(points.rows());
  if (k < 1) throw std::invalid_argument("weighted_kmedoids: k >= 1 required");
  if (k > n) throw std::invalid_argument("weighted_kmedoids: k exceeds point count");
  if (weights.size() != n)
    throw std::invalid_argument("weighted_kmedoids: weight length mismatch");
  if ((weights.array() < 0.0).any() || !weights.allFinite())
    throw std::invalid_argument("weighted_kmedoids: weights must be finite and >= 0");

  std::vector<int> medoids;
  if (k == n) {
    medoids.resize(static_cast<std::size_t>(n));
    std::iota(medoids.begin(), medoids.end(), 0);
    return medoids;
  }

  Eigen::VectorXd w = weights;
  if (!(w.sum() > 0.0)) w.setOnes();

  const Eigen::MatrixXd D = pairwise_distances(points);

  // k-means++ seeding on the weights.
  medoids.reserve(static_cast<std::size_t>(k));
  medoids.push_back(sample_proportional(w, rng));
  Eigen::VectorXd near_d = D.col(medoids[0]);
  std::vector<char> is_medoid(static_cast<std::size_t>(n), 0);
  is_medoid[static_cast<std::size_t>(medoids[0])] = 1;
  while (static_cast<int>(medoids.size()) < k) {
    Eigen::VectorXd mass = w.array() * near_d.array().square();
    int next = sample_proportional(mass, rng);
    if (is_medoid[static_cast<std::size_t>(next)]) {
      // Duplicate points can put all residual mass on existing medoids; pick
      // the first free index instead of spinning.
      next = -1;
      for (int i = 0; i < n; ++i) {
        if (!is_medoid[static_cast<std::size_t>(i)]) { next = i; break; }
      }
    }
    is_medoid[static_cast<std::size_t>(next)] = 1;
    medoids.push_back(next);
    near_d = near_d.cwiseMin(D.col(next));
  }

  // Per-point nearest (d1, owning medoid slot) and second-nearest (d2).
  Eigen::VectorXd d1(n), d2(n);
  std::vector<int> n1(static_cast<std::size_t>(n));
  auto recompute_nearest = [&]() {
    for (int o = 0; o < n; ++o) {
      double b1 = std::numeric_limits<double>::infinity();
      double b2 = b1;
      int j1 = 0;
      for (int j = 0; j < k; ++j) {
        const double d = D(o, medoids[static_cast<std::size_t>(j)]);
        if (d < b1) {
          b2 = b1;
          b1 = d;
          j1 = j;
        } else if (d < b2) {
          b2 = d;
        }
      }
      d1[o] = b1;
      d2[o] = b2;
      n1[static_cast<std::size_t>(o)] = j1;
    }
  };
  recompute_nearest();

  Eigen::VectorXd acc(k);
  for (int sweep = 0; sweep < max_sweeps; ++sweep) {
    const double cost = w.dot(d1);
    double best_delta = 0.0;
    int best_j = -1, best_c = -1;
    for (int c = 0; c < n; ++c) {
      if (is_medoid[static_cast<std::size_t>(c)]) continue;
      // One pass accumulates the shared gain of adding c plus the per-medoid
      // correction for removing that medoid (FastPAM1 decomposition).
      double base = 0.0;
      acc.setZero();
      for (int o = 0; o < n; ++o) {
        const double doc = D(o, c);
        const double shared = std::min(0.0, doc - d1[o]);
        base += w[o] * shared;
        acc[n1[static_cast<std::size_t>(o)]] +=
            w[o] * (std::min(doc, d2[o]) - d1[o] - shared);
      }
      for (int j = 0; j < k; ++j) {
        const double delta = base + acc[j];
        if (delta < best_delta) {
          best_delta = delta;
          best_j = j;
          best_c = c;
        }
      }
    }
    if (best_j < 0 || best_delta >= -1e-12 * std::max(cost, 1e-300)) break;
    is_medoid[static_cast<std::size_t>(medoids[static_cast<std::size_t>(best_j)])] = 0;
    is_medoid[static_cast<std::size_t>(best_c)] = 1;
    medoids[static_cast<std::size_t>(best_j)] = best_c;
    recompute_nearest();
  }

  std::sort(medoids.begin(), medoids.end());
  return medoids;
}

std::vector<int> assign_to_medoids(const Eigen::Ref<const Eigen::MatrixXd>& points,
                                   const std::vector<int>& medoids) {
  const Eigen::Index n = points.rows();
  std::vector<int> labels(static_cast<std::size_t>(n), 0);
  for (Eigen::Index o = 0; o < n; ++o) {
    double best = std::numeric_limits<double>::infinity();
    int arg = 0;
    for (std::size_t j = 0; j < medoids.size(); ++j) {
      const double d = (points.row(o) - points.row(medoids[j])).norm();
      if (d < best) {
        best = d;
        arg = static_cast<int>(j);
      }
    }
    labels[static_cast<std::size_t>(o)] = arg;
  }
  return labels;
}

std::vector<int> select_batch(const Eigen::Ref<const Eigen::MatrixXd>& points,
                              const Eigen::Ref<const Eigen::VectorXd>& scores,
                              int k, Rng& rng) {
  const int n = static_cast<int>(points.rows());
  if (k < 1) throw std::invalid_argument("select_batch: k >= 1 required");
  if (k > n) throw std::invalid_argument("select_batch: fewer candidates than k");
  if (scores.size() != n) throw std::invalid_argument("select_batch: score length mismatch");
  if ((scores.array() < 0.0).any() || !scores.allFinite())
    throw std::invalid_argument("select_batch: scores must be finite and >= 0");

  constexpr int kPoolCap = 2048;
  std::vector<int> pool;
  pool.reserve(static_cast<std::size_t>(n));
  for (int i = 0; i < n; ++i) {
    if (scores[i] > 0.0) pool.push_back(i);
  }
  if (static_cast<int>(pool.size()) > kPoolCap) {
    // Cluster only the strongest candidates; the tail contributes little mass
    // and would dominate the O(n^2) cost.
    std::sort(pool.begin(), pool.end(), [&](int a, int b) {
      if (scores[a] != scores[b]) return scores[a] > scores[b];
      return a < b;
    });
    pool.resize(kPoolCap);
    std::sort(pool.begin(), pool.end());
  }

  std::vector<int> selected;
  selected.reserve(static_cast<std::size_t>(k));

  if (static_cast<int>(pool.size()) >= k) {
    Eigen::MatrixXd P(pool.size(), points.cols());
    Eigen::VectorXd wp(pool.size());
    for (std::size_t i = 0; i < pool.size(); ++i) {
      P.row(static_cast<Eigen::Index>(i)) = points.row(pool[i]);
      wp[static_cast<Eigen::Index>(i)] = scores[pool[i]];
    }
    std::vector<int> medoids = weighted_kmedoids(P, wp, k, rng);
    std::vector<int> labels = assign_to_medoids(P, medoids);
    // Pool is index-sorted, so a strict for the running max yields the
    // lowest original index among tied scores.
    std::vector<int> arg(static_cast<std::size_t>(k), -1);
    std::vector<double> best(static_cast<std::size_t>(k), -1.0);
    for (std::size_t i = 0; i < pool.size(); ++i) {
      const auto lb = static_cast<std::size_t>(labels[i]);
      if (wp[static_cast<Eigen::Index>(i)] > best[lb]) {
        best[lb] = wp[static_cast<Eigen::Index>(i)];
        arg[lb] = pool[i];
      }
    }
    for (int j = 0; j < k; ++j) {
      if (arg[static_cast<std::size_t>(j)] < 0)
        throw std::logic_error("select_batch: empty cluster");
      selected.push_back(arg[static_cast<std::size_t>(j)]);
    }
  } else {
    // Too few informative candidates: keep them all and spread the remaining
    // picks over the zero-score region with unweighted medoids.
    selected = pool;
    std::vector<char> taken(static_cast<std::size_t>(n), 0);
    for (int i : selected) taken[static_cast<std::size_t>(i)] = 1;
    std::vector<int> rest;
    rest.reserve(static_cast<std::size_t>(n) - selected.size());
    for (int i = 0; i < n; ++i) {
      if (!taken[static_cast<std::size_t>(i)]) rest.push_back(i);
    }
    const int need = k - static_cast<int>(selected.size());
    Eigen::MatrixXd R(rest.size(), points.cols());
    for (std::size_t i = 0; i < rest.size(); ++i)
      R.row(static_cast<Eigen::Index>(i)) = points.row(rest[i]);
    Eigen::VectorXd ones = Eigen::VectorXd::Ones(static_cast<Eigen::Index>(rest.size()));
    for (int mi : weighted_kmedoids(R, ones, need, rng))
      selected.push_back(rest[static_cast<std::size_t>(mi)]);
  }

  std::sort(selected.begin(), selected.end());
  return selected;
}

}  // namespace alspce
