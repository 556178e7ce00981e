#pragma once

// Weighted K-medoids clustering and the batch-selection rule built on it.
//
// The active loop picks K enrichment points per iteration by clustering the
// high-score candidates and taking the best-scoring member of each cluster.
// Distances are Euclidean in whatever coordinates the caller passes; the loop
// passes standardized inputs so each dimension carries comparable scale.

#include <Eigen/Dense>
#include <vector>

#include "alspce/rng.hpp"

namespace alspce {

// PAM swap search minimizing sum_i w_i * ||x_i - nearest medoid||, seeded
// k-means++ style (first medoid by weight, later ones by weight times squared
// distance to the chosen set). At most max_sweeps best-swap passes; a swap is
// accepted only if it improves cost beyond a scale-invariant threshold, so
// rescaling all weights by a positive constant cannot change the result.
// Returns k distinct row indices, sorted ascending.
std::vector<int> weighted_kmedoids(const Eigen::Ref<const Eigen::MatrixXd>& points,
                                   const Eigen::Ref<const Eigen::VectorXd>& weights,
                                   int k, Rng& rng, int max_sweeps = 100);

// Nearest-medoid label per point; distance ties go to the earliest medoid in
// the list.
std::vector<int> assign_to_medoids(const Eigen::Ref<const Eigen::MatrixXd>& points,
                                   const std::vector<int>& medoids);

// Batch selection: clusters the positive-score candidates with score-weighted
// K-medoids and returns the max-score member of each cluster (ties -> lowest
// index). If fewer than k candidates have positive score, every positive one
// is taken and the remainder is filled with unweighted medoids of the
// zero-score candidates. Pools larger than 2048 are trimmed to the top scores
// before clustering. Returns k distinct indices into points, sorted ascending.
std::vector<int> select_batch(const Eigen::Ref<const Eigen::MatrixXd>& points,
                              const Eigen::Ref<const Eigen::VectorXd>& scores,
                              int k, Rng& rng);

}  // namespace alspce
