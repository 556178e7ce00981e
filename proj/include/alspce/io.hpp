#pragma once

// File formats: dataset CSV (x_1..x_M, y), the convergence history CSV, and
// the experimental-design dump. Headers are validated strictly so silent
// column drift cannot corrupt a study.

#include <Eigen/Dense>
#include <iosfwd>
#include <string>
#include <vector>

#include "alspce/active_loop.hpp"

namespace alspce {

struct Dataset {
  Eigen::MatrixXd X;
  Eigen::VectorXd y;
};

// Shortest decimal string that round-trips the value.
std::string format_double(double v);

Dataset read_dataset_csv(const std::string& path);
// Stream variant; `name` labels the source in error messages.
Dataset read_dataset_csv(std::istream& in, const std::string& name);
void write_dataset_csv(const std::string& path, const Eigen::Ref<const Eigen::MatrixXd>& X,
                       const Eigen::Ref<const Eigen::VectorXd>& y);

// One row per iteration: n, sigma_eps, pf_raw, pf_smoothed, beta_smoothed.
void write_convergence_csv(const std::string& path,
                           const std::vector<AlIterationRecord>& history);

// Design dump: x_1..x_M, y, iteration (0 marks the initial design).
void write_ed_csv(const std::string& path, const AlState& state);

}  // namespace alspce
