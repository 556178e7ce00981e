#include <cmath>

#include "alspce/active_loop.hpp"
#include "alspce/reliability.hpp"
#include "doctest.h"

using namespace alspce;

namespace {

// Reference failure probability of the toy testbed: Simpson integration of
// the closed-form conditional probability over the uniform input law.
double toy_reference_pf() {
  const int n = 200000;
  const double a = 0.0, b = 2.0 * M_PI, h = (b - a) / n;
  double s = toy::conditional_s(a) + toy::conditional_s(b);
  for (int i = 1; i < n; ++i) s += toy::conditional_s(a + i * h) * (i % 2 ? 4.0 : 2.0);
  return s * h / 3.0 / (b - a);
}

}  // namespace

TEST_CASE("toy loop converges to the closed-form failure probability") {
  AlConfig cfg;
  cfg.n_initial = 40;
  cfg.batch_size = 10;
  cfg.budget = 150;
  cfg.n_candidates = 4000;
  cfg.n_mc = 50000;
  cfg.ensemble_size = 50;
  cfg.seed = 20260825;
  cfg.train.p_min = 2;
  cfg.train.p_max = 5;
  cfg.train.q_grid = {1.0};
  cfg.train.n_folds = 4;
  cfg.train.restarts = 1;
  cfg.train.n_quad = 60;

  ToySimulator sim;
  const AlState state = run_active_loop(cfg, sim, toy::input_model());
  REQUIRE(state.history.size() >= 2);
  CHECK(state.ed_inputs.rows() == 150);

  const double truth = toy_reference_pf();
  const double got = state.history.back().pf_smoothed;
  CAPTURE(truth);
  CAPTURE(got);
  CHECK(std::abs(got - truth) < 0.30 * truth);

  // The noise estimate should approach the generator's noise level once the
  // design is rich enough to pin the mean surface.
  const double sigma = state.history.back().sigma_eps;
  CHECK(sigma > toy::kNoiseSd / 2.5);
  CHECK(sigma < toy::kNoiseSd * 2.5);
}

TEST_CASE("two-resistance loop lands in the rare-event decade") {
  AlConfig cfg;
  cfg.n_initial = 30;
  cfg.batch_size = 10;
  cfg.budget = 120;
  cfg.n_candidates = 4000;
  cfg.n_mc = 100000;
  cfg.ensemble_size = 50;
  cfg.seed = 6021023;
  cfg.train.p_min = 1;
  cfg.train.p_max = 3;
  cfg.train.q_grid = {1.0};
  cfg.train.n_folds = 4;
  cfg.train.restarts = 1;
  cfg.train.n_quad = 60;

  RsSimulator sim;
  const AlState state = run_active_loop(cfg, sim, rs::input_model());
  CHECK(state.ed_inputs.rows() == 120);
  const double got = state.history.back().pf_smoothed;
  CAPTURE(got);
  CAPTURE(rs::analytic_pf());
  CHECK(got > 1e-3);
  CHECK(got < 1e-2);

  // Responses carry both signs around the failure surface and the design
  // stays inside the physical input box.
  CHECK((state.ed_responses.array() <= 0.0).any());
  CHECK((state.ed_responses.array() > 0.0).any());
  for (Eigen::Index i = 0; i < state.ed_inputs.rows(); ++i) {
    CHECK(state.ed_inputs(i, 0) > 0.0);
    CHECK(state.ed_inputs(i, 1) > 0.0);
  }
}
