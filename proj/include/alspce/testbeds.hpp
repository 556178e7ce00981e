#pragma once

// Built-in stochastic simulators with analytic references where they exist,
// plus the dataset-backed adapter and windowed statistics for replication-free
// data studies.

#include <Eigen/Dense>
#include <cstdint>
#include <vector>

#include "alspce/distributions.hpp"
#include "alspce/rng.hpp"

namespace alspce {

// One simulator call. realized_x equals the query for every live simulator;
// the dataset adapter substitutes the stored point it actually consumed.
struct SimEval {
  Eigen::RowVectorXd realized_x;
  double y = 0.0;
};

class StochasticSimulator {
 public:
  virtual ~StochasticSimulator() = default;
  virtual int input_dim() const = 0;
  virtual SimEval evaluate(const Eigen::Ref<const Eigen::RowVectorXd>& x, Rng& rng) = 0;
};

// Two-resistance problem: g = R/Z1 - S*Z2 with lognormal inputs R, S and
// lognormal multiplicative noise Z1, Z2. All four distributions are
// parameterized from their physical moments, so the analytic failure
// probability is exact rather than inherited from rounded log-space tables.
namespace rs {

InputModel input_model();
const Marginal& latent_z1();
const Marginal& latent_z2();

double limit_state(double r, double s, Rng& rng);
// P[g <= 0]; closed form because ln g's two sides are Gaussian.
double analytic_pf();
double analytic_beta();
// P[g <= 0 | r, s], Gaussian in ln r - ln s.
double conditional_s(double r, double s);

}  // namespace rs

class RsSimulator final : public StochasticSimulator {
 public:
  int input_dim() const override { return 2; }
  SimEval evaluate(const Eigen::Ref<const Eigen::RowVectorXd>& x, Rng& rng) override;
};

// Stochastic SIR epidemic (Gillespie): infection and recovery compete through
// exponential clocks until the infected pool empties. Output is the total
// number of new infections.
namespace sir {

inline constexpr long long kPopulation = 2000;
// Failure threshold on the outbreak size. Calibrated by a 1e6-run pilot MCS
// (uniform inputs below, P = 2000): P[count >= 1000] is about 7.3e-4, inside
// the rare-event regime this testbed is meant to exercise.
inline constexpr double kDefaultILim = 1000.0;

InputModel input_model();

long long simulate(long long s0, long long i0, double beta, double gamma,
                   long long population, Rng& rng);
// x = (S0, I0, beta, gamma); continuous S0, I0 are rounded to the nearest
// integer at this boundary. Returns i_lim minus the simulated count.
double limit_state(const Eigen::Ref<const Eigen::RowVectorXd>& x, double i_lim, Rng& rng);

}  // namespace sir

class SirSimulator final : public StochasticSimulator {
 public:
  explicit SirSimulator(double i_lim = sir::kDefaultILim) : i_lim_(i_lim) {}
  int input_dim() const override { return 4; }
  double i_lim() const { return i_lim_; }
  SimEval evaluate(const Eigen::Ref<const Eigen::RowVectorXd>& x, Rng& rng) override;

 private:
  double i_lim_;
};

// One-dimensional toy: g = x sin(x) + Z with Z ~ N(0, 0.5^2), x in [0, 2pi].
namespace toy {

inline constexpr double kNoiseSd = 0.5;

InputModel input_model();
double limit_state(double x, Rng& rng);
double conditional_s(double x);

}  // namespace toy

class ToySimulator final : public StochasticSimulator {
 public:
  int input_dim() const override { return 1; }
  SimEval evaluate(const Eigen::Ref<const Eigen::RowVectorXd>& x, Rng& rng) override;
};

// Replays one latent stream: every evaluate call re-seeds from the stored
// seed, so varying x traces the deterministic map x -> g(x, z0).
class FrozenLatentSimulator final : public StochasticSimulator {
 public:
  FrozenLatentSimulator(StochasticSimulator& base, std::uint64_t seed)
      : base_(&base), seed_(seed) {}
  int input_dim() const override { return base_->input_dim(); }
  SimEval evaluate(const Eigen::Ref<const Eigen::RowVectorXd>& x, Rng& rng) override;

 private:
  StochasticSimulator* base_;
  std::uint64_t seed_;
};

// Serves stored (x, y) observations as if they were simulator calls: each
// query consumes the nearest unused point within match_radius (ties broken at
// random among the equidistant), and reports that stored x back so the design
// records the realized input. Not thread safe: consumption mutates state.
class DatasetSimulator final : public StochasticSimulator {
 public:
  // radius <= 0 selects the default: the 0.1% quantile of pairwise input
  // distances (over a deterministic row subsample when the set is large).
  DatasetSimulator(Eigen::MatrixXd X, Eigen::VectorXd y, double radius = 0.0);

  int input_dim() const override { return static_cast<int>(X_.cols()); }
  SimEval evaluate(const Eigen::Ref<const Eigen::RowVectorXd>& x, Rng& rng) override;

  double match_radius() const { return radius_; }
  Eigen::Index size() const { return y_.size(); }
  Eigen::Index remaining() const;

  static double default_radius(const Eigen::Ref<const Eigen::MatrixXd>& X);

 private:
  Eigen::MatrixXd X_;
  Eigen::VectorXd y_;
  double radius_;
  std::vector<char> used_;
};

struct WindowStats {
  double mean = 0.0;
  double variance = 0.0;
  std::vector<double> quantiles;
  Eigen::Index n_window = 0;
};

// Statistics of y over the window |u - u_query| <= delta: sample mean,
// unbiased variance, and for each alpha the order statistic at 1-based index
// clamp(floor(alpha * N_w), 1, N_w). Requires at least two points in window.
WindowStats moving_window_stats(const Eigen::Ref<const Eigen::VectorXd>& u,
                                const Eigen::Ref<const Eigen::VectorXd>& y, double u_query,
                                double delta, const std::vector<double>& alphas);

}  // namespace alspce
