#include "alspce/testbeds.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>
#include <stdexcept>

#include "alspce/special.hpp"

namespace alspce {

namespace rs {
namespace {

const Marginal& marg_r() {
  static const Marginal m = Marginal::lognormal_from_moments(5.0, 0.8);
  return m;
}
const Marginal& marg_s() {
  static const Marginal m = Marginal::lognormal_from_moments(2.0, 0.6);
  return m;
}

}  // namespace

const Marginal& latent_z1() {
  static const Marginal m = Marginal::lognormal_from_moments(1.0, 0.028);
  return m;
}

const Marginal& latent_z2() {
  static const Marginal m = Marginal::lognormal_from_moments(1.0, 0.096);
  return m;
}

InputModel input_model() { return InputModel({marg_r(), marg_s()}); }

double limit_state(double r, double s, Rng& rng) {
  if (!(r > 0.0) || !(s > 0.0)) throw std::invalid_argument("rs::limit_state: r, s > 0 required");
  const double z1 = latent_z1().sample(rng);
  const double z2 = latent_z2().sample(rng);
  return r / z1 - s * z2;
}

double analytic_beta() {
  // ln(R/Z1) - ln(S*Z2) is Gaussian; failure is that variable going <= 0.
  const double m = marg_r().params()[0] - latent_z1().params()[0] - marg_s().params()[0] -
                   latent_z2().params()[0];
  const double v = marg_r().params()[1] * marg_r().params()[1] +
                   latent_z1().params()[1] * latent_z1().params()[1] +
                   marg_s().params()[1] * marg_s().params()[1] +
                   latent_z2().params()[1] * latent_z2().params()[1];
  return m / std::sqrt(v);
}

double analytic_pf() { return normal_cdf(-analytic_beta()); }

double conditional_s(double r, double s) {
  if (!(r > 0.0) || !(s > 0.0))
    throw std::invalid_argument("rs::conditional_s: r, s > 0 required");
  const double m = std::log(r) - latent_z1().params()[0] - std::log(s) - latent_z2().params()[0];
  const double sd = std::sqrt(latent_z1().params()[1] * latent_z1().params()[1] +
                              latent_z2().params()[1] * latent_z2().params()[1]);
  return normal_cdf(-m / sd);
}

}  // namespace rs

SimEval RsSimulator::evaluate(const Eigen::Ref<const Eigen::RowVectorXd>& x, Rng& rng) {
  if (x.size() != 2) throw std::invalid_argument("RsSimulator: expected 2 inputs");
  return {x, rs::limit_state(x[0], x[1], rng)};
}

namespace sir {

InputModel input_model() {
  return InputModel({Marginal::uniform(1200.0, 1800.0), Marginal::uniform(20.0, 200.0),
                     Marginal::uniform(0.5, 0.75), Marginal::uniform(0.5, 0.75)});
}

long long simulate(long long s0, long long i0, double beta, double gamma,
                   long long population, Rng& rng) {
  if (s0 < 0 || i0 < 0 || population <= 0 || s0 + i0 > population)
    throw std::invalid_argument("sir::simulate: need 0 <= S0, 0 <= I0, S0+I0 <= P");
  if (!(beta > 0.0) || !(gamma > 0.0))
    throw std::invalid_argument("sir::simulate: beta, gamma > 0 required");
  long long s = s0;
  long long i = i0;
  const double pop = static_cast<double>(population);
  while (i > 0) {
    const double lam_inf = beta * static_cast<double>(s) * static_cast<double>(i) / pop;
    const double lam_rec = gamma * static_cast<double>(i);
    const double t_inf = lam_inf > 0.0 ? exponential(rng, lam_inf)
                                       : std::numeric_limits<double>::infinity();
    const double t_rec = exponential(rng, lam_rec);
    if (t_inf < t_rec) {
      --s;
      ++i;
    } else {
      --i;
    }
  }
  return s0 - s;
}

double limit_state(const Eigen::Ref<const Eigen::RowVectorXd>& x, double i_lim, Rng& rng) {
  if (x.size() != 4) throw std::invalid_argument("sir::limit_state: expected 4 inputs");
  const long long s0 = std::llround(x[0]);
  const long long i0 = std::llround(x[1]);
  return i_lim - static_cast<double>(simulate(s0, i0, x[2], x[3], kPopulation, rng));
}

}  // namespace sir

SimEval SirSimulator::evaluate(const Eigen::Ref<const Eigen::RowVectorXd>& x, Rng& rng) {
  return {x, sir::limit_state(x, i_lim_, rng)};
}

namespace toy {

InputModel input_model() {
  return InputModel({Marginal::uniform(0.0, 2.0 * M_PI)});
}

double limit_state(double x, Rng& rng) { return x * std::sin(x) + kNoiseSd * standard_normal(rng); }

double conditional_s(double x) { return normal_cdf(-x * std::sin(x) / kNoiseSd); }

}  // namespace toy

SimEval ToySimulator::evaluate(const Eigen::Ref<const Eigen::RowVectorXd>& x, Rng& rng) {
  if (x.size() != 1) throw std::invalid_argument("ToySimulator: expected 1 input");
  return {x, toy::limit_state(x[0], rng)};
}

SimEval FrozenLatentSimulator::evaluate(const Eigen::Ref<const Eigen::RowVectorXd>& x, Rng&) {
  Rng frozen = make_rng(seed_);
  return base_->evaluate(x, frozen);
}

DatasetSimulator::DatasetSimulator(Eigen::MatrixXd X, Eigen::VectorXd y, double radius)
    : X_(std::move(X)), y_(std::move(y)), radius_(radius) {
  if (X_.rows() != y_.size() || X_.rows() == 0)
    throw std::invalid_argument("DatasetSimulator: X rows must match y and be nonempty");
  if (radius_ <= 0.0) radius_ = default_radius(X_);
  used_.assign(static_cast<std::size_t>(X_.rows()), 0);
}

double DatasetSimulator::default_radius(const Eigen::Ref<const Eigen::MatrixXd>& X) {
  const Eigen::Index n = X.rows();
  if (n < 2) return 0.0;
  // Deterministic stride subsample keeps the pair count manageable.
  const Eigen::Index stride = (n + 4095) / 4096;
  std::vector<Eigen::Index> rows;
  for (Eigen::Index i = 0; i < n; i += stride) rows.push_back(i);
  std::vector<double> dists;
  dists.reserve(rows.size() * (rows.size() - 1) / 2);
  for (std::size_t a = 0; a < rows.size(); ++a) {
    for (std::size_t b = a + 1; b < rows.size(); ++b) {
      dists.push_back((X.row(rows[a]) - X.row(rows[b])).norm());
    }
  }
  const auto k = static_cast<std::size_t>(
      std::max<double>(0.0, std::floor(0.001 * static_cast<double>(dists.size()))));
  const std::size_t idx = std::min(k, dists.size() - 1);
  std::nth_element(dists.begin(), dists.begin() + static_cast<std::ptrdiff_t>(idx), dists.end());
  return dists[idx];
}

Eigen::Index DatasetSimulator::remaining() const {
  return static_cast<Eigen::Index>(std::count(used_.begin(), used_.end(), 0));
}

SimEval DatasetSimulator::evaluate(const Eigen::Ref<const Eigen::RowVectorXd>& x, Rng& rng) {
  if (x.size() != X_.cols()) throw std::invalid_argument("DatasetSimulator: dimension mismatch");
  double best = std::numeric_limits<double>::infinity();
  std::vector<Eigen::Index> nearest;
  for (Eigen::Index i = 0; i < X_.rows(); ++i) {
    if (used_[static_cast<std::size_t>(i)]) continue;
    const double d = (X_.row(i) - x).norm();
    if (d < best) {
      best = d;
      nearest.assign(1, i);
    } else if (d == best) {
      nearest.push_back(i);
    }
  }
  if (nearest.empty() || best > radius_) {
    std::ostringstream msg;
    msg << "DatasetSimulator: no unused point within " << radius_ << " of query (";
    for (Eigen::Index d = 0; d < x.size(); ++d) msg << (d ? ", " : "") << x[d];
    msg << ")";
    throw std::runtime_error(msg.str());
  }
  const Eigen::Index pick =
      nearest[uniform_index(rng, static_cast<std::uint64_t>(nearest.size()))];
  used_[static_cast<std::size_t>(pick)] = 1;
  return {X_.row(pick), y_[pick]};
}

WindowStats moving_window_stats(const Eigen::Ref<const Eigen::VectorXd>& u,
                                const Eigen::Ref<const Eigen::VectorXd>& y, double u_query,
                                double delta, const std::vector<double>& alphas) {
  if (u.size() != y.size()) throw std::invalid_argument("moving_window_stats: length mismatch");
  if (!(delta >= 0.0)) throw std::invalid_argument("moving_window_stats: delta >= 0 required");
  std::vector<double> window;
  for (Eigen::Index i = 0; i < u.size(); ++i) {
    if (std::abs(u[i] - u_query) <= delta) window.push_back(y[i]);
  }
  const auto nw = static_cast<Eigen::Index>(window.size());
  if (nw < 2)
    throw std::invalid_argument("moving_window_stats: fewer than 2 points in window");

  WindowStats stats;
  stats.n_window = nw;
  double sum = 0.0;
  for (double v : window) sum += v;
  stats.mean = sum / static_cast<double>(nw);
  double ss = 0.0;
  for (double v : window) ss += (v - stats.mean) * (v - stats.mean);
  stats.variance = ss / static_cast<double>(nw - 1);

  std::sort(window.begin(), window.end());
  stats.quantiles.reserve(alphas.size());
  for (double a : alphas) {
    if (!(a >= 0.0 && a <= 1.0))
      throw std::invalid_argument("moving_window_stats: alpha outside [0,1]");
    auto idx = static_cast<Eigen::Index>(std::floor(a * static_cast<double>(nw)));
    idx = std::clamp<Eigen::Index>(idx, 1, nw);
    stats.quantiles.push_back(window[static_cast<std::size_t>(idx - 1)]);
  }
  return stats;
}

}  // namespace alspce
