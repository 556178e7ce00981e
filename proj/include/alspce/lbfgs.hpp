#pragma once

#include <Eigen/Core>
#include <cmath>
#include <functional>
#include <vector>

namespace alspce {

struct LbfgsOptions {
  int max_iterations = 500;
  int memory = 8;
  double grad_tolerance = 1e-6;      // on ||g||_inf, scaled by max(1, |f|) * rel below
  double grad_rel_tolerance = 1e-9;
  double f_rel_tolerance = 1e-12;    // stop when progress stalls twice in a row
  int max_line_search = 40;
  double armijo_c1 = 1e-4;
};

struct LbfgsResult {
  Eigen::VectorXd x;
  double f = 0.0;
  Eigen::VectorXd grad;
  int iterations = 0;
  bool converged = false;  // gradient or progress criterion met (not iteration cap)
};

// Minimizes f via limited-memory BFGS with Armijo backtracking. The callable
// must return the objective and fill the gradient. Curvature pairs with
// s'y <= 1e-10 ||s|| ||y|| are skipped to keep the implicit Hessian positive.
inline LbfgsResult lbfgs_minimize(
    const std::function<double(const Eigen::VectorXd&, Eigen::VectorXd&)>& fn,
    const Eigen::VectorXd& x0, const LbfgsOptions& opt = {}) {
  const Eigen::Index n = x0.size();
  LbfgsResult res;
  res.x = x0;
  res.grad.resize(n);
  res.f = fn(res.x, res.grad);

  std::vector<Eigen::VectorXd> s_hist, y_hist;
  std::vector<double> rho_hist;
  Eigen::VectorXd q(n), dir(n), x_new(n), g_new(n);
  int stall_count = 0;

  for (res.iterations = 0; res.iterations < opt.max_iterations; ++res.iterations) {
    double gtol = opt.grad_tolerance + opt.grad_rel_tolerance * std::abs(res.f);
    if (res.grad.lpNorm<Eigen::Infinity>() <= gtol) {
      res.converged = true;
      break;
    }

    // Two-loop recursion.
    q = res.grad;
    const int m = static_cast<int>(s_hist.size());
    std::vector<double> alpha(static_cast<std::size_t>(m));
    for (int i = m - 1; i >= 0; --i) {
      alpha[static_cast<std::size_t>(i)] =
          rho_hist[static_cast<std::size_t>(i)] * s_hist[static_cast<std::size_t>(i)].dot(q);
      q -= alpha[static_cast<std::size_t>(i)] * y_hist[static_cast<std::size_t>(i)];
    }
    if (m > 0) {
      const auto& s = s_hist.back();
      const auto& y = y_hist.back();
      q *= s.dot(y) / y.squaredNorm();
    }
    for (int i = 0; i < m; ++i) {
      double beta =
          rho_hist[static_cast<std::size_t>(i)] * y_hist[static_cast<std::size_t>(i)].dot(q);
      q += (alpha[static_cast<std::size_t>(i)] - beta) * s_hist[static_cast<std::size_t>(i)];
    }
    dir = -q;

    double dg = dir.dot(res.grad);
    if (!(dg < 0.0)) {  // not a descent direction; restart from steepest descent
      dir = -res.grad;
      dg = -res.grad.squaredNorm();
      s_hist.clear();
      y_hist.clear();
      rho_hist.clear();
    }

    double step = 1.0;
    double f_new = res.f;
    bool accepted = false;
    for (int ls = 0; ls < opt.max_line_search; ++ls) {
      x_new = res.x + step * dir;
      f_new = fn(x_new, g_new);
      if (std::isfinite(f_new) && f_new <= res.f + opt.armijo_c1 * step * dg) {
        accepted = true;
        break;
      }
      step *= 0.5;
    }
    if (!accepted) break;  // line search exhausted; leave converged as-is

    Eigen::VectorXd s = x_new - res.x;
    Eigen::VectorXd y = g_new - res.grad;
    double sy = s.dot(y);
    if (sy > 1e-10 * s.norm() * y.norm()) {
      s_hist.push_back(std::move(s));
      y_hist.push_back(std::move(y));
      rho_hist.push_back(1.0 / sy);
      if (static_cast<int>(s_hist.size()) > opt.memory) {
        s_hist.erase(s_hist.begin());
        y_hist.erase(y_hist.begin());
        rho_hist.erase(rho_hist.begin());
      }
    }

    double df = res.f - f_new;
    res.x = x_new;
    res.f = f_new;
    res.grad = g_new;
    if (df <= opt.f_rel_tolerance * (std::abs(res.f) + 1.0)) {
      if (++stall_count >= 2) {
        res.converged = true;
        break;
      }
    } else {
      stall_count = 0;
    }
  }
  if (!res.converged && res.grad.lpNorm<Eigen::Infinity>() <=
                            opt.grad_tolerance + opt.grad_rel_tolerance * std::abs(res.f))
    res.converged = true;
  return res;
}

}  // namespace alspce
