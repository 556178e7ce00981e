#pragma once

#include <Eigen/Core>
#include <cmath>
#include <limits>
#include <stdexcept>

namespace alspce {

inline constexpr double kLog2Pi = 1.8378770664093454835606594728112;
inline constexpr double kSqrt2 = 1.4142135623730950488016887242097;

inline double normal_pdf(double x) {
  return std::exp(-0.5 * x * x - 0.5 * kLog2Pi);
}

inline double normal_logpdf(double x) { return -0.5 * x * x - 0.5 * kLog2Pi; }

// erfc-based CDF keeps full relative accuracy in the lower tail, which the
// small failure probabilities here live in.
inline double normal_cdf(double x) {
  return 0.5 * std::erfc(-x / kSqrt2);
}

namespace detail {

// Rational approximation for the standard normal quantile (Acklam's
// coefficients), polished below with one Halley step to full double accuracy.
inline double norm_quantile_seed(double p) {
  static const double a[] = {-3.969683028665376e+01, 2.209460984245205e+02,
                             -2.759285104469687e+02, 1.383577518672690e+02,
                             -3.066479806614716e+01, 2.506628277459239e+00};
  static const double b[] = {-5.447609879822406e+01, 1.615858368580409e+02,
                             -1.556989798598866e+02, 6.680131188771972e+01,
                             -1.328068155288572e+01};
  static const double c[] = {-7.784894002430293e-03, -3.223964580411365e-01,
                             -2.400758277161838e+00, -2.549732539343734e+00,
                             4.374664141464968e+00,  2.938163982698783e+00};
  static const double d[] = {7.784695709041462e-03, 3.224671290700398e-01,
                             2.445134137142996e+00, 3.754408661907416e+00};
  const double plow = 0.02425;
  if (p < plow) {
    double q = std::sqrt(-2.0 * std::log(p));
    return (((((c[0] * q + c[1]) * q + c[2]) * q + c[3]) * q + c[4]) * q + c[5]) /
           ((((d[0] * q + d[1]) * q + d[2]) * q + d[3]) * q + 1.0);
  }
  if (p > 1.0 - plow) {
    double q = std::sqrt(-2.0 * std::log(1.0 - p));
    return -(((((c[0] * q + c[1]) * q + c[2]) * q + c[3]) * q + c[4]) * q + c[5]) /
           ((((d[0] * q + d[1]) * q + d[2]) * q + d[3]) * q + 1.0);
  }
  double q = p - 0.5;
  double r = q * q;
  return (((((a[0] * r + a[1]) * r + a[2]) * r + a[3]) * r + a[4]) * r + a[5]) * q /
         (((((b[0] * r + b[1]) * r + b[2]) * r + b[3]) * r + b[4]) * r + 1.0);
}

}  // namespace detail

inline double normal_icdf(double p) {
  if (!(p > 0.0 && p < 1.0)) {
    if (p == 0.0) return -std::numeric_limits<double>::infinity();
    if (p == 1.0) return std::numeric_limits<double>::infinity();
    throw std::domain_error("normal_icdf: p outside [0,1]");
  }
  double x = detail::norm_quantile_seed(p);
  // Halley refinement on F(x) - p = 0.
  double e = normal_cdf(x) - p;
  double u = e / normal_pdf(x);
  x -= u / (1.0 + 0.5 * x * u);
  return x;
}

inline double log_sum_exp(const Eigen::Ref<const Eigen::ArrayXd>& v) {
  double m = v.maxCoeff();
  if (!std::isfinite(m)) return m;  // all -inf (or a NaN) propagates
  return m + std::log((v - m).exp().sum());
}

// Batch Phi(t) with a saturation cut: |t| > 9 gives Phi within 1e-19 of 0/1,
// so erfc is skipped there. Scoring loops spend most of their time in this
// saturated regime once the emulator sharpens.
inline void normal_cdf_batch(const double* t, double* out, Eigen::Index n) {
  for (Eigen::Index i = 0; i < n; ++i) {
    double x = t[i];
    if (x > 9.0)
      out[i] = 1.0;
    else if (x < -9.0)
      out[i] = 0.0;
    else
      out[i] = 0.5 * std::erfc(-x / kSqrt2);
  }
}

}  // namespace alspce
