#pragma once

#include <Eigen/Dense>
#include <cmath>
#include <functional>
#include <limits>

#include "tdbh/errors.hpp"

namespace tdbh {

struct OdeOptions {
  double rtol = 1e-10;
  double atol = 1e-12;
  double h_max = std::numeric_limits<double>::infinity();
  double h_init = 0.0;  // 0 = automatic
};

struct OdeStats {
  long accepted = 0;
  long rejected = 0;
  double h_last = 0.0;
};

namespace detail {

// Dormand-Prince 5(4) tableau
constexpr double dp_c[7] = {0.0, 1.0 / 5, 3.0 / 10, 4.0 / 5, 8.0 / 9, 1.0, 1.0};
constexpr double dp_a[7][6] = {
    {},
    {1.0 / 5},
    {3.0 / 40, 9.0 / 40},
    {44.0 / 45, -56.0 / 15, 32.0 / 9},
    {19372.0 / 6561, -25360.0 / 2187, 64448.0 / 6561, -212.0 / 729},
    {9017.0 / 3168, -355.0 / 33, 46732.0 / 5247, 49.0 / 176, -5103.0 / 18656},
    {35.0 / 384, 0.0, 500.0 / 1113, 125.0 / 192, -2187.0 / 6784, 11.0 / 84}};
constexpr double dp_e[7] = {71.0 / 57600,    0.0,          -71.0 / 16695,
                            71.0 / 1920,     -17253.0 / 339200,
                            22.0 / 525,      -1.0 / 40};

inline double error_ratio(const Eigen::VectorXcd& err,
                          const Eigen::VectorXcd& y0,
                          const Eigen::VectorXcd& y1, const OdeOptions& o) {
  // weighted max norm; zero-derivative components contribute nothing, which
  // keeps reduced models stepping identically to their full counterparts
  double r = 0.0;
  for (long i = 0; i < err.size(); ++i) {
    const double scale =
        o.atol + o.rtol * std::max(std::abs(y0[i]), std::abs(y1[i]));
    r = std::max(r, std::abs(err[i]) / scale);
  }
  return r;
}

}  // namespace detail

/// Integrates y' = f(t, y) from t0 to t1 with the embedded Dormand-Prince
/// 5(4) pair, stepping exactly onto t1. after_accept(t, y) runs after every
/// accepted step (normalization hooks); it may modify y in place.
template <class Rhs, class PostStep>
void integrate_adaptive(Rhs&& f, Eigen::VectorXcd& y, double t0, double t1,
                        const OdeOptions& opts, OdeStats& stats,
                        PostStep&& after_accept) {
  using detail::dp_a;
  using detail::dp_c;
  using detail::dp_e;
  if (t1 <= t0) return;
  const long n = y.size();
  Eigen::VectorXcd k[7];
  for (auto& v : k) v.resize(n);
  Eigen::VectorXcd ytmp(n), ynew(n), err(n);

  double t = t0;
  f(t, y, k[0]);
  double h = opts.h_init;
  if (h <= 0.0) {
    // standard startup heuristic from the weighted norms of y and f
    double d0 = 0.0, d1 = 0.0;
    for (long i = 0; i < n; ++i) {
      const double scale = opts.atol + opts.rtol * std::abs(y[i]);
      d0 = std::max(d0, std::abs(y[i]) / scale);
      d1 = std::max(d1, std::abs(k[0][i]) / scale);
    }
    h = (d1 > 1e-10) ? 0.01 * d0 / d1 : 1e-6;
    h = std::min(h, t1 - t0);
  }
  h = std::min(h, opts.h_max);

  bool fsal_valid = true;
  while (t < t1) {
    const double h_floor = 16.0 * std::numeric_limits<double>::epsilon() *
                           std::max(1.0, std::abs(t));
    if (h < h_floor) throw NumericalError("ode step size underflow at t = " +
                                          std::to_string(t));
    bool clipped = false;
    if (t + h >= t1) {
      h = t1 - t;
      clipped = true;
    }
    if (!fsal_valid) f(t, y, k[0]);
    for (int s = 1; s < 7; ++s) {
      ytmp = y;
      for (int j = 0; j < s; ++j)
        if (dp_a[s][j] != 0.0) ytmp += (h * dp_a[s][j]) * k[j];
      f(t + dp_c[s] * h, ytmp, k[s]);
    }
    // stage 7 uses the 5th-order weights, so ytmp of the last stage is y_new
    ynew = ytmp;
    err.setZero();
    for (int s = 0; s < 7; ++s)
      if (dp_e[s] != 0.0) err += (h * dp_e[s]) * k[s];
    const double ratio = detail::error_ratio(err, y, ynew, opts);

    if (!(ratio <= 1.0) || !std::isfinite(ratio)) {
      ++stats.rejected;
      const double shrink = std::isfinite(ratio)
                                ? std::max(0.2, 0.9 * std::pow(ratio, -0.2))
                                : 0.2;
      h *= shrink;
      continue;  // (t, y) unchanged, k[0] still valid
    }
    t = clipped ? t1 : t + h;
    y = ynew;
    k[0] = k[6];  // FSAL
    fsal_valid = true;
    ++stats.accepted;
    stats.h_last = h;
    const double grow =
        (ratio > 1e-12) ? std::min(5.0, 0.9 * std::pow(ratio, -0.2)) : 5.0;
    h = std::min(h * grow, opts.h_max);
    if (after_accept(t, y)) {
      // state was modified (renormalization); FSAL derivative is stale
      fsal_valid = false;
    }
  }
}

}  // namespace tdbh
