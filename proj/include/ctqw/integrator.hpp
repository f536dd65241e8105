#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>
#include <span>

#include <Eigen/Dense>

#include "ctqw/errors.hpp"

namespace ctqw {

struct Dopri5Options {
  double abs_tol = 1e-8;
  double rel_tol = 1e-8;
  double initial_step = 0.0; // 0 = pick automatically
  double max_step = std::numeric_limits<double>::infinity();
  std::size_t max_steps = 10'000'000;
  bool max_norm = false; // control the largest scaled component instead of the RMS
};

struct Dopri5Stats {
  std::size_t accepted = 0;
  std::size_t rejected = 0;
  std::size_t rhs_evaluations = 0;
};

namespace detail {

// Dormand & Prince (1980) tableau, Hairer's dense-output coefficients.
struct Dopri5Tableau {
  static constexpr double c2 = 1.0 / 5, c3 = 3.0 / 10, c4 = 4.0 / 5, c5 = 8.0 / 9;
  static constexpr double a21 = 1.0 / 5;
  static constexpr double a31 = 3.0 / 40, a32 = 9.0 / 40;
  static constexpr double a41 = 44.0 / 45, a42 = -56.0 / 15, a43 = 32.0 / 9;
  static constexpr double a51 = 19372.0 / 6561, a52 = -25360.0 / 2187, a53 = 64448.0 / 6561, a54 = -212.0 / 729;
  static constexpr double a61 = 9017.0 / 3168, a62 = -355.0 / 33, a63 = 46732.0 / 5247, a64 = 49.0 / 176,
                          a65 = -5103.0 / 18656;
  static constexpr double a71 = 35.0 / 384, a73 = 500.0 / 1113, a74 = 125.0 / 192, a75 = -2187.0 / 6784,
                          a76 = 11.0 / 84;
  static constexpr double e1 = 71.0 / 57600, e3 = -71.0 / 16695, e4 = 71.0 / 1920, e5 = -17253.0 / 339200,
                          e6 = 22.0 / 525, e7 = -1.0 / 40;
  static constexpr double d1 = -12715105075.0 / 11282082432, d3 = 87487479700.0 / 32700410799,
                          d4 = -10690763975.0 / 1880347072, d5 = 701980252875.0 / 199316789632,
                          d6 = -1453857185.0 / 822651844, d7 = 69997945.0 / 29380423;
};

/// Hairer's mixed error norm: RMS of |e_i| / (atol + rtol * max(|y0_i|, |y1_i|)).
template <class Derived>
double scaled_rms(const Eigen::MatrixBase<Derived>& err, const Eigen::MatrixBase<Derived>& y0,
                  const Eigen::MatrixBase<Derived>& y1, double atol, double rtol) {
  const auto scale = (atol + rtol * y0.cwiseAbs().cwiseMax(y1.cwiseAbs()).array());
  return std::sqrt((err.cwiseAbs().array() / scale).square().sum() / static_cast<double>(err.size()));
}

/// Largest |e_i| / (atol + rtol * max(|y0_i|, |y1_i|)).
template <class Derived>
double scaled_max(const Eigen::MatrixBase<Derived>& err, const Eigen::MatrixBase<Derived>& y0,
                  const Eigen::MatrixBase<Derived>& y1, double atol, double rtol) {
  const auto scale = (atol + rtol * y0.cwiseAbs().cwiseMax(y1.cwiseAbs()).array());
  return (err.cwiseAbs().array() / scale).maxCoeff();
}

template <class Derived>
double rms(const Eigen::MatrixBase<Derived>& x, double atol, double rtol, const Eigen::MatrixBase<Derived>& y) {
  const auto scale = (atol + rtol * y.cwiseAbs().array());
  return std::sqrt((x.cwiseAbs().array() / scale).square().sum() / static_cast<double>(x.size()));
}

} // namespace detail

/// Integrates y' = f(t, y) from `t0` with adaptive Dormand–Prince 5(4) steps and reports
/// y at every entry of `sample_times` (ascending, all >= t0) through `observe(t, y)`.
///
/// Samples strictly inside a step come from the 4th-order continuous extension; the
/// final sample is hit exactly. `State` is any Eigen dense matrix type; `f(t, y, dydt)`
/// writes the derivative into `dydt`.
template <class State, class Rhs, class Observer>
Dopri5Stats integrate_dopri5(Rhs&& f, State y, double t0, std::span<const double> sample_times, Observer&& observe,
                             const Dopri5Options& opts = {}) {
  using T = detail::Dopri5Tableau;
  Dopri5Stats stats;
  if (sample_times.empty()) return stats;
  if (sample_times.front() < t0) throw InvalidArgument("integrate_dopri5: sample times precede t0");
  for (std::size_t i = 1; i < sample_times.size(); ++i)
    if (!(sample_times[i] > sample_times[i - 1]))
      throw InvalidArgument("integrate_dopri5: sample times must be strictly increasing");

  std::size_t next = 0;
  double t = t0;
  while (next < sample_times.size() && sample_times[next] == t) observe(sample_times[next++], y);
  if (next == sample_times.size()) return stats;
  const double t_end = sample_times.back();

  State k1 = State::Zero(y.rows(), y.cols()), k2 = k1, k3 = k1, k4 = k1, k5 = k1, k6 = k1, k7 = k1;
  State y_stage = k1, y_new = k1;
  auto eval = [&](double tt, const State& yy, State& out) {
    f(tt, yy, out);
    ++stats.rhs_evaluations;
  };
  eval(t, y, k1);

  double h = opts.initial_step;
  if (h <= 0.0) {
    // Hairer's starting-step heuristic (explicit Euler probe).
    const double d0 = detail::rms(y, opts.abs_tol, opts.rel_tol, y);
    const double d1 = detail::rms(k1, opts.abs_tol, opts.rel_tol, y);
    double h0 = (d0 < 1e-5 || d1 < 1e-5) ? 1e-6 : 0.01 * d0 / d1;
    h0 = std::min(h0, t_end - t);
    y_stage = y + h0 * k1;
    eval(t + h0, y_stage, k2);
    const double d2 = detail::rms(State(k2 - k1), opts.abs_tol, opts.rel_tol, y) / h0;
    const double h1 = std::max(d1, d2) <= 1e-15 ? std::max(1e-6, h0 * 1e-3) : std::pow(0.01 / std::max(d1, d2), 0.2);
    h = std::min(100.0 * h0, h1);
  }
  h = std::min({h, opts.max_step, t_end - t});

  constexpr double safety = 0.9, fac_min = 0.2, fac_max = 10.0;
  bool last_rejected = false;

  while (next < sample_times.size()) {
    if (stats.accepted + stats.rejected >= opts.max_steps)
      throw IntegrationError("integrate_dopri5: step budget exhausted", t);
    if (h < 16.0 * std::numeric_limits<double>::epsilon() * std::max(1.0, std::abs(t)))
      throw IntegrationError("integrate_dopri5: step size underflow", t);

    const bool final_step = t + h >= t_end;
    if (final_step) h = t_end - t;

    y_stage = y + h * (T::a21 * k1);
    eval(t + T::c2 * h, y_stage, k2);
    y_stage = y + h * (T::a31 * k1 + T::a32 * k2);
    eval(t + T::c3 * h, y_stage, k3);
    y_stage = y + h * (T::a41 * k1 + T::a42 * k2 + T::a43 * k3);
    eval(t + T::c4 * h, y_stage, k4);
    y_stage = y + h * (T::a51 * k1 + T::a52 * k2 + T::a53 * k3 + T::a54 * k4);
    eval(t + T::c5 * h, y_stage, k5);
    y_stage = y + h * (T::a61 * k1 + T::a62 * k2 + T::a63 * k3 + T::a64 * k4 + T::a65 * k5);
    eval(t + h, y_stage, k6);
    y_new = y + h * (T::a71 * k1 + T::a73 * k3 + T::a74 * k4 + T::a75 * k5 + T::a76 * k6);
    eval(t + h, y_new, k7);

    const State err = h * (T::e1 * k1 + T::e3 * k3 + T::e4 * k4 + T::e5 * k5 + T::e6 * k6 + T::e7 * k7);
    const double err_norm = opts.max_norm ? detail::scaled_max(err, y, y_new, opts.abs_tol, opts.rel_tol)
                                           : detail::scaled_rms(err, y, y_new, opts.abs_tol, opts.rel_tol);
    if (!std::isfinite(err_norm)) throw IntegrationError("integrate_dopri5: non-finite error estimate", t);

    if (err_norm <= 1.0) {
      ++stats.accepted;
      const double t_new = final_step ? t_end : t + h;
      if (next < sample_times.size() && sample_times[next] < t_new) {
        const State ydiff = y_new - y;
        const State bspl = h * k1 - ydiff;
        const State r4 = ydiff - h * k7 - bspl;
        const State r5 = h * (T::d1 * k1 + T::d3 * k3 + T::d4 * k4 + T::d5 * k5 + T::d6 * k6 + T::d7 * k7);
        while (next < sample_times.size() && sample_times[next] < t_new) {
          const double theta = (sample_times[next] - t) / h;
          const double theta1 = 1.0 - theta;
          const State y_dense = y + theta * (ydiff + theta1 * (bspl + theta * (r4 + theta1 * r5)));
          observe(sample_times[next], y_dense);
          ++next;
        }
      }
      y = y_new;
      k1 = k7;
      t = t_new;
      if (next < sample_times.size() && sample_times[next] == t) observe(sample_times[next++], y);

      double fac = err_norm == 0.0 ? fac_max : safety * std::pow(err_norm, -0.2);
      fac = std::clamp(fac, fac_min, last_rejected ? 1.0 : fac_max);
      h = std::min(h * fac, opts.max_step);
      if (next < sample_times.size()) h = std::min(h, t_end - t);
      last_rejected = false;
    } else {
      ++stats.rejected;
      h *= std::max(fac_min, safety * std::pow(err_norm, -0.2));
      last_rejected = true;
    }
  }
  return stats;
}

} // namespace ctqw
