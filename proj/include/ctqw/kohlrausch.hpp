#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <limits>
#include <memory>
#include <span>
#include <string>
#include <vector>

#include <gsl/gsl_errno.h>
#include <gsl/gsl_multimin.h>
#include <gsl/gsl_vector.h>

#include "ctqw/errors.hpp"
#include "ctqw/random.hpp"

namespace ctqw {

/// C0 exp(-(lambda t)^beta)
inline double kohlrausch(double t, double c0, double lambda, double beta) {
  return c0 * std::exp(-std::pow(lambda * t, beta));
}

struct FitBounds {
  double lambda_min = 1e-6;
  double lambda_max = 1e3;
  double beta_min = 0.05;
  double beta_max = 5.0;
  double c0_max_factor = 2.0; // C0 <= factor * max(values)
};

struct FitOptions {
  std::uint64_t seed = 0;
  int restarts = 5;              // jittered starts, the first one unjittered
  double size_tol = 1e-10;       // simplex size in (C0/max, ln lambda, ln beta) space
  std::size_t max_iterations = 20000;
  int polish_rounds = 8;
  FitBounds bounds{};
};

struct FitResult {
  double c0 = 0.0;
  double lambda = 0.0;
  double beta = 1.0;
  double rss = 0.0;
  bool converged = false;
  std::size_t iterations = 0;
  std::string diagnostic;
};

struct Series {
  std::vector<double> times;
  std::vector<double> values;
};

/// Samples with t_min <= t <= t_max.
inline Series fit_window(std::span<const double> times, std::span<const double> values, double t_min,
                         double t_max = std::numeric_limits<double>::infinity()) {
  if (times.size() != values.size()) throw DimensionMismatch("fit_window: times and values differ in length");
  if (!(t_min < t_max)) throw InvalidArgument("fit_window: need t_min < t_max");
  Series out;
  for (std::size_t i = 0; i < times.size(); ++i)
    if (times[i] >= t_min && times[i] <= t_max) {
      out.times.push_back(times[i]);
      out.values.push_back(values[i]);
    }
  if (out.times.empty()) throw InvalidArgument("fit_window: no samples in window");
  return out;
}

namespace detail {

struct KohlrauschProblem {
  std::span<const double> t;
  std::span<const double> v;
  double scale;       // max(values); C0 is optimized as a fraction of it
  double norm;        // sum of v^2, normalizes the objective
  FitBounds bounds;

  // x = (C0 / scale, ln lambda, ln beta)
  std::array<double, 3> clamp(const double* x) const {
    return {std::clamp(x[0], 0.0, bounds.c0_max_factor),
            std::clamp(x[1], std::log(bounds.lambda_min), std::log(bounds.lambda_max)),
            std::clamp(x[2], std::log(bounds.beta_min), std::log(bounds.beta_max))};
  }

  double rss(double c0, double lambda, double beta) const {
    double s = 0.0;
    for (std::size_t i = 0; i < t.size(); ++i) {
      const double r = v[i] - kohlrausch(t[i], c0, lambda, beta);
      s += r * r;
    }
    return s;
  }

  // Out-of-box points are scored at their projection plus a quadratic wall.
  double objective(const double* x) const {
    const auto p = clamp(x);
    double wall = 0.0;
    for (int i = 0; i < 3; ++i) wall += (x[i] - p[i]) * (x[i] - p[i]);
    return rss(p[0] * scale, std::exp(p[1]), std::exp(p[2])) / norm + wall;
  }
};

inline double gsl_objective(const gsl_vector* x, void* params) {
  const auto* problem = static_cast<const KohlrauschProblem*>(params);
  const double xs[3] = {gsl_vector_get(x, 0), gsl_vector_get(x, 1), gsl_vector_get(x, 2)};
  return problem->objective(xs);
}

struct SimplexRun {
  std::array<double, 3> x;
  double f;
  std::size_t iterations;
  bool collapsed;
};

inline SimplexRun run_simplex(const KohlrauschProblem& problem, const std::array<double, 3>& start,
                              const std::array<double, 3>& step, double size_tol, std::size_t max_iter) {
  using Minimizer = std::unique_ptr<gsl_multimin_fminimizer, decltype(&gsl_multimin_fminimizer_free)>;
  using Vector = std::unique_ptr<gsl_vector, decltype(&gsl_vector_free)>;

  Minimizer mz(gsl_multimin_fminimizer_alloc(gsl_multimin_fminimizer_nmsimplex2, 3), &gsl_multimin_fminimizer_free);
  Vector x0(gsl_vector_alloc(3), &gsl_vector_free);
  Vector ss(gsl_vector_alloc(3), &gsl_vector_free);
  for (std::size_t i = 0; i < 3; ++i) {
    gsl_vector_set(x0.get(), i, start[i]);
    gsl_vector_set(ss.get(), i, step[i]);
  }
  gsl_multimin_function fn{&gsl_objective, 3, const_cast<KohlrauschProblem*>(&problem)};
  gsl_multimin_fminimizer_set(mz.get(), &fn, x0.get(), ss.get());

  std::size_t iter = 0;
  bool collapsed = false;
  while (iter < max_iter) {
    ++iter;
    if (gsl_multimin_fminimizer_iterate(mz.get()) != GSL_SUCCESS) break;
    if (gsl_multimin_fminimizer_size(mz.get()) < size_tol) {
      collapsed = true;
      break;
    }
  }
  const gsl_vector* xb = gsl_multimin_fminimizer_x(mz.get());
  return {{gsl_vector_get(xb, 0), gsl_vector_get(xb, 1), gsl_vector_get(xb, 2)},
          gsl_multimin_fminimizer_minimum(mz.get()),
          iter,
          collapsed};
}

} // namespace detail

/// Least-squares fit of C0 exp(-(lambda t)^beta) by bounded Nelder–Mead with jittered
/// restarts. Degenerate input (constant series) and fits that end on a bound come back
/// with converged = false and a diagnostic instead of throwing.
inline FitResult fit_stretched_exponential(std::span<const double> times, std::span<const double> values,
                                           const FitOptions& opts = {}) {
  if (times.size() != values.size()) throw DimensionMismatch("fit_stretched_exponential: times and values differ in length");
  if (times.size() < 5) throw InvalidArgument("fit_stretched_exponential: need at least 5 points");
  for (std::size_t i = 1; i < times.size(); ++i)
    if (!(times[i] > times[i - 1])) throw InvalidArgument("fit_stretched_exponential: times must be strictly increasing");
  for (double v : values)
    if (!(v >= 0.0) || !std::isfinite(v)) throw InvalidArgument("fit_stretched_exponential: values must be finite and >= 0");

  const auto [lo, hi] = std::minmax_element(values.begin(), values.end());
  const FitBounds& b = opts.bounds;
  FitResult result;

  if (*hi - *lo <= 1e-12 * std::max(std::abs(*hi), std::numeric_limits<double>::min())) {
    result.c0 = *hi;
    result.lambda = b.lambda_min;
    result.beta = 1.0;
    detail::KohlrauschProblem p{times, values, 1.0, 1.0, b};
    result.rss = p.rss(result.c0, result.lambda, result.beta);
    result.converged = false;
    result.diagnostic = "constant series: decay rate and stretching exponent are unidentifiable";
    return result;
  }

  double norm = 0.0;
  for (double v : values) norm += v * v;
  const detail::KohlrauschProblem problem{times, values, *hi, norm, b};

  // Nominal start: C0 = first value, lambda = 1 / half-life, beta = 1.
  const double c0_init = values.front() > 0.0 ? values.front() : *hi;
  double t_half = 0.0;
  for (std::size_t i = 0; i < times.size(); ++i)
    if (values[i] < 0.5 * c0_init) {
      t_half = times[i];
      break;
    }
  const double lambda_init = t_half > 0.0 ? 1.0 / t_half : 1.0 / times.back();
  const std::array<double, 3> nominal{c0_init / *hi, std::log(lambda_init), 0.0};
  const std::array<double, 3> step{0.1, 0.5, 0.3};

  Rng rng(opts.seed);
  detail::SimplexRun best{nominal, std::numeric_limits<double>::infinity(), 0, false};
  std::size_t iterations = 0;
  for (int r = 0; r < std::max(1, opts.restarts); ++r) {
    auto start = nominal;
    if (r > 0) {
      start[0] *= std::exp(0.4 * (rng.uniform() - 0.5));
      start[1] += 3.0 * (rng.uniform() - 0.5);
      start[2] += 1.4 * (rng.uniform() - 0.5);
    }
    auto run = detail::run_simplex(problem, start, step, opts.size_tol, opts.max_iterations);
    iterations += run.iterations;
    if (run.f < best.f) best = run;
  }
  // Restart from the incumbent with a fresh simplex until it stops moving.
  for (int round = 0; round < opts.polish_rounds; ++round) {
    auto run = detail::run_simplex(problem, best.x, {0.02, 0.05, 0.05}, opts.size_tol, opts.max_iterations);
    iterations += run.iterations;
    const bool improved = run.f < best.f - 1e-15 * std::max(1.0, best.f);
    if (run.f <= best.f) best = run;
    if (!improved) break;
  }

  const auto p = problem.clamp(best.x.data());
  result.c0 = p[0] * *hi;
  result.lambda = std::exp(p[1]);
  result.beta = std::exp(p[2]);
  result.rss = problem.rss(result.c0, result.lambda, result.beta);
  result.iterations = iterations;
  result.converged = best.collapsed;
  if (!best.collapsed) result.diagnostic = "simplex did not collapse within the iteration budget";

  const auto at_bound = [](double x, double bound) { return std::abs(x - bound) <= 1e-9 * std::max(1.0, std::abs(bound)); };
  if (at_bound(result.lambda, b.lambda_min) || at_bound(result.lambda, b.lambda_max)) {
    result.converged = false;
    result.diagnostic = "decay rate ended on its bound";
  } else if (at_bound(result.beta, b.beta_min) || at_bound(result.beta, b.beta_max)) {
    result.converged = false;
    result.diagnostic = "stretching exponent ended on its bound";
  }
  return result;
}

} // namespace ctqw
