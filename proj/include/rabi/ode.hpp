#pragma once

// Adaptive explicit Runge-Kutta driver that reports the solution on a fixed
// output grid. The Fehlberg 7(8) tableau comes from Boost.Odeint; step
// acceptance is done here so that systems can veto a trial step (node guard).

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <limits>
#include <span>
#include <string>

#include <boost/numeric/odeint/stepper/runge_kutta_fehlberg78.hpp>

namespace rabi::ode {

// Drift of the amplitude norm grows linearly with the step count at a rate
// set by rtol; 1e-13 keeps it near 1e-10 per 1e6 a.u. for the coupled
// atom-field systems here.
struct Tolerances {
  double rtol = 1e-13;
  double atol = 1e-15;
};

struct Options {
  Tolerances tol;
  double initial_step = 0.0;  // 0 selects a step from the initial derivative
  double max_step = std::numeric_limits<double>::infinity();
  int guard_retries = 40;     // consecutive vetoed trials before giving up
  std::uint64_t max_steps = 200'000'000;
};

enum class Outcome { completed, guard_exhausted, step_underflow, step_limit };

struct Report {
  Outcome outcome = Outcome::completed;
  std::uint64_t accepted = 0;
  std::uint64_t rejected = 0;
  std::uint64_t guard_rejections = 0;
  double t_reached = 0.0;

  bool ok() const { return outcome == Outcome::completed; }
};

inline const char* to_string(Outcome o) {
  switch (o) {
    case Outcome::completed: return "completed";
    case Outcome::guard_exhausted: return "guard_exhausted";
    case Outcome::step_underflow: return "step_underflow";
    case Outcome::step_limit: return "step_limit";
  }
  return "unknown";
}

// A system may expose a guard: when `guard_tripped()` is true after a trial
// step, the step is discarded and retried with a quarter of the size.
template <class System>
concept GuardedSystem = requires(System& s) {
  { s.guard_tripped() } -> std::convertible_to<bool>;
  s.clear_guard();
};

namespace detail {

template <std::size_t N>
double error_norm(const std::array<double, N>& x0, const std::array<double, N>& x1,
                  const std::array<double, N>& err, const Tolerances& tol) {
  double worst = 0.0;
  for (std::size_t i = 0; i < N; ++i) {
    const double scale = tol.atol + tol.rtol * std::max(std::abs(x0[i]), std::abs(x1[i]));
    worst = std::max(worst, std::abs(err[i]) / scale);
  }
  return worst;
}

}  // namespace detail

// Integrates `x` (given at t_grid.front()) across the grid. `observe(k, t, x)`
// is called for every grid index, starting with k = 0. On failure `x` holds
// the last accepted state and the report says why integration stopped.
template <std::size_t N, class System, class Observer>
Report integrate_on_grid(System& sys, std::array<double, N>& x,
                         std::span<const double> t_grid, const Options& opts,
                         Observer&& observe) {
  using State = std::array<double, N>;
  boost::numeric::odeint::runge_kutta_fehlberg78<State> stepper;

  Report report;
  if (t_grid.empty()) return report;

  double t = t_grid.front();
  report.t_reached = t;
  observe(std::size_t{0}, t, std::as_const(x));
  if (t_grid.size() == 1) return report;

  auto rhs = [&sys](const State& s, State& ds, double tt) { sys(s, ds, tt); };

  double h = opts.initial_step;
  if (h <= 0.0) {
    State dx{};
    sys(x, dx, t);
    double xn = 0.0, fn = 0.0;
    for (std::size_t i = 0; i < N; ++i) {
      const double sc = opts.tol.atol + opts.tol.rtol * std::abs(x[i]);
      xn = std::max(xn, std::abs(x[i]) / sc);
      fn = std::max(fn, std::abs(dx[i]) / sc);
    }
    h = (xn < 1e-5 || fn < 1e-5) ? 1e-6 : 0.01 * xn / fn;
    h = std::min(h, t_grid[1] - t_grid[0]);
    if constexpr (GuardedSystem<System>) sys.clear_guard();
  }
  h = std::min(h, opts.max_step);

  State trial{};
  State err{};
  int guard_streak = 0;

  for (std::size_t k = 1; k < t_grid.size(); ++k) {
    const double target = t_grid[k];
    while (t < target) {
      if (report.accepted + report.rejected >= opts.max_steps) {
        report.outcome = Outcome::step_limit;
        return report;
      }
      const double remaining = target - t;
      const bool clamped = h >= remaining;
      const double step = clamped ? remaining : h;
      if (step <= 16.0 * std::numeric_limits<double>::epsilon() * std::max(1.0, std::abs(t))) {
        report.outcome = Outcome::step_underflow;
        return report;
      }

      stepper.do_step(rhs, x, t, trial, step, err);

      if constexpr (GuardedSystem<System>) {
        if (sys.guard_tripped()) {
          sys.clear_guard();
          ++report.guard_rejections;
          ++report.rejected;
          if (++guard_streak > opts.guard_retries) {
            report.outcome = Outcome::guard_exhausted;
            return report;
          }
          h = 0.25 * step;
          continue;
        }
      }

      const double e = detail::error_norm(x, trial, err, opts.tol);
      if (!std::isfinite(e) || e > 1.0) {
        ++report.rejected;
        const double shrink = std::isfinite(e) ? std::max(0.1, 0.9 * std::pow(e, -1.0 / 8.0)) : 0.1;
        h = step * shrink;
        continue;
      }

      x = trial;
      t = clamped ? target : t + step;
      ++report.accepted;
      guard_streak = 0;
      report.t_reached = t;

      const double grow = e == 0.0 ? 5.0 : std::min(5.0, 0.9 * std::pow(e, -1.0 / 8.0));
      // A step shortened to hit the grid says nothing about the natural size.
      const double next = step * grow;
      h = std::min(opts.max_step, clamped ? std::max(h, next) : next);
    }
    observe(k, t, std::as_const(x));
  }
  return report;
}

}  // namespace rabi::ode
