#include "rabi/meanfield_dynamics.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <sstream>

#include "rabi/errors.hpp"

namespace rabi {
namespace {

using Packed = std::array<double, 6>;

Packed pack(const MeanFieldState& s) {
  return {s.c_plus.real(), s.c_plus.imag(), s.c_minus.real(), s.c_minus.imag(), s.Q, s.Qdot};
}

MeanFieldState unpack(const Packed& x) {
  return {{x[0], x[1]}, {x[2], x[3]}, x[4], x[5]};
}

struct MeanFieldSystem {
  const LevelPair& pair;
  double alpha;
  bool backreaction;

  void operator()(const Packed& x, Packed& dx, double /*t*/) const {
    dx = pack(meanfield_rhs(unpack(x), pair, alpha, backreaction));
  }
};

}  // namespace

MeanFieldState meanfield_rhs(const MeanFieldState& s, const LevelPair& pair, double alpha,
                             bool backreaction) {
  constexpr std::complex<double> minus_i{0.0, -1.0};
  const double coupling = alpha * s.Q * pair.P;
  MeanFieldState d;
  d.c_plus = minus_i * (pair.E_plus * s.c_plus + coupling * s.c_minus);
  d.c_minus = minus_i * (pair.E_minus * s.c_minus + coupling * s.c_plus);
  d.Q = s.Qdot;
  d.Qdot = -pair.nu * pair.nu * s.Q;
  if (backreaction) d.Qdot -= 2.0 * alpha * pair.P * std::real(std::conj(s.c_plus) * s.c_minus);
  return d;
}

double inversion(const MeanFieldState& s) { return std::norm(s.c_plus) - std::norm(s.c_minus); }

double meanfield_energy(const MeanFieldState& s, const LevelPair& pair, double alpha) {
  return pair.E_plus * std::norm(s.c_plus) + pair.E_minus * std::norm(s.c_minus) +
         2.0 * alpha * pair.P * s.Q * std::real(std::conj(s.c_plus) * s.c_minus) +
         0.5 * (s.Qdot * s.Qdot + pair.nu * pair.nu * s.Q * s.Q);
}

MeanFieldTrajectory evolve_meanfield(const MeanFieldState& s0, const LevelPair& pair, double alpha,
                                     std::span<const double> t_grid, const MeanFieldOptions& opts) {
  MeanFieldSystem sys{pair, alpha, opts.backreaction};
  Packed x = pack(s0);

  const double norm0 = std::norm(s0.c_plus) + std::norm(s0.c_minus);
  const double energy0 = meanfield_energy(s0, pair, alpha);
  // Absolute energies are offset by the (negative) level energies; measure
  // drift against the largest contribution.
  const double energy_scale = std::max({std::abs(energy0), std::abs(pair.E_minus), std::abs(pair.E_plus)});

  MeanFieldTrajectory traj;
  traj.t.reserve(t_grid.size());
  traj.W.reserve(t_grid.size());

  ode::Options ode_opts;
  ode_opts.tol = opts.tol;
  // Resolve the free field oscillation even while the atom is stationary.
  ode_opts.max_step = 0.5 / pair.nu;

  traj.report = ode::integrate_on_grid(sys, x, t_grid, ode_opts,
                                       [&](std::size_t, double t, const Packed& state) {
    const MeanFieldState s = unpack(state);
    traj.t.push_back(t);
    traj.W.push_back(inversion(s));
    const double norm = std::norm(s.c_plus) + std::norm(s.c_minus);
    traj.max_norm_drift = std::max(traj.max_norm_drift, std::abs(norm - norm0));
    if (opts.backreaction) {
      traj.max_energy_drift = std::max(traj.max_energy_drift,
                                       std::abs(meanfield_energy(s, pair, alpha) - energy0) / energy_scale);
    }
    if (opts.keep_states) traj.states.push_back(s);
  });

  if (!traj.report.ok()) {
    std::ostringstream os;
    os << "evolve_meanfield: integration stopped (" << ode::to_string(traj.report.outcome)
       << ") at t=" << traj.report.t_reached << " after " << traj.report.accepted
       << " accepted / " << traj.report.rejected << " rejected steps";
    throw NumericalError(os.str());
  }
  return traj;
}

}  // namespace rabi
