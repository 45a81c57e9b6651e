#include "rabi/bohmian_dynamics.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <sstream>

#include "rabi/errors.hpp"

namespace rabi {
namespace {

using Packed = std::array<double, 9>;

Packed pack(const BohmianState& s) {
  return {s.c_plus.real(), s.c_plus.imag(), s.c_minus.real(), s.c_minus.imag(),
          s.X.x(),         s.X.y(),         s.X.z(),          s.Q,
          s.Qdot};
}

BohmianState unpack(const Packed& x) {
  return {{x[0], x[1]}, {x[2], x[3]}, Vec3(x[4], x[5], x[6]), x[7], x[8]};
}

struct BohmianSystem {
  const LevelPair& pair;
  double alpha;
  double node_guard;
  bool tripped = false;

  void operator()(const Packed& x, Packed& dx, double /*t*/) {
    const std::complex<double> cp{x[0], x[1]};
    const std::complex<double> cm{x[2], x[3]};
    const Vec3 X(x[4], x[5], x[6]);
    const double Q = x[7];

    constexpr std::complex<double> minus_i{0.0, -1.0};
    const double coupling = alpha * Q * pair.P;
    const std::complex<double> dcp = minus_i * (pair.E_plus * cp + coupling * cm);
    const std::complex<double> dcm = minus_i * (pair.E_minus * cm + coupling * cp);

    const GuidanceVelocity v = bohmian_velocity(cp, cm, pair, X, node_guard);
    if (v.near_node) tripped = true;

    dx = {dcp.real(), dcp.imag(), dcm.real(), dcm.imag(),
          v.velocity.x(), v.velocity.y(), v.velocity.z(),
          x[8], -pair.nu * pair.nu * Q - alpha * X.z()};
  }

  bool guard_tripped() const { return tripped; }
  void clear_guard() { tripped = false; }
};

}  // namespace

GuidanceVelocity bohmian_velocity(std::complex<double> c_plus, std::complex<double> c_minus,
                                  const LevelPair& pair, const Vec3& X, double node_guard) {
  const auto plus = pair.orbital_plus.value_and_gradient(X);
  const auto minus = pair.orbital_minus.value_and_gradient(X);
  const std::complex<double> D = c_plus * plus.value + c_minus * minus.value;

  GuidanceVelocity out;
  out.density = std::norm(D);
  // Without a relative phase the numerator vanishes identically, so a node
  // of D is harmless there.
  const double im = std::imag(c_plus * std::conj(c_minus));
  if (im == 0.0) return out;
  if (out.density < node_guard) {
    out.near_node = true;
    return out;
  }
  out.velocity = (im / out.density) * (minus.value * plus.gradient - plus.value * minus.gradient);
  return out;
}

BohmianTrajectory evolve_bohmian(const BohmianState& s0, const LevelPair& pair, double alpha,
                                 std::span<const double> t_grid, const BohmianOptions& opts) {
  BohmianSystem sys{pair, alpha, opts.node_guard};
  Packed x = pack(s0);
  const double norm0 = std::norm(s0.c_plus) + std::norm(s0.c_minus);

  BohmianTrajectory traj;
  traj.t.reserve(t_grid.size());
  traj.W.reserve(t_grid.size());
  traj.min_density = std::numeric_limits<double>::infinity();

  ode::Options ode_opts;
  ode_opts.tol = opts.tol;
  ode_opts.guard_retries = opts.guard_retries;
  ode_opts.max_step = 0.5 / pair.nu;

  traj.report = ode::integrate_on_grid(sys, x, t_grid, ode_opts,
                                       [&](std::size_t, double t, const Packed& state) {
    const BohmianState s = unpack(state);
    traj.t.push_back(t);
    traj.W.push_back(std::norm(s.c_plus) - std::norm(s.c_minus));
    const double norm = std::norm(s.c_plus) + std::norm(s.c_minus);
    traj.max_norm_drift = std::max(traj.max_norm_drift, std::abs(norm - norm0));
    const std::complex<double> D =
        s.c_plus * pair.orbital_plus.value(s.X) + s.c_minus * pair.orbital_minus.value(s.X);
    traj.min_density = std::min(traj.min_density, std::norm(D));
    if (opts.keep_states) traj.states.push_back(s);
  });

  if (traj.report.outcome == ode::Outcome::guard_exhausted) {
    std::ostringstream os;
    os << "node guard tripped " << opts.guard_retries << " times in a row near t="
       << traj.report.t_reached;
    traj.flagged = true;
    traj.flag_reason = os.str();
  } else if (!traj.report.ok()) {
    std::ostringstream os;
    os << "evolve_bohmian: integration stopped (" << ode::to_string(traj.report.outcome)
       << ") at t=" << traj.report.t_reached << " after " << traj.report.accepted
       << " accepted / " << traj.report.rejected << " rejected steps";
    throw NumericalError(os.str());
  }
  return traj;
}

}  // namespace rabi
