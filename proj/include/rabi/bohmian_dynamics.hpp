#pragma once

// Bohmian semi-classical dynamics. The atomic amplitudes obey the same
// equations as in the mean-field scheme, the electron position X follows the
// two-level guidance velocity, and the field mode is driven by -alpha X_z.

#include <complex>
#include <span>
#include <string>
#include <vector>

#include "rabi/atom_physics.hpp"
#include "rabi/ode.hpp"

namespace rabi {

inline constexpr double kNodeGuard = 1e-30;

struct BohmianState {
  std::complex<double> c_plus{1.0, 0.0};
  std::complex<double> c_minus{0.0, 0.0};
  Vec3 X = Vec3::Zero();
  double Q = 0.0;
  double Qdot = 0.0;
};

struct GuidanceVelocity {
  Vec3 velocity = Vec3::Zero();
  double density = 0.0;  // |D|^2, D = C+ phi+(X) + C- phi-(X)
  bool near_node = false;  // density < node guard with a relative phase present; velocity is then zero
};

// Im[(C+ grad phi+ + C- grad phi-) / D] with hbar/m = 1. For the real m = 0
// orbitals this is Im(C+ C-*) (phi- grad phi+ - phi+ grad phi-) / |D|^2.
GuidanceVelocity bohmian_velocity(std::complex<double> c_plus, std::complex<double> c_minus,
                                  const LevelPair& pair, const Vec3& X,
                                  double node_guard = kNodeGuard);

struct BohmianOptions {
  ode::Tolerances tol{};
  double node_guard = kNodeGuard;
  int guard_retries = 40;
  bool keep_states = false;
};

struct BohmianTrajectory {
  std::vector<double> t;
  std::vector<double> W;
  std::vector<BohmianState> states;  // filled when keep_states
  double max_norm_drift = 0.0;
  double min_density = 0.0;  // smallest |D|^2 seen at accepted output points
  bool flagged = false;      // trapped at a node beyond the retry budget
  std::string flag_reason;
  ode::Report report;
};

// A trajectory stopped by the node guard comes back flagged (its W is only
// valid up to report.t_reached). Throws NumericalError for step underflow or
// step-limit failures.
BohmianTrajectory evolve_bohmian(const BohmianState& s0, const LevelPair& pair, double alpha,
                                 std::span<const double> t_grid, const BohmianOptions& opts = {});

}  // namespace rabi
