#pragma once

// Ehrenfest (mean-field) semi-classical dynamics: two complex amplitudes for
// the atom and one classical field mode driven by the atomic dipole
// expectation <z> = 2 P Re(C+* C-).

#include <complex>
#include <span>
#include <vector>

#include "rabi/atom_physics.hpp"
#include "rabi/ode.hpp"

namespace rabi {

struct MeanFieldState {
  std::complex<double> c_plus{1.0, 0.0};
  std::complex<double> c_minus{0.0, 0.0};
  double Q = 0.0;
  double Qdot = 0.0;
};

// Returned in state layout: (dC+/dt, dC-/dt, dQ/dt, dQdot/dt). With
// `backreaction` false the dipole source on the field is dropped and the mode
// runs free (driven two-level atom).
MeanFieldState meanfield_rhs(const MeanFieldState& s, const LevelPair& pair, double alpha,
                             bool backreaction = true);

// |C+|^2 - |C-|^2
double inversion(const MeanFieldState& s);

// E+|C+|^2 + E-|C-|^2 + 2 alpha P Q Re(C+* C-) + (Qdot^2 + nu^2 Q^2)/2;
// conserved when backreaction is on.
double meanfield_energy(const MeanFieldState& s, const LevelPair& pair, double alpha);

struct MeanFieldOptions {
  ode::Tolerances tol{};
  bool backreaction = true;
  bool keep_states = false;
};

struct MeanFieldTrajectory {
  std::vector<double> t;
  std::vector<double> W;
  std::vector<MeanFieldState> states;  // filled when keep_states
  double max_norm_drift = 0.0;
  double max_energy_drift = 0.0;  // relative to the initial energy scale
  ode::Report report;
};

// Throws NumericalError (with the integrator report in the message) if the
// integration cannot reach the end of the grid.
MeanFieldTrajectory evolve_meanfield(const MeanFieldState& s0, const LevelPair& pair, double alpha,
                                     std::span<const double> t_grid,
                                     const MeanFieldOptions& opts = {});

}  // namespace rabi
