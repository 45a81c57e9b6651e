#pragma once

// Coherent state of the field mode: Poisson photon statistics and the
// (Q, Qdot) distribution the semi-classical ensembles start from.

#include "rabi/random.hpp"

namespace rabi {

struct CoherentParams {
  double gamma_r = 0.0;
  double gamma_i = 0.0;
  double nu = 1.0;  // mode angular frequency, a.u.

  double mean_photons() const { return gamma_r * gamma_r + gamma_i * gamma_i; }
};

struct FieldSample {
  double Q = 0.0;
  double Qdot = 0.0;
};

// n_mean^n e^{-n_mean} / n!, evaluated in log space.
double photon_pmf(double n_mean, int n);

// Q ~ Normal(gamma_r sqrt(2/nu), 1/(2 nu)); Qdot = sqrt(2 nu) gamma_i exactly.
FieldSample sample_initial_field(const CoherentParams& cp, RandomStream& rng);

}  // namespace rabi
