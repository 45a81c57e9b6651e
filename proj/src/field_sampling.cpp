#include "rabi/field_sampling.hpp"

#include <cmath>
#include <random>

#include "rabi/errors.hpp"

namespace rabi {

double photon_pmf(double n_mean, int n) {
  if (n_mean < 0.0 || n < 0) throw DomainError("photon_pmf: requires n_mean >= 0 and n >= 0");
  if (n_mean == 0.0) return n == 0 ? 1.0 : 0.0;
  return std::exp(n * std::log(n_mean) - n_mean - std::lgamma(n + 1.0));
}

FieldSample sample_initial_field(const CoherentParams& cp, RandomStream& rng) {
  if (!(cp.nu > 0.0)) throw DomainError("sample_initial_field: nu must be positive");
  std::normal_distribution<double> normal(0.0, 1.0);
  FieldSample s;
  s.Q = cp.gamma_r * std::sqrt(2.0 / cp.nu) + normal(rng) / std::sqrt(2.0 * cp.nu);
  s.Qdot = std::sqrt(2.0 * cp.nu) * cp.gamma_i;
  return s;
}

}  // namespace rabi
