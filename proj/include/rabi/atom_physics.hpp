#pragma once

// Hydrogen m = 0 eigenstates in atomic units: values, gradients, transition
// dipoles along z, and position sampling from |phi|^2.

#include <array>
#include <cstddef>
#include <string>
#include <vector>

#include <Eigen/Core>

#include "rabi/random.hpp"

namespace rabi {

using Vec3 = Eigen::Vector3d;

inline constexpr int kMaxPrincipal = 9;

struct QuantumNumbers {
  int n = 1;
  int l = 0;
  int m = 0;

  friend bool operator==(const QuantumNumbers&, const QuantumNumbers&) = default;
};

// Throws DomainError unless 1 <= n <= kMaxPrincipal, 0 <= l < n and m == 0.
void validate(const QuantumNumbers& qn);

// Spectroscopic label such as "2p0".
std::string label(const QuantumNumbers& qn);

// -1/(2 n^2) Hartree.
double bohr_energy(int n);

// phi_{n,l,0}(x) = R_nl(r) Y_l0(theta), written as c_l f(r) S_l(x) with
// f = R_nl / r^l = exp(-r/n) p(r) and S_l = r^l P_l(z/r) the solid harmonic.
// Both factors are smooth away from the s-state cusp, so evaluation near the
// origin needs no special casing.
class Orbital {
 public:
  explicit Orbital(const QuantumNumbers& qn);

  const QuantumNumbers& quantum_numbers() const { return qn_; }

  double value(const Vec3& x) const;
  Vec3 gradient(const Vec3& x) const;

  struct ValueGradient {
    double value;
    Vec3 gradient;
  };
  ValueGradient value_and_gradient(const Vec3& x) const;

  double radial(double r) const;          // R_nl(r)
  double radial_density(double r) const;  // r^2 R_nl(r)^2

 private:
  QuantumNumbers qn_;
  double inv_n_ = 1.0;
  double angular_norm_ = 0.0;
  // p(r) coefficients, ascending powers of r. Degree n - l - 1 <= 8.
  std::array<double, kMaxPrincipal> poly_{};
  int degree_ = 0;
};

double eval_state(const QuantumNumbers& qn, const Vec3& x);

// At exactly r = 0 the radial cusp of an s-state has no direction; the radial
// contribution is taken as zero there.
Vec3 grad_state(const QuantumNumbers& qn, const Vec3& x);

// <plus| z |minus>, radial part by adaptive Gauss-Kronrod, angular part exact.
// Throws NumericalError if the radial quadrature misses its tolerance.
double transition_dipole(const QuantumNumbers& plus, const QuantumNumbers& minus);

struct LevelPair {
  QuantumNumbers minus;
  QuantumNumbers plus;
  double E_minus = 0.0;
  double E_plus = 0.0;
  double nu = 0.0;  // E_plus - E_minus
  double P = 0.0;   // <plus| z |minus>
  Orbital orbital_minus{QuantumNumbers{}};
  Orbital orbital_plus{QuantumNumbers{}};
};

// Requires E(plus) > E(minus).
LevelPair make_level_pair(const QuantumNumbers& minus, const QuantumNumbers& plus);

// Draws positions distributed as |phi_qn|^2. The radial part inverts a
// tabulated CDF (Hermite cubic between nodes); cos(theta) is drawn by
// rejection against P_l^2; the azimuth is uniform.
class PositionSampler {
 public:
  static constexpr std::size_t kNodes = 10'000;

  explicit PositionSampler(const QuantumNumbers& qn);

  Vec3 operator()(RandomStream& rng) const;

  double sample_radius(RandomStream& rng) const;
  double radial_cdf(double r) const;  // interpolated table value
  double r_max() const { return r_max_; }

 private:
  double invert(double u) const;

  QuantumNumbers qn_;
  Orbital orbital_;
  double r_max_ = 0.0;
  double dr_ = 0.0;
  std::vector<double> cdf_;
  std::vector<double> pdf_;
};

// Uses a process-wide sampler cache keyed by (n, l).
Vec3 sample_position(const QuantumNumbers& qn, RandomStream& rng);

}  // namespace rabi
