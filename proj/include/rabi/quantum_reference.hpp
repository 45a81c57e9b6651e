#pragma once

// Ground truth for the single-mode two-level problem: the Jaynes-Cummings
// closed form (rotating wave approximation) and the full Rabi Hamiltonian in
// a truncated Fock basis, counter-rotating terms included.

#include <complex>
#include <span>
#include <vector>

#include "rabi/atom_physics.hpp"
#include "rabi/errors.hpp"
#include "rabi/field_sampling.hpp"

namespace rabi {

enum class AtomInit { excited, ground };

class TruncationError : public NumericalError {
 public:
  TruncationError(const std::string& what, double tail_mass)
      : NumericalError(what), tail_mass_(tail_mass) {}
  double tail_mass() const { return tail_mass_; }

 private:
  double tail_mass_;
};

struct FockState {
  int n_max = 0;
  std::vector<std::complex<double>> c_plus;   // C_{n,+}, n = 0..n_max
  std::vector<std::complex<double>> c_minus;  // C_{n,-}

  double norm() const;
  double inversion() const;
  double edge_occupancy() const;  // |C_{n_max,+}|^2 + |C_{n_max,-}|^2
};

inline constexpr int kFockMargin = 20;

// Smallest N with P(n > N) < eps under Poisson(n_mean), plus kFockMargin.
int fock_truncation(double n_mean, double eps);

// Poisson mass above n_max.
double poisson_tail(double n_mean, int n_max);

// sum_{n<=n_max} rho_n cos(2|g| sqrt(n+1) t) for an initially excited atom.
// Throws TruncationError when the neglected Poisson mass is >= 1e-12.
double jc_inversion(double g, double n_mean, double t, int n_max);
double jc_inversion(double g, double n_mean, double t);
std::vector<double> jc_inversion(double g, double n_mean, std::span<const double> t_grid);

// Series for either start level. From the ground state the n-photon sector
// oscillates at 2|g| sqrt(n) and W = -sum_n rho_n cos(2|g| sqrt(n) t).
std::vector<double> jc_inversion(double g, double n_mean, std::span<const double> t_grid,
                                 AtomInit atom);

struct FullQuantumOptions {
  int n_max = 0;                  // 0: chosen from n_mean and g/nu
  double norm_tolerance = 1e-9;
  double edge_tolerance = 1e-10;  // occupancy allowed in the top Fock level
  bool keep_states = false;
};

struct FullQuantumResult {
  std::vector<double> t;
  std::vector<double> W;
  std::vector<FockState> states;  // filled when keep_states
  int n_max = 0;
  double max_norm_drift = 0.0;
  double max_energy_drift = 0.0;  // relative
  double max_edge_occupancy = 0.0;
};

// Truncation used when FullQuantumOptions::n_max is 0: large enough for the
// coherent state displaced by the coupling, and never below
// n_mean + 12 sqrt(n_mean) + 20.
int default_fock_truncation(double n_mean, double g_over_nu);

FockState coherent_initial_state(const CoherentParams& cp, AtomInit atom, int n_max);

// Propagates exp(-iHt) with H = H_A + H_F + g (a + a^dag)(|+><-| + |-><+|)
// through one eigendecomposition of the truncated (real symmetric) H. Throws
// NumericalError on norm drift and TruncationError on edge occupancy beyond
// the tolerances in `opts`.
FullQuantumResult evolve_full_quantum(const LevelPair& pair, double g, const CoherentParams& cp,
                                      AtomInit atom, std::span<const double> t_grid,
                                      const FullQuantumOptions& opts = {});

}  // namespace rabi
