#include "rabi/quantum_reference.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include <Eigen/Eigenvalues>

namespace rabi {

double FockState::norm() const {
  double s = 0.0;
  for (std::size_t n = 0; n < c_plus.size(); ++n) s += std::norm(c_plus[n]) + std::norm(c_minus[n]);
  return s;
}

double FockState::inversion() const {
  double s = 0.0;
  for (std::size_t n = 0; n < c_plus.size(); ++n) s += std::norm(c_plus[n]) - std::norm(c_minus[n]);
  return s;
}

double FockState::edge_occupancy() const {
  if (c_plus.empty()) return 0.0;
  return std::norm(c_plus.back()) + std::norm(c_minus.back());
}

double poisson_tail(double n_mean, int n_max) {
  if (n_mean == 0.0) return 0.0;
  // Sum the upper tail directly; the lower partial sum loses everything to
  // cancellation once the tail drops below 1e-16.
  double tail = 0.0;
  for (int n = n_max + 1;; ++n) {
    const double p = photon_pmf(n_mean, n);
    tail += p;
    if (n > n_mean && p < 1e-18 * tail) break;
    if (n > n_mean && p == 0.0) break;
  }
  return tail;
}

int fock_truncation(double n_mean, double eps) {
  if (!(eps > 0.0 && eps < 1.0)) throw DomainError("fock_truncation: eps must lie in (0, 1)");
  if (n_mean < 0.0) throw DomainError("fock_truncation: n_mean must be >= 0");
  int n = static_cast<int>(std::floor(n_mean));
  while (poisson_tail(n_mean, n) >= eps) ++n;
  // Walk down in case floor(n_mean) already overshoots (tiny n_mean).
  while (n > 0 && poisson_tail(n_mean, n - 1) < eps) --n;
  return n + kFockMargin;
}

double jc_inversion(double g, double n_mean, double t, int n_max) {
  const double tail = poisson_tail(n_mean, n_max);
  if (tail >= 1e-12) {
    std::ostringstream os;
    os << "jc_inversion: n_max=" << n_max << " leaves Poisson tail mass " << tail;
    throw TruncationError(os.str(), tail);
  }
  const double two_g = 2.0 * std::abs(g);
  double w = 0.0;
  for (int n = 0; n <= n_max; ++n) w += photon_pmf(n_mean, n) * std::cos(two_g * std::sqrt(n + 1.0) * t);
  return w;
}

double jc_inversion(double g, double n_mean, double t) {
  return jc_inversion(g, n_mean, t, fock_truncation(n_mean, 1e-12));
}

std::vector<double> jc_inversion(double g, double n_mean, std::span<const double> t_grid) {
  return jc_inversion(g, n_mean, t_grid, AtomInit::excited);
}

std::vector<double> jc_inversion(double g, double n_mean, std::span<const double> t_grid,
                                 AtomInit atom) {
  const double shift = atom == AtomInit::excited ? 1.0 : 0.0;
  const double sign = atom == AtomInit::excited ? 1.0 : -1.0;
  const int n_max = fock_truncation(n_mean, 1e-12);
  std::vector<double> weights(static_cast<std::size_t>(n_max) + 1);
  std::vector<double> freqs(weights.size());
  for (int n = 0; n <= n_max; ++n) {
    weights[static_cast<std::size_t>(n)] = photon_pmf(n_mean, n);
    weights[static_cast<std::size_t>(n)] *= sign;
    freqs[static_cast<std::size_t>(n)] = 2.0 * std::abs(g) * std::sqrt(n + shift);
  }
  std::vector<double> out;
  out.reserve(t_grid.size());
  for (double t : t_grid) {
    double w = 0.0;
    for (std::size_t n = 0; n < weights.size(); ++n) w += weights[n] * std::cos(freqs[n] * t);
    out.push_back(w);
  }
  return out;
}

int default_fock_truncation(double n_mean, double g_over_nu) {
  // The interaction displaces the field by up to 2 g/nu in amplitude.
  const double amplitude = std::sqrt(n_mean) + 2.0 * std::abs(g_over_nu);
  const int displaced = fock_truncation(amplitude * amplitude, 1e-13);
  const int floor_n = static_cast<int>(std::ceil(n_mean + 12.0 * std::sqrt(n_mean))) + kFockMargin;
  return std::max(displaced, floor_n);
}

FockState coherent_initial_state(const CoherentParams& cp, AtomInit atom, int n_max) {
  if (n_max < 0) throw DomainError("coherent_initial_state: n_max must be >= 0");
  FockState s;
  s.n_max = n_max;
  s.c_plus.assign(static_cast<std::size_t>(n_max) + 1, 0.0);
  s.c_minus.assign(static_cast<std::size_t>(n_max) + 1, 0.0);
  auto& target = atom == AtomInit::excited ? s.c_plus : s.c_minus;
  const std::complex<double> gamma(cp.gamma_r, cp.gamma_i);
  const double mag = std::abs(gamma);
  const double phase = std::arg(gamma);
  const double n_mean = mag * mag;
  for (int n = 0; n <= n_max; ++n) {
    const double amp = std::sqrt(photon_pmf(n_mean, n));
    target[static_cast<std::size_t>(n)] = std::polar(amp, n * phase);
  }
  // Renormalize away the neglected tail.
  const double norm = std::sqrt(s.norm());
  for (auto& c : target) c /= norm;
  return s;
}

namespace {

// Basis index: 2n for |+>|n>, 2n+1 for |->|n>.
Eigen::MatrixXd rabi_hamiltonian(const LevelPair& pair, double g, int n_max) {
  const Eigen::Index dim = 2 * (static_cast<Eigen::Index>(n_max) + 1);
  Eigen::MatrixXd H = Eigen::MatrixXd::Zero(dim, dim);
  for (int n = 0; n <= n_max; ++n) {
    const Eigen::Index p = 2 * n;
    const double field = pair.nu * (n + 0.5);
    H(p, p) = pair.E_plus + field;
    H(p + 1, p + 1) = pair.E_minus + field;
    if (n < n_max) {
      const double c = g * std::sqrt(n + 1.0);
      // a^dag raises n; sigma_x flips the atom. Both orderings couple.
      H(p + 2, p + 1) = H(p + 1, p + 2) = c;  // |+,n+1> <-> |-,n>
      H(p + 3, p) = H(p, p + 3) = c;          // |-,n+1> <-> |+,n>
    }
  }
  return H;
}

}  // namespace

FullQuantumResult evolve_full_quantum(const LevelPair& pair, double g, const CoherentParams& cp,
                                      AtomInit atom, std::span<const double> t_grid,
                                      const FullQuantumOptions& opts) {
  const double n_mean = cp.mean_photons();
  const int n_max = opts.n_max > 0 ? opts.n_max : default_fock_truncation(n_mean, g / pair.nu);

  const Eigen::MatrixXd H = rabi_hamiltonian(pair, g, n_max);
  const Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(H);
  if (eig.info() != Eigen::Success) throw NumericalError("evolve_full_quantum: eigensolver failed");
  const Eigen::VectorXd& lambda = eig.eigenvalues();
  const Eigen::MatrixXd& V = eig.eigenvectors();
  const Eigen::Index dim = H.rows();

  const FockState init = coherent_initial_state(cp, atom, n_max);
  Eigen::VectorXcd psi0(dim);
  for (int n = 0; n <= n_max; ++n) {
    psi0(2 * n) = init.c_plus[static_cast<std::size_t>(n)];
    psi0(2 * n + 1) = init.c_minus[static_cast<std::size_t>(n)];
  }
  const Eigen::VectorXcd amplitudes = V.transpose().cast<std::complex<double>>() * psi0;
  const double norm0 = psi0.squaredNorm();
  const double energy0 = std::real(psi0.dot(H.cast<std::complex<double>>() * psi0));
  const double energy_scale = std::max(std::abs(energy0), pair.nu);

  FullQuantumResult result;
  result.n_max = n_max;
  result.t.assign(t_grid.begin(), t_grid.end());
  result.W.reserve(t_grid.size());

  const Eigen::MatrixXcd Vc = V.cast<std::complex<double>>();
  const Eigen::MatrixXcd Hc = H.cast<std::complex<double>>();
  Eigen::VectorXcd rotated(dim);
  Eigen::VectorXcd psi(dim);
  Eigen::VectorXcd hpsi(dim);
  for (double t : t_grid) {
    for (Eigen::Index k = 0; k < dim; ++k) rotated(k) = amplitudes(k) * std::polar(1.0, -lambda(k) * t);
    psi.noalias() = Vc * rotated;

    double w = 0.0;
    double norm = 0.0;
    for (Eigen::Index i = 0; i < dim; i += 2) {
      const double pp = std::norm(psi(i));
      const double pm = std::norm(psi(i + 1));
      w += pp - pm;
      norm += pp + pm;
    }
    hpsi.noalias() = Hc * psi;
    const double energy = std::real(psi.dot(hpsi));
    const double edge = std::norm(psi(dim - 2)) + std::norm(psi(dim - 1));

    result.W.push_back(w);
    result.max_norm_drift = std::max(result.max_norm_drift, std::abs(norm - norm0));
    result.max_energy_drift = std::max(result.max_energy_drift, std::abs(energy - energy0) / energy_scale);
    result.max_edge_occupancy = std::max(result.max_edge_occupancy, edge);

    if (opts.keep_states) {
      FockState s;
      s.n_max = n_max;
      s.c_plus.resize(static_cast<std::size_t>(n_max) + 1);
      s.c_minus.resize(static_cast<std::size_t>(n_max) + 1);
      for (int n = 0; n <= n_max; ++n) {
        s.c_plus[static_cast<std::size_t>(n)] = psi(2 * n);
        s.c_minus[static_cast<std::size_t>(n)] = psi(2 * n + 1);
      }
      result.states.push_back(std::move(s));
    }
  }

  if (result.max_norm_drift > opts.norm_tolerance) {
    std::ostringstream os;
    os << "evolve_full_quantum: norm drift " << result.max_norm_drift << " exceeds "
       << opts.norm_tolerance;
    throw NumericalError(os.str());
  }
  if (result.max_edge_occupancy > opts.edge_tolerance) {
    std::ostringstream os;
    os << "evolve_full_quantum: occupancy " << result.max_edge_occupancy << " in Fock level "
       << n_max << " exceeds " << opts.edge_tolerance << "; raise n_max";
    throw TruncationError(os.str(), result.max_edge_occupancy);
  }
  return result;
}

}  // namespace rabi
