#include "rabi/atom_physics.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <memory>
#include <mutex>
#include <numbers>
#include <sstream>
#include <utility>

#include <boost/math/quadrature/gauss.hpp>
#include <boost/math/quadrature/gauss_kronrod.hpp>

#include "rabi/errors.hpp"

namespace rabi {
namespace {

double factorial(int k) {
  double f = 1.0;
  for (int i = 2; i <= k; ++i) f *= i;
  return f;
}

double binomial(int n, int k) {
  if (k < 0 || k > n) return 0.0;
  return factorial(n) / (factorial(k) * factorial(n - k));
}

// S_l = r^l P_l(z/r) and its gradient via
// (l+1) S_{l+1} = (2l+1) z S_l - l r^2 S_{l-1}.
struct Solid {
  double value;
  Vec3 gradient;
};

Solid solid_harmonic(int l, const Vec3& x) {
  Solid prev{1.0, Vec3::Zero()};
  if (l == 0) return prev;
  Solid cur{x.z(), Vec3::UnitZ()};
  const double r2 = x.squaredNorm();
  for (int k = 1; k < l; ++k) {
    const double a = (2.0 * k + 1.0) / (k + 1.0);
    const double b = static_cast<double>(k) / (k + 1.0);
    Solid next;
    next.value = a * x.z() * cur.value - b * r2 * prev.value;
    next.gradient = a * (Vec3::UnitZ() * cur.value + x.z() * cur.gradient) -
                    b * (2.0 * x * prev.value + r2 * prev.gradient);
    prev = cur;
    cur = next;
  }
  return cur;
}

double legendre(int l, double u) {
  double p0 = 1.0;
  if (l == 0) return p0;
  double p1 = u;
  for (int k = 1; k < l; ++k) {
    const double p2 = ((2.0 * k + 1.0) * u * p1 - k * p0) / (k + 1.0);
    p0 = p1;
    p1 = p2;
  }
  return p1;
}

double horner(const std::array<double, kMaxPrincipal>& c, int degree, double r) {
  double acc = c[static_cast<std::size_t>(degree)];
  for (int i = degree - 1; i >= 0; --i) acc = acc * r + c[static_cast<std::size_t>(i)];
  return acc;
}

double horner_derivative(const std::array<double, kMaxPrincipal>& c, int degree, double r) {
  if (degree == 0) return 0.0;
  double acc = degree * c[static_cast<std::size_t>(degree)];
  for (int i = degree - 1; i >= 1; --i) acc = acc * r + i * c[static_cast<std::size_t>(i)];
  return acc;
}

}  // namespace

void validate(const QuantumNumbers& qn) {
  if (qn.n < 1 || qn.n > kMaxPrincipal) {
    throw DomainError("principal quantum number must be in [1, 9], got " + std::to_string(qn.n));
  }
  if (qn.l < 0 || qn.l >= qn.n) {
    throw DomainError("orbital quantum number must satisfy 0 <= l < n, got l=" +
                      std::to_string(qn.l) + " n=" + std::to_string(qn.n));
  }
  if (qn.m != 0) throw DomainError("only m = 0 states are supported");
}

std::string label(const QuantumNumbers& qn) {
  static constexpr char kLetters[] = "spdfghikl";
  std::ostringstream os;
  os << qn.n << (qn.l >= 0 && qn.l < 9 ? kLetters[qn.l] : '?');
  if (qn.l > 0) os << qn.m;
  return os.str();
}

double bohr_energy(int n) {
  if (n < 1) throw DomainError("bohr_energy: n must be >= 1, got " + std::to_string(n));
  return -0.5 / (static_cast<double>(n) * n);
}

Orbital::Orbital(const QuantumNumbers& qn) : qn_(qn) {
  validate(qn);
  const int n = qn.n;
  const int l = qn.l;
  const int k = n - l - 1;  // Laguerre degree
  const double two_over_n = 2.0 / n;
  const double norm =
      std::sqrt(std::pow(two_over_n, 3) * factorial(k) / (2.0 * n * factorial(n + l)));
  inv_n_ = 1.0 / n;
  angular_norm_ = std::sqrt((2.0 * l + 1.0) / (4.0 * std::numbers::pi));
  degree_ = k;
  // L_k^{(2l+1)}(rho) = sum_i (-1)^i C(k+2l+1, k-i) rho^i / i!, rho = 2r/n.
  const double prefactor = norm * std::pow(two_over_n, l);
  for (int i = 0; i <= k; ++i) {
    const double sign = (i % 2 == 0) ? 1.0 : -1.0;
    poly_[static_cast<std::size_t>(i)] =
        prefactor * sign * binomial(k + 2 * l + 1, k - i) / factorial(i) * std::pow(two_over_n, i);
  }
}

// Beyond r/n = 745 the exponential is below the smallest subnormal double,
// while the polynomial factors can overflow; the orbital is zero there.
constexpr double kExpUnderflow = 745.0;

double Orbital::radial(double r) const {
  if (r * inv_n_ > kExpUnderflow) return 0.0;
  return std::exp(-r * inv_n_) * horner(poly_, degree_, r) * std::pow(r, qn_.l);
}

double Orbital::radial_density(double r) const {
  const double R = radial(r);
  return r * r * R * R;
}

double Orbital::value(const Vec3& x) const {
  const double r = x.norm();
  if (r * inv_n_ > kExpUnderflow) return 0.0;
  const double f = std::exp(-r * inv_n_) * horner(poly_, degree_, r);
  return angular_norm_ * f * solid_harmonic(qn_.l, x).value;
}

Orbital::ValueGradient Orbital::value_and_gradient(const Vec3& x) const {
  const double r = x.norm();
  if (r * inv_n_ > kExpUnderflow) return {0.0, Vec3::Zero()};
  const double e = std::exp(-r * inv_n_);
  const double p = horner(poly_, degree_, r);
  const double f = e * p;
  const double df = e * (horner_derivative(poly_, degree_, r) - p * inv_n_);
  const Solid s = solid_harmonic(qn_.l, x);
  Vec3 grad = f * s.gradient;
  if (r > 0.0) grad += (df * s.value / r) * x;
  return {angular_norm_ * f * s.value, angular_norm_ * grad};
}

Vec3 Orbital::gradient(const Vec3& x) const { return value_and_gradient(x).gradient; }

double eval_state(const QuantumNumbers& qn, const Vec3& x) { return Orbital(qn).value(x); }

Vec3 grad_state(const QuantumNumbers& qn, const Vec3& x) { return Orbital(qn).gradient(x); }

double transition_dipole(const QuantumNumbers& plus, const QuantumNumbers& minus) {
  validate(plus);
  validate(minus);
  if (std::abs(plus.l - minus.l) != 1) return 0.0;

  // <l',0| cos(theta) |l,0> for l' = l + 1.
  const int lg = std::max(plus.l, minus.l);
  const double angular = lg / std::sqrt((2.0 * lg - 1.0) * (2.0 * lg + 1.0));

  const Orbital a(plus);
  const Orbital b(minus);
  const int n_max = std::max(plus.n, minus.n);
  const double r_end = 40.0 * n_max * n_max;
  auto integrand = [&](double r) { return a.radial(r) * b.radial(r) * r * r * r; };

  using GK = boost::math::quadrature::gauss_kronrod<double, 61>;
  double total = 0.0;
  double total_error = 0.0;
  double lo = 0.0;
  double hi = 0.5;
  while (lo < r_end) {
    hi = std::min(hi, r_end);
    double err = 0.0;
    total += GK::integrate(integrand, lo, hi, 15, 1e-13, &err);
    total_error += err;
    lo = hi;
    hi *= 2.0;
  }
  if (!(total_error <= 1e-10)) {
    std::ostringstream os;
    os << "transition_dipole(" << label(plus) << ", " << label(minus)
       << "): radial quadrature error estimate " << total_error << " exceeds 1e-10";
    throw NumericalError(os.str());
  }
  return angular * total;
}

LevelPair make_level_pair(const QuantumNumbers& minus, const QuantumNumbers& plus) {
  validate(minus);
  validate(plus);
  LevelPair pair;
  pair.minus = minus;
  pair.plus = plus;
  pair.E_minus = bohr_energy(minus.n);
  pair.E_plus = bohr_energy(plus.n);
  if (!(pair.E_plus > pair.E_minus)) {
    throw DomainError("level pair requires E(" + label(plus) + ") > E(" + label(minus) + ")");
  }
  pair.nu = pair.E_plus - pair.E_minus;
  pair.P = transition_dipole(plus, minus);
  pair.orbital_minus = Orbital(minus);
  pair.orbital_plus = Orbital(plus);
  return pair;
}

PositionSampler::PositionSampler(const QuantumNumbers& qn) : qn_(qn), orbital_(qn) {
  const double n = qn.n;
  // Radial tail beyond r_max is below 1e-15 for every n <= 9.
  r_max_ = n * (6.0 * n + 40.0);
  dr_ = r_max_ / static_cast<double>(kNodes - 1);
  cdf_.resize(kNodes);
  pdf_.resize(kNodes);
  using GL = boost::math::quadrature::gauss<double, 8>;
  auto density = [this](double r) { return orbital_.radial_density(r); };
  cdf_[0] = 0.0;
  for (std::size_t i = 0; i < kNodes; ++i) {
    const double r = static_cast<double>(i) * dr_;
    pdf_[i] = density(r);
    if (i > 0) cdf_[i] = cdf_[i - 1] + GL::integrate(density, r - dr_, r);
  }
  const double total = cdf_.back();
  for (std::size_t i = 0; i < kNodes; ++i) {
    cdf_[i] /= total;
    pdf_[i] /= total;
  }
}

namespace {

// Cubic Hermite on [0, 1] through (F0, slope m0) and (F1, slope m1).
double hermite(double s, double F0, double F1, double m0, double m1) {
  const double s2 = s * s;
  const double s3 = s2 * s;
  return (2 * s3 - 3 * s2 + 1) * F0 + (s3 - 2 * s2 + s) * m0 + (-2 * s3 + 3 * s2) * F1 +
         (s3 - s2) * m1;
}

double hermite_slope(double s, double F0, double F1, double m0, double m1) {
  const double s2 = s * s;
  return (6 * s2 - 6 * s) * F0 + (3 * s2 - 4 * s + 1) * m0 + (-6 * s2 + 6 * s) * F1 +
         (3 * s2 - 2 * s) * m1;
}

}  // namespace

double PositionSampler::radial_cdf(double r) const {
  if (r <= 0.0) return 0.0;
  if (r >= r_max_) return 1.0;
  const auto i = std::min(static_cast<std::size_t>(r / dr_), kNodes - 2);
  const double s = r / dr_ - static_cast<double>(i);
  return hermite(s, cdf_[i], cdf_[i + 1], pdf_[i] * dr_, pdf_[i + 1] * dr_);
}

double PositionSampler::invert(double u) const {
  auto it = std::upper_bound(cdf_.begin(), cdf_.end(), u);
  if (it == cdf_.begin()) return 0.0;
  if (it == cdf_.end()) return r_max_;
  const auto i = static_cast<std::size_t>(std::distance(cdf_.begin(), it) - 1);
  const double F0 = cdf_[i];
  const double F1 = cdf_[i + 1];
  const double m0 = pdf_[i] * dr_;
  const double m1 = pdf_[i + 1] * dr_;
  if (F1 <= F0) return static_cast<double>(i) * dr_;

  double lo = 0.0;
  double hi = 1.0;
  double s = (u - F0) / (F1 - F0);
  for (int iter = 0; iter < 60; ++iter) {
    const double g = hermite(s, F0, F1, m0, m1) - u;
    if (std::abs(g) <= 1e-15) break;
    if (g > 0.0) hi = s; else lo = s;
    const double d = hermite_slope(s, F0, F1, m0, m1);
    double next = d > 0.0 ? s - g / d : 0.5 * (lo + hi);
    if (!(next > lo && next < hi)) next = 0.5 * (lo + hi);
    if (std::abs(next - s) < 1e-15) {
      s = next;
      break;
    }
    s = next;
  }
  return (static_cast<double>(i) + s) * dr_;
}

double PositionSampler::sample_radius(RandomStream& rng) const {
  std::uniform_real_distribution<double> uniform(0.0, 1.0);
  return invert(uniform(rng));
}

Vec3 PositionSampler::operator()(RandomStream& rng) const {
  std::uniform_real_distribution<double> uniform(0.0, 1.0);
  const double r = invert(uniform(rng));
  double u = 0.0;
  // max over [-1, 1] of P_l^2 is 1, attained at the endpoints.
  do {
    u = 2.0 * uniform(rng) - 1.0;
  } while (qn_.l > 0 && uniform(rng) > std::pow(legendre(qn_.l, u), 2));
  const double phi = 2.0 * std::numbers::pi * uniform(rng);
  const double s = std::sqrt(std::max(0.0, 1.0 - u * u));
  return {r * s * std::cos(phi), r * s * std::sin(phi), r * u};
}

Vec3 sample_position(const QuantumNumbers& qn, RandomStream& rng) {
  static std::mutex mutex;
  static std::map<std::pair<int, int>, std::shared_ptr<const PositionSampler>> cache;
  std::shared_ptr<const PositionSampler> sampler;
  {
    std::lock_guard lock(mutex);
    auto& slot = cache[{qn.n, qn.l}];
    if (!slot) slot = std::make_shared<const PositionSampler>(qn);
    sampler = slot;
  }
  return (*sampler)(rng);
}

}  // namespace rabi
