#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <numbers>
#include <random>
#include <vector>

#include <boost/math/quadrature/exp_sinh.hpp>
#include <boost/math/quadrature/gauss.hpp>
#include <boost/math/quadrature/gauss_kronrod.hpp>
#include <boost/math/special_functions/factorials.hpp>
#include <boost/math/special_functions/laguerre.hpp>
#include <boost/math/special_functions/legendre.hpp>

#include "rabi/atom_physics.hpp"
#include "rabi/errors.hpp"
#include "rabi/random.hpp"

using namespace rabi;

namespace {

// Textbook hydrogen eigenfunction, coded from the associated Laguerre form.
double oracle_radial(int n, int l, double r) {
  const double rho = 2.0 * r / n;
  const double norm = std::sqrt(std::pow(2.0 / n, 3) * boost::math::factorial<double>(n - l - 1) /
                                (2.0 * n * boost::math::factorial<double>(n + l)));
  return norm * std::exp(-rho / 2.0) * std::pow(rho, l) *
         boost::math::laguerre(n - l - 1, 2 * l + 1, rho);
}

double oracle_state(int n, int l, const Vec3& x) {
  const double r = x.norm();
  const double u = r > 0 ? x.z() / r : 1.0;
  const double ylm = std::sqrt((2 * l + 1) / (4.0 * std::numbers::pi)) * boost::math::legendre_p(l, u);
  return oracle_radial(n, l, r) * ylm;
}

std::vector<QuantumNumbers> all_states() {
  std::vector<QuantumNumbers> out;
  for (int n = 1; n <= kMaxPrincipal; ++n)
    for (int l = 0; l < n; ++l) out.push_back({n, l, 0});
  return out;
}

// Integral over R^3 of f(x) for an axially symmetric integrand: radial
// exp-sinh times Gauss-Legendre in cos(theta), azimuth analytic.
template <class F>
double integrate_axial(F f) {
  boost::math::quadrature::exp_sinh<double> radial;
  auto in_r = [&](double r) {
    auto in_u = [&](double u) {
      const double s = std::sqrt(std::max(0.0, 1.0 - u * u));
      return f(Vec3(r * s, 0.0, r * u));
    };
    return r * r * boost::math::quadrature::gauss<double, 30>::integrate(in_u, -1.0, 1.0);
  };
  return 2.0 * std::numbers::pi * radial.integrate(in_r, 1e-13);
}

}  // namespace

TEST_CASE("bohr energies") {
  CHECK(bohr_energy(1) == -0.5);
  CHECK(bohr_energy(2) == -0.125);
  CHECK(bohr_energy(2) - bohr_energy(1) == 0.375);
  CHECK_THROWS_AS(bohr_energy(0), DomainError);
  CHECK_THROWS_AS(bohr_energy(-3), DomainError);
}

TEST_CASE("quantum number validation") {
  CHECK_NOTHROW(validate({9, 8, 0}));
  CHECK_THROWS_AS(validate({2, 2, 0}), DomainError);
  CHECK_THROWS_AS(validate({2, 1, 1}), DomainError);
  CHECK_THROWS_AS(validate({10, 0, 0}), DomainError);
  CHECK_THROWS_AS(validate({0, 0, 0}), DomainError);
  CHECK(label({1, 0, 0}) == "1s");
  CHECK(label({9, 1, 0}) == "9p0");
}

TEST_CASE("ground state closed form") {
  CHECK(eval_state({1, 0, 0}, Vec3::Zero()) == doctest::Approx(1.0 / std::sqrt(std::numbers::pi)).epsilon(1e-14));
  CHECK(eval_state({2, 1, 0}, Vec3::Zero()) == 0.0);
  const Vec3 g = grad_state({1, 0, 0}, Vec3(0, 0, 1));
  CHECK(g.x() == 0.0);
  CHECK(g.y() == 0.0);
  CHECK(g.z() == doctest::Approx(-std::exp(-1.0) / std::sqrt(std::numbers::pi)).epsilon(1e-13));
}

TEST_CASE("values agree with the Laguerre oracle for every supported state") {
  std::mt19937_64 rng(7);
  for (const auto& qn : all_states()) {
    CAPTURE(label(qn));
    const Orbital orb(qn);
    std::uniform_real_distribution<double> ur(0.0, 4.0 * qn.n * qn.n);
    std::uniform_real_distribution<double> uu(-1.0, 1.0);
    for (int k = 0; k < 50; ++k) {
      const double r = ur(rng);
      const double u = uu(rng);
      const Vec3 x(r * std::sqrt(1 - u * u), 0.0, r * u);
      const double want = oracle_state(qn.n, qn.l, x);
      CHECK(orb.value(x) == doctest::Approx(want).epsilon(1e-10).scale(1e-300));
      CHECK(orb.radial(r) == doctest::Approx(oracle_radial(qn.n, qn.l, r)).epsilon(1e-10));
    }
  }
}

TEST_CASE("radial normalization within 1e-8 for all n <= 9") {
  boost::math::quadrature::exp_sinh<double> integrator;
  for (const auto& qn : all_states()) {
    CAPTURE(label(qn));
    const Orbital orb(qn);
    const double norm = integrator.integrate([&](double r) { return orb.radial_density(r); }, 1e-14);
    CHECK(std::abs(norm - 1.0) < 1e-8);
  }
}

TEST_CASE("full three-dimensional normalization and orthogonality") {
  for (QuantumNumbers qn : {QuantumNumbers{1, 0, 0}, QuantumNumbers{2, 1, 0}, QuantumNumbers{9, 1, 0},
                            QuantumNumbers{9, 8, 0}}) {
    CAPTURE(label(qn));
    const Orbital orb(qn);
    const double norm = integrate_axial([&](const Vec3& x) { return orb.value(x) * orb.value(x); });
    CHECK(std::abs(norm - 1.0) < 1e-8);
  }
  const Orbital s1({1, 0, 0});
  const Orbital p2({2, 1, 0});
  const Orbital s2({2, 0, 0});
  CHECK(std::abs(integrate_axial([&](const Vec3& x) { return s1.value(x) * p2.value(x); })) < 1e-8);
  CHECK(std::abs(integrate_axial([&](const Vec3& x) { return s1.value(x) * s2.value(x); })) < 1e-8);
}

TEST_CASE("gradient matches central differences at random points") {
  std::mt19937_64 rng(11);
  const double h = 1e-5;
  for (const auto& qn : all_states()) {
    CAPTURE(label(qn));
    const Orbital orb(qn);
    std::uniform_real_distribution<double> ur(0.1, 4.0 * qn.n * qn.n);
    std::normal_distribution<double> dir;
    int checked = 0;
    while (checked < 100) {
      Vec3 d(dir(rng), dir(rng), dir(rng));
      const Vec3 x = ur(rng) * d.normalized();
      Vec3 fd;
      for (int i = 0; i < 3; ++i) {
        Vec3 e = Vec3::Zero();
        e[i] = h;
        fd[i] = (orb.value(x + e) - orb.value(x - e)) / (2 * h);
      }
      const Vec3 g = orb.gradient(x);
      // Relative agreement, measured against the local gradient scale so that
      // components crossing zero are not compared to rounding noise.
      const double scale = std::max(g.norm(), std::abs(orb.value(x)) / std::max(1.0, x.norm()));
      CHECK((g - fd).norm() <= 1e-5 * scale + 1e-14);
      const auto vg = orb.value_and_gradient(x);
      CHECK(vg.value == orb.value(x));
      CHECK((vg.gradient - g).norm() == 0.0);
      ++checked;
    }
  }
}

TEST_CASE("gradient examples") {
  const Vec3 x(0, 0, 2);
  const Vec3 g = grad_state({2, 1, 0}, x);
  const double h = 1e-5;
  const double fd = (eval_state({2, 1, 0}, x + Vec3(0, 0, h)) - eval_state({2, 1, 0}, x - Vec3(0, 0, h))) / (2 * h);
  CHECK(g.z() == doctest::Approx(fd).epsilon(1e-6));
  for (const auto& qn : all_states()) {
    CHECK(grad_state(qn, Vec3(0, 0, 1.7)).x() == 0.0);
    CHECK(grad_state(qn, Vec3(0, 0, -2.3)).y() == 0.0);
  }
  // At the origin the radial term of an s-state cusp is taken as zero.
  CHECK(grad_state({1, 0, 0}, Vec3::Zero()).norm() == 0.0);
}

TEST_CASE("transition dipoles") {
  const double analytic = 128.0 * std::sqrt(2.0) / 243.0;
  CHECK(transition_dipole({2, 1, 0}, {1, 0, 0}) == doctest::Approx(analytic).epsilon(1e-12));
  CHECK(std::abs(transition_dipole({9, 1, 0}, {1, 0, 0}) - 0.047) < 1e-3);
  CHECK(transition_dipole({1, 0, 0}, {1, 0, 0}) == 0.0);
  CHECK(transition_dipole({2, 0, 0}, {1, 0, 0}) == 0.0);

  // Symmetry and agreement with a direct three-dimensional quadrature.
  for (auto [a, b] : {std::pair{QuantumNumbers{2, 1, 0}, QuantumNumbers{1, 0, 0}},
                      std::pair{QuantumNumbers{3, 2, 0}, QuantumNumbers{2, 1, 0}},
                      std::pair{QuantumNumbers{9, 1, 0}, QuantumNumbers{1, 0, 0}},
                      std::pair{QuantumNumbers{5, 3, 0}, QuantumNumbers{4, 2, 0}}}) {
    CAPTURE(label(a));
    CAPTURE(label(b));
    const double ab = transition_dipole(a, b);
    CHECK(std::abs(ab - transition_dipole(b, a)) < 1e-10);
    const Orbital oa(a), ob(b);
    const double direct = integrate_axial([&](const Vec3& x) { return oa.value(x) * x.z() * ob.value(x); });
    CHECK(std::abs(ab - direct) < 1e-8);
  }
}

TEST_CASE("level pair") {
  const LevelPair p = make_level_pair({1, 0, 0}, {2, 1, 0});
  CHECK(p.nu == 0.375);
  CHECK(p.E_plus > p.E_minus);
  CHECK(p.P == doctest::Approx(transition_dipole({2, 1, 0}, {1, 0, 0})));
  const LevelPair q = make_level_pair({1, 0, 0}, {9, 1, 0});
  CHECK(std::abs(q.nu - 0.493827) < 1e-6);
  CHECK_THROWS_AS(make_level_pair({2, 1, 0}, {1, 0, 0}), DomainError);
}

namespace {

// Kolmogorov-Smirnov distance between sampled radii and the CDF obtained by
// integrating r^2 R^2 between consecutive order statistics.
double ks_statistic(const QuantumNumbers& qn, std::size_t n, std::uint64_t seed) {
  const Orbital orb(qn);
  std::vector<double> r(n);
  for (std::size_t i = 0; i < n; ++i) {
    auto rng = make_stream(seed, i, StreamPurpose::position);
    r[i] = sample_position(qn, rng).norm();
  }
  std::sort(r.begin(), r.end());
  double cdf = 0.0;
  double prev = 0.0;
  double d = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    cdf += boost::math::quadrature::gauss_kronrod<double, 31>::integrate(
        [&](double s) { return orb.radial_density(s); }, prev, r[i], 8, 1e-13);
    prev = r[i];
    d = std::max({d, std::abs(cdf - double(i) / n), std::abs(cdf - double(i + 1) / n)});
  }
  return d;
}

}  // namespace

TEST_CASE("position sampler passes Kolmogorov-Smirnov at the 1% level") {
  const std::size_t n = 10'000;
  const double critical = 1.628 / std::sqrt(double(n));
  for (QuantumNumbers qn : {QuantumNumbers{1, 0, 0}, QuantumNumbers{2, 1, 0}, QuantumNumbers{9, 1, 0}}) {
    CAPTURE(label(qn));
    CHECK(ks_statistic(qn, n, 2024) < critical);
  }
}

TEST_CASE("position sampler moments and angular law") {
  const std::size_t n = 20'000;
  double sum_r = 0, sum_z = 0, sum_r2 = 0;
  for (std::size_t i = 0; i < n; ++i) {
    auto rng = make_stream(5, i, StreamPurpose::position);
    const Vec3 x = sample_position({1, 0, 0}, rng);
    sum_r += x.norm();
    sum_r2 += x.squaredNorm();
    sum_z += x.z();
  }
  const double mean_r = sum_r / n;
  const double sd_r = std::sqrt(sum_r2 / n - mean_r * mean_r);  // analytic: sqrt(3)/2
  CHECK(std::abs(mean_r - 1.5) < 4 * sd_r / std::sqrt(double(n)));
  CHECK(std::abs(sum_z / n) < 4 * std::sqrt(1.0) / std::sqrt(double(n)));

  // For 2p0, <cos^2 theta> = 3/5 (density proportional to cos^2 theta).
  double sum_c2 = 0;
  for (std::size_t i = 0; i < n; ++i) {
    auto rng = make_stream(6, i, StreamPurpose::position);
    const Vec3 x = sample_position({2, 1, 0}, rng);
    const double c = x.z() / x.norm();
    sum_c2 += c * c;
  }
  // Var(cos^2) = <cos^6>... = 3/7 - 9/25
  CHECK(std::abs(sum_c2 / n - 0.6) < 4 * std::sqrt(3.0 / 7.0 - 0.36) / std::sqrt(double(n)));
}

TEST_CASE("9p samples reach radii of order 250") {
  double r_max = 0.0;
  for (std::size_t i = 0; i < 2500; ++i) {
    auto rng = make_stream(3, i, StreamPurpose::position);
    r_max = std::max(r_max, sample_position({9, 1, 0}, rng).norm());
  }
  CHECK(r_max > 200.0);
  CHECK(r_max < 600.0);
}

TEST_CASE("sampler table covers the radial mass") {
  const PositionSampler s({9, 1, 0});
  CHECK(s.radial_cdf(0.0) == 0.0);
  CHECK(s.radial_cdf(s.r_max()) == doctest::Approx(1.0).epsilon(1e-15));
  const Orbital orb({9, 1, 0});
  const double exact = boost::math::quadrature::gauss_kronrod<double, 61>::integrate(
      [&](double r) { return orb.radial_density(r); }, 0.0, 100.0, 15, 1e-13);
  CHECK(s.radial_cdf(100.0) == doctest::Approx(exact).epsilon(1e-8));
}
