#include <stdexcept>
#include <doctest.h>

#include <algorithm>
#include <cmath>

#include "agepop/config.hpp"
#include "agepop/correlation_kernel.hpp"
#include "agepop/experiments.hpp"
#include "agepop/bounds.hpp"
#include "agepop/rng.hpp"

using namespace agepop;

namespace {

const Window kWindow = Window::unit_interval(40.0);
const RateModel kUnit = RateModel::constant(1.0, 1.0);

std::vector<MarkedPoint> random_points(CounterRng& rng, int n, double a_hi) {
  std::vector<MarkedPoint> pts;
  for (int k = 0; k < n; ++k) pts.push_back({{rng.uniform(), 0.0}, a_hi * rng.uniform()});
  return pts;
}

double rel(double a, double b) { return std::abs(a - b) / std::max(std::abs(b), 1e-300); }

}  // namespace

TEST_CASE("vacuum and Poisson kernels") {
  const auto vac = vacuum_kernel(3);
  const std::vector<MarkedPoint> none;
  const std::vector<MarkedPoint> one{{{0.2, 0.0}, 1.0}};
  CHECK(vac(none) == 1.0);
  CHECK(vac(one) == 0.0);
  const IntensityKernel rho = exponential_intensity(kUnit, 0.5, 2.0, 40.0);
  const auto k = poisson_kernel(rho, 2);
  CHECK(k(none) == 1.0);
  const std::vector<MarkedPoint> two{{{0.2, 0.0}, 1.0}, {{0.7, 0.0}, 0.5}};
  CHECK(k(two) == doctest::Approx(rho({0.2, 0.0}, 1.0) * rho({0.7, 0.0}, 0.5)));
  const std::vector<MarkedPoint> three{{{0.2, 0.0}, 1.0}, {{0.7, 0.0}, 0.5}, {{0.9, 0.0}, 0.1}};
  CHECK_THROWS_AS(k(three), std::out_of_range);
}

TEST_CASE("evolution shifts ages, applies survival and annihilates young points") {
  const IntensityKernel rho = exponential_intensity(kUnit, 0.5, 2.0, 40.0);
  const auto k0 = poisson_kernel(rho, 3);
  const auto same = evolve_kernel(k0, kUnit, 0.0);
  CounterRng rng(1, 1);
  for (int rep = 0; rep < 20; ++rep) {
    const auto pts = random_points(rng, 2, 6.0);
    CHECK(same(pts) == k0(pts));
  }
  const double t = 0.8;
  const auto kt = evolve_kernel(k0, kUnit, t);
  const auto oracle = [&](const MarkedPoint& p) {
    return p.a < t ? 0.0 : 0.5 * std::exp(-2.0 * (p.a - t)) * std::exp(-t);
  };
  for (int rep = 0; rep < 50; ++rep) {
    auto pts = random_points(rng, 2, 6.0);
    CHECK(kt(std::span(pts).first(1)) == doctest::Approx(oracle(pts[0])).epsilon(1e-14));
    CHECK(kt(pts) == doctest::Approx(oracle(pts[0]) * oracle(pts[1])).epsilon(1e-14));
  }
  const std::vector<MarkedPoint> young{{{0.3, 0.0}, 0.5}, {{0.6, 0.0}, 3.0}};
  CHECK(kt(young) == 0.0);
  REQUIRE(kt.product_intensity() != nullptr);
  CHECK((*kt.product_intensity())({0.3, 0.0}, 2.0) == doctest::Approx(oracle({{0.3, 0.0}, 2.0})));
}

TEST_CASE("thinning multiplies by the retention product") {
  const IntensityKernel rho = stationary_intensity(kUnit, 40.0);
  const auto k = poisson_kernel(rho, 3);
  const auto nearly = thin_kernel(k, [](const Position&, double) { return 1.0 - 1e-12; });
  const auto half = thin_kernel(k, [](const Position&, double) { return 0.5; });
  const auto half_poisson = poisson_kernel(rho.scaled(0.5), 3);
  CounterRng rng(2, 2);
  for (int n = 1; n <= 3; ++n) {
    for (int rep = 0; rep < 20; ++rep) {
      const auto pts = random_points(rng, n, 5.0);
      CHECK(rel(nearly(pts), k(pts)) <= 1e-10);
      CHECK(rel(half(pts), half_poisson(pts)) <= 1e-15);
    }
  }
}

TEST_CASE("thinning functional identity") {
  QuadratureSpec spec;
  spec.n_max = 20;
  const IntensityKernel rho = stationary_intensity(kUnit, 40.0);
  const Observable q = [](const Position& x, double a) { return 0.3 + 0.4 * x[0] * std::exp(-a); };
  const auto thinned = thin_kernel(poisson_kernel(rho, 20), q);
  for (const auto& th : default_theta_suite(kWindow)) {
    const double lhs = kernel_functional(thinned, th, kWindow, spec);
    const double rhs = std::exp(poisson_log_functional(
        rho, [&](const Position& x, double a) { return q(x, a) * th(x, a); }, kWindow, spec));
    CHECK(rel(lhs, rhs) <= 1e-10);
  }
}

TEST_CASE("convolution: neutral element, Poisson superposition and brute force") {
  const IntensityKernel r1 = exponential_intensity(kUnit, 0.5, 2.0, 40.0);
  const IntensityKernel r2 = stationary_intensity(kUnit, 40.0);
  const auto k1 = poisson_kernel(r1, 3);
  const auto with_vacuum = convolve_kernels(k1, vacuum_kernel(3));
  const auto sum = convolve_kernels(k1, poisson_kernel(r2, 3));
  const auto direct = poisson_kernel(r1 + r2, 3);
  CounterRng rng(3, 3);
  for (int n = 1; n <= 3; ++n) {
    for (int rep = 0; rep < 20; ++rep) {
      const auto pts = random_points(rng, n, 5.0);
      CHECK(with_vacuum(pts) == k1(pts));
      CHECK(rel(sum(pts), direct(pts)) <= 1e-13);
    }
  }
  const std::vector<MarkedPoint> none;
  CHECK(sum(none) == 1.0);

  // Non-product kernels with a pair term.
  const auto make = [](double c) {
    CorrelationKernel::Parts p;
    p.eval = [c](std::span<const MarkedPoint> pts) {
      double v = 1.0, pair = 0.0;
      for (const auto& q : pts) v *= c + q.x[0] * std::exp(-q.a);
      for (std::size_t i = 0; i < pts.size(); ++i)
        for (std::size_t j = i + 1; j < pts.size(); ++j) pair += c * std::abs(pts[i].x[0] - pts[j].x[0]);
      return v + pair;
    };
    p.n_max = 3;
    return CorrelationKernel(std::move(p));
  };
  const auto a = make(0.3), b = make(1.7);
  const auto ab = convolve_kernels(a, b);
  for (int rep = 0; rep < 20; ++rep) {
    const auto p = random_points(rng, 3, 4.0);
    const auto A = [&](std::vector<MarkedPoint> s) { return a(s); };
    const auto B = [&](std::vector<MarkedPoint> s) { return b(s); };
    const double brute = A({p[0], p[1], p[2]}) + A({p[1], p[2]}) * B({p[0]}) + A({p[0], p[2]}) * B({p[1]}) +
                         A({p[0], p[1]}) * B({p[2]}) + A({p[2]}) * B({p[0], p[1]}) + A({p[1]}) * B({p[0], p[2]}) +
                         A({p[0]}) * B({p[1], p[2]}) + B({p[0], p[1], p[2]});
    CHECK(rel(ab(p), brute) <= 1e-14);
    // Symmetry under permutation.
    std::vector<MarkedPoint> perm{p[2], p[0], p[1]};
    CHECK(rel(ab(perm), ab(p)) <= 1e-14);
  }
  CHECK_THROWS_AS(convolve_kernels(poisson_kernel(r1, 2), poisson_kernel(r2, 3))(random_points(rng, 3, 1.0)),
                  std::out_of_range);
}

TEST_CASE("kernel norms") {
  NormGrid grid;
  const auto unit = poisson_kernel(exponential_intensity(kUnit, 1.0, 1.0, 40.0), 3);
  for (int n = 1; n <= 3; ++n) CHECK(kernel_norm(unit, n, kWindow, grid) == doctest::Approx(1.0).epsilon(1e-12));
  const auto vac = vacuum_kernel(3);
  for (int n = 1; n <= 3; ++n) CHECK(kernel_norm(vac, n, kWindow, grid) == 0.0);
  const auto stat = poisson_kernel(stationary_intensity(kUnit, 40.0), 3);
  CHECK(banach_norm(stat, 0.0, 1.0, 3, kWindow, grid) == doctest::Approx(1.0).epsilon(1e-12));
  const std::vector<double> norms{2.0, 8.0};
  CHECK(banach_norm(norms, 0.0, 2.0) == doctest::Approx(2.0));
  CHECK(banach_norm(norms, 1.0, 2.0) == doctest::Approx(1.0));
  CHECK_THROWS_AS(kernel_norm(stat, 4, kWindow, grid), std::out_of_range);

  // The product shortcut agrees with the full tensor evaluation.
  CorrelationKernel::Parts p;
  p.eval = [](std::span<const MarkedPoint> pts) {
    double v = 1.0;
    for (const auto& q : pts) v *= (0.5 + q.x[0]) * std::exp(-q.a);
    return v;
  };
  p.n_max = 2;
  p.age_support = 40.0;
  const CorrelationKernel general(std::move(p));
  NormGrid coarse;
  coarse.a_nodes = 24;
  const double full = kernel_norm(general, 2, kWindow, coarse);
  CHECK(full == doctest::Approx(std::pow(kernel_norm(general, 1, kWindow, coarse), 2)).epsilon(1e-12));
  CHECK(kernel_norm(general, 1, kWindow, coarse) == doctest::Approx(1.4 * (1.0 - std::exp(-40.0))).epsilon(1e-12));
}

TEST_CASE("Poisson kernel functional equals the exponential of the log-functional") {
  const QuadratureSpec spec;
  const IntensityKernel rho = exponential_intensity(kUnit, 0.5, 2.0, 40.0);
  const auto k = poisson_kernel(rho, spec.n_max);
  for (const auto& th : default_theta_suite(kWindow)) {
    CHECK(rel(kernel_functional(k, th, kWindow, spec), std::exp(poisson_log_functional(rho, th, kWindow, spec))) <=
          1e-12);
  }
}

TEST_CASE("evolved kernels stay within the kappa-star bound") {
  NormGrid grid;
  const IntensityKernel rho0 = exponential_intensity(kUnit, 0.5, 2.0, 40.0);
  const auto k0 = poisson_kernel(rho0, 3);
  const double kstar = kappa_star(k0.kappa(), kUnit.b_star(), kUnit.m_star_lo());
  CHECK(kstar == 1.0);
  for (double t : {0.0, 0.5, 2.0, 6.0}) {
    const auto kt = solution_kernel(k0, kUnit, t);
    for (int n = 1; n <= 3; ++n) CHECK(kernel_norm(kt, n, kWindow, grid) <= std::pow(kstar, n) * (1.0 + 1e-12));
  }
  // Convergence to the stationary kernel within the bound.
  const auto stat = poisson_kernel(stationary_intensity(kUnit, 40.0), 3);
  for (double t : {0.0, 1.0, 3.0, 8.0}) {
    const double gap = kernel_gap_norm(solution_kernel(k0, kUnit, t), stat, 1, kWindow, grid);
    CHECK(gap <= convergence_bound(0.0, kstar, 1, 1.0, t));
  }
  const auto k_empty = solution_kernel(vacuum_kernel(3), kUnit, 2.0);
  CHECK(kernel_gap_norm(k_empty, stat, 1, kWindow, grid) == doctest::Approx(std::exp(-2.0)).epsilon(1e-10));
}
