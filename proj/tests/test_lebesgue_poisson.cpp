#include <stdexcept>
#include <doctest.h>

#include <cmath>

#include "agepop/lebesgue_poisson.hpp"
#include "agepop/rng.hpp"

using namespace agepop;

namespace {

const Window kWindow = Window::unit_interval(5.0);

// Normalised to integrate to 1 over window x [0, 5].
double unit_density(const Position& x, double a) {
  return 2.0 * x[0] * std::exp(-a) / (-std::expm1(-5.0));
}

}  // namespace

TEST_CASE("vacuum-only functional integrates to 1") {
  const auto g = ConfigFunctional::general([](std::span<const MarkedPoint> p) { return p.empty() ? 1.0 : 0.0; }, 4);
  QuadratureSpec coarse;
  coarse.x_nodes = 4;
  coarse.a_nodes = 6;
  CHECK(lp_integral(g, kWindow, 4, coarse).value == 1.0);
}

TEST_CASE("product functionals give the exponential of the one-point mass") {
  for (double c : {1.0, -0.5, 0.3, -1.0}) {
    const auto g = ConfigFunctional::product([c](const Position& x, double a) { return c * unit_density(x, a); });
    const LpIntegral r = lp_integral(g, kWindow, 20, QuadratureSpec{});
    CHECK(std::abs(r.value - std::exp(c)) <= 1e-12 * std::exp(c));
    // Last term is |c|^20 / 20!
    CHECK(r.last_term == doctest::Approx(std::pow(std::abs(c), 20) / std::tgamma(21.0)).epsilon(1e-10));
  }
  const auto g = ConfigFunctional::product(unit_density);
  CHECK(lp_integral(g, kWindow, 20, QuadratureSpec{}).value == doctest::Approx(2.718282).epsilon(1e-6));
}

TEST_CASE("general evaluation of a product functional agrees with the factorised path") {
  QuadratureSpec spec;
  spec.x_nodes = 4;
  spec.a_nodes = 4;
  const auto g = [](const Position& x, double a) { return 0.4 * (0.5 + x[0]) * std::exp(-a); };
  const auto prod = ConfigFunctional::product(g);
  const auto general = ConfigFunctional::general(
      [g](std::span<const MarkedPoint> pts) {
        double v = 1.0;
        for (const auto& p : pts) v *= g(p.x, p.a);
        return v;
      },
      3);
  const double a = lp_integral(prod, kWindow, 3, spec).value;
  const double b = lp_integral(general, kWindow, 3, spec).value;
  CHECK(std::abs(a - b) <= 1e-14 * a);
}

TEST_CASE("lp_integral rejects negative orders and coarse grids") {
  const auto g = ConfigFunctional::product(unit_density);
  CHECK_THROWS_AS(lp_integral(g, kWindow, -1, QuadratureSpec{}), std::invalid_argument);
  QuadratureSpec coarse;
  coarse.a_nodes = 1;
  CHECK_THROWS_AS(lp_integral(g, kWindow, 3, coarse), std::invalid_argument);
}

TEST_CASE("Minlos identity for vacuum and product functionals") {
  const auto vac = PairFunctional::general(
      [](std::span<const MarkedPoint> xi, std::span<const MarkedPoint> eta) {
        return xi.empty() && eta.empty() ? 1.0 : 0.0;
      },
      0);
  const MinlosResult v = minlos_check(vac, kWindow, 6, QuadratureSpec{});
  CHECK(v.lhs == 1.0);
  CHECK(v.rhs == 1.0);

  const auto g = [](const Position& x, double a) { return 0.3 * unit_density(x, a); };
  const auto h = [](const Position&, double a) { return 0.3 * std::exp(-a) / (-std::expm1(-5.0)); };
  const MinlosResult m = minlos_check(PairFunctional::product(g, h), kWindow, 14, QuadratureSpec{});
  CHECK(m.lhs == doctest::Approx(1.822119).epsilon(1e-6));
  CHECK(std::abs(m.lhs - m.rhs) <= 1e-12 * m.rhs);
  CHECK(std::abs(m.lhs - std::exp(0.6)) <= 1e-9);
}

TEST_CASE("Minlos identity for a random functional on at most three points") {
  QuadratureSpec spec;
  spec.x_nodes = 2;
  spec.a_nodes = 2;
  spec.max_panel = 10.0;
  CounterRng rng(7, 3);
  std::vector<double> c(20);
  for (double& v : c) v = rng.uniform() - 0.5;
  const auto G = [&c](std::span<const MarkedPoint> xi, std::span<const MarkedPoint> eta) {
    double v = c[4 * xi.size() + eta.size()];
    for (const auto& p : xi) v *= 1.0 + c[16] * p.x[0] + c[17] * p.a;
    for (const auto& p : eta) v *= 1.0 + c[18] * p.x[0] * p.a;
    double cross = 0.0;
    for (const auto& p : xi)
      for (const auto& q : eta) cross += c[19] * (p.x[0] - q.x[0]) * (p.x[0] - q.x[0]);
    return v + cross;
  };
  const MinlosResult m = minlos_check(PairFunctional::general(G, 3), kWindow, 3, spec);

  // Independent oracle: enumerate the 4 grid points directly.
  std::vector<MarkedPoint> pts;
  std::vector<double> w;
  for (const auto& s : spatial_nodes(kWindow, 2))
    for (const auto& a : age_nodes(0.0, 5.0, {}, 2, 10.0)) {
      pts.push_back({s.x, a.a});
      w.push_back(s.w * a.w);
    }
  const std::size_t P = pts.size();
  double lhs = 0.0;
  double fact = 1.0;
  for (int n = 0; n <= 3; ++n) {
    if (n > 0) fact *= n;
    std::size_t tuples = 1;
    for (int k = 0; k < n; ++k) tuples *= P;
    for (std::size_t t = 0; t < tuples; ++t) {
      std::vector<std::size_t> idx(n);
      std::size_t rem = t;
      double wt = 1.0;
      for (int k = 0; k < n; ++k) {
        idx[k] = rem % P;
        rem /= P;
        wt *= w[idx[k]];
      }
      for (unsigned mask = 0; mask < (1u << n); ++mask) {
        std::vector<MarkedPoint> xi, rest;
        for (int k = 0; k < n; ++k) ((mask >> k) & 1u ? xi : rest).push_back(pts[idx[k]]);
        lhs += wt * G(xi, rest) / fact;
      }
    }
  }
  CHECK(std::abs(m.lhs - lhs) <= 1e-12 * std::abs(lhs));
  CHECK(std::abs(m.lhs - m.rhs) <= 1e-9 * std::abs(m.rhs));
}
