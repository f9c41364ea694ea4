#include <stdexcept>
#include <doctest.h>

#include <cmath>

#include "agepop/rate_model.hpp"
#include "agepop/theta.hpp"

using namespace agepop;

namespace {

const Window kWindow = Window::unit_interval(40.0);

RateModel linear_hazard_table() {
  // m(x, a) = a on nodes 0, 0.25, ..., 5; constant beyond.
  TabulatedRates t;
  t.dim = 1;
  t.lower = {0.0, 0.0};
  t.upper = {1.0, 0.0};
  t.x_nodes = 2;
  t.b = {1.0, 1.0};
  t.a_step = 0.25;
  for (int node = 0; node < 2; ++node)
    for (int k = 0; k <= 20; ++k) t.m.push_back(0.25 * k);
  return RateModel::tabulated(t, RateBounds{1.0, 5.0, 0.0});
}

double trapezoid(const std::function<double(double)>& f, double lo, double hi, int n) {
  const double h = (hi - lo) / n;
  double s = 0.5 * (f(lo) + f(hi));
  for (int i = 1; i < n; ++i) s += f(lo + i * h);
  return s * h;
}

}  // namespace

TEST_CASE("constant hazard integrates in closed form") {
  const RateModel r = RateModel::constant(1.0, 1.0);
  CHECK(r.cumulative_hazard({0.5, 0.0}, 0.0, 2.0) == 2.0);
  CHECK(r.cumulative_hazard({0.5, 0.0}, 3.0, 3.0) == 0.0);
  CHECK_THROWS_AS(r.cumulative_hazard({0.5, 0.0}, 2.0, 1.0), std::invalid_argument);
  CHECK(r.survival({0.5, 0.0}, 0.0, std::log(2.0)) == doctest::Approx(0.5).epsilon(1e-15));
  CHECK(r.bounds().b_star == 1.0);
  CHECK(r.m_star_lo() == 1.0);
  CHECK(r.kind() == RateKind::constant);
}

TEST_CASE("tabulated linear hazard matches a fine trapezoid oracle") {
  const RateModel r = linear_hazard_table();
  const Position x{0.3, 0.0};
  CHECK(r.m(x, 1.1) == doctest::Approx(1.1).epsilon(1e-14));
  CHECK(r.m(x, 9.0) == 5.0);
  const double oracle = trapezoid([&](double a) { return r.m(x, a); }, 0.0, 2.0, 4000);
  CHECK(r.cumulative_hazard(x, 0.0, 2.0) == doctest::Approx(2.0).epsilon(1e-12));
  CHECK(r.cumulative_hazard(x, 0.0, 2.0) == doctest::Approx(oracle).epsilon(1e-6));
  // Across the end of the table: 12.5 up to a = 5, then slope 5.
  CHECK(r.cumulative_hazard(x, 0.0, 7.0) == doctest::Approx(12.5 + 10.0).epsilon(1e-12));
  CHECK(r.cumulative_hazard(x, 1.0, 1.0) == 0.0);
}

TEST_CASE("tabulated bounds are validated against the tables") {
  TabulatedRates t;
  t.x_nodes = 1;
  t.b = {2.0};
  t.a_step = 1.0;
  t.m = {1.0, 3.0};
  CHECK_THROWS_AS(RateModel::tabulated(t, RateBounds{1.0, 3.0, 1.0}), std::invalid_argument);
  CHECK_THROWS_AS(RateModel::tabulated(t, RateBounds{2.0, 2.0, 1.0}), std::invalid_argument);
  CHECK_THROWS_AS(RateModel::tabulated(t, RateBounds{2.0, 3.0, 1.5}), std::invalid_argument);
  CHECK_NOTHROW(RateModel::tabulated(t, RateBounds{2.0, 3.0, 1.0}));
  t.m = {1.0, 3.0, 2.0};
  t.b = {2.0, 2.0};
  CHECK_THROWS_AS(RateModel::tabulated(t, RateBounds{2.0, 3.0, 1.0}), std::invalid_argument);
}

TEST_CASE("tabulated rates use the nearest spatial node") {
  TabulatedRates t;
  t.x_nodes = 3;
  t.lower = {0.0, 0.0};
  t.upper = {1.0, 0.0};
  t.b = {1.0, 2.0, 3.0};
  t.a_step = 1.0;
  t.m = {1.0, 1.0, 2.0, 2.0, 3.0, 3.0};
  const RateModel r = RateModel::tabulated(t, RateBounds{3.0, 3.0, 1.0});
  CHECK(r.b({0.1, 0.0}) == 1.0);
  CHECK(r.b({0.45, 0.0}) == 2.0);
  CHECK(r.b({0.9, 0.0}) == 3.0);
  CHECK(r.m({0.9, 0.0}, 0.5) == 3.0);
  CHECK(r.cumulative_hazard({0.45, 0.0}, 0.0, 3.0) == doctest::Approx(6.0).epsilon(1e-12));
}

TEST_CASE("separable exponential hazard matches numerical integration") {
  SeparableExponentialRates p;
  p.b0 = 2.0;
  p.b_decay = 1.5;
  p.center = {0.4, 0.0};
  p.m0 = 3.0;
  p.m_inf = 0.5;
  p.m_decay = 0.7;
  p.m_spatial = 0.2;
  const RateModel r = RateModel::separable_exponential(p, 1);
  const Position x{0.9, 0.0};
  CHECK(r.b(x) == doctest::Approx(2.0 * std::exp(-0.75)));
  const double numeric = adaptive_simpson([&](double a) { return r.m(x, a); }, 0.3, 4.2, 1e-13);
  CHECK(r.cumulative_hazard(x, 0.3, 4.2) == doctest::Approx(numeric).epsilon(1e-11));
  CHECK(r.b_star() >= r.b(x));
  CHECK(r.m_star_lo() <= r.m(x, 100.0));
  CHECK(r.m_star_up() >= r.m(p.center, 0.0));
}

TEST_CASE("theta observables stay in (-1, 0] and start at vartheta") {
  const TemperingWeight psi = TemperingWeight::exponential(1);
  const std::vector<ThetaObservable> suite{
      ThetaObservable(VarthetaProfile::constant(-0.9, kWindow), 3.0, psi),
      ThetaObservable(VarthetaProfile::bump({0.3, 0.0}, 0.25, 0.9, 1), 0.5, psi),
      ThetaObservable(VarthetaProfile::zero(), 2.0, psi),
  };
  for (const auto& th : suite) {
    for (int i = 0; i <= 20; ++i) {
      const Position x{-0.5 + 0.1 * i, 0.0};
      CHECK(th(x, 0.0) == doctest::Approx(th.vartheta(x)).epsilon(1e-15));
      for (int k = 0; k <= 40; ++k) {
        const double a = 0.25 * k;
        const double v = th(x, a);
        CHECK(v > -1.0);
        CHECK(v <= 0.0);
        CHECK(std::abs(th.d_age(x, a)) <= th.tau() * psi(x) + 1e-15);
        const double h = 1e-5;
        const double fd = a == 0.0 ? (-3.0 * th(x, 0.0) + 4.0 * th(x, h) - th(x, 2.0 * h)) / (2.0 * h)
                                   : (th(x, a + h) - th(x, a - h)) / (2.0 * h);
        CHECK(th.d_age(x, a) == doctest::Approx(fd).epsilon(1e-6).scale(1.0));
      }
    }
    CHECK(th.c_theta(kWindow, 8, 16) >= 0.0);
  }
}

TEST_CASE("vartheta profiles validate their parameters") {
  CHECK_THROWS_AS(VarthetaProfile::constant(-1.0, kWindow), std::invalid_argument);
  CHECK_THROWS_AS(VarthetaProfile::constant(0.1, kWindow), std::invalid_argument);
  CHECK_THROWS_AS(VarthetaProfile::bump({0.5, 0.0}, 0.0, 0.5, 1), std::invalid_argument);
  CHECK_THROWS_AS(VarthetaProfile::bump({0.5, 0.0}, 0.5, 1.0, 1), std::invalid_argument);
  const auto bump = VarthetaProfile::bump({0.5, 0.0}, 0.2, 0.5, 1);
  CHECK(bump({0.5, 0.0}) == doctest::Approx(-0.5));
  CHECK(bump({0.71, 0.0}) == 0.0);
  const auto c = VarthetaProfile::constant(-0.4, kWindow);
  CHECK(c({1.5, 0.0}) == 0.0);
  CHECK_THROWS_AS(ThetaObservable(c, -1.0, TemperingWeight::exponential(1)), std::invalid_argument);
}

TEST_CASE("theta shift: identity at zero, survival factor, and cocycle") {
  const RateModel r = RateModel::constant(1.0, 1.0);
  const ThetaObservable th(VarthetaProfile::constant(-0.5, kWindow), 0.0, TemperingWeight::exponential(1));
  const Observable same = theta_shift(th, r, 0.0);
  CHECK(same({0.3, 0.0}, 1.2) == th({0.3, 0.0}, 1.2));
  const Observable half = theta_shift(th, r, std::log(2.0));
  CHECK(half({0.3, 0.0}, 1.0) == doctest::Approx(-0.25).epsilon(1e-15));
  CHECK_THROWS_AS(theta_shift(th, r, -0.1), std::invalid_argument);

  SeparableExponentialRates p;
  p.m0 = 2.0;
  p.m_inf = 0.5;
  p.m_decay = 1.0;
  const RateModel sep = RateModel::separable_exponential(p, 1);
  const ThetaObservable th2(VarthetaProfile::bump({0.5, 0.0}, 0.6, 0.7, 1), 1.5, TemperingWeight::exponential(1));
  for (double s : {0.3, 1.1})
    for (double t : {0.3, 1.1}) {
      const Observable direct = theta_shift(th2, sep, s + t);
      const Observable twice = theta_shift(theta_shift(th2, sep, s), sep, t);
      for (int i = 0; i <= 10; ++i)
        for (int k = 0; k <= 10; ++k) {
          const Position x{0.1 * i, 0.0};
          CHECK(std::abs(direct(x, 0.7 * k) - twice(x, 0.7 * k)) <= 1e-12);
        }
    }
}
