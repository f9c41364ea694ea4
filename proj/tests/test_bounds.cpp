#include <stdexcept>
#include <doctest.h>

#include <cmath>

#include "agepop/bounds.hpp"

using namespace agepop;

TEST_CASE("kappa star takes the larger of kappa and b*/m_*") {
  CHECK(kappa_star(0.5, 1.0, 1.0) == 1.0);
  CHECK(kappa_star(3.0, 1.0, 1.0) == 3.0);
  CHECK(kappa_star(0.0, 2.0, 0.5) == 4.0);
}

TEST_CASE("convergence bound") {
  CHECK(convergence_bound(0.0, 1.0, 1, 1.0, std::log(10.0)) == doctest::Approx(0.3).epsilon(1e-14));
  CHECK(convergence_bound(0.0, 1.0, 2, 1.0, 0.0) == doctest::Approx(9.0).epsilon(1e-15));
  // (3!)^0.5 (3 * 2)^3 e^{-1}
  CHECK(convergence_bound(0.5, 2.0, 3, 0.5, 2.0) == doctest::Approx(std::sqrt(6.0) * 216.0 * std::exp(-1.0)));
  CHECK_THROWS_AS(convergence_bound(0.0, 1.0, 1, 0.0, 1.0), std::invalid_argument);
}

TEST_CASE("functional gap bound") {
  CHECK(functional_gap_bound(1.0, 0.0, 1.0, 1.0, 0.0) == doctest::Approx(std::exp(1.0) - 1.0).epsilon(1e-14));
  CHECK(functional_gap_bound(1.0, 0.0, 1.0, 1.0, 0.0) == doctest::Approx(1.718282).epsilon(1e-6));
  CHECK(functional_gap_bound(3.0, 0.0, 0.5, 2.0, 1.0) ==
        doctest::Approx(std::exp(-2.0) * (std::exp(1.5) - 1.0)).epsilon(1e-14));
  CHECK_THROWS_AS(functional_gap_bound(1.0, 0.0, 1.0, -1.0, 0.0), std::invalid_argument);
}
