#include "agepop/bounds.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace agepop {

namespace {

void require_positive_m(double m_star_lo) {
  if (!(m_star_lo > 0.0)) throw std::invalid_argument("convergence bounds need m_star_lo > 0");
}

void require_epsilon(double epsilon) {
  if (!(epsilon >= 0.0 && epsilon < 1.0)) throw std::invalid_argument("epsilon must lie in [0, 1)");
}

}  // namespace

double kappa_star(double kappa, double b_star, double m_star_lo) {
  require_positive_m(m_star_lo);
  return std::max(kappa, b_star / m_star_lo);
}

double convergence_bound(double epsilon, double kappa_star, int n, double m_star_lo, double t) {
  require_positive_m(m_star_lo);
  require_epsilon(epsilon);
  if (n < 1) throw std::invalid_argument("convergence bound needs n >= 1");
  return std::exp(epsilon * std::lgamma(n + 1.0) + n * std::log(3.0 * kappa_star) - m_star_lo * t);
}

double functional_gap_bound(double kappa, double epsilon, double volume, double m_star_lo, double t) {
  require_positive_m(m_star_lo);
  require_epsilon(epsilon);
  if (!(kappa >= 0.0) || !(volume >= 0.0)) throw std::invalid_argument("kappa and volume must be >= 0");
  const double x = kappa * volume;
  if (x == 0.0) return 0.0;
  double sum = 0.0;
  for (int n = 1; n < 100000; ++n) {
    const double term = std::exp(n * std::log(x) - (1.0 - epsilon) * std::lgamma(n + 1.0));
    sum += term;
    // Terms decrease once n exceeds x^(1/(1-eps)).
    if (term < 1e-16 && std::pow(n, 1.0 - epsilon) > x) break;
  }
  return std::exp(-m_star_lo * t) * sum;
}

}  // namespace agepop
