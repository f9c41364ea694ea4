#pragma once

namespace agepop {

/// kappa* = max{kappa, b* / m_*}; m_* > 0.
double kappa_star(double kappa, double b_star, double m_star_lo);

/// (n!)^eps (3 kappa*)^n exp(-m_* t): bound on |k_t - k_stationary|_n.
double convergence_bound(double epsilon, double kappa_star, int n, double m_star_lo, double t);

/// exp(-m_* t) sum_{n >= 1} (kappa volume)^n / (n!)^{1 - eps}, with the
/// series cut once a term falls below 1e-16. Callers pass kappa = 3 kappa*.
double functional_gap_bound(double kappa, double epsilon, double volume, double m_star_lo, double t);

}  // namespace agepop
