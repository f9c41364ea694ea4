#pragma once

#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "agepop/config.hpp"
#include "agepop/correlation_kernel.hpp"
#include "agepop/report.hpp"

namespace agepop {

/// Empirical (x, a)-histogram of the first init at the last observation
/// time against the analytic first moment of mu_t. Emits density.csv.
Report run_density_match(const ExperimentConfig& cfg, int workers);

/// Monte Carlo mu_t(F_theta) against the closed form for every init, time
/// and observable, plus the count bound for kernel-representable inits.
/// Emits functional.csv and counts.csv.
Report run_functional_match(const ExperimentConfig& cfg, int workers);

/// Tabulates mu_t(F_theta) and mu_t(L F_theta). Emits analytic.csv.
Report run_analytic(const ExperimentConfig& cfg, int workers);

/// d/dt mu_t(F_theta) against mu_t(L F_theta), and L on the stationary
/// Poisson state. Emits fpe.csv and stationarity.csv.
Report run_fpe_residual(const ExperimentConfig& cfg, int workers);

/// |k_t^(1) - b_hat|_1 over the convergence grid with its decay fit and the
/// kernel-norm bounds. Emits convergence.csv and norms.csv.
Report run_convergence(const ExperimentConfig& cfg, int workers);

/// Minlos, convolution, thinning, cocycle, flow and Lebesgue-Poisson
/// exponential identities. Emits identities.csv.
Report run_identity_suite(const ExperimentConfig& cfg, int workers);

struct Derivative {
  double value = 0.0;
  std::string method;  // "central4", "forward4" or "richardson"
};

/// Fourth-order finite difference of f at t with step h (one-sided when
/// t < 2h). Falls back to Richardson extrapolation when the second-order
/// estimate disagrees by more than 10 * tol.
Derivative fpe_derivative(const std::function<double(double)>& f, double t, double h, double tol);

/// Correlation kernel of a state built from Empty, Poisson and their
/// convolutions; nullopt when a deterministic part is present.
std::optional<CorrelationKernel> kernel_of(const State& state, int n_max);

/// Expected number of points of the state in cell x [a_lo, a_hi).
double expected_count(const State& state, const Window& cell, double a_lo, double a_hi, const QuadratureSpec& spec);

struct ChiSquare {
  double statistic = 0.0;
  int dof = 0;
  double critical = 0.0;  // 0.99 quantile
  double p_value = 0.0;
};

/// Goodness of fit of count data to Poisson(mean); cells are merged from
/// the upper tail until every expected count is at least 5.
ChiSquare poisson_chi_square(const std::vector<std::size_t>& counts, double mean);

/// Decay rate of log(values) against times by least squares.
double fitted_decay_rate(const std::vector<double>& times, const std::vector<double>& values);

}  // namespace agepop
