#pragma once

#include <optional>
#include <span>
#include <string>
#include <vector>

#include "agepop/intensity.hpp"
#include "agepop/quadrature.hpp"
#include "agepop/rate_model.hpp"
#include "agepop/types.hpp"

namespace agepop {

/// Correlation function k(eta) of a state, given order by order up to n_max.
/// k(empty) = 1; evaluators are symmetric in their arguments.
class CorrelationKernel {
 public:
  using Evaluator = std::function<double(std::span<const MarkedPoint>)>;

  struct Parts {
    Evaluator eval;                          // called with 1..n_max points
    int n_max = 0;
    double epsilon = 0.0;                    // growth exponent in [0, 1)
    double kappa = 0.0;                      // scale bound
    double age_support = 0.0;                // k vanishes once an age reaches this value
    std::vector<double> age_breaks;          // discontinuities in any age argument
    std::optional<IntensityKernel> product;  // set when k = prod rho
    std::string label;
  };

  explicit CorrelationKernel(Parts parts);

  /// Throws std::out_of_range beyond n_max.
  double operator()(std::span<const MarkedPoint> points) const;

  int n_max() const { return parts_.n_max; }
  double epsilon() const { return parts_.epsilon; }
  double kappa() const { return parts_.kappa; }
  double age_support() const { return parts_.age_support; }
  const std::vector<double>& age_breaks() const { return parts_.age_breaks; }
  const IntensityKernel* product_intensity() const { return parts_.product ? &*parts_.product : nullptr; }
  const std::string& label() const { return parts_.label; }

 private:
  Parts parts_;
};

/// Kernel of the empty habitat: 1 on the empty configuration, 0 elsewhere.
CorrelationKernel vacuum_kernel(int n_max);

/// k(eta) = prod rho(x); epsilon = 0, kappa = rho.kappa().
CorrelationKernel poisson_kernel(const IntensityKernel& rho, int n_max);

/// Kernel of mu^t: ages shift by t, every point survives its hazard, and
/// points younger than t are annihilated.
CorrelationKernel evolve_kernel(const CorrelationKernel& k0, const RateModel& rate, double t);

/// Kernel of mu_t = mu_0^t * pi_{rho_t}.
CorrelationKernel solution_kernel(const CorrelationKernel& k0, const RateModel& rate, double t);

/// Kernel of the independent q-thinning: k(eta) prod q(x).
CorrelationKernel thin_kernel(const CorrelationKernel& k, const Observable& q);

/// Kernel of the superposition: sum over subsets xi of eta of
/// k1(eta \ xi) k2(xi). Orders beyond min(n_max) are rejected.
CorrelationKernel convolve_kernels(const CorrelationKernel& k1, const CorrelationKernel& k2);

/// Grid for sup-norm evaluation.
struct NormGrid {
  int x_points = 5;         // sup grid: cell centres per spatial axis
  int a_nodes = 24;         // Gauss-Legendre nodes per age panel
  double max_panel = 10.0;
  int workers = 1;
};

/// |k|_n: sup over n-tuples of grid locations of the n-fold age integral of |k^(n)|.
double kernel_norm(const CorrelationKernel& k, int n, const Window& window, const NormGrid& grid);

/// |k1 - k2|_n on the same grid.
double kernel_gap_norm(const CorrelationKernel& k1, const CorrelationKernel& k2, int n, const Window& window,
                       const NormGrid& grid);

/// ||k||_{eps, kappa} = sup_{1 <= n <= max_order} |k|_n (n!)^{-eps} kappa^{-n}.
double banach_norm(const CorrelationKernel& k, double epsilon, double kappa, int max_order, const Window& window,
                   const NormGrid& grid);

/// Same weighting applied to precomputed order norms (index 0 is order 1).
double banach_norm(std::span<const double> order_norms, double epsilon, double kappa);

/// mu(F_theta) = int k(eta) prod theta d lambda(eta), truncated at
/// min(spec.n_max, k.n_max()).
double kernel_functional(const CorrelationKernel& k, const Observable& theta, const Window& window,
                         const QuadratureSpec& spec);

}  // namespace agepop
