#pragma once

#include <string>
#include <vector>

#include "agepop/quadrature.hpp"
#include "agepop/rate_model.hpp"
#include "agepop/types.hpp"

namespace agepop {

/// Jump of an intensity in the age variable: density(c+) - density(c-).
struct AgeJump {
  double age = 0.0;
  SpatialFunction size;
};

/// First-order correlation function rho(x, a) of a Poisson state.
///
/// Besides the density, the kernel carries what the generator needs: the
/// absolutely continuous part of (d/da + m) rho and the list of age jumps,
/// including the drop to zero at the end of the support.
class IntensityKernel {
 public:
  struct Parts {
    Observable density;          // meaningful on [0, support)
    Observable transport;        // (d/da + m) density between jumps; empty when unknown
    std::vector<AgeJump> jumps;
    double support = 0.0;        // density vanishes for a >= support
    double kappa = 0.0;          // bound on sup_x int rho(x, a) da
    double bound = 0.0;          // bound on sup rho, used by the sampler
    std::string label;
  };

  explicit IntensityKernel(Parts parts);

  static IntensityKernel zero();

  double operator()(const Position& x, double a) const;
  bool has_transport() const { return static_cast<bool>(parts_.transport); }
  /// (d/da + m) rho at (x, a); zero outside the support.
  double transport(const Position& x, double a) const;
  const std::vector<AgeJump>& jumps() const { return parts_.jumps; }
  /// Ages at which quadrature panels are split.
  std::vector<double> breaks() const;
  double support() const { return parts_.support; }
  double kappa() const { return parts_.kappa; }
  double bound() const { return parts_.bound; }
  const std::string& label() const { return parts_.label; }

  /// Intensity of the state after every entity has aged by t and survived
  /// its hazard: rho(x, a - t) exp(-M(x; a - t, a)) 1{a >= t}.
  IntensityKernel transported(const RateModel& rate, double t) const;
  /// q rho for an age-dependent retention probability q; the transport part
  /// is not available afterwards.
  IntensityKernel thinned(const Observable& q) const;
  /// c rho for a constant c >= 0.
  IntensityKernel scaled(double c) const;

  friend IntensityKernel operator+(const IntensityKernel& lhs, const IntensityKernel& rhs);

 private:
  Parts parts_;
};

/// Immigrant intensity at time t: b(x) exp(-M(x; 0, a)) on [0, t).
IntensityKernel rho_t(const RateModel& rate, double t);

/// Stationary intensity b(x) exp(-M(x; 0, a)), truncated at a_max.
IntensityKernel stationary_intensity(const RateModel& rate, double a_max);

/// c exp(-r a) on [0, a_max); the transport term is computed against rate.
IntensityKernel exponential_intensity(const RateModel& rate, double c, double r, double a_max);

/// int_window int rho theta da dx; pi_rho(F_theta) = exp of the result.
/// Throws std::runtime_error when the quadrature is not finite.
double poisson_log_functional(const IntensityKernel& rho, const Observable& theta, const Window& window,
                              const QuadratureSpec& spec);

}  // namespace agepop
