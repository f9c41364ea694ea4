#pragma once

#include <string>

#include "agepop/rate_model.hpp"
#include "agepop/tempering.hpp"
#include "agepop/types.hpp"

namespace agepop {

/// Spatial profile vartheta: X -> (-1, 0], continuous with compact support.
class VarthetaProfile {
 public:
  static VarthetaProfile zero();
  /// c on the window, 0 outside; c in (-1, 0].
  static VarthetaProfile constant(double c, const Window& window);
  /// -depth * exp(1 - 1 / (1 - r^2)) for r = |x - center| / width < 1, else 0.
  static VarthetaProfile bump(const Position& center, double width, double depth, int dim);
  /// Profile of the pointwise product of two Bogoliubov functionals:
  /// p + q + p q.
  static VarthetaProfile combined(const VarthetaProfile& p, const VarthetaProfile& q);

  double operator()(const Position& x) const { return f_(x); }
  const std::string& spec() const { return spec_; }

 private:
  VarthetaProfile(SpatialFunction f, std::string spec) : f_(std::move(f)), spec_(std::move(spec)) {}

  SpatialFunction f_;
  std::string spec_;
};

inline double phi(double a) { return a / (1.0 + a); }

/// theta(x, a) = (1 + vartheta(x)) exp(-tau psi(x) phi(a)) - 1, phi(a) = a / (1 + a).
class ThetaObservable {
 public:
  ThetaObservable(VarthetaProfile vartheta, double tau, TemperingWeight psi);

  double operator()(const Position& x, double a) const;
  double d_age(const Position& x, double a) const;
  double vartheta(const Position& x) const { return vartheta_(x); }
  double tau() const { return tau_; }
  const VarthetaProfile& profile() const { return vartheta_; }
  const TemperingWeight& psi() const { return psi_; }
  std::string label() const;

  /// sup over a grid of |theta| / psi; recorded as a diagnostic.
  double c_theta(const Window& window, int per_axis, int age_points) const;

 private:
  VarthetaProfile vartheta_;
  double tau_;
  TemperingWeight psi_;
};

/// Observable whose Bogoliubov functional is F_theta * F_theta2.
ThetaObservable theta_product(const ThetaObservable& theta, const ThetaObservable& theta2);

/// theta_t(x, a) = theta(x, a + t) exp(-M(x; a, a + t)).
Observable theta_shift(const Observable& theta, const RateModel& rate, double t);

}  // namespace agepop
