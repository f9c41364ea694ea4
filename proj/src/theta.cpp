#include "agepop/theta.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>
#include <stdexcept>

namespace agepop {

VarthetaProfile VarthetaProfile::zero() {
  return VarthetaProfile([](const Position&) { return 0.0; }, "const(0)");
}

VarthetaProfile VarthetaProfile::constant(double c, const Window& window) {
  if (!(c > -1.0 && c <= 0.0)) throw std::invalid_argument("const(c) needs c in (-1, 0]");
  std::ostringstream os;
  os << "const(" << c << ')';
  return VarthetaProfile([c, window](const Position& x) { return window.contains(x) ? c : 0.0; }, os.str());
}

VarthetaProfile VarthetaProfile::bump(const Position& center, double width, double depth, int dim) {
  if (!(width > 0.0)) throw std::invalid_argument("bump width must be positive");
  if (!(depth >= 0.0 && depth < 1.0)) throw std::invalid_argument("bump depth must lie in [0, 1)");
  if (dim != 1 && dim != 2) throw std::invalid_argument("spatial dimension must be 1 or 2");
  std::ostringstream os;
  os << "bump(center=" << describe(center, dim) << ",width=" << width << ",depth=" << depth << ')';
  return VarthetaProfile(
      [center, width, depth, dim](const Position& x) {
        const double r = distance(x, center, dim) / width;
        if (r >= 1.0) return 0.0;
        return -depth * std::exp(1.0 - 1.0 / (1.0 - r * r));
      },
      os.str());
}

VarthetaProfile VarthetaProfile::combined(const VarthetaProfile& p, const VarthetaProfile& q) {
  return VarthetaProfile(
      [p, q](const Position& x) {
        const double u = p(x);
        const double v = q(x);
        return u + v + u * v;
      },
      "(" + p.spec() + ")*(" + q.spec() + ")");
}

ThetaObservable::ThetaObservable(VarthetaProfile vartheta, double tau, TemperingWeight psi)
    : vartheta_(std::move(vartheta)), tau_(tau), psi_(std::move(psi)) {
  if (!(tau >= 0.0) || !std::isfinite(tau)) throw std::invalid_argument("tau must be finite and >= 0");
}

double ThetaObservable::operator()(const Position& x, double a) const {
  const double v = vartheta_(x);
  if (tau_ == 0.0) return v;
  const double s = -tau_ * psi_(x) * phi(a);
  return v * std::exp(s) + std::expm1(s);
}

double ThetaObservable::d_age(const Position& x, double a) const {
  if (tau_ == 0.0) return 0.0;
  const double p = psi_(x);
  const double dphi = 1.0 / ((1.0 + a) * (1.0 + a));
  return -(1.0 + vartheta_(x)) * tau_ * p * dphi * std::exp(-tau_ * p * phi(a));
}

std::string ThetaObservable::label() const {
  std::ostringstream os;
  os << vartheta_.spec() << ";tau=" << tau_;
  return os.str();
}

double ThetaObservable::c_theta(const Window& window, int per_axis, int age_points) const {
  double sup = 0.0;
  const int ny = window.dim() == 2 ? per_axis : 1;
  for (int i = 0; i < per_axis; ++i) {
    for (int j = 0; j < ny; ++j) {
      Position x{};
      x[0] = window.lower()[0] + (window.upper()[0] - window.lower()[0]) * (i + 0.5) / per_axis;
      if (window.dim() == 2) x[1] = window.lower()[1] + (window.upper()[1] - window.lower()[1]) * (j + 0.5) / ny;
      for (int k = 0; k < age_points; ++k) {
        const double a = window.a_max() * k / std::max(1, age_points - 1);
        sup = std::max(sup, std::abs((*this)(x, a)) / psi_(x));
      }
    }
  }
  return sup;
}

ThetaObservable theta_product(const ThetaObservable& theta, const ThetaObservable& theta2) {
  if (theta.psi().label() != theta2.psi().label()) {
    throw std::invalid_argument("theta product needs a common tempering weight");
  }
  return ThetaObservable(VarthetaProfile::combined(theta.profile(), theta2.profile()), theta.tau() + theta2.tau(),
                         theta.psi());
}

Observable theta_shift(const Observable& theta, const RateModel& rate, double t) {
  if (!(t >= 0.0)) throw std::invalid_argument("theta shift needs t >= 0");
  if (t == 0.0) return theta;
  return [theta, rate, t](const Position& x, double a) {
    return theta(x, a + t) * std::exp(-rate.cumulative_hazard(x, a, a + t));
  };
}

}  // namespace agepop
