#include "agepop/intensity.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>
#include <stdexcept>

namespace agepop {

IntensityKernel::IntensityKernel(Parts parts) : parts_(std::move(parts)) {
  if (!parts_.density) throw std::invalid_argument("intensity kernel needs a density");
  if (!(parts_.support >= 0.0)) throw std::invalid_argument("intensity support must be >= 0");
  if (!(parts_.bound >= 0.0) || !(parts_.kappa >= 0.0)) {
    throw std::invalid_argument("intensity bounds must be >= 0");
  }
}

IntensityKernel IntensityKernel::zero() {
  Parts p;
  p.density = [](const Position&, double) { return 0.0; };
  p.transport = [](const Position&, double) { return 0.0; };
  p.label = "zero";
  return IntensityKernel(std::move(p));
}

double IntensityKernel::operator()(const Position& x, double a) const {
  if (a < 0.0 || a >= parts_.support) return 0.0;
  return parts_.density(x, a);
}

double IntensityKernel::transport(const Position& x, double a) const {
  if (!parts_.transport) throw std::logic_error("intensity '" + parts_.label + "' has no transport term");
  if (a < 0.0 || a >= parts_.support) return 0.0;
  return parts_.transport(x, a);
}

std::vector<double> IntensityKernel::breaks() const {
  std::vector<double> out;
  for (const auto& j : parts_.jumps) out.push_back(j.age);
  out.push_back(parts_.support);
  std::sort(out.begin(), out.end());
  out.erase(std::unique(out.begin(), out.end()), out.end());
  return out;
}

IntensityKernel IntensityKernel::transported(const RateModel& rate, double t) const {
  if (!(t >= 0.0)) throw std::invalid_argument("transport time must be >= 0");
  if (t == 0.0) return *this;
  const Parts src = parts_;
  Parts p;
  p.support = src.support + t;
  p.kappa = src.kappa * std::exp(-rate.m_star_lo() * t);
  p.bound = src.bound;
  p.label = src.label + ">>" + [&] {
    std::ostringstream os;
    os << t;
    return os.str();
  }();
  p.density = [src, rate, t](const Position& x, double a) {
    if (a < t || a - t >= src.support) return 0.0;
    return src.density(x, a - t) * std::exp(-rate.cumulative_hazard(x, a - t, a));
  };
  if (src.transport) {
    p.transport = [src, rate, t](const Position& x, double a) {
      if (a < t || a - t >= src.support) return 0.0;
      return src.transport(x, a - t) * std::exp(-rate.cumulative_hazard(x, a - t, a));
    };
  }
  // Entities of age 0 arrive at age t: the shifted density jumps up there.
  if (src.support > 0.0) {
    p.jumps.push_back({t, [src, rate, t](const Position& x) {
                         return src.density(x, 0.0) * std::exp(-rate.cumulative_hazard(x, 0.0, t));
                       }});
  }
  for (const auto& j : src.jumps) {
    const double c = j.age;
    const SpatialFunction size = j.size;
    p.jumps.push_back({c + t, [size, rate, c, t](const Position& x) {
                         return size(x) * std::exp(-rate.cumulative_hazard(x, c, c + t));
                       }});
  }
  return IntensityKernel(std::move(p));
}

IntensityKernel IntensityKernel::thinned(const Observable& q) const {
  Parts p = parts_;
  const Parts src = parts_;
  p.density = [src, q](const Position& x, double a) { return q(x, a) * src.density(x, a); };
  p.transport = nullptr;
  p.jumps.clear();
  for (const auto& j : src.jumps) {
    const double c = j.age;
    const SpatialFunction size = j.size;
    p.jumps.push_back({c, [size, q, c](const Position& x) { return q(x, c) * size(x); }});
  }
  p.label = "thinned(" + src.label + ")";
  return IntensityKernel(std::move(p));
}

IntensityKernel IntensityKernel::scaled(double c) const {
  if (!(c >= 0.0)) throw std::invalid_argument("intensity scale must be >= 0");
  Parts p = parts_;
  const Parts src = parts_;
  p.density = [src, c](const Position& x, double a) { return c * src.density(x, a); };
  if (src.transport) p.transport = [src, c](const Position& x, double a) { return c * src.transport(x, a); };
  p.jumps.clear();
  for (const auto& j : src.jumps) {
    const SpatialFunction size = j.size;
    p.jumps.push_back({j.age, [size, c](const Position& x) { return c * size(x); }});
  }
  p.kappa *= c;
  p.bound *= c;
  std::ostringstream os;
  os << c << '*' << src.label;
  p.label = os.str();
  return IntensityKernel(std::move(p));
}

IntensityKernel operator+(const IntensityKernel& lhs, const IntensityKernel& rhs) {
  IntensityKernel::Parts p;
  const IntensityKernel l = lhs;
  const IntensityKernel r = rhs;
  p.support = std::max(lhs.support(), rhs.support());
  p.kappa = lhs.kappa() + rhs.kappa();
  p.bound = lhs.bound() + rhs.bound();
  p.label = lhs.label() + "+" + rhs.label();
  p.density = [l, r](const Position& x, double a) { return l(x, a) + r(x, a); };
  if (lhs.has_transport() && rhs.has_transport()) {
    p.transport = [l, r](const Position& x, double a) { return l.transport(x, a) + r.transport(x, a); };
  }
  p.jumps = lhs.jumps();
  p.jumps.insert(p.jumps.end(), rhs.jumps().begin(), rhs.jumps().end());
  return IntensityKernel(std::move(p));
}

IntensityKernel rho_t(const RateModel& rate, double t) {
  if (!(t >= 0.0)) throw std::invalid_argument("rho_t needs t >= 0");
  IntensityKernel::Parts p;
  p.support = t;
  p.bound = rate.b_star();
  const double m_lo = rate.m_star_lo();
  p.kappa = m_lo > 0.0 ? rate.b_star() * std::min(t, 1.0 / m_lo) : rate.b_star() * t;
  p.density = [rate](const Position& x, double a) { return rate.b(x) * std::exp(-rate.cumulative_hazard(x, 0.0, a)); };
  p.transport = [](const Position&, double) { return 0.0; };
  if (t > 0.0) {
    p.jumps.push_back(
        {t, [rate, t](const Position& x) { return -rate.b(x) * std::exp(-rate.cumulative_hazard(x, 0.0, t)); }});
  }
  std::ostringstream os;
  os << "rho_t(" << t << ')';
  p.label = os.str();
  return IntensityKernel(std::move(p));
}

IntensityKernel stationary_intensity(const RateModel& rate, double a_max) {
  if (!(a_max > 0.0)) throw std::invalid_argument("stationary intensity needs a_max > 0");
  IntensityKernel::Parts p;
  p.support = a_max;
  p.bound = rate.b_star();
  const double m_lo = rate.m_star_lo();
  p.kappa = m_lo > 0.0 ? rate.b_star() / m_lo : rate.b_star() * a_max;
  p.density = [rate](const Position& x, double a) { return rate.b(x) * std::exp(-rate.cumulative_hazard(x, 0.0, a)); };
  p.transport = [](const Position&, double) { return 0.0; };
  p.jumps.push_back({a_max, [rate, a_max](const Position& x) {
                       return -rate.b(x) * std::exp(-rate.cumulative_hazard(x, 0.0, a_max));
                     }});
  p.label = "stationary";
  return IntensityKernel(std::move(p));
}

IntensityKernel exponential_intensity(const RateModel& rate, double c, double r, double a_max) {
  if (!(c >= 0.0) || !(r >= 0.0)) throw std::invalid_argument("exponential intensity needs c >= 0 and r >= 0");
  if (!(a_max > 0.0)) throw std::invalid_argument("exponential intensity needs a_max > 0");
  IntensityKernel::Parts p;
  p.support = a_max;
  p.bound = c;
  p.kappa = r > 0.0 ? -c * std::expm1(-r * a_max) / r : c * a_max;
  p.density = [c, r](const Position&, double a) { return c * std::exp(-r * a); };
  p.transport = [rate, c, r](const Position& x, double a) { return (rate.m(x, a) - r) * c * std::exp(-r * a); };
  p.jumps.push_back({a_max, [c, r, a_max](const Position&) { return -c * std::exp(-r * a_max); }});
  std::ostringstream os;
  os << "exp(c=" << c << ",rate=" << r << ')';
  p.label = os.str();
  return IntensityKernel(std::move(p));
}

double poisson_log_functional(const IntensityKernel& rho, const Observable& theta, const Window& window,
                              const QuadratureSpec& spec) {
  const auto breaks = rho.breaks();
  const double value = integrate_window_age(window, spec, 0.0, rho.support(), breaks,
                                            [&](const Position& x, double a) { return rho(x, a) * theta(x, a); });
  if (!std::isfinite(value)) throw std::runtime_error("Poisson functional quadrature is not finite");
  return value;
}

}  // namespace agepop
