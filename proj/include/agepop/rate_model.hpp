#pragma once

#include <string>
#include <variant>
#include <vector>

#include "agepop/types.hpp"

namespace agepop {

enum class RateKind { constant, separable_exponential, tabulated };

std::string to_string(RateKind kind);

/// b(x) = b, m(x, a) = m.
struct ConstantRates {
  double b = 1.0;
  double m = 1.0;
};

/// b(x) = b0 exp(-b_decay |x - center|)
/// m(x, a) = (1 + m_spatial exp(-|x - center|)) (m_inf + (m0 - m_inf) exp(-m_decay a))
struct SeparableExponentialRates {
  double b0 = 1.0;
  double b_decay = 0.0;
  Position center{};
  double m0 = 1.0;
  double m_inf = 1.0;
  double m_decay = 0.0;
  double m_spatial = 0.0;
};

/// Regular-grid tables: b by nearest spatial node; m by nearest spatial node
/// and piecewise-linear interpolation in age (constant beyond the last age
/// node). Spatial nodes span the window, x_nodes per axis; m is stored
/// spatial-node-major with a_count = m.size() / spatial nodes.
struct TabulatedRates {
  int dim = 1;
  Position lower{};
  Position upper{};
  int x_nodes = 1;
  std::vector<double> b;
  double a_step = 1.0;
  std::vector<double> m;
};

/// Declared bounds: 0 <= b <= b_star and m_star_lo <= m <= m_star_up.
struct RateBounds {
  double b_star = 0.0;
  double m_star_up = 0.0;
  double m_star_lo = 0.0;
};

class RateModel {
 public:
  static RateModel constant(double b, double m);
  static RateModel separable_exponential(const SeparableExponentialRates& params, int dim);
  /// Declared bounds are required and validated against the tables.
  static RateModel tabulated(TabulatedRates tables, const RateBounds& declared);

  double b(const Position& x) const;
  double m(const Position& x, double a) const;

  /// M(x; a0, a1) = int_{a0}^{a1} m(x, alpha) d alpha, a0 <= a1.
  double cumulative_hazard(const Position& x, double a0, double a1) const;
  double survival(const Position& x, double a0, double a1) const;

  RateKind kind() const;
  const RateBounds& bounds() const { return bounds_; }
  double b_star() const { return bounds_.b_star; }
  double m_star_up() const { return bounds_.m_star_up; }
  double m_star_lo() const { return bounds_.m_star_lo; }

  /// Replace the derived bounds with user-declared ones after checking them.
  RateModel with_declared_bounds(const RateBounds& declared) const;

  std::string fingerprint() const;

 private:
  using Params = std::variant<ConstantRates, SeparableExponentialRates, TabulatedRates>;

  RateModel(Params params, RateBounds bounds, int dim) : params_(std::move(params)), bounds_(bounds), dim_(dim) {}

  std::size_t nearest_node(const TabulatedRates& t, const Position& x) const;
  double tabulated_m(const TabulatedRates& t, std::size_t node, double a) const;

  Params params_;
  RateBounds bounds_;
  int dim_ = 1;
};

/// Adaptive Simpson quadrature to an absolute tolerance.
double adaptive_simpson(const std::function<double(double)>& f, double lo, double hi, double abs_tol);

}  // namespace agepop
