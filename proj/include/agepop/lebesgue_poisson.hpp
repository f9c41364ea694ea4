#pragma once

#include <span>

#include "agepop/quadrature.hpp"
#include "agepop/types.hpp"

namespace agepop {

/// Symmetric function G on finite configurations, given by its restrictions
/// G^(n) to n-point configurations.
///
/// Product-form functionals G(eta) = prod_{x in eta} g(x) are kept in
/// factorized form: their n-fold tensor quadrature sums are the n-th power
/// of the one-point sum, which is how they are evaluated.
class ConfigFunctional {
 public:
  using Evaluator = std::function<double(std::span<const MarkedPoint>)>;

  static ConfigFunctional product(Observable g);
  /// G is taken to vanish on configurations with more than max_order points.
  static ConfigFunctional general(Evaluator g, int max_order);

  double operator()(std::span<const MarkedPoint> points) const;
  bool is_product() const { return static_cast<bool>(factor_); }
  const Observable& factor() const { return factor_; }
  int max_order() const { return max_order_; }

 private:
  Observable factor_;
  Evaluator general_;
  int max_order_ = -1;
};

/// Two-argument configuration functional G(xi, eta) for the Minlos identity.
class PairFunctional {
 public:
  using Evaluator = std::function<double(std::span<const MarkedPoint>, std::span<const MarkedPoint>)>;

  /// G(xi, eta) = prod_{xi} g * prod_{eta} h.
  static PairFunctional product(Observable g, Observable h);
  /// G vanishes whenever |xi| + |eta| > max_order.
  static PairFunctional general(Evaluator g, int max_order);

  double operator()(std::span<const MarkedPoint> xi, std::span<const MarkedPoint> eta) const;
  bool is_product() const { return static_cast<bool>(g_); }
  const Observable& first_factor() const { return g_; }
  const Observable& second_factor() const { return h_; }
  int max_order() const { return max_order_; }

 private:
  Observable g_;
  Observable h_;
  Evaluator general_;
  int max_order_ = -1;
};

struct LpIntegral {
  double value = 0.0;
  double last_term = 0.0;  // |n_max-th term|, a truncation diagnostic
};

/// Truncated Lebesgue-Poisson integral
///   G(empty) + sum_{n=1}^{n_max} (1/n!) int_{(window x [0, a_max])^n} G^(n)
/// on the tensor grid of spec (spatial nodes per axis x age nodes). The age
/// rule is split at age_breaks.
LpIntegral lp_integral(const ConfigFunctional& g, const Window& window, int n_max, const QuadratureSpec& spec,
                       std::span<const double> age_breaks = {});

struct MinlosResult {
  double lhs = 0.0;  // int sum_{xi subset eta} G(xi, eta \ xi) d lambda(eta)
  double rhs = 0.0;  // int int G(xi, eta) d lambda(xi) d lambda(eta)
};

/// Both sides truncated at total cardinality n_max on the same tensor grid.
/// The left side enumerates every subset of every quadrature tuple.
MinlosResult minlos_check(const PairFunctional& g, const Window& window, int n_max, const QuadratureSpec& spec);

}  // namespace agepop
