#pragma once

#include "agepop/types.hpp"

namespace agepop {

/// Strictly positive, bounded, integrable weight psi on X. The integral and
/// the upper bound are declared by the constructor of the weight.
class TemperingWeight {
 public:
  TemperingWeight(SpatialFunction psi, double integral, double upper_bound, std::string label);

  /// psi(x) = exp(-|x|).
  static TemperingWeight exponential(int dim);

  double operator()(const Position& x) const { return psi_(x); }
  double integral() const { return integral_; }
  double upper_bound() const { return upper_bound_; }
  const std::string& label() const { return label_; }

 private:
  SpatialFunction psi_;
  double integral_;
  double upper_bound_;
  std::string label_;
};

/// Psi(config) = sum of psi over the locations of the configuration.
double tempering(const FiniteConfiguration& config, const TemperingWeight& weight);

}  // namespace agepop
