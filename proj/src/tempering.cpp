#include "agepop/tempering.hpp"

#include <cmath>
#include <numbers>
#include <stdexcept>

namespace agepop {

TemperingWeight::TemperingWeight(SpatialFunction psi, double integral, double upper_bound, std::string label)
    : psi_(std::move(psi)), integral_(integral), upper_bound_(upper_bound), label_(std::move(label)) {
  if (!psi_) throw std::invalid_argument("tempering weight needs an evaluator");
  if (!(integral > 0.0) || !std::isfinite(integral)) {
    throw std::invalid_argument("tempering weight must have a finite positive integral");
  }
  if (!(upper_bound > 0.0) || !std::isfinite(upper_bound)) {
    throw std::invalid_argument("tempering weight must have a finite positive upper bound");
  }
}

TemperingWeight TemperingWeight::exponential(int dim) {
  if (dim != 1 && dim != 2) throw std::invalid_argument("spatial dimension must be 1 or 2");
  // Integral of exp(-|x|) over R (=2) and over R^2 (=2 pi).
  const double integral = dim == 1 ? 2.0 : 2.0 * std::numbers::pi;
  return TemperingWeight([dim](const Position& x) { return std::exp(-norm(x, dim)); }, integral, 1.0,
                         "exp(-|x|)");
}

double tempering(const FiniteConfiguration& config, const TemperingWeight& weight) {
  double sum = 0.0;
  for (const auto& p : config.points()) sum += weight(p.x);
  return sum;
}

}  // namespace agepop
