#pragma once

#include <cstddef>
#include <functional>
#include <span>
#include <vector>

#include "agepop/types.hpp"

namespace agepop {

/// Gauss-Legendre nodes and weights on [-1, 1].
struct GaussLegendreRule {
  std::vector<double> nodes;
  std::vector<double> weights;
};

/// Cached n-point rule; n >= 1.
const GaussLegendreRule& gauss_legendre(int n);

/// Resolution of the tensor-product grids used by every integral of the
/// analytic engine.
struct QuadratureSpec {
  int x_nodes = 32;          // per spatial axis
  int a_nodes = 64;          // per age panel
  int n_max = 12;            // Lebesgue-Poisson series truncation
  double max_panel = 40.0;   // longest age panel before it is subdivided
  int workers = 1;           // OpenMP threads for the outer spatial loop

  /// Throws std::invalid_argument on grids with fewer than 2 nodes per axis.
  void validate() const;
};

struct SpatialNode {
  Position x;
  double w;
};

struct AgeNode {
  double a;
  double w;
};

std::vector<SpatialNode> spatial_nodes(const Window& window, int per_axis);

/// Composite rule on [lo, hi]: one panel per interval between consecutive
/// breaks, each further split so that no panel exceeds max_panel.
std::vector<AgeNode> age_nodes(double lo, double hi, std::span<const double> breaks, int per_panel,
                               double max_panel);

/// Sum in a fixed binary-tree order, independent of how the terms were produced.
double pairwise_sum(std::span<const double> terms);

/// Integral of f over the window. Node values are evaluated on up to
/// spec.workers threads and reduced with pairwise_sum in node order, so the
/// result does not depend on the thread count.
double integrate_window(const Window& window, const QuadratureSpec& spec, const SpatialFunction& f);

/// Single-threaded reference for integrate_window.
double integrate_window_serial(const Window& window, const QuadratureSpec& spec, const SpatialFunction& f);

double integrate_age(const std::function<double(double)>& f, double lo, double hi, std::span<const double> breaks,
                     const QuadratureSpec& spec);

/// Double integral over window x [lo, hi] with the age rule split at breaks.
double integrate_window_age(const Window& window, const QuadratureSpec& spec, double lo, double hi,
                            std::span<const double> breaks, const Observable& f);

/// Sum of term(i_1, ..., i_order) over all index tuples in [0, nodes)^order.
/// The outermost index is distributed across threads; partial sums are
/// reduced in index order.
double tensor_sum(std::size_t nodes, int order,
                  const std::function<double(std::span<const std::size_t>)>& term, int workers);

double tensor_sum_serial(std::size_t nodes, int order,
                         const std::function<double(std::span<const std::size_t>)>& term);

}  // namespace agepop
