#include "agepop/quadrature.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <memory>
#include <mutex>
#include <numbers>
#include <stdexcept>

#include <omp.h>

namespace agepop {

namespace {

GaussLegendreRule build_rule(int n) {
  GaussLegendreRule rule;
  rule.nodes.resize(n);
  rule.weights.resize(n);
  const int half = (n + 1) / 2;
  for (int i = 0; i < half; ++i) {
    double z = std::cos(std::numbers::pi * (i + 0.75) / (n + 0.5));
    double dp = 0.0;
    for (int iter = 0; iter < 100; ++iter) {
      double p0 = 1.0;
      double p1 = z;
      for (int k = 2; k <= n; ++k) {
        const double pk = ((2.0 * k - 1.0) * z * p1 - (k - 1.0) * p0) / k;
        p0 = p1;
        p1 = pk;
      }
      dp = n * (z * p1 - p0) / (z * z - 1.0);
      const double step = p1 / dp;
      z -= step;
      if (std::abs(step) < 1e-16) break;
    }
    // Recompute the derivative at the converged node.
    double p0 = 1.0;
    double p1 = z;
    for (int k = 2; k <= n; ++k) {
      const double pk = ((2.0 * k - 1.0) * z * p1 - (k - 1.0) * p0) / k;
      p0 = p1;
      p1 = pk;
    }
    dp = n * (z * p1 - p0) / (z * z - 1.0);
    const double w = 2.0 / ((1.0 - z * z) * dp * dp);
    rule.nodes[i] = -z;
    rule.nodes[n - 1 - i] = z;
    rule.weights[i] = w;
    rule.weights[n - 1 - i] = w;
  }
  if (n % 2 == 1) rule.nodes[n / 2] = 0.0;
  return rule;
}

double blocked_sum(const double* p, std::size_t n) {
  if (n <= 8) {
    double s = 0.0;
    for (std::size_t i = 0; i < n; ++i) s += p[i];
    return s;
  }
  const std::size_t half = n / 2;
  return blocked_sum(p, half) + blocked_sum(p + half, n - half);
}

}  // namespace

const GaussLegendreRule& gauss_legendre(int n) {
  if (n < 1) throw std::invalid_argument("Gauss-Legendre rule needs at least one node");
  static std::mutex mutex;
  static std::map<int, std::unique_ptr<GaussLegendreRule>> cache;
  std::lock_guard lock(mutex);
  auto& slot = cache[n];
  if (!slot) {
    if (n == 1) {
      slot = std::make_unique<GaussLegendreRule>(GaussLegendreRule{{0.0}, {2.0}});
    } else {
      slot = std::make_unique<GaussLegendreRule>(build_rule(n));
    }
  }
  return *slot;
}

void QuadratureSpec::validate() const {
  if (x_nodes < 2 || a_nodes < 2) {
    throw std::invalid_argument("quadrature grids need at least 2 nodes per axis");
  }
  if (n_max < 0) throw std::invalid_argument("n_max must be nonnegative");
  if (!(max_panel > 0.0)) throw std::invalid_argument("max_panel must be positive");
}

std::vector<SpatialNode> spatial_nodes(const Window& window, int per_axis) {
  if (per_axis < 2) throw std::invalid_argument("quadrature grids need at least 2 nodes per axis");
  const auto& rule = gauss_legendre(per_axis);
  const auto map = [&](int axis, int i) {
    const double half = 0.5 * (window.upper()[axis] - window.lower()[axis]);
    const double mid = 0.5 * (window.upper()[axis] + window.lower()[axis]);
    return std::pair{mid + half * rule.nodes[i], half * rule.weights[i]};
  };
  std::vector<SpatialNode> out;
  if (window.dim() == 1) {
    out.reserve(per_axis);
    for (int i = 0; i < per_axis; ++i) {
      auto [x, w] = map(0, i);
      out.push_back({{x, 0.0}, w});
    }
  } else {
    out.reserve(static_cast<std::size_t>(per_axis) * per_axis);
    for (int i = 0; i < per_axis; ++i) {
      for (int j = 0; j < per_axis; ++j) {
        auto [x0, w0] = map(0, i);
        auto [x1, w1] = map(1, j);
        out.push_back({{x0, x1}, w0 * w1});
      }
    }
  }
  return out;
}

std::vector<AgeNode> age_nodes(double lo, double hi, std::span<const double> breaks, int per_panel,
                               double max_panel) {
  std::vector<AgeNode> out;
  if (!(hi > lo)) return out;
  std::vector<double> cuts{lo};
  for (double b : breaks) {
    if (b > lo && b < hi) cuts.push_back(b);
  }
  cuts.push_back(hi);
  std::sort(cuts.begin(), cuts.end());
  cuts.erase(std::unique(cuts.begin(), cuts.end()), cuts.end());

  const auto& rule = gauss_legendre(per_panel);
  for (std::size_t c = 0; c + 1 < cuts.size(); ++c) {
    const double len = cuts[c + 1] - cuts[c];
    const int pieces = std::max(1, static_cast<int>(std::ceil(len / max_panel)));
    for (int p = 0; p < pieces; ++p) {
      const double a0 = cuts[c] + len * p / pieces;
      const double a1 = p + 1 == pieces ? cuts[c + 1] : cuts[c] + len * (p + 1) / pieces;
      const double half = 0.5 * (a1 - a0);
      const double mid = 0.5 * (a1 + a0);
      for (int i = 0; i < per_panel; ++i) out.push_back({mid + half * rule.nodes[i], half * rule.weights[i]});
    }
  }
  return out;
}

double pairwise_sum(std::span<const double> terms) { return blocked_sum(terms.data(), terms.size()); }

double integrate_window(const Window& window, const QuadratureSpec& spec, const SpatialFunction& f) {
  const auto nodes = spatial_nodes(window, spec.x_nodes);
  std::vector<double> values(nodes.size());
  const long n = static_cast<long>(nodes.size());
  const int threads = std::max(1, spec.workers);
#pragma omp parallel for num_threads(threads) schedule(static) if (threads > 1)
  for (long i = 0; i < n; ++i) values[i] = nodes[i].w * f(nodes[i].x);
  return pairwise_sum(values);
}

double integrate_window_serial(const Window& window, const QuadratureSpec& spec, const SpatialFunction& f) {
  const auto nodes = spatial_nodes(window, spec.x_nodes);
  std::vector<double> values(nodes.size());
  for (std::size_t i = 0; i < nodes.size(); ++i) values[i] = nodes[i].w * f(nodes[i].x);
  return pairwise_sum(values);
}

double integrate_age(const std::function<double(double)>& f, double lo, double hi, std::span<const double> breaks,
                     const QuadratureSpec& spec) {
  const auto nodes = age_nodes(lo, hi, breaks, spec.a_nodes, spec.max_panel);
  std::vector<double> values(nodes.size());
  for (std::size_t i = 0; i < nodes.size(); ++i) values[i] = nodes[i].w * f(nodes[i].a);
  return pairwise_sum(values);
}

double integrate_window_age(const Window& window, const QuadratureSpec& spec, double lo, double hi,
                            std::span<const double> breaks, const Observable& f) {
  if (!(hi > lo)) return 0.0;
  const auto ages = age_nodes(lo, hi, breaks, spec.a_nodes, spec.max_panel);
  return integrate_window(window, spec, [&](const Position& x) {
    std::vector<double> values(ages.size());
    for (std::size_t i = 0; i < ages.size(); ++i) values[i] = ages[i].w * f(x, ages[i].a);
    return pairwise_sum(values);
  });
}

namespace {

double tensor_block(std::size_t first, std::size_t nodes, int order,
                    const std::function<double(std::span<const std::size_t>)>& term) {
  std::vector<std::size_t> idx(order, 0);
  idx[0] = first;
  if (order == 1) return term(idx);
  std::vector<double> values;
  std::size_t count = 1;
  for (int k = 1; k < order; ++k) count *= nodes;
  values.reserve(count);
  for (;;) {
    values.push_back(term(idx));
    int k = order - 1;
    while (k >= 1 && ++idx[k] == nodes) idx[k--] = 0;
    if (k < 1) break;
  }
  return pairwise_sum(values);
}

}  // namespace

double tensor_sum(std::size_t nodes, int order,
                  const std::function<double(std::span<const std::size_t>)>& term, int workers) {
  if (order < 0) throw std::invalid_argument("tensor order must be nonnegative");
  if (order == 0) return term({});
  std::vector<double> partial(nodes);
  const long n = static_cast<long>(nodes);
  const int threads = std::max(1, workers);
#pragma omp parallel for num_threads(threads) schedule(dynamic) if (threads > 1)
  for (long i = 0; i < n; ++i) partial[i] = tensor_block(static_cast<std::size_t>(i), nodes, order, term);
  return pairwise_sum(partial);
}

double tensor_sum_serial(std::size_t nodes, int order,
                         const std::function<double(std::span<const std::size_t>)>& term) {
  if (order < 0) throw std::invalid_argument("tensor order must be nonnegative");
  if (order == 0) return term({});
  std::vector<double> partial(nodes);
  for (std::size_t i = 0; i < nodes; ++i) partial[i] = tensor_block(i, nodes, order, term);
  return pairwise_sum(partial);
}

}  // namespace agepop
