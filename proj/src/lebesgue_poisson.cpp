#include "agepop/lebesgue_poisson.hpp"

#include <bit>
#include <cmath>
#include <cstdint>
#include <stdexcept>

namespace agepop {

namespace {

constexpr double kMaxTensorTuples = 5e8;

struct PointGrid {
  std::vector<MarkedPoint> points;
  std::vector<double> weights;
};

PointGrid point_grid(const Window& window, const QuadratureSpec& spec, std::span<const double> breaks = {}) {
  const auto xs = spatial_nodes(window, spec.x_nodes);
  const auto as = age_nodes(0.0, window.a_max(), breaks, spec.a_nodes, spec.max_panel);
  PointGrid grid;
  grid.points.reserve(xs.size() * as.size());
  for (const auto& x : xs) {
    for (const auto& a : as) {
      grid.points.push_back({x.x, a.a});
      grid.weights.push_back(x.w * a.w);
    }
  }
  return grid;
}

double one_point_sum(const PointGrid& grid, const Observable& g) {
  std::vector<double> v(grid.points.size());
  for (std::size_t i = 0; i < v.size(); ++i) v[i] = grid.weights[i] * g(grid.points[i].x, grid.points[i].a);
  return pairwise_sum(v);
}

void check_tensor_size(std::size_t nodes, int order) {
  if (std::pow(static_cast<double>(nodes), order) > kMaxTensorTuples) {
    throw std::invalid_argument("tensor quadrature of order " + std::to_string(order) + " on " +
                                std::to_string(nodes) + " nodes per point is too large; coarsen the grid");
  }
}

void check_n_max(int n_max) {
  if (n_max < 0) throw std::invalid_argument("n_max must be nonnegative");
}

}  // namespace

ConfigFunctional ConfigFunctional::product(Observable g) {
  if (!g) throw std::invalid_argument("product functional needs a factor");
  ConfigFunctional f;
  f.factor_ = std::move(g);
  return f;
}

ConfigFunctional ConfigFunctional::general(Evaluator g, int max_order) {
  if (!g) throw std::invalid_argument("general functional needs an evaluator");
  if (max_order < 0) throw std::invalid_argument("max_order must be nonnegative");
  ConfigFunctional f;
  f.general_ = std::move(g);
  f.max_order_ = max_order;
  return f;
}

double ConfigFunctional::operator()(std::span<const MarkedPoint> points) const {
  if (factor_) {
    double p = 1.0;
    for (const auto& q : points) p *= factor_(q.x, q.a);
    return p;
  }
  if (static_cast<int>(points.size()) > max_order_) return 0.0;
  return general_(points);
}

PairFunctional PairFunctional::product(Observable g, Observable h) {
  if (!g || !h) throw std::invalid_argument("product pair functional needs two factors");
  PairFunctional f;
  f.g_ = std::move(g);
  f.h_ = std::move(h);
  return f;
}

PairFunctional PairFunctional::general(Evaluator g, int max_order) {
  if (!g) throw std::invalid_argument("general pair functional needs an evaluator");
  if (max_order < 0) throw std::invalid_argument("max_order must be nonnegative");
  PairFunctional f;
  f.general_ = std::move(g);
  f.max_order_ = max_order;
  return f;
}

double PairFunctional::operator()(std::span<const MarkedPoint> xi, std::span<const MarkedPoint> eta) const {
  if (g_) {
    double p = 1.0;
    for (const auto& q : xi) p *= g_(q.x, q.a);
    for (const auto& q : eta) p *= h_(q.x, q.a);
    return p;
  }
  if (static_cast<int>(xi.size() + eta.size()) > max_order_) return 0.0;
  return general_(xi, eta);
}

LpIntegral lp_integral(const ConfigFunctional& g, const Window& window, int n_max, const QuadratureSpec& spec,
                       std::span<const double> age_breaks) {
  check_n_max(n_max);
  spec.validate();
  const PointGrid grid = point_grid(window, spec, age_breaks);

  std::vector<double> terms(n_max + 1, 0.0);
  if (g.is_product()) {
    const double s = one_point_sum(grid, g.factor());
    terms[0] = 1.0;
    for (int n = 1; n <= n_max; ++n) terms[n] = terms[n - 1] * s / n;
  } else {
    double factorial = 1.0;
    for (int n = 0; n <= std::min(n_max, g.max_order()); ++n) {
      if (n > 0) factorial *= n;
      check_tensor_size(grid.points.size(), n);
      const double sum = tensor_sum(
          grid.points.size(), n,
          [&](std::span<const std::size_t> idx) {
            std::vector<MarkedPoint> pts(idx.size());
            double w = 1.0;
            for (std::size_t k = 0; k < idx.size(); ++k) {
              pts[k] = grid.points[idx[k]];
              w *= grid.weights[idx[k]];
            }
            return w * g(pts);
          },
          spec.workers);
      terms[n] = sum / factorial;
    }
  }
  LpIntegral out;
  for (double t : terms) out.value += t;
  out.last_term = std::abs(terms[n_max]);
  return out;
}

MinlosResult minlos_check(const PairFunctional& g, const Window& window, int n_max, const QuadratureSpec& spec) {
  check_n_max(n_max);
  spec.validate();
  const PointGrid grid = point_grid(window, spec);
  MinlosResult out;

  if (g.is_product()) {
    const double sg = one_point_sum(grid, g.first_factor());
    const double sh = one_point_sum(grid, g.second_factor());
    std::vector<double> pg(n_max + 1, 1.0), ph(n_max + 1, 1.0);
    for (int k = 1; k <= n_max; ++k) {
      pg[k] = pg[k - 1] * sg;
      ph[k] = ph[k - 1] * sh;
    }
    double factorial = 1.0;
    for (int n = 0; n <= n_max; ++n) {
      if (n > 0) factorial *= n;
      // Every subset xi of an n-point tuple contributes sg^|xi| sh^(n-|xi|).
      double subset_sum = 0.0;
      const std::uint64_t masks = std::uint64_t{1} << n;
      for (std::uint64_t mask = 0; mask < masks; ++mask) {
        const int k = std::popcount(mask);
        subset_sum += pg[k] * ph[n - k];
      }
      out.lhs += subset_sum / factorial;
    }
    double fj = 1.0;
    for (int j = 0; j <= n_max; ++j) {
      if (j > 0) fj *= j;
      double fk = 1.0;
      for (int k = 0; j + k <= n_max; ++k) {
        if (k > 0) fk *= k;
        out.rhs += (pg[j] / fj) * (ph[k] / fk);
      }
    }
    return out;
  }

  const int top = std::min(n_max, g.max_order());
  const std::size_t nodes = grid.points.size();
  double factorial = 1.0;
  for (int n = 0; n <= top; ++n) {
    if (n > 0) factorial *= n;
    check_tensor_size(nodes, n);
    const double sum = tensor_sum(
        nodes, n,
        [&](std::span<const std::size_t> idx) {
          const int len = static_cast<int>(idx.size());
          std::vector<MarkedPoint> pts(len);
          double w = 1.0;
          for (int k = 0; k < len; ++k) {
            pts[k] = grid.points[idx[k]];
            w *= grid.weights[idx[k]];
          }
          std::vector<MarkedPoint> xi, rest;
          double subsets = 0.0;
          for (std::uint32_t mask = 0; mask < (1u << len); ++mask) {
            xi.clear();
            rest.clear();
            for (int k = 0; k < len; ++k) ((mask >> k) & 1u ? xi : rest).push_back(pts[k]);
            subsets += g(xi, rest);
          }
          return w * subsets;
        },
        spec.workers);
    out.lhs += sum / factorial;
  }

  double fj = 1.0;
  for (int j = 0; j <= top; ++j) {
    if (j > 0) fj *= j;
    double fk = 1.0;
    for (int k = 0; j + k <= top; ++k) {
      if (k > 0) fk *= k;
      check_tensor_size(nodes, j + k);
      const double sum = tensor_sum(
          nodes, j + k,
          [&](std::span<const std::size_t> idx) {
            std::vector<MarkedPoint> xi(j), eta(k);
            double w = 1.0;
            for (int q = 0; q < j + k; ++q) {
              (q < j ? xi[q] : eta[q - j]) = grid.points[idx[q]];
              w *= grid.weights[idx[q]];
            }
            return w * g(xi, eta);
          },
          spec.workers);
      out.rhs += sum / (fj * fk);
    }
  }
  return out;
}

}  // namespace agepop
