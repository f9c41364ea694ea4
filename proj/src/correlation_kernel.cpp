#include "agepop/correlation_kernel.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <stdexcept>

#include "agepop/lebesgue_poisson.hpp"

namespace agepop {

namespace {

std::vector<double> merged_breaks(std::vector<double> a, const std::vector<double>& b) {
  a.insert(a.end(), b.begin(), b.end());
  std::sort(a.begin(), a.end());
  a.erase(std::unique(a.begin(), a.end()), a.end());
  return a;
}

std::vector<Position> sup_grid(const Window& window, int per_axis) {
  if (per_axis < 1) throw std::invalid_argument("sup grid needs at least one point per axis");
  std::vector<Position> out;
  const auto coord = [&](int axis, int i) {
    return window.lower()[axis] + (window.upper()[axis] - window.lower()[axis]) * (i + 0.5) / per_axis;
  };
  for (int i = 0; i < per_axis; ++i) {
    if (window.dim() == 1) {
      out.push_back({coord(0, i), 0.0});
    } else {
      for (int j = 0; j < per_axis; ++j) out.push_back({coord(0, i), coord(1, j)});
    }
  }
  return out;
}

/// sup over location tuples of int |f(x_1, a_1, ..., x_n, a_n)| da.
double order_sup_norm(const CorrelationKernel::Evaluator& f, int n, double support, const std::vector<double>& breaks,
                      const Window& window, const NormGrid& grid) {
  if (n < 1) throw std::invalid_argument("kernel norms are defined for orders n >= 1");
  const auto xs = sup_grid(window, grid.x_points);
  const auto ages = age_nodes(0.0, support, breaks, grid.a_nodes, grid.max_panel);
  if (ages.empty()) return 0.0;

  std::size_t tuples = 1;
  for (int k = 0; k < n; ++k) tuples *= xs.size();
  std::vector<double> values(tuples, 0.0);
  const long count = static_cast<long>(tuples);
  const int threads = std::max(1, grid.workers);
#pragma omp parallel for num_threads(threads) schedule(dynamic) if (threads > 1)
  for (long t = 0; t < count; ++t) {
    std::vector<std::size_t> loc(n);
    std::size_t rem = static_cast<std::size_t>(t);
    for (int k = n - 1; k >= 0; --k) {
      loc[k] = rem % xs.size();
      rem /= xs.size();
    }
    std::vector<MarkedPoint> pts(n);
    for (int k = 0; k < n; ++k) pts[k].x = xs[loc[k]];
    values[t] = tensor_sum_serial(ages.size(), n, [&](std::span<const std::size_t> idx) {
      double w = 1.0;
      for (int k = 0; k < n; ++k) {
        pts[k].a = ages[idx[k]].a;
        w *= ages[idx[k]].w;
      }
      return w * std::abs(f(pts));
    });
  }
  return *std::max_element(values.begin(), values.end());
}

}  // namespace

CorrelationKernel::CorrelationKernel(Parts parts) : parts_(std::move(parts)) {
  if (!parts_.eval) throw std::invalid_argument("correlation kernel needs an evaluator");
  if (parts_.n_max < 0) throw std::invalid_argument("kernel n_max must be >= 0");
  if (!(parts_.epsilon >= 0.0 && parts_.epsilon < 1.0)) throw std::invalid_argument("epsilon must lie in [0, 1)");
  std::sort(parts_.age_breaks.begin(), parts_.age_breaks.end());
}

double CorrelationKernel::operator()(std::span<const MarkedPoint> points) const {
  if (points.empty()) return 1.0;
  if (static_cast<int>(points.size()) > parts_.n_max) {
    throw std::out_of_range("kernel '" + parts_.label + "' is defined up to order " + std::to_string(parts_.n_max));
  }
  return parts_.eval(points);
}

CorrelationKernel vacuum_kernel(int n_max) {
  CorrelationKernel::Parts p;
  p.eval = [](std::span<const MarkedPoint>) { return 0.0; };
  p.n_max = n_max;
  p.product = IntensityKernel::zero();
  p.label = "vacuum";
  return CorrelationKernel(std::move(p));
}

CorrelationKernel poisson_kernel(const IntensityKernel& rho, int n_max) {
  CorrelationKernel::Parts p;
  p.eval = [rho](std::span<const MarkedPoint> pts) {
    double v = 1.0;
    for (const auto& q : pts) v *= rho(q.x, q.a);
    return v;
  };
  p.n_max = n_max;
  p.kappa = rho.kappa();
  p.age_support = rho.support();
  p.age_breaks = rho.breaks();
  p.product = rho;
  p.label = "poisson(" + rho.label() + ")";
  return CorrelationKernel(std::move(p));
}

CorrelationKernel evolve_kernel(const CorrelationKernel& k0, const RateModel& rate, double t) {
  if (!(t >= 0.0)) throw std::invalid_argument("kernel evolution needs t >= 0");
  if (t == 0.0) return k0;
  CorrelationKernel::Parts p;
  p.eval = [k0, rate, t](std::span<const MarkedPoint> pts) {
    std::vector<MarkedPoint> shifted(pts.begin(), pts.end());
    double survival = 0.0;
    for (auto& q : shifted) {
      if (q.a < t) return 0.0;
      survival += rate.cumulative_hazard(q.x, q.a - t, q.a);
      q.a -= t;
    }
    return k0(shifted) * std::exp(-survival);
  };
  p.n_max = k0.n_max();
  p.epsilon = k0.epsilon();
  p.kappa = k0.kappa();
  p.age_support = k0.age_support() + t;
  p.age_breaks.push_back(t);
  for (double b : k0.age_breaks()) p.age_breaks.push_back(b + t);
  if (const auto* rho = k0.product_intensity()) p.product = rho->transported(rate, t);
  p.label = "evolved(" + k0.label() + ")";
  return CorrelationKernel(std::move(p));
}

CorrelationKernel solution_kernel(const CorrelationKernel& k0, const RateModel& rate, double t) {
  return convolve_kernels(evolve_kernel(k0, rate, t), poisson_kernel(rho_t(rate, t), k0.n_max()));
}

CorrelationKernel thin_kernel(const CorrelationKernel& k, const Observable& q) {
  CorrelationKernel::Parts p;
  p.eval = [k, q](std::span<const MarkedPoint> pts) {
    double v = k(pts);
    for (const auto& r : pts) v *= q(r.x, r.a);
    return v;
  };
  p.n_max = k.n_max();
  p.epsilon = k.epsilon();
  p.kappa = k.kappa();
  p.age_support = k.age_support();
  p.age_breaks = k.age_breaks();
  if (const auto* rho = k.product_intensity()) p.product = rho->thinned(q);
  p.label = "thinned(" + k.label() + ")";
  return CorrelationKernel(std::move(p));
}

CorrelationKernel convolve_kernels(const CorrelationKernel& k1, const CorrelationKernel& k2) {
  CorrelationKernel::Parts p;
  p.eval = [k1, k2](std::span<const MarkedPoint> pts) {
    const std::size_t n = pts.size();
    if (n >= 63) throw std::out_of_range("subset enumeration limited to 62 points");
    std::vector<MarkedPoint> xi, rest;
    xi.reserve(n);
    rest.reserve(n);
    double sum = 0.0;
    const std::uint64_t masks = std::uint64_t{1} << n;
    for (std::uint64_t mask = 0; mask < masks; ++mask) {
      xi.clear();
      rest.clear();
      for (std::size_t i = 0; i < n; ++i) ((mask >> i) & 1u ? xi : rest).push_back(pts[i]);
      sum += k1(rest) * k2(xi);
    }
    return sum;
  };
  p.n_max = std::min(k1.n_max(), k2.n_max());
  p.epsilon = std::max(k1.epsilon(), k2.epsilon());
  p.kappa = k1.kappa() + k2.kappa();
  p.age_support = std::max(k1.age_support(), k2.age_support());
  p.age_breaks = merged_breaks(k1.age_breaks(), k2.age_breaks());
  // The evaluator still enumerates subsets; the product form is kept only
  // for the norm shortcut and for downstream transports.
  if (k1.product_intensity() && k2.product_intensity()) p.product = *k1.product_intensity() + *k2.product_intensity();
  p.label = k1.label() + "*" + k2.label();
  return CorrelationKernel(std::move(p));
}

double kernel_norm(const CorrelationKernel& k, int n, const Window& window, const NormGrid& grid) {
  if (n > k.n_max()) throw std::out_of_range("kernel order not available");
  auto breaks = k.age_breaks();
  breaks.push_back(k.age_support());
  if (const auto* rho = k.product_intensity(); rho && n > 1) {
    // sup of a product over tuples is the product of the one-point sups.
    const double one = order_sup_norm([rho](std::span<const MarkedPoint> pts) { return (*rho)(pts[0].x, pts[0].a); },
                                      1, k.age_support(), breaks, window, grid);
    return std::pow(one, n);
  }
  return order_sup_norm([&k](std::span<const MarkedPoint> pts) { return k(pts); }, n, k.age_support(), breaks,
                        window, grid);
}

double kernel_gap_norm(const CorrelationKernel& k1, const CorrelationKernel& k2, int n, const Window& window,
                       const NormGrid& grid) {
  if (n > k1.n_max() || n > k2.n_max()) throw std::out_of_range("kernel order not available");
  auto breaks = merged_breaks(k1.age_breaks(), k2.age_breaks());
  breaks.push_back(k1.age_support());
  breaks.push_back(k2.age_support());
  const double support = std::max(k1.age_support(), k2.age_support());
  return order_sup_norm([&](std::span<const MarkedPoint> pts) { return k1(pts) - k2(pts); }, n, support, breaks,
                        window, grid);
}

double banach_norm(std::span<const double> order_norms, double epsilon, double kappa) {
  if (!(kappa > 0.0)) throw std::invalid_argument("banach norm needs kappa > 0");
  double sup = 0.0;
  double log_factorial = 0.0;
  for (std::size_t i = 0; i < order_norms.size(); ++i) {
    const double n = static_cast<double>(i + 1);
    log_factorial += std::log(n);
    sup = std::max(sup, order_norms[i] * std::exp(-epsilon * log_factorial - n * std::log(kappa)));
  }
  return sup;
}

double banach_norm(const CorrelationKernel& k, double epsilon, double kappa, int max_order, const Window& window,
                   const NormGrid& grid) {
  std::vector<double> norms;
  for (int n = 1; n <= std::min(max_order, k.n_max()); ++n) norms.push_back(kernel_norm(k, n, window, grid));
  return banach_norm(norms, epsilon, kappa);
}

double kernel_functional(const CorrelationKernel& k, const Observable& theta, const Window& window,
                         const QuadratureSpec& spec) {
  const int n_max = std::min(spec.n_max, k.n_max());
  const Window w = window.with_a_max(std::max(k.age_support(), window.a_max()));
  const auto& breaks = k.age_breaks();
  if (const auto* rho = k.product_intensity()) {
    const IntensityKernel r = *rho;
    return lp_integral(ConfigFunctional::product([r, theta](const Position& x, double a) { return r(x, a) * theta(x, a); }),
                       w, n_max, spec, breaks)
        .value;
  }
  return lp_integral(ConfigFunctional::general(
                         [&k, theta](std::span<const MarkedPoint> pts) {
                           double v = k(pts);
                           for (const auto& q : pts) v *= theta(q.x, q.a);
                           return v;
                         },
                         n_max),
                     w, n_max, spec, breaks)
      .value;
}

}  // namespace agepop
