#include "agepop/rate_model.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>
#include <stdexcept>

namespace agepop {

namespace {

constexpr double kHazardTol = 1e-12;

void require_nonnegative(double v, const char* what) {
  if (!(v >= 0.0) || !std::isfinite(v)) throw std::invalid_argument(std::string(what) + " must be finite and >= 0");
}

double simpson_step(const std::function<double(double)>& f, double a, double fa, double b, double fb, double m,
                    double fm, double whole, double tol, int depth) {
  const double lm = 0.5 * (a + m);
  const double rm = 0.5 * (m + b);
  const double flm = f(lm);
  const double frm = f(rm);
  const double left = (m - a) / 6.0 * (fa + 4.0 * flm + fm);
  const double right = (b - m) / 6.0 * (fm + 4.0 * frm + fb);
  const double delta = left + right - whole;
  if (depth <= 0 || std::abs(delta) <= 15.0 * tol) return left + right + delta / 15.0;
  return simpson_step(f, a, fa, m, fm, lm, flm, left, 0.5 * tol, depth - 1) +
         simpson_step(f, m, fm, b, fb, rm, frm, right, 0.5 * tol, depth - 1);
}

}  // namespace

std::string to_string(RateKind kind) {
  switch (kind) {
    case RateKind::constant:
      return "constant";
    case RateKind::separable_exponential:
      return "separable-exponential";
    case RateKind::tabulated:
      return "tabulated";
  }
  return "unknown";
}

double adaptive_simpson(const std::function<double(double)>& f, double lo, double hi, double abs_tol) {
  if (hi == lo) return 0.0;
  const double fa = f(lo);
  const double fb = f(hi);
  const double mid = 0.5 * (lo + hi);
  const double fm = f(mid);
  const double whole = (hi - lo) / 6.0 * (fa + 4.0 * fm + fb);
  return simpson_step(f, lo, fa, hi, fb, mid, fm, whole, abs_tol, 50);
}

RateModel RateModel::constant(double b, double m) {
  require_nonnegative(b, "immigration rate b");
  require_nonnegative(m, "emigration rate m");
  return RateModel(ConstantRates{b, m}, RateBounds{b, m, m}, 1);
}

RateModel RateModel::separable_exponential(const SeparableExponentialRates& p, int dim) {
  require_nonnegative(p.b0, "b0");
  require_nonnegative(p.b_decay, "b_decay");
  require_nonnegative(p.m0, "m0");
  require_nonnegative(p.m_inf, "m_inf");
  require_nonnegative(p.m_decay, "m_decay");
  require_nonnegative(p.m_spatial, "m_spatial");
  if (dim != 1 && dim != 2) throw std::invalid_argument("spatial dimension must be 1 or 2");
  SeparableExponentialRates q = p;
  if (dim == 1) q.center[1] = 0.0;
  // The age profile is monotone between m0 and m_inf; the spatial factor lies in (1, 1 + m_spatial].
  const double lo = p.m_decay > 0.0 ? std::min(p.m0, p.m_inf) : p.m0;
  const double hi = p.m_decay > 0.0 ? std::max(p.m0, p.m_inf) : p.m0;
  return RateModel(q, RateBounds{p.b0, (1.0 + p.m_spatial) * hi, lo}, dim);
}

RateModel RateModel::tabulated(TabulatedRates t, const RateBounds& declared) {
  if (t.dim != 1 && t.dim != 2) throw std::invalid_argument("spatial dimension must be 1 or 2");
  if (t.x_nodes < 1) throw std::invalid_argument("tabulated rates need at least one spatial node");
  const std::size_t spatial = t.dim == 1 ? t.x_nodes : static_cast<std::size_t>(t.x_nodes) * t.x_nodes;
  if (t.b.size() != spatial) {
    throw std::invalid_argument("b table has " + std::to_string(t.b.size()) + " entries, expected " +
                                std::to_string(spatial));
  }
  if (t.m.empty() || t.m.size() % spatial != 0) {
    throw std::invalid_argument("m table size must be a positive multiple of the spatial node count");
  }
  if (!(t.a_step > 0.0)) throw std::invalid_argument("a_step must be positive");
  for (int k = 0; k < t.dim; ++k) {
    if (!(t.lower[k] <= t.upper[k])) throw std::invalid_argument("tabulated grid corners out of order");
  }
  for (double v : t.b) require_nonnegative(v, "b table entry");
  for (double v : t.m) require_nonnegative(v, "m table entry");
  if (t.dim == 1) {
    t.lower[1] = 0.0;
    t.upper[1] = 0.0;
  }
  const int dim = t.dim;
  return RateModel(std::move(t), RateBounds{}, dim).with_declared_bounds(declared);
}

RateModel RateModel::with_declared_bounds(const RateBounds& declared) const {
  require_nonnegative(declared.b_star, "b_star");
  require_nonnegative(declared.m_star_up, "m_star_up");
  require_nonnegative(declared.m_star_lo, "m_star_lo");
  if (declared.m_star_lo > declared.m_star_up) throw std::invalid_argument("m_star_lo exceeds m_star_up");

  double b_max = 0.0;
  double m_min = 0.0;
  double m_max = 0.0;
  if (const auto* t = std::get_if<TabulatedRates>(&params_)) {
    b_max = *std::max_element(t->b.begin(), t->b.end());
    m_min = *std::min_element(t->m.begin(), t->m.end());
    m_max = *std::max_element(t->m.begin(), t->m.end());
  } else {
    b_max = bounds_.b_star;
    m_min = bounds_.m_star_lo;
    m_max = bounds_.m_star_up;
  }
  if (declared.b_star < b_max) throw std::invalid_argument("declared b_star is below the model's maximum of b");
  if (declared.m_star_up < m_max) throw std::invalid_argument("declared m_star_up is below the model's maximum of m");
  if (declared.m_star_lo > m_min) throw std::invalid_argument("declared m_star_lo exceeds the model's minimum of m");
  RateModel out = *this;
  out.bounds_ = declared;
  return out;
}

RateKind RateModel::kind() const {
  switch (params_.index()) {
    case 0:
      return RateKind::constant;
    case 1:
      return RateKind::separable_exponential;
    default:
      return RateKind::tabulated;
  }
}

std::size_t RateModel::nearest_node(const TabulatedRates& t, const Position& x) const {
  const auto axis_index = [&](int k) -> std::size_t {
    if (t.x_nodes == 1) return 0;
    const double h = (t.upper[k] - t.lower[k]) / (t.x_nodes - 1);
    if (!(h > 0.0)) return 0;
    const double r = std::round((x[k] - t.lower[k]) / h);
    return static_cast<std::size_t>(std::clamp(r, 0.0, static_cast<double>(t.x_nodes - 1)));
  };
  if (t.dim == 1) return axis_index(0);
  return axis_index(0) * t.x_nodes + axis_index(1);
}

double RateModel::tabulated_m(const TabulatedRates& t, std::size_t node, double a) const {
  const std::size_t spatial = t.b.size();
  const std::size_t count = t.m.size() / spatial;
  const double* row = t.m.data() + node * count;
  if (a <= 0.0) return row[0];
  const double s = a / t.a_step;
  const std::size_t i = static_cast<std::size_t>(s);
  if (i + 1 >= count) return row[count - 1];
  const double frac = s - static_cast<double>(i);
  return row[i] + frac * (row[i + 1] - row[i]);
}

double RateModel::b(const Position& x) const {
  return std::visit(
      [&](const auto& p) -> double {
        using T = std::decay_t<decltype(p)>;
        if constexpr (std::is_same_v<T, ConstantRates>) {
          return p.b;
        } else if constexpr (std::is_same_v<T, SeparableExponentialRates>) {
          return p.b0 * std::exp(-p.b_decay * distance(x, p.center, dim_));
        } else {
          return p.b[nearest_node(p, x)];
        }
      },
      params_);
}

double RateModel::m(const Position& x, double a) const {
  return std::visit(
      [&](const auto& p) -> double {
        using T = std::decay_t<decltype(p)>;
        if constexpr (std::is_same_v<T, ConstantRates>) {
          return p.m;
        } else if constexpr (std::is_same_v<T, SeparableExponentialRates>) {
          const double u = 1.0 + p.m_spatial * std::exp(-distance(x, p.center, dim_));
          return u * (p.m_inf + (p.m0 - p.m_inf) * std::exp(-p.m_decay * a));
        } else {
          return tabulated_m(p, nearest_node(p, x), a);
        }
      },
      params_);
}

double RateModel::cumulative_hazard(const Position& x, double a0, double a1) const {
  if (a1 < a0) throw std::invalid_argument("cumulative hazard needs a0 <= a1");
  if (a1 == a0) return 0.0;
  return std::visit(
      [&](const auto& p) -> double {
        using T = std::decay_t<decltype(p)>;
        const double span = a1 - a0;
        if constexpr (std::is_same_v<T, ConstantRates>) {
          return p.m * span;
        } else if constexpr (std::is_same_v<T, SeparableExponentialRates>) {
          const double u = 1.0 + p.m_spatial * std::exp(-distance(x, p.center, dim_));
          if (p.m_decay == 0.0) return u * p.m0 * span;
          // int e^{-r a} over [a0, a1] = e^{-r a0} (1 - e^{-r span}) / r
          const double decay = -std::exp(-p.m_decay * a0) * std::expm1(-p.m_decay * span) / p.m_decay;
          return u * (p.m_inf * span + (p.m0 - p.m_inf) * decay);
        } else {
          // Simpson on each linear piece between table nodes.
          const std::size_t node = nearest_node(p, x);
          const auto f = [&](double a) { return tabulated_m(p, node, a); };
          double total = 0.0;
          double lo = a0;
          while (lo < a1) {
            const double next_node = (std::floor(lo / p.a_step) + 1.0) * p.a_step;
            const double hi = std::min(a1, next_node);
            total += adaptive_simpson(f, lo, hi, kHazardTol);
            if (hi <= lo) break;
            lo = hi;
          }
          return total;
        }
      },
      params_);
}

double RateModel::survival(const Position& x, double a0, double a1) const {
  return std::exp(-cumulative_hazard(x, a0, a1));
}

std::string RateModel::fingerprint() const {
  std::ostringstream os;
  os.precision(17);
  os << to_string(kind()) << '[';
  std::visit(
      [&](const auto& p) {
        using T = std::decay_t<decltype(p)>;
        if constexpr (std::is_same_v<T, ConstantRates>) {
          os << "b=" << p.b << ";m=" << p.m;
        } else if constexpr (std::is_same_v<T, SeparableExponentialRates>) {
          os << "b0=" << p.b0 << ";b_decay=" << p.b_decay << ";m0=" << p.m0 << ";m_inf=" << p.m_inf
             << ";m_decay=" << p.m_decay << ";m_spatial=" << p.m_spatial;
        } else {
          os << "x_nodes=" << p.x_nodes << ";a_step=" << p.a_step << ";cells=" << p.m.size();
        }
      },
      params_);
  os << ";b*=" << bounds_.b_star << ";m*=" << bounds_.m_star_up << ";m_*=" << bounds_.m_star_lo << ']';
  return os.str();
}

}  // namespace agepop
