#include "agepop/experiments.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <sstream>
#include <stdexcept>

#include <boost/math/distributions/chi_squared.hpp>
#include <spdlog/spdlog.h>

#include "agepop/bounds.hpp"
#include "agepop/estimators.hpp"
#include "agepop/lebesgue_poisson.hpp"
#include "agepop/sampler.hpp"

namespace agepop {

namespace {

template <class... Ts>
struct overloaded : Ts... {
  using Ts::operator()...;
};
template <class... Ts>
overloaded(Ts...) -> overloaded<Ts...>;

class Stopwatch {
 public:
  double seconds() const {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - start_).count();
  }

 private:
  std::chrono::steady_clock::time_point start_ = std::chrono::steady_clock::now();
};

std::string time_label(double t) { return format_real(t); }

// Distinct batches get distinct master seeds derived from the configured one.
RngSpec derived_rng(std::uint64_t seed, std::uint64_t tag) { return RngSpec{mix64(seed ^ mix64(tag + 1))}; }

QuadratureSpec with_workers(QuadratureSpec spec, int workers) {
  spec.workers = std::max(1, workers);
  return spec;
}

double relative_error(double value, double reference) {
  const double scale = std::max(std::abs(reference), 1e-300);
  return std::abs(value - reference) / scale;
}

// |z| with standard error floored at the resolution of the estimator, so a
// zero-variance estimate that misses the reference is not reported as 0.
double z_score(double estimate, double reference, double se, double floor) {
  const double diff = std::abs(estimate - reference);
  if (diff == 0.0) return 0.0;
  return diff / std::max(se, floor);
}

Position window_point(const Window& w, double u, double v) {
  Position p{};
  p[0] = w.lower()[0] + u * (w.upper()[0] - w.lower()[0]);
  if (w.dim() == 2) p[1] = w.lower()[1] + v * (w.upper()[1] - w.lower()[1]);
  return p;
}

}  // namespace

Derivative fpe_derivative(const std::function<double(double)>& f, double t, double h, double tol) {
  if (!(h > 0.0)) throw std::invalid_argument("finite-difference step must be positive");
  const auto estimate = [&](double step) -> std::pair<double, double> {
    if (t >= 2.0 * step) {
      const double fm2 = f(t - 2.0 * step), fm1 = f(t - step), fp1 = f(t + step), fp2 = f(t + 2.0 * step);
      return {(fm2 - 8.0 * fm1 + 8.0 * fp1 - fp2) / (12.0 * step), (fp1 - fm1) / (2.0 * step)};
    }
    const double f0 = f(t), f1 = f(t + step), f2 = f(t + 2.0 * step), f3 = f(t + 3.0 * step), f4 = f(t + 4.0 * step);
    return {(-25.0 * f0 + 48.0 * f1 - 36.0 * f2 + 16.0 * f3 - 3.0 * f4) / (12.0 * step),
            (-3.0 * f0 + 4.0 * f1 - f2) / (2.0 * step)};
  };
  const auto [d4, d2] = estimate(h);
  const std::string base = t >= 2.0 * h ? "central4" : "forward4";
  if (std::abs(d4 - d2) <= 10.0 * tol) return {d4, base};
  const double d4_half = estimate(0.5 * h).first;
  return {(16.0 * d4_half - d4) / 15.0, "richardson"};
}

std::optional<CorrelationKernel> kernel_of(const State& state, int n_max) {
  return std::visit(overloaded{
                        [&](const EmptyState&) -> std::optional<CorrelationKernel> { return vacuum_kernel(n_max); },
                        [&](const PoissonState& s) -> std::optional<CorrelationKernel> {
                          return poisson_kernel(s.rho, n_max);
                        },
                        [](const DeterministicState&) -> std::optional<CorrelationKernel> { return std::nullopt; },
                        [&](const ConvolutionState& s) -> std::optional<CorrelationKernel> {
                          std::optional<CorrelationKernel> acc = vacuum_kernel(n_max);
                          for (const auto& part : s.parts) {
                            auto k = kernel_of(part, n_max);
                            if (!k) return std::nullopt;
                            acc = convolve_kernels(*acc, *k);
                          }
                          return acc;
                        },
                    },
                    state.variant());
}

double expected_count(const State& state, const Window& cell, double a_lo, double a_hi, const QuadratureSpec& spec) {
  return std::visit(overloaded{
                        [](const EmptyState&) { return 0.0; },
                        [&](const PoissonState& s) {
                          const double hi = std::min(a_hi, s.rho.support());
                          if (!(hi > a_lo)) return 0.0;
                          const auto breaks = s.rho.breaks();
                          return integrate_window_age(cell, spec, a_lo, hi, breaks,
                                                      [&s](const Position& x, double a) { return s.rho(x, a); });
                        },
                        [&](const DeterministicState& s) {
                          double sum = 0.0;
                          for (std::size_t i = 0; i < s.config.size(); ++i) {
                            const auto& p = s.config[i];
                            if (cell.contains(p.x) && p.a >= a_lo && p.a < a_hi) sum += s.retention(i);
                          }
                          return sum;
                        },
                        [&](const ConvolutionState& s) {
                          double sum = 0.0;
                          for (const auto& part : s.parts) sum += expected_count(part, cell, a_lo, a_hi, spec);
                          return sum;
                        },
                    },
                    state.variant());
}

ChiSquare poisson_chi_square(const std::vector<std::size_t>& counts, double mean) {
  if (counts.empty()) throw std::invalid_argument("chi-square test needs data");
  if (!(mean > 0.0)) throw std::invalid_argument("chi-square test needs a positive Poisson mean");
  const double n = static_cast<double>(counts.size());
  std::size_t top = 0;
  for (std::size_t c : counts) top = std::max(top, c);

  std::vector<double> observed(top + 1, 0.0);
  for (std::size_t c : counts) observed[c] += 1.0;
  std::vector<double> expected(top + 1, 0.0);
  double pk = std::exp(-mean);
  for (std::size_t k = 0; k <= top; ++k) {
    expected[k] = n * pk;
    pk *= mean / static_cast<double>(k + 1);
  }
  // Everything at or above the last cell goes into that cell.
  double assigned = 0.0;
  for (std::size_t k = 0; k < top; ++k) assigned += expected[k];
  expected[top] = n - assigned;

  while (expected.size() > 2 && expected.back() < 5.0) {
    const double e = expected.back(), o = observed.back();
    expected.pop_back();
    observed.pop_back();
    expected.back() += e;
    observed.back() += o;
  }
  ChiSquare out;
  for (std::size_t k = 0; k < expected.size(); ++k) {
    const double d = observed[k] - expected[k];
    out.statistic += d * d / expected[k];
  }
  out.dof = static_cast<int>(expected.size()) - 1;
  if (out.dof < 1) throw std::runtime_error("chi-square test has no degrees of freedom");
  const boost::math::chi_squared dist(out.dof);
  out.critical = boost::math::quantile(dist, 0.99);
  out.p_value = boost::math::cdf(boost::math::complement(dist, out.statistic));
  return out;
}

double fitted_decay_rate(const std::vector<double>& times, const std::vector<double>& values) {
  if (times.size() != values.size()) throw std::invalid_argument("fit needs matching times and values");
  if (times.size() < 4) throw std::invalid_argument("decay fit needs at least 4 time points");
  double st = 0.0, sy = 0.0;
  for (std::size_t i = 0; i < times.size(); ++i) {
    if (!(values[i] > 0.0)) throw std::invalid_argument("decay fit needs positive values");
    st += times[i];
    sy += std::log(values[i]);
  }
  const double n = static_cast<double>(times.size());
  const double tm = st / n, ym = sy / n;
  double sxy = 0.0, sxx = 0.0;
  for (std::size_t i = 0; i < times.size(); ++i) {
    sxy += (times[i] - tm) * (std::log(values[i]) - ym);
    sxx += (times[i] - tm) * (times[i] - tm);
  }
  return -sxy / sxx;
}

Report run_density_match(const ExperimentConfig& cfg, int workers) {
  Stopwatch clock;
  if (cfg.inits.empty()) throw std::invalid_argument("density match needs an init state");
  if (cfg.replicas < 2) throw std::invalid_argument("density match needs at least 2 replicas");
  const auto& init = cfg.inits.front();
  const double t = cfg.times.back();
  const QuadratureSpec spec = with_workers(cfg.quadrature, workers);

  const SnapshotBatch batch =
      simulate_batch(init.state, cfg.model, cfg.window, t, derived_rng(cfg.seed, 0), cfg.replicas, workers);
  const auto cells = estimate_density(batch, cfg.window, cfg.density);
  const State mu_t = solution_state(init.state, cfg.model, t);

  CsvTable table({"bin_x", "bin_a", "empirical", "analytic", "se", "z"});
  std::size_t outside2 = 0, outside4 = 0;
  const double replicas = static_cast<double>(cfg.replicas);
  for (const auto& c : cells) {
    const double analytic = expected_count(mu_t, c.cell, c.a_lo, c.a_hi, spec) / c.volume;
    const double z = z_score(c.mean, analytic, c.se, 1.0 / (replicas * c.volume));
    outside2 += z > 2.0 ? 1 : 0;
    outside4 += z > 4.0 ? 1 : 0;
    table.add_row({static_cast<long long>(c.bin_x), static_cast<long long>(c.bin_a), c.mean, analytic, c.se, z});
  }

  const CountTail total = estimate_count_tail(batch, cfg.window);
  const double total_analytic = expected_count(mu_t, cfg.window, 0.0, std::numeric_limits<double>::infinity(), spec);
  const double total_z = z_score(total.mean, total_analytic, total.se, 1.0 / replicas);
  CsvTable totals({"init", "t", "empirical", "analytic", "se", "z"});
  totals.add_row({init.name, t, total.mean, total_analytic, total.se, total_z});

  Report r;
  r.name = "density";
  r.tables.emplace_back("density.csv", std::move(table));
  r.tables.emplace_back("density_total.csv", std::move(totals));
  const double n = static_cast<double>(cells.size());
  r.checks.push_back(check_le("density.fraction_outside_2se", static_cast<double>(outside2) / n, 0.05));
  r.checks.push_back(check_le("density.fraction_outside_4se", static_cast<double>(outside4) / n, 0.0));
  r.checks.push_back(check_le("density.total_count_z", total_z, 3.0));
  r.runtime_seconds = clock.seconds();
  return r;
}

Report run_functional_match(const ExperimentConfig& cfg, int workers) {
  Stopwatch clock;
  if (cfg.replicas < 2) throw std::invalid_argument("functional match needs at least 2 replicas");
  const QuadratureSpec spec = with_workers(cfg.quadrature, workers);
  const double replicas = static_cast<double>(cfg.replicas);
  const double m_lo = cfg.model.m_star_lo();

  CsvTable table({"init", "t", "theta", "mc_mean", "mc_se", "analytic", "z"});
  CsvTable counts({"init", "t", "mean", "se", "max", "analytic", "bound"});
  Report r;
  r.name = "functional";
  for (std::size_t i = 0; i < cfg.inits.size(); ++i) {
    const auto& init = cfg.inits[i];
    const auto kernel = kernel_of(init.state, 1);
    for (std::size_t j = 0; j < cfg.times.size(); ++j) {
      const double t = cfg.times[j];
      const SnapshotBatch batch = simulate_batch(init.state, cfg.model, cfg.window, t,
                                                 derived_rng(cfg.seed, 1000 + 100 * i + j), cfg.replicas, workers);
      double worst = 0.0;
      for (const auto& theta : cfg.theta_suite) {
        const MeanSe mc = estimate_functional(batch, theta);
        const double analytic = mu_t_functional(init.state, cfg.model, t, theta, cfg.window, spec);
        const double z = z_score(mc.mean, analytic, mc.se, 1.0 / replicas);
        worst = std::max(worst, z);
        table.add_row({init.name, t, theta.label(), mc.mean, mc.se, analytic, z});
      }
      r.checks.push_back(check_le("functional." + init.name + ".t=" + time_label(t) + ".max_z", worst, 3.0));

      const CountTail tail = estimate_count_tail(batch, cfg.window);
      const State mu_t = solution_state(init.state, cfg.model, t);
      const double analytic = expected_count(mu_t, cfg.window, 0.0, std::numeric_limits<double>::infinity(), spec);
      double bound = std::numeric_limits<double>::quiet_NaN();
      if (kernel && m_lo > 0.0) {
        bound = cfg.window.volume() * kappa_star(kernel->kappa(), cfg.model.b_star(), m_lo);
        r.checks.push_back(
            check_le("counts." + init.name + ".t=" + time_label(t) + ".mean_minus_3se", tail.mean - 3.0 * tail.se, bound));
      }
      counts.add_row({init.name, t, tail.mean, tail.se, static_cast<long long>(tail.max), analytic,
                      std::isfinite(bound) ? CsvTable::Cell(bound) : CsvTable::Cell(std::string("n/a"))});
    }
  }
  r.tables.emplace_back("functional.csv", std::move(table));
  r.tables.emplace_back("counts.csv", std::move(counts));
  r.runtime_seconds = clock.seconds();
  return r;
}

Report run_analytic(const ExperimentConfig& cfg, int workers) {
  Stopwatch clock;
  const QuadratureSpec spec = with_workers(cfg.quadrature, workers);
  CsvTable table({"init", "t", "theta", "mu_t", "log_immigration", "initial_factor", "l_value"});
  std::size_t out_of_range = 0;
  double initial_gap = 0.0;
  for (const auto& init : cfg.inits) {
    for (const auto& theta : cfg.theta_suite) {
      const double at_zero = mu_t_functional(init.state, cfg.model, 0.0, theta, cfg.window, spec);
      initial_gap = std::max(initial_gap, std::abs(at_zero - state_functional(init.state, theta, cfg.window, spec)));
      for (double t : cfg.times) {
        const MuTFactors f = mu_t_factors(init.state, cfg.model, t, theta, cfg.window, spec);
        const double value = std::exp(f.log_immigration) * f.initial;
        const double l_value = apply_L_functional(solution_state(init.state, cfg.model, t), cfg.model, theta,
                                                  cfg.window, spec);
        out_of_range += (value > 0.0 && value <= 1.0) ? 0 : 1;
        table.add_row({init.name, t, theta.label(), value, f.log_immigration, f.initial, l_value});
      }
    }
  }
  Report r;
  r.name = "analytic";
  r.tables.emplace_back("analytic.csv", std::move(table));
  r.checks.push_back(check_le("analytic.values_outside_unit_interval", static_cast<double>(out_of_range), 0.0));
  r.checks.push_back(check_le("analytic.initial_condition", initial_gap, 0.0));
  r.runtime_seconds = clock.seconds();
  return r;
}

Report run_fpe_residual(const ExperimentConfig& cfg, int workers) {
  Stopwatch clock;
  const QuadratureSpec spec = with_workers(cfg.quadrature, workers);
  constexpr double kTol = 1e-5;
  constexpr double kStep = 1e-3;

  CsvTable table({"init", "t", "theta", "derivative", "l_value", "residual", "tolerance", "method"});
  Report r;
  r.name = "fpe";
  for (const auto& init : cfg.inits) {
    double worst = 0.0;
    for (double t : cfg.times) {
      const State mu_t = solution_state(init.state, cfg.model, t);
      for (const auto& theta : cfg.theta_suite) {
        const double l_value = apply_L_functional(mu_t, cfg.model, theta, cfg.window, spec);
        const double scale = std::max(1.0, std::abs(l_value));
        const Derivative d = fpe_derivative(
            [&](double s) { return mu_t_functional(init.state, cfg.model, s, theta, cfg.window, spec); }, t, kStep,
            kTol * scale);
        const double residual = std::abs(d.value - l_value);
        worst = std::max(worst, std::isfinite(residual) ? residual / scale : std::numeric_limits<double>::infinity());
        table.add_row({init.name, t, theta.label(), d.value, l_value, residual, kTol * scale, d.method});
      }
    }
    r.checks.push_back(check_le("fpe." + init.name + ".max_scaled_residual", worst, kTol));
  }

  CsvTable stationary({"theta", "l_value"});
  double worst = 0.0;
  const State pi = State::poisson(stationary_intensity(cfg.model, cfg.window.a_max()));
  for (const auto& theta : cfg.theta_suite) {
    const double l_value = apply_L_functional(pi, cfg.model, theta, cfg.window, spec);
    worst = std::max(worst, std::abs(l_value));
    stationary.add_row({theta.label(), l_value});
  }
  r.checks.push_back(check_le("stationarity.max_abs_l", worst, 1e-8));
  r.tables.emplace_back("fpe.csv", std::move(table));
  r.tables.emplace_back("stationarity.csv", std::move(stationary));
  r.runtime_seconds = clock.seconds();
  return r;
}

Report run_convergence(const ExperimentConfig& cfg, int workers) {
  Stopwatch clock;
  const double m_lo = cfg.model.m_star_lo();
  if (!(m_lo > 0.0)) throw std::invalid_argument("convergence needs m_* > 0");
  if (cfg.convergence_times.size() < 4) throw std::invalid_argument("decay fit needs at least 4 time points");
  NormGrid grid;
  grid.workers = std::max(1, workers);
  const CorrelationKernel stationary = poisson_kernel(stationary_intensity(cfg.model, cfg.window.a_max()), 3);
  const bool constant_rates = cfg.model.kind() == RateKind::constant;

  CsvTable table({"init", "t", "gap", "bound", "ratio"});
  CsvTable norms({"init", "t", "order", "norm", "bound"});
  Report r;
  r.name = "convergence";
  for (const auto& init : cfg.inits) {
    const auto k0 = kernel_of(init.state, 3);
    if (!k0) {
      spdlog::info("convergence: skipping init '{}' (no correlation kernel)", init.name);
      continue;
    }
    const double kstar = kappa_star(k0->kappa(), cfg.model.b_star(), m_lo);
    std::vector<double> fit_t, fit_gap, gaps;
    double worst_ratio = 0.0, worst_increase = 0.0, worst_norm = 0.0;
    for (double t : cfg.convergence_times) {
      const CorrelationKernel kt = solution_kernel(*k0, cfg.model, t);
      const double gap = kernel_gap_norm(kt, stationary, 1, cfg.window, grid);
      const double bound = convergence_bound(0.0, kstar, 1, m_lo, t);
      worst_ratio = std::max(worst_ratio, gap / bound);
      if (!gaps.empty()) worst_increase = std::max(worst_increase, gap - gaps.back());
      gaps.push_back(gap);
      if (t >= 1.0 && t <= 8.0) {
        fit_t.push_back(t);
        fit_gap.push_back(gap);
      }
      table.add_row({init.name, t, gap, bound, gap / bound});
      for (int n = 1; n <= 3; ++n) {
        const double norm = kernel_norm(kt, n, cfg.window, grid);
        const double nb = std::pow(kstar, n);
        worst_norm = std::max(worst_norm, norm / nb);
        norms.add_row({init.name, t, static_cast<long long>(n), norm, nb});
      }
    }
    const std::string prefix = "convergence." + init.name;
    r.checks.push_back(check_le(prefix + ".max_gap_over_bound", worst_ratio, 1.0));
    r.checks.push_back(check_le(prefix + ".max_norm_over_kappa_star_power", worst_norm, 1.0 + 1e-9));
    if (constant_rates) r.checks.push_back(check_le(prefix + ".max_gap_increase", worst_increase, 1e-12));
    const bool vanishing = *std::max_element(fit_gap.begin(), fit_gap.end()) <= 1e-14;
    if (vanishing) {
      r.checks.push_back(check_le(prefix + ".max_gap", *std::max_element(gaps.begin(), gaps.end()), 1e-12));
    } else if (constant_rates) {
      const double rate = fitted_decay_rate(fit_t, fit_gap);
      r.checks.push_back(check_le(prefix + ".fit_rate_relative_error", std::abs(rate - m_lo) / m_lo, 0.05));
    }
  }
  r.tables.emplace_back("convergence.csv", std::move(table));
  r.tables.emplace_back("norms.csv", std::move(norms));
  r.runtime_seconds = clock.seconds();
  return r;
}

namespace {

// Smooth stand-ins for tabulated functions, with coefficients drawn from
// a dedicated stream.
struct RandomCoefficients {
  std::vector<double> c;
  RandomCoefficients(std::uint64_t seed, std::uint64_t stream, std::size_t n) {
    CounterRng rng(seed, stream);
    for (std::size_t i = 0; i < n; ++i) c.push_back(rng.uniform() - 0.5);
  }
  double one(const MarkedPoint& p, std::size_t offset) const {
    return c[offset] + c[offset + 1] * p.x[0] + c[offset + 2] * std::exp(-p.a / 10.0) + c[offset + 3] * p.x[1];
  }
};

double table_functional(const RandomCoefficients& rc, std::span<const MarkedPoint> xi, std::span<const MarkedPoint> eta) {
  // Order-dependent weights times a non-product pair interaction.
  const std::size_t j = xi.size(), k = eta.size();
  double v = rc.c[16 + 4 * j + k];
  for (const auto& p : xi) v *= 1.0 + rc.one(p, 0);
  for (const auto& p : eta) v *= 1.0 + rc.one(p, 4);
  double pair = 0.0;
  std::vector<MarkedPoint> all(xi.begin(), xi.end());
  all.insert(all.end(), eta.begin(), eta.end());
  for (std::size_t a = 0; a < all.size(); ++a) {
    for (std::size_t b = a + 1; b < all.size(); ++b) pair += rc.one(all[a], 8) * rc.one(all[b], 12);
  }
  return v + pair;
}

}  // namespace

Report run_identity_suite(const ExperimentConfig& cfg, int workers) {
  Stopwatch clock;
  const QuadratureSpec spec = with_workers(cfg.quadrature, workers);
  const Window& w = cfg.window;
  const double vol = w.volume();
  const double a_max = w.a_max();
  CsvTable table({"identity", "case", "lhs", "rhs", "error", "tolerance"});
  Report r;
  r.name = "identities";
  const auto record = [&](const std::string& identity, std::vector<std::tuple<std::string, double, double, double>> rows,
                          double tol) {
    double worst = 0.0;
    for (const auto& [name, lhs, rhs, err] : rows) {
      worst = std::max(worst, std::isfinite(err) ? err : std::numeric_limits<double>::infinity());
      table.add_row({identity, name, lhs, rhs, err, tol});
    }
    r.checks.push_back(check_le(identity, worst, tol));
  };

  // Unit-mass age profile on [0, a_max] times a unit-mass spatial density.
  const double age_mass = -std::expm1(-a_max);
  const auto unit = [vol, age_mass](const Position&, double a) { return std::exp(-a) / (vol * age_mass); };

  {
    std::vector<std::tuple<std::string, double, double, double>> rows;
    const auto g = [unit](const Position& x, double a) { return 0.3 * unit(x, a); };
    const auto h = [&w, vol, a_max](const Position& x, double) {
      return 0.3 * 2.0 * (x[0] - w.lower()[0]) / (w.upper()[0] - w.lower()[0]) / (vol * a_max);
    };
    const MinlosResult m = minlos_check(PairFunctional::product(g, h), w, spec.n_max, spec);
    rows.emplace_back("product g,h mass 0.3", m.lhs, m.rhs, relative_error(m.lhs, m.rhs));
    rows.emplace_back("product vs exp(0.6)", m.lhs, std::exp(0.6), relative_error(m.lhs, std::exp(0.6)));
    const MinlosResult v = minlos_check(
        PairFunctional::general([](auto xi, auto eta) { return xi.empty() && eta.empty() ? 1.0 : 0.0; }, 0), w,
        spec.n_max, spec);
    rows.emplace_back("vacuum indicator", v.lhs, v.rhs, relative_error(v.lhs, v.rhs));
    record("minlos.product", std::move(rows), 1e-9);
  }

  {
    // Tabulated G on at most 3 points, on a coarse grid, against an
    // independent enumeration over the same nodes.
    QuadratureSpec coarse = spec;
    coarse.x_nodes = 3;
    coarse.a_nodes = 2;
    coarse.max_panel = a_max;
    const RandomCoefficients rc(cfg.seed, 0xC0FFEE, 32);
    const auto G = [&rc](std::span<const MarkedPoint> xi, std::span<const MarkedPoint> eta) {
      return table_functional(rc, xi, eta);
    };
    const MinlosResult m = minlos_check(PairFunctional::general(G, 3), w, 3, coarse);

    std::vector<MarkedPoint> pts;
    std::vector<double> wts;
    for (const auto& sn : spatial_nodes(w, coarse.x_nodes)) {
      for (const auto& an : age_nodes(0.0, a_max, {}, coarse.a_nodes, coarse.max_panel)) {
        pts.push_back({sn.x, an.a});
        wts.push_back(sn.w * an.w);
      }
    }
    const std::size_t P = pts.size();
    std::vector<MarkedPoint> none;
    double lhs = G(none, none), rhs = G(none, none);
    for (std::size_t i = 0; i < P; ++i) {
      const MarkedPoint one[] = {pts[i]};
      lhs += wts[i] * (G(one, none) + G(none, one));
      rhs += wts[i] * (G(one, none) + G(none, one));
      for (std::size_t j = 0; j < P; ++j) {
        const MarkedPoint two[] = {pts[i], pts[j]};
        const MarkedPoint a[] = {pts[i]}, b[] = {pts[j]};
        const double wij = wts[i] * wts[j];
        lhs += wij / 2.0 * (G(none, two) + G(a, b) + G(b, a) + G(two, none));
        rhs += wij * (G(a, b) + 0.5 * G(two, none) + 0.5 * G(none, two));
        for (std::size_t k = 0; k < P; ++k) {
          const MarkedPoint p3[] = {pts[i], pts[j], pts[k]};
          const MarkedPoint pi[] = {pts[i]}, pj[] = {pts[j]}, pk[] = {pts[k]};
          const MarkedPoint ij[] = {pts[i], pts[j]}, ik[] = {pts[i], pts[k]}, jk[] = {pts[j], pts[k]};
          const double wijk = wij * wts[k];
          lhs += wijk / 6.0 *
                 (G(none, p3) + G(pi, jk) + G(pj, ik) + G(pk, ij) + G(ij, pk) + G(ik, pj) + G(jk, pi) + G(p3, none));
          rhs += wijk * (G(none, p3) / 6.0 + G(pi, jk) / 2.0 + G(ij, pk) / 2.0 + G(p3, none) / 6.0);
        }
      }
    }
    std::vector<std::tuple<std::string, double, double, double>> rows;
    rows.emplace_back("lhs vs enumeration", m.lhs, lhs, relative_error(m.lhs, lhs));
    rows.emplace_back("rhs vs enumeration", m.rhs, rhs, relative_error(m.rhs, rhs));
    record("minlos.tabulated_enumeration", std::move(rows), 1e-12);
    record("minlos.tabulated", {{"lhs vs rhs", m.lhs, m.rhs, relative_error(m.lhs, m.rhs)}}, 1e-9);
  }

  {
    const IntensityKernel rho1 = exponential_intensity(cfg.model, 0.5, 2.0, a_max);
    const IntensityKernel rho2 = stationary_intensity(cfg.model, a_max);
    const CorrelationKernel conv = convolve_kernels(poisson_kernel(rho1, 3), poisson_kernel(rho2, 3));
    const CorrelationKernel sum = poisson_kernel(rho1 + rho2, 3);
    CounterRng rng(cfg.seed, 0xC0DE);
    std::vector<std::tuple<std::string, double, double, double>> rows;
    for (int n = 1; n <= 3; ++n) {
      double worst = 0.0, lhs = 0.0, rhs = 0.0;
      for (int rep = 0; rep < 50; ++rep) {
        std::vector<MarkedPoint> pts;
        for (int k = 0; k < n; ++k) pts.push_back({window_point(w, rng.uniform(), rng.uniform()), 6.0 * rng.uniform()});
        const double a = conv(pts), b = sum(pts);
        if (relative_error(a, b) >= worst) {
          worst = relative_error(a, b);
          lhs = a;
          rhs = b;
        }
      }
      rows.emplace_back("order " + std::to_string(n), lhs, rhs, worst);
    }
    record("convolution.poisson_sum", std::move(rows), 1e-13);
  }

  {
    const RandomCoefficients rc(cfg.seed, 0xBEEF, 16);
    const auto make = [&rc](std::size_t offset, const std::string& label) {
      CorrelationKernel::Parts p;
      p.eval = [&rc, offset](std::span<const MarkedPoint> pts) {
        double v = 1.0, pair = 0.0;
        for (const auto& q : pts) v *= 1.0 + rc.one(q, offset);
        for (std::size_t i = 0; i < pts.size(); ++i) {
          for (std::size_t j = i + 1; j < pts.size(); ++j) pair += rc.one(pts[i], offset + 4) * rc.one(pts[j], offset + 4);
        }
        return v + pair;
      };
      p.n_max = 3;
      p.age_support = 1e300;
      p.label = label;
      return CorrelationKernel(std::move(p));
    };
    const CorrelationKernel k1 = make(0, "table1"), k2 = make(8, "table2");
    const CorrelationKernel conv = convolve_kernels(k1, k2);
    CounterRng rng(cfg.seed, 0xFACE);
    double worst = 0.0, lhs = 0.0, rhs = 0.0;
    for (int rep = 0; rep < 50; ++rep) {
      std::array<MarkedPoint, 3> p;
      for (auto& q : p) q = {window_point(w, rng.uniform(), rng.uniform()), 5.0 * rng.uniform()};
      const std::vector<MarkedPoint> none;
      const auto K1 = [&](std::initializer_list<MarkedPoint> s) { return k1(std::vector<MarkedPoint>(s)); };
      const auto K2 = [&](std::initializer_list<MarkedPoint> s) { return k2(std::vector<MarkedPoint>(s)); };
      const double brute = K1({p[0], p[1], p[2]}) * 1.0 + K1({p[1], p[2]}) * K2({p[0]}) + K1({p[0], p[2]}) * K2({p[1]}) +
                           K1({p[0], p[1]}) * K2({p[2]}) + K1({p[2]}) * K2({p[0], p[1]}) + K1({p[1]}) * K2({p[0], p[2]}) +
                           K1({p[0]}) * K2({p[1], p[2]}) + 1.0 * K2({p[0], p[1], p[2]});
      const double value = conv(std::vector<MarkedPoint>(p.begin(), p.end()));
      if (relative_error(value, brute) >= worst) {
        worst = relative_error(value, brute);
        lhs = value;
        rhs = brute;
      }
    }
    record("convolution.enumeration", {{"order 3, 50 random tuples", lhs, rhs, worst}}, 1e-13);
  }

  const IntensityKernel rho_stat = stationary_intensity(cfg.model, a_max);
  const Observable q = [](const Position&, double a) { return 0.25 + 0.5 * std::exp(-a); };
  {
    QuadratureSpec deep = spec;
    deep.n_max = 20;
    const CorrelationKernel thinned = thin_kernel(poisson_kernel(rho_stat, deep.n_max), q);
    std::vector<std::tuple<std::string, double, double, double>> rows;
    for (const auto& theta : cfg.theta_suite) {
      const double lhs = kernel_functional(thinned, theta, w, deep);
      const Observable qtheta = [&q, &theta](const Position& x, double a) { return q(x, a) * theta(x, a); };
      const double rhs = std::exp(poisson_log_functional(rho_stat, qtheta, w, deep));
      rows.emplace_back(theta.label(), lhs, rhs, relative_error(lhs, rhs));
    }
    record("thinning.analytic", std::move(rows), 1e-10);
  }

  if (cfg.replicas >= 2) {
    const RngSpec rng = derived_rng(cfg.seed, 7);
    std::vector<FiniteConfiguration> thinned(cfg.replicas);
    const long n = static_cast<long>(cfg.replicas);
    const int threads = std::max(1, workers);
#pragma omp parallel for num_threads(threads) schedule(static) if (threads > 1)
    for (long i = 0; i < n; ++i) {
      CounterRng stream = rng.replica(static_cast<std::uint64_t>(i));
      thinned[i] = thin_configuration(sample_poisson_config(rho_stat, w, stream), q, stream);
    }
    std::vector<std::size_t> counts(thinned.size());
    for (std::size_t i = 0; i < thinned.size(); ++i) counts[i] = thinned[i].size();
    const double mass = integrate_window_age(w, spec, 0.0, a_max, rho_stat.breaks(),
                                             [&](const Position& x, double a) { return q(x, a) * rho_stat(x, a); });
    const ChiSquare chi = poisson_chi_square(counts, mass);
    table.add_row({std::string("thinning.chi_square"), "p_value=" + format_real(chi.p_value) + ";dof=" +
                                                            std::to_string(chi.dof),
                   chi.statistic, chi.critical, chi.statistic, chi.critical});
    r.checks.push_back(check_le("thinning.chi_square", chi.statistic, chi.critical));

    SnapshotBatch batch;
    batch.replicas = std::move(thinned);
    std::vector<std::tuple<std::string, double, double, double>> rows;
    const double floor = 1.0 / static_cast<double>(cfg.replicas);
    for (const auto& theta : cfg.theta_suite) {
      const MeanSe mc = estimate_functional(batch, theta);
      const Observable qtheta = [&q, &theta](const Position& x, double a) { return q(x, a) * theta(x, a); };
      const double analytic = std::exp(poisson_log_functional(rho_stat, qtheta, w, spec));
      rows.emplace_back(theta.label(), mc.mean, analytic, z_score(mc.mean, analytic, mc.se, floor));
    }
    record("thinning.sampled_functional_z", std::move(rows), 3.0);
  }

  {
    std::vector<std::tuple<std::string, double, double, double>> rows;
    const std::array<double, 2> steps{0.3, 1.1};
    for (const auto& theta : cfg.theta_suite) {
      double worst = 0.0, lhs = 0.0, rhs = 0.0;
      for (double s : steps) {
        for (double t : steps) {
          const Observable direct = theta_shift(theta, cfg.model, t + s);
          const Observable twice = theta_shift(theta_shift(theta, cfg.model, s), cfg.model, t);
          for (int i = 0; i <= 10; ++i) {
            for (int k = 0; k <= 20; ++k) {
              const Position x = window_point(w, i / 10.0, i / 10.0);
              const double a = 0.5 * k;
              const double u = direct(x, a), v = twice(x, a);
              if (std::abs(u - v) >= worst) {
                worst = std::abs(u - v);
                lhs = u;
                rhs = v;
              }
            }
          }
        }
      }
      rows.emplace_back(theta.label(), lhs, rhs, worst);
    }
    record("theta.cocycle", std::move(rows), 1e-12);
  }

  {
    std::vector<std::tuple<std::string, double, double, double>> rows;
    const std::array<double, 2> steps{0.3, 1.1};
    for (const auto& init : cfg.inits) {
      for (const auto& theta : cfg.theta_suite) {
        for (double s : steps) {
          for (double t : steps) {
            const double lhs = mu_t_functional(init.state, cfg.model, t + s, theta, w, spec);
            const double immigration =
                mu_t_factors(State::empty(), cfg.model, s, theta, w, spec).log_immigration;
            const Observable shifted = theta_shift(theta, cfg.model, s);
            const double rhs = std::exp(immigration) * mu_t_functional(init.state, cfg.model, t, shifted, w, spec);
            std::ostringstream name;
            name << init.name << ";" << theta.label() << ";s=" << s << ";t=" << t;
            rows.emplace_back(name.str(), lhs, rhs, relative_error(lhs, rhs));
          }
        }
      }
    }
    record("flow.chapman_kolmogorov", std::move(rows), 1e-10);
  }

  {
    QuadratureSpec deep = spec;
    deep.n_max = 20;
    std::vector<std::tuple<std::string, double, double, double>> rows;
    for (double c : {-1.0, -0.5, 0.3, 1.0}) {
      const auto g = [c, unit](const Position& x, double a) { return c * unit(x, a); };
      const LpIntegral lp = lp_integral(ConfigFunctional::product(g), w, deep.n_max, deep);
      rows.emplace_back("c=" + format_real(c), lp.value, std::exp(c), relative_error(lp.value, std::exp(c)));
    }
    record("lebesgue_poisson.exponential", std::move(rows), 1e-12);
  }

  r.tables.emplace_back("identities.csv", std::move(table));
  r.runtime_seconds = clock.seconds();
  return r;
}

}  // namespace agepop
