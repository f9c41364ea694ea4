#include "agepop/state.hpp"

#include <cmath>
#include <sstream>
#include <stdexcept>

namespace agepop {

namespace {

template <class... Ts>
struct overloaded : Ts... {
  using Ts::operator()...;
};
template <class... Ts>
overloaded(Ts...) -> overloaded<Ts...>;

struct FunctionalPair {
  double f = 1.0;   // mu(F_theta)
  double h1 = 0.0;  // mu(H_1)
};

double poisson_h1_rate(const IntensityKernel& rho, const ThetaObservable& theta, const Window& window,
                       const QuadratureSpec& spec) {
  if (!rho.has_transport()) {
    throw std::invalid_argument("generator of Poisson state '" + rho.label() + "' needs a transport term");
  }
  // int rho h_theta = -int rho(x,0) theta(x,0) dx - int theta (d/da + m) rho - sum_jumps int theta(x,c) J(x) dx
  double boundary = 0.0;
  if (rho.support() > 0.0) {
    boundary = integrate_window(window, spec, [&](const Position& x) { return rho(x, 0.0) * theta(x, 0.0); });
  }
  const auto breaks = rho.breaks();
  const double bulk = integrate_window_age(window, spec, 0.0, rho.support(), breaks, [&](const Position& x, double a) {
    return theta(x, a) * rho.transport(x, a);
  });
  double jumps = 0.0;
  for (const auto& j : rho.jumps()) {
    jumps += integrate_window(window, spec, [&](const Position& x) { return theta(x, j.age) * j.size(x); });
  }
  const double out = -boundary - bulk - jumps;
  if (!std::isfinite(out)) throw std::runtime_error("Poisson generator quadrature is not finite");
  return out;
}

FunctionalPair evaluate(const State& state, const RateModel& rate, const ThetaObservable& theta,
                        const Window& window, const QuadratureSpec& spec) {
  return std::visit(
      overloaded{
          [](const EmptyState&) { return FunctionalPair{1.0, 0.0}; },
          [&](const PoissonState& s) {
            const double f = std::exp(poisson_log_functional(s.rho, theta, window, spec));
            return FunctionalPair{f, f * poisson_h1_rate(s.rho, theta, window, spec)};
          },
          [&](const DeterministicState& s) {
            const std::size_t n = s.config.size();
            std::vector<double> factor(n), prefix(n + 1, 1.0), suffix(n + 1, 1.0);
            for (std::size_t i = 0; i < n; ++i) {
              const auto& p = s.config[i];
              factor[i] = 1.0 + s.retention(i) * theta(p.x, p.a);
            }
            for (std::size_t i = 0; i < n; ++i) prefix[i + 1] = prefix[i] * factor[i];
            for (std::size_t i = n; i > 0; --i) suffix[i - 1] = suffix[i] * factor[i - 1];
            double h1 = 0.0;
            for (std::size_t i = 0; i < n; ++i) {
              const auto& p = s.config[i];
              const double h = theta.d_age(p.x, p.a) - rate.m(p.x, p.a) * theta(p.x, p.a);
              h1 += s.retention(i) * h * prefix[i] * suffix[i + 1];
            }
            return FunctionalPair{prefix[n], h1};
          },
          [&](const ConvolutionState& s) {
            // H_1 acts as a derivation on independent superpositions.
            std::vector<FunctionalPair> parts;
            parts.reserve(s.parts.size());
            for (const auto& part : s.parts) parts.push_back(evaluate(part, rate, theta, window, spec));
            FunctionalPair out{1.0, 0.0};
            for (std::size_t i = 0; i < parts.size(); ++i) {
              double term = parts[i].h1;
              for (std::size_t j = 0; j < parts.size(); ++j) {
                if (j != i) term *= parts[j].f;
              }
              out.h1 += term;
              out.f *= parts[i].f;
            }
            return out;
          },
      },
      state.variant());
}

}  // namespace

State State::thinned_deterministic(FiniteConfiguration config, std::vector<double> retain) {
  if (retain.size() != config.size()) throw std::invalid_argument("one retention probability per point expected");
  for (double p : retain) {
    if (!(p >= 0.0 && p <= 1.0)) throw std::invalid_argument("retention probabilities must lie in [0, 1]");
  }
  return State(DeterministicState{std::move(config), std::move(retain)});
}

std::string State::fingerprint() const {
  std::ostringstream os;
  os.precision(17);
  std::visit(overloaded{
                 [&](const EmptyState&) { os << "empty"; },
                 [&](const PoissonState& s) { os << "poisson(" << s.rho.label() << ')'; },
                 [&](const DeterministicState& s) {
                   os << "deterministic(";
                   for (std::size_t i = 0; i < s.config.size(); ++i) {
                     if (i) os << ';';
                     os << describe(s.config[i].x, s.config.dim()) << '@' << s.config[i].a;
                     if (!s.retain.empty()) os << '~' << s.retain[i];
                   }
                   os << ')';
                 },
                 [&](const ConvolutionState& s) {
                   os << "convolution(";
                   for (std::size_t i = 0; i < s.parts.size(); ++i) {
                     if (i) os << ',';
                     os << s.parts[i].fingerprint();
                   }
                   os << ')';
                 },
             },
             v_);
  return os.str();
}

double state_functional(const State& state, const Observable& theta, const Window& window,
                        const QuadratureSpec& spec) {
  return std::visit(overloaded{
                        [](const EmptyState&) { return 1.0; },
                        [&](const PoissonState& s) { return std::exp(poisson_log_functional(s.rho, theta, window, spec)); },
                        [&](const DeterministicState& s) {
                          double product = 1.0;
                          for (std::size_t i = 0; i < s.config.size(); ++i) {
                            const auto& p = s.config[i];
                            product *= 1.0 + s.retention(i) * theta(p.x, p.a);
                          }
                          return product;
                        },
                        [&](const ConvolutionState& s) {
                          double product = 1.0;
                          for (const auto& part : s.parts) product *= state_functional(part, theta, window, spec);
                          return product;
                        },
                    },
                    state.variant());
}

State transport(const State& state, const RateModel& rate, double t) {
  if (!(t >= 0.0)) throw std::invalid_argument("transport needs t >= 0");
  return std::visit(overloaded{
                        [](const EmptyState&) { return State::empty(); },
                        [&](const PoissonState& s) { return State::poisson(s.rho.transported(rate, t)); },
                        [&](const DeterministicState& s) {
                          std::vector<MarkedPoint> pts;
                          std::vector<double> retain;
                          for (std::size_t i = 0; i < s.config.size(); ++i) {
                            const auto& p = s.config[i];
                            pts.push_back({p.x, p.a + t});
                            retain.push_back(s.retention(i) * std::exp(-rate.cumulative_hazard(p.x, p.a, p.a + t)));
                          }
                          return State::thinned_deterministic(FiniteConfiguration(s.config.dim(), std::move(pts)),
                                                              std::move(retain));
                        },
                        [&](const ConvolutionState& s) {
                          std::vector<State> parts;
                          for (const auto& part : s.parts) parts.push_back(transport(part, rate, t));
                          return State::convolution(std::move(parts));
                        },
                    },
                    state.variant());
}

State solution_state(const State& init, const RateModel& rate, double t) {
  if (!(t >= 0.0)) throw std::invalid_argument("solution state needs t >= 0");
  return State::convolution({transport(init, rate, t), State::poisson(rho_t(rate, t))});
}

MuTFactors mu_t_factors(const State& init, const RateModel& rate, double t, const Observable& theta,
                        const Window& window, const QuadratureSpec& spec) {
  if (!(t >= 0.0)) throw std::invalid_argument("mu_t functional needs t >= 0");
  MuTFactors out;
  if (t > 0.0) {
    out.log_immigration = integrate_window_age(window, spec, 0.0, t, {}, [&](const Position& x, double a) {
      return rate.b(x) * std::exp(-rate.cumulative_hazard(x, 0.0, a)) * theta(x, a);
    });
  }
  out.initial = state_functional(init, theta_shift(theta, rate, t), window, spec);
  return out;
}

double mu_t_functional(const State& init, const RateModel& rate, double t, const Observable& theta,
                       const Window& window, const QuadratureSpec& spec) {
  const auto f = mu_t_factors(init, rate, t, theta, window, spec);
  return std::exp(f.log_immigration) * f.initial;
}

double h1_functional(const State& state, const RateModel& rate, const ThetaObservable& theta, const Window& window,
                     const QuadratureSpec& spec) {
  return evaluate(state, rate, theta, window, spec).h1;
}

double apply_L_functional(const State& state, const RateModel& rate, const ThetaObservable& theta,
                          const Window& window, const QuadratureSpec& spec) {
  const auto pair = evaluate(state, rate, theta, window, spec);
  const double arrivals = integrate_window(window, spec, [&](const Position& x) { return rate.b(x) * theta.vartheta(x); });
  return pair.h1 + pair.f * arrivals;
}

}  // namespace agepop
