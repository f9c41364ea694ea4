#pragma once

#include <variant>
#include <vector>

#include "agepop/intensity.hpp"
#include "agepop/quadrature.hpp"
#include "agepop/rate_model.hpp"
#include "agepop/theta.hpp"
#include "agepop/types.hpp"

namespace agepop {

class State;

struct EmptyState {};

struct PoissonState {
  IntensityKernel rho;
};

/// Configuration whose i-th point is present independently with probability
/// retain[i]; an empty retain vector means every point is present.
struct DeterministicState {
  FiniteConfiguration config;
  std::vector<double> retain;

  double retention(std::size_t i) const { return retain.empty() ? 1.0 : retain[i]; }
};

/// Superposition of independent populations.
struct ConvolutionState {
  std::vector<State> parts;
};

/// Population state with closed-form Bogoliubov functionals. Initial states
/// are built from Empty, Poisson, Deterministic and Convolution; evolved
/// states additionally use thinned deterministic parts.
class State {
 public:
  using Variant = std::variant<EmptyState, PoissonState, DeterministicState, ConvolutionState>;

  static State empty() { return State(EmptyState{}); }
  static State poisson(IntensityKernel rho) { return State(PoissonState{std::move(rho)}); }
  static State deterministic(FiniteConfiguration config) { return State(DeterministicState{std::move(config), {}}); }
  static State thinned_deterministic(FiniteConfiguration config, std::vector<double> retain);
  static State convolution(std::vector<State> parts) { return State(ConvolutionState{std::move(parts)}); }

  const Variant& variant() const { return v_; }
  std::string fingerprint() const;

 private:
  explicit State(Variant v) : v_(std::move(v)) {}
  Variant v_;
};

using InitialState = State;

/// mu(F_theta) for a state of the catalogue.
double state_functional(const State& state, const Observable& theta, const Window& window,
                        const QuadratureSpec& spec);

/// mu^t: every entity ages by t and survives its own hazard.
State transport(const State& state, const RateModel& rate, double t);

/// mu_t = mu_0^t * pi_{rho_t}.
State solution_state(const State& init, const RateModel& rate, double t);

/// mu_t(F_theta) = exp(int int_{a < t} b_hat theta) mu_0(F_{theta_t}).
double mu_t_functional(const State& init, const RateModel& rate, double t, const Observable& theta,
                       const Window& window, const QuadratureSpec& spec);

/// The two factors of mu_t_functional: log of the immigration factor and
/// mu_0(F_{theta_t}).
struct MuTFactors {
  double log_immigration = 0.0;
  double initial = 1.0;
};
MuTFactors mu_t_factors(const State& init, const RateModel& rate, double t, const Observable& theta,
                        const Window& window, const QuadratureSpec& spec);

/// mu(L F_theta) = mu(H_1) + mu(F_theta) int_window b vartheta.
///
/// Poisson parts use the integrated-by-parts form of pi_rho(H_1): boundary
/// term at age 0, the transport term and the age jumps of rho. Throws
/// std::invalid_argument for Poisson parts without a transport term.
double apply_L_functional(const State& state, const RateModel& rate, const ThetaObservable& theta,
                          const Window& window, const QuadratureSpec& spec);

/// mu(H_1) alone.
double h1_functional(const State& state, const RateModel& rate, const ThetaObservable& theta,
                     const Window& window, const QuadratureSpec& spec);

}  // namespace agepop
