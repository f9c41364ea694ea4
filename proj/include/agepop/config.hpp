#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <map>
#include <stdexcept>
#include <string>
#include <vector>

#include "agepop/estimators.hpp"
#include "agepop/quadrature.hpp"
#include "agepop/rate_model.hpp"
#include "agepop/state.hpp"
#include "agepop/theta.hpp"
#include "agepop/types.hpp"

namespace agepop {

class ConfigError : public std::runtime_error {
 public:
  ConfigError(const std::string& source, int line, const std::string& message);
  int line() const { return line_; }

 private:
  int line_;
};

struct NamedState {
  std::string name;
  State state;
};

struct ExperimentConfig {
  int dim = 1;
  Window window = Window::unit_interval(40.0);
  RateModel model = RateModel::constant(1.0, 1.0);
  std::vector<NamedState> inits;        // first entry drives the density experiment
  std::vector<double> times;            // sorted, nonnegative
  std::vector<double> convergence_times;
  std::vector<ThetaObservable> theta_suite;
  std::size_t replicas = 100000;
  std::uint64_t seed = 42;
  QuadratureSpec quadrature;
  DensityBins density;
  bool write_points = false;
  std::string output_dir = "out";
};

/// Parses `key = value` lines. Unknown keys and malformed values raise
/// ConfigError with the offending line number.
ExperimentConfig parse_config(std::istream& in, const std::string& source = "<config>");
ExperimentConfig load_config(const std::filesystem::path& file);

/// The constant-rate reference setup with the init catalogue and the
/// ten-observable suite.
ExperimentConfig reference_config();

std::vector<ThetaObservable> default_theta_suite(const Window& window);

/// Empty, Poisson exp(c=0.5,rate=2), Deterministic {(0.25,0),(0.75,1.5)}
/// and their Poisson-Deterministic convolution, scaled to the window.
std::vector<NamedState> init_catalogue(const RateModel& rate, const Window& window);

/// `const(c)`, `zero` or `bump(center=..,width=..,depth=..)`.
VarthetaProfile parse_vartheta(const std::string& spec, const Window& window);

}  // namespace agepop
