#pragma once

#include <array>
#include <functional>
#include <span>
#include <string>
#include <vector>

namespace agepop {

/// Spatial location in R^d, d in {1, 2}. Coordinates beyond the model
/// dimension are kept at zero.
using Position = std::array<double, 2>;

/// Compound trait of one entity: location and age.
struct MarkedPoint {
  Position x{};
  double a = 0.0;

  friend bool operator==(const MarkedPoint&, const MarkedPoint&) = default;
};

/// Real function on X x R_+, e.g. an observable theta(x, a) or a thinning
/// probability q(x, a).
using Observable = std::function<double(const Position&, double)>;

/// Real function on X.
using SpatialFunction = std::function<double(const Position&)>;

double norm(const Position& x, int dim);
double distance(const Position& x, const Position& y, int dim);

/// Axis-aligned observation box Lambda together with the age truncation
/// bound used by quadrature and sampling.
class Window {
 public:
  Window(int dim, Position lower, Position upper, double a_max);

  static Window unit_interval(double a_max) { return Window(1, {0.0, 0.0}, {1.0, 0.0}, a_max); }

  int dim() const { return dim_; }
  const Position& lower() const { return lower_; }
  const Position& upper() const { return upper_; }
  double a_max() const { return a_max_; }
  double volume() const;
  bool contains(const Position& x) const;
  bool contains(const Window& inner) const;

  Window with_a_max(double a_max) const { return Window(dim_, lower_, upper_, a_max); }

 private:
  int dim_;
  Position lower_;
  Position upper_;
  double a_max_;
};

/// Finite marked configuration. Points are kept sorted lexicographically by
/// position; pairwise-distinct locations are enforced at construction.
class FiniteConfiguration {
 public:
  FiniteConfiguration() = default;
  FiniteConfiguration(int dim, std::vector<MarkedPoint> points);

  int dim() const { return dim_; }
  std::span<const MarkedPoint> points() const { return points_; }
  std::size_t size() const { return points_.size(); }
  bool empty() const { return points_.empty(); }
  const MarkedPoint& operator[](std::size_t i) const { return points_[i]; }

  /// Union with a configuration that shares no location with this one.
  FiniteConfiguration merged(const FiniteConfiguration& other) const;

  friend bool operator==(const FiniteConfiguration&, const FiniteConfiguration&) = default;

 private:
  int dim_ = 1;
  std::vector<MarkedPoint> points_;
};

/// prod_{x in config} (1 + theta(x, a_x)); the empty product is 1.
double f_theta(const FiniteConfiguration& config, const Observable& theta);

std::string describe(const Position& x, int dim);

}  // namespace agepop
