#include "agepop/types.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>
#include <stdexcept>

namespace agepop {

namespace {

void check_dim(int dim) {
  if (dim != 1 && dim != 2) {
    throw std::invalid_argument("spatial dimension must be 1 or 2, got " + std::to_string(dim));
  }
}

bool position_less(const Position& p, const Position& q) {
  return p[0] < q[0] || (p[0] == q[0] && p[1] < q[1]);
}

}  // namespace

double norm(const Position& x, int dim) {
  return dim == 1 ? std::abs(x[0]) : std::hypot(x[0], x[1]);
}

double distance(const Position& x, const Position& y, int dim) {
  return norm(Position{x[0] - y[0], x[1] - y[1]}, dim);
}

std::string describe(const Position& x, int dim) {
  std::ostringstream os;
  os.precision(17);
  os << x[0];
  if (dim == 2) os << ':' << x[1];
  return os.str();
}

Window::Window(int dim, Position lower, Position upper, double a_max)
    : dim_(dim), lower_(lower), upper_(upper), a_max_(a_max) {
  check_dim(dim);
  if (dim == 1) {
    lower_[1] = 0.0;
    upper_[1] = 0.0;
  }
  for (int k = 0; k < dim; ++k) {
    if (!(lower_[k] < upper_[k])) {
      throw std::invalid_argument("window lower corner must be below the upper corner on every axis");
    }
  }
  if (!(a_max > 0.0) || !std::isfinite(a_max)) {
    throw std::invalid_argument("window a_max must be positive and finite");
  }
}

double Window::volume() const {
  double v = 1.0;
  for (int k = 0; k < dim_; ++k) v *= upper_[k] - lower_[k];
  return v;
}

bool Window::contains(const Position& x) const {
  for (int k = 0; k < dim_; ++k) {
    if (x[k] < lower_[k] || x[k] > upper_[k]) return false;
  }
  return true;
}

bool Window::contains(const Window& inner) const {
  return inner.dim_ == dim_ && contains(inner.lower_) && contains(inner.upper_);
}

FiniteConfiguration::FiniteConfiguration(int dim, std::vector<MarkedPoint> points)
    : dim_(dim), points_(std::move(points)) {
  check_dim(dim);
  for (auto& p : points_) {
    if (!(p.a >= 0.0) || !std::isfinite(p.a)) {
      throw std::invalid_argument("configuration point has negative or non-finite age");
    }
    if (!std::isfinite(p.x[0]) || !std::isfinite(p.x[1])) {
      throw std::invalid_argument("configuration point has non-finite position");
    }
    if (dim == 1 && p.x[1] != 0.0) {
      throw std::invalid_argument("unused coordinate must be zero in a one-dimensional configuration");
    }
  }
  std::sort(points_.begin(), points_.end(),
            [](const MarkedPoint& p, const MarkedPoint& q) { return position_less(p.x, q.x); });
  for (std::size_t i = 1; i < points_.size(); ++i) {
    if (points_[i - 1].x == points_[i].x) {
      throw std::invalid_argument("two entities share the location " + describe(points_[i].x, dim));
    }
  }
}

FiniteConfiguration FiniteConfiguration::merged(const FiniteConfiguration& other) const {
  if (other.empty()) return *this;
  if (empty()) return other;
  if (other.dim_ != dim_) throw std::invalid_argument("cannot merge configurations of different dimension");
  std::vector<MarkedPoint> all(points_);
  all.insert(all.end(), other.points_.begin(), other.points_.end());
  return FiniteConfiguration(dim_, std::move(all));
}

double f_theta(const FiniteConfiguration& config, const Observable& theta) {
  double product = 1.0;
  for (const auto& p : config.points()) product *= 1.0 + theta(p.x, p.a);
  return product;
}

}  // namespace agepop
