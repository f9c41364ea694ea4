#include "agepop/estimators.hpp"

#include <cmath>
#include <cstdint>
#include <stdexcept>

#include "agepop/quadrature.hpp"

namespace agepop {

namespace {

void require_replicas(const SnapshotBatch& batch, std::size_t n, const char* what) {
  if (batch.replicas.size() < n) {
    throw std::invalid_argument(std::string(what) + " needs at least " + std::to_string(n) + " replicas");
  }
}

// Mean and standard error of integer counts from exact integer moments.
MeanSe count_moments(std::uint64_t sum, std::uint64_t sum_sq, std::size_t n) {
  const double r = static_cast<double>(n);
  const double mean = static_cast<double>(sum) / r;
  if (n < 2) return {mean, 0.0};
  const double var = (static_cast<double>(sum_sq) - r * mean * mean) / (r - 1.0);
  return {mean, std::sqrt(std::max(var, 0.0) / r)};
}

}  // namespace

std::vector<DensityCell> estimate_density(const SnapshotBatch& batch, const Window& window, const DensityBins& bins) {
  require_replicas(batch, 2, "density estimation");
  if (bins.x_bins < 1 || bins.a_bins < 1 || !(bins.a_hi > 0.0)) throw std::invalid_argument("invalid density bins");

  const double x_lo = window.lower()[0];
  const double x_width = (window.upper()[0] - x_lo) / bins.x_bins;
  const double a_width = bins.a_hi / bins.a_bins;
  const std::size_t cells = static_cast<std::size_t>(bins.x_bins) * bins.a_bins;

  std::vector<std::uint64_t> sum(cells, 0), sum_sq(cells, 0), local(cells, 0);
  std::vector<std::size_t> touched;
  for (const auto& config : batch.replicas) {
    touched.clear();
    for (const auto& p : config.points()) {
      if (!window.contains(p.x) || p.a >= bins.a_hi) continue;
      const int ix = std::min(bins.x_bins - 1, static_cast<int>((p.x[0] - x_lo) / x_width));
      const int ia = std::min(bins.a_bins - 1, static_cast<int>(p.a / a_width));
      const std::size_t c = static_cast<std::size_t>(ix) * bins.a_bins + ia;
      if (local[c]++ == 0) touched.push_back(c);
    }
    for (std::size_t c : touched) {
      sum[c] += local[c];
      sum_sq[c] += local[c] * local[c];
      local[c] = 0;
    }
  }

  std::vector<DensityCell> out;
  out.reserve(cells);
  for (int ix = 0; ix < bins.x_bins; ++ix) {
    Position lo = window.lower();
    Position hi = window.upper();
    lo[0] = x_lo + ix * x_width;
    hi[0] = ix + 1 == bins.x_bins ? window.upper()[0] : x_lo + (ix + 1) * x_width;
    for (int ia = 0; ia < bins.a_bins; ++ia) {
      DensityCell cell{ix, ia, Window(window.dim(), lo, hi, a_width), ia * a_width, (ia + 1) * a_width, 0.0, 0.0, 0.0};
      cell.volume = cell.cell.volume() * a_width;
      const std::size_t c = static_cast<std::size_t>(ix) * bins.a_bins + ia;
      const MeanSe m = count_moments(sum[c], sum_sq[c], batch.replicas.size());
      cell.mean = m.mean / cell.volume;
      cell.se = m.se / cell.volume;
      out.push_back(cell);
    }
  }
  return out;
}

MeanSe estimate_functional(const SnapshotBatch& batch, const Observable& theta) {
  require_replicas(batch, 2, "functional estimation");
  const std::size_t n = batch.replicas.size();
  std::vector<double> values(n);
  for (std::size_t i = 0; i < n; ++i) values[i] = f_theta(batch.replicas[i], theta);
  const double mean = pairwise_sum(values) / static_cast<double>(n);
  for (double& v : values) v = (v - mean) * (v - mean);
  const double var = pairwise_sum(values) / static_cast<double>(n - 1);
  return {mean, std::sqrt(var / static_cast<double>(n))};
}

CountTail estimate_count_tail(const SnapshotBatch& batch, const Window& sub) {
  require_replicas(batch, 1, "count estimation");
  std::uint64_t sum = 0, sum_sq = 0;
  std::size_t max = 0;
  for (const auto& config : batch.replicas) {
    std::size_t count = 0;
    for (const auto& p : config.points()) count += sub.contains(p.x) ? 1 : 0;
    sum += count;
    sum_sq += count * count;
    max = std::max(max, count);
  }
  const MeanSe m = count_moments(sum, sum_sq, batch.replicas.size());
  return {m.mean, m.se, max};
}

}  // namespace agepop
