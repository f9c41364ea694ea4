#pragma once

#include <vector>

#include "agepop/sampler.hpp"

namespace agepop {

/// Histogram over the first spatial axis of the window and ages [0, a_hi).
/// In two dimensions each bin spans the full second axis.
struct DensityBins {
  int x_bins = 10;
  int a_bins = 40;
  double a_hi = 4.0;
};

struct DensityCell {
  int bin_x = 0;
  int bin_a = 0;
  Window cell;     // spatial extent of the bin, with a_max = bin age width
  double a_lo = 0.0;
  double a_hi = 0.0;
  double volume = 0.0;  // spatial volume x age width
  double mean = 0.0;    // mean count per unit volume
  double se = 0.0;
};

/// Cells ordered by bin_x, then bin_a. Needs >= 2 replicas.
std::vector<DensityCell> estimate_density(const SnapshotBatch& batch, const Window& window, const DensityBins& bins);

struct MeanSe {
  double mean = 0.0;
  double se = 0.0;
};

/// Replica average of f_theta with its standard error. Needs >= 2 replicas.
MeanSe estimate_functional(const SnapshotBatch& batch, const Observable& theta);

struct CountTail {
  double mean = 0.0;
  double se = 0.0;
  std::size_t max = 0;
};

/// Counts of points whose location lies in sub. Needs >= 1 replica; the
/// standard error is 0 for a single replica.
CountTail estimate_count_tail(const SnapshotBatch& batch, const Window& sub);

}  // namespace agepop
