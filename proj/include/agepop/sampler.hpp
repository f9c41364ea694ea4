#pragma once

#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

#include "agepop/intensity.hpp"
#include "agepop/rate_model.hpp"
#include "agepop/rng.hpp"
#include "agepop/state.hpp"
#include "agepop/types.hpp"

namespace agepop {

/// Poisson configuration with intensity rho on window x [0, rho.support()),
/// drawn by thinning a homogeneous process at rate rho.bound(). Throws
/// std::runtime_error when rho exceeds its declared bound at a candidate.
FiniteConfiguration sample_poisson_config(const IntensityKernel& rho, const Window& window, CounterRng& rng);

/// Survival of an entity at x from age a0 over a further time t: true iff a
/// standard exponential exceeds M(x; a0, a0 + t).
bool sample_lifetime_survival(const RateModel& rate, const Position& x, double a0, double t, CounterRng& rng);

/// Exact snapshot of the population in the window at time t: survivors of
/// the initial state aged by t, superposed with immigrants that arrived
/// uniformly in [0, t) and survived their own hazard.
FiniteConfiguration simulate_snapshot(const State& init, const RateModel& rate, const Window& window, double t,
                                      CounterRng& rng);

/// Keeps each point independently with probability q(x, a).
FiniteConfiguration thin_configuration(const FiniteConfiguration& config, const Observable& q, CounterRng& rng);

struct SnapshotBatch {
  std::vector<FiniteConfiguration> replicas;
  double t = 0.0;
  std::uint64_t seed = 0;
  std::string model_fingerprint;
  std::string init_fingerprint;

  friend bool operator==(const SnapshotBatch&, const SnapshotBatch&) = default;
};

/// Replica i uses substream i of the seed; replicas are spread over up to
/// `workers` OpenMP threads. Output is identical for every worker count.
SnapshotBatch simulate_batch(const State& init, const RateModel& rate, const Window& window, double t,
                             const RngSpec& rng, std::size_t replicas, int workers);

/// Single-threaded reference for simulate_batch.
SnapshotBatch simulate_batch_serial(const State& init, const RateModel& rate, const Window& window, double t,
                                    const RngSpec& rng, std::size_t replicas);

/// CSV point list: header `replica,x1[,x2],age`, one row per point, rows
/// ordered by replica and then by position.
void write_batch_csv(const SnapshotBatch& batch, int dim, std::ostream& out);

}  // namespace agepop
