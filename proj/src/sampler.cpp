#include "agepop/sampler.hpp"

#include <cmath>
#include <exception>
#include <ostream>
#include <random>
#include <stdexcept>

#include <spdlog/spdlog.h>

#include "agepop/quadrature.hpp"
#include "agepop/report.hpp"

namespace agepop {

std::uint64_t mix64(std::uint64_t z) {
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

namespace {

constexpr std::uint64_t kGamma = 0x9e3779b97f4a7c15ULL;

template <class... Ts>
struct overloaded : Ts... {
  using Ts::operator()...;
};
template <class... Ts>
overloaded(Ts...) -> overloaded<Ts...>;

long poisson_count(double mean, CounterRng& rng) {
  if (!(mean > 0.0)) return 0;
  std::poisson_distribution<long> dist(mean);
  return dist(rng);
}

Position uniform_position(const Window& window, CounterRng& rng) {
  Position x{};
  for (int k = 0; k < window.dim(); ++k) {
    x[k] = window.lower()[k] + (window.upper()[k] - window.lower()[k]) * rng.uniform();
  }
  return x;
}

void sample_poisson_points(const IntensityKernel& rho, const Window& window, CounterRng& rng,
                           std::vector<MarkedPoint>& out) {
  const double bound = rho.bound();
  const long n = poisson_count(bound * window.volume() * rho.support(), rng);
  for (long i = 0; i < n; ++i) {
    const Position x = uniform_position(window, rng);
    const double a = rho.support() * rng.uniform();
    const double value = rho(x, a);
    if (value > bound * (1.0 + 1e-12)) {
      throw std::runtime_error("intensity '" + rho.label() + "' exceeds its declared bound at a sampled point");
    }
    if (rng.uniform() * bound < value) out.push_back({x, a});
  }
}

void sample_state(const State& state, const RateModel& rate, const Window& window, double t, CounterRng& rng,
                  std::vector<MarkedPoint>& out) {
  std::visit(overloaded{
                 [](const EmptyState&) {},
                 [&](const PoissonState& s) {
                   std::vector<MarkedPoint> initial;
                   sample_poisson_points(s.rho, window, rng, initial);
                   for (const auto& p : initial) {
                     if (sample_lifetime_survival(rate, p.x, p.a, t, rng)) out.push_back({p.x, p.a + t});
                   }
                 },
                 [&](const DeterministicState& s) {
                   for (std::size_t i = 0; i < s.config.size(); ++i) {
                     const auto& p = s.config[i];
                     const double keep = s.retention(i);
                     if (keep < 1.0 && !(rng.uniform() < keep)) continue;
                     if (sample_lifetime_survival(rate, p.x, p.a, t, rng)) out.push_back({p.x, p.a + t});
                   }
                 },
                 [&](const ConvolutionState& s) {
                   for (const auto& part : s.parts) sample_state(part, rate, window, t, rng, out);
                 },
             },
             state.variant());
}

SnapshotBatch batch_header(const State& init, const RateModel& rate, double t, const RngSpec& rng,
                           std::size_t replicas) {
  if (!(t >= 0.0)) throw std::invalid_argument("snapshot time must be >= 0");
  SnapshotBatch batch;
  batch.replicas.resize(replicas);
  batch.t = t;
  batch.seed = rng.master_seed;
  batch.model_fingerprint = rate.fingerprint();
  batch.init_fingerprint = init.fingerprint();
  return batch;
}

void log_acceptance(const RateModel& rate, const Window& window) {
  if (rate.b_star() <= 0.0) return;
  QuadratureSpec spec;
  const double mass = integrate_window_serial(window, spec, [&](const Position& x) { return rate.b(x); });
  spdlog::debug("immigrant position acceptance {:.6f} against b* = {}", mass / (rate.b_star() * window.volume()),
                rate.b_star());
}

}  // namespace

CounterRng::CounterRng(std::uint64_t master_seed, std::uint64_t stream)
    : key_(mix64(mix64(master_seed) ^ mix64(stream + kGamma))) {}

CounterRng::result_type CounterRng::operator()() {
  ++counter_;
  return mix64(key_ + counter_ * kGamma);
}

FiniteConfiguration sample_poisson_config(const IntensityKernel& rho, const Window& window, CounterRng& rng) {
  std::vector<MarkedPoint> pts;
  sample_poisson_points(rho, window, rng, pts);
  return FiniteConfiguration(window.dim(), std::move(pts));
}

bool sample_lifetime_survival(const RateModel& rate, const Position& x, double a0, double t, CounterRng& rng) {
  if (!(t >= 0.0)) throw std::invalid_argument("survival horizon must be >= 0");
  const double hazard = rate.cumulative_hazard(x, a0, a0 + t);
  if (hazard == 0.0) return true;
  const double e = -std::log1p(-rng.uniform());
  return e > hazard;
}

FiniteConfiguration simulate_snapshot(const State& init, const RateModel& rate, const Window& window, double t,
                                      CounterRng& rng) {
  if (!(t >= 0.0)) throw std::invalid_argument("snapshot time must be >= 0");
  std::vector<MarkedPoint> pts;
  sample_state(init, rate, window, t, rng, pts);
  const double b_star = rate.b_star();
  if (t > 0.0 && b_star > 0.0) {
    // Arrivals form a Poisson process with rate b* on window x [0, t);
    // keeping each with probability b(x) / b* leaves rate b(x).
    const long candidates = poisson_count(b_star * window.volume() * t, rng);
    for (long i = 0; i < candidates; ++i) {
      const Position x = uniform_position(window, rng);
      const double age = t * rng.uniform();
      if (!(rng.uniform() * b_star < rate.b(x))) continue;
      if (sample_lifetime_survival(rate, x, 0.0, age, rng)) pts.push_back({x, age});
    }
  }
  try {
    return FiniteConfiguration(window.dim(), std::move(pts));
  } catch (const std::invalid_argument& e) {
    throw std::runtime_error(std::string("sampled configuration is invalid (RNG collision?): ") + e.what());
  }
}

FiniteConfiguration thin_configuration(const FiniteConfiguration& config, const Observable& q, CounterRng& rng) {
  std::vector<MarkedPoint> kept;
  for (const auto& p : config.points()) {
    if (rng.uniform() < q(p.x, p.a)) kept.push_back(p);
  }
  return FiniteConfiguration(config.dim(), std::move(kept));
}

SnapshotBatch simulate_batch(const State& init, const RateModel& rate, const Window& window, double t,
                             const RngSpec& rng, std::size_t replicas, int workers) {
  SnapshotBatch batch = batch_header(init, rate, t, rng, replicas);
  log_acceptance(rate, window);
  const long n = static_cast<long>(replicas);
  const int threads = std::max(1, workers);
  std::exception_ptr failure;
#pragma omp parallel for num_threads(threads) schedule(static) if (threads > 1)
  for (long i = 0; i < n; ++i) {
    try {
      CounterRng stream = rng.replica(static_cast<std::uint64_t>(i));
      batch.replicas[i] = simulate_snapshot(init, rate, window, t, stream);
    } catch (...) {
#pragma omp critical(agepop_batch_failure)
      if (!failure) failure = std::current_exception();
    }
  }
  if (failure) std::rethrow_exception(failure);
  return batch;
}

SnapshotBatch simulate_batch_serial(const State& init, const RateModel& rate, const Window& window, double t,
                                    const RngSpec& rng, std::size_t replicas) {
  SnapshotBatch batch = batch_header(init, rate, t, rng, replicas);
  for (std::size_t i = 0; i < replicas; ++i) {
    CounterRng stream = rng.replica(i);
    batch.replicas[i] = simulate_snapshot(init, rate, window, t, stream);
  }
  return batch;
}

void write_batch_csv(const SnapshotBatch& batch, int dim, std::ostream& out) {
  out << (dim == 2 ? "replica,x1,x2,age\n" : "replica,x1,age\n");
  for (std::size_t r = 0; r < batch.replicas.size(); ++r) {
    for (const auto& p : batch.replicas[r].points()) {
      out << r << ',' << format_real(p.x[0]);
      if (dim == 2) out << ',' << format_real(p.x[1]);
      out << ',' << format_real(p.a) << '\n';
    }
  }
}

}  // namespace agepop
