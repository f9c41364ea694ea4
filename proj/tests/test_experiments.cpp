#include <stdexcept>
#include <doctest.h>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "agepop/experiments.hpp"

using namespace agepop;

namespace {

ExperimentConfig small_config() {
  ExperimentConfig cfg = reference_config();
  cfg.replicas = 2000;
  return cfg;
}

std::string slurp(const std::filesystem::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

}  // namespace

TEST_CASE("finite differences") {
  const auto f = [](double t) { return std::exp(-0.7 * t) * std::sin(t); };
  const auto df = [](double t) { return std::exp(-0.7 * t) * (std::cos(t) - 0.7 * std::sin(t)); };
  for (double t : {0.0, 0.001, 0.25, 1.0, 4.0}) {
    const Derivative d = fpe_derivative(f, t, 1e-3, 1e-5);
    CHECK(d.value == doctest::Approx(df(t)).epsilon(1e-9));
    CHECK(d.method == (t >= 2e-3 ? "central4" : "forward4"));
  }
  // A tight tolerance forces the Richardson fallback.
  const Derivative r = fpe_derivative([](double t) { return std::exp(50.0 * t); }, 0.1, 1e-3, 1e-12);
  CHECK(r.method == "richardson");
  CHECK(r.value == doctest::Approx(50.0 * std::exp(5.0)).epsilon(1e-8));
  CHECK_THROWS_AS(fpe_derivative(f, 1.0, 0.0, 1e-5), std::invalid_argument);
}

TEST_CASE("chi-square test and decay fit") {
  std::vector<std::size_t> counts;
  for (int i = 0; i < 370; ++i) counts.push_back(0);
  for (int i = 0; i < 370; ++i) counts.push_back(1);
  for (int i = 0; i < 180; ++i) counts.push_back(2);
  for (int i = 0; i < 60; ++i) counts.push_back(3);
  for (int i = 0; i < 20; ++i) counts.push_back(4);
  const ChiSquare good = poisson_chi_square(counts, 1.0);
  CHECK(good.statistic < good.critical);
  CHECK(good.p_value > 0.01);
  const ChiSquare bad = poisson_chi_square(counts, 2.0);
  CHECK(bad.statistic > bad.critical);
  CHECK_THROWS_AS(poisson_chi_square({}, 1.0), std::invalid_argument);

  const std::vector<double> t{1, 2, 3, 4, 5};
  std::vector<double> v;
  for (double s : t) v.push_back(3.0 * std::exp(-0.8 * s));
  CHECK(fitted_decay_rate(t, v) == doctest::Approx(0.8).epsilon(1e-12));
  CHECK_THROWS_AS(fitted_decay_rate({1, 2, 3}, {1, 0.5, 0.25}), std::invalid_argument);
}

TEST_CASE("expected counts and kernels of catalogue states") {
  const ExperimentConfig cfg = reference_config();
  const QuadratureSpec spec;
  const State mu = solution_state(State::empty(), cfg.model, 4.0);
  CHECK(expected_count(mu, cfg.window, 0.0, 100.0, spec) == doctest::Approx(1.0 - std::exp(-4.0)).epsilon(1e-13));
  const State det = State::deterministic(FiniteConfiguration(1, {{{0.25, 0.0}, 0.0}, {{0.75, 0.0}, 1.5}}));
  CHECK(expected_count(det, cfg.window, 0.0, 1.0, spec) == 1.0);
  CHECK(kernel_of(cfg.inits[0].state, 3).has_value());
  CHECK(kernel_of(cfg.inits[1].state, 3).has_value());
  CHECK_FALSE(kernel_of(cfg.inits[2].state, 3).has_value());
  CHECK_FALSE(kernel_of(cfg.inits[3].state, 3).has_value());
}

TEST_CASE("Fokker-Planck at t = 0 for the empty state") {
  ExperimentConfig cfg = reference_config();
  cfg.inits = {{"empty", State::empty()}};
  cfg.times = {0.0};
  cfg.theta_suite = {ThetaObservable(VarthetaProfile::constant(-0.5, cfg.window), 0.0, TemperingWeight::exponential(1)),
                     ThetaObservable(VarthetaProfile::zero(), 0.0, TemperingWeight::exponential(1))};
  const Report r = run_fpe_residual(cfg, 1);
  CHECK(r.all_pass());
  const auto& rows = r.tables.front().second.rows();
  REQUIRE(rows.size() == 2);
  CHECK(std::get<double>(rows[0][3]) == doctest::Approx(-0.5).epsilon(1e-8));
  CHECK(std::get<double>(rows[0][4]) == doctest::Approx(-0.5).epsilon(1e-12));
  CHECK(std::get<double>(rows[1][5]) == 0.0);
}

TEST_CASE("stationary init: zero generator, zero gap") {
  ExperimentConfig cfg = reference_config();
  cfg.inits = {{"stationary", State::poisson(stationary_intensity(cfg.model, cfg.window.a_max()))}};
  const Report fpe = run_fpe_residual(cfg, 1);
  CHECK(fpe.all_pass());
  for (const auto& row : fpe.tables.front().second.rows()) {
    CHECK(std::abs(std::get<double>(row[3])) <= 1e-8);
    CHECK(std::abs(std::get<double>(row[4])) <= 1e-8);
  }
  const Report conv = run_convergence(cfg, 1);
  CHECK(conv.all_pass());
  for (const auto& row : conv.tables.front().second.rows()) CHECK(std::get<double>(row[2]) <= 1e-12);
}

TEST_CASE("convergence on the empty init decays at rate m_*") {
  ExperimentConfig cfg = reference_config();
  cfg.inits = {{"empty", State::empty()}};
  const Report r = run_convergence(cfg, 1);
  CHECK(r.all_pass());
  const auto& rows = r.tables.front().second.rows();
  REQUIRE(rows.size() == cfg.convergence_times.size());
  // t = 0: the gap is |b_hat|_1 = 1 against the bound 3 kappa* = 3.
  CHECK(std::get<double>(rows[0][2]) == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(std::get<double>(rows[0][3]) == doctest::Approx(3.0));
  cfg.convergence_times = {1, 2, 3};
  CHECK_THROWS_AS(run_convergence(cfg, 1), std::invalid_argument);
  cfg.model = RateModel::constant(1.0, 0.0);
  CHECK_THROWS_AS(run_convergence(cfg, 1), std::invalid_argument);
}

TEST_CASE("density match with no arrivals is all zero and passes") {
  ExperimentConfig cfg = small_config();
  cfg.model = RateModel::constant(0.0, 1.0);
  cfg.inits = {{"empty", State::empty()}};
  const Report r = run_density_match(cfg, 1);
  CHECK(r.all_pass());
  for (const auto& row : r.tables.front().second.rows()) {
    CHECK(std::get<double>(row[2]) == 0.0);
    CHECK(std::get<double>(row[3]) == 0.0);
  }
}

TEST_CASE("reports are reproducible and independent of the worker count") {
  ExperimentConfig cfg = small_config();
  cfg.times = {0.25, 1.0};
  const auto dir = std::filesystem::temp_directory_path() / "agepop_report_test";
  std::filesystem::remove_all(dir);
  run_functional_match(cfg, 1).write(dir / "a");
  run_functional_match(cfg, 4).write(dir / "b");
  for (const char* f : {"functional.csv", "counts.csv", "summary.csv"}) {
    const std::string a = slurp(dir / "a" / f);
    CHECK(!a.empty());
    CHECK(a == slurp(dir / "b" / f));
  }
  CHECK(slurp(dir / "a" / "summary.csv").rfind("check,observed,tolerance,pass\n", 0) == 0);
  std::filesystem::remove_all(dir);
}

TEST_CASE("summary pass flags follow observed <= tolerance") {
  CHECK(check_le("a", 1.0, 1.0).pass);
  CHECK_FALSE(check_le("b", 1.5, 1.0).pass);
  CHECK_FALSE(check_le("c", std::nan(""), 1.0).pass);
  CsvTable t({"x"});
  CHECK_THROWS_AS(t.add_row({std::numeric_limits<double>::infinity()}), std::invalid_argument);
  CHECK_THROWS_AS(t.add_row({1.0, 2.0}), std::invalid_argument);
}
