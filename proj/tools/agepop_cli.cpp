#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <optional>
#include <string>

#include <CLI11.hpp>
#include <spdlog/spdlog.h>

#include "agepop/config.hpp"
#include "agepop/experiments.hpp"
#include "agepop/sampler.hpp"

namespace {

struct Options {
  std::string config;
  std::optional<std::uint64_t> seed;
  std::optional<std::size_t> replicas;
  std::optional<std::string> out;
  int workers = 1;
};

void add_common(CLI::App* cmd, Options& opt) {
  cmd->add_option("--config", opt.config, "experiment config file")->required()->check(CLI::ExistingFile);
  cmd->add_option("--seed", opt.seed, "override the master seed");
  cmd->add_option("--replicas", opt.replicas, "override the replica count")->check(CLI::Range(std::size_t{2}, SIZE_MAX));
  cmd->add_option("--out", opt.out, "output directory (default: output_dir from the config)");
  cmd->add_option("--workers", opt.workers, "OpenMP threads; does not change any output")->check(CLI::PositiveNumber);
}

agepop::Report simulate(const agepop::ExperimentConfig& cfg, int workers, const std::filesystem::path& out) {
  agepop::Report report = agepop::run_density_match(cfg, workers);
  report.name = "simulate";
  report.append(agepop::run_functional_match(cfg, workers));
  if (cfg.write_points) {
    const auto& init = cfg.inits.front();
    const double t = cfg.times.back();
    const auto batch = agepop::simulate_batch(init.state, cfg.model, cfg.window, t, agepop::RngSpec{cfg.seed},
                                              cfg.replicas, workers);
    std::filesystem::create_directories(out);
    std::ofstream file(out / "points.csv", std::ios::binary);
    agepop::write_batch_csv(batch, cfg.dim, file);
  }
  return report;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Age-structured migrant population: closed-form evolution and exact sampling"};
  app.require_subcommand(1);
  bool verbose = false;
  app.add_flag("-v,--verbose", verbose, "debug logging");

  Options opt;
  using Runner = std::function<agepop::Report(const agepop::ExperimentConfig&, int, const std::filesystem::path&)>;
  std::vector<std::pair<CLI::App*, Runner>> commands;
  const auto add = [&](const char* name, const char* help, Runner run) {
    CLI::App* cmd = app.add_subcommand(name, help);
    add_common(cmd, opt);
    commands.emplace_back(cmd, std::move(run));
  };
  add("simulate", "sample snapshots; density and functional agreement", simulate);
  add("analytic", "tabulate mu_t(F_theta) and mu_t(L F_theta)",
      [](const auto& cfg, int w, const auto&) { return agepop::run_analytic(cfg, w); });
  add("verify-fpe", "Fokker-Planck residuals and stationarity",
      [](const auto& cfg, int w, const auto&) { return agepop::run_fpe_residual(cfg, w); });
  add("convergence", "decay of the first-order kernel gap",
      [](const auto& cfg, int w, const auto&) { return agepop::run_convergence(cfg, w); });
  add("identities", "Minlos, convolution, thinning, cocycle and flow identities",
      [](const auto& cfg, int w, const auto&) { return agepop::run_identity_suite(cfg, w); });

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 1;
  }
  spdlog::set_level(verbose ? spdlog::level::debug : spdlog::level::info);

  try {
    agepop::ExperimentConfig cfg = agepop::load_config(opt.config);
    if (opt.seed) cfg.seed = *opt.seed;
    if (opt.replicas) cfg.replicas = *opt.replicas;
    const std::filesystem::path out = opt.out.value_or(cfg.output_dir);

    for (const auto& [cmd, run] : commands) {
      if (!cmd->parsed()) continue;
      agepop::Report report = run(cfg, opt.workers, out);
      report.write(out);
      report.write_runtime(out);
      for (const auto& c : report.checks) {
        std::printf("%-60s %-5s observed=%s tolerance=%s\n", c.check.c_str(), c.pass ? "PASS" : "FAIL",
                    agepop::format_real(c.observed).c_str(), agepop::format_real(c.tolerance).c_str());
      }
      spdlog::info("{} finished in {:.2f} s; results in {}", cmd->get_name(), report.runtime_seconds, out.string());
      return report.all_pass() ? 0 : 2;
    }
  } catch (const std::exception& e) {
    spdlog::error("{}", e.what());
    return 1;
  }
  return 1;
}
