#include <chrono>
#include <cstdio>
#include <filesystem>
#include <string>
#include <vector>

#include "agepop/experiments.hpp"
#include "agepop/sampler.hpp"

using namespace agepop;

namespace {

struct Line {
  int id;
  std::string title;
  bool pass;
  std::string detail;
};

double seconds_since(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

// Checks of a report whose names start with any of the prefixes.
bool checks_pass(const Report& r, const std::vector<std::string>& prefixes, std::string& detail) {
  bool ok = true;
  bool any = false;
  for (const auto& c : r.checks) {
    bool match = false;
    for (const auto& p : prefixes) match = match || c.check.rfind(p, 0) == 0;
    if (!match) continue;
    any = true;
    if (!c.pass) {
      ok = false;
      detail += " [" + c.check + " observed=" + format_real(c.observed) + " tol=" + format_real(c.tolerance) + "]";
    }
  }
  if (!any) {
    detail += " [no matching checks]";
    return false;
  }
  return ok;
}

std::string observed(const Report& r, const std::string& name) {
  for (const auto& c : r.checks) {
    if (c.check == name) return format_real(c.observed);
  }
  return "missing";
}

}  // namespace

int main() {
  const std::filesystem::path out = "acceptance_out";
  const ExperimentConfig ref = reference_config();
  std::vector<Line> lines;

  {
    ExperimentConfig cfg = ref;
    cfg.inits = {ref.inits.front()};
    cfg.times = {4.0};
    const auto t0 = std::chrono::steady_clock::now();
    const Report r = run_density_match(cfg, 1);
    const double secs = seconds_since(t0);
    r.write(out / "density");
    std::string detail = "outside2se=" + observed(r, "density.fraction_outside_2se") +
                         " outside4se=" + observed(r, "density.fraction_outside_4se") +
                         " total_z=" + observed(r, "density.total_count_z") + " runtime=" + format_real(secs) + "s";
    bool ok = checks_pass(r, {"density."}, detail);
    if (secs > 60.0) {
      ok = false;
      detail += " [runtime above 60 s]";
    }
    lines.push_back({1, "density match", ok, detail});
  }

  Report fpe;
  {
    const auto t0 = std::chrono::steady_clock::now();
    fpe = run_fpe_residual(ref, 1);
    const double secs = seconds_since(t0);
    fpe.write(out / "fpe");
    std::string detail = "runtime=" + format_real(secs) + "s";
    for (const auto& init : ref.inits) {
      detail += " " + init.name + "=" + observed(fpe, "fpe." + init.name + ".max_scaled_residual");
    }
    bool ok = checks_pass(fpe, {"fpe."}, detail);
    if (secs > 30.0) {
      ok = false;
      detail += " [runtime above 30 s]";
    }
    lines.push_back({2, "Fokker-Planck residual", ok, detail});
  }
  {
    std::string detail = "max|L|=" + observed(fpe, "stationarity.max_abs_l");
    lines.push_back({3, "stationarity", checks_pass(fpe, {"stationarity."}, detail), detail});
  }

  const Report ids = run_identity_suite(ref, 1);
  ids.write(out / "identities");
  {
    std::string detail = "max_rel=" + observed(ids, "flow.chapman_kolmogorov");
    lines.push_back({4, "Chapman-Kolmogorov flow", checks_pass(ids, {"flow."}, detail), detail});
  }
  {
    const Report r = run_convergence(ref, 1);
    r.write(out / "convergence");
    std::string detail;
    for (const auto& c : r.checks) {
      if (c.check.find("fit_rate") != std::string::npos || c.check.find("gap_over_bound") != std::string::npos) {
        detail += c.check + "=" + format_real(c.observed) + " ";
      }
    }
    lines.push_back({5, "convergence to the stationary kernel", checks_pass(r, {"convergence."}, detail), detail});
  }
  {
    std::string detail = "minlos=" + observed(ids, "minlos.product") +
                         " enumeration=" + observed(ids, "minlos.tabulated_enumeration") +
                         " poisson_sum=" + observed(ids, "convolution.poisson_sum") +
                         " thinning=" + observed(ids, "thinning.analytic") +
                         " chi2=" + observed(ids, "thinning.chi_square") + " cocycle=" + observed(ids, "theta.cocycle");
    const bool ok = checks_pass(ids, {"minlos.", "convolution.", "thinning.", "theta."}, detail);
    lines.push_back({6, "identities", ok, detail});
  }
  {
    std::string detail = "max_rel=" + observed(ids, "lebesgue_poisson.exponential");
    lines.push_back({7, "Lebesgue-Poisson exponential", checks_pass(ids, {"lebesgue_poisson."}, detail), detail});
  }
  {
    const Report r = run_functional_match(ref, 1);
    r.write(out / "functional");
    std::string detail;
    double worst = 0.0;
    for (const auto& c : r.checks) {
      if (c.check.rfind("functional.", 0) == 0) worst = std::max(worst, c.observed);
    }
    detail = "max_z=" + format_real(worst);
    bool ok = checks_pass(r, {"functional.", "counts."}, detail);
    bool identical = true;
    for (const auto& init : ref.inits) {
      const SnapshotBatch base =
          simulate_batch(init.state, ref.model, ref.window, 4.0, RngSpec{ref.seed}, ref.replicas, 1);
      for (int workers : {4, 8}) {
        identical = identical &&
                    simulate_batch(init.state, ref.model, ref.window, 4.0, RngSpec{ref.seed}, ref.replicas, workers) == base;
      }
    }
    detail += identical ? " batches identical for 1/4/8 workers" : " [batches differ across worker counts]";
    lines.push_back({8, "sampler vs analytic functionals", ok && identical, detail});
  }

  bool all = true;
  for (const auto& l : lines) {
    std::printf("criterion %d %s: %s  %s\n", l.id, l.pass ? "PASS" : "FAIL", l.title.c_str(), l.detail.c_str());
    all = all && l.pass;
  }
  std::fflush(stdout);
  return all ? 0 : 1;
}
