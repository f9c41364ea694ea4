#include "agepop/config.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <optional>
#include <sstream>

#include <spdlog/spdlog.h>

#include "agepop/intensity.hpp"
#include "agepop/tempering.hpp"

namespace agepop {

namespace {

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

std::vector<std::string> split(const std::string& s, char sep) {
  std::vector<std::string> out;
  std::string item;
  std::istringstream in(s);
  while (std::getline(in, item, sep)) out.push_back(trim(item));
  if (!s.empty() && s.back() == sep) out.emplace_back();
  return out;
}

double to_real(const std::string& s) {
  std::size_t used = 0;
  double v = 0.0;
  try {
    v = std::stod(s, &used);
  } catch (const std::exception&) {
    throw std::invalid_argument("'" + s + "' is not a number");
  }
  if (used != s.size() || !std::isfinite(v)) throw std::invalid_argument("'" + s + "' is not a finite number");
  return v;
}

long long to_integer(const std::string& s) {
  std::size_t used = 0;
  long long v = 0;
  try {
    v = std::stoll(s, &used);
  } catch (const std::exception&) {
    throw std::invalid_argument("'" + s + "' is not an integer");
  }
  if (used != s.size()) throw std::invalid_argument("'" + s + "' is not an integer");
  return v;
}

std::vector<double> to_reals(const std::string& s) {
  std::vector<double> out;
  for (const auto& item : split(s, ',')) out.push_back(to_real(item));
  return out;
}

Position to_position(const std::string& s, int dim) {
  const auto v = to_reals(s);
  if (static_cast<int>(v.size()) != dim) throw std::invalid_argument("expected " + std::to_string(dim) + " coordinates");
  Position p{};
  for (int k = 0; k < dim; ++k) p[k] = v[k];
  return p;
}

// name(k=v,k=v) or name(v)
struct Call {
  std::string name;
  std::vector<std::string> positional;
  std::map<std::string, std::string> named;
};

Call parse_call(const std::string& s) {
  Call c;
  const auto open = s.find('(');
  if (open == std::string::npos) {
    c.name = trim(s);
    return c;
  }
  if (s.back() != ')') throw std::invalid_argument("unbalanced parentheses in '" + s + "'");
  c.name = trim(s.substr(0, open));
  const std::string body = s.substr(open + 1, s.size() - open - 2);
  if (trim(body).empty()) return c;
  for (const auto& arg : split(body, ',')) {
    const auto eq = arg.find('=');
    if (eq == std::string::npos) {
      c.positional.push_back(arg);
    } else {
      c.named[trim(arg.substr(0, eq))] = trim(arg.substr(eq + 1));
    }
  }
  return c;
}

std::string take(Call& c, const std::string& key) {
  auto it = c.named.find(key);
  if (it == c.named.end()) throw std::invalid_argument(c.name + "(...) needs " + key + "=");
  std::string v = it->second;
  c.named.erase(it);
  return v;
}

void no_leftovers(const Call& c) {
  if (!c.positional.empty() || !c.named.empty()) throw std::invalid_argument("unexpected arguments to " + c.name);
}

IntensityKernel parse_intensity(const std::string& spec, const RateModel& rate, double a_max) {
  Call c = parse_call(spec);
  if (c.name == "stationary") {
    no_leftovers(c);
    return stationary_intensity(rate, a_max);
  }
  if (c.name == "exp") {
    const double amp = to_real(take(c, "c"));
    const double r = to_real(take(c, "rate"));
    no_leftovers(c);
    return exponential_intensity(rate, amp, r, a_max);
  }
  if (c.name == "uniform") {
    const double amp = to_real(take(c, "c"));
    no_leftovers(c);
    return exponential_intensity(rate, amp, 0.0, a_max);
  }
  throw std::invalid_argument("unknown intensity '" + c.name + "' (expected exp, uniform or stationary)");
}

// "x:age;x:age" in one dimension, "x1,x2:age;..." in two.
FiniteConfiguration parse_points(const std::string& spec, int dim) {
  std::vector<MarkedPoint> pts;
  for (const auto& item : split(spec, ';')) {
    if (item.empty()) continue;
    const auto colon = item.find(':');
    if (colon == std::string::npos) throw std::invalid_argument("point '" + item + "' needs the form x:age");
    pts.push_back({to_position(trim(item.substr(0, colon)), dim), to_real(trim(item.substr(colon + 1)))});
  }
  return FiniteConfiguration(dim, std::move(pts));
}

struct Entry {
  std::string value;
  int line;
  bool used = false;
};

class Entries {
 public:
  explicit Entries(std::string source) : source_(std::move(source)) {}

  void add(const std::string& key, std::string value, int line) {
    if (map_.count(key)) throw ConfigError(source_, line, "duplicate key '" + key + "'");
    map_.emplace(key, Entry{std::move(value), line});
  }

  bool has(const std::string& key) const { return map_.count(key) > 0; }

  template <class F>
  auto get(const std::string& key, F convert) -> std::optional<decltype(convert(std::string{}))> {
    auto it = map_.find(key);
    if (it == map_.end()) return std::nullopt;
    it->second.used = true;
    try {
      return convert(it->second.value);
    } catch (const ConfigError&) {
      throw;
    } catch (const std::exception& e) {
      throw ConfigError(source_, it->second.line, key + ": " + e.what());
    }
  }

  int line(const std::string& key) const {
    auto it = map_.find(key);
    return it == map_.end() ? 0 : it->second.line;
  }

  std::vector<std::string> keys_with_prefix(const std::string& prefix) const {
    std::vector<std::string> out;
    for (const auto& [k, e] : map_) {
      if (k.rfind(prefix, 0) == 0) out.push_back(k);
    }
    return out;
  }

  void reject_unused() const {
    const std::pair<const std::string, Entry>* first = nullptr;
    for (const auto& kv : map_) {
      if (!kv.second.used && (!first || kv.second.line < first->second.line)) first = &kv;
    }
    if (first) throw ConfigError(source_, first->second.line, "unknown key '" + first->first + "'");
  }

  const std::string& source() const { return source_; }

 private:
  std::string source_;
  std::map<std::string, Entry> map_;
};

const auto as_string = [](const std::string& s) { return s; };

RateModel build_model(Entries& e, int dim, const Window& window) {
  const std::string kind = e.get("model.kind", as_string).value_or("constant");
  const int kind_line = e.line("model.kind");
  std::optional<RateBounds> declared;
  const auto b_star = e.get("model.b_star", to_real);
  const auto m_up = e.get("model.m_star_up", to_real);
  const auto m_lo = e.get("model.m_star_lo", to_real);
  if (b_star || m_up || m_lo) {
    if (!(b_star && m_up && m_lo)) {
      throw ConfigError(e.source(), kind_line, "declared bounds need model.b_star, model.m_star_up and model.m_star_lo");
    }
    declared = RateBounds{*b_star, *m_up, *m_lo};
  }

  try {
    if (kind == "constant") {
      RateModel m = RateModel::constant(e.get("model.b", to_real).value_or(1.0), e.get("model.m", to_real).value_or(1.0));
      return declared ? m.with_declared_bounds(*declared) : m;
    }
    if (kind == "separable") {
      SeparableExponentialRates p;
      p.b0 = e.get("model.b0", to_real).value_or(p.b0);
      p.b_decay = e.get("model.b_decay", to_real).value_or(p.b_decay);
      p.center = e.get("model.center", [dim](const std::string& s) { return to_position(s, dim); }).value_or(p.center);
      p.m0 = e.get("model.m0", to_real).value_or(p.m0);
      p.m_inf = e.get("model.m_inf", to_real).value_or(p.m_inf);
      p.m_decay = e.get("model.m_decay", to_real).value_or(p.m_decay);
      p.m_spatial = e.get("model.m_spatial", to_real).value_or(p.m_spatial);
      RateModel m = RateModel::separable_exponential(p, dim);
      return declared ? m.with_declared_bounds(*declared) : m;
    }
    if (kind == "tabulated") {
      if (!declared) throw std::invalid_argument("tabulated models need declared bounds");
      TabulatedRates t;
      t.dim = dim;
      t.lower = window.lower();
      t.upper = window.upper();
      t.x_nodes = static_cast<int>(e.get("model.x_nodes", to_integer).value_or(1));
      t.b = e.get("model.b_table", to_reals).value_or(std::vector<double>{});
      t.a_step = e.get("model.a_step", to_real).value_or(1.0);
      t.m = e.get("model.m_table", to_reals).value_or(std::vector<double>{});
      return RateModel::tabulated(std::move(t), *declared);
    }
  } catch (const ConfigError&) {
    throw;
  } catch (const std::exception& ex) {
    throw ConfigError(e.source(), kind_line, std::string("model: ") + ex.what());
  }
  throw ConfigError(e.source(), kind_line, "unknown model.kind '" + kind + "' (constant, separable, tabulated)");
}

}  // namespace

ConfigError::ConfigError(const std::string& source, int line, const std::string& message)
    : std::runtime_error(source + ":" + std::to_string(line) + ": " + message), line_(line) {}

VarthetaProfile parse_vartheta(const std::string& spec, const Window& window) {
  Call c = parse_call(spec);
  if (c.name == "zero") {
    no_leftovers(c);
    return VarthetaProfile::zero();
  }
  if (c.name == "const") {
    if (c.positional.size() != 1 || !c.named.empty()) throw std::invalid_argument("const(c) takes one value");
    return VarthetaProfile::constant(to_real(c.positional[0]), window);
  }
  if (c.name == "bump") {
    const int dim = window.dim();
    Position center{};
    const std::string cs = take(c, "center");
    // A single value places the centre at that coordinate on every axis.
    const auto cv = split(cs, ' ');
    if (cv.size() == 1) {
      for (int k = 0; k < dim; ++k) center[k] = to_real(cv[0]);
    } else {
      if (static_cast<int>(cv.size()) != dim) throw std::invalid_argument("bump center has the wrong dimension");
      for (int k = 0; k < dim; ++k) center[k] = to_real(cv[k]);
    }
    const double width = to_real(take(c, "width"));
    const double depth = to_real(take(c, "depth"));
    no_leftovers(c);
    return VarthetaProfile::bump(center, width, depth, dim);
  }
  throw std::invalid_argument("unknown vartheta '" + c.name + "' (expected zero, const or bump)");
}

std::vector<ThetaObservable> default_theta_suite(const Window& window) {
  const TemperingWeight psi = TemperingWeight::exponential(window.dim());
  const auto at = [&window](double u) {
    Position p{};
    for (int k = 0; k < window.dim(); ++k) p[k] = window.lower()[k] + u * (window.upper()[k] - window.lower()[k]);
    return p;
  };
  const double scale = window.upper()[0] - window.lower()[0];
  const int d = window.dim();
  return {
      ThetaObservable(VarthetaProfile::constant(0.0, window), 0.0, psi),
      ThetaObservable(VarthetaProfile::constant(-0.5, window), 0.0, psi),
      ThetaObservable(VarthetaProfile::constant(-0.2, window), 1.0, psi),
      ThetaObservable(VarthetaProfile::bump(at(0.5), 0.4 * scale, 0.5, d), 0.0, psi),
      ThetaObservable(VarthetaProfile::bump(at(0.3), 0.25 * scale, 0.9, d), 0.5, psi),
      ThetaObservable(VarthetaProfile::bump(at(0.7), 0.5 * scale, 0.3, d), 2.0, psi),
      ThetaObservable(VarthetaProfile::constant(0.0, window), 1.0, psi),
      ThetaObservable(VarthetaProfile::constant(-0.9, window), 0.25, psi),
      ThetaObservable(VarthetaProfile::bump(at(0.5), 1.0 * scale, 0.7, d), 1.0, psi),
      ThetaObservable(VarthetaProfile::constant(-0.3, window), 3.0, psi),
  };
}

std::vector<NamedState> init_catalogue(const RateModel& rate, const Window& window) {
  const auto at = [&window](double u) {
    Position p{};
    for (int k = 0; k < window.dim(); ++k) p[k] = window.lower()[k] + u * (window.upper()[k] - window.lower()[k]);
    return p;
  };
  const IntensityKernel rho0 = exponential_intensity(rate, 0.5, 2.0, window.a_max());
  const FiniteConfiguration pts(window.dim(), {{at(0.25), 0.0}, {at(0.75), 1.5}});
  return {
      {"empty", State::empty()},
      {"poisson", State::poisson(rho0)},
      {"deterministic", State::deterministic(pts)},
      {"convolution", State::convolution({State::poisson(rho0), State::deterministic(pts)})},
  };
}

ExperimentConfig reference_config() {
  ExperimentConfig cfg;
  cfg.inits = init_catalogue(cfg.model, cfg.window);
  cfg.times = {0.25, 1.0, 4.0};
  cfg.convergence_times = {0.0, 1.0, std::sqrt(2.0), 2.0, 2.0 * std::sqrt(2.0), 4.0, 4.0 * std::sqrt(2.0), 8.0};
  cfg.theta_suite = default_theta_suite(cfg.window);
  cfg.density = DensityBins{10, 40, 4.0};
  return cfg;
}

ExperimentConfig parse_config(std::istream& in, const std::string& source) {
  Entries e(source);
  std::string raw;
  int line_no = 0;
  while (std::getline(in, raw)) {
    ++line_no;
    const auto hash = raw.find('#');
    const std::string line = trim(hash == std::string::npos ? raw : raw.substr(0, hash));
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos) throw ConfigError(source, line_no, "expected 'key = value'");
    const std::string key = trim(line.substr(0, eq));
    if (key.empty()) throw ConfigError(source, line_no, "missing key");
    e.add(key, trim(line.substr(eq + 1)), line_no);
  }

  ExperimentConfig cfg;
  cfg.dim = static_cast<int>(e.get("dim", to_integer).value_or(1));
  if (cfg.dim != 1 && cfg.dim != 2) throw ConfigError(source, e.line("dim"), "dim must be 1 or 2");
  const int dim = cfg.dim;
  const auto pos = [dim](const std::string& s) { return to_position(s, dim); };
  const Position lower = e.get("window.lower", pos).value_or(Position{});
  const Position upper = e.get("window.upper", pos).value_or(dim == 1 ? Position{1.0, 0.0} : Position{1.0, 1.0});

  // The model is built on a provisional window; a_max depends on its bounds.
  Window provisional(dim, lower, upper, 1.0);
  try {
    provisional = Window(dim, lower, upper, 1.0);
  } catch (const std::exception& ex) {
    throw ConfigError(source, e.line("window.upper"), std::string("window: ") + ex.what());
  }
  cfg.model = build_model(e, dim, provisional);

  double a_max = 0.0;
  if (auto v = e.get("quadrature.a_max", to_real)) {
    a_max = *v;
    if (!(a_max > 0.0)) throw ConfigError(source, e.line("quadrature.a_max"), "quadrature.a_max must be positive");
  } else if (cfg.model.m_star_lo() > 0.0) {
    a_max = 40.0 / cfg.model.m_star_lo();
  } else {
    a_max = 200.0;
    spdlog::warn("m_* = 0: age truncation defaults to a_max = 200 and the tail is not bounded");
  }
  cfg.window = provisional.with_a_max(a_max);

  cfg.quadrature.x_nodes = static_cast<int>(e.get("quadrature.x_nodes", to_integer).value_or(cfg.quadrature.x_nodes));
  cfg.quadrature.a_nodes = static_cast<int>(e.get("quadrature.a_nodes", to_integer).value_or(cfg.quadrature.a_nodes));
  cfg.quadrature.n_max = static_cast<int>(e.get("quadrature.n_max", to_integer).value_or(cfg.quadrature.n_max));
  try {
    cfg.quadrature.validate();
    if (cfg.quadrature.n_max < 0) throw std::invalid_argument("quadrature.n_max must be >= 0");
  } catch (const std::exception& ex) {
    throw ConfigError(source, e.line("quadrature.x_nodes"), ex.what());
  }

  const std::string init_kind = e.get("init.kind", as_string).value_or("catalogue");
  const int init_line = e.line("init.kind");
  try {
    const auto rho = e.get("init.poisson", [&](const std::string& s) { return parse_intensity(s, cfg.model, a_max); });
    const auto pts = e.get("init.points", [dim](const std::string& s) { return parse_points(s, dim); });
    if (pts) {
      for (const auto& p : pts->points()) {
        if (!cfg.window.contains(p.x)) throw ConfigError(source, e.line("init.points"), "init.points must lie inside the window");
      }
    }
    const auto need = [&](bool ok, const char* what) {
      if (!ok) throw ConfigError(source, init_line, std::string("init.kind = ") + init_kind + " needs " + what);
    };
    if (init_kind == "catalogue") {
      cfg.inits = init_catalogue(cfg.model, cfg.window);
    } else if (init_kind == "empty") {
      cfg.inits = {{"empty", State::empty()}};
    } else if (init_kind == "poisson") {
      need(rho.has_value(), "init.poisson");
      cfg.inits = {{"poisson", State::poisson(*rho)}};
    } else if (init_kind == "deterministic") {
      need(pts.has_value(), "init.points");
      cfg.inits = {{"deterministic", State::deterministic(*pts)}};
    } else if (init_kind == "convolution") {
      need(rho.has_value() && pts.has_value(), "init.poisson and init.points");
      cfg.inits = {{"convolution", State::convolution({State::poisson(*rho), State::deterministic(*pts)})}};
    } else {
      throw ConfigError(source, init_line,
                        "unknown init.kind '" + init_kind + "' (catalogue, empty, poisson, deterministic, convolution)");
    }
  } catch (const ConfigError&) {
    throw;
  } catch (const std::exception& ex) {
    throw ConfigError(source, init_line, std::string("init: ") + ex.what());
  }

  const auto sorted_times = [](const std::string& s) {
    auto v = to_reals(s);
    for (std::size_t i = 0; i < v.size(); ++i) {
      if (v[i] < 0.0) throw std::invalid_argument("times must be nonnegative");
      if (i > 0 && v[i] < v[i - 1]) throw std::invalid_argument("times must be sorted");
    }
    if (v.empty()) throw std::invalid_argument("at least one time is required");
    return v;
  };
  const ExperimentConfig ref = reference_config();
  cfg.times = e.get("times", sorted_times).value_or(ref.times);
  cfg.convergence_times = e.get("convergence.times", sorted_times).value_or(ref.convergence_times);

  // theta.N.vartheta / theta.N.tau, N = 1, 2, ...
  std::map<long long, std::pair<std::optional<std::string>, double>> suite;
  for (const auto& key : e.keys_with_prefix("theta.")) {
    const auto parts = split(key, '.');
    const int line = e.line(key);
    if (parts.size() != 3 || (parts[2] != "vartheta" && parts[2] != "tau")) {
      throw ConfigError(source, line, "expected theta.N.vartheta or theta.N.tau, got '" + key + "'");
    }
    long long idx = 0;
    try {
      idx = to_integer(parts[1]);
    } catch (const std::exception&) {
      throw ConfigError(source, line, "theta index must be an integer");
    }
    auto& slot = suite[idx];
    if (parts[2] == "vartheta") {
      slot.first = e.get(key, as_string);
    } else {
      slot.second = *e.get(key, to_real);
    }
  }
  if (suite.empty()) {
    cfg.theta_suite = default_theta_suite(cfg.window);
  } else {
    const TemperingWeight psi = TemperingWeight::exponential(dim);
    for (const auto& [idx, spec] : suite) {
      const std::string key = "theta." + std::to_string(idx) + ".vartheta";
      if (!spec.first) throw ConfigError(source, e.line("theta." + std::to_string(idx) + ".tau"), key + " is missing");
      try {
        cfg.theta_suite.emplace_back(parse_vartheta(*spec.first, cfg.window), spec.second, psi);
      } catch (const std::exception& ex) {
        throw ConfigError(source, e.line(key), key + ": " + ex.what());
      }
    }
  }

  if (auto r = e.get("replicas", to_integer)) {
    if (*r < 2) throw ConfigError(source, e.line("replicas"), "replicas must be >= 2");
    cfg.replicas = static_cast<std::size_t>(*r);
  }
  if (auto s = e.get("seed", to_integer)) {
    if (*s < 0) throw ConfigError(source, e.line("seed"), "seed must be nonnegative");
    cfg.seed = static_cast<std::uint64_t>(*s);
  }
  cfg.density.x_bins = static_cast<int>(e.get("density.x_bins", to_integer).value_or(10));
  cfg.density.a_bins = static_cast<int>(e.get("density.a_bins", to_integer).value_or(40));
  cfg.density.a_hi = e.get("density.a_hi", to_real).value_or(cfg.times.back() > 0.0 ? cfg.times.back() : 1.0);
  if (cfg.density.x_bins < 1 || cfg.density.a_bins < 1 || !(cfg.density.a_hi > 0.0)) {
    throw ConfigError(source, e.line("density.x_bins"), "density bins must be positive");
  }
  cfg.write_points = e.get("output.points", [](const std::string& s) {
                        if (s == "true") return true;
                        if (s == "false") return false;
                        throw std::invalid_argument("expected true or false");
                      }).value_or(false);
  cfg.output_dir = e.get("output_dir", as_string).value_or("out");

  e.reject_unused();
  return cfg;
}

ExperimentConfig load_config(const std::filesystem::path& file) {
  std::ifstream in(file);
  if (!in) throw std::runtime_error("cannot open config " + file.string());
  return parse_config(in, file.string());
}

}  // namespace agepop
