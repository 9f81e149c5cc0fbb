#include "fcir/config.hpp"

#include <charconv>
#include <fstream>
#include <functional>
#include <map>
#include <sstream>

#include "fcir/euler.hpp"
#include "fcir/io.hpp"

namespace fcir {
namespace {

std::string trim(std::string_view s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return std::string(s.substr(b, e - b + 1));
}

double to_real(const std::string& key, const std::string& v) {
  std::size_t used = 0;
  double x = 0;
  try {
    x = std::stod(v, &used);
  } catch (const std::exception&) {
    throw ConfigError(key + ": not a number: '" + v + "'");
  }
  if (used != v.size()) throw ConfigError(key + ": trailing characters in '" + v + "'");
  return x;
}

template <typename Int>
Int to_int(const std::string& key, const std::string& v) {
  Int x{};
  const auto [ptr, ec] = std::from_chars(v.data(), v.data() + v.size(), x);
  if (ec != std::errc{} || ptr != v.data() + v.size()) throw ConfigError(key + ": not an integer: '" + v + "'");
  return x;
}

bool is_auto(const std::string& v) { return v == "auto"; }

using Setter = std::function<void(ExperimentConfig&, const std::string&, const std::string&)>;

const std::map<std::string, Setter>& setters() {
  static const std::map<std::string, Setter> table = {
      {"initial_value_Y0", [](auto& c, auto& k, auto& v) { c.initial_value_Y0 = to_real(k, v); }},
      {"mean_level_k", [](auto& c, auto& k, auto& v) { c.mean_level_k = to_real(k, v); }},
      {"reversion_speed_a", [](auto& c, auto& k, auto& v) { c.reversion_speed_a = to_real(k, v); }},
      {"volatility_sigma", [](auto& c, auto& k, auto& v) { c.volatility_sigma = to_real(k, v); }},
      {"hurst_H", [](auto& c, auto& k, auto& v) { c.hurst_H = to_real(k, v); }},
      {"convention",
       [](auto& c, auto& k, auto& v) {
         if (is_auto(v)) c.convention.reset();
         else if (v == "unit") c.convention = Convention::unit;
         else if (v == "half") c.convention = Convention::half;
         else throw ConfigError(k + ": expected unit, half or auto");
       }},
      {"horizon_T", [](auto& c, auto& k, auto& v) { c.horizon_T = to_real(k, v); }},
      {"step_count_n", [](auto& c, auto& k, auto& v) { c.step_count_n = to_int<long>(k, v); }},
      {"epsilon_schedule",
       [](auto& c, auto& k, auto& v) {
         c.epsilon_schedule.clear();
         std::stringstream ss(v);
         std::string item;
         while (std::getline(ss, item, ',')) c.epsilon_schedule.push_back(to_real(k, trim(item)));
       }},
      {"drift_kind",
       [](auto& c, auto& k, auto& v) {
         if (v == "indicator") c.drift_kind = DriftSelection::indicator;
         else if (v == "max") c.drift_kind = DriftSelection::max;
         else if (v == "both") c.drift_kind = DriftSelection::both;
         else throw ConfigError(k + ": expected indicator, max or both");
       }},
      {"master_seed", [](auto& c, auto& k, auto& v) { c.master_seed = to_int<std::uint64_t>(k, v); }},
      {"ensemble_size", [](auto& c, auto& k, auto& v) { c.ensemble_size = to_int<long>(k, v); }},
      {"tol_limit", [](auto& c, auto& k, auto& v) { c.tol_limit = to_real(k, v); }},
      {"threshold_theta",
       [](auto& c, auto& k, auto& v) {
         if (is_auto(v)) c.threshold_theta.reset();
         else c.threshold_theta = to_real(k, v);
       }},
      {"transform_rel_tol", [](auto& c, auto& k, auto& v) { c.transform_rel_tol = to_real(k, v); }},
      {"transform_pass_fraction", [](auto& c, auto& k, auto& v) { c.transform_pass_fraction = to_real(k, v); }},
      {"residual_pass_fraction", [](auto& c, auto& k, auto& v) { c.residual_pass_fraction = to_real(k, v); }},
      {"limit_estimate",
       [](auto& c, auto& k, auto& v) {
         if (is_auto(v)) c.limit_estimate.reset();
         else if (v == "finest") c.limit_estimate = LimitEstimate::finest;
         else if (v == "richardson") c.limit_estimate = LimitEstimate::richardson;
         else throw ConfigError(k + ": expected finest, richardson or auto");
       }},
      {"min_interval_nodes", [](auto& c, auto& k, auto& v) { c.min_interval_nodes = to_int<long>(k, v); }},
      {"sampler",
       [](auto& c, auto& k, auto& v) {
         if (v == "circulant") c.sampler = SamplerKind::circulant;
         else if (v == "cholesky") c.sampler = SamplerKind::cholesky;
         else throw ConfigError(k + ": expected circulant or cholesky");
       }},
      {"selftest_paths", [](auto& c, auto& k, auto& v) { c.selftest_paths = to_int<long>(k, v); }},
      {"holder_gamma",
       [](auto& c, auto& k, auto& v) {
         if (is_auto(v)) c.holder_gamma.reset();
         else c.holder_gamma = to_real(k, v);
       }},
      {"input_path", [](auto& c, auto&, auto& v) { c.input_path = v; }},
      {"output_dir", [](auto& c, auto&, auto& v) { c.output_dir = v; }},
  };
  return table;
}

}  // namespace

CirParams<double> ExperimentConfig::params(Convention fallback) const {
  try {
    return CirParams<double>(initial_value_Y0, mean_level_k, reversion_speed_a, volatility_sigma,
                             HurstIndex<double>(hurst_H), convention.value_or(fallback));
  } catch (const DomainError& e) {
    throw ConfigError(e.what());
  }
}

void ExperimentConfig::validate() const {
  if (!(horizon_T > 0)) throw ConfigError("horizon_T must be positive");
  if (step_count_n < 1) throw ConfigError("step_count_n must be >= 1");
  if (!(hurst_H > 0 && hurst_H < 1)) throw ConfigError("hurst_H must lie in (0, 1)");
  (void)params(Convention::unit);
  if (epsilon_schedule.empty()) throw ConfigError("epsilon_schedule is empty");
  for (std::size_t i = 0; i < epsilon_schedule.size(); ++i) {
    if (!(epsilon_schedule[i] > 0)) throw ConfigError("epsilon_schedule entries must be positive");
    if (i > 0 && !(epsilon_schedule[i] < epsilon_schedule[i - 1]))
      throw ConfigError("epsilon_schedule must be strictly decreasing");
  }
  if (ensemble_size < 1) throw ConfigError("ensemble_size must be >= 1");
  if (!(tol_limit >= 0)) throw ConfigError("tol_limit must be >= 0");
  if (threshold_theta && !(*threshold_theta >= tol_limit))
    throw ConfigError("threshold_theta must be >= tol_limit");
  if (!(transform_rel_tol > 0)) throw ConfigError("transform_rel_tol must be positive");
  for (double f : {transform_pass_fraction, residual_pass_fraction})
    if (!(f >= 0 && f <= 1)) throw ConfigError("pass fractions must lie in [0, 1]");
  if (min_interval_nodes < 2) throw ConfigError("min_interval_nodes must be >= 2");
  if (sampler == SamplerKind::cholesky && step_count_n > CholeskyFbmSampler<double>::kMaxSteps)
    throw ConfigError("cholesky sampler supports at most 4096 steps");
  if (selftest_paths < 2) throw ConfigError("selftest_paths must be >= 2");
  if (holder_gamma && !(*holder_gamma > 0 && *holder_gamma < hurst_H))
    throw ConfigError("holder_gamma must lie in (0, hurst_H)");
}

double ExperimentConfig::check_stability(Convention c) const {
  const auto p = params(c);
  const double dt = grid().step();
  double worst = 0;
  for (double e : epsilon_schedule) {
    const double ratio = stability_ratio(p, Epsilon<double>(e), dt);
    worst = std::max(worst, ratio);
    if (ratio > kStabilityAbort)
      throw StabilityError("stability guard: c1 k dt / eps = " + io::format_real(ratio) + " at eps " +
                               io::format_real(e),
                           ratio);
  }
  return worst;
}

ExperimentConfig parse_config(const std::string& text) {
  ExperimentConfig config;
  std::stringstream in(text);
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    const auto hash = line.find('#');
    if (hash != std::string::npos) line.erase(hash);
    const std::string body = trim(line);
    if (body.empty()) continue;
    const auto eq = body.find('=');
    if (eq == std::string::npos) throw ConfigError("line " + std::to_string(lineno) + ": expected key=value");
    const std::string key = trim(body.substr(0, eq));
    const std::string value = trim(body.substr(eq + 1));
    const auto it = setters().find(key);
    if (it == setters().end()) throw ConfigError("line " + std::to_string(lineno) + ": unknown key '" + key + "'");
    it->second(config, key, value);
  }
  config.validate();
  return config;
}

ExperimentConfig load_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot read config " + path.string());
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_config(ss.str());
}

std::string to_text(const ExperimentConfig& c) {
  using io::format_real;
  std::string schedule;
  for (std::size_t i = 0; i < c.epsilon_schedule.size(); ++i) {
    if (i) schedule += ',';
    schedule += format_real(c.epsilon_schedule[i]);
  }
  auto convention = !c.convention ? "auto" : *c.convention == Convention::unit ? "unit" : "half";
  auto drift = c.drift_kind == DriftSelection::indicator ? "indicator"
               : c.drift_kind == DriftSelection::max     ? "max"
                                                         : "both";
  auto estimate = !c.limit_estimate                            ? "auto"
                  : *c.limit_estimate == LimitEstimate::finest ? "finest"
                                                               : "richardson";
  std::vector<std::pair<std::string, std::string>> kv = {
      {"initial_value_Y0", format_real(c.initial_value_Y0)},
      {"mean_level_k", format_real(c.mean_level_k)},
      {"reversion_speed_a", format_real(c.reversion_speed_a)},
      {"volatility_sigma", format_real(c.volatility_sigma)},
      {"hurst_H", format_real(c.hurst_H)},
      {"convention", convention},
      {"horizon_T", format_real(c.horizon_T)},
      {"step_count_n", std::to_string(c.step_count_n)},
      {"epsilon_schedule", schedule},
      {"drift_kind", drift},
      {"master_seed", std::to_string(c.master_seed)},
      {"ensemble_size", std::to_string(c.ensemble_size)},
      {"tol_limit", format_real(c.tol_limit)},
      {"threshold_theta", c.threshold_theta ? format_real(*c.threshold_theta) : "auto"},
      {"transform_rel_tol", format_real(c.transform_rel_tol)},
      {"transform_pass_fraction", format_real(c.transform_pass_fraction)},
      {"residual_pass_fraction", format_real(c.residual_pass_fraction)},
      {"limit_estimate", estimate},
      {"min_interval_nodes", std::to_string(c.min_interval_nodes)},
      {"sampler", c.sampler == SamplerKind::circulant ? "circulant" : "cholesky"},
      {"selftest_paths", std::to_string(c.selftest_paths)},
      {"holder_gamma", c.holder_gamma ? format_real(*c.holder_gamma) : "auto"},
  };
  if (c.input_path) kv.emplace_back("input_path", c.input_path->string());
  kv.emplace_back("output_dir", c.output_dir.string());
  return io::key_value_lines(kv);
}

}  // namespace fcir
