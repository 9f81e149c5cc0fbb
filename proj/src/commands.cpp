#include "fcir/commands.hpp"

#include <cstdio>
#include <mutex>
#include <variant>

#include "fcir/fbm_stats.hpp"
#include "fcir/io.hpp"
#include "fcir/parallel.hpp"
#include "fcir/verify.hpp"

namespace fcir {
namespace {

using io::CsvWriter;
using io::format_real;
namespace fs = std::filesystem;

class FbmSource {
 public:
  FbmSource(const ExperimentConfig& c) {
    const auto grid = c.grid();
    const HurstIndex<double> h(c.hurst_H);
    if (c.sampler == SamplerKind::circulant)
      sampler_.emplace<CirculantFbmSampler<double>>(grid, h);
    else
      sampler_.emplace<CholeskyFbmSampler<double>>(grid, h);
  }
  FbmPath<double> sample(std::uint64_t seed) const {
    return std::visit(
        [&](const auto& s) -> FbmPath<double> {
          if constexpr (std::is_same_v<std::decay_t<decltype(s)>, std::monostate>)
            throw InternalError("fbm sampler not initialised");
          else
            return s.sample(seed);
        },
        sampler_);
  }

 private:
  std::variant<std::monostate, CirculantFbmSampler<double>, CholeskyFbmSampler<double>> sampler_;
};

std::vector<std::uint64_t> ensemble_seeds(const ExperimentConfig& c) {
  std::vector<std::uint64_t> seeds;
  for (long i = 0; i < c.ensemble_size; ++i) seeds.push_back(member_seed(c.master_seed, std::uint64_t(i)));
  return seeds;
}

std::string seed_tag(std::uint64_t seed) { return "seed" + std::to_string(seed); }

class Outputs {
 public:
  explicit Outputs(const ExperimentConfig& c) : dir_(c.output_dir) { fs::create_directories(dir_); }

  fs::path save(const std::string& name, std::string_view content) {
    const auto path = dir_ / name;
    io::write_file_atomic(path, content);
    std::lock_guard lock(mutex_);
    files_.push_back(path);
    return path;
  }

  CommandResult finish(const std::string& command, bool pass,
                       std::vector<std::pair<std::string, std::string>> summary, int fail_code = exit_assertion_failed) {
    summary.insert(summary.begin(), {"status", pass ? "pass" : "fail"});
    summary.insert(summary.begin(), {"command", command});
    CommandResult result;
    result.summary = io::key_value_lines(summary);
    result.exit_code = pass ? exit_ok : fail_code;
    save(command + "_summary.txt", result.summary);
    std::sort(files_.begin(), files_.end());
    result.files = files_;
    return result;
  }

 private:
  fs::path dir_;
  std::mutex mutex_;
  std::vector<fs::path> files_;
};

std::vector<DriftKind> selected_kinds(DriftSelection s) {
  switch (s) {
    case DriftSelection::indicator: return {DriftKind::indicator};
    case DriftSelection::max: return {DriftKind::max};
    case DriftSelection::both: return {DriftKind::indicator, DriftKind::max};
  }
  return {};
}

DriftKind single_kind(const ExperimentConfig& c) {
  return c.drift_kind == DriftSelection::max ? DriftKind::max : DriftKind::indicator;
}

void warn_stability(const ExperimentConfig& c, Convention conv) {
  const double ratio = c.check_stability(conv);
  if (ratio > kStabilityWarn)
    std::fprintf(stderr, "warning: stability ratio c1 k dt / eps = %s exceeds %g\n", format_real(ratio).c_str(),
                 kStabilityWarn);
}

double theta_for(const ExperimentConfig& c, const LimitPath<double>& lim) {
  return c.threshold_theta.value_or(default_threshold(lim));
}

std::string eps_tag(std::size_t index) { return "eps" + std::to_string(index); }

std::string ladder_csv(const EpsLadder<double>& ladder) {
  CsvWriter csv({"epsilon", "sup_gap_to_next", "nonpositive_measure"});
  for (std::size_t m = 0; m < ladder.levels.size(); ++m) {
    const auto& level = ladder.levels[m];
    const std::string gap =
        m + 1 < ladder.levels.size() ? format_real(sup_distance(level.values, ladder.levels[m + 1].values)) : "";
    csv.row({format_real(level.eps.value()), gap, format_real(nonpositive_measure(level))});
  }
  return csv.str();
}

bool nonincreasing(const std::vector<ResidualLevel>& levels) {
  for (std::size_t i = 1; i < levels.size(); ++i)
    if (levels[i].sup_residual > levels[i - 1].sup_residual) return false;
  return true;
}

// ---------------------------------------------------------------------------

constexpr std::uint64_t kOracleSeedOffset = std::uint64_t(1) << 48;

struct SelftestCheck {
  std::string name;
  EmpiricalCovariance estimate;
  ZScoreSummary summary;
  bool pass;
};

}  // namespace

VerifyStudy parse_study(const std::string& name) {
  if (name == "moments") return VerifyStudy::moments;
  if (name == "transform") return VerifyStudy::transform;
  if (name == "coincide") return VerifyStudy::coincide;
  if (name == "cir-residual") return VerifyStudy::cir_residual;
  if (name == "piecewise") return VerifyStudy::piecewise;
  throw ConfigError("unknown study '" + name + "' (moments, transform, coincide, cir-residual, piecewise)");
}

std::string to_string(VerifyStudy study) {
  switch (study) {
    case VerifyStudy::moments: return "moments";
    case VerifyStudy::transform: return "transform";
    case VerifyStudy::coincide: return "coincide";
    case VerifyStudy::cir_residual: return "cir-residual";
    case VerifyStudy::piecewise: return "piecewise";
  }
  return "";
}

CommandResult cmd_fbm_selftest(const ExperimentConfig& c) {
  c.validate();
  Outputs out(c);
  const auto grid = c.grid();
  const HurstIndex<double> h(c.hurst_H);
  const auto nodes = spread_nodes(grid.steps(), 32);
  const ThreeSigmaRule rule;

  std::vector<SelftestCheck> checks;
  // the two samplers draw from disjoint seed ranges so their estimates are independent
  auto against_closed_form = [&](const std::string& name, const auto& sampler, std::uint64_t master) {
    auto est = empirical_covariance(sampler, nodes, c.selftest_paths, master);
    auto summary = compare_to_closed_form(est, grid, h);
    checks.push_back({name, std::move(est), summary, rule.accepts(summary)});
  };
  const bool cross_check = grid.steps() <= 1024;
  if (c.sampler == SamplerKind::circulant || cross_check)
    against_closed_form("circulant", CirculantFbmSampler<double>(grid, h), c.master_seed);
  if (c.sampler == SamplerKind::cholesky || cross_check)
    against_closed_form("cholesky", CholeskyFbmSampler<double>(grid, h), c.master_seed ^ kOracleSeedOffset);

  CsvWriter csv({"sampler", "t_i", "t_j", "expected", "empirical", "std_error", "z"});
  for (const auto& check : checks) {
    const auto m = static_cast<Eigen::Index>(nodes.size());
    for (Eigen::Index i = 0; i < m; ++i)
      for (Eigen::Index j = i; j < m; ++j) {
        const double ti = grid.time(nodes[i]), tj = grid.time(nodes[j]);
        const double expected = fbm_covariance(ti, tj, h);
        const double se = check.estimate.std_error(i, j);
        const double emp = check.estimate.mean_product(i, j);
        csv.row({check.name, format_real(ti), format_real(tj), format_real(expected), format_real(emp),
                 format_real(se), format_real(se > 0 ? (emp - expected) / se : 0.0)});
      }
  }
  out.save("fbm_selftest.csv", csv.str());

  std::vector<std::pair<std::string, std::string>> summary;
  bool pass = true;
  for (const auto& check : checks) {
    pass = pass && check.pass;
    summary.emplace_back(check.name + "_cells", std::to_string(check.summary.cells));
    summary.emplace_back(check.name + "_beyond_3se", std::to_string(check.summary.beyond_three));
    summary.emplace_back(check.name + "_max_abs_z", format_real(check.summary.max_abs_z));
    summary.emplace_back(check.name + "_pass", check.pass ? "true" : "false");
  }
  if (checks.size() == 2) {
    const auto agreement = compare_estimates(checks[0].estimate, checks[1].estimate);
    const bool ok = rule.accepts(agreement);
    pass = pass && ok;
    summary.emplace_back("agreement_beyond_3se", std::to_string(agreement.beyond_three));
    summary.emplace_back("agreement_max_abs_z", format_real(agreement.max_abs_z));
    summary.emplace_back("agreement_pass", ok ? "true" : "false");
  }

  const FbmSource source(c);
  const auto first = source.sample(member_seed(c.master_seed, 0));
  const double gamma = c.holder_gamma.value_or(c.hurst_H / 2);
  const auto holder = holder_coefficient(first, gamma);
  const bool holder_ok = std::isfinite(holder.coefficient);
  pass = pass && holder_ok;
  summary.emplace_back("holder_gamma", format_real(gamma));
  summary.emplace_back("holder_coefficient", format_real(holder.coefficient));
  out.save("fbm_" + seed_tag(first.seed) + ".csv", io::path_csv(grid, first.values, "b"));
  return out.finish("fbm_selftest", pass, std::move(summary));
}

CommandResult cmd_simulate(const ExperimentConfig& c) {
  c.validate();
  const Convention conv = c.convention.value_or(Convention::unit);
  warn_stability(c, conv);
  const auto p = c.params(conv);
  const FbmSource source(c);
  Outputs out(c);
  const auto seeds = ensemble_seeds(c);
  const auto kinds = selected_kinds(c.drift_kind);
  parallel_for(seeds.size(), [&](std::size_t i) {
    const auto fbm = source.sample(seeds[i]);
    out.save("fbm_" + seed_tag(fbm.seed) + ".csv", io::path_csv(fbm.grid, fbm.values, "b"));
    for (const auto kind : kinds)
      for (std::size_t e = 0; e < c.epsilon_schedule.size(); ++e) {
        const auto path = simulate_eps_path(p, Epsilon<double>(c.epsilon_schedule[e]), fbm, kind);
        const std::string stem =
            "path_" + std::string(to_string(kind)) + "_" + eps_tag(e) + "_" + seed_tag(fbm.seed);
        out.save(stem + ".csv", io::path_csv(path.grid, path.values, "y"));
        out.save(stem + ".meta", io::key_value_lines({
                                     {"initial_value_Y0", format_real(p.y0)},
                                     {"mean_level_k", format_real(p.k)},
                                     {"reversion_speed_a", format_real(p.a)},
                                     {"volatility_sigma", format_real(p.sigma)},
                                     {"hurst_H", format_real(p.hurst.value())},
                                     {"drift_scale_c1", format_real(p.drift_scale())},
                                     {"noise_scale_c2", format_real(p.noise_scale())},
                                     {"epsilon", format_real(path.eps.value())},
                                     {"seed", std::to_string(path.driving_seed)},
                                     {"drift_kind", std::string(to_string(kind))},
                                     {"stability_ratio", format_real(path.stability_ratio)},
                                 }));
      }
  });
  return out.finish("simulate", true,
                    {{"paths", std::to_string(seeds.size() * kinds.size() * c.epsilon_schedule.size())}});
}

namespace {

struct LadderOutcome {
  std::uint64_t seed;
  EpsLadder<double> ladder;
  std::optional<LimitPath<double>> limit;
  std::optional<double> not_converged_gap;
};

LadderOutcome run_ladder(const ExperimentConfig& c, const CirParams<double>& p, const FbmPath<double>& fbm,
                         LimitEstimate estimate) {
  LadderOutcome o{fbm.seed, build_ladder(p, fbm, c.epsilon_schedule, single_kind(c), false), {}, {}};
  if (o.ladder.levels.size() >= 2) {
    try {
      o.limit = extract_limit(o.ladder, c.tol_limit, estimate);
    } catch (const NotConverged& e) {
      o.not_converged_gap = e.achieved_tol();
    }
  }
  return o;
}

std::string violations_csv(const std::vector<LadderOutcome>& outcomes) {
  CsvWriter csv({"seed", "node", "coarse_epsilon", "fine_epsilon", "coarse_value", "fine_value"});
  for (const auto& o : outcomes)
    for (const auto& v : o.ladder.violations)
      csv.row({std::to_string(o.seed), std::to_string(v.node), format_real(v.coarse_eps), format_real(v.fine_eps),
               format_real(v.coarse_value), format_real(v.fine_value)});
  return csv.str();
}

}  // namespace

CommandResult cmd_ladder(const ExperimentConfig& c) {
  c.validate();
  const Convention conv = c.convention.value_or(Convention::unit);
  warn_stability(c, conv);
  const auto p = c.params(conv);
  const FbmSource source(c);
  Outputs out(c);
  const auto seeds = ensemble_seeds(c);
  std::vector<LadderOutcome> outcomes(seeds.size());
  parallel_for(seeds.size(), [&](std::size_t i) {
    auto fbm = source.sample(seeds[i]);
    outcomes[i] = run_ladder(c, p, fbm, c.limit_estimate.value_or(LimitEstimate::finest));
    out.save("ladder_" + seed_tag(seeds[i]) + ".csv", ladder_csv(outcomes[i].ladder));
    if (outcomes[i].limit)
      out.save("limit_" + seed_tag(seeds[i]) + ".csv", io::path_csv(fbm.grid, outcomes[i].limit->values, "y"));
  });

  std::size_t fatal = 0, logged = 0, unconverged = 0;
  double worst_gap = 0;
  for (const auto& o : outcomes) {
    (o.ladder.ordering_guaranteed ? fatal : logged) += o.ladder.violations.size();
    if (o.not_converged_gap) {
      ++unconverged;
      worst_gap = std::max(worst_gap, *o.not_converged_gap);
    }
    if (o.limit) worst_gap = std::max(worst_gap, double(o.limit->achieved_tol));
  }
  if (fatal + logged > 0) {
    out.save("ladder_violations.csv", violations_csv(outcomes));
    std::fprintf(stderr, "%s: %zu ordering violations\n", fatal ? "error" : "warning", fatal + logged);
  }
  std::vector<std::pair<std::string, std::string>> summary = {
      {"levels", std::to_string(c.epsilon_schedule.size())},
      {"ordering_violations", std::to_string(fatal)},
      {"logged_violations", std::to_string(logged)},
      {"not_converged", std::to_string(unconverged)},
      {"worst_sup_gap", format_real(worst_gap)},
  };
  if (fatal) return out.finish("ladder", false, std::move(summary), exit_ordering_violation);
  if (unconverged) return out.finish("ladder", false, std::move(summary), exit_not_converged);
  return out.finish("ladder", true, std::move(summary));
}

CommandResult cmd_intervals(const ExperimentConfig& c) {
  c.validate();
  Outputs out(c);
  const Eigen::Index min_nodes = c.min_interval_nodes;
  if (c.input_path) {
    const auto loaded = io::read_path_csv(*c.input_path);
    if (loaded.times.size() < 2) throw ConfigError("input path needs at least two nodes");
    const Grid<double> grid(loaded.times.back(), static_cast<Eigen::Index>(loaded.times.size() - 1));
    const double theta = c.threshold_theta.value_or(1e-8);
    const auto ivs = positivity_intervals(loaded.values, theta, min_nodes);
    out.save("intervals_input.csv", io::intervals_csv(grid, ivs));
    return out.finish("intervals", true,
                      {{"threshold", format_real(theta)},
                       {"intervals", std::to_string(ivs.intervals.size())},
                       {"discarded_runs", std::to_string(ivs.discarded_runs)}});
  }

  const Convention conv = c.convention.value_or(Convention::unit);
  warn_stability(c, conv);
  const auto p = c.params(conv);
  const FbmSource source(c);
  const auto seeds = ensemble_seeds(c);
  std::vector<LadderOutcome> outcomes(seeds.size());
  std::vector<PositivityIntervals> found(seeds.size());
  parallel_for(seeds.size(), [&](std::size_t i) {
    const auto fbm = source.sample(seeds[i]);
    outcomes[i] = run_ladder(c, p, fbm, c.limit_estimate.value_or(LimitEstimate::finest));
    if (!outcomes[i].limit) return;
    const auto& lim = *outcomes[i].limit;
    found[i] = positivity_intervals(lim, theta_for(c, lim), min_nodes);
    out.save("intervals_" + seed_tag(seeds[i]) + ".csv", io::intervals_csv(lim.grid, found[i]));
  });
  std::size_t total = 0, discarded = 0, missing = 0;
  for (std::size_t i = 0; i < seeds.size(); ++i) {
    if (!outcomes[i].limit) ++missing;
    total += found[i].intervals.size();
    discarded += found[i].discarded_runs;
  }
  return out.finish("intervals", missing == 0,
                    {{"intervals", std::to_string(total)},
                     {"discarded_runs", std::to_string(discarded)},
                     {"not_converged", std::to_string(missing)}},
                    exit_not_converged);
}

namespace {

CommandResult verify_moments(const ExperimentConfig& c) {
  if (c.convention == Convention::half) throw ConfigError("verify moments requires convention=unit");
  c.check_stability(Convention::unit);
  const auto p = c.params(Convention::unit);
  const FbmSource source(c);
  Outputs out(c);
  const auto seeds = ensemble_seeds(c);
  constexpr double kOrders[] = {1.0, 2.0, 4.0};
  std::vector<MomentBound> bounds;
  for (double r : kOrders) bounds.push_back(moment_bound_constants(p, c.horizon_T, r));

  struct Row {
    std::uint64_t seed;
    double eps, r;
    MomentReport report;
    std::size_t doubled;
  };
  std::vector<std::vector<Row>> rows(seeds.size());
  parallel_for(seeds.size(), [&](std::size_t i) {
    const auto fbm = source.sample(seeds[i]);
    for (double e : c.epsilon_schedule) {
      const auto path = simulate_eps_path(p, Epsilon<double>(e), fbm, single_kind(c));
      const Vector<double> doubled = 2.0 * path.values;
      for (const auto& mb : bounds)
        rows[i].push_back({seeds[i], e, mb.r, check_moment_bound(path, fbm, mb),
                           check_moment_bound(doubled, fbm, mb).violations});
    }
  });

  CsvWriter csv({"seed", "epsilon", "r", "pass", "violations", "worst_node", "log_slack", "doubled_violations"});
  std::size_t failures = 0, doubled_failures = 0, checks = 0;
  for (const auto& per_seed : rows)
    for (const auto& row : per_seed) {
      ++checks;
      failures += !row.report.pass;
      doubled_failures += row.doubled > 0;
      csv.row({std::to_string(row.seed), format_real(row.eps), format_real(row.r), row.report.pass ? "1" : "0",
               std::to_string(row.report.violations), std::to_string(row.report.worst_node),
               format_real(row.report.log_slack), std::to_string(row.doubled)});
    }
  out.save("moments.csv", csv.str());
  std::vector<std::pair<std::string, std::string>> summary = {{"checks", std::to_string(checks)},
                                                              {"failures", std::to_string(failures)},
                                                              {"doubled_path_failures", std::to_string(doubled_failures)}};
  for (const auto& mb : bounds) {
    summary.emplace_back("log_c1_r" + format_real(mb.r), format_real(mb.log_c1));
    summary.emplace_back("log_c2_r" + format_real(mb.r), format_real(mb.log_c2));
  }
  return out.finish("verify_moments", failures == 0, std::move(summary));
}

CommandResult verify_transform(const ExperimentConfig& c) {
  if (c.convention == Convention::half) throw ConfigError("verify transform requires convention=unit");
  if (c.epsilon_schedule.size() < 2) throw ConfigError("verify transform needs at least two ladder levels");
  warn_stability(c, Convention::unit);
  const auto p = c.params(Convention::unit);
  const FbmSource source(c);
  Outputs out(c);
  const auto seeds = ensemble_seeds(c);
  struct Row {
    double end_time = 0, gap = 0;
    bool converged = false;
  };
  std::vector<Row> rows(seeds.size());
  parallel_for(seeds.size(), [&](std::size_t i) {
    const auto fbm = source.sample(seeds[i]);
    const auto o = run_ladder(c, p, fbm, c.limit_estimate.value_or(LimitEstimate::finest));
    if (!o.limit) return;
    const auto& y = o.limit->values;
    const double theta = theta_for(c, *o.limit);
    const auto hit = first_hit(y, theta);
    const Eigen::Index last = hit ? *hit - 1 : fbm.grid.steps();
    if (last < 1) return;
    const auto z = explicit_transform(y, fbm, p, last, theta);
    rows[i] = {fbm.grid.time(last), relative_sup_gap<double>(y.head(last + 1), z), true};
    if (i == 0) out.save("transform_fig_" + seed_tag(seeds[i]) + ".csv", io::figure_csv(fbm.grid, y.head(last + 1), z));
  });
  CsvWriter csv({"seed", "end_time", "rel_gap", "pass"});
  std::size_t passed = 0;
  for (std::size_t i = 0; i < seeds.size(); ++i) {
    const bool ok = rows[i].converged && rows[i].gap < c.transform_rel_tol;
    passed += ok;
    csv.row({std::to_string(seeds[i]), format_real(rows[i].end_time), format_real(rows[i].gap), ok ? "1" : "0"});
  }
  out.save("transform.csv", csv.str());
  const double fraction = double(passed) / double(seeds.size());
  return out.finish("verify_transform", fraction >= c.transform_pass_fraction,
                    {{"seeds", std::to_string(seeds.size())},
                     {"passed", std::to_string(passed)},
                     {"rel_tol", format_real(c.transform_rel_tol)},
                     {"required_fraction", format_real(c.transform_pass_fraction)}});
}

CommandResult verify_coincide(const ExperimentConfig& c) {
  const Convention conv = c.convention.value_or(Convention::unit);
  warn_stability(c, conv);
  const auto p = c.params(conv);
  const FbmSource source(c);
  Outputs out(c);
  const auto seeds = ensemble_seeds(c);
  const std::size_t levels = c.epsilon_schedule.size();
  std::vector<std::vector<CoincidenceReport>> reports(seeds.size());
  parallel_for(seeds.size(), [&](std::size_t i) {
    const auto fbm = source.sample(seeds[i]);
    for (std::size_t e = 0; e < levels; ++e) {
      const Epsilon<double> eps(c.epsilon_schedule[e]);
      const auto lower = simulate_eps_path(p, eps, fbm, DriftKind::indicator);
      const auto upper = simulate_eps_path(p, eps, fbm, DriftKind::max);
      reports[i].push_back(coincidence_report(lower, upper));
      if (i == 0) out.save("coincide_fig_" + eps_tag(e) + ".csv", io::figure_csv(fbm.grid, lower.values, upper.values));
    }
  });
  std::size_t failures = 0;
  double worst_ratio = 0;
  for (std::size_t e = 0; e < levels; ++e) {
    CsvWriter csv({"seed", "sup_diff", "bound"});
    for (std::size_t i = 0; i < seeds.size(); ++i) {
      const auto& r = reports[i][e];
      failures += !r.pass;
      worst_ratio = std::max(worst_ratio, r.sup_diff / r.bound);
      csv.row({std::to_string(seeds[i]), format_real(r.sup_diff), format_real(r.bound)});
    }
    out.save("coincide_" + eps_tag(e) + ".csv", csv.str());
  }
  return out.finish("verify_coincide", failures == 0,
                    {{"checks", std::to_string(seeds.size() * levels)},
                     {"failures", std::to_string(failures)},
                     {"worst_sup_diff_over_bound", format_real(worst_ratio)}});
}

CommandResult verify_residuals(const ExperimentConfig& c, bool piecewise) {
  if (c.convention == Convention::unit) throw ConfigError("CIR residual studies require convention=half");
  if (c.epsilon_schedule.size() < 2) throw ConfigError("CIR residual studies need at least two ladder levels");
  warn_stability(c, Convention::half);
  const auto p = c.params(Convention::half);
  const FbmSource source(c);
  Outputs out(c);
  const auto seeds = ensemble_seeds(c);
  const Eigen::Index min_nodes = std::max<long>(c.min_interval_nodes, 3);

  struct SeedResult {
    bool converged = false;
    std::vector<ResidualReport> reports;
    std::vector<ResidualLevel> piecewise;
  };
  std::vector<SeedResult> results(seeds.size());
  parallel_for(seeds.size(), [&](std::size_t i) {
    const auto fbm = source.sample(seeds[i]);
    const auto o = run_ladder(c, p, fbm, c.limit_estimate.value_or(LimitEstimate::richardson));
    if (!o.limit) return;
    auto& r = results[i];
    r.converged = true;
    const auto x = cir_process(*o.limit);
    const auto ivs = positivity_intervals(*o.limit, theta_for(c, *o.limit), min_nodes);
    if (piecewise) {
      if (ivs.empty()) return;
      for (Eigen::Index k : kReportedCoarsenings)
        r.piecewise.push_back({k, fbm.grid.step() * double(k), double(piecewise_sup_residual(x, fbm, p, ivs, k))});
      return;
    }
    CsvWriter csv({"alpha", "beta", "coarsen", "sup_residual"});
    for (const auto& iv : ivs.intervals) {
      r.reports.push_back(cir_residual_on_interval(x, fbm, p, iv));
      for (const auto& level : r.reports.back().levels)
        csv.row({format_real(fbm.grid.time(iv.alpha)), format_real(fbm.grid.time(iv.beta)),
                 std::to_string(level.coarsen), format_real(level.sup_residual)});
    }
    out.save("cir_residual_" + seed_tag(seeds[i]) + ".csv", csv.str());
  });

  std::size_t pairs = 0, monotone = 0, unconverged = 0;
  if (piecewise) {
    CsvWriter csv({"seed", "coarsen", "sup_residual"});
    for (std::size_t i = 0; i < seeds.size(); ++i) {
      unconverged += !results[i].converged;
      if (results[i].piecewise.empty()) continue;
      ++pairs;
      monotone += nonincreasing(results[i].piecewise);
      for (const auto& level : results[i].piecewise)
        csv.row({std::to_string(seeds[i]), std::to_string(level.coarsen), format_real(level.sup_residual)});
    }
    out.save("piecewise.csv", csv.str());
  } else {
    for (const auto& r : results) {
      unconverged += !r.converged;
      for (const auto& rep : r.reports) {
        ++pairs;
        monotone += nonincreasing(rep.levels);
      }
    }
  }
  const double fraction = pairs ? double(monotone) / double(pairs) : 0.0;
  const bool pass = unconverged == 0 && pairs > 0 && fraction >= c.residual_pass_fraction;
  return out.finish(piecewise ? "verify_piecewise" : "verify_cir_residual", pass,
                    {{"pairs", std::to_string(pairs)},
                     {"monotone", std::to_string(monotone)},
                     {"monotone_fraction", format_real(fraction)},
                     {"required_fraction", format_real(c.residual_pass_fraction)},
                     {"not_converged", std::to_string(unconverged)}});
}

}  // namespace

CommandResult cmd_verify(const ExperimentConfig& c, VerifyStudy study) {
  c.validate();
  switch (study) {
    case VerifyStudy::moments: return verify_moments(c);
    case VerifyStudy::transform: return verify_transform(c);
    case VerifyStudy::coincide: return verify_coincide(c);
    case VerifyStudy::cir_residual: return verify_residuals(c, false);
    case VerifyStudy::piecewise: return verify_residuals(c, true);
  }
  throw InternalError("unhandled study");
}

CommandResult run_command(const std::string& command, const std::string& study, const ExperimentConfig& c) {
  auto failed = [](int code, const std::string& what) {
    CommandResult r;
    r.exit_code = code;
    r.summary = "status=error\nerror=" + what + "\n";
    return r;
  };
  try {
    if (command == "fbm-selftest") return cmd_fbm_selftest(c);
    if (command == "simulate") return cmd_simulate(c);
    if (command == "ladder") return cmd_ladder(c);
    if (command == "intervals") return cmd_intervals(c);
    if (command == "verify") return cmd_verify(c, parse_study(study));
    return failed(exit_config_error, "unknown command '" + command + "'");
  } catch (const ConfigError& e) {
    return failed(exit_config_error, e.what());
  } catch (const StabilityError& e) {
    return failed(exit_stability_abort, e.what());
  } catch (const LadderError& e) {
    return failed(exit_ordering_violation, e.what());
  } catch (const NotConverged& e) {
    return failed(exit_not_converged, e.what());
  } catch (const std::exception& e) {
    return failed(exit_internal_error, e.what());
  }
}

}  // namespace fcir
