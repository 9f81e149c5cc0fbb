#include <doctest.h>

#include <fstream>
#include <sstream>

#include "fcir/commands.hpp"
#include "fcir/io.hpp"

using namespace fcir;
namespace fs = std::filesystem;

namespace {

struct TempDir {
  fs::path path;
  explicit TempDir(const std::string& name) : path(fs::temp_directory_path() / ("fcir_test_" + name)) {
    fs::remove_all(path);
    fs::create_directories(path);
  }
  ~TempDir() { fs::remove_all(path); }
};

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

ExperimentConfig small_config(const fs::path& out) {
  auto c = parse_config(
      "horizon_T = 1\n"
      "step_count_n = 4096\n"
      "epsilon_schedule = 0.1, 0.05, 0.025\n"
      "ensemble_size = 3\n"
      "tol_limit = 1\n"
      "selftest_paths = 200\n");
  c.output_dir = out;
  return c;
}

}  // namespace

TEST_CASE("study names") {
  for (auto s : {VerifyStudy::moments, VerifyStudy::transform, VerifyStudy::coincide, VerifyStudy::cir_residual,
                 VerifyStudy::piecewise})
    CHECK(parse_study(to_string(s)) == s);
  CHECK_THROWS_AS(parse_study("bogus"), ConfigError);
}

TEST_CASE("simulate writes paths and metadata deterministically") {
  TempDir tmp("simulate");
  auto c = small_config(tmp.path / "a");
  const auto first = run_command("simulate", "", c);
  REQUIRE(first.exit_code == exit_ok);
  CHECK(fs::exists(c.output_dir / "simulate_summary.txt"));
  const auto seed = std::to_string(member_seed(c.master_seed, 0));
  CHECK(fs::exists(c.output_dir / ("fbm_seed" + seed + ".csv")));
  const auto stem = c.output_dir / ("path_indicator_eps0_seed" + seed);
  REQUIRE(fs::exists(stem.string() + ".csv"));
  CHECK(slurp(stem.string() + ".meta").find("drift_scale_c1=1\n") != std::string::npos);

  const auto loaded = io::read_path_csv(stem.string() + ".csv");
  CHECK(loaded.values.size() == 4097);
  CHECK(loaded.values[0] == 1.0);
  CHECK(loaded.times.back() == 1.0);

  auto again = c;
  again.output_dir = tmp.path / "b";
  const auto second = run_command("simulate", "", again);
  REQUIRE(first.files.size() == second.files.size());
  for (std::size_t i = 0; i < first.files.size(); ++i)
    CHECK(slurp(first.files[i]) == slurp(second.files[i]));
}

TEST_CASE("exit codes") {
  TempDir tmp("codes");
  auto c = small_config(tmp.path);
  c.sampler = SamplerKind::cholesky;
  c.step_count_n = 8192;
  CHECK(run_command("simulate", "", c).exit_code == exit_config_error);

  c = small_config(tmp.path);
  CHECK(run_command("nope", "", c).exit_code == exit_config_error);
  CHECK(run_command("verify", "nope", c).exit_code == exit_config_error);

  c.step_count_n = 100;
  c.epsilon_schedule = {0.1, 0.005};
  CHECK(run_command("ladder", "", c).exit_code == exit_stability_abort);

  c = small_config(tmp.path);
  c.tol_limit = 1e-6;
  CHECK(run_command("ladder", "", c).exit_code == exit_not_converged);

  c = small_config(tmp.path);
  c.convention = Convention::unit;
  CHECK(run_command("verify", "cir-residual", c).exit_code == exit_config_error);
  c.convention = Convention::half;
  CHECK(run_command("verify", "moments", c).exit_code == exit_config_error);
}

TEST_CASE("ladder and intervals outputs") {
  TempDir tmp("ladder");
  auto c = small_config(tmp.path);
  const auto r = run_command("ladder", "", c);
  CHECK(r.exit_code == exit_ok);
  const auto seed = std::to_string(member_seed(c.master_seed, 1));
  const auto ladder = slurp(tmp.path / ("ladder_seed" + seed + ".csv"));
  CHECK(ladder.rfind("epsilon,sup_gap_to_next,nonpositive_measure\n", 0) == 0);
  CHECK(fs::exists(tmp.path / ("limit_seed" + seed + ".csv")));
  CHECK(r.summary.find("ordering_violations=0") != std::string::npos);

  CHECK(run_command("intervals", "", c).exit_code == exit_ok);
  CHECK(slurp(tmp.path / ("intervals_seed" + seed + ".csv")).rfind("kind,alpha,beta\n", 0) == 0);

  // intervals of a path read back from disk
  io::write_file_atomic(tmp.path / "input.csv", "t,y\n0,1\n0.25,1\n0.5,0\n0.75,2\n1,2\n");
  c.input_path = tmp.path / "input.csv";
  CHECK(run_command("intervals", "", c).exit_code == exit_ok);
  const auto ivs = slurp(tmp.path / "intervals_input.csv");
  CHECK(ivs.find("closed_open,0,0.5\n") != std::string::npos);
}

TEST_CASE("verify studies run on a small ensemble") {
  TempDir tmp("verify");
  auto c = small_config(tmp.path);
  CHECK(run_command("verify", "moments", c).exit_code == exit_ok);
  CHECK(run_command("verify", "coincide", c).exit_code == exit_ok);
  CHECK(fs::exists(tmp.path / "coincide_eps0.csv"));
  CHECK(fs::exists(tmp.path / "coincide_fig_eps2.csv"));
  const auto t = run_command("verify", "transform", c);
  CHECK((t.exit_code == exit_ok || t.exit_code == exit_assertion_failed));
  CHECK(fs::exists(tmp.path / "transform.csv"));
  const auto res = run_command("verify", "cir-residual", c);
  CHECK((res.exit_code == exit_ok || res.exit_code == exit_assertion_failed));
  CHECK(res.summary.find("monotone_fraction=") != std::string::npos);
  const auto pw = run_command("verify", "piecewise", c);
  CHECK((pw.exit_code == exit_ok || pw.exit_code == exit_assertion_failed));
  CHECK(fs::exists(tmp.path / "piecewise.csv"));
}

TEST_CASE("fbm selftest cross-checks both samplers") {
  TempDir tmp("selftest");
  auto c = small_config(tmp.path);
  c.step_count_n = 256;
  c.selftest_paths = 2000;
  const auto r = run_command("fbm-selftest", "", c);
  CHECK(r.exit_code == exit_ok);
  CHECK(r.summary.find("agreement_pass=true") != std::string::npos);
  CHECK(r.summary.find("cholesky_pass=true") != std::string::npos);
  CHECK(fs::exists(tmp.path / "fbm_selftest.csv"));
}
