#include "doctest.h"

#include "edmdlab/config.hpp"
#include "edmdlab/csv.hpp"
#include "edmdlab/manifest.hpp"
#include "edmdlab/runner.hpp"
#include "edmdlab/svg.hpp"

#include <filesystem>
#include <fstream>
#include <sstream>

using namespace edmdlab::cli;
namespace fs = std::filesystem;

namespace {

std::string slurp(const fs::path& p) {
  std::ifstream f(p, std::ios::binary);
  REQUIRE(f.good());
  std::ostringstream s;
  s << f.rdbuf();
  return s.str();
}

fs::path fresh_dir(const std::string& tag) {
  const fs::path p = fs::temp_directory_path() / ("edmdlab_test_" + tag);
  fs::remove_all(p);
  fs::create_directories(p);
  return p;
}

ExperimentConfig doubling_config() {
  ExperimentConfig c = ExperimentConfig::defaults();
  c.degree = 2;
  c.sin_coeffs.clear();
  c.cos_coeffs.clear();
  c.density_kind = ExperimentConfig::DensityKind::uniform;
  c.k_list = {4, 6, 8};
  c.n_list = {100, 400};
  c.seeds = 2;
  c.k_oracle = 64;
  c.modulus_floor = 1e-4;
  c.workers = 2;
  c.fig3_k = 4;
  c.mode_rank = 0;
  return c;
}

}  // namespace

TEST_CASE("config: defaults reproduce the experiment map") {
  auto c = ExperimentConfig::defaults();
  CHECK(c.degree == 4);
  REQUIRE(c.sin_coeffs.size() == 6);
  CHECK(c.sin_coeffs[5] == -0.4);
  REQUIRE(c.cos_coeffs.size() == 3);
  CHECK(c.cos_coeffs[2] == 0.08);
  auto map = c.make_map();
  CHECK(map.evaluate(0.0) == doctest::Approx(0.08).epsilon(1e-14));
}

TEST_CASE("config: parse -> serialize -> parse round-trips identically") {
  const std::string text = R"(
# sample config
[map]
degree = 3
sin = 0 0.05
cos = 0.01

[density]
kind = explicit
cos = 0.3
sin = 0.1

[experiment]
k_list = 4 8 12
n_list = 100 1000
seeds = 3
seed0 = 99
mode_rank = 2
corr_terms = 3
corr_lags = 15
fig3_k = 6

[oracle]
k_oracle = 128
modulus_floor = 0.002

[weights]
t = 0.15
kappa = 0.4

[output]
dir = results
workers = 2
)";
  auto a = ExperimentConfig::parse(text);
  auto b = ExperimentConfig::parse(a.serialize());
  CHECK(a == b);
  CHECK(a.hash_hex() == b.hash_hex());
  auto d = ExperimentConfig::parse(ExperimentConfig::defaults().serialize());
  CHECK(d == ExperimentConfig::defaults());
}

TEST_CASE("config: a [map] section replaces the default map wholesale") {
  auto c = ExperimentConfig::parse("[map]\ndegree = 2\n");
  CHECK(c.degree == 2);
  CHECK(c.sin_coeffs.empty());
  CHECK(c.cos_coeffs.empty());
  (void)c.make_map();  // plain doubling map, expanding

  // an empty config is exactly the defaults
  CHECK(ExperimentConfig::parse("") == ExperimentConfig::defaults());
}

TEST_CASE("config: errors carry line and field information") {
  try {
    (void)ExperimentConfig::parse("[map]\ndegree = four\n");
    FAIL("expected config_error");
  } catch (const config_error& e) {
    CHECK(e.line() == 2);
    CHECK(e.field() == "degree");
  }
  CHECK_THROWS_AS((void)ExperimentConfig::parse("[nope]\nx = 1\n"), config_error);
  CHECK_THROWS_AS((void)ExperimentConfig::parse("[map]\nwhat = 1\n"), config_error);
  CHECK_THROWS_AS((void)ExperimentConfig::parse("degree = 2\n"), config_error);
  CHECK_THROWS_AS((void)ExperimentConfig::parse("[weights]\nt = -1\n"),
                  config_error);
}

TEST_CASE("config: non-expanding maps are rejected with the measured slope") {
  ExperimentConfig c = ExperimentConfig::defaults();
  c.degree = 2;
  c.sin_coeffs = {1.6};  // kills expansivity
  c.cos_coeffs.clear();
  try {
    (void)c.make_map();
    FAIL("expected config_error");
  } catch (const config_error& e) {
    CHECK(std::string(e.what()).find("min f'") != std::string::npos);
  }
}

TEST_CASE("output directory resolution: flag, env var, config") {
  auto cfg = ExperimentConfig::defaults();
  cfg.out_dir = "from_config";
  unsetenv("EDMDLAB_OUT");
  CHECK(resolve_out_dir("", cfg) == "from_config");
  setenv("EDMDLAB_OUT", "from_env", 1);
  CHECK(resolve_out_dir("", cfg) == "from_env");
  CHECK(resolve_out_dir("from_flag", cfg) == "from_flag");
  unsetenv("EDMDLAB_OUT");
}

TEST_CASE("csv: header, quoting, fixed-width scientific formatting") {
  CsvWriter csv({"a", "b,quoted"});
  csv.add_row(std::vector<double>{1.0, 0.5});
  csv.add_row(std::vector<std::string>{"x\"y", "plain"});
  const std::string s = csv.str();
  CHECK(s.find("a,\"b,quoted\"\r\n") == 0);
  CHECK(s.find("1.0000000000000000e+00") != std::string::npos);
  CHECK(s.find("\"x\"\"y\"") != std::string::npos);
  CHECK_THROWS_AS(csv.add_row(std::vector<double>{1.0}), std::invalid_argument);
}

TEST_CASE("svg: well-formed document with log axis and legend") {
  SvgChart chart("demo", "x", "y");
  chart.set_log_y(true);
  SvgSeries s;
  s.x = {1, 2, 3};
  s.y = {1e-3, 1e-5, 1e-7};
  s.label = "series";
  chart.add_series(s);
  const std::string out = chart.str();
  CHECK(out.find("<?xml") == 0);
  CHECK(out.find("<svg") != std::string::npos);
  CHECK(out.find("version=\"1.1\"") != std::string::npos);
  CHECK(out.find("polyline") != std::string::npos);
  CHECK(out.find("series") != std::string::npos);
  CHECK(out.find("</svg>") != std::string::npos);
}

TEST_CASE("manifest: serialization lists notes and artifacts") {
  ResultsManifest m;
  m.command = "demo";
  m.config_hash = "abc";
  m.created = "2020-01-01T00:00:00Z";
  m.seed0 = 7;
  m.seeds = 2;
  m.note("slope", -0.5);
  m.artifacts = {"a.csv", "b.svg"};
  const std::string s = m.serialize();
  CHECK(s.find("command = demo") != std::string::npos);
  CHECK(s.find("config_hash = abc") != std::string::npos);
  CHECK(s.find("slope = -0.5") != std::string::npos);
  CHECK(s.find("file = a.csv") != std::string::npos);
  CHECK(s.find("file = b.svg") != std::string::npos);
}

TEST_CASE("cmd_resonances: doubling map gives the single fixed point, twice") {
  RunContext ctx;
  ctx.config = doubling_config();
  ctx.workers = 2;
  ctx.out_dir = fresh_dir("res").string();
  auto m = cmd_resonances(ctx);
  const auto csv1 = slurp(fs::path(ctx.out_dir) / "resonances.csv");
  CHECK(csv1.find("rank,re_lambda,im_lambda,modulus") == 0);
  CHECK(csv1.find("1.0000000000000000e+00") != std::string::npos);
  // exactly one data row after the header
  CHECK(std::count(csv1.begin(), csv1.end(), '\n') == 2);

  auto m2 = cmd_resonances(ctx);
  CHECK(slurp(fs::path(ctx.out_dir) / "resonances.csv") == csv1);

  for (const auto& a : m.artifacts) {
    const fs::path p = fs::path(ctx.out_dir) / a;
    CHECK(fs::exists(p));
    CHECK(fs::file_size(p) > 0);
  }
}

TEST_CASE("cmd_fig1: doubling errors at the floor, fit skipped with a notice") {
  RunContext ctx;
  ctx.config = doubling_config();
  ctx.workers = 2;
  ctx.out_dir = fresh_dir("fig1").string();
  auto m = cmd_fig1(ctx);
  bool skipped_notice = false;
  for (const auto& [k, v] : m.notes)
    if (v.find("skipped") != std::string::npos) skipped_notice = true;
  CHECK(skipped_notice);
  CHECK(fs::exists(fs::path(ctx.out_dir) / "fig1_errors.csv"));

  // single-K list: fit refused, data still emitted
  RunContext one = ctx;
  one.config.k_list = {6};
  one.out_dir = fresh_dir("fig1_one").string();
  auto m1 = cmd_fig1(one);
  CHECK(slurp(fs::path(one.out_dir) / "fig1_errors.csv").find("k,err_0") == 0);
}

TEST_CASE("cmd_fig2: doubling constant mode gives flat unit curves") {
  RunContext ctx;
  ctx.config = doubling_config();
  ctx.config.k_list = {4, 6};
  ctx.workers = 2;
  ctx.out_dir = fresh_dir("fig2").string();
  (void)cmd_fig2(ctx);
  const std::string csv = slurp(fs::path(ctx.out_dir) / "fig2_left_modes.csv");
  std::istringstream in(csv);
  std::string line;
  std::getline(in, line);  // header
  int rows = 0;
  while (std::getline(in, line)) {
    if (line.empty() || line == "\r") continue;
    // columns after x must all be 1 (|a(x)| of the constant mode)
    const auto second = line.find(',');
    const std::string rest = line.substr(second + 1);
    std::istringstream cells(rest);
    std::string cell;
    while (std::getline(cells, cell, ','))
      CHECK(std::stod(cell) == doctest::Approx(1.0).epsilon(1e-9));
    ++rows;
  }
  CHECK(rows == 512);

  // single K: no convergence panel, noted
  RunContext one = ctx;
  one.config.k_list = {6};
  one.out_dir = fresh_dir("fig2_one").string();
  auto m1 = cmd_fig2(one);
  CHECK_FALSE(fs::exists(fs::path(one.out_dir) / "fig2_mode_convergence.csv"));
  bool noted = false;
  for (const auto& [k, v] : m1.notes)
    if (k == "mode_convergence") noted = true;
  CHECK(noted);
}

TEST_CASE("cmd_fig3: rank precondition and byte-identical reruns") {
  RunContext ctx;
  ctx.config = doubling_config();
  ctx.config.seeds = 1;
  ctx.workers = 2;
  ctx.out_dir = fresh_dir("fig3").string();

  RunContext bad = ctx;
  bad.config.n_list = {4, 100};  // 4 < 2K-1 = 7
  CHECK_THROWS_AS((void)cmd_fig3(bad), config_error);

  (void)cmd_fig3(ctx);
  const auto ev = slurp(fs::path(ctx.out_dir) / "fig3_eigenvalues.csv");
  const auto er = slurp(fs::path(ctx.out_dir) / "fig3_errors.csv");
  (void)cmd_fig3(ctx);
  CHECK(slurp(fs::path(ctx.out_dir) / "fig3_eigenvalues.csv") == ev);
  CHECK(slurp(fs::path(ctx.out_dir) / "fig3_errors.csv") == er);
}

TEST_CASE("cmd_opuc_diagnostics: uniform density zeros the deviation tables") {
  RunContext ctx;
  ctx.config = doubling_config();
  ctx.workers = 2;
  ctx.out_dir = fresh_dir("opuc").string();
  auto m = cmd_opuc_diagnostics(ctx);

  const std::string dev = slurp(fs::path(ctx.out_dir) / "opuc_deviations.csv");
  CHECK(dev.find("k,s_k,s_prime_k,theta_coeff_abs") == 0);
  std::istringstream in(dev);
  std::string line;
  std::getline(in, line);
  while (std::getline(in, line)) {
    if (line.empty() || line == "\r") continue;
    std::istringstream cells(line);
    std::string k, s, sp;
    std::getline(cells, k, ',');
    std::getline(cells, s, ',');
    std::getline(cells, sp, ',');
    CHECK(std::stod(s) == 0.0);
    CHECK(std::stod(sp) == 0.0);
  }

  const std::string ratio = slurp(fs::path(ctx.out_dir) / "opuc_ratio.csv");
  CHECK(ratio.find("k,lhs,rhs,ratio") == 0);
  std::istringstream rin(ratio);
  std::getline(rin, line);
  while (std::getline(rin, line)) {
    if (line.empty() || line == "\r") continue;
    const auto last = line.rfind(',');
    CHECK(std::stod(line.substr(last + 1)) == 1.0);
  }

  for (const auto& a : m.artifacts) {
    CHECK(fs::exists(fs::path(ctx.out_dir) / a));
    CHECK(fs::file_size(fs::path(ctx.out_dir) / a) > 0);
  }
}
