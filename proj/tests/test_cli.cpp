#include <cstdlib>
#include <fstream>
#include <sstream>

#include <nlohmann/json.hpp>

#include "doctest.h"
#include "support.hpp"

#include "crossdiff/app.hpp"
#include "crossdiff/diagnostics.hpp"
#include "crossdiff/errors.hpp"
#include "crossdiff/output.hpp"
#include "crossdiff/scenario.hpp"

using namespace crossdiff;
namespace fs = std::filesystem;

namespace {

const char* kSmall = R"({
  "version": 1,
  "kind": "generic",
  "grid": {"dims": [6, 6]},
  "stepper": {"dt": 0.01, "t_end": 0.05, "picard_max": 20, "picard_tol": 1e-12, "lin_tol": 1e-12},
  "model": {
    "delta": [0.5, 0.4],
    "K": [[1.0, 0.3], [0.25, 1.0]],
    "ell": 1.0,
    "initial": [{"type": "bump", "amplitude": 0.5, "radius": 0.4}, {"type": "bump", "amplitude": 0.4, "radius": 0.4}],
    "dirichlet": [0, 0]
  },
  "diagnostics": {"perturbation": {"amplitude": 0.001, "radius": 0.3}}
})";

std::string read_file(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

fs::path write_config(const std::string& name, const std::string& text) {
  const fs::path dir = fs::temp_directory_path() / "crossdiff_test_configs";
  fs::create_directories(dir);
  const fs::path p = dir / (name + ".json");
  std::ofstream(p) << text;
  return p;
}

struct Invocation {
  int code;
  std::string err;
  fs::path out;
};

Invocation invoke(const std::string& verb, const fs::path& config, const std::string& tag, bool feasible = false) {
  CommandOptions opt;
  opt.verb = verb;
  opt.config_path = config.string();
  opt.out_dir = testing::scratch_dir(tag).string();
  opt.require_feasible = feasible;
  std::ostringstream err;
  const int code = run_command(opt, err);
  return {code, err.str(), opt.out_dir};
}

nlohmann::json manifest(const fs::path& out) { return nlohmann::json::parse(read_file(out / "manifest.json")); }

std::string patched(const std::string& base, const std::string& from, const std::string& to) {
  std::string s = base;
  const auto pos = s.find(from);
  REQUIRE(pos != std::string::npos);
  s.replace(pos, from.size(), to);
  return s;
}

}  // namespace

TEST_CASE("minimal config gets defaults echoed") {
  const auto cfg = parse_scenario_text(R"({"version": 1, "model": {"delta": [1.0], "K": [[1.0]],
    "initial": [{"type": "sine"}], "dirichlet": [0]}})");
  CHECK(cfg.kind == ScenarioKind::generic);
  CHECK(cfg.stepper.dt == 1e-3);
  CHECK(cfg.stepper.lin_tol == 1e-10);
  CHECK(cfg.resolved["stepper"]["dt"] == 1e-3);
  CHECK(cfg.resolved["stepper"]["picard_max"] == 2);
  CHECK(cfg.resolved.contains("grid"));
}

TEST_CASE("unknown keys and malformed files are configuration errors") {
  try {
    parse_scenario_text(R"({"version": 1, "foo": 2})");
    FAIL("expected rejection");
  } catch (const ConfigError& e) {
    CHECK(std::string(e.what()).find("foo") != std::string::npos);
  }
  try {
    parse_scenario_text("{\n  \"version\": 1,\n  \"grid\": {\"dims\": [4,]}\n}");
    FAIL("expected rejection");
  } catch (const ConfigError& e) {
    CHECK(std::string(e.what()).find("line 3") != std::string::npos);
  }
  CHECK_THROWS_AS(parse_scenario_text(R"({"kind": "generic"})"), ConfigError);
  CHECK_THROWS_AS(parse_scenario_text(R"({"version": 2})"), ConfigError);
  CHECK_THROWS_AS(parse_scenario_text(R"({"version": 1, "stepper": {"dt": "fast"}})"), ConfigError);

  const auto inv = invoke("simulate", write_config("unknown", patched(kSmall, "\"kind\"", "\"foo\": 1, \"kind\"")),
                          "unknown");
  CHECK(inv.code == kExitConfigError);
  CHECK(inv.err.find("foo") != std::string::npos);
  CHECK(invoke("simulate", "/nonexistent/config.json", "missing").code == kExitConfigError);
}

TEST_CASE("keulegan kind keeps the density contrast default") {
  const auto cfg = parse_scenario_text(R"({"version": 1, "kind": "keulegan", "grid": {"dims": [20, 5],
    "upper": [1, 0.25]}, "keulegan": {"tilt": 0.3, "pump": 1.0}})");
  const Grid grid = make_grid(cfg);
  const AquiferSpec s = make_aquifer(cfg, grid);
  CHECK(s.alpha == 0.025);
  CHECK(cfg.keulegan.tilt == 0.3);
  CHECK(cfg.keulegan.pump == 1.0);
  CHECK_THROWS_AS(parse_scenario_text(R"({"version": 1, "kind": "keulegan", "model": {"delta": [1]}})"),
                  ConfigError);
}

TEST_CASE("check writes a condition report and honours --require-feasible") {
  const auto cfg = write_config("check", kSmall);
  auto inv = invoke("check", cfg, "check");
  CHECK(inv.code == kExitOk);
  CHECK(fs::exists(inv.out / "conditions.csv"));
  CHECK(read_file(inv.out / "conditions.csv").rfind("name,lhs,rhs,margin,pass\n", 0) == 0);

  // ell = 1 fails the regularity rows of this spec.
  inv = invoke("check", cfg, "check_strict", true);
  CHECK(inv.code == kExitInfeasible);
  CHECK(manifest(inv.out)["status"] == "infeasible");
}

TEST_CASE("simulate writes snapshots, series and a manifest listing existing files") {
  const auto inv = invoke("simulate", write_config("sim", kSmall), "sim");
  REQUIRE(inv.code == kExitOk);
  const auto man = manifest(inv.out);
  CHECK(man["status"] == "ok");
  CHECK(man["exit_code"] == 0);
  CHECK(man["config_hash"].get<std::string>().size() == 16);
  CHECK_FALSE(man.contains("wall_time"));
  for (const auto& a : man["artifacts"]) CHECK(fs::exists(inv.out / a.get<std::string>()));
  const std::string snap = read_file(inv.out / "snapshots" / "snapshot_00000.csv");
  CHECK(snap.rfind("x,y,species,value,t\n", 0) == 0);
  CHECK(read_file(inv.out / "series.csv").rfind("t,min_u1,max_u1,mass_u1,min_u2,max_u2,mass_u2\n", 0) == 0);
}

TEST_CASE("t_end = 0 yields a single snapshot") {
  const auto inv =
      invoke("simulate", write_config("zero", patched(kSmall, "\"t_end\": 0.05", "\"t_end\": 0")), "zero");
  REQUIRE(inv.code == kExitOk);
  int count = 0;
  for (const auto& e : fs::directory_iterator(inv.out / "snapshots")) count += e.is_regular_file();
  CHECK(count == 1);
}

TEST_CASE("solver failure exits 1 and keeps partial output") {
  std::string text = patched(kSmall, "\"lin_tol\": 1e-12", "\"lin_tol\": 1e-300, \"lin_max\": 1");
  text = patched(text, "\"dt\": 0.01, \"t_end\": 0.05", "\"dt\": 1000.0, \"t_end\": 3000.0");
  const auto inv = invoke("simulate", write_config("fail", text), "fail");
  CHECK(inv.code == kExitSolverFailure);
  const auto man = manifest(inv.out);
  CHECK(man["status"] == "solver_failure");
  CHECK(fs::exists(inv.out / "snapshots" / "snapshot_00000.csv"));
  CHECK(fs::exists(inv.out / "series.csv"));
}

TEST_CASE("unwritable output directory is a configuration error") {
  const fs::path blocker = testing::scratch_dir("blocker");
  std::ofstream(blocker) << "file";
  CommandOptions opt;
  opt.verb = "check";
  opt.config_path = write_config("blocked", kSmall).string();
  opt.out_dir = (blocker / "sub").string();
  std::ostringstream err;
  CHECK(run_command(opt, err) == kExitConfigError);
  fs::remove(blocker);
}

TEST_CASE("verb and kind must agree") {
  CHECK(invoke("keulegan", write_config("wrongkind", kSmall), "wrongkind").code == kExitConfigError);
}

TEST_CASE("probe output equals a direct probe on the same inputs") {
  const auto path = write_config("probe", kSmall);
  const auto inv = invoke("probe", path, "probe");
  REQUIRE(inv.code == kExitOk);
  const std::string csv = read_file(inv.out / "probe.csv");
  CHECK(csv.rfind("t,v_norm_u1,v_norm_u2,v_norm_total\n", 0) == 0);

  const ScenarioConfig cfg = parse_scenario(path.string());
  const Grid grid = make_grid(cfg);
  const ModelSpec spec = make_model(cfg);
  const auto& p = cfg.diagnostics.perturbation;
  const auto region = disc_cells(grid, p.center, p.radius);
  const auto edge = region_boundary_cells(grid, region);
  Field pert(2, grid.size());
  for (int c : region) {
    if (std::find(edge.begin(), edge.end(), c) != edge.end()) continue;
    const Point x = grid.center(c);
    const double q = 1.0 - (std::pow(x[0] - p.center[0], 2) + std::pow(x[1] - p.center[1], 2)) / (p.radius * p.radius);
    pert.at(0, c) = pert.at(1, c) = p.amplitude * q * q;
  }
  const auto rep = uniqueness_probe(spec, grid, cfg.stepper, pert, region);
  CHECK(csv == probe_csv(rep, {"u1", "u2"}));
  CHECK(manifest(inv.out)["summary"]["amplification"].get<double>() == rep.amplification);
}

TEST_CASE("seed overrides noise fields deterministically") {
  const std::string text =
      patched(kSmall, "{\"type\": \"bump\", \"amplitude\": 0.5, \"radius\": 0.4}",
              "{\"type\": \"noise\", \"value\": 0.2, \"amplitude\": 0.1, \"seed\": 1}");
  const std::string noisy = patched(text, "\"dirichlet\": [0, 0]", "\"dirichlet\": [0.25, 0]");
  auto cfg = parse_scenario_text(noisy);
  const Grid grid = make_grid(cfg);
  const Field a = initial_field(make_model(cfg), grid);
  apply_seed(cfg, 7);
  const Field b = initial_field(make_model(cfg), grid);
  apply_seed(cfg, 7);
  const Field c = initial_field(make_model(cfg), grid);
  CHECK(a.values != b.values);
  CHECK(b.values == c.values);
  for (double v : b.component(0)) {
    CHECK(v >= 0.2);
    CHECK(v < 0.3);
  }
}

TEST_CASE("repeated invocations are byte-identical") {
  const auto path = write_config("det", kSmall);
  const auto a = invoke("simulate", path, "det_a");
  const auto b = invoke("simulate", path, "det_b");
  REQUIRE(a.code == 0);
  REQUIRE(b.code == 0);
  std::vector<std::string> files;
  for (const auto& e : fs::recursive_directory_iterator(a.out))
    if (e.is_regular_file()) files.push_back(fs::relative(e.path(), a.out).string());
  CHECK(files.size() > 3);
  for (const auto& f : files) CHECK(read_file(a.out / f) == read_file(b.out / f));
}

TEST_CASE("number formatting round-trips") {
  testing::Gen g(61);
  for (int n = 0; n < 1000; ++n) {
    const double v = g.uniform(-1e3, 1e3) * std::pow(10.0, g.integer(-20, 20));
    REQUIRE(std::stod(format_number(v)) == v);
  }
  CHECK(format_number(0.5) == "0.5");
  CHECK(hex64(fnv1a64("")) == "cbf29ce484222325");
  CHECK(hex64(fnv1a64("a")) == "af63dc4c8601ec8c");
}

TEST_CASE("keulegan profiles carry consistent columns") {
  const std::string text = R"({"version": 1, "kind": "keulegan", "grid": {"dims": [10, 4], "upper": [1, 0.25]},
    "stepper": {"dt": 0.01, "t_end": 0.05, "snapshot_every": 5, "picard_max": 20}})";
  const auto inv = invoke("keulegan", write_config("keul", text), "keul");
  REQUIRE(inv.code == kExitOk);
  std::istringstream in(read_file(inv.out / "penalized" / "profiles" / "profile_00001.csv"));
  std::string line;
  std::getline(in, line);
  CHECK(line == "x,y,h,h1,s");
  int rows = 0;
  while (std::getline(in, line)) {
    double x, y, h, h1, s;
    char comma;
    std::istringstream row(line);
    row >> x >> comma >> y >> comma >> h >> comma >> h1 >> comma >> s;
    CHECK(s == doctest::Approx(1.0 - h1).epsilon(1e-15));
    CHECK(h1 <= h);
    CHECK(h <= 1.0);
    ++rows;
  }
  CHECK(rows == 40);
}
