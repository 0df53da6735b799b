#include "doctest.h"

#include "jflow/app.hpp"
#include "jflow/error.hpp"
#include "jflow/io.hpp"
#include "jflow/snapshot.hpp"

#include <algorithm>
#include <filesystem>
#include <sstream>

using namespace jflow;
using namespace jflow::app;
namespace fs = std::filesystem;

namespace {

fs::path scratch(const std::string& name) {
  const fs::path p = fs::temp_directory_path() / ("jflow_unit_" + name);
  fs::remove_all(p);
  fs::create_directories(p);
  return p;
}

bool has_problem(const ConfigError& e, const std::string& needle) {
  return std::any_of(e.problems.begin(), e.problems.end(),
                     [&](const std::string& s) { return s.find(needle) != std::string::npos; });
}

const Verdict* verdict(const RunRecord& rec, const std::string& name) {
  for (const auto& v : rec.verdicts)
    if (v.name == name) return &v;
  return nullptr;
}

} // namespace

TEST_CASE("parse_config defaults") {
  const auto cfg = parse_config("preset = smooth_split\nN = 32\n");
  CHECK(cfg.n == 32);
  CHECK(cfg.preset_name == "smooth_split");
  CHECK(cfg.backend == Backend::split);
  CHECK(cfg.eps_list == std::vector<double>{0.0});
  CHECK(cfg.flow.dt_safety == 0.2);
  CHECK_NOTHROW(validate(cfg));

  const auto deg = parse_config("preset = degenerate_split\n");
  CHECK(deg.eps_list == std::vector<double>{0.2, 0.1, 0.05});
  CHECK(deg.preset.divisor);
}

TEST_CASE("parse_config rejections") {
  SUBCASE("odd N") {
    try {
      parse_config("preset = identity\nN = 15\n");
      FAIL("expected ConfigError");
    } catch (const ConfigError& e) {
      CHECK(has_problem(e, "N must be even"));
    }
  }
  SUBCASE("negative eps names the entry") {
    try {
      parse_config("preset = degenerate_split\neps = 0.2, -0.1\n");
      FAIL("expected ConfigError");
    } catch (const ConfigError& e) {
      CHECK(has_problem(e, "eps[1]"));
    }
  }
  SUBCASE("every problem at once") {
    try {
      parse_config("preset = identity\nN = 15\nbogus = 1\n[flow]\ndt_safety = x\n");
      FAIL("expected ConfigError");
    } catch (const ConfigError& e) {
      CHECK(e.problems.size() >= 3);
      CHECK(has_problem(e, "bogus"));
      CHECK(has_problem(e, "dt_safety"));
    }
  }
  SUBCASE("version and preset") {
    CHECK_THROWS_AS(parse_config("version = 2\npreset = identity\n"), ConfigError);
    CHECK_THROWS_AS(parse_config("preset = nope\n"), ConfigError);
  }
  SUBCASE("q monitor proviso") {
    CHECK_THROWS_AS(parse_config("preset = degenerate_split\n[diagnostics]\nq_A = 10\nq_delta = 0.1\n"), ConfigError);
  }
}

TEST_CASE("overrides and hashing") {
  const std::string text = "preset = smooth_split\nN = 16\n";
  const auto a = parse_config(text);
  const auto b = parse_config(text, {{"flow.max_time", "3"}});
  CHECK(b.flow.max_time == 3.0);
  CHECK(a.hash() != b.hash());
  CHECK(a.hash() == parse_config(text).hash());
  CHECK(a.hash().size() == 16);
}

TEST_CASE("explicit classes and modes") {
  const auto cfg = parse_config(
      "N = 8\nbackend = full\n[chi0]\nclass = 1 1 0 0\n[omega0]\nclass = 1 1 0 0\nmodes = cos 0.01 1 0 1 0; sin 0.02 0 1 0 0\n"
      "[omega_hat]\nclass = 1 1 0 0\n");
  CHECK(cfg.backend == Backend::full);
  REQUIRE(cfg.preset.omega0.potential.size() == 2);
  CHECK_FALSE(cfg.preset.omega0.potential[1].cosine);
  CHECK(cfg.preset.omega0.potential[0].k == std::array<int, 4>{1, 0, 1, 0});
}

TEST_CASE("random initial potentials follow the seed") {
  const std::string text = "preset = smooth_split\nN = 8\n[init]\nrandom_modes = 4\nrandom_amplitude = 0.01\n";
  const auto a = parse_config(text, {{"seed", "3"}});
  const auto b = parse_config(text, {{"seed", "3"}});
  const auto c = parse_config(text, {{"seed", "4"}});
  CHECK((a.initial_potential() - b.initial_potential()).sup_abs() == 0.0);
  CHECK((a.initial_potential() - c.initial_potential()).sup_abs() > 0.0);
}

TEST_CASE("check-classes on the identity") {
  auto cfg = parse_config("preset = identity\nN = 8\n", {{"out", scratch("classes").string()}});
  const auto rec = execute(cfg, "check-classes");
  CHECK(rec.exit_code() == 0);
  CHECK(rec.scalars.at("c") == doctest::Approx(2.0));
  CHECK(rec.scalars.at("margin") == doctest::Approx(1.0));
}

TEST_CASE("run refuses a cone-violating pair") {
  const fs::path out = scratch("cone");
  auto cfg = parse_config("N = 8\n[chi0]\nclass = 1 1 0 0\n[omega0]\nclass = 2 -0.5 0 0\n[omega_hat]\nclass = 1 1 0 0\n",
                          {{"out", out.string()}});
  const auto rec = execute(cfg, "run");
  CHECK(rec.exit_code() != 0);
  REQUIRE_FALSE(rec.errors.empty());
  CHECK(rec.errors.front().find("margin") != std::string::npos);
  const auto classes = execute(cfg, "check-classes");
  CHECK(classes.exit_code() != 0);
}

TEST_CASE("run writes a complete record") {
  const fs::path out = scratch("run");
  auto cfg = parse_config("preset = smooth_split\nN = 8\n[flow]\nmax_time = 20\n", {{"out", out.string()}});
  const auto rec = execute(cfg, "run");
  CHECK(rec.exit_code() == 0);
  for (const auto& name : {"converged", "max_principle", "trace_bound", "J_nonincreasing"}) {
    const Verdict* v = verdict(rec, name);
    REQUIRE(v);
    CHECK(v->ok);
  }
  CHECK(fs::exists(out / "run.json"));
  CHECK(fs::exists(out / "series.csv"));
  CHECK(fs::exists(out / "fields" / "phi.jflw"));

  std::vector<std::string> warnings;
  const auto back = read_record(out / "run.json", &warnings);
  CHECK(back == rec);
  CHECK(warnings.empty());

  const auto snap = read_snapshot(out / "fields" / "phi.jflw");
  CHECK(snap.components.size() == 2);
  CHECK(snap.components[0].grid().n() == 8);
}

TEST_CASE("record integrity warnings") {
  const fs::path out = scratch("integrity");
  const fs::path ini = out / "cfg.ini";
  write_file_atomic(ini, "preset = identity\nN = 8\n");
  auto cfg = load_config(ini, {{"out", (out / "o").string()}});
  const auto rec = execute(cfg, "run");
  REQUIRE(rec.exit_code() == 0);
  const fs::path record = out / "o" / "run.json";

  fs::remove(out / "o" / "series.csv");
  std::vector<std::string> warnings;
  (void)read_record(record, &warnings);
  CHECK(std::any_of(warnings.begin(), warnings.end(),
                    [](const std::string& w) { return w.find("series.csv") != std::string::npos; }));

  write_file_atomic(ini, "preset = identity\nN = 10\n");
  warnings.clear();
  (void)read_record(record, &warnings);
  CHECK(std::any_of(warnings.begin(), warnings.end(),
                    [](const std::string& w) { return w.rfind("stale", 0) == 0; }));

  write_file_atomic(record, "{\"schema_version\": 1, \"command\": ");
  CHECK_THROWS_AS(read_record(record), FormatError);
  write_file_atomic(record, "{\"schema_version\": 9}");
  CHECK_THROWS_AS(read_record(record), FormatError);
}

TEST_CASE("json round trip keeps non-finite values") {
  RunRecord rec;
  rec.command = "run";
  rec.verdicts.push_back({"x", true, std::numeric_limits<double>::infinity(), -0.5, "d"});
  rec.scalars["nan"] = std::numeric_limits<double>::quiet_NaN();
  rec.scalars["tiny"] = 1e-300;
  SeriesRow row;
  row.label = "eps=0.1";
  row.h.t = 0.1 + 1e-17;
  row.h.J = -1.0 / 3.0;
  rec.rows.push_back(row);
  const auto back = from_json(to_json(rec));
  CHECK(std::isnan(back.scalars.at("nan")));
  CHECK(back.scalars.at("tiny") == 1e-300);
  CHECK(back.verdicts == rec.verdicts);
  CHECK(back.rows == rec.rows);
}

TEST_CASE("identical config and seed give identical CSV") {
  const std::string text = "preset = smooth_split\nN = 8\n[flow]\nmax_time = 0.05\n[init]\nrandom_modes = 3\n"
                           "random_amplitude = 0.005\n";
  const fs::path a = scratch("det_a"), b = scratch("det_b");
  (void)execute(parse_config(text, {{"out", a.string()}, {"seed", "11"}}), "run");
  (void)execute(parse_config(text, {{"out", b.string()}, {"seed", "11"}}), "run");
  CHECK(read_file(a / "series.csv") == read_file(b / "series.csv"));
  CHECK(read_file(a / "fields" / "phi.jflw") == read_file(b / "fields" / "phi.jflw"));
}

TEST_CASE("functionals and report commands") {
  const fs::path out = scratch("func");
  auto cfg = parse_config("preset = degenerate_split\nN = 8\nbackend = full\neps = 0.2\n[init]\nmodes = cos 0.01 1 0 1 0\n",
                          {{"out", out.string()}});
  const auto rec = execute(cfg, "functionals");
  CHECK(rec.exit_code() == 0);
  CHECK(rec.scalars.count("J") == 1);
  CHECK(rec.scalars.count("M") == 1);
  const auto rep = execute(cfg, "report");
  CHECK(rep.exit_code() == 0);
  CHECK(fs::exists(out / "report.json"));
}

TEST_CASE("snapshot format") {
  const Grid g = Grid::plane(4);
  Snapshot s;
  s.components.push_back(ScalarField::sample(g, [](const auto& p) { return p[0] - 2 * p[1]; }));
  std::stringstream buf;
  write_snapshot(buf, s);
  const std::string bytes = buf.str();
  CHECK(bytes.substr(0, 4) == "JFLW");
  CHECK(bytes.size() == 4 + 2 + 4 + 2 + 16 * 8);
  const auto back = read_snapshot(buf);
  REQUIRE(back.components.size() == 1);
  CHECK((back.components[0] - s.components[0]).sup_abs() == 0.0);
  std::stringstream bad("JFLX....");
  CHECK_THROWS_AS(read_snapshot(bad), FormatError);
}
