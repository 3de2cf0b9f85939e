#include <cstdio>
#include <filesystem>
#include <fstream>
#include <string>

#include "doctest.h"
#include "tandem/experiment.hpp"

using namespace tandem;
using nlohmann::json;

namespace {
std::string field_of(const json& doc, std::optional<ExperimentKind> kind = std::nullopt) {
  try {
    ExperimentSpec::from_json(doc, kind).validate();
  } catch (const ConfigError& e) {
    return e.field();
  }
  return "<none>";
}
}  // namespace

TEST_CASE("kind names round-trip") {
  for (const auto& name : kind_names()) {
    const auto k = parse_kind(name);
    REQUIRE(k);
    CHECK(to_string(*k) == name);
  }
  CHECK_FALSE(parse_kind("theorem3"));
  CHECK(parse_profile("fast") == Profile::Fast);
  CHECK_FALSE(parse_profile("medium"));
}

TEST_CASE("configuration errors name the offending field") {
  CHECK(field_of(json{{"kind", "solve-m"}, {"speed", 3}}) == "speed");
  CHECK(field_of(json{{"kind", "nope"}}) == "kind");
  CHECK(field_of(json::object()) == "kind");
  CHECK(field_of(json{{"kind", "solve-m"}}, ExperimentKind::Phi) == "kind");
  CHECK(field_of(json{{"kind", "solve-m"}, {"nu", 2.0}}) == "nu");
  CHECK(field_of(json{{"kind", "solve-m"}, {"nu", "1.5"}}) == "nu");
  CHECK(field_of(json{{"kind", "solve-m"}, {"b", -1}}) == "b");
  CHECK(field_of(json{{"kind", "solve-m"}, {"rho", 1.2}}) == "rho");
  CHECK(field_of(json{{"kind", "solve-m"}, {"rho", 1.0}}) == "<none>");
  CHECK(field_of(json{{"kind", "simulate-des"}, {"rho", 1.0}}) == "rho");
  CHECK(field_of(json{{"kind", "simulate-des"}, {"lambda", 0.2}, {"rho", 0.5}}) == "lambda");
  CHECK(field_of(json{{"kind", "theorem1"}, {"lambda", 0.2}}) == "lambda");
  CHECK(field_of(json{{"kind", "theorem2"}, {"rho", 0.9}}) == "rho");
  CHECK(field_of(json{{"kind", "theorem1"}, {"gamma", 0.5}, {"n_grid", {100, 1000, 0.5}}}) == "n_grid[2]");
  CHECK(field_of(json{{"kind", "theorem1"}, {"n_grid", {100, "x"}}}) == "n_grid[1]");
  CHECK(field_of(json{{"kind", "theorem2"}, {"gamma", 1.0}, {"n_grid", {1}}}) == "n_grid[0]");
  CHECK(field_of(json{{"kind", "verify"}, {"checks", {"semigroup", "bogus"}}}) == "checks[1]");
  CHECK(field_of(json{{"kind", "verify"}, {"checks", {"semigroup", "semigroup"}}}) == "checks[1]");
  CHECK(field_of(json{{"kind", "phi"}, {"checks", {"semigroup"}}}) == "checks");
  CHECK(field_of(json{{"kind", "phi"}, {"keep_events", true}}) == "keep_events");
  CHECK(field_of(json{{"kind", "simulate-des"}, {"busy_periods", -5}}) == "busy_periods");
  CHECK(field_of(json{{"kind", "simulate-des"}, {"busy_periods", 2.5}}) == "busy_periods");
  CHECK(field_of(json{{"kind", "theorem2"}, {"t", -1}}) == "t");
  CHECK(field_of(json{{"kind", "theorem2"}, {"t", 0.001}}) == "t");
  CHECK(field_of(json{{"kind", "solve-kappa"}, {"y_grid", {1.0, 0.0}}}) == "y_grid[1]");
  CHECK(field_of(json{{"kind", "verify"}, {"c", 0}}) == "c");
  CHECK(field_of(json{{"kind", "verify"}, {"profile", "medium"}}) == "profile");
  CHECK_THROWS_AS(ExperimentSpec::from_json(json::array()), ConfigError);
}

TEST_CASE("missing configuration file is a configuration error") {
  CHECK_THROWS_AS(ExperimentSpec::from_file("/nonexistent/cfg.json"), ConfigError);
  const auto path = std::filesystem::temp_directory_path() / "tandem_bad.json";
  std::ofstream(path) << "{ not json";
  CHECK_THROWS_AS(ExperimentSpec::from_file(path.string()), ConfigError);
  std::filesystem::remove(path);
}

TEST_CASE("profile defaults") {
  auto s = ExperimentSpec::from_json(json{{"kind", "simulate-des"}});
  CHECK(s.resolved_busy_periods() == 1000000);
  CHECK(s.resolved_lambda() == doctest::Approx(0.3));
  s.profile = Profile::Fast;
  CHECK(s.resolved_busy_periods() == 100000);
  s.keep_events = true;
  CHECK(s.resolved_busy_periods() == 1000);
  CHECK(s.resolved_n_grid() == std::vector<double>{1e2, 1e3, 1e4});
}

TEST_CASE("tables format with round-trip precision") {
  Table t{"x", {"a", "b"}, {}};
  t.add_row({0.1, 1.0 / 3.0});
  t.add_row({2.0, -1e-300});
  CHECK(t.rows() == 2);
  CHECK(t.column("b")[0] == 1.0 / 3.0);
  CHECK(t.to_csv() == "a,b\n0.10000000000000001,0.33333333333333331\n2,-1e-300\n");
  CHECK_THROWS(t.add_row({1.0}));
}

TEST_CASE("solve-kappa without drift reports a constant kappa") {
  auto s = ExperimentSpec::from_json(json{{"kind", "solve-kappa"}, {"y_grid", {0.01, 1.0, 100.0}}});
  const auto r = run(s);
  CHECK(r.passed());
  REQUIRE(r.find("constant"));
  CHECK(r.find("constant")->statistic <= 1e-10);
  const auto* tab = r.table("solve_kappa");
  REQUIRE(tab);
  CHECK(tab->rows() == 3);
  CHECK(tab->at(1, 1) == doctest::Approx(0.87606184166908352).epsilon(1e-12));
  CHECK(r.exit_code() == 0);
}

TEST_CASE("runs are reproducible and independent of the thread count") {
  json doc{{"kind", "theorem2"}, {"gamma", 0.5}, {"n_grid", {100, 1000}}, {"reps", 500}, {"seed", 9}};
  auto a = ExperimentSpec::from_json(doc);
  a.threads = 1;
  auto b = a;
  b.threads = 2;
  const auto ra = run(a);
  const auto rb = run(b);
  REQUIRE(ra.tables.size() == rb.tables.size());
  for (std::size_t i = 0; i < ra.tables.size(); ++i) CHECK(ra.tables[i].to_csv() == rb.tables[i].to_csv());
  b.seed = 10;
  CHECK(run(b).tables.front().to_csv() != ra.tables.front().to_csv());
}

TEST_CASE("outputs land on disk") {
  const auto dir = std::filesystem::temp_directory_path() / "tandem_out_test";
  std::filesystem::remove_all(dir);
  const auto r = run(ExperimentSpec::from_json(json{{"kind", "solve-m"}, {"grid_points", 16}}));
  const auto paths = write_outputs(r, dir.string());
  CHECK(std::filesystem::exists(dir / "solve_m.csv"));
  CHECK(std::filesystem::exists(dir / "report.json"));
  std::ifstream in(dir / "report.json");
  const auto j = json::parse(in);
  CHECK(j["spec"]["kind"] == "solve-m");
  CHECK(j["checks"].size() >= 1);
  std::filesystem::remove_all(dir);
}
