#include <filesystem>
#include <fstream>

#include "doctest.h"
#include "statdisc/scenario.hpp"

using namespace statdisc;
using nlohmann::json;

namespace {

json minimal() { return json::parse(R"({"pencil": [[[[1, 0]]]]})"); }

std::string slurp(const std::filesystem::path& p) {
  std::ifstream in(p);
  return std::string(std::istreambuf_iterator<char>(in), {});
}

}  // namespace

TEST_CASE("parsing defaults and fields") {
  const Scenario s = parse_scenario(minimal());
  CHECK(s.n() == 1);
  CHECK(s.d() == 1);
  CHECK(s.t == 0.0);
  CHECK(s.alpha == kDefaultAlpha);
  CHECK(s.solver.nf == kDefaultTruncation);
  CHECK(s.analyses.empty());

  json j = minimal();
  j["pencil"] = json::parse(R"([[[[1,0],[0,2]],[[0,-2],[-1,0]]], [[0, 0], [0, 1]]])");
  j["perturbation"] = json::parse(R"({"terms": [{"component": 1, "coefficient": 0.5, "exponents": {"reZ": [1, 0], "imW": [0, 2]}}]})");
  j["t"] = 0.1;
  j["solver"] = {{"nf", 16}, {"grid", 64}};
  j["analyses"] = {"check"};
  const Scenario s2 = parse_scenario(j);
  CHECK(s2.n() == 2);
  CHECK(s2.d() == 2);
  CHECK(s2.pencil[0](0, 1) == cplx(0.0, 2.0));
  CHECK(s2.pencil[0](1, 0) == cplx(0.0, -2.0));
  REQUIRE(s2.perturbation.terms().size() == 1);
  CHECK(s2.perturbation.terms()[0].im_w == std::vector<int>{0, 2});
  CHECK(s2.perturbation.terms()[0].im_z == std::vector<int>{0, 0});
  CHECK(s2.solver.grid == 64);

  json c8 = minimal();
  c8["pencil"] = "c8_example";
  CHECK(parse_scenario(c8).n() == 4);
}

TEST_CASE("configuration errors") {
  auto rejects = [](const std::function<void(json&)>& edit) {
    json j = minimal();
    edit(j);
    CHECK_THROWS_AS(parse_scenario(j), ConfigError);
  };
  rejects([](json& j) { j.erase("pencil"); });
  rejects([](json& j) { j["pencil"] = "nope"; });
  rejects([](json& j) { j["pencil"] = json::parse(R"([[[[0, 1]]]])"); });  // not Hermitian
  rejects([](json& j) { j["n"] = 3; });
  rejects([](json& j) { j["alpha"] = 1.5; });
  rejects([](json& j) { j["alpha"] = "half"; });
  rejects([](json& j) { j["analyses"] = {"everything"}; });
  rejects([](json& j) { j["determine"] = {{"automorphisms", {"shear"}}}; });
  rejects([](json& j) { j["solver"] = {{"nf", 64}, {"grid", 100}}; });
  rejects([](json& j) { j["perturbation"] = json::parse(R"({"terms": [{"component": 0}]})"); });
  rejects([](json& j) { j["perturbation"] = json::parse(R"({"terms": [{"component": 0, "coefficient": 1, "exponents": {"reZ": [2]}}]})"); });
  CHECK_THROWS_AS(parse_scenario(json::array()), ConfigError);
  CHECK_THROWS_AS(load_scenario("/nonexistent/config.json"), ConfigError);
}

TEST_CASE("scenario echo round trips") {
  json j = minimal();
  j["perturbation"] = json::parse(R"({"terms": [{"component": 0, "coefficient": 1, "exponents": {"reZ": [3]}}]})");
  j["t"] = 0.02;
  const Scenario s = parse_scenario(j);
  const Scenario again = parse_scenario(json::parse(scenario_to_json(s).dump()));
  CHECK(scenario_to_json(again).dump() == scenario_to_json(s).dump());
}

TEST_CASE("empty analysis list passes") {
  const RunResult r = run_scenario(parse_scenario(minimal()));
  CHECK(r.exit_code == 0);
  CHECK(r.report["status"] == "passed");
  CHECK(r.report["schema_version"] == kSchemaVersion);
}

TEST_CASE("runs are deterministic and write artifacts") {
  json j = minimal();
  j["solver"] = {{"nf", 16}, {"grid", 64}};
  j["analyses"] = {"check", "indices", "kernel"};
  const Scenario s = parse_scenario(j);
  const auto base = std::filesystem::temp_directory_path() / "statdisc_test_io";
  std::filesystem::remove_all(base);
  const RunResult a = run_scenario(s, base / "a");
  const RunResult b = run_scenario(s, base / "b");
  CHECK(a.exit_code == 0);
  CHECK(a.report.dump() == b.report.dump());
  CHECK(slurp(base / "a" / "report.json") == slurp(base / "b" / "report.json"));
  CHECK(std::filesystem::exists(base / "a" / "kernel_singular_values.csv"));
  CHECK(a.report["analyses"]["indices"]["maslov"] == 4);
  std::filesystem::remove_all(base);
}

TEST_CASE("the C8 example reports a deficient center map") {
  json j = minimal();
  j["pencil"] = "c8_example";
  j["analyses"] = {"check", "centers"};
  const RunResult r = run_scenario(parse_scenario(j));
  CHECK(r.exit_code == 0);
  CHECK(r.report["analyses"]["check"]["fully"] == false);
  CHECK(r.report["analyses"]["centers"]["rank"] == 14);
}

TEST_CASE("csv writer") {
  const auto p = std::filesystem::temp_directory_path() / "statdisc_csv_test.csv";
  {
    CsvWriter w(p, {"a", "b"});
    w.row({0.1, 2.0});
    CHECK_THROWS(w.row({1.0}));
  }
  CHECK(slurp(p) == "a,b\n0.10000000000000001,2\n");
  std::filesystem::remove(p);
}
