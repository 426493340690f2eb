#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <algorithm>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "doctest.h"
#include "reslab/scenarios.hpp"
#include "test_util.hpp"

using reslab::ComplexMatrix;
using reslab::cplx;
using reslab::Errc;
using reslab::RegistryOptions;
using reslab::ScenarioReport;
using testutil::fails_as;

namespace fs = std::filesystem;

namespace {

fs::path scratch_dir(const std::string& leaf) {
  const fs::path dir = fs::temp_directory_path() / ("reslab_unit_" + leaf);
  fs::remove_all(dir);
  fs::create_directories(dir);
  return dir;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  REQUIRE(in.good());
  std::ostringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

const reslab::CheckResult& find_check(const ScenarioReport& rep, const std::string& name) {
  for (const auto& c : rep.checks)
    if (c.name == name) return c;
  REQUIRE_MESSAGE(false, "missing check: " << name);
  static reslab::CheckResult dummy;
  return dummy;
}

}  // namespace

TEST_CASE("dense spectrum builder fills the annulus deterministically") {
  const ComplexMatrix N = reslab::build_dense_spectrum_normal(0.9);
  CHECK(N.dim() >= 20);
  CHECK(N.dim() <= 60);
  CHECK(N.data().isDiagonal(0.0));

  double r_lo = 1e9, r_hi = 0.0;
  for (const auto& e : reslab::spectrum(N).flatten()) {
    r_lo = std::min(r_lo, std::abs(e));
    r_hi = std::max(r_hi, std::abs(e));
  }
  CHECK(r_lo == doctest::Approx(0.9).epsilon(1e-12));
  CHECK(r_hi == doctest::Approx(1.0).epsilon(1e-12));

  const ComplexMatrix again = reslab::build_dense_spectrum_normal(0.9);
  CHECK(N.data() == again.data());
}

TEST_CASE("grid sweep stays below the cubic density envelope") {
  const ComplexMatrix N = reslab::build_dense_spectrum_normal(0.35);
  const double violation = reslab::dense_spectrum_max_violation(N, 0.35, 200, 3);
  CHECK(violation > 0.0);
  CHECK(violation <= 1.0);

  const double v1 = reslab::dense_spectrum_max_violation(N, 0.35, 128, 3, 1);
  const double v4 = reslab::dense_spectrum_max_violation(N, 0.35, 128, 3, 4);
  CHECK(v1 == v4);
}

TEST_CASE("builder and sweep reject bad parameters") {
  CHECK(fails_as(Errc::BadRegion, [] { reslab::build_dense_spectrum_normal(0.005); }));
  CHECK(fails_as(Errc::BadRegion, [] { reslab::build_dense_spectrum_normal(0.5, 5); }));
  CHECK(fails_as(Errc::BadRegion, [] { reslab::build_dense_spectrum_normal(0.5, 3, 0); }));
  CHECK(fails_as(Errc::DimensionBudgetExceeded,
                 [] { reslab::build_dense_spectrum_normal(0.2, 3, 100); }));
  const ComplexMatrix N = reslab::build_dense_spectrum_normal(0.9);
  CHECK(fails_as(Errc::BadGrid, [&] { reslab::dense_spectrum_max_violation(N, 0.9, 1); }));
}

TEST_CASE("critical counterexample collapses the growth order") {
  const ScenarioReport rep = reslab::run_counterexample_critical(cplx{1.0, 0.0});
  CHECK(rep.name == "critical_counterexample");
  CHECK(rep.pass);
  for (const char* name : {"f_of_T_exactly_zero", "s_T_near_xi", "s_fT_near_0",
                           "converse_raises_hypothesis_violation"})
    CHECK(find_check(rep, name).pass);
  CHECK(find_check(rep, "s_T_near_xi").value == doctest::Approx(2.0).epsilon(0.06));
  CHECK(find_check(rep, "s_fT_near_0").value == doctest::Approx(1.0).epsilon(0.06));

  const auto j = rep.to_json();
  CHECK(j["schema"] == 1);
  CHECK(j["name"] == "critical_counterexample");
  CHECK(j["checks"].is_array());
  CHECK(j.contains("spec"));
  CHECK(j.contains("details"));
  CHECK(rep.field_csv.rfind("re,im,dist,norm,log_dist,log_norm\n", 0) == 0);

  const ScenarioReport again = reslab::run_counterexample_critical(cplx{1.0, 0.0});
  CHECK(again.to_json().dump() == j.dump());
  CHECK(again.field_csv == rep.field_csv);

  // The construction is translation covariant; an off-axis center works too.
  const ScenarioReport shifted = reslab::run_counterexample_critical(cplx{-2.0, 1.0});
  CHECK(shifted.pass);
  CHECK(find_check(shifted, "f_of_T_exactly_zero").pass);
}

TEST_CASE("registry name table and unknown-name guard") {
  const auto& names = reslab::registry_names();
  const std::vector<std::string> expected{"dense_sp",          "critical_counterexample",
                                          "jordan_family",     "theorem_A_battery",
                                          "converse_battery",  "admissibility_gallery"};
  CHECK(names == expected);

  const fs::path dir = scratch_dir("unknown");
  CHECK(fails_as(Errc::UnknownScenario,
                 [&] { reslab::run_registry({"nope"}, dir.string()); }));
  fs::remove_all(dir);
}

TEST_CASE("registry writes byte-identical artifacts across runs and workers") {
  const fs::path a = scratch_dir("reg_a");
  const fs::path b = scratch_dir("reg_b");
  const fs::path c = scratch_dir("reg_c");

  const auto s1 = reslab::run_registry({"critical_counterexample"}, a.string());
  CHECK(s1.all_pass);
  REQUIRE(s1.items.size() == 1);
  CHECK(s1.items[0].name == "critical_counterexample");
  CHECK(s1.items[0].pass);
  CHECK(s1.items[0].seconds >= 0.0);

  const fs::path report_a = a / "critical_counterexample" / "report.json";
  const fs::path field_a = a / "critical_counterexample" / "field.csv";
  CHECK(s1.items[0].report_path == report_a.string());
  REQUIRE(fs::exists(report_a));
  REQUIRE(fs::exists(field_a));

  const auto parsed = nlohmann::json::parse(slurp(report_a));
  CHECK(parsed["name"] == "critical_counterexample");
  CHECK(parsed["pass"] == true);
  CHECK(slurp(field_a).rfind("re,im,dist,norm,log_dist,log_norm\n", 0) == 0);

  reslab::run_registry({"critical_counterexample"}, b.string());
  CHECK(slurp(b / "critical_counterexample" / "report.json") == slurp(report_a));
  CHECK(slurp(b / "critical_counterexample" / "field.csv") == slurp(field_a));

  RegistryOptions two;
  two.workers = 2;
  reslab::run_registry({"critical_counterexample"}, c.string(), two);
  CHECK(slurp(c / "critical_counterexample" / "report.json") == slurp(report_a));

  fs::remove_all(a);
  fs::remove_all(b);
  fs::remove_all(c);
}

TEST_CASE("jordan family scenario fits every size and center") {
  const fs::path dir = scratch_dir("jordan_family");
  const auto summary = reslab::run_registry({"jordan_family"}, dir.string());
  CHECK(summary.all_pass);

  const auto parsed =
      nlohmann::json::parse(slurp(dir / "jordan_family" / "report.json"));
  CHECK(parsed["pass"] == true);
  CHECK(parsed["checks"].size() == 16);  // 12 fits + 4 translation spreads
  for (const auto& check : parsed["checks"]) CHECK(check["pass"] == true);
  fs::remove_all(dir);
}
