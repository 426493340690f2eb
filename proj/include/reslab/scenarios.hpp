#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "json.hpp"
#include "reslab/base.hpp"
#include "reslab/matrix.hpp"

namespace reslab {

/// One named check inside a scenario report.
struct CheckResult {
  std::string name;
  bool pass = false;
  double value = 0.0;
  double expected_lo = 0.0;
  double expected_hi = 0.0;
  std::string note;
  nlohmann::json to_json() const;
};

struct ScenarioReport {
  std::string name;
  bool pass = false;
  std::vector<CheckResult> checks;
  nlohmann::json spec;     // the declarative scenario description (schema 1)
  nlohmann::json details;  // fits, norms, diagnostics
  std::string field_csv;   // resolvent-field samples backing the fits
  nlohmann::json to_json() const;
};

/// Diagonal operator whose eigenvalues fill rings r_min <= |lambda| <= 1 so
/// densely that dist(lambda, spectrum) <= |lambda|^3 on the whole annulus.
/// Ring gaps and angular steps are kept below r^3/2; the bound is then
/// re-verified on a grid by dense_spectrum_max_violation.
ComplexMatrix build_dense_spectrum_normal(double r_min, int density_exponent = 3,
                                          int dim_budget = 20000);

/// Max over a grid x grid sweep of dist(lambda, spectrum) / |lambda|^d for
/// r_min <= |lambda| <= 1. Must be <= 1 for a correctly built operator.
double dense_spectrum_max_violation(const ComplexMatrix& N, double r_min, int grid = 400,
                                    int density_exponent = 3, int workers = 1);

/// Truncated dense-spectrum study: T = N + Jordan(3,2) as a direct sum,
/// f(z) = z^2 - 3z; fits the growth order of T near {3} (expect 2) and of
/// f(T) near f(sigma(T)) on dist in [10 r_min^3, 1e-1], |z| <= 5 (expect 1).
ScenarioReport run_example_dense_sp(double r_min, std::uint64_t seed = 42, int workers = 1);

/// T = Jordan(xi, 2), f(z) = (z - xi)^2: f(T) is exactly the zero matrix,
/// growth order 2 collapses to 1, and the converse check refuses to run
/// because f' vanishes on the spectrum.
ScenarioReport run_counterexample_critical(cplx xi, std::uint64_t seed = 42, int workers = 1);

struct RegistryOptions {
  std::uint64_t seed = 42;
  int workers = 1;
  bool parallel_scenarios = false;
};

struct RegistrySummary {
  struct Item {
    std::string name;
    bool pass = false;
    double seconds = 0.0;
    std::string report_path;
  };
  std::vector<Item> items;
  bool all_pass = true;
};

const std::vector<std::string>& registry_names();

/// Runs the named scenarios ("all" for every one), writing
/// output_dir/<name>/report.json and field.csv. Reports are byte-identical
/// across runs and worker counts; timings live only in the returned summary.
RegistrySummary run_registry(const std::vector<std::string>& names, const std::string& output_dir,
                             const RegistryOptions& options = {});

}  // namespace reslab
