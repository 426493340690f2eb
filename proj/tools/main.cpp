#include <cmath>
#include <cstdlib>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"
#include "reslab/calculus.hpp"
#include "reslab/growth.hpp"
#include "reslab/parallel.hpp"
#include "reslab/scenarios.hpp"

namespace {

using reslab::cplx;
using reslab::Errc;

std::vector<double> parse_doubles(const std::string& text, const char* what) {
  std::vector<double> out;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) {
    try {
      std::size_t used = 0;
      out.push_back(std::stod(item, &used));
      while (used < item.size() && std::isspace(static_cast<unsigned char>(item[used]))) ++used;
      if (used != item.size()) throw std::invalid_argument(item);
    } catch (const std::exception&) {
      reslab::fail(Errc::ParseError, std::string("cannot parse ") + what + " value '" + item + "'");
    }
  }
  if (out.empty()) reslab::fail(Errc::ParseError, std::string("empty ") + what + " list");
  return out;
}

cplx parse_complex(const std::string& text, const char* what) {
  const std::vector<double> parts = parse_doubles(text, what);
  if (parts.size() == 1) return cplx{parts[0], 0.0};
  if (parts.size() == 2) return cplx{parts[0], parts[1]};
  reslab::fail(Errc::ParseError, std::string(what) + " must be 're' or 're,im'");
}

nlohmann::json read_json_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) reslab::fail(Errc::ParseError, "cannot open '" + path + "'");
  try {
    return nlohmann::json::parse(in);
  } catch (const nlohmann::json::parse_error& e) {
    reslab::fail(Errc::ParseError, "invalid JSON in '" + path + "': " + e.what());
  }
}

reslab::ComplexMatrix load_matrix(const std::string& path) {
  if (path.size() >= 4 && path.substr(path.size() - 4) == ".csv") {
    std::ifstream in(path, std::ios::binary);
    if (!in) reslab::fail(Errc::ParseError, "cannot open '" + path + "'");
    return reslab::ComplexMatrix::from_csv(in);
  }
  return reslab::ComplexMatrix::from_json(read_json_file(path));
}

void write_artifact(const std::string& path, const std::string& content) {
  if (path == "-") {
    std::cout << content;
    return;
  }
  std::ofstream out(path, std::ios::binary);
  if (!out) reslab::fail(Errc::ParseError, "cannot open output '" + path + "'");
  out << content;
}

std::string json_artifact(const nlohmann::json& j) { return j.dump(2) + "\n"; }

reslab::RegionConfig region_from_flags(const std::string& region_file,
                                       const std::string& region_flag,
                                       const std::vector<std::string>& branch_flags,
                                       const reslab::ComplexMatrix& T,
                                       const reslab::Tolerances& tols) {
  if (!region_file.empty()) return reslab::RegionConfig::from_json(read_json_file(region_file));
  std::vector<reslab::RegionConfig::Branch> branches;
  for (const auto& text : branch_flags) {
    const std::vector<double> v = parse_doubles(text, "--branch");
    if (v.size() != 3 && v.size() != 4)
      reslab::fail(Errc::ParseError, "--branch expects re,im,radius[,order]");
    reslab::RegionConfig::Branch b;
    b.center = cplx{v[0], v[1]};
    b.radius = v[2];
    b.order = v.size() == 4 ? static_cast<int>(std::llround(v[3])) : 2;
    branches.push_back(b);
  }
  if (!region_flag.empty()) {
    const std::vector<double> v = parse_doubles(region_flag, "--region");
    if (v.size() != 3) reslab::fail(Errc::ParseError, "--region expects re,im,radius");
    return reslab::RegionConfig{reslab::Disc{cplx{v[0], v[1]}, v[2]}, std::move(branches)};
  }
  // Default: a disc comfortably containing the spectrum.
  const std::vector<cplx> eigs = reslab::spectrum(T, tols).flatten();
  cplx center{0.0, 0.0};
  for (const cplx& e : eigs) center += e;
  center /= static_cast<double>(eigs.size());
  double radius = 0.0;
  for (const cplx& e : eigs) radius = std::max(radius, std::abs(e - center));
  return reslab::RegionConfig{reslab::Disc{center, 2.0 * radius + 2.0}, std::move(branches)};
}

reslab::ContourSpec contour_from_flags(const std::vector<std::string>& circle_flags) {
  reslab::ContourSpec contour;
  for (const auto& text : circle_flags) {
    const std::vector<double> v = parse_doubles(text, "--contour");
    if (v.size() != 3) reslab::fail(Errc::ParseError, "--contour expects re,im,radius");
    contour.circles.push_back({cplx{v[0], v[1]}, v[2]});
  }
  return contour;
}

// R3 low-discrepancy constants, matching the field sampler.
constexpr double kAlpha1 = 0.8191725133961645;
constexpr double kAlpha2 = 0.6710436067037893;
constexpr double kAlpha3 = 0.5497004779019703;

double splitmix_unit(std::uint64_t& state) {
  state += 0x9E3779B97F4A7C15ULL;
  std::uint64_t z = state;
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
  z = z ^ (z >> 31);
  return static_cast<double>(z >> 11) * 0x1.0p-53;
}

double frac(double x) { return x - std::floor(x); }

/// Deterministic z samples with dist(z, cloud) inside [lo, hi].
std::vector<cplx> band_samples(const std::vector<cplx>& cloud, double lo, double hi, int n,
                               std::uint64_t seed) {
  if (!(lo > 0.0) || !(hi >= lo)) reslab::fail(Errc::EmptyAnnulus, "need 0 < lo <= hi");
  const reslab::CompactSet set = reslab::CompactSet::point_cloud(cloud);
  std::uint64_t mix = seed;
  const double o1 = splitmix_unit(mix), o2 = splitmix_unit(mix), o3 = splitmix_unit(mix);
  std::vector<cplx> out;
  for (long long a = 1; static_cast<int>(out.size()) < n && a <= 256LL * n; ++a) {
    const double u1 = frac(kAlpha1 * static_cast<double>(a) + o1);
    const double u2 = frac(kAlpha2 * static_cast<double>(a) + o2);
    const double u3 = frac(kAlpha3 * static_cast<double>(a) + o3);
    const cplx anchor =
        cloud[static_cast<std::size_t>(u1 * static_cast<double>(cloud.size())) % cloud.size()];
    const double delta = std::exp(std::log(lo) + u2 * (std::log(hi) - std::log(lo)));
    const double theta = 2.0 * M_PI * u3;
    const cplx z = anchor + delta * cplx{std::cos(theta), std::sin(theta)};
    const double d = reslab::distance(set, z);
    if (d >= lo && d <= hi) out.push_back(z);
  }
  if (out.empty()) reslab::fail(Errc::EmptyAnnulus, "no z samples landed in the distance band");
  return out;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"resolvent_lab: resolvent growth laboratory for matrix functions"};
  app.require_subcommand(1);

  std::uint64_t seed = 42;
  if (const char* env = std::getenv("RESOLVENT_LAB_SEED")) {
    try {
      seed = std::stoull(env);
    } catch (const std::exception&) {
      // unusable env seed: keep the default
    }
  }
  int workers = 1;
  reslab::Tolerances tols = reslab::default_tols();

  app.add_option("--seed", seed, "sampling seed (env RESOLVENT_LAB_SEED)")
      ->capture_default_str();
  app.add_option("--workers", workers, "worker threads for parallel-capable operations")
      ->capture_default_str();
  app.add_option("--tol-sing", tols.sing, "spectral-proximity guard")->capture_default_str();
  app.add_option("--tol-root", tols.root, "root residual tolerance")->capture_default_str();
  app.add_option("--tol-cluster", tols.cluster, "root clustering radius")->capture_default_str();
  app.add_option("--tol-remove", tols.remove, "removable-singularity switch radius")
      ->capture_default_str();
  app.add_option("--tol-quad", tols.quad, "quadrature stop tolerance")->capture_default_str();
  app.add_option("--tol-clearance", tols.clearance, "contour clearance to the spectrum")
      ->capture_default_str();
  app.add_option("--tol-slack", tols.slack, "growth-order comparison slack")
      ->capture_default_str();
  app.add_option("--tol-slack-p", tols.slack_p, "slack for admissible-set geometry")
      ->capture_default_str();

  int exit_code = 0;

  {  // pseudospectra <matrix> --grid x0,x1,y0,y1,nx,ny
    auto* cmd = app.add_subcommand("pseudospectra", "log resolvent norm over a grid (CSV)");
    cmd->fallthrough();
    auto matrix_file = std::make_shared<std::string>();
    auto grid_text = std::make_shared<std::string>();
    auto output = std::make_shared<std::string>("-");
    cmd->add_option("matrix", *matrix_file, "matrix file (.json or .csv)")->required();
    cmd->add_option("--grid", *grid_text, "x0,x1,y0,y1,nx,ny")->required();
    cmd->add_option("-o,--output", *output, "output path, - for stdout")->capture_default_str();
    cmd->callback([&, matrix_file, grid_text, output] {
      const reslab::ComplexMatrix T = load_matrix(*matrix_file);
      const std::vector<double> g = parse_doubles(*grid_text, "--grid");
      if (g.size() != 6) reslab::fail(Errc::ParseError, "--grid expects 6 values");
      const double x0 = g[0], x1 = g[1], y0 = g[2], y1 = g[3];
      const auto nx = static_cast<long long>(g[4]), ny = static_cast<long long>(g[5]);
      if (nx < 1 || ny < 1 || g[4] != std::floor(g[4]) || g[5] != std::floor(g[5]))
        reslab::fail(Errc::BadGrid, "grid counts must be positive integers");
      if (!(x1 >= x0) || !(y1 >= y0)) reslab::fail(Errc::BadGrid, "grid bounds are reversed");

      std::vector<std::string> rows(static_cast<std::size_t>(ny));
      reslab::run_chunked(static_cast<std::size_t>(ny), workers,
                          [&](std::size_t rb, std::size_t re) {
        for (std::size_t iy = rb; iy < re; ++iy) {
          std::ostringstream line;
          line << std::setprecision(17);
          const double y =
              ny == 1 ? y0 : y0 + (y1 - y0) * static_cast<double>(iy) / static_cast<double>(ny - 1);
          for (long long ix = 0; ix < nx; ++ix) {
            const double x =
                nx == 1 ? x0 : x0 + (x1 - x0) * static_cast<double>(ix) / static_cast<double>(nx - 1);
            line << x << ',' << y << ',';
            try {
              line << std::log(reslab::resolvent_norm(T, cplx{x, y}, tols));
            } catch (const reslab::Error& err) {
              if (err.kind() != Errc::SpectrumProximity) throw;
              line << "inf";
            }
            line << '\n';
          }
          rows[iy] = line.str();
        }
      });
      std::string body = "re,im,log_norm\n";
      for (const auto& row : rows) body += row;
      write_artifact(*output, body);
    });
  }

  {  // growth-fit <matrix> <set>
    auto* cmd = app.add_subcommand("growth-fit", "fit the resolvent growth order near a set");
    cmd->fallthrough();
    auto matrix_file = std::make_shared<std::string>();
    auto set_file = std::make_shared<std::string>();
    auto output = std::make_shared<std::string>("-");
    auto d_min = std::make_shared<double>(1e-4);
    auto d_max = std::make_shared<double>(1e-1);
    auto n_samples = std::make_shared<int>(2000);
    auto bins = std::make_shared<int>(24);
    cmd->add_option("matrix", *matrix_file, "matrix file (.json or .csv)")->required();
    cmd->add_option("set", *set_file, "compact set file (.json)")->required();
    cmd->add_option("--d-min", *d_min, "annulus inner distance")->capture_default_str();
    cmd->add_option("--d-max", *d_max, "annulus outer distance")->capture_default_str();
    cmd->add_option("-n,--samples", *n_samples, "sample count")->capture_default_str();
    cmd->add_option("--bins", *bins, "envelope bins")->capture_default_str();
    cmd->add_option("-o,--output", *output, "output path, - for stdout")->capture_default_str();
    cmd->callback([&, matrix_file, set_file, output, d_min, d_max, n_samples, bins] {
      const reslab::ComplexMatrix T = load_matrix(*matrix_file);
      const reslab::CompactSet K = reslab::CompactSet::from_json(read_json_file(*set_file));
      reslab::SampleOptions so;
      so.workers = workers;
      const reslab::ResolventField field =
          reslab::sample_field(T, K, *d_min, *d_max, *n_samples, seed, tols, so);
      const reslab::GrowthFit fit = reslab::fit_growth(field, *bins);
      write_artifact(*output, json_artifact(fit.to_json()));
    });
  }

  {  // verify {identity, theorem-a, converse, comparison}
    auto* verify = app.add_subcommand("verify", "check the calculus and growth statements");
    verify->require_subcommand(1);
    verify->fallthrough();

    {
      auto* cmd = verify->add_subcommand(
          "identity", "partial-fraction resolvent identity at one point z");
      cmd->fallthrough();
      auto matrix_file = std::make_shared<std::string>();
      auto function_file = std::make_shared<std::string>();
      auto z_text = std::make_shared<std::string>();
      auto region_file = std::make_shared<std::string>();
      auto region_flag = std::make_shared<std::string>();
      auto branches = std::make_shared<std::vector<std::string>>();
      auto circles = std::make_shared<std::vector<std::string>>();
      auto max_residual = std::make_shared<double>(1e-8);
      auto output = std::make_shared<std::string>("-");
      cmd->add_option("matrix", *matrix_file)->required();
      cmd->add_option("function", *function_file)->required();
      cmd->add_option("--z", *z_text, "evaluation point re,im")->required();
      cmd->add_option("--region-file", *region_file, "region JSON file");
      cmd->add_option("--region", *region_flag, "omega disc re,im,radius");
      cmd->add_option("--branch", *branches, "branch disc re,im,radius[,order] (repeatable)");
      cmd->add_option("--contour", *circles, "contour circle re,im,radius (repeatable)");
      cmd->add_option("--max-residual", *max_residual, "pass threshold")->capture_default_str();
      cmd->add_option("-o,--output", *output)->capture_default_str();
      cmd->callback([&, matrix_file, function_file, z_text, region_file, region_flag, branches,
                     circles, max_residual, output] {
        const reslab::ComplexMatrix T = load_matrix(*matrix_file);
        const reslab::AnalyticFunction f =
            reslab::AnalyticFunction::from_json(read_json_file(*function_file));
        const cplx z = parse_complex(*z_text, "--z");
        const reslab::RegionConfig region =
            region_from_flags(*region_file, *region_flag, *branches, T, tols);
        const reslab::IdentityCheckResult result =
            reslab::resolvent_identity_check(T, f, z, region, contour_from_flags(*circles), tols);
        nlohmann::json j = result.to_json();
        j["z"] = {z.real(), z.imag()};
        j["max_residual"] = *max_residual;
        j["pass"] = result.residual <= *max_residual;
        write_artifact(*output, json_artifact(j));
        if (!(result.residual <= *max_residual)) exit_code = 1;
      });
    }

    {
      auto* cmd = verify->add_subcommand(
          "theorem-a", "growth order of f(T) near f(K) vs the order of T near K");
      cmd->fallthrough();
      auto matrix_file = std::make_shared<std::string>();
      auto function_file = std::make_shared<std::string>();
      auto set_file = std::make_shared<std::string>();
      auto region_file = std::make_shared<std::string>();
      auto region_flag = std::make_shared<std::string>();
      auto branches = std::make_shared<std::vector<std::string>>();
      auto d_min = std::make_shared<double>(1e-4);
      auto d_max = std::make_shared<double>(1e-1);
      auto n_samples = std::make_shared<int>(2000);
      auto bins = std::make_shared<int>(24);
      auto output = std::make_shared<std::string>("-");
      cmd->add_option("matrix", *matrix_file)->required();
      cmd->add_option("function", *function_file)->required();
      cmd->add_option("set", *set_file)->required();
      cmd->add_option("--region-file", *region_file);
      cmd->add_option("--region", *region_flag, "omega disc re,im,radius");
      cmd->add_option("--branch", *branches, "branch disc re,im,radius[,order]");
      cmd->add_option("--d-min", *d_min)->capture_default_str();
      cmd->add_option("--d-max", *d_max)->capture_default_str();
      cmd->add_option("-n,--samples", *n_samples)->capture_default_str();
      cmd->add_option("--bins", *bins)->capture_default_str();
      cmd->add_option("-o,--output", *output)->capture_default_str();
      cmd->callback([&, matrix_file, function_file, set_file, region_file, region_flag, branches,
                     d_min, d_max, n_samples, bins, output] {
        const reslab::ComplexMatrix T = load_matrix(*matrix_file);
        const reslab::AnalyticFunction f =
            reslab::AnalyticFunction::from_json(read_json_file(*function_file));
        const reslab::CompactSet K = reslab::CompactSet::from_json(read_json_file(*set_file));
        const reslab::RegionConfig region =
            region_from_flags(*region_file, *region_flag, *branches, T, tols);
        reslab::VerifyOptions options;
        options.d_min = *d_min;
        options.d_max = *d_max;
        options.n_samples = *n_samples;
        options.bins = *bins;
        options.seed = seed;
        options.workers = workers;
        options.slack = tols.slack;
        options.slack_p = tols.slack_p;
        const reslab::TheoremAReport report =
            reslab::verify_theorem_A(T, K, f, region, options, tols);
        write_artifact(*output, json_artifact(report.to_json()));
        if (!report.pass) exit_code = 1;
      });
    }

    {
      auto* cmd = verify->add_subcommand(
          "converse", "transfer of growth from f(T) back to T (hypothesis-checked)");
      cmd->fallthrough();
      auto matrix_file = std::make_shared<std::string>();
      auto function_file = std::make_shared<std::string>();
      auto set_file = std::make_shared<std::string>();
      auto region_file = std::make_shared<std::string>();
      auto region_flag = std::make_shared<std::string>();
      auto branches = std::make_shared<std::vector<std::string>>();
      auto d_min = std::make_shared<double>(1e-4);
      auto d_max = std::make_shared<double>(1e-1);
      auto n_samples = std::make_shared<int>(2000);
      auto bins = std::make_shared<int>(24);
      auto output = std::make_shared<std::string>("-");
      cmd->add_option("matrix", *matrix_file)->required();
      cmd->add_option("function", *function_file)->required();
      cmd->add_option("set", *set_file)->required();
      cmd->add_option("--region-file", *region_file);
      cmd->add_option("--region", *region_flag, "omega disc re,im,radius");
      cmd->add_option("--branch", *branches, "branch disc re,im,radius[,order]");
      cmd->add_option("--d-min", *d_min)->capture_default_str();
      cmd->add_option("--d-max", *d_max)->capture_default_str();
      cmd->add_option("-n,--samples", *n_samples)->capture_default_str();
      cmd->add_option("--bins", *bins)->capture_default_str();
      cmd->add_option("-o,--output", *output)->capture_default_str();
      cmd->callback([&, matrix_file, function_file, set_file, region_file, region_flag, branches,
                     d_min, d_max, n_samples, bins, output] {
        const reslab::ComplexMatrix T = load_matrix(*matrix_file);
        const reslab::AnalyticFunction f =
            reslab::AnalyticFunction::from_json(read_json_file(*function_file));
        const reslab::CompactSet K = reslab::CompactSet::from_json(read_json_file(*set_file));
        const reslab::RegionConfig region =
            region_from_flags(*region_file, *region_flag, *branches, T, tols);
        reslab::VerifyOptions options;
        options.d_min = *d_min;
        options.d_max = *d_max;
        options.n_samples = *n_samples;
        options.bins = *bins;
        options.seed = seed;
        options.workers = workers;
        options.slack = tols.slack;
        options.slack_p = tols.slack_p;
        const reslab::ConverseReport report =
            reslab::verify_converse(T, K, f, region, options, tols);
        write_artifact(*output, json_artifact(report.to_json()));
        if (!report.pass) exit_code = 1;
      });
    }

    {
      auto* cmd = verify->add_subcommand(
          "comparison", "||(f(T)-z)^{-1}|| against the dominant preimage resolvent");
      cmd->fallthrough();
      auto matrix_file = std::make_shared<std::string>();
      auto function_file = std::make_shared<std::string>();
      auto region_file = std::make_shared<std::string>();
      auto region_flag = std::make_shared<std::string>();
      auto branches = std::make_shared<std::vector<std::string>>();
      auto n_z = std::make_shared<int>(100);
      auto band_text = std::make_shared<std::string>("1e-3,1e-1");
      auto bounds_text = std::make_shared<std::string>();
      auto output = std::make_shared<std::string>("-");
      cmd->add_option("matrix", *matrix_file)->required();
      cmd->add_option("function", *function_file)->required();
      cmd->add_option("--region-file", *region_file);
      cmd->add_option("--region", *region_flag, "omega disc re,im,radius");
      cmd->add_option("--branch", *branches, "branch disc re,im,radius[,order]");
      cmd->add_option("--n-z", *n_z, "number of z samples")->capture_default_str();
      cmd->add_option("--z-band", *band_text, "dist band lo,hi around f(sigma(T))")
          ->capture_default_str();
      cmd->add_option("--bounds", *bounds_text, "pass bounds lo,hi on the ratio extrema");
      cmd->add_option("-o,--output", *output)->capture_default_str();
      cmd->callback([&, matrix_file, function_file, region_file, region_flag, branches, n_z,
                     band_text, bounds_text, output] {
        const reslab::ComplexMatrix T = load_matrix(*matrix_file);
        const reslab::AnalyticFunction f =
            reslab::AnalyticFunction::from_json(read_json_file(*function_file));
        const reslab::RegionConfig region =
            region_from_flags(*region_file, *region_flag, *branches, T, tols);
        const std::vector<double> band = parse_doubles(*band_text, "--z-band");
        if (band.size() != 2) reslab::fail(Errc::ParseError, "--z-band expects lo,hi");
        std::vector<cplx> images;
        for (const cplx& e : reslab::spectrum(T, tols).flatten()) images.push_back(f.eval(e));
        const std::vector<cplx> zs = band_samples(images, band[0], band[1], *n_z, seed);
        const reslab::ComparisonScan scan =
            reslab::resolvent_comparison_scan(T, f, region, zs, tols);
        nlohmann::json j = scan.to_json();
        bool pass = std::isfinite(scan.min_ratio) && scan.min_ratio > 0.0 &&
                    std::isfinite(scan.max_ratio);
        if (!bounds_text->empty()) {
          const std::vector<double> bounds = parse_doubles(*bounds_text, "--bounds");
          if (bounds.size() != 2) reslab::fail(Errc::ParseError, "--bounds expects lo,hi");
          pass = pass && scan.min_ratio >= bounds[0] && scan.max_ratio <= bounds[1];
          j["bounds"] = {bounds[0], bounds[1]};
        }
        j["pass"] = pass;
        write_artifact(*output, json_artifact(j));
        if (!pass) exit_code = 1;
      });
    }
  }

  {  // admissibility <set>
    auto* cmd = app.add_subcommand("admissibility",
                                   "fit the thickened-measure exponent p of a compact set");
    cmd->fallthrough();
    auto set_file = std::make_shared<std::string>();
    auto sigmas_text = std::make_shared<std::string>();
    auto radii_text = std::make_shared<std::string>();
    auto centers = std::make_shared<std::vector<std::string>>();
    auto resolution = std::make_shared<int>(512);
    auto output = std::make_shared<std::string>("-");
    cmd->add_option("set", *set_file, "compact set file (.json)")->required();
    cmd->add_option("--sigmas", *sigmas_text, "thickening widths, comma separated")->required();
    cmd->add_option("--radii", *radii_text, "window radii, comma separated")->required();
    cmd->add_option("--center", *centers, "window center re,im (repeatable)")->required();
    cmd->add_option("--resolution", *resolution, "cells per window side")->capture_default_str();
    cmd->add_option("-o,--output", *output)->capture_default_str();
    cmd->callback([&, set_file, sigmas_text, radii_text, centers, resolution, output] {
      const reslab::CompactSet G = reslab::CompactSet::from_json(read_json_file(*set_file));
      std::vector<cplx> center_values;
      for (const auto& text : *centers) center_values.push_back(parse_complex(text, "--center"));
      const reslab::AdmissibilityFit fit = reslab::fit_admissibility(
          G, parse_doubles(*sigmas_text, "--sigmas"), parse_doubles(*radii_text, "--radii"),
          center_values, *resolution, workers);
      write_artifact(*output, json_artifact({{"p_hat", fit.p_hat},
                                             {"raw_slope", fit.raw_slope},
                                             {"C_hat", fit.C_hat},
                                             {"r_squared", fit.r_squared},
                                             {"used_triples", fit.used_triples}}));
    });
  }

  {  // scenario {run, list}
    auto* scenario = app.add_subcommand("scenario", "declarative example registry");
    scenario->require_subcommand(1);
    scenario->fallthrough();

    auto* list_cmd = scenario->add_subcommand("list", "print the registry names");
    list_cmd->callback([] {
      for (const auto& name : reslab::registry_names()) std::cout << name << '\n';
    });

    auto* run_cmd = scenario->add_subcommand("run", "execute scenarios and write artifacts");
    run_cmd->fallthrough();
    auto names = std::make_shared<std::vector<std::string>>();
    auto output_dir = std::make_shared<std::string>("scenario_out");
    auto parallel = std::make_shared<bool>(false);
    run_cmd->add_option("names", *names, "scenario names, or 'all'");
    run_cmd->add_option("--output-dir", *output_dir, "artifact directory")
        ->capture_default_str();
    run_cmd->add_flag("--parallel", *parallel, "run scenarios concurrently");
    run_cmd->callback([&, names, output_dir, parallel] {
      reslab::RegistryOptions options;
      options.seed = seed;
      options.workers = workers;
      options.parallel_scenarios = *parallel;
      const reslab::RegistrySummary summary =
          reslab::run_registry(*names, *output_dir, options);
      std::size_t width = 4;
      for (const auto& item : summary.items) width = std::max(width, item.name.size());
      for (const auto& item : summary.items)
        std::cout << std::left << std::setw(static_cast<int>(width) + 2) << item.name
                  << (item.pass ? "PASS" : "FAIL") << "  " << std::fixed << std::setprecision(2)
                  << std::setw(8) << item.seconds << "s  " << item.report_path << '\n';
      std::cout << (summary.all_pass ? "all scenarios passed" : "some scenarios FAILED") << '\n';
      if (!summary.all_pass) exit_code = 1;
    });
  }

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 2;
  } catch (const reslab::Error& e) {
    std::cerr << e.what() << '\n';
    return e.exit_code();
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 6;
  }
  return exit_code;
}
