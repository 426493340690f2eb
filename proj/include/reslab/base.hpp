#pragma once

#include <complex>
#include <cstdint>
#include <stdexcept>
#include <string>

namespace reslab {

using cplx = std::complex<double>;

/// Failure categories. Each carries a stable name and a CLI exit code:
/// parse/usage -> 2, geometry -> 3, fit -> 4, hypothesis -> 5, numeric -> 6.
enum class Errc {
  ParseError,
  UnknownScenario,
  BadDimension,
  NonFinite,
  BadGrid,
  BadRegion,
  EmptyAnnulus,
  ResolutionTooCoarse,
  InsufficientDecades,
  DegenerateFit,
  HypothesisViolation,
  SpectrumProximity,
  RootFindingFailure,
  CriticalValueCollision,
  ContourTooClose,
  QuadratureStall,
  DimensionBudgetExceeded,
  DomainError,
};

const char* errc_name(Errc e);
int errc_exit_code(Errc e);

class Error : public std::runtime_error {
 public:
  Error(Errc kind, const std::string& what)
      : std::runtime_error(std::string(errc_name(kind)) + ": " + what), kind_(kind) {}
  Errc kind() const { return kind_; }
  int exit_code() const { return errc_exit_code(kind_); }

 private:
  Errc kind_;
};

[[noreturn]] inline void fail(Errc kind, const std::string& what) { throw Error(kind, what); }

/// Named tolerances shared across the library. CLI --tol-<name> overrides map
/// onto these fields one-to-one.
struct Tolerances {
  double sing = 1e-12;       // spectral-proximity guard for resolvent norms
  double root = 1e-10;       // max residual accepted for a polished root
  double cluster = 1e-7;     // root clustering / preimage dedup radius
  double remove = 1e-6;      // removable-singularity Taylor-fill switch radius
  double quad = 1e-12;       // relative Frobenius stop for contour quadrature
  double clearance = 1e-3;   // minimum contour clearance to the spectrum
  double slack = 0.15;       // growth-order comparison slack
  double slack_p = 0.25;     // looser slack for p-admissible geometry
};

inline const Tolerances& default_tols() {
  static const Tolerances t{};
  return t;
}

constexpr int kQuadratureStartNodes = 64;
constexpr int kQuadratureMaxNodes = 16384;

}  // namespace reslab
