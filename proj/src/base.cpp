#include "reslab/base.hpp"

namespace reslab {

const char* errc_name(Errc e) {
  switch (e) {
    case Errc::ParseError: return "ParseError";
    case Errc::UnknownScenario: return "UnknownScenario";
    case Errc::BadDimension: return "BadDimension";
    case Errc::NonFinite: return "NonFinite";
    case Errc::BadGrid: return "BadGrid";
    case Errc::BadRegion: return "BadRegion";
    case Errc::EmptyAnnulus: return "EmptyAnnulus";
    case Errc::ResolutionTooCoarse: return "ResolutionTooCoarse";
    case Errc::InsufficientDecades: return "InsufficientDecades";
    case Errc::DegenerateFit: return "DegenerateFit";
    case Errc::HypothesisViolation: return "HypothesisViolation";
    case Errc::SpectrumProximity: return "SpectrumProximity";
    case Errc::RootFindingFailure: return "RootFindingFailure";
    case Errc::CriticalValueCollision: return "CriticalValueCollision";
    case Errc::ContourTooClose: return "ContourTooClose";
    case Errc::QuadratureStall: return "QuadratureStall";
    case Errc::DimensionBudgetExceeded: return "DimensionBudgetExceeded";
    case Errc::DomainError: return "DomainError";
  }
  return "UnknownError";
}

int errc_exit_code(Errc e) {
  switch (e) {
    case Errc::ParseError:
    case Errc::UnknownScenario:
      return 2;
    case Errc::BadDimension:
    case Errc::NonFinite:
    case Errc::BadGrid:
    case Errc::BadRegion:
    case Errc::EmptyAnnulus:
    case Errc::ResolutionTooCoarse:
      return 3;
    case Errc::InsufficientDecades:
    case Errc::DegenerateFit:
      return 4;
    case Errc::HypothesisViolation:
      return 5;
    case Errc::SpectrumProximity:
    case Errc::RootFindingFailure:
    case Errc::CriticalValueCollision:
    case Errc::ContourTooClose:
    case Errc::QuadratureStall:
    case Errc::DimensionBudgetExceeded:
    case Errc::DomainError:
      return 6;
  }
  return 1;
}

}  // namespace reslab
