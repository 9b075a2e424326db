#pragma once
// Shared error type, tolerances and tiny helpers used across the library.

#include <stdexcept>
#include <string>

namespace dsmetric {

// Comparison slack. Distances themselves are exact max/min arithmetic over
// doubles; tolerances only absorb float rounding in derived checks.
inline constexpr double kMetricTol = 1e-9;   // metric axiom validation
inline constexpr double kCmpTol    = 1e-9;   // certificate / bracket comparisons
inline constexpr double kIsoTol    = 1e-9;   // distance-preservation checks
inline constexpr double kGlueFloor = 1e-12;  // smallest identification distance when gluing

enum class Err {
  // metric space validation
  AsymmetricMatrix,
  TriangleViolation,
  NegativeDistance,
  DuplicatePoint,
  CoordMismatch,
  BadShape,
  EmptyNet,
  // relations
  NotSurjectiveForward,
  NotSurjectiveBackward,
  IndexOutOfRange,
  PointNotInCarrier,
  NotAFunction,
  CarrierMismatch,
  SpaceMismatch,
  CompositionNotSurjective,
  // symbolic systems
  DepthOverflow,
  BudgetExceeded,
  NotEuclideanAmbient,
  // clopen matching
  MeshTooCoarse,
  RefinementImpossible,
  LeafCountMismatch,
  NotBijection,
  DistanceNotBelowDelta,
  // gluing / conjugacy
  EpsilonBelowHalfDistortion,
  DegenerateIdentification,
  NotConjugate,
  DimensionMismatch,
  // almost-conjugacy maps
  PartialMap,
  PlacementMissing,
  // pipelines
  GridTooCoarse,
  ModulusInconsistent,
  // i/o
  ParseError,
  IoError,
};

inline const char* err_name(Err e) {
  switch (e) {
    case Err::AsymmetricMatrix: return "AsymmetricMatrix";
    case Err::TriangleViolation: return "TriangleViolation";
    case Err::NegativeDistance: return "NegativeDistance";
    case Err::DuplicatePoint: return "DuplicatePoint";
    case Err::CoordMismatch: return "CoordMismatch";
    case Err::BadShape: return "BadShape";
    case Err::EmptyNet: return "EmptyNet";
    case Err::NotSurjectiveForward: return "NotSurjectiveForward";
    case Err::NotSurjectiveBackward: return "NotSurjectiveBackward";
    case Err::IndexOutOfRange: return "IndexOutOfRange";
    case Err::PointNotInCarrier: return "PointNotInCarrier";
    case Err::NotAFunction: return "NotAFunction";
    case Err::CarrierMismatch: return "CarrierMismatch";
    case Err::SpaceMismatch: return "SpaceMismatch";
    case Err::CompositionNotSurjective: return "CompositionNotSurjective";
    case Err::DepthOverflow: return "DepthOverflow";
    case Err::BudgetExceeded: return "BudgetExceeded";
    case Err::NotEuclideanAmbient: return "NotEuclideanAmbient";
    case Err::MeshTooCoarse: return "MeshTooCoarse";
    case Err::RefinementImpossible: return "RefinementImpossible";
    case Err::LeafCountMismatch: return "LeafCountMismatch";
    case Err::NotBijection: return "NotBijection";
    case Err::DistanceNotBelowDelta: return "DistanceNotBelowDelta";
    case Err::EpsilonBelowHalfDistortion: return "EpsilonBelowHalfDistortion";
    case Err::DegenerateIdentification: return "DegenerateIdentification";
    case Err::NotConjugate: return "NotConjugate";
    case Err::DimensionMismatch: return "DimensionMismatch";
    case Err::PartialMap: return "PartialMap";
    case Err::PlacementMissing: return "PlacementMissing";
    case Err::GridTooCoarse: return "GridTooCoarse";
    case Err::ModulusInconsistent: return "ModulusInconsistent";
    case Err::ParseError: return "ParseError";
    case Err::IoError: return "IoError";
  }
  return "UnknownError";
}

struct DsError : std::runtime_error {
  Err code;
  DsError(Err c, const std::string& msg)
      : std::runtime_error(std::string(err_name(c)) + ": " + msg), code(c) {}
};

[[noreturn]] inline void fail(Err c, const std::string& msg) { throw DsError(c, msg); }

}  // namespace dsmetric
