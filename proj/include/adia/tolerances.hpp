#pragma once

// Default numerical thresholds shared by every module. Acceptance tests
// assert against these values.
namespace adia::tol {

inline constexpr double kUnitVector = 1e-9;
inline constexpr double kNormalized = 1e-12;
inline constexpr double kHermitian = 1e-12;
inline constexpr double kUnitary = 1e-8;
inline constexpr double kGapFloor = 1e-12;
inline constexpr double kMaxUnitarityDrift = 1e-8;
inline constexpr double kEnsembleWeightSum = 1e-9;

/// Relative step for central differences of tabulated models: h = kFiniteDiffStep * max(1, |t|).
inline constexpr double kFiniteDiffStep = 1e-6;

}  // namespace adia::tol
