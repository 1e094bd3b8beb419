#pragma once

// Every numeric tolerance used by the toolkit, in one place.

namespace tomocal::tol {

/// Collinearity of a marker line: max perpendicular deviation relative to
/// the line's extent.
inline constexpr double kCollinearRel = 1e-9;

/// Perpendicularity of the two parallel-rig marker lines: |u_h . u_v|.
inline constexpr double kPerpendicular = 1e-9;

/// Third central moment degeneracy: |sum t^3| < rel * (max |t|)^3 flags a
/// symmetric marker pattern that the angle recovery cannot use.
inline constexpr double kThirdMomentRel = 1e-6;

/// Fan-beam line separation: |C_a - C_b| < rel * D is a degenerate pair.
inline constexpr double kLineSeparationRel = 1e-9;

/// View-pair conditioning: |denominator| <= rel * |M2h(0) * M2v(1)| makes
/// the reference angle unsolvable from that pair.
inline constexpr double kViewPairRel = 1e-9;

/// Second-moment floor, relative to the largest second moment seen in the
/// same group: below it a view carries no usable excitation.
inline constexpr double kDegenerateViewRel = 1e-12;

/// sin^2 estimates may stray outside [0, 1] by at most this much before the
/// view pair is rejected; smaller excursions are clipped.
inline constexpr double kSinSqSlack = 1e-9;

/// |cos| or |sin| of the reference angle below this cannot divide the
/// moment ratios.
inline constexpr double kAxisAngle = 1e-6;

/// Default relative tolerance for matching detected cross-ratios against
/// the rig patterns (clean data; widen for noisy data).
inline constexpr double kCrossRatioRel = 1e-3;

/// Pairwise-distinctness floor for cross-ratio points, relative to span.
inline constexpr double kDistinctPointsRel = 1e-12;

/// Depth-ratio separation: |r_a - r_b| < rel * (r_a + r_b) makes the
/// per-view 2x2 system singular.
inline constexpr double kRatioSeparationRel = 1e-9;

/// Magnification radicand (1+r)^2 may undershoot 1 by at most this much
/// (clamped to r = 0); anything lower is a negative-discriminant failure.
inline constexpr double kRadicandSlack = 1e-9;

/// First-moment offset floor for the magnification reference view,
/// relative to the data scale.
inline constexpr double kReferenceExcitationRel = 1e-9;

/// Consistency checker pass rule: rms residual <= max(abs, rel * scale).
inline constexpr double kConsistencyAbs = 1e-10;
inline constexpr double kConsistencyRel = 1e-8;

}  // namespace tomocal::tol
