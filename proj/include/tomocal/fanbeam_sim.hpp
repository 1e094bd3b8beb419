#pragma once

/// @file
/// Fan-beam forward model for sources on the line x1 = D and the detector
/// on the x2 axis, plus the two reparameterizations that leave detected
/// positions unchanged (shear gauge and depth rescaling).

#include <span>
#include <vector>

#include "tomocal/geometry.hpp"

namespace tomocal {

/// Detector ordinate and projection weight of a single marker.
struct WeightedPosition {
    double position = 0.0;
    double weight = 0.0;
};

/// Projects marker c from source (D, lambda): position
/// (c2 D - c1 lambda) / (D - c1) + jitter, weight 1 / (D - c1). The marker
/// must lie in the slab 0 <= c1 < D.
WeightedPosition project_marker_fanbeam(Point2 c, double lambda, double jitter, double D);

/// Projected marker centers of one view, split by marker line. Positions
/// come out ascending per line (the projection is affine and increasing in
/// the line ordinate).
struct FanBeamDetections {
    DiracProjection a;
    DiracProjection b;
};

FanBeamDetections project_rig_fanbeam(const FanBeamRig& rig, const FanBeamView& view,
                                      int view_index = 0);

std::vector<FanBeamDetections> project_rig_fanbeam(const FanBeamRig& rig,
                                                   std::span<const FanBeamView> views);

/// Shear-and-shift gauge: moves markers by
/// x2 -> x2 - (lambda_shift + jitter_shift) * x1 / D + jitter_shift, so the
/// moved rig seen from source lambda reproduces the original rig seen from
/// source lambda + lambda_shift with all positions offset by jitter_shift.
FanBeamRig apply_gauge_fanbeam(const FanBeamRig& rig, double lambda_shift, double jitter_shift);

/// Depth rescaling (c1, c2) -> (c1 / k, c2), D -> D / k: every detected
/// position is unchanged while weights scale by k. This is why D must be
/// supplied to the calibration rather than estimated.
FanBeamRig apply_scaling_ambiguity(const FanBeamRig& rig, double k);

}  // namespace tomocal
