#pragma once

/// @file
/// Parallel-beam forward models: exact projected marker centers, analytic
/// disk sinograms on a truncated detector grid, and support-midpoint marker
/// detection on sampled data.

#include <span>
#include <vector>

#include "tomocal/geometry.hpp"

namespace tomocal {

inline constexpr double kDefaultGridStep = 1e-3;
inline constexpr double kDefaultMarkerRadius = 0.05;

/// Filled disk of constant density. Its parallel projection is the bump
/// density * 2 sqrt(R^2 - (s - s0)^2) centered on the projected center s0.
struct Disk {
    Point2 center{};
    double radius = 0.0;
    double density = 1.0;
};

struct DiskPhantom {
    std::vector<Disk> disks;
};

/// Uniform detector sampling: sample k sits at min + k * step.
struct DetectorGrid {
    double min = 0.0;
    double step = kDefaultGridStep;
    int count = 0;
};

/// Interval of the detector that is actually measured. Samples outside it
/// are missing, not zero.
struct TruncationWindow {
    double lo = 0.0;
    double hi = 0.0;
};

/// One sampled projection; missing samples hold NaN.
struct SampledProjection {
    double alpha = 0.0;
    DetectorGrid grid;
    TruncationWindow window;
    std::vector<double> values;
};

/// Projected marker centers of one view, split by marker line.
struct ParallelDetections {
    DiracProjection h;
    DiracProjection v;
};

/// Exact center positions c . (cos alpha, sin alpha) + shift, in rig marker
/// order (ascending along each line for a normalized rig).
ParallelDetections project_markers_parallel(const ParallelRig& rig, const ParallelView& view,
                                            int view_index = 0);

std::vector<ParallelDetections> project_rig_parallel(const ParallelRig& rig,
                                                     std::span<const ParallelView> views);

/// Value of one disk's projection at detector coordinate s; zero outside
/// the support [s0 - R, s0 + R].
double disk_projection(const Disk& disk, double alpha, double shift, double s);

enum class RenderMarkers { None, HOnly, VOnly, Both };

struct RenderOptions {
    double marker_radius = kDefaultMarkerRadius;
    double marker_density = 1.0;
    RenderMarkers markers = RenderMarkers::Both;
};

/// Superposes the disk bumps of the phantom and of disk-rendered rig
/// markers on the grid, per view. The grid must cover the window.
std::vector<SampledProjection> render_sinogram(const DiskPhantom& phantom, const ParallelRig& rig,
                                               std::span<const ParallelView> views,
                                               const DetectorGrid& grid,
                                               const TruncationWindow& window,
                                               const RenderOptions& options = {});

/// Extracts maximal runs of positive samples and returns their support
/// midpoints, ascending. Exactly expected_count well-separated bumps fully
/// inside the window must be present; merged, missing or window-clipped
/// bumps raise OverlapError.
std::vector<double> detect_marker_centers(const SampledProjection& proj, int expected_count,
                                          double expected_radius);

}  // namespace tomocal
