#include "tomocal/parallel_sim.hpp"

#include <algorithm>
#include <cmath>
#include <fmt/format.h>
#include <limits>

#include "tomocal/errors.hpp"

namespace tomocal {

namespace {

DiracProjection project_group(std::span<const Point2> markers, MarkerGroup group,
                              const ParallelView& view, int view_index) {
    DiracProjection proj;
    proj.view_index = view_index;
    proj.group = group;
    proj.positions.reserve(markers.size());
    const Point2 theta{std::cos(view.alpha), std::sin(view.alpha)};
    for (Point2 c : markers) {
        proj.positions.push_back(dot(c, theta) + view.shift);
    }
    return proj;
}

}  // namespace

ParallelDetections project_markers_parallel(const ParallelRig& rig, const ParallelView& view,
                                            int view_index) {
    return {project_group(rig.h_markers, MarkerGroup::H, view, view_index),
            project_group(rig.v_markers, MarkerGroup::V, view, view_index)};
}

std::vector<ParallelDetections> project_rig_parallel(const ParallelRig& rig,
                                                     std::span<const ParallelView> views) {
    std::vector<ParallelDetections> out;
    out.reserve(views.size());
    for (std::size_t i = 0; i < views.size(); ++i) {
        out.push_back(project_markers_parallel(rig, views[i], static_cast<int>(i)));
    }
    return out;
}

double disk_projection(const Disk& disk, double alpha, double shift, double s) {
    const double s0 = disk.center.x * std::cos(alpha) + disk.center.y * std::sin(alpha) + shift;
    const double d = s - s0;
    const double rad = disk.radius * disk.radius - d * d;
    if (rad <= 0.0) return 0.0;
    return disk.density * 2.0 * std::sqrt(rad);
}

std::vector<SampledProjection> render_sinogram(const DiskPhantom& phantom, const ParallelRig& rig,
                                               std::span<const ParallelView> views,
                                               const DetectorGrid& grid,
                                               const TruncationWindow& window,
                                               const RenderOptions& options) {
    if (grid.step <= 0.0 || grid.count < 2) {
        throw CalibError(ErrorCode::InvalidArgument, "render_sinogram: bad detector grid");
    }
    if (!(window.lo < window.hi)) {
        throw CalibError(ErrorCode::InvalidArgument, "render_sinogram: empty truncation window");
    }
    const double grid_max = grid.min + grid.step * (grid.count - 1);
    if (grid.min > window.lo || grid_max < window.hi) {
        throw CalibError(ErrorCode::InvalidArgument,
                         "render_sinogram: grid does not cover the truncation window");
    }

    std::vector<Disk> scene = phantom.disks;
    auto add_markers = [&](std::span<const Point2> markers) {
        for (Point2 c : markers) {
            scene.push_back({c, options.marker_radius, options.marker_density});
        }
    };
    if (options.markers == RenderMarkers::HOnly || options.markers == RenderMarkers::Both) {
        add_markers(rig.h_markers);
    }
    if (options.markers == RenderMarkers::VOnly || options.markers == RenderMarkers::Both) {
        add_markers(rig.v_markers);
    }

    std::vector<SampledProjection> sino;
    sino.reserve(views.size());
    for (const ParallelView& view : views) {
        SampledProjection proj;
        proj.alpha = view.alpha;
        proj.grid = grid;
        proj.window = window;
        proj.values.assign(static_cast<std::size_t>(grid.count),
                           std::numeric_limits<double>::quiet_NaN());
        for (int k = 0; k < grid.count; ++k) {
            const double s = grid.min + grid.step * k;
            if (s >= window.lo && s <= window.hi) proj.values[k] = 0.0;
        }
        const double cos_a = std::cos(view.alpha);
        const double sin_a = std::sin(view.alpha);
        for (const Disk& disk : scene) {
            const double s0 = disk.center.x * cos_a + disk.center.y * sin_a + view.shift;
            int k_lo = static_cast<int>(std::ceil((s0 - disk.radius - grid.min) / grid.step));
            int k_hi = static_cast<int>(std::floor((s0 + disk.radius - grid.min) / grid.step));
            k_lo = std::max(k_lo, 0);
            k_hi = std::min(k_hi, grid.count - 1);
            for (int k = k_lo; k <= k_hi; ++k) {
                if (std::isnan(proj.values[k])) continue;
                const double d = grid.min + grid.step * k - s0;
                const double rad = disk.radius * disk.radius - d * d;
                if (rad > 0.0) proj.values[k] += disk.density * 2.0 * std::sqrt(rad);
            }
        }
        sino.push_back(std::move(proj));
    }
    return sino;
}

std::vector<double> detect_marker_centers(const SampledProjection& proj, int expected_count,
                                          double expected_radius) {
    struct Run {
        int first = 0;
        int last = 0;
        bool clipped = false;
    };
    std::vector<Run> runs;
    const auto& v = proj.values;
    const int n = static_cast<int>(v.size());
    int k = 0;
    while (k < n) {
        if (!(v[k] > 0.0)) {
            ++k;
            continue;
        }
        Run run;
        run.first = k;
        while (k < n && v[k] > 0.0) ++k;
        run.last = k - 1;
        // A bump whose positive run touches the grid edge or an unmeasured
        // sample may extend past what was observed; its midpoint is not
        // trustworthy.
        const bool lo_clipped = run.first == 0 || std::isnan(v[run.first - 1]);
        const bool hi_clipped = run.last == n - 1 || std::isnan(v[run.last + 1]);
        run.clipped = lo_clipped || hi_clipped;
        runs.push_back(run);
    }

    if (static_cast<int>(runs.size()) != expected_count) {
        throw CalibError(ErrorCode::OverlapError,
                         fmt::format("detect_marker_centers: found {} bumps, expected {} "
                                     "(overlapping, missing or out-of-window markers)",
                                     runs.size(), expected_count));
    }
    std::vector<double> centers;
    centers.reserve(runs.size());
    const double max_width = 2.0 * (expected_radius + proj.grid.step);
    for (const Run& run : runs) {
        if (run.clipped) {
            throw CalibError(ErrorCode::OverlapError,
                             "detect_marker_centers: bump clipped by the truncation window");
        }
        const double width = (run.last - run.first) * proj.grid.step;
        if (width > max_width) {
            throw CalibError(ErrorCode::OverlapError,
                             fmt::format("detect_marker_centers: bump of width {:g} exceeds a "
                                         "single marker of radius {:g} (merged bumps)",
                                         width, expected_radius));
        }
        const double s_first = proj.grid.min + proj.grid.step * run.first;
        const double s_last = proj.grid.min + proj.grid.step * run.last;
        centers.push_back(0.5 * (s_first + s_last));
    }
    return centers;
}

}  // namespace tomocal
