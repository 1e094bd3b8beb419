#include "tomocal/fanbeam_sim.hpp"

#include <fmt/format.h>

#include "tomocal/errors.hpp"

namespace tomocal {

WeightedPosition project_marker_fanbeam(Point2 c, double lambda, double jitter, double D) {
    if (!(c.x >= 0.0 && c.x < D)) {
        throw CalibError(ErrorCode::MarkerOutsideSlab,
                         fmt::format("project_marker_fanbeam: marker depth {:g} outside [0, {:g})",
                                     c.x, D));
    }
    const double denom = D - c.x;
    return {(c.y * D - c.x * lambda) / denom + jitter, 1.0 / denom};
}

namespace {

DiracProjection project_line(const std::array<Point2, 4>& markers, MarkerGroup group,
                             const FanBeamView& view, double D, int view_index) {
    DiracProjection proj;
    proj.view_index = view_index;
    proj.group = group;
    proj.positions.reserve(4);
    proj.weights.reserve(4);
    for (Point2 c : markers) {
        const WeightedPosition wp = project_marker_fanbeam(c, view.lambda, view.jitter, D);
        proj.positions.push_back(wp.position);
        proj.weights.push_back(wp.weight);
    }
    return proj;
}

}  // namespace

FanBeamDetections project_rig_fanbeam(const FanBeamRig& rig, const FanBeamView& view,
                                      int view_index) {
    return {project_line(line_a_markers(rig), MarkerGroup::A, view, rig.D, view_index),
            project_line(line_b_markers(rig), MarkerGroup::B, view, rig.D, view_index)};
}

std::vector<FanBeamDetections> project_rig_fanbeam(const FanBeamRig& rig,
                                                   std::span<const FanBeamView> views) {
    std::vector<FanBeamDetections> out;
    out.reserve(views.size());
    for (std::size_t i = 0; i < views.size(); ++i) {
        out.push_back(project_rig_fanbeam(rig, views[i], static_cast<int>(i)));
    }
    return out;
}

FanBeamRig apply_gauge_fanbeam(const FanBeamRig& rig, double lambda_shift, double jitter_shift) {
    // The shear preserves each line's depth and offset pattern; only the
    // pattern centers move.
    const double slope = (lambda_shift + jitter_shift) / rig.D;
    FanBeamRig moved = rig;
    moved.p_a = rig.p_a - slope * rig.C_a + jitter_shift;
    moved.p_b = rig.p_b - slope * rig.C_b + jitter_shift;
    return moved;
}

FanBeamRig apply_scaling_ambiguity(const FanBeamRig& rig, double k) {
    if (!(k > 0.0)) {
        throw CalibError(ErrorCode::InvalidArgument,
                         "apply_scaling_ambiguity: scale factor must be positive");
    }
    FanBeamRig scaled = rig;
    scaled.D = rig.D / k;
    scaled.C_a = rig.C_a / k;
    scaled.C_b = rig.C_b / k;
    return scaled;
}

}  // namespace tomocal
