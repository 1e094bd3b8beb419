#include "tomocal/geometry.hpp"

#include <algorithm>
#include <cmath>
#include <fmt/format.h>
#include <numeric>

#include "tomocal/errors.hpp"
#include "tomocal/tolerances.hpp"

namespace tomocal {

namespace {

bool all_finite(std::span<const Point2> pts) {
    return std::all_of(pts.begin(), pts.end(), [](Point2 p) {
        return std::isfinite(p.x) && std::isfinite(p.y);
    });
}

double ipow(double v, int k) {
    double out = 1.0;
    for (int i = 0; i < k; ++i) out *= v;
    return out;
}

// Direction sign is canonical so that line coordinates are reproducible:
// positive x component, or positive y for a vertical line.
Point2 canonical_direction(Point2 u) {
    constexpr double kVertical = 1e-12;
    if (u.x < -kVertical || (std::abs(u.x) <= kVertical && u.y < 0.0)) {
        return {-u.x, -u.y};
    }
    return u;
}

}  // namespace

const char* to_string(MarkerGroup g) {
    switch (g) {
        case MarkerGroup::H: return "h";
        case MarkerGroup::V: return "v";
        case MarkerGroup::A: return "a";
        case MarkerGroup::B: return "b";
    }
    return "?";
}

LineFrame line_frame(std::span<const Point2> markers) {
    if (markers.empty()) {
        throw CalibError(ErrorCode::InvalidArgument, "line_frame: no markers");
    }
    LineFrame frame;
    frame.centroid = {0.0, 0.0};
    for (Point2 p : markers) frame.centroid = frame.centroid + p;
    frame.centroid = (1.0 / static_cast<double>(markers.size())) * frame.centroid;

    // The most distant pair defines the direction; robust for the handful of
    // markers a rig carries.
    double best = -1.0;
    Point2 dir{1.0, 0.0};
    for (std::size_t i = 0; i < markers.size(); ++i) {
        for (std::size_t j = i + 1; j < markers.size(); ++j) {
            const Point2 d = markers[j] - markers[i];
            const double len = std::hypot(d.x, d.y);
            if (len > best) {
                best = len;
                if (len > 0.0) dir = (1.0 / len) * d;
            }
        }
    }
    frame.extent = std::max(best, 0.0);
    frame.direction = canonical_direction(dir);

    const Point2 perp{-frame.direction.y, frame.direction.x};
    frame.offsets.reserve(markers.size());
    for (Point2 p : markers) {
        const Point2 r = p - frame.centroid;
        frame.offsets.push_back(dot(r, frame.direction));
        frame.max_perp_deviation = std::max(frame.max_perp_deviation, std::abs(dot(r, perp)));
    }
    return frame;
}

ParallelRig apply_rigid_parallel(const ParallelRig& rig, const GaugeTransform& g) {
    const double c = std::cos(g.gamma);
    const double s = std::sin(g.gamma);
    auto move = [&](Point2 p) {
        const Point2 r = p - g.t;
        Point2 out{c * r.x + s * r.y, -s * r.x + c * r.y};  // R(-gamma) * r
        if (g.mirror) out.y = -out.y;
        return out;
    };
    ParallelRig moved;
    moved.h_markers.reserve(rig.h_markers.size());
    moved.v_markers.reserve(rig.v_markers.size());
    for (Point2 p : rig.h_markers) moved.h_markers.push_back(move(p));
    for (Point2 p : rig.v_markers) moved.v_markers.push_back(move(p));
    normalize_marker_order(moved);
    return moved;
}

std::array<double, 4> line_a_offsets(const FanBeamRig& rig) {
    return {-rig.k1 * rig.L, -rig.L, rig.L, rig.k1 * rig.L};
}

std::array<double, 4> line_b_offsets(const FanBeamRig& rig) {
    return {-rig.k3 * rig.L, -rig.k2 * rig.L, rig.k2 * rig.L, rig.k3 * rig.L};
}

std::array<Point2, 4> line_a_markers(const FanBeamRig& rig) {
    const auto offs = line_a_offsets(rig);
    std::array<Point2, 4> out;
    for (std::size_t j = 0; j < 4; ++j) out[j] = {rig.C_a, rig.p_a + offs[j]};
    return out;
}

std::array<Point2, 4> line_b_markers(const FanBeamRig& rig) {
    const auto offs = line_b_offsets(rig);
    std::array<Point2, 4> out;
    for (std::size_t j = 0; j < 4; ++j) out[j] = {rig.C_b, rig.p_b + offs[j]};
    return out;
}

double pattern_cross_ratio_a(const FanBeamRig& rig) {
    const double q = (rig.k1 - 1.0) / (rig.k1 + 1.0);
    return q * q;
}

double pattern_cross_ratio_b(const FanBeamRig& rig) {
    const double q = (rig.k3 - rig.k2) / (rig.k3 + rig.k2);
    return q * q;
}

double pattern_second_moment_a(const FanBeamRig& rig) {
    return (2.0 + 2.0 * rig.k1 * rig.k1) * rig.L * rig.L;
}

double pattern_second_moment_b(const FanBeamRig& rig) {
    return (2.0 * rig.k2 * rig.k2 + 2.0 * rig.k3 * rig.k3) * rig.L * rig.L;
}

double dirac_moment(std::span<const double> values, int k) {
    if (k < 0) {
        throw CalibError(ErrorCode::InvalidArgument, "dirac_moment: negative order");
    }
    double sum = 0.0;
    for (double v : values) sum += ipow(v, k);
    return sum;
}

MomentVector moments_up_to_3(std::span<const double> values) {
    MomentVector m;
    for (double v : values) {
        m.m0 += 1.0;
        m.m1 += v;
        m.m2 += v * v;
        m.m3 += v * v * v;
    }
    return m;
}

namespace {

void validate_line(std::span<const Point2> markers, const char* name, const char* moment_name,
                   std::vector<RigViolation>& out, LineFrame* frame_out) {
    if (markers.size() < 3) {
        out.push_back({std::string(name) + "_count",
                       fmt::format("{} line holds {} markers; at least 3 required", name,
                                   markers.size())});
        return;
    }
    if (!all_finite(markers)) {
        out.push_back({std::string(name) + "_not_finite",
                       fmt::format("{} line has non-finite coordinates", name)});
        return;
    }
    LineFrame frame = line_frame(markers);
    if (frame.extent <= 0.0) {
        out.push_back({std::string(name) + "_collapsed",
                       fmt::format("{} line markers all coincide", name)});
        return;
    }
    if (frame.max_perp_deviation > tol::kCollinearRel * frame.extent) {
        out.push_back({std::string(name) + "_not_collinear",
                       fmt::format("{} line deviates from a straight line by {:g} (extent {:g})",
                                   name, frame.max_perp_deviation, frame.extent)});
    }
    const bool strictly_ascending =
        std::adjacent_find(frame.offsets.begin(), frame.offsets.end(),
                           [](double a, double b) { return a >= b; }) == frame.offsets.end();
    if (!strictly_ascending) {
        out.push_back({std::string(name) + "_order",
                       fmt::format("{} line markers are not strictly ascending along the line",
                                   name)});
    }
    double sum3 = 0.0;
    double max_abs = 0.0;
    for (double t : frame.offsets) {
        sum3 += t * t * t;
        max_abs = std::max(max_abs, std::abs(t));
    }
    if (std::abs(sum3) < tol::kThirdMomentRel * ipow(max_abs, 3)) {
        out.push_back({std::string(name) + "_third_moment_zero",
                       fmt::format("{} line: third central moment {} vanishes (markers are "
                                   "symmetric about their centroid)",
                                   name, moment_name)});
    }
    if (frame_out != nullptr) *frame_out = std::move(frame);
}

}  // namespace

std::vector<RigViolation> validate_rig(const ParallelRig& rig) {
    std::vector<RigViolation> out;
    LineFrame fh, fv;
    fh.extent = fv.extent = -1.0;
    validate_line(rig.h_markers, "h", "a30", out, &fh);
    validate_line(rig.v_markers, "v", "a03", out, &fv);
    if (fh.extent > 0.0 && fv.extent > 0.0) {
        const double align = std::abs(dot(fh.direction, fv.direction));
        if (align > tol::kPerpendicular) {
            out.push_back({"lines_not_perpendicular",
                           fmt::format("marker lines are not perpendicular (|cos| = {:g})",
                                       align)});
        }
    }
    return out;
}

std::vector<RigViolation> validate_rig(const FanBeamRig& rig) {
    std::vector<RigViolation> out;
    const double vals[] = {rig.D,   rig.C_a, rig.p_a, rig.C_b, rig.p_b,
                           rig.L,   rig.k1,  rig.k2,  rig.k3};
    for (double v : vals) {
        if (!std::isfinite(v)) {
            out.push_back({"not_finite", "rig has non-finite parameters"});
            return out;
        }
    }
    if (rig.D <= 0.0) {
        out.push_back({"source_distance", fmt::format("source line distance D = {:g} must be positive", rig.D)});
        return out;
    }
    if (rig.C_a <= 0.0 || rig.C_a >= rig.D) {
        out.push_back({"a_depth_out_of_slab",
                       fmt::format("line a depth C_a = {:g} outside (0, {:g})", rig.C_a, rig.D)});
    }
    if (rig.C_b <= 0.0 || rig.C_b >= rig.D) {
        out.push_back({"b_depth_out_of_slab",
                       fmt::format("line b depth C_b = {:g} outside (0, {:g})", rig.C_b, rig.D)});
    }
    if (std::abs(rig.C_a - rig.C_b) < tol::kLineSeparationRel * rig.D) {
        out.push_back({"degenerate_line_pair",
                       fmt::format("degenerate line pair: depths C_a = {:g} and C_b = {:g} "
                                   "coincide, per-view recovery is singular",
                                   rig.C_a, rig.C_b)});
    }
    if (rig.L <= 0.0) {
        out.push_back({"pattern_scale", fmt::format("pattern scale L = {:g} must be positive", rig.L)});
    }
    if (rig.k1 <= 1.0) {
        out.push_back({"a_pattern_ratio",
                       fmt::format("line a spacing ratio k1 = {:g} must exceed 1", rig.k1)});
    }
    if (rig.k2 <= 0.0 || rig.k2 >= rig.k3) {
        out.push_back({"b_pattern_ratios",
                       fmt::format("line b spacing ratios must satisfy 0 < k2 < k3 (k2 = {:g}, "
                                   "k3 = {:g})",
                                   rig.k2, rig.k3)});
    }
    return out;
}

void normalize_marker_order(ParallelRig& rig) {
    auto sort_group = [](std::vector<Point2>& markers) {
        if (markers.size() < 2) return;
        const LineFrame frame = line_frame(markers);
        std::vector<std::size_t> idx(markers.size());
        std::iota(idx.begin(), idx.end(), 0);
        std::stable_sort(idx.begin(), idx.end(), [&](std::size_t a, std::size_t b) {
            return frame.offsets[a] < frame.offsets[b];
        });
        std::vector<Point2> sorted;
        sorted.reserve(markers.size());
        for (std::size_t i : idx) sorted.push_back(markers[i]);
        markers = std::move(sorted);
    };
    sort_group(rig.h_markers);
    sort_group(rig.v_markers);
}

}  // namespace tomocal
