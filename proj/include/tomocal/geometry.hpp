#pragma once

/// @file
/// Core value types shared by the simulators and calibrators: points,
/// marker rigs, view parameters, projected-marker records, and rig
/// validation.
///
/// Conventions. The parallel detector coordinate of a point c at angle
/// alpha is c . (cos alpha, sin alpha) + shift. The fan-beam geometry
/// places the detector on the x2 axis and the source line at x1 = D;
/// a source at (D, lambda) maps a marker (c1, c2) to detector ordinate
/// (c2 * D - c1 * lambda) / (D - c1), plus the per-view detector jitter.

#include <array>
#include <cstddef>
#include <span>
#include <string>
#include <vector>

namespace tomocal {

struct Point2 {
    double x = 0.0;
    double y = 0.0;
};

inline Point2 operator+(Point2 a, Point2 b) { return {a.x + b.x, a.y + b.y}; }
inline Point2 operator-(Point2 a, Point2 b) { return {a.x - b.x, a.y - b.y}; }
inline Point2 operator*(double s, Point2 p) { return {s * p.x, s * p.y}; }
inline double dot(Point2 a, Point2 b) { return a.x * b.x + a.y * b.y; }

/// Which marker line a projection record belongs to. Parallel rigs carry
/// lines H and V; fan-beam rigs carry lines A and B.
enum class MarkerGroup { H, V, A, B };

const char* to_string(MarkerGroup g);

// ============================================================ parallel rig

/// Point markers on two perpendicular lines, at least three per line, with
/// distinct spacings so that third central moments do not vanish. Markers
/// are expected in ascending order along their line (validate_rig checks).
struct ParallelRig {
    std::vector<Point2> h_markers;
    std::vector<Point2> v_markers;
};

/// A marker line reduced to one dimension: centroid, unit direction with a
/// canonical sign (positive x component; positive y if the line is
/// vertical), signed marker offsets along the direction with the centroid
/// at zero, and collinearity diagnostics.
struct LineFrame {
    Point2 centroid{};
    Point2 direction{1.0, 0.0};
    std::vector<double> offsets;
    double max_perp_deviation = 0.0;
    double extent = 0.0;
};

LineFrame line_frame(std::span<const Point2> markers);

/// Rigid reparameterization of a parallel scene: markers move by
/// c -> R(-gamma) * (c - t); with `mirror` set, (x, y) -> (x, -y) is
/// applied afterwards. Projection data of the moved rig coincide with the
/// original's under a matching relabeling of angles and shifts.
struct GaugeTransform {
    double gamma = 0.0;
    Point2 t{};
    bool mirror = false;
};

ParallelRig apply_rigid_parallel(const ParallelRig& rig, const GaugeTransform& g);

// ============================================================ fan-beam rig

/// Four-marker patterns on two vertical lines x1 = C_a and x1 = C_b between
/// the detector (x1 = 0) and the source line (x1 = D). Line a holds markers
/// at ordinates p_a + {-k1 L, -L, L, k1 L}; line b at
/// p_b + {-k3 L, -k2 L, k2 L, k3 L}. Requires 0 < C < D on both lines,
/// C_a != C_b, L > 0, k1 > 1, 0 < k2 < k3.
struct FanBeamRig {
    double D = 0.0;
    double C_a = 0.0;
    double p_a = 0.0;
    double C_b = 0.0;
    double p_b = 0.0;
    double L = 0.0;
    double k1 = 0.0;
    double k2 = 0.0;
    double k3 = 0.0;
};

std::array<double, 4> line_a_offsets(const FanBeamRig& rig);
std::array<double, 4> line_b_offsets(const FanBeamRig& rig);
std::array<Point2, 4> line_a_markers(const FanBeamRig& rig);
std::array<Point2, 4> line_b_markers(const FanBeamRig& rig);

/// Cross-ratio of each line's four-marker pattern; affine-invariant, so
/// detected quadruples can be matched against these regardless of view.
double pattern_cross_ratio_a(const FanBeamRig& rig);
double pattern_cross_ratio_b(const FanBeamRig& rig);

/// Sum of squared pattern offsets about the line midpoint, times nothing:
/// line a gives (2 + 2 k1^2) L^2, line b gives (2 k2^2 + 2 k3^2) L^2.
double pattern_second_moment_a(const FanBeamRig& rig);
double pattern_second_moment_b(const FanBeamRig& rig);

// ==================================================================== views

/// One parallel view: projection angle (radians, [0, 2 pi)) and unknown
/// detector shift.
struct ParallelView {
    double alpha = 0.0;
    double shift = 0.0;
};

/// One fan-beam view: source ordinate lambda on the line x1 = D and unknown
/// detector jitter.
struct FanBeamView {
    double lambda = 0.0;
    double jitter = 0.0;
};

// ============================================================== projections

/// Projected marker centers of one group in one view. Weights accompany
/// fan-beam data (1 / (D - c1) per marker) and are empty for parallel data;
/// no estimator reads them, they exist for consistency checking.
struct DiracProjection {
    int view_index = 0;
    MarkerGroup group = MarkerGroup::H;
    std::vector<double> positions;
    std::vector<double> weights;
};

// ================================================================== moments

/// Power sums of detector positions up to order three.
struct MomentVector {
    double m0 = 0.0;
    double m1 = 0.0;
    double m2 = 0.0;
    double m3 = 0.0;
};

/// Sum of v^k over the values; k >= 0.
double dirac_moment(std::span<const double> values, int k);

MomentVector moments_up_to_3(std::span<const double> values);

// =============================================================== validation

struct RigViolation {
    std::string code;
    std::string message;
};

/// Checks every type invariant; an empty result means the rig is usable.
std::vector<RigViolation> validate_rig(const ParallelRig& rig);
std::vector<RigViolation> validate_rig(const FanBeamRig& rig);

/// Sorts each marker line ascending along its canonical direction.
void normalize_marker_order(ParallelRig& rig);

}  // namespace tomocal
