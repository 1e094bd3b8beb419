#pragma once

/// @file
/// Closed-form recovery of per-view angles and detector shifts from
/// projected marker centers of two perpendicular marker lines.
///
/// Method. Detector shifts come out of per-view means. Centering each
/// group's detections at its own mean removes both the shift and the
/// group centroid, leaving second and third power sums of the form
/// a20 cos^2(alpha), a30 cos^3(alpha) (h line) and a02 sin^2(alpha),
/// a03 sin^3(alpha) (v line). Two views pin down sin^2 of the reference
/// angle up to a quadrant choice (the branch); the reference view then
/// yields the rig coefficients, and per-view moment ratios yield every
/// angle through atan2.

#include <span>
#include <utility>
#include <vector>

#include "tomocal/geometry.hpp"
#include "tomocal/parallel_sim.hpp"

namespace tomocal {

/// Quadrant choice for the reference-view angle: branch I places it in
/// (0, pi/2), branch II in (pi/2, pi). The two branches produce angle sets
/// related by alpha -> pi - alpha; data alone cannot tell them apart.
enum class Branch { I, II };

/// Centered second and third power sums of one group, one entry per view.
struct GroupMoments {
    std::vector<double> m2;
    std::vector<double> m3;
};

/// Second/third central moment sums of the marker line coordinates, as
/// recovered from data (h line: a20, a30; v line: a02, a03).
struct MomentCoefficients {
    double a20 = 0.0;
    double a02 = 0.0;
    double a30 = 0.0;
    double a03 = 0.0;
};

struct ParallelCalibOptions {
    /// Views feeding the reference-angle solve.
    std::pair<int, int> view_pair{0, 1};
    /// Scan all pairs and use the best-conditioned one instead.
    bool scan_view_pairs = false;
};

struct ParallelCalibResult {
    Branch branch = Branch::I;
    double alpha0 = 0.0;
    MomentCoefficients coefficients;
    std::vector<double> angles;       ///< per view, normalized to [0, 2 pi)
    std::vector<double> shifts_all;   ///< all-marker mean per view
    std::vector<double> shifts_h;     ///< h-line mean per view
    std::vector<double> shifts_v;     ///< v-line mean per view
    /// cos^2 + sin^2 - 1 of the raw per-view estimates; a quality figure.
    std::vector<double> unit_circle_deviation;
    std::pair<int, int> view_pair{0, 1};
};

/// Mean detector position; estimates the view shift exactly when the
/// marker centroid of the averaged set sits at the frame origin.
double estimate_shift(std::span<const double> positions);

/// Centered m2/m3 sums per view for one group of the detections.
GroupMoments group_moments(std::span<const ParallelDetections> detections, MarkerGroup group);

/// Reference-view angle from the second moments of two views.
double estimate_alpha0(double m2h_0, double m2v_0, double m2h_1, double m2v_1, Branch branch);

/// Rig moment coefficients from the reference view's moments and angle.
MomentCoefficients estimate_coefficients(double alpha0, double m2h_0, double m2v_0, double m3h_0,
                                         double m3v_0);

/// Every view's angle from per-view moment ratios; optionally reports the
/// cos^2 + sin^2 - 1 deviation per view.
std::vector<double> estimate_angles(const MomentCoefficients& coeffs, const GroupMoments& h,
                                    const GroupMoments& v,
                                    std::vector<double>* deviations = nullptr);

/// Full pipeline over grouped detections.
ParallelCalibResult calibrate_parallel(std::span<const ParallelDetections> detections,
                                       Branch branch, const ParallelCalibOptions& options = {});

}  // namespace tomocal
