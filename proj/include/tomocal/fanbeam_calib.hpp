#pragma once

/// @file
/// Closed-form recovery of per-view source positions, detector jitters and
/// marker-line geometry from fan-beam projections of two four-marker line
/// patterns.
///
/// Method. Each line projects with magnification 1 + r, r = C / (D - C).
/// First-moment offsets between view i and view 0 are jitter - lambda * r
/// per line; second moments of one well-excited view determine (1 + r)^2
/// per line; with both depth ratios known, every view's (lambda, jitter)
/// solves a 2x2 linear system. The solution is pinned to the gauge
/// lambda_0 = 0, jitter_0 = 0, which shears the recovered pattern centers;
/// the depth scale is fixed by the supplied D.

#include <array>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "tomocal/fanbeam_sim.hpp"
#include "tomocal/geometry.hpp"
#include "tomocal/tolerances.hpp"

namespace tomocal {

struct FanBeamCalibConfig {
    double D = 0.0;  ///< source-line distance (not identifiable from data)
    double L = 0.0;  ///< pattern constants, known by construction
    double k1 = 0.0;
    double k2 = 0.0;
    double k3 = 0.0;
    /// Reference view for the magnification solve; defaults to the view
    /// with the largest first-moment offset from view 0.
    std::optional<int> reference_view;
    /// Average the squared-magnification estimate over all views instead
    /// of using a single reference view.
    bool average_reference = false;
    /// Relative tolerance for cross-ratio matching (unclassified input).
    double cross_ratio_tol = tol::kCrossRatioRel;
};

struct FanBeamCalibResult {
    double r_a = 0.0;  ///< depth ratio C_a / (D - C_a)
    double r_b = 0.0;
    double C_a = 0.0;
    double C_b = 0.0;
    double p_a = 0.0;  ///< pattern centers in the solver frame (see note)
    double p_b = 0.0;
    std::vector<double> lambdas;  ///< per view; lambda[0] == 0
    std::vector<double> jitters;  ///< per view; jitter[0] == 0
    int reference_view = 0;
    std::string frame_note;
};

/// Distance cross-ratio |z1-z2| |z3-z4| / (|z1-z3| |z2-z4|) of four
/// pairwise distinct collinear points; invariant under affine maps of the
/// line, so each pattern's value survives projection and jitter.
double cross_ratio(double z1, double z2, double z3, double z4);

/// Eight detector positions split into the two patterns by cross-ratio
/// matching over all balanced partitions; ascending per line. Exactly one
/// partition must match.
struct ClassifiedView {
    std::array<double, 4> a;
    std::array<double, 4> b;
};

ClassifiedView classify_groups(std::span<const double> positions, double pattern_a,
                               double pattern_b, double rel_tol = tol::kCrossRatioRel);

/// Quarter of the summed-position offset of view i relative to view 0;
/// equals jitter_i - lambda_i * r for consistent data in the view-0 gauge.
double delta_m1(std::span<const double> view_i, std::span<const double> view_0);

struct DepthRatios {
    double r_a = 0.0;
    double r_b = 0.0;
};

/// Depth ratios from view 0 plus one reference view, via the per-line
/// second-moment identity.
DepthRatios solve_r(std::span<const double> a_0, std::span<const double> a_i,
                    std::span<const double> b_0, std::span<const double> b_i,
                    const FanBeamCalibConfig& config);

/// Line depths and pattern centers implied by the depth ratios and the
/// view-0 position sums.
void recover_rig_positions(const DepthRatios& ratios, double sum_a0, double sum_b0, double D,
                           FanBeamCalibResult& result);

/// Per-view (lambda, jitter) from the two per-line first-moment offsets.
void solve_views(std::span<const double> dm_a, std::span<const double> dm_b,
                 const DepthRatios& ratios, FanBeamCalibResult& result);

/// Ground-truth pattern center re-expressed in the solver frame (sheared
/// by the true view-0 parameters); compare recovered p against this.
double sheared_ordinate(double p, double C, double D, double lambda0, double jitter0);

/// Full pipeline over pre-classified detections.
FanBeamCalibResult calibrate_fanbeam(std::span<const FanBeamDetections> detections,
                                     const FanBeamCalibConfig& config);

/// Full pipeline over unclassified views of eight positions each;
/// classification runs per view against the rig patterns.
FanBeamCalibResult calibrate_fanbeam(std::span<const std::vector<double>> unclassified,
                                     const FanBeamCalibConfig& config);

}  // namespace tomocal
