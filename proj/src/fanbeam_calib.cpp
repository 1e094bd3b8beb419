#include "tomocal/fanbeam_calib.hpp"

#include <algorithm>
#include <cmath>
#include <fmt/format.h>

#include "tomocal/errors.hpp"

namespace tomocal {

double cross_ratio(double z1, double z2, double z3, double z4) {
    const std::array<double, 4> z{z1, z2, z3, z4};
    const auto [lo, hi] = std::minmax_element(z.begin(), z.end());
    const double span = *hi - *lo;
    double min_gap = span;
    for (std::size_t i = 0; i < 4; ++i) {
        for (std::size_t j = i + 1; j < 4; ++j) {
            min_gap = std::min(min_gap, std::abs(z[i] - z[j]));
        }
    }
    if (span <= 0.0 || min_gap < tol::kDistinctPointsRel * span) {
        throw CalibError(ErrorCode::DegeneratePoints,
                         "cross_ratio: points are not pairwise distinct");
    }
    return (std::abs(z1 - z2) * std::abs(z3 - z4)) / (std::abs(z1 - z3) * std::abs(z2 - z4));
}

ClassifiedView classify_groups(std::span<const double> positions, double pattern_a,
                               double pattern_b, double rel_tol) {
    if (positions.size() != 8) {
        throw CalibError(ErrorCode::InvalidArgument,
                         fmt::format("classify_groups: {} positions, need 8", positions.size()));
    }
    if (!(pattern_a > 0.0) || !(pattern_b > 0.0)) {
        throw CalibError(ErrorCode::InvalidArgument,
                         "classify_groups: pattern cross-ratios must be positive");
    }
    std::array<double, 8> sorted;
    std::copy(positions.begin(), positions.end(), sorted.begin());
    std::sort(sorted.begin(), sorted.end());

    auto matches = [rel_tol](double value, double pattern) {
        return std::abs(value - pattern) <= rel_tol * pattern;
    };

    std::vector<ClassifiedView> found;
    // Every balanced partition exactly once: the quadruple holding the
    // smallest position, paired with its complement.
    for (int i = 1; i <= 5; ++i) {
        for (int j = i + 1; j <= 6; ++j) {
            for (int k = j + 1; k <= 7; ++k) {
                const std::array<double, 4> quad{sorted[0], sorted[i], sorted[j], sorted[k]};
                std::array<double, 4> rest;
                int idx = 0;
                for (int m = 1; m < 8; ++m) {
                    if (m != i && m != j && m != k) rest[idx++] = sorted[m];
                }
                double cr_quad, cr_rest;
                try {
                    cr_quad = cross_ratio(quad[0], quad[1], quad[2], quad[3]);
                    cr_rest = cross_ratio(rest[0], rest[1], rest[2], rest[3]);
                } catch (const CalibError&) {
                    continue;  // coincident points cannot form a pattern
                }
                if (matches(cr_quad, pattern_a) && matches(cr_rest, pattern_b)) {
                    found.push_back({quad, rest});
                }
                if (matches(cr_rest, pattern_a) && matches(cr_quad, pattern_b)) {
                    found.push_back({rest, quad});
                }
            }
        }
    }
    if (found.empty()) {
        throw CalibError(ErrorCode::ClassificationError,
                         "classify_groups: no balanced partition matches the rig patterns");
    }
    if (found.size() > 1) {
        throw CalibError(ErrorCode::ClassificationError,
                         fmt::format("classify_groups: {} partitions match the rig patterns; "
                                     "assignment is ambiguous",
                                     found.size()));
    }
    return found.front();
}

double delta_m1(std::span<const double> view_i, std::span<const double> view_0) {
    if (view_i.size() != view_0.size() || view_i.empty()) {
        throw CalibError(ErrorCode::InvalidArgument, "delta_m1: mismatched marker counts");
    }
    double sum_i = 0.0, sum_0 = 0.0;
    for (double v : view_i) sum_i += v;
    for (double v : view_0) sum_0 += v;
    return 0.25 * (sum_i - sum_0);
}

namespace {

double sum_of(std::span<const double> v) {
    double s = 0.0;
    for (double x : v) s += x;
    return s;
}

double sum_sq(std::span<const double> v) {
    double s = 0.0;
    for (double x : v) s += x * x;
    return s;
}

/// (1 + r)^2 from one line's view-0 and view-i positions.
double squared_magnification(std::span<const double> line_0, std::span<const double> line_i,
                             double pattern_second_moment) {
    const double s0 = sum_of(line_0);
    const double dm = delta_m1(line_i, line_0);
    return (sum_sq(line_i) - 0.25 * s0 * s0 - 2.0 * dm * s0 - 4.0 * dm * dm) /
           pattern_second_moment;
}

double ratio_from_squared_magnification(double R, const char* line_name) {
    if (R < 1.0 - tol::kRadicandSlack) {
        throw CalibError(ErrorCode::NegativeDiscriminant,
                         fmt::format("solve_r: squared magnification {:g} on line {} is below 1; "
                                     "data are inconsistent with a line between detector and "
                                     "source",
                                     R, line_name));
    }
    return R >= 1.0 ? std::sqrt(R) - 1.0 : 0.0;
}

double second_moment_a(const FanBeamCalibConfig& c) {
    return (2.0 + 2.0 * c.k1 * c.k1) * c.L * c.L;
}

double second_moment_b(const FanBeamCalibConfig& c) {
    return (2.0 * c.k2 * c.k2 + 2.0 * c.k3 * c.k3) * c.L * c.L;
}

}  // namespace

DepthRatios solve_r(std::span<const double> a_0, std::span<const double> a_i,
                    std::span<const double> b_0, std::span<const double> b_i,
                    const FanBeamCalibConfig& config) {
    double scale = 1.0;
    for (auto span : {a_0, a_i, b_0, b_i}) {
        for (double v : span) scale = std::max(scale, std::abs(v));
    }
    const double dm_a = delta_m1(a_i, a_0);
    const double dm_b = delta_m1(b_i, b_0);
    if (std::abs(dm_a) < tol::kReferenceExcitationRel * scale &&
        std::abs(dm_b) < tol::kReferenceExcitationRel * scale) {
        throw CalibError(ErrorCode::DegenerateViewPair,
                         "solve_r: reference view is indistinguishable from view 0 "
                         "(no first-moment offset on either line)");
    }
    return {ratio_from_squared_magnification(squared_magnification(a_0, a_i, second_moment_a(config)), "a"),
            ratio_from_squared_magnification(squared_magnification(b_0, b_i, second_moment_b(config)), "b")};
}

void recover_rig_positions(const DepthRatios& ratios, double sum_a0, double sum_b0, double D,
                           FanBeamCalibResult& result) {
    result.r_a = ratios.r_a;
    result.r_b = ratios.r_b;
    result.C_a = D * ratios.r_a / (1.0 + ratios.r_a);
    result.C_b = D * ratios.r_b / (1.0 + ratios.r_b);
    result.p_a = sum_a0 / (4.0 * (1.0 + ratios.r_a));
    result.p_b = sum_b0 / (4.0 * (1.0 + ratios.r_b));
}

void solve_views(std::span<const double> dm_a, std::span<const double> dm_b,
                 const DepthRatios& ratios, FanBeamCalibResult& result) {
    if (dm_a.size() != dm_b.size()) {
        throw CalibError(ErrorCode::InvalidArgument, "solve_views: offset list size mismatch");
    }
    const double det = ratios.r_a - ratios.r_b;
    if (std::abs(det) < tol::kRatioSeparationRel * (ratios.r_a + ratios.r_b)) {
        throw CalibError(ErrorCode::SingularSystem,
                         fmt::format("solve_views: depth ratios {:g} and {:g} coincide; "
                                     "per-view recovery is singular",
                                     ratios.r_a, ratios.r_b));
    }
    const std::size_t P = dm_a.size();
    result.lambdas.assign(P, 0.0);
    result.jitters.assign(P, 0.0);
    for (std::size_t i = 1; i < P; ++i) {
        const double lambda = (dm_b[i] - dm_a[i]) / det;
        result.lambdas[i] = lambda;
        result.jitters[i] = dm_a[i] + lambda * ratios.r_a;
    }
}

double sheared_ordinate(double p, double C, double D, double lambda0, double jitter0) {
    return p - (lambda0 + jitter0) * C / D + jitter0;
}

namespace {

FanBeamCalibResult run_pipeline(std::span<const FanBeamDetections> detections,
                                const FanBeamCalibConfig& config) {
    const int P = static_cast<int>(detections.size());
    if (P < 2) {
        throw CalibError(ErrorCode::InsufficientViews,
                         fmt::format("calibrate_fanbeam: {} views, at least 2 required", P));
    }
    for (int i = 0; i < P; ++i) {
        if (detections[i].a.positions.size() != 4 || detections[i].b.positions.size() != 4) {
            throw CalibError(ErrorCode::InvalidArgument,
                             "calibrate_fanbeam: each view needs 4 positions per line", i);
        }
    }
    if (!(config.D > 0.0) || !(config.L > 0.0)) {
        throw CalibError(ErrorCode::InvalidArgument,
                         "calibrate_fanbeam: source distance and pattern scale must be positive");
    }

    std::vector<double> dm_a(P), dm_b(P);
    for (int i = 0; i < P; ++i) {
        dm_a[i] = delta_m1(detections[i].a.positions, detections[0].a.positions);
        dm_b[i] = delta_m1(detections[i].b.positions, detections[0].b.positions);
    }

    int reference = 0;
    if (config.reference_view.has_value()) {
        reference = *config.reference_view;
        if (reference < 0 || reference >= P) {
            throw CalibError(ErrorCode::InvalidArgument,
                             fmt::format("calibrate_fanbeam: reference view {} out of range",
                                         reference));
        }
    } else {
        double best = -1.0;
        for (int i = 1; i < P; ++i) {
            if (std::abs(dm_a[i]) > best) {
                best = std::abs(dm_a[i]);
                reference = i;
            }
        }
    }

    FanBeamCalibResult result;
    result.reference_view = reference;

    DepthRatios ratios;
    if (config.average_reference) {
        if (P < 2) {
            throw CalibError(ErrorCode::InsufficientViews, "calibrate_fanbeam: no views to average");
        }
        double sum_Ra = 0.0, sum_Rb = 0.0;
        for (int i = 1; i < P; ++i) {
            sum_Ra += squared_magnification(detections[0].a.positions, detections[i].a.positions,
                                            second_moment_a(config));
            sum_Rb += squared_magnification(detections[0].b.positions, detections[i].b.positions,
                                            second_moment_b(config));
        }
        ratios.r_a = ratio_from_squared_magnification(sum_Ra / (P - 1), "a");
        ratios.r_b = ratio_from_squared_magnification(sum_Rb / (P - 1), "b");
    } else {
        try {
            ratios = solve_r(detections[0].a.positions, detections[reference].a.positions,
                             detections[0].b.positions, detections[reference].b.positions, config);
        } catch (const CalibError& e) {
            if (e.view_index().has_value()) throw;
            throw CalibError(e.code(), e.what(), reference);
        }
    }

    recover_rig_positions(ratios, sum_of(detections[0].a.positions),
                          sum_of(detections[0].b.positions), config.D, result);
    solve_views(dm_a, dm_b, ratios, result);
    result.frame_note =
        "lambda and jitter are offsets from view 0 (lambda[0] = jitter[0] = 0); pattern "
        "centers p_a, p_b are expressed in the frame sheared by the true view-0 parameters; "
        "depths use the supplied source distance D";
    return result;
}

}  // namespace

FanBeamCalibResult calibrate_fanbeam(std::span<const FanBeamDetections> detections,
                                     const FanBeamCalibConfig& config) {
    return run_pipeline(detections, config);
}

FanBeamCalibResult calibrate_fanbeam(std::span<const std::vector<double>> unclassified,
                                     const FanBeamCalibConfig& config) {
    FanBeamRig pattern;
    pattern.k1 = config.k1;
    pattern.k2 = config.k2;
    pattern.k3 = config.k3;
    const double cr_a = pattern_cross_ratio_a(pattern);
    const double cr_b = pattern_cross_ratio_b(pattern);

    std::vector<FanBeamDetections> grouped;
    grouped.reserve(unclassified.size());
    for (std::size_t i = 0; i < unclassified.size(); ++i) {
        ClassifiedView split;
        try {
            split = classify_groups(unclassified[i], cr_a, cr_b, config.cross_ratio_tol);
        } catch (const CalibError& e) {
            throw CalibError(e.code(), e.what(), static_cast<int>(i));
        }
        FanBeamDetections det;
        det.a.view_index = det.b.view_index = static_cast<int>(i);
        det.a.group = MarkerGroup::A;
        det.b.group = MarkerGroup::B;
        det.a.positions.assign(split.a.begin(), split.a.end());
        det.b.positions.assign(split.b.begin(), split.b.end());
        grouped.push_back(std::move(det));
    }
    return run_pipeline(grouped, config);
}

}  // namespace tomocal
