#include "tomocal/parallel_calib.hpp"

#include <algorithm>
#include <cmath>
#include <fmt/format.h>
#include <numbers>

#include "tomocal/errors.hpp"
#include "tomocal/tolerances.hpp"

namespace tomocal {

double estimate_shift(std::span<const double> positions) {
    if (positions.empty()) {
        throw CalibError(ErrorCode::InvalidArgument, "estimate_shift: no positions");
    }
    double sum = 0.0;
    for (double v : positions) sum += v;
    return sum / static_cast<double>(positions.size());
}

GroupMoments group_moments(std::span<const ParallelDetections> detections, MarkerGroup group) {
    GroupMoments gm;
    gm.m2.reserve(detections.size());
    gm.m3.reserve(detections.size());
    for (const ParallelDetections& det : detections) {
        const DiracProjection& proj = (group == MarkerGroup::H) ? det.h : det.v;
        const double mean = estimate_shift(proj.positions);
        double m2 = 0.0, m3 = 0.0;
        for (double v : proj.positions) {
            const double c = v - mean;
            m2 += c * c;
            m3 += c * c * c;
        }
        gm.m2.push_back(m2);
        gm.m3.push_back(m3);
    }
    return gm;
}

double estimate_alpha0(double m2h_0, double m2v_0, double m2h_1, double m2v_1, Branch branch) {
    const double den = m2h_0 * m2v_1 - m2h_1 * m2v_0;
    if (std::abs(den) <= tol::kViewPairRel * std::abs(m2h_0 * m2v_1)) {
        throw CalibError(ErrorCode::DegenerateViewPair,
                         "estimate_alpha0: the two views excite the marker lines "
                         "proportionally; pick views with distinct angles");
    }
    double q = (m2h_0 * m2v_0 - m2h_1 * m2v_0) / den;
    if (q < -tol::kSinSqSlack || q > 1.0 + tol::kSinSqSlack) {
        throw CalibError(ErrorCode::DegenerateViewPair,
                         fmt::format("estimate_alpha0: sin^2 estimate {:g} outside [0, 1]", q));
    }
    q = std::clamp(q, 0.0, 1.0);
    const double alpha0 = std::asin(std::sqrt(q));
    return branch == Branch::I ? alpha0 : std::numbers::pi - alpha0;
}

MomentCoefficients estimate_coefficients(double alpha0, double m2h_0, double m2v_0, double m3h_0,
                                         double m3v_0) {
    const double c = std::cos(alpha0);
    const double s = std::sin(alpha0);
    if (std::abs(c) < tol::kAxisAngle || std::abs(s) < tol::kAxisAngle) {
        throw CalibError(ErrorCode::DegenerateAngle,
                         fmt::format("estimate_coefficients: reference angle {:g} lies on a "
                                     "coordinate axis; one marker line is unexcited",
                                     alpha0));
    }
    MomentCoefficients out;
    out.a20 = m2h_0 / (c * c);
    out.a02 = m2v_0 / (s * s);
    out.a30 = m3h_0 / (c * c * c);
    out.a03 = m3v_0 / (s * s * s);
    return out;
}

std::vector<double> estimate_angles(const MomentCoefficients& coeffs, const GroupMoments& h,
                                    const GroupMoments& v, std::vector<double>* deviations) {
    const std::size_t n = h.m2.size();
    if (v.m2.size() != n || h.m3.size() != n || v.m3.size() != n) {
        throw CalibError(ErrorCode::InvalidArgument, "estimate_angles: moment list size mismatch");
    }
    if (coeffs.a30 == 0.0 || coeffs.a03 == 0.0) {
        throw CalibError(ErrorCode::DegenerateAngle,
                         "estimate_angles: third-moment coefficient vanishes; the marker "
                         "spacing cannot orient the views");
    }
    double scale_h = 0.0, scale_v = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        scale_h = std::max(scale_h, h.m2[i]);
        scale_v = std::max(scale_v, v.m2[i]);
    }
    std::vector<double> angles(n);
    if (deviations != nullptr) deviations->assign(n, 0.0);
    for (std::size_t i = 0; i < n; ++i) {
        if (h.m2[i] < tol::kDegenerateViewRel * scale_h ||
            v.m2[i] < tol::kDegenerateViewRel * scale_v) {
            throw CalibError(ErrorCode::DegenerateView,
                             fmt::format("estimate_angles: view {} has no usable excitation", i),
                             static_cast<int>(i));
        }
        const double cos_i = coeffs.a20 * h.m3[i] / (coeffs.a30 * h.m2[i]);
        const double sin_i = coeffs.a02 * v.m3[i] / (coeffs.a03 * v.m2[i]);
        double a = std::atan2(sin_i, cos_i);
        if (a < 0.0) a += 2.0 * std::numbers::pi;
        angles[i] = a;
        if (deviations != nullptr) {
            (*deviations)[i] = cos_i * cos_i + sin_i * sin_i - 1.0;
        }
    }
    return angles;
}

ParallelCalibResult calibrate_parallel(std::span<const ParallelDetections> detections,
                                       Branch branch, const ParallelCalibOptions& options) {
    const int P = static_cast<int>(detections.size());
    if (P < 2) {
        throw CalibError(ErrorCode::InsufficientViews,
                         fmt::format("calibrate_parallel: {} views, at least 2 required", P));
    }

    ParallelCalibResult result;
    result.branch = branch;
    result.shifts_all.reserve(detections.size());
    result.shifts_h.reserve(detections.size());
    result.shifts_v.reserve(detections.size());
    std::vector<double> merged;
    for (const ParallelDetections& det : detections) {
        result.shifts_h.push_back(estimate_shift(det.h.positions));
        result.shifts_v.push_back(estimate_shift(det.v.positions));
        merged.assign(det.h.positions.begin(), det.h.positions.end());
        merged.insert(merged.end(), det.v.positions.begin(), det.v.positions.end());
        result.shifts_all.push_back(estimate_shift(merged));
    }

    const GroupMoments mh = group_moments(detections, MarkerGroup::H);
    const GroupMoments mv = group_moments(detections, MarkerGroup::V);

    std::pair<int, int> pair = options.view_pair;
    if (options.scan_view_pairs) {
        double best = -1.0;
        for (int i = 0; i < P; ++i) {
            for (int j = 0; j < P; ++j) {
                if (i == j) continue;
                const double den = std::abs(mh.m2[i] * mv.m2[j] - mh.m2[j] * mv.m2[i]);
                if (den > best) {
                    best = den;
                    pair = {i, j};
                }
            }
        }
    }
    if (pair.first < 0 || pair.first >= P || pair.second < 0 || pair.second >= P ||
        pair.first == pair.second) {
        throw CalibError(ErrorCode::InvalidArgument,
                         fmt::format("calibrate_parallel: invalid view pair ({}, {})", pair.first,
                                     pair.second));
    }
    result.view_pair = pair;
    const auto [i0, i1] = pair;

    result.alpha0 = estimate_alpha0(mh.m2[i0], mv.m2[i0], mh.m2[i1], mv.m2[i1], branch);
    result.coefficients =
        estimate_coefficients(result.alpha0, mh.m2[i0], mv.m2[i0], mh.m3[i0], mv.m3[i0]);
    result.angles = estimate_angles(result.coefficients, mh, mv, &result.unit_circle_deviation);
    return result;
}

}  // namespace tomocal
