#include "tomocal/dcc.hpp"

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <fmt/format.h>
#include <limits>
#include <numbers>

#include "tomocal/errors.hpp"
#include "tomocal/tolerances.hpp"

namespace tomocal {

namespace {

constexpr double kPairAngleTol = 1e-9;

double rms(std::span<const double> xs) {
    if (xs.empty()) return 0.0;
    double acc = 0.0;
    for (double x : xs) acc += x * x;
    return std::sqrt(acc / static_cast<double>(xs.size()));
}

double power(double base, int k) {
    double acc = 1.0;
    for (int i = 0; i < k; ++i) acc *= base;
    return acc;
}

std::vector<double> parallel_basis_row(double alpha, int k) {
    const double c = std::cos(alpha);
    const double s = std::sin(alpha);
    std::vector<double> row(static_cast<std::size_t>(k) + 1);
    for (int j = 0; j <= k; ++j) row[j] = power(c, k - j) * power(s, j);
    return row;
}

std::vector<double> monomial_row(double x, int degree) {
    std::vector<double> row(static_cast<std::size_t>(degree) + 1);
    double acc = 1.0;
    for (int j = 0; j <= degree; ++j) {
        row[j] = acc;
        acc *= x;
    }
    return row;
}

bool residual_passes(double rms_residual, double scale) {
    return rms_residual <=
           std::max(tol::kConsistencyAbs, tol::kConsistencyRel * scale);
}

OrderFitResult fit_order(const std::vector<std::vector<double>>& rows,
                         const std::vector<double>& moments, int order) {
    OrderFitResult result;
    result.order = order;
    LeastSquaresFit fit = basis_fit(rows, moments);
    result.coefficients = std::move(fit.coefficients);
    result.rms_residual = fit.rms_residual;
    result.moment_scale = rms(moments);
    result.pass = residual_passes(result.rms_residual, result.moment_scale);
    return result;
}

// Shared skeleton of both checkers. `row_of` builds the design-matrix row
// of view i at a given order; `moment_of` evaluates the data moment.
template <typename RowFn, typename MomentFn>
ConsistencyReport run_checks(std::size_t view_count, int k_max,
                             std::size_t distinct_abscissae, RowFn row_of,
                             MomentFn moment_of) {
    if (k_max < 0) {
        throw CalibError(ErrorCode::InvalidArgument,
                         "moment consistency: k_max must be >= 0");
    }
    if (distinct_abscissae < static_cast<std::size_t>(k_max) + 1) {
        throw CalibError(
            ErrorCode::InsufficientViews,
            fmt::format("moment consistency: order {} needs at least {} "
                        "distinct views, got {}",
                        k_max, k_max + 1, distinct_abscissae));
    }

    ConsistencyReport report;
    report.k_max = k_max;
    report.all_pass = true;
    report.localization_order = k_max;

    bool found_failure = false;
    for (int k = 0; k <= k_max; ++k) {
        std::vector<std::vector<double>> rows;
        std::vector<double> moments;
        rows.reserve(view_count);
        moments.reserve(view_count);
        for (std::size_t i = 0; i < view_count; ++i) {
            rows.push_back(row_of(i, k));
            moments.push_back(moment_of(i, k));
        }
        OrderFitResult fit = fit_order(rows, moments, k);
        if (!fit.pass && !found_failure) {
            found_failure = true;
            report.localization_order = k;
        }
        report.all_pass = report.all_pass && fit.pass;
        report.orders.push_back(std::move(fit));
    }

    // Leave-one-out refits at the localization order. Needs one spare
    // view beyond exact interpolation to say anything.
    const int k = report.localization_order;
    if (view_count >= static_cast<std::size_t>(k) + 2) {
        report.loo_residuals.resize(view_count, 0.0);
        for (std::size_t out = 0; out < view_count; ++out) {
            std::vector<std::vector<double>> rows;
            std::vector<double> moments;
            rows.reserve(view_count - 1);
            moments.reserve(view_count - 1);
            for (std::size_t i = 0; i < view_count; ++i) {
                if (i == out) continue;
                rows.push_back(row_of(i, k));
                moments.push_back(moment_of(i, k));
            }
            report.loo_residuals[out] =
                basis_fit(rows, moments).rms_residual;
        }
        if (found_failure) {
            auto it = std::min_element(report.loo_residuals.begin(),
                                       report.loo_residuals.end());
            report.flagged_view =
                static_cast<int>(it - report.loo_residuals.begin());
        }
    }

    report.note =
        "Moment conditions are necessary, not sufficient: a pass does not "
        "certify the data, a failure proves inconsistency.";
    return report;
}

std::size_t count_distinct(std::vector<double> values) {
    std::sort(values.begin(), values.end());
    return static_cast<std::size_t>(
        std::unique(values.begin(), values.end()) - values.begin());
}

EvennessCheck evenness_check(std::span<const ParallelDccView> views) {
    EvennessCheck check;
    constexpr double two_pi = 2.0 * std::numbers::pi;
    double scale = 0.0;
    for (const auto& v : views)
        for (double p : v.positions) scale = std::max(scale, std::abs(p));
    const double mismatch_tol =
        std::max(tol::kConsistencyAbs, tol::kConsistencyRel * scale);

    for (std::size_t i = 0; i < views.size(); ++i) {
        for (std::size_t j = i + 1; j < views.size(); ++j) {
            double gap = std::fmod(views[j].alpha - views[i].alpha, two_pi);
            if (gap < 0) gap += two_pi;
            if (std::abs(gap - std::numbers::pi) > kPairAngleTol) continue;
            check.pair_count += 1;
            if (views[i].positions.size() != views[j].positions.size()) {
                check.pass = false;
                check.max_mismatch =
                    std::numeric_limits<double>::infinity();
                continue;
            }
            std::vector<double> lhs(views[j].positions.begin(),
                                    views[j].positions.end());
            std::vector<double> rhs;
            rhs.reserve(views[i].positions.size());
            for (double p : views[i].positions) rhs.push_back(-p);
            std::sort(lhs.begin(), lhs.end());
            std::sort(rhs.begin(), rhs.end());
            for (std::size_t m = 0; m < lhs.size(); ++m) {
                check.max_mismatch = std::max(check.max_mismatch,
                                              std::abs(lhs[m] - rhs[m]));
            }
        }
    }

    check.testable = check.pair_count > 0;
    if (!check.testable) {
        check.note = "not testable on this view set (no angle pair "
                     "separated by pi)";
        return check;
    }
    check.pass = check.pass && check.max_mismatch <= mismatch_tol;
    check.note = fmt::format("{} opposed-angle pair(s) compared", check.pair_count);
    return check;
}

}  // namespace

LeastSquaresFit basis_fit(const std::vector<std::vector<double>>& rows,
                          std::span<const double> ys) {
    if (rows.empty() || rows.size() != ys.size()) {
        throw CalibError(ErrorCode::InvalidArgument,
                         "basis_fit: need one observation per design row");
    }
    const auto n = static_cast<Eigen::Index>(rows.size());
    const auto m = static_cast<Eigen::Index>(rows.front().size());
    if (m == 0 || n < m) {
        throw CalibError(
            ErrorCode::InvalidArgument,
            fmt::format("basis_fit: {} observations cannot determine {} "
                        "coefficients",
                        n, m));
    }

    Eigen::MatrixXd a(n, m);
    Eigen::VectorXd b(n);
    for (Eigen::Index i = 0; i < n; ++i) {
        if (static_cast<Eigen::Index>(rows[i].size()) != m) {
            throw CalibError(ErrorCode::InvalidArgument,
                             "basis_fit: ragged design matrix");
        }
        for (Eigen::Index j = 0; j < m; ++j) a(i, j) = rows[i][j];
        b(i) = ys[i];
    }

    Eigen::JacobiSVD<Eigen::MatrixXd> svd(
        a, Eigen::ComputeThinU | Eigen::ComputeThinV);
    if (svd.rank() < m) {
        throw CalibError(
            ErrorCode::RankDeficient,
            fmt::format("basis_fit: design matrix rank {} < {}", svd.rank(),
                        m));
    }
    Eigen::VectorXd x = svd.solve(b);

    LeastSquaresFit fit;
    fit.coefficients.assign(x.data(), x.data() + x.size());
    fit.rms_residual =
        std::sqrt((a * x - b).squaredNorm() / static_cast<double>(n));
    return fit;
}

LeastSquaresFit polynomial_fit(std::span<const double> xs,
                               std::span<const double> ys, int degree) {
    if (degree < 0) {
        throw CalibError(ErrorCode::InvalidArgument,
                         "polynomial_fit: degree must be >= 0");
    }
    if (xs.size() != ys.size() ||
        xs.size() < static_cast<std::size_t>(degree) + 1) {
        throw CalibError(
            ErrorCode::InvalidArgument,
            fmt::format("polynomial_fit: degree {} needs more than {} "
                        "samples",
                        degree, degree));
    }
    std::vector<std::vector<double>> rows;
    rows.reserve(xs.size());
    for (double x : xs) rows.push_back(monomial_row(x, degree));
    return basis_fit(rows, ys);
}

ConsistencyReport parallel_moment_consistency(
    std::span<const ParallelDccView> views, int k_max) {
    std::vector<double> alphas;
    alphas.reserve(views.size());
    for (const auto& v : views) alphas.push_back(v.alpha);

    auto row_of = [&](std::size_t i, int k) {
        return parallel_basis_row(views[i].alpha, k);
    };
    auto moment_of = [&](std::size_t i, int k) {
        double acc = 0.0;
        for (double p : views[i].positions) acc += power(p, k);
        return acc;
    };

    ConsistencyReport report = run_checks(
        views.size(), k_max, count_distinct(std::move(alphas)), row_of,
        moment_of);
    report.evenness = evenness_check(views);
    if (report.evenness.testable && !report.evenness.pass)
        report.all_pass = false;
    return report;
}

ConsistencyReport fanbeam_moment_consistency(
    std::span<const FanBeamDccView> views, int k_max) {
    std::vector<double> lambdas;
    lambdas.reserve(views.size());
    for (std::size_t i = 0; i < views.size(); ++i) {
        if (views[i].weights.size() != views[i].positions.size()) {
            throw CalibError(
                ErrorCode::InvalidArgument,
                "fanbeam_moment_consistency: every position needs a weight",
                static_cast<int>(i));
        }
        lambdas.push_back(views[i].lambda);
    }

    auto row_of = [&](std::size_t i, int k) {
        return monomial_row(views[i].lambda, k);
    };
    auto moment_of = [&](std::size_t i, int k) {
        double acc = 0.0;
        for (std::size_t j = 0; j < views[i].positions.size(); ++j)
            acc += views[i].weights[j] * power(views[i].positions[j], k);
        return acc;
    };

    ConsistencyReport report = run_checks(
        views.size(), k_max, count_distinct(std::move(lambdas)), row_of,
        moment_of);
    report.evenness.testable = false;
    report.evenness.note = "not applicable to fan-beam data";
    return report;
}

}  // namespace tomocal
